//! Residual-based verification of candidate solutions.
//!
//! Parametrized candidates are checked against the normalized and the relaxed
//! parametrized concepts, physical-time candidates against the local and the
//! differential concept. Every condition produces a nonnegative residual that
//! is compared with the caller's tolerance.

mod parametrized;
mod physical;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::paths::{LipschitzPath, PathError};

pub use parametrized::{check_normalized_pbv, check_relaxed, energy_identity_gap, energy_residual};
pub use physical::{check_differential, check_local};

/// Default tolerance for exactly representable candidates.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Path(#[from] PathError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Concept {
    Differential,
    Local,
    NormalizedPbv,
    Relaxed,
}

impl Concept {
    pub fn as_str(self) -> &'static str {
        match self {
            Concept::Differential => "differential",
            Concept::Local => "local",
            Concept::NormalizedPbv => "normalized_pbv",
            Concept::Relaxed => "relaxed",
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    /// `t_hat(0) = 0`, `t_hat(S) = T`, `z_hat(0) = z0`.
    Endpoints,
    /// `t_hat' >= 0` and `t_hat' dist(-D_z Î, ∂R(0)) = 0`.
    Complementarity,
    /// `t_hat' + R(z_hat') + ||z_hat'|| dist(-D_z Î, ∂R(0)) = 1`.
    Normalization,
    EnergyIdentity,
    /// Switch-point compatibility of `ell_hat` with the one-sided limits of
    /// the load.
    LoadCompatibility,
    /// `ell_hat = ell ∘ t_hat` almost everywhere on the increasing set.
    LoadConsistency,
    LocalStability,
    EnergyInequality,
    /// `0 ∈ ∂R(z') + D_z I(t, z)` almost everywhere.
    Inclusion,
    InitialValue,
}

impl ConditionId {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionId::Endpoints => "endpoints",
            ConditionId::Complementarity => "complementarity",
            ConditionId::Normalization => "normalization",
            ConditionId::EnergyIdentity => "energy_identity",
            ConditionId::LoadCompatibility => "load_compatibility",
            ConditionId::LoadConsistency => "load_consistency",
            ConditionId::LocalStability => "local_stability",
            ConditionId::EnergyInequality => "energy_inequality",
            ConditionId::Inclusion => "inclusion",
            ConditionId::InitialValue => "initial_value",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a residual was attained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum Location {
    Parameter { s: f64 },
    ParameterInterval { from: f64, to: f64 },
    Time { t: f64 },
    TimePair { t1: f64, t2: f64 },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Parameter { s } => write!(f, "s = {s}"),
            Location::ParameterInterval { from, to } => write!(f, "s in ({from}, {to})"),
            Location::Time { t } => write!(f, "t = {t}"),
            Location::TimePair { t1, t2 } => write!(f, "t1 = {t1}, t2 = {t2}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub location: Location,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub id: ConditionId,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Location of the largest residual.
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub concept: Concept,
    pub conditions: Vec<ConditionResult>,
    pub passed: bool,
}

impl CheckReport {
    pub(crate) fn new(concept: Concept) -> Self {
        CheckReport {
            concept,
            conditions: Vec::new(),
            passed: true,
        }
    }

    pub(crate) fn push(&mut self, id: ConditionId, worst: Worst, tolerance: f64) {
        let residual = worst.residual.max(0.0);
        let passed = residual <= tolerance;
        self.passed &= passed;
        self.conditions.push(ConditionResult {
            id,
            residual,
            tolerance,
            passed,
            witness: worst.witness,
        });
    }

    pub fn condition(&self, id: ConditionId) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.id == id)
    }

    pub fn failed(&self) -> impl Iterator<Item = &ConditionResult> {
        self.conditions.iter().filter(|c| !c.passed)
    }

    pub fn worst_residual(&self) -> f64 {
        self.conditions
            .iter()
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "concept: {}  verdict: {}",
            self.concept,
            if self.passed { "PASS" } else { "FAIL" }
        )?;
        writeln!(
            f,
            "{:<20} {:>12} {:>10}  {:<6} witness",
            "condition", "residual", "tol", ""
        )?;
        for c in &self.conditions {
            let witness = c
                .witness
                .as_ref()
                .map(|w| format!("{} {}", w.location, w.detail))
                .unwrap_or_default();
            writeln!(
                f,
                "{:<20} {:>12.4e} {:>10.1e}  {:<6} {}",
                c.id.as_str(),
                c.residual,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" },
                witness.trim_end()
            )?;
        }
        Ok(())
    }
}

/// Running maximum of a residual together with its location.
#[derive(Clone, Debug, Default)]
pub(crate) struct Worst {
    pub residual: f64,
    pub witness: Option<Witness>,
}

impl Worst {
    pub fn update(&mut self, residual: f64, location: impl FnOnce() -> (Location, String)) {
        if residual > self.residual || (self.witness.is_none() && residual >= self.residual) {
            let (location, detail) = location();
            self.residual = residual;
            self.witness = Some(Witness { location, detail });
        }
    }
}

/// Maximal open intervals on which a nondecreasing `t_hat` strictly
/// increases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncreasingSet {
    pub intervals: Vec<(f64, f64)>,
}

impl IncreasingSet {
    pub fn contains(&self, s: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a < s && s < b)
    }

    /// Closed parameter intervals where `t_hat` is constant, ordered.
    pub fn plateaus(&self, s_end: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut cursor = 0.0;
        for &(a, b) in &self.intervals {
            if a > cursor {
                out.push((cursor, a));
            }
            cursor = b;
        }
        if cursor < s_end {
            out.push((cursor, s_end));
        }
        out
    }
}

/// Absolute slope threshold below which a segment of `t_hat` counts as flat.
pub(crate) fn flat_tolerance(t_hat: &LipschitzPath) -> f64 {
    let scale = t_hat
        .knots()
        .iter()
        .map(|k| k.value[0].abs())
        .fold(1.0, f64::max);
    1e-12 * scale
}

/// Computes the increasing set of a nondecreasing scalar `t_hat`.
pub fn increasing_set(t_hat: &LipschitzPath) -> Result<IncreasingSet, CheckError> {
    if t_hat.dim() != 1 {
        return Err(CheckError::Path(PathError::NotScalar(t_hat.dim())));
    }
    let tol = flat_tolerance(t_hat);
    let knots = t_hat.knots();
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for w in knots.windows(2) {
        let rise = w[1].value[0] - w[0].value[0];
        if rise < -tol {
            return Err(CheckError::Precondition(format!(
                "t_hat decreases on [{}, {}]",
                w[0].t, w[1].t
            )));
        }
        if rise > tol {
            match intervals.last_mut() {
                Some(last) if last.1 == w[0].t => last.1 = w[1].t,
                _ => intervals.push((w[0].t, w[1].t)),
            }
        }
    }
    Ok(IncreasingSet { intervals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increasing_set_examples() {
        let t = LipschitzPath::scalar_from_points(&[0.0, 1.0, 1.5, 2.5], &[0.0, 1.0, 1.0, 2.0])
            .unwrap();
        let m = increasing_set(&t).unwrap();
        assert_eq!(m.intervals, vec![(0.0, 1.0), (1.5, 2.5)]);
        assert_eq!(m.plateaus(2.5), vec![(1.0, 1.5)]);
        let id = LipschitzPath::scalar_from_points(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(increasing_set(&id).unwrap().intervals, vec![(0.0, 2.0)]);
        let flat = LipschitzPath::scalar_from_points(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        assert!(increasing_set(&flat).unwrap().intervals.is_empty());
        let down = LipschitzPath::scalar_from_points(&[0.0, 1.0], &[0.5, 0.0]).unwrap();
        assert!(increasing_set(&down).is_err());
    }
}
