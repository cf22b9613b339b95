//! TOML run configuration and the registry of built-in problems.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::convex::Dissipation;
use crate::experiments::{asymmetric_jump_control, counterexample1, counterexample2};
use crate::model::{EnergyModel, RISProblem};
use crate::paths::{io, PiecewisePath, Vector};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unknown built-in {kind} '{name}' (expected one of {expected})")]
    UnknownName {
        kind: &'static str,
        name: String,
        expected: &'static str,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Check,
    Construct,
    Counterexample1,
    Counterexample2,
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ConceptArg {
    Differential,
    Local,
    Pbv,
    Relaxed,
}

/// A problem given either by name or explicitly.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    /// `ce1`, `ce2` or `asymmetric`.
    pub builtin: Option<String>,
    pub n: Option<u32>,
    pub energy: Option<EnergyModel>,
    pub dissipation: Option<Dissipation>,
    /// CSV file or built-in load name, overriding the problem's load.
    pub load: Option<String>,
    pub z0: Option<Vec<f64>>,
    pub ell0: Option<Vec<f64>>,
    /// Must agree with the end of the load when given.
    pub final_time: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub epsilon: Option<f64>,
    pub step: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub epsilons: Option<Vec<f64>>,
    /// `first` or `second`.
    pub reference: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub concept: Option<ConceptArg>,
    pub solution: Option<PathBuf>,
    #[serde(default)]
    pub problem: ProblemSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text).map_err(|message| ConfigError::Parse {
            path: path.to_owned(),
            message,
        })
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        if text.trim().is_empty() {
            return Err("configuration is empty".into());
        }
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn empty(command: Command) -> Self {
        RunConfig {
            command,
            out: None,
            tol: None,
            concept: None,
            solution: None,
            problem: ProblemSpec::default(),
            solver: SolverSpec::default(),
            sweep: SweepSpec::default(),
        }
    }
}

pub const BUILTIN_PROBLEMS: &str = "ce1, ce2, asymmetric";
const BUILTIN_LOADS: &str = "zero, step, or a CSV file";

fn builtin_problem(name: &str, n: u32) -> Result<RISProblem, ConfigError> {
    let case = match name {
        "ce1" => counterexample1(n),
        "ce2" => counterexample2(n),
        "asymmetric" => asymmetric_jump_control(),
        _ => {
            return Err(ConfigError::UnknownName {
                kind: "problem",
                name: name.into(),
                expected: BUILTIN_PROBLEMS,
            })
        }
    };
    case.map(|c| c.problem)
        .map_err(|e| ConfigError::Invalid(e.to_string()))
}

fn resolve_load(
    spec: &str,
    base: Option<&RISProblem>,
    dim: usize,
) -> Result<PiecewisePath, ConfigError> {
    let domain = base.map_or((0.0, 2.0), |p| p.load().domain());
    let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
    match spec {
        "zero" => PiecewisePath::zero(domain.0, domain.1, dim).map_err(|e| invalid(&e)),
        "step" => crate::experiments::step_load().map_err(|e| invalid(&e)),
        file if Path::new(file).exists() => io::load_path(file).map_err(|e| invalid(&e)),
        other => Err(ConfigError::UnknownName {
            kind: "load",
            name: other.into(),
            expected: BUILTIN_LOADS,
        }),
    }
}

impl ProblemSpec {
    /// Builds the problem; explicit fields override those of the built-in.
    pub fn build(&self, default_builtin: &str) -> Result<RISProblem, ConfigError> {
        let n = self.n.unwrap_or(4);
        let explicit = self.energy.is_some() && self.dissipation.is_some();
        let base = match (&self.builtin, explicit) {
            (Some(name), _) => Some(builtin_problem(name, n)?),
            (None, true) => None,
            (None, false) => Some(builtin_problem(default_builtin, n)?),
        };
        let energy = match (&self.energy, &base) {
            (Some(e), _) => e.clone(),
            (None, Some(b)) => b.energy().clone(),
            (None, None) => unreachable!("explicit problems carry an energy"),
        };
        let dissipation = match (&self.dissipation, &base) {
            (Some(r), _) => r.clone(),
            (None, Some(b)) => b.dissipation().clone(),
            (None, None) => unreachable!("explicit problems carry a dissipation"),
        };
        let dim = energy.dim();
        let load = match (&self.load, &base) {
            (Some(spec), _) => resolve_load(spec, base.as_ref(), dim)?,
            (None, Some(b)) => b.load().clone(),
            (None, None) => {
                return Err(ConfigError::Invalid("explicit problems need a load".into()))
            }
        };
        if let Some(t) = self.final_time {
            if (t - load.end()).abs() > 1e-12 * t.abs().max(1.0) {
                return Err(ConfigError::Invalid(format!(
                    "final_time = {t} but the load ends at {}",
                    load.end()
                )));
            }
        }
        let vector = |v: &Option<Vec<f64>>, fallback: Vector| {
            v.as_ref().map_or(fallback, |x| Vector::from_vec(x.clone()))
        };
        let z0 = vector(
            &self.z0,
            base.as_ref().map_or(Vector::zeros(dim), |b| b.z0().clone()),
        );
        let ell0 = vector(
            &self.ell0,
            load.value(load.start())
                .map_err(|e| ConfigError::Invalid(e.to_string()))?,
        );
        RISProblem::new(energy, dissipation, load, z0, ell0)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_rejected() {
        assert!(RunConfig::parse("").is_err());
        assert!(RunConfig::parse("tol = 1e-8").is_err());
    }

    #[test]
    fn explicit_problem_parses() {
        let text = r#"
            command = "solve"
            [problem]
            energy = { a = [[2.0]], nonlinearity = { type = "zero" } }
            dissipation = { kind = "scaled_norm", alpha = 0.5 }
            load = "zero"
            [solver]
            epsilon = 0.01
        "#;
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.command, Command::Solve);
        let p = cfg.problem.build("ce1").unwrap();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.final_time(), 2.0);
    }

    #[test]
    fn unknown_builtin_is_reported() {
        let spec = ProblemSpec {
            builtin: Some("nope".into()),
            ..Default::default()
        };
        assert!(matches!(
            spec.build("ce1"),
            Err(ConfigError::UnknownName { .. })
        ));
    }
}
