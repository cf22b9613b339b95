//! Arc-length parametrized candidate solutions `(S, t_hat, z_hat, ell_hat)`.

use serde::{Deserialize, Serialize};

use crate::paths::{LipschitzPath, PathError, PiecewisePath};

#[derive(Clone, Serialize, Deserialize)]
struct TupleSpec {
    t_hat: LipschitzPath,
    z_hat: LipschitzPath,
    ell_hat: PiecewisePath,
}

/// A parametrized trajectory: artificial time `s in [0, S]`, physical time
/// `t_hat(s)`, state `z_hat(s)` and parametrized load `ell_hat(s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TupleSpec", into = "TupleSpec")]
pub struct ParametrizedTuple {
    t_hat: LipschitzPath,
    z_hat: LipschitzPath,
    ell_hat: PiecewisePath,
}

impl TryFrom<TupleSpec> for ParametrizedTuple {
    type Error = PathError;

    fn try_from(spec: TupleSpec) -> Result<Self, PathError> {
        ParametrizedTuple::new(spec.t_hat, spec.z_hat, spec.ell_hat)
    }
}

impl From<ParametrizedTuple> for TupleSpec {
    fn from(t: ParametrizedTuple) -> Self {
        TupleSpec {
            t_hat: t.t_hat,
            z_hat: t.z_hat,
            ell_hat: t.ell_hat,
        }
    }
}

impl ParametrizedTuple {
    /// Checks that all three paths live on a common `[0, S]` with `S > 0`,
    /// that `t_hat` is scalar and that `z_hat` and `ell_hat` share their
    /// dimension. Endpoint values and monotonicity are left to the checkers.
    pub fn new(
        t_hat: LipschitzPath,
        z_hat: LipschitzPath,
        ell_hat: PiecewisePath,
    ) -> Result<Self, PathError> {
        if t_hat.dim() != 1 {
            return Err(PathError::NotScalar(t_hat.dim()));
        }
        if z_hat.dim() != ell_hat.dim() {
            return Err(PathError::IncompatibleDimensions(
                z_hat.dim(),
                ell_hat.dim(),
            ));
        }
        let s_end = t_hat.end();
        let tol = t_hat.snap_tolerance();
        for p in [z_hat.as_path(), &ell_hat] {
            if (p.start() - t_hat.start()).abs() > tol || (p.end() - s_end).abs() > tol {
                return Err(PathError::Precondition(format!(
                    "parameter domains differ: [{}, {}] vs [{}, {}]",
                    t_hat.start(),
                    s_end,
                    p.start(),
                    p.end()
                )));
            }
        }
        if t_hat.start().abs() > tol || s_end <= 0.0 {
            return Err(PathError::Precondition(format!(
                "parameter domain must be [0, S] with S > 0, got [{}, {s_end}]",
                t_hat.start()
            )));
        }
        Ok(ParametrizedTuple {
            t_hat,
            z_hat,
            ell_hat,
        })
    }

    /// Final artificial time `S`.
    pub fn s_end(&self) -> f64 {
        self.t_hat.end()
    }

    pub fn t_hat(&self) -> &LipschitzPath {
        &self.t_hat
    }

    pub fn z_hat(&self) -> &LipschitzPath {
        &self.z_hat
    }

    pub fn ell_hat(&self) -> &PiecewisePath {
        &self.ell_hat
    }

    pub fn dim(&self) -> usize {
        self.z_hat.dim()
    }

    /// Sorted union of the breakpoints of all three paths.
    pub fn breakpoints(&self) -> Vec<f64> {
        PiecewisePath::merged_breakpoints(&[&self.t_hat, &self.z_hat, &self.ell_hat])
    }

    /// Replaces `ell_hat`.
    pub fn with_ell_hat(&self, ell_hat: PiecewisePath) -> Result<Self, PathError> {
        ParametrizedTuple::new(self.t_hat.clone(), self.z_hat.clone(), ell_hat)
    }

    /// Constant continuation of all three components to `[0, s_end]`.
    pub fn extended_to(&self, s_end: f64) -> Self {
        ParametrizedTuple {
            t_hat: LipschitzPath::new(self.t_hat.extended_to(s_end)).expect("continuous"),
            z_hat: LipschitzPath::new(self.z_hat.extended_to(s_end)).expect("continuous"),
            ell_hat: self.ell_hat.extended_to(s_end),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::scalar;

    #[test]
    fn validates_domains() {
        let t = LipschitzPath::scalar_from_points(&[0.0, 2.0], &[0.0, 2.0]).unwrap();
        let z = LipschitzPath::scalar_from_points(&[0.0, 2.0], &[0.0, 0.0]).unwrap();
        let l = PiecewisePath::constant(0.0, 2.0, scalar(0.0)).unwrap();
        let tuple = ParametrizedTuple::new(t.clone(), z.clone(), l).unwrap();
        assert_eq!(tuple.s_end(), 2.0);
        let short = PiecewisePath::constant(0.0, 1.0, scalar(0.0)).unwrap();
        assert!(ParametrizedTuple::new(t, z, short).is_err());
        let ext = tuple.extended_to(3.0);
        assert_eq!(ext.s_end(), 3.0);
        assert_eq!(ext.t_hat().scalar(3.0).unwrap(), 2.0);
    }
}
