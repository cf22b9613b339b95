//! Dissipation potentials, distances to their subdifferentials and the
//! vanishing-viscosity contact potential.

mod polytope;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::EnergyModel;
use crate::paths::Vector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvexError {
    #[error("invalid dissipation parameter: {0}")]
    InvalidParameter(String),
    #[error("the vertices do not span a full-dimensional polytope")]
    DegeneratePolytope,
    #[error("the origin is not an interior point of the polytope")]
    OriginNotInterior,
    #[error("projection did not converge within {0} iterations")]
    NoConvergence(usize),
}

/// The three supported families of dissipation potentials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DissipationKind {
    /// `R(v) = alpha ||v||`.
    ScaledNorm { alpha: f64 },
    /// `R(v) = sum_i w_i |v_i|`.
    WeightedL1 { weights: Vec<f64> },
    /// `R(v) = max_i <a_i, v>`, i.e. `∂R(0) = conv{a_i}`.
    Polyhedral { vertices: Vec<Vec<f64>> },
}

/// A positively 1-homogeneous convex coercive potential together with its
/// norm-equivalence constants `lower ||v|| <= R(v) <= upper ||v||`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DissipationKind", into = "DissipationKind")]
pub struct Dissipation {
    kind: DissipationKind,
    vertices: Vec<Vector>,
    lower: f64,
    upper: f64,
}

impl TryFrom<DissipationKind> for Dissipation {
    type Error = ConvexError;

    fn try_from(kind: DissipationKind) -> Result<Self, ConvexError> {
        Dissipation::new(kind)
    }
}

impl From<Dissipation> for DissipationKind {
    fn from(r: Dissipation) -> Self {
        r.kind
    }
}

/// Value of the contact potential split into its two parts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactPotentialValue {
    /// `R(v)`.
    pub r_part: f64,
    /// `||v|| dist(w, ∂R(0))`.
    pub dist_part: f64,
    pub total: f64,
}

/// Outcome of the initial stability test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityCheck {
    pub residual: f64,
    pub stable: bool,
}

impl Dissipation {
    pub fn new(kind: DissipationKind) -> Result<Self, ConvexError> {
        let (vertices, lower, upper) = match &kind {
            DissipationKind::ScaledNorm { alpha } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(ConvexError::InvalidParameter(format!("alpha = {alpha}")));
                }
                (Vec::new(), *alpha, *alpha)
            }
            DissipationKind::WeightedL1 { weights } => {
                if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(ConvexError::InvalidParameter(format!(
                        "weights = {weights:?}"
                    )));
                }
                let lower = weights.iter().copied().fold(f64::INFINITY, f64::min);
                let upper = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
                (Vec::new(), lower, upper)
            }
            DissipationKind::Polyhedral { vertices } => {
                let d = vertices.first().map_or(0, Vec::len);
                if d == 0 || vertices.iter().any(|v| v.len() != d) {
                    return Err(ConvexError::InvalidParameter(
                        "vertices must be nonempty and share one dimension".into(),
                    ));
                }
                if vertices.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(ConvexError::InvalidParameter("non-finite vertex".into()));
                }
                let vs: Vec<Vector> = vertices
                    .iter()
                    .map(|v| Vector::from_vec(v.clone()))
                    .collect();
                let lower = polytope::inradius_at_origin(&vs)?;
                let upper = vs.iter().map(|v| v.norm()).fold(0.0, f64::max);
                (vs, lower, upper)
            }
        };
        Ok(Dissipation {
            kind,
            vertices,
            lower,
            upper,
        })
    }

    pub fn scaled_norm(alpha: f64) -> Result<Self, ConvexError> {
        Dissipation::new(DissipationKind::ScaledNorm { alpha })
    }

    pub fn weighted_l1(weights: Vec<f64>) -> Result<Self, ConvexError> {
        Dissipation::new(DissipationKind::WeightedL1 { weights })
    }

    pub fn polyhedral(vertices: Vec<Vec<f64>>) -> Result<Self, ConvexError> {
        Dissipation::new(DissipationKind::Polyhedral { vertices })
    }

    pub fn kind(&self) -> &DissipationKind {
        &self.kind
    }

    /// Constant `c` with `c ||v|| <= R(v)`.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Constant `C` with `R(v) <= C ||v||`.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Fixed state dimension, if the kind prescribes one.
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            DissipationKind::ScaledNorm { .. } => None,
            DissipationKind::WeightedL1 { weights } => Some(weights.len()),
            DissipationKind::Polyhedral { .. } => Some(self.vertices[0].len()),
        }
    }

    /// Whether `R(-v) = R(v)` is guaranteed, which is only asserted for
    /// scaled norms.
    pub fn is_symmetric(&self) -> bool {
        matches!(self.kind, DissipationKind::ScaledNorm { .. })
    }

    fn assert_dim(&self, v: &Vector) {
        if let Some(d) = self.dim() {
            assert_eq!(
                v.len(),
                d,
                "vector dimension does not match the dissipation"
            );
        }
    }

    /// `R(v)`.
    pub fn eval(&self, v: &Vector) -> f64 {
        self.assert_dim(v);
        match &self.kind {
            DissipationKind::ScaledNorm { alpha } => alpha * v.norm(),
            DissipationKind::WeightedL1 { weights } => {
                weights.iter().zip(v.iter()).map(|(w, x)| w * x.abs()).sum()
            }
            DissipationKind::Polyhedral { .. } => self
                .vertices
                .iter()
                .map(|a| a.dot(v))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Euclidean projection of `w` onto `∂R(0)`.
    pub fn project_subdiff0(&self, w: &Vector) -> Vector {
        self.assert_dim(w);
        match &self.kind {
            DissipationKind::ScaledNorm { alpha } => {
                let n = w.norm();
                if n <= *alpha {
                    w.clone()
                } else {
                    w * (alpha / n)
                }
            }
            DissipationKind::WeightedL1 { weights } => {
                Vector::from_fn(w.len(), |i, _| w[i].clamp(-weights[i], weights[i]))
            }
            DissipationKind::Polyhedral { .. } => polytope::project_onto_hull(&self.vertices, w)
                .expect("minimum-norm iteration on a validated polytope"),
        }
    }

    /// `dist(w, ∂R(0))`.
    pub fn dist_to_subdiff0(&self, w: &Vector) -> f64 {
        match &self.kind {
            DissipationKind::ScaledNorm { alpha } => (w.norm() - alpha).max(0.0),
            DissipationKind::WeightedL1 { weights } => {
                self.assert_dim(w);
                weights
                    .iter()
                    .zip(w.iter())
                    .map(|(b, x)| (x.abs() - b).max(0.0).powi(2))
                    .sum::<f64>()
                    .sqrt()
            }
            DissipationKind::Polyhedral { .. } => (w - self.project_subdiff0(w)).norm(),
        }
    }

    /// `dist(w, ∂R(v))` where `∂R(v) = {xi in ∂R(0) : <xi, v> = R(v)}`.
    pub fn subdiff_distance(&self, v: &Vector, w: &Vector) -> f64 {
        self.assert_dim(v);
        if v.iter().all(|&x| x == 0.0) {
            return self.dist_to_subdiff0(w);
        }
        match &self.kind {
            DissipationKind::ScaledNorm { alpha } => (w - v * (alpha / v.norm())).norm(),
            DissipationKind::WeightedL1 { weights } => (0..v.len())
                .map(|i| {
                    let gap = if v[i] == 0.0 {
                        (w[i].abs() - weights[i]).max(0.0)
                    } else {
                        (w[i] - weights[i] * v[i].signum()).abs()
                    };
                    gap * gap
                })
                .sum::<f64>()
                .sqrt(),
            DissipationKind::Polyhedral { .. } => {
                let r = self.eval(v);
                let tol = 1e-12 * self.upper * v.norm();
                let face: Vec<Vector> = self
                    .vertices
                    .iter()
                    .filter(|a| a.dot(v) >= r - tol)
                    .cloned()
                    .collect();
                let p = polytope::project_onto_hull(&face, w)
                    .expect("minimum-norm iteration on a nonempty face");
                (w - p).norm()
            }
        }
    }

    /// Contact potential `R(v) + ||v|| dist(w, ∂R(0))`.
    pub fn contact_potential(&self, v: &Vector, w: &Vector) -> ContactPotentialValue {
        let r_part = self.eval(v);
        let speed = v.norm();
        let dist_part = if speed == 0.0 {
            0.0
        } else {
            speed * self.dist_to_subdiff0(w)
        };
        ContactPotentialValue {
            r_part,
            dist_part,
            total: r_part + dist_part,
        }
    }
}

/// Tests whether `ell0 - DE(z0)` lies in `∂R(0)` up to `tol`.
pub fn check_initial_stability(
    r: &Dissipation,
    energy: &EnergyModel,
    z0: &Vector,
    ell0: &Vector,
    tol: f64,
) -> StabilityCheck {
    let residual = r.dist_to_subdiff0(&(ell0 - energy.gradient(z0)));
    StabilityCheck {
        residual,
        stable: residual <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::scalar;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn evaluation_examples() {
        let abs = Dissipation::scaled_norm(1.0).unwrap();
        assert_eq!(abs.eval(&scalar(0.5)), 0.5);
        assert_eq!(abs.eval(&scalar(0.0)), 0.0);
        let r = Dissipation::weighted_l1(vec![0.5, 1.0]).unwrap();
        assert_eq!(r.eval(&v(&[1.0, 0.5])), 1.0);
        assert_eq!(r.lower(), 0.5);
        assert_abs_diff_eq!(r.upper(), 1.25f64.sqrt());
    }

    #[test]
    fn distances_to_subdifferential() {
        let abs = Dissipation::scaled_norm(1.0).unwrap();
        assert_eq!(abs.dist_to_subdiff0(&scalar(2.0)), 1.0);
        let r = Dissipation::weighted_l1(vec![0.5, 1.0]).unwrap();
        assert_abs_diff_eq!(r.dist_to_subdiff0(&v(&[0.8, 0.4])), 0.3, epsilon = 1e-15);
        let box_poly = Dissipation::polyhedral(vec![
            vec![0.5, 1.0],
            vec![-0.5, 1.0],
            vec![-0.5, -1.0],
            vec![0.5, -1.0],
        ])
        .unwrap();
        assert_abs_diff_eq!(
            box_poly.dist_to_subdiff0(&v(&[0.8, 0.4])),
            0.3,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(box_poly.lower(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(box_poly.eval(&v(&[1.0, 0.5])), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn contact_potential_examples() {
        let r = Dissipation::weighted_l1(vec![0.5, 1.0]).unwrap();
        let p = r.contact_potential(&v(&[1.0, 0.5]), &v(&[0.8, 0.4]));
        assert_abs_diff_eq!(p.total, 1.0 + 1.25f64.sqrt() * 0.3, epsilon = 1e-14);
        let abs = Dissipation::scaled_norm(1.0).unwrap();
        assert_eq!(abs.contact_potential(&scalar(0.0), &scalar(9.0)).total, 0.0);
        assert_eq!(abs.contact_potential(&scalar(1.0), &scalar(0.5)).total, 1.0);
    }

    #[test]
    fn subdifferential_at_nonzero_rates() {
        let abs = Dissipation::scaled_norm(2.0).unwrap();
        assert_eq!(abs.subdiff_distance(&scalar(3.0), &scalar(2.0)), 0.0);
        assert_eq!(abs.subdiff_distance(&scalar(-3.0), &scalar(2.0)), 4.0);
        let r = Dissipation::weighted_l1(vec![1.0, 1.0]).unwrap();
        assert_eq!(r.subdiff_distance(&v(&[1.0, 0.0]), &v(&[1.0, 0.5])), 0.0);
        let poly = Dissipation::polyhedral(vec![
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
        ])
        .unwrap();
        assert_abs_diff_eq!(
            poly.subdiff_distance(&v(&[1.0, 0.0]), &v(&[0.0, 0.5])),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(Dissipation::scaled_norm(0.0).is_err());
        assert!(Dissipation::weighted_l1(vec![1.0, -1.0]).is_err());
        assert!(
            Dissipation::polyhedral(vec![vec![1.0, 0.0], vec![2.0, 1.0], vec![2.0, -1.0]]).is_err()
        );
    }

    #[test]
    fn serde_uses_tagged_kinds() {
        let r: Dissipation =
            serde_json::from_str(r#"{"kind": "scaled_norm", "alpha": 1.0}"#).unwrap();
        assert!(r.is_symmetric());
        let json =
            serde_json::to_string(&Dissipation::weighted_l1(vec![0.5, 1.0]).unwrap()).unwrap();
        assert_eq!(json, r#"{"kind":"weighted_l1","weights":[0.5,1.0]}"#);
    }
}
