//! Energies `E(z) = ½<Az, z> + F(z)` and the rate-independent problem data.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convex::{check_initial_stability, Dissipation, StabilityCheck};
use crate::paths::{PathError, PiecewisePath, Vector};

/// Default tolerance for the initial stability requirement.
pub const STABILITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("matrix must be square and nonempty, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric (deviation {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: {what} has dimension {found}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("load must be defined on [0, T], got [{0}, {1}]")]
    LoadDomain(f64, f64),
    #[error("initial state is not stable (residual {0:e})")]
    UnstableInitialState(f64),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// A smooth nonlinearity supplied by the caller.
pub trait SmoothNonlinearity: Send + Sync + Debug {
    fn value(&self, z: &Vector) -> f64;
    fn gradient(&self, z: &Vector) -> Vector;
    fn hessian(&self, _z: &Vector) -> Option<DMatrix<f64>> {
        None
    }
}

/// The nonlinear part `F` of the energy.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Nonlinearity {
    #[default]
    Zero,
    /// `F(z) = <b, z>`.
    Linear { b: Vec<f64> },
    /// `F(z) = kappa/4 (||z||² - 1)²`.
    DoubleWell { kappa: f64 },
    /// `F(z) = sum_i p(z_i)` with `p(x) = sum_k coefficients[k] x^k`.
    Polynomial { coefficients: Vec<f64> },
    #[serde(skip)]
    Custom(Arc<dyn SmoothNonlinearity>),
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

fn poly_derivative(c: &[f64], x: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &ck)| acc * x + k as f64 * ck)
}

fn poly_second_derivative(c: &[f64], x: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(2)
        .rev()
        .fold(0.0, |acc, (k, &ck)| acc * x + (k * (k - 1)) as f64 * ck)
}

impl Nonlinearity {
    pub fn value(&self, z: &Vector) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Linear { b } => b.iter().zip(z.iter()).map(|(b, z)| b * z).sum(),
            Nonlinearity::DoubleWell { kappa } => {
                let q = z.norm_squared() - 1.0;
                0.25 * kappa * q * q
            }
            Nonlinearity::Polynomial { coefficients } => {
                z.iter().map(|&x| poly(coefficients, x)).sum()
            }
            Nonlinearity::Custom(f) => f.value(z),
        }
    }

    pub fn gradient(&self, z: &Vector) -> Vector {
        match self {
            Nonlinearity::Zero => Vector::zeros(z.len()),
            Nonlinearity::Linear { b } => Vector::from_column_slice(b),
            Nonlinearity::DoubleWell { kappa } => z * (kappa * (z.norm_squared() - 1.0)),
            Nonlinearity::Polynomial { coefficients } => {
                z.map(|x| poly_derivative(coefficients, x))
            }
            Nonlinearity::Custom(f) => f.gradient(z),
        }
    }

    pub fn hessian(&self, z: &Vector) -> Option<DMatrix<f64>> {
        let d = z.len();
        match self {
            Nonlinearity::Zero | Nonlinearity::Linear { .. } => Some(DMatrix::zeros(d, d)),
            Nonlinearity::DoubleWell { kappa } => Some(
                (DMatrix::identity(d, d) * (z.norm_squared() - 1.0) + z * z.transpose() * 2.0)
                    * *kappa,
            ),
            Nonlinearity::Polynomial { coefficients } => Some(DMatrix::from_diagonal(
                &z.map(|x| poly_second_derivative(coefficients, x)),
            )),
            Nonlinearity::Custom(f) => f.hessian(z),
        }
    }

    /// True when `DF` is constant.
    pub fn is_affine(&self) -> bool {
        match self {
            Nonlinearity::Zero | Nonlinearity::Linear { .. } => true,
            Nonlinearity::Polynomial { coefficients } => coefficients.len() <= 2,
            _ => false,
        }
    }

    /// Cheap sufficient test for a violation of `F >= 0`.
    fn may_be_negative(&self) -> bool {
        match self {
            Nonlinearity::Zero | Nonlinearity::DoubleWell { .. } => false,
            Nonlinearity::Linear { b } => b.iter().any(|&x| x != 0.0),
            Nonlinearity::Polynomial { coefficients } => {
                let degree = coefficients.iter().rposition(|&c| c != 0.0);
                match degree {
                    None => false,
                    Some(k) => k % 2 == 1 || coefficients[k] < 0.0 || coefficients[0] < 0.0,
                }
            }
            Nonlinearity::Custom(_) => false,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct EnergySpec {
    /// Row-major `A`.
    a: Vec<Vec<f64>>,
    #[serde(default)]
    nonlinearity: Nonlinearity,
    #[serde(default)]
    growth_q: Option<f64>,
}

/// `E(z) = ½<Az, z> + F(z)` with symmetric positive definite `A`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "EnergySpec", into = "EnergySpec")]
pub struct EnergyModel {
    a: DMatrix<f64>,
    nonlinearity: Nonlinearity,
    growth_q: Option<f64>,
}

impl TryFrom<EnergySpec> for EnergyModel {
    type Error = ModelError;

    fn try_from(spec: EnergySpec) -> Result<Self, ModelError> {
        let n = spec.a.len();
        if spec.a.iter().any(|row| row.len() != n) {
            return Err(ModelError::NotSquare(n, spec.a.first().map_or(0, Vec::len)));
        }
        let a = DMatrix::from_fn(n, n, |i, j| spec.a[i][j]);
        let mut model = EnergyModel::new(a, spec.nonlinearity)?;
        model.growth_q = spec.growth_q;
        Ok(model)
    }
}

impl From<EnergyModel> for EnergySpec {
    fn from(m: EnergyModel) -> Self {
        EnergySpec {
            a: m.a
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            nonlinearity: m.nonlinearity,
            growth_q: m.growth_q,
        }
    }
}

impl EnergyModel {
    pub fn new(a: DMatrix<f64>, nonlinearity: Nonlinearity) -> Result<Self, ModelError> {
        let (r, c) = a.shape();
        if r != c || r == 0 {
            return Err(ModelError::NotSquare(r, c));
        }
        let scale = a.amax().max(1.0);
        let asym = (&a - a.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(ModelError::NotSymmetric(asym));
        }
        if a.iter().any(|x| !x.is_finite()) || a.clone().cholesky().is_none() {
            return Err(ModelError::NotPositiveDefinite);
        }
        match &nonlinearity {
            Nonlinearity::Linear { b } if b.len() != r => {
                return Err(ModelError::Dimension {
                    what: "linear term",
                    expected: r,
                    found: b.len(),
                })
            }
            Nonlinearity::DoubleWell { kappa } if !(kappa.is_finite() && *kappa >= 0.0) => {
                return Err(ModelError::InvalidParameter(format!("kappa = {kappa}")))
            }
            Nonlinearity::Polynomial { coefficients }
                if coefficients.iter().any(|c| !c.is_finite()) =>
            {
                return Err(ModelError::InvalidParameter(
                    "non-finite coefficient".into(),
                ))
            }
            _ => {}
        }
        if nonlinearity.may_be_negative() {
            log::debug!("the nonlinearity F can take negative values; proceeding anyway");
        }
        Ok(EnergyModel {
            a,
            nonlinearity,
            growth_q: None,
        })
    }

    /// One-dimensional model `E(z) = ½ a z² + F(z)`.
    pub fn scalar(a: f64, nonlinearity: Nonlinearity) -> Result<Self, ModelError> {
        EnergyModel::new(DMatrix::from_element(1, 1, a), nonlinearity)
    }

    pub fn with_growth_exponent(mut self, q: f64) -> Self {
        self.growth_q = Some(q);
        self
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    /// Recorded growth exponent; metadata only.
    pub fn growth_q(&self) -> Option<f64> {
        self.growth_q
    }

    /// `Some(a)` when `A = a I`.
    pub fn identity_multiple(&self) -> Option<f64> {
        let a0 = self.a[(0, 0)];
        let d = self.dim();
        let dev = (&self.a - DMatrix::identity(d, d) * a0).amax();
        (dev <= 1e-14 * a0.abs().max(1.0)).then_some(a0)
    }

    pub fn value(&self, z: &Vector) -> f64 {
        0.5 * z.dot(&(&self.a * z)) + self.nonlinearity.value(z)
    }

    /// `D_z E(z) = Az + DF(z)`.
    pub fn gradient(&self, z: &Vector) -> Vector {
        &self.a * z + self.nonlinearity.gradient(z)
    }

    pub fn hessian(&self, z: &Vector) -> Option<DMatrix<f64>> {
        self.nonlinearity.hessian(z).map(|h| h + &self.a)
    }
}

/// `D_z Î(s, z) = D_z E(z) - ell_hat(s)` with the point value of `ell_hat`.
pub fn grad_i_hat(
    energy: &EnergyModel,
    ell_hat: &PiecewisePath,
    s: f64,
    z: &Vector,
) -> Result<Vector, PathError> {
    Ok(energy.gradient(z) - ell_hat.value(s)?)
}

/// A finite-dimensional rate-independent system on `[0, T]`.
#[derive(Clone, Debug, Serialize)]
pub struct RISProblem {
    energy: EnergyModel,
    dissipation: Dissipation,
    load: PiecewisePath,
    z0: Vector,
    ell0: Vector,
    final_time: f64,
}

impl RISProblem {
    /// Validates the data, including initial stability up to
    /// [`STABILITY_TOL`].
    pub fn new(
        energy: EnergyModel,
        dissipation: Dissipation,
        load: PiecewisePath,
        z0: Vector,
        ell0: Vector,
    ) -> Result<Self, ModelError> {
        RISProblem::with_stability_tolerance(energy, dissipation, load, z0, ell0, STABILITY_TOL)
    }

    pub fn with_stability_tolerance(
        energy: EnergyModel,
        dissipation: Dissipation,
        load: PiecewisePath,
        z0: Vector,
        ell0: Vector,
        tol: f64,
    ) -> Result<Self, ModelError> {
        let d = energy.dim();
        for (what, found) in [
            ("load", load.dim()),
            ("z0", z0.len()),
            ("ell0", ell0.len()),
            ("dissipation", dissipation.dim().unwrap_or(d)),
        ] {
            if found != d {
                return Err(ModelError::Dimension {
                    what,
                    expected: d,
                    found,
                });
            }
        }
        if load.start().abs() > 1e-12 || load.end() <= 0.0 {
            return Err(ModelError::LoadDomain(load.start(), load.end()));
        }
        let check = check_initial_stability(&dissipation, &energy, &z0, &ell0, tol);
        if !check.stable {
            return Err(ModelError::UnstableInitialState(check.residual));
        }
        let final_time = load.end();
        Ok(RISProblem {
            energy,
            dissipation,
            load,
            z0,
            ell0,
            final_time,
        })
    }

    pub fn energy(&self) -> &EnergyModel {
        &self.energy
    }

    pub fn dissipation(&self) -> &Dissipation {
        &self.dissipation
    }

    pub fn load(&self) -> &PiecewisePath {
        &self.load
    }

    pub fn z0(&self) -> &Vector {
        &self.z0
    }

    pub fn ell0(&self) -> &Vector {
        &self.ell0
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn dim(&self) -> usize {
        self.energy.dim()
    }

    pub fn initial_stability(&self) -> StabilityCheck {
        check_initial_stability(
            &self.dissipation,
            &self.energy,
            &self.z0,
            &self.ell0,
            STABILITY_TOL,
        )
    }

    /// Same system with another load on `[0, T']`.
    pub fn with_load(&self, load: PiecewisePath) -> Result<Self, ModelError> {
        RISProblem::new(
            self.energy.clone(),
            self.dissipation.clone(),
            load,
            self.z0.clone(),
            self.ell0.clone(),
        )
    }

    /// `I(t, z) = E(z) - <ell(t), z>`.
    pub fn energy_at(&self, t: f64, z: &Vector) -> Result<f64, PathError> {
        Ok(self.energy.value(z) - self.load.value(t)?.dot(z))
    }

    /// `D_z I(t, z) = Az + DF(z) - ell(t)`.
    pub fn grad_i(&self, t: f64, z: &Vector) -> Result<Vector, PathError> {
        Ok(self.energy.gradient(z) - self.load.value(t)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::scalar;
    use approx::assert_abs_diff_eq;

    fn example_energy() -> EnergyModel {
        EnergyModel::scalar(1.0, Nonlinearity::Linear { b: vec![-1.0] }).unwrap()
    }

    #[test]
    fn gradients_of_the_scalar_example() {
        let e = example_energy();
        assert_eq!(e.gradient(&scalar(0.0)), scalar(-1.0));
        assert_eq!(e.value(&scalar(1.0)), -0.5);
        let load = PiecewisePath::zero(0.0, 2.0, 1).unwrap();
        let p = RISProblem::new(
            e,
            Dissipation::scaled_norm(1.0).unwrap(),
            load.clone(),
            scalar(0.0),
            scalar(0.0),
        )
        .unwrap();
        assert_eq!(p.grad_i(0.5, &scalar(0.0)).unwrap(), scalar(-1.0));
        assert_eq!(
            grad_i_hat(p.energy(), &load, 1.0, &scalar(1.0)).unwrap(),
            scalar(0.0)
        );
        assert!(p.grad_i(2.5, &scalar(0.0)).is_err());
    }

    #[test]
    fn rejects_unstable_initial_data() {
        let load = PiecewisePath::constant(0.0, 2.0, scalar(5.0)).unwrap();
        let err = RISProblem::new(
            example_energy(),
            Dissipation::scaled_norm(1.0).unwrap(),
            load,
            scalar(0.0),
            scalar(5.0),
        )
        .unwrap_err();
        assert_eq!(err, ModelError::UnstableInitialState(5.0));
    }

    #[test]
    fn rejects_bad_matrices() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(
            EnergyModel::new(a, Nonlinearity::Zero),
            Err(ModelError::NotSymmetric(_))
        ));
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(
            EnergyModel::new(a, Nonlinearity::Zero).unwrap_err(),
            ModelError::NotPositiveDefinite
        );
    }

    #[test]
    fn finite_difference_gradients() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let models = [
            Nonlinearity::DoubleWell { kappa: 1.5 },
            Nonlinearity::Polynomial {
                coefficients: vec![0.0, 0.3, -0.2, 0.1, 0.05],
            },
            Nonlinearity::Linear { b: vec![1.0, -2.0] },
        ];
        let z = Vector::from_vec(vec![0.3, -0.7]);
        let dir = Vector::from_vec(vec![0.6, 0.8]);
        for f in models {
            let e = EnergyModel::new(a.clone(), f).unwrap();
            let h = 1e-4;
            let fd = (e.value(&(&z + &dir * h)) - e.value(&(&z - &dir * h))) / (2.0 * h);
            assert_abs_diff_eq!(fd, e.gradient(&z).dot(&dir), epsilon = 1e-7);
            let hess = e.hessian(&z).unwrap();
            let fd2 = (e.gradient(&(&z + &dir * h)) - e.gradient(&(&z - &dir * h))) / (2.0 * h);
            assert_abs_diff_eq!(fd2, &hess * &dir, epsilon = 1e-6);
        }
    }

    #[test]
    fn config_schema_round_trip() {
        let text = r#"{"a": [[1.0]], "nonlinearity": {"type": "linear", "b": [-1.0]}}"#;
        let e: EnergyModel = serde_json::from_str(text).unwrap();
        assert_eq!(e.gradient(&scalar(0.0)), scalar(-1.0));
        let back = serde_json::to_string(&e).unwrap();
        let again: EnergyModel = serde_json::from_str(&back).unwrap();
        assert_eq!(again.matrix(), e.matrix());
    }
}
