//! Python bindings for the `rislab` core crate.

use nalgebra::DMatrix;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rislab_core::checkers::{self, CheckReport};
use rislab_core::construction;
use rislab_core::convex::Dissipation as CoreDissipation;
use rislab_core::experiments;
use rislab_core::model::{EnergyModel as CoreEnergy, Nonlinearity, RISProblem};
use rislab_core::paths::{self, Knot, LipschitzPath, PiecewisePath, Vector};
use rislab_core::tuple::ParametrizedTuple;
use rislab_core::viscous;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// `(t, left, value, right)`.
type KnotTuple = (f64, Vec<f64>, Vec<f64>, Vec<f64>);

fn to_vec(v: &Vector) -> Vec<f64> {
    v.as_slice().to_vec()
}

/// Piecewise-affine path with jumps, given by `(t, left, value, right)` knots.
#[pyclass(name = "Path", module = "rislab")]
#[derive(Clone)]
pub struct PyPath(PiecewisePath);

#[pymethods]
impl PyPath {
    #[new]
    fn new(knots: Vec<KnotTuple>) -> PyResult<Self> {
        let knots = knots
            .into_iter()
            .map(|(t, l, v, r)| {
                Knot::jump(
                    t,
                    Vector::from_vec(l),
                    Vector::from_vec(v),
                    Vector::from_vec(r),
                )
            })
            .collect();
        PiecewisePath::new(knots).map(Self).map_err(value_error)
    }

    /// Continuous interpolant of `values` at `times`.
    #[staticmethod]
    fn continuous(times: Vec<f64>, values: Vec<Vec<f64>>) -> PyResult<Self> {
        let values: Vec<Vector> = values.into_iter().map(Vector::from_vec).collect();
        PiecewisePath::continuous(&times, &values)
            .map(Self)
            .map_err(value_error)
    }

    #[staticmethod]
    fn load_csv(file: &str) -> PyResult<Self> {
        paths::io::load_path(file).map(Self).map_err(value_error)
    }

    fn save_csv(&self, file: &str) -> PyResult<()> {
        paths::io::save_path(&self.0, file).map_err(value_error)
    }

    fn value(&self, t: f64) -> PyResult<Vec<f64>> {
        self.0.value(t).map(|v| to_vec(&v)).map_err(value_error)
    }

    fn left_limit(&self, t: f64) -> PyResult<Vec<f64>> {
        self.0
            .left_limit(t)
            .map(|v| to_vec(&v))
            .map_err(value_error)
    }

    fn right_limit(&self, t: f64) -> PyResult<Vec<f64>> {
        self.0
            .right_limit(t)
            .map(|v| to_vec(&v))
            .map_err(value_error)
    }

    fn knots(&self) -> Vec<KnotTuple> {
        self.0
            .knots()
            .iter()
            .map(|k| (k.t, to_vec(&k.left), to_vec(&k.value), to_vec(&k.right)))
            .collect()
    }

    fn jump_times(&self) -> Vec<f64> {
        self.0.jump_times()
    }

    #[getter]
    fn domain(&self) -> (f64, f64) {
        self.0.domain()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn total_variation(&self) -> PyResult<f64> {
        let (a, b) = self.0.domain();
        paths::total_variation(&self.0, a, b).map_err(value_error)
    }

    fn sup_distance(&self, other: &PyPath) -> PyResult<f64> {
        self.0.sup_distance(&other.0).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        let (a, b) = self.0.domain();
        format!(
            "Path(dim={}, domain=({a}, {b}), knots={})",
            self.0.dim(),
            self.0.knots().len()
        )
    }
}

#[pyclass(name = "Dissipation", module = "rislab")]
#[derive(Clone)]
pub struct PyDissipation(CoreDissipation);

#[pymethods]
impl PyDissipation {
    #[staticmethod]
    fn scaled_norm(alpha: f64) -> PyResult<Self> {
        CoreDissipation::scaled_norm(alpha)
            .map(Self)
            .map_err(value_error)
    }

    #[staticmethod]
    fn weighted_l1(weights: Vec<f64>) -> PyResult<Self> {
        CoreDissipation::weighted_l1(weights)
            .map(Self)
            .map_err(value_error)
    }

    /// Support function of the convex hull of `vertices`.
    #[staticmethod]
    fn polyhedral(vertices: Vec<Vec<f64>>) -> PyResult<Self> {
        CoreDissipation::polyhedral(vertices)
            .map(Self)
            .map_err(value_error)
    }

    fn __call__(&self, v: Vec<f64>) -> f64 {
        self.0.eval(&Vector::from_vec(v))
    }

    fn project_subdiff0(&self, w: Vec<f64>) -> Vec<f64> {
        to_vec(&self.0.project_subdiff0(&Vector::from_vec(w)))
    }

    fn dist_to_subdiff0(&self, w: Vec<f64>) -> f64 {
        self.0.dist_to_subdiff0(&Vector::from_vec(w))
    }

    fn contact_potential(&self, v: Vec<f64>, w: Vec<f64>) -> f64 {
        self.0
            .contact_potential(&Vector::from_vec(v), &Vector::from_vec(w))
            .total
    }

    fn dissipation(&self, z: &PyPath, t1: f64, t2: f64) -> PyResult<f64> {
        paths::dissipation(&self.0, &z.0, t1, t2).map_err(value_error)
    }
}

/// `E(z) = ½<Az, z> + F(z)`.
#[pyclass(name = "EnergyModel", module = "rislab")]
#[derive(Clone)]
pub struct PyEnergy(CoreEnergy);

fn matrix(a: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let d = a.len();
    if a.iter().any(|row| row.len() != d) {
        return Err(PyValueError::new_err("A must be a square matrix"));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| a[i][j]))
}

#[pymethods]
impl PyEnergy {
    /// Quadratic energy with optional linear term `<b, z>`.
    #[new]
    #[pyo3(signature = (a, b = None))]
    fn new(a: Vec<Vec<f64>>, b: Option<Vec<f64>>) -> PyResult<Self> {
        let f = b.map_or(Nonlinearity::Zero, |b| Nonlinearity::Linear { b });
        CoreEnergy::new(matrix(a)?, f)
            .map(Self)
            .map_err(value_error)
    }

    /// Adds `kappa/4 (||z||² - 1)²` to the quadratic part.
    #[staticmethod]
    fn double_well(a: Vec<Vec<f64>>, kappa: f64) -> PyResult<Self> {
        CoreEnergy::new(matrix(a)?, Nonlinearity::DoubleWell { kappa })
            .map(Self)
            .map_err(value_error)
    }

    fn __call__(&self, z: Vec<f64>) -> f64 {
        self.0.value(&Vector::from_vec(z))
    }

    fn gradient(&self, z: Vec<f64>) -> Vec<f64> {
        to_vec(&self.0.gradient(&Vector::from_vec(z)))
    }
}

#[pyclass(name = "Problem", module = "rislab")]
#[derive(Clone)]
pub struct PyProblem(RISProblem);

#[pymethods]
impl PyProblem {
    #[new]
    #[pyo3(signature = (energy, dissipation, load, z0, ell0 = None))]
    fn new(
        energy: &PyEnergy,
        dissipation: &PyDissipation,
        load: &PyPath,
        z0: Vec<f64>,
        ell0: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let ell0 = match ell0 {
            Some(v) => Vector::from_vec(v),
            None => load.0.value(load.0.start()).map_err(value_error)?,
        };
        RISProblem::new(
            energy.0.clone(),
            dissipation.0.clone(),
            load.0.clone(),
            Vector::from_vec(z0),
            ell0,
        )
        .map(Self)
        .map_err(value_error)
    }

    #[getter]
    fn load(&self) -> PyPath {
        PyPath(self.0.load().clone())
    }

    #[getter]
    fn final_time(&self) -> f64 {
        self.0.final_time()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// Parametrized tuple `(t_hat, z_hat, ell_hat)` on `[0, S]`.
#[pyclass(name = "Tuple", module = "rislab")]
#[derive(Clone)]
pub struct PyTuple(ParametrizedTuple);

#[pymethods]
impl PyTuple {
    #[new]
    fn new(t_hat: &PyPath, z_hat: &PyPath, ell_hat: &PyPath) -> PyResult<Self> {
        let t = LipschitzPath::new(t_hat.0.clone()).map_err(value_error)?;
        let z = LipschitzPath::new(z_hat.0.clone()).map_err(value_error)?;
        ParametrizedTuple::new(t, z, ell_hat.0.clone())
            .map(Self)
            .map_err(value_error)
    }

    #[getter]
    fn s_end(&self) -> f64 {
        self.0.s_end()
    }

    #[getter]
    fn t_hat(&self) -> PyPath {
        PyPath(self.0.t_hat().as_path().clone())
    }

    #[getter]
    fn z_hat(&self) -> PyPath {
        PyPath(self.0.z_hat().as_path().clone())
    }

    #[getter]
    fn ell_hat(&self) -> PyPath {
        PyPath(self.0.ell_hat().clone())
    }
}

#[pyclass(name = "CheckReport", module = "rislab")]
pub struct PyReport(CheckReport);

#[pymethods]
impl PyReport {
    #[getter]
    fn passed(&self) -> bool {
        self.0.passed
    }

    #[getter]
    fn concept(&self) -> String {
        self.0.concept.to_string()
    }

    #[getter]
    fn worst_residual(&self) -> f64 {
        self.0.worst_residual()
    }

    /// Names of the conditions that failed.
    fn failed(&self) -> Vec<String> {
        self.0.failed().map(|c| c.id.as_str().to_owned()).collect()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "CheckReport(concept={}, passed={}, worst_residual={:e})",
            self.0.concept,
            self.0.passed,
            self.0.worst_residual()
        )
    }
}

#[pyfunction]
fn check_local(z: &PyPath, problem: &PyProblem, tol: f64) -> PyResult<PyReport> {
    checkers::check_local(&z.0, &problem.0, tol, &[])
        .map(PyReport)
        .map_err(value_error)
}

#[pyfunction]
fn check_differential(z: &PyPath, problem: &PyProblem, tol: f64) -> PyResult<PyReport> {
    checkers::check_differential(&z.0, &problem.0, tol)
        .map(PyReport)
        .map_err(value_error)
}

#[pyfunction]
fn check_pbv(tuple: &PyTuple, problem: &PyProblem, tol: f64) -> PyResult<PyReport> {
    checkers::check_normalized_pbv(&tuple.0, &problem.0, tol)
        .map(PyReport)
        .map_err(value_error)
}

#[pyfunction]
fn check_relaxed(tuple: &PyTuple, problem: &PyProblem, tol: f64) -> PyResult<PyReport> {
    checkers::check_relaxed(&tuple.0, &problem.0, tol)
        .map(PyReport)
        .map_err(value_error)
}

/// Viscous approximation with time step `step`, returning the time grid,
/// the states and the reparametrized tuple.
#[pyfunction]
#[pyo3(signature = (problem, epsilon, step = None))]
fn solve_viscous(
    problem: &PyProblem,
    epsilon: f64,
    step: Option<f64>,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>, PyTuple)> {
    let step = step.unwrap_or_else(|| viscous::default_step(epsilon));
    let traj = viscous::solve_viscous(&problem.0, epsilon, step).map_err(value_error)?;
    let tuple = viscous::reparametrize(&traj, &problem.0).map_err(value_error)?;
    let states = traj.states.iter().map(to_vec).collect();
    Ok((traj.time_grid, states, PyTuple(tuple)))
}

/// Relaxed tuple built from a local solution; raises if `z` is rejected.
#[pyfunction]
fn construct_relaxed(z: &PyPath, problem: &PyProblem, tol: f64) -> PyResult<(PyTuple, PyReport)> {
    construction::construct_relaxed_from_local(&z.0, &problem.0, tol)
        .map(|r| (PyTuple(r.tuple), PyReport(r.report)))
        .map_err(value_error)
}

type Case = (PyProblem, PyTuple, Option<PyPath>);

fn case(c: experiments::ExampleCase) -> Case {
    (
        PyProblem(c.problem),
        PyTuple(c.tuple),
        c.physical.map(PyPath),
    )
}

/// Member `n` of the first scalar family, or its limit when `n` is None.
#[pyfunction]
#[pyo3(signature = (n = None))]
fn counterexample1(n: Option<u32>) -> PyResult<Case> {
    n.map_or_else(
        experiments::counterexample1_limit,
        experiments::counterexample1,
    )
    .map(case)
    .map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (n = None))]
fn counterexample2(n: Option<u32>) -> PyResult<Case> {
    n.map_or_else(
        experiments::counterexample2_limit,
        experiments::counterexample2,
    )
    .map(case)
    .map_err(value_error)
}

#[pymodule]
fn rislab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPath>()?;
    m.add_class::<PyDissipation>()?;
    m.add_class::<PyEnergy>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyTuple>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(check_local, m)?)?;
    m.add_function(wrap_pyfunction!(check_differential, m)?)?;
    m.add_function(wrap_pyfunction!(check_pbv, m)?)?;
    m.add_function(wrap_pyfunction!(check_relaxed, m)?)?;
    m.add_function(wrap_pyfunction!(solve_viscous, m)?)?;
    m.add_function(wrap_pyfunction!(construct_relaxed, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample1, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample2, m)?)?;
    Ok(())
}
