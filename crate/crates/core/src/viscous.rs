//! Vanishing-viscosity approximation and its arc-length reparametrization.
//!
//! Each step solves the convex incremental problem
//! `min_D R(D) + (eps/2tau)|D|² + ½<A(z_k + D), z_k + D> + <DF(z_k) - ell, z_k + D>`
//! with `A` implicit and the nonlinearity linearized at `z_k`.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::model::RISProblem;
use crate::paths::{compose_monotone, LipschitzPath, PathError, PiecewisePath, Vector};
use crate::tuple::ParametrizedTuple;

/// Optimality residual the inner iteration must reach.
pub const INNER_TOL: f64 = 1e-10;
const MAX_INNER_ITERATIONS: usize = 200_000;

#[derive(Debug, Error)]
pub enum ViscousError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(
        "inner iteration did not converge in step {step} (t = {t}): residual {residual:e} after {iterations} iterations"
    )]
    NoConvergence {
        step: usize,
        t: f64,
        residual: f64,
        iterations: usize,
    },
    #[error("arc length is not increasing at step {0}")]
    NonMonotone(usize),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Discrete viscous trajectory on a time grid.
#[derive(Clone, Debug, Serialize)]
pub struct ViscousTrajectory {
    pub epsilon: f64,
    pub time_grid: Vec<f64>,
    pub states: Vec<Vector>,
    /// Difference quotient of step `k`, `(z_{k+1} - z_k) / tau_k`.
    pub rates: Vec<Vector>,
    /// Optimality residual of each incremental problem.
    pub step_residuals: Vec<f64>,
    /// Positive part of the discrete energy-dissipation balance per step.
    pub energy_excess: Vec<f64>,
}

impl ViscousTrajectory {
    pub fn max_step_residual(&self) -> f64 {
        self.step_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_energy_excess(&self) -> f64 {
        self.energy_excess.iter().copied().fold(0.0, f64::max)
    }

    /// Piecewise-linear interpolant of the states in physical time.
    pub fn as_path(&self) -> Result<LipschitzPath, PathError> {
        LipschitzPath::from_points(&self.time_grid, &self.states)
    }
}

/// Uniform grid of width `step` with all breakpoints of `load` inserted;
/// uniform nodes closer than `1e-6 step` to a breakpoint are dropped.
pub fn time_grid(load: &PiecewisePath, step: f64) -> Vec<f64> {
    let (a, b) = load.domain();
    let breaks: Vec<f64> = load.breakpoints().collect();
    let gap = 1e-6 * step;
    let count = ((b - a) / step).ceil() as usize;
    let mut grid: Vec<f64> = (0..=count)
        .map(|i| (a + i as f64 * step).min(b))
        .filter(|&t| breaks.iter().all(|&p| (p - t).abs() > gap))
        .collect();
    grid.extend(breaks);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|x, y| (*x - *y).abs() <= gap);
    grid
}

/// Minimizes `R(D) + ½<M D, D> - <g, D>` for symmetric positive definite `M`.
struct StepSolver<'a> {
    problem: &'a RISProblem,
    metric: DMatrix<f64>,
    /// `Some(mu)` if the metric is `mu I`.
    scalar_metric: Option<f64>,
    lipschitz: f64,
}

impl<'a> StepSolver<'a> {
    fn new(problem: &'a RISProblem, viscosity: f64) -> Self {
        let energy = problem.energy();
        let d = energy.dim();
        let metric = energy.matrix() + DMatrix::identity(d, d) * viscosity;
        let scalar_metric = energy.identity_multiple().map(|a| a + viscosity);
        let lipschitz = metric.clone().symmetric_eigenvalues().max();
        StepSolver {
            problem,
            metric,
            scalar_metric,
            lipschitz,
        }
    }

    fn residual(&self, delta: &Vector, g: &Vector) -> f64 {
        let force = g - &self.metric * delta;
        self.problem.dissipation().subdiff_distance(delta, &force)
    }

    /// Proximal map of `R / L`: `x - P_K(L x) / L`.
    fn prox(&self, x: &Vector, l: f64) -> Vector {
        x - self.problem.dissipation().project_subdiff0(&(x * l)) / l
    }

    fn solve(&self, g: &Vector) -> Result<(Vector, f64, usize), f64> {
        if let Some(mu) = self.scalar_metric {
            let delta = self.prox(&(g / mu), mu);
            return Ok((delta.clone(), self.residual(&delta, g), 0));
        }
        // FISTA with adaptive restart; the objective is strongly convex.
        let l = self.lipschitz;
        let mut x = self.prox(&(g / l), l);
        let mut y = x.clone();
        let mut momentum = 1.0_f64;
        let mut residual = f64::INFINITY;
        for it in 1..=MAX_INNER_ITERATIONS {
            let grad = &self.metric * &y - g;
            let next = self.prox(&(&y - grad / l), l);
            let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let step = &next - &x;
            let restart = (&y - &next).dot(&step) > 0.0;
            y = if restart {
                momentum = 1.0;
                next.clone()
            } else {
                let y_next = &next + step * ((momentum - 1.0) / next_momentum);
                momentum = next_momentum;
                y_next
            };
            x = next;
            if it % 8 == 0 || it < 8 {
                residual = self.residual(&x, g);
                if residual <= INNER_TOL {
                    return Ok((x, residual, it));
                }
            }
        }
        Err(residual)
    }
}

/// Semi-implicit incremental minimization with viscosity `epsilon` and
/// nominal step `step`. Grid nodes are placed at every breakpoint of the
/// load, and a step ending at `t` uses the right limit `ell(t+)`.
pub fn solve_viscous(
    problem: &RISProblem,
    epsilon: f64,
    step: f64,
) -> Result<ViscousTrajectory, ViscousError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(ViscousError::InvalidParameter(format!(
            "epsilon = {epsilon}"
        )));
    }
    let horizon = problem.final_time() - problem.load().start();
    if !(step > 0.0 && step.is_finite()) || step > horizon {
        return Err(ViscousError::InvalidParameter(format!("step = {step}")));
    }
    let load = problem.load();
    let energy = problem.energy();
    let r = problem.dissipation();
    let grid = time_grid(load, step);
    let mut states = Vec::with_capacity(grid.len());
    let mut rates = Vec::with_capacity(grid.len() - 1);
    let mut step_residuals = Vec::with_capacity(grid.len() - 1);
    let mut energy_excess = Vec::with_capacity(grid.len() - 1);
    states.push(problem.z0().clone());

    let mut solver: Option<(f64, StepSolver)> = None;
    for k in 0..grid.len() - 1 {
        let tau = grid[k + 1] - grid[k];
        let viscosity = epsilon / tau;
        // Uniform steps share one solver; only steps near breakpoints differ.
        let reuse = matches!(&solver, Some((v, _)) if (v - viscosity).abs() <= 1e-12 * viscosity);
        if !reuse {
            solver = Some((viscosity, StepSolver::new(problem, viscosity)));
        }
        let (_, inner) = solver.as_ref().expect("solver initialized");
        let z = &states[k];
        let ell = load.right_clamped(grid[k + 1]);
        let g = &ell - energy.matrix() * z - energy.nonlinearity().gradient(z);
        let (delta, residual, iterations) =
            inner
                .solve(&g)
                .map_err(|residual| ViscousError::NoConvergence {
                    step: k,
                    t: grid[k + 1],
                    residual,
                    iterations: MAX_INNER_ITERATIONS,
                })?;
        log::trace!("step {k}: residual {residual:e} after {iterations} inner iterations");
        let next = z + &delta;
        let lhs = energy.value(&next) + r.eval(&delta) + viscosity * delta.norm_squared();
        let rhs = energy.value(z) + ell.dot(&delta);
        energy_excess.push((lhs - rhs).max(0.0));
        step_residuals.push(residual);
        rates.push(&delta / tau);
        states.push(next);
    }
    Ok(ViscousTrajectory {
        epsilon,
        time_grid: grid,
        states,
        rates,
        step_residuals,
        energy_excess,
    })
}

/// Arc-length reparametrization `s(t) = t + int_0^t p(z', -D_z I)` with
/// trapezoidal accumulation, returning a piecewise-linear tuple on
/// `[0, s(T)]` with `ell_hat = ell ∘ t_hat`.
pub fn reparametrize(
    traj: &ViscousTrajectory,
    problem: &RISProblem,
) -> Result<ParametrizedTuple, ViscousError> {
    let load = problem.load();
    let energy = problem.energy();
    let r = problem.dissipation();
    let grid = &traj.time_grid;
    if grid.len() < 2 || traj.states.len() != grid.len() || traj.rates.len() + 1 != grid.len() {
        return Err(ViscousError::InvalidParameter(
            "trajectory arrays have inconsistent lengths".into(),
        ));
    }
    let force: Vec<Vector> = grid
        .iter()
        .zip(&traj.states)
        .map(|(&t, z)| load.right_clamped(t) - energy.gradient(z))
        .collect();
    let mut arc = Vec::with_capacity(grid.len());
    arc.push(grid[0]);
    for (k, rate) in traj.rates.iter().enumerate() {
        let tau = grid[k + 1] - grid[k];
        let p0 = r.contact_potential(rate, &force[k]).total;
        let p1 = r.contact_potential(rate, &force[k + 1]).total;
        let ds = tau * (1.0 + 0.5 * (p0 + p1));
        if ds.is_nan() || ds <= 0.0 {
            return Err(ViscousError::NonMonotone(k));
        }
        arc.push(arc[k] + ds);
    }
    let shift = arc[0];
    let arc: Vec<f64> = arc.iter().map(|s| s - shift).collect();
    let times: Vec<f64> = grid.iter().map(|t| t - grid[0]).collect();
    let t_hat = LipschitzPath::scalar_from_points(&arc, &times)?;
    let z_hat = LipschitzPath::from_points(&arc, &traj.states)?;
    let ell_hat = compose_monotone(load, &t_hat)?;
    Ok(ParametrizedTuple::new(t_hat, z_hat, ell_hat)?)
}

/// Default step for a given viscosity.
pub fn default_step(epsilon: f64) -> f64 {
    epsilon / 10.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::Dissipation;
    use crate::model::{EnergyModel, Nonlinearity};
    use crate::paths::scalar;

    fn quadratic_problem(a: DMatrix<f64>, r: Dissipation, load: PiecewisePath) -> RISProblem {
        let d = a.nrows();
        let energy = EnergyModel::new(a, Nonlinearity::Zero).unwrap();
        let ell0 = load.value(load.start()).unwrap();
        RISProblem::new(energy, r, load, Vector::zeros(d), ell0).unwrap()
    }

    #[test]
    fn stable_state_stays_put() {
        let load = PiecewisePath::constant(0.0, 1.0, scalar(0.5)).unwrap();
        let p = quadratic_problem(
            DMatrix::identity(1, 1),
            Dissipation::scaled_norm(1.0).unwrap(),
            load,
        );
        let traj = solve_viscous(&p, 1e-2, 1e-3).unwrap();
        assert!(traj.states.iter().all(|z| z[0] == 0.0));
        let tuple = reparametrize(&traj, &p).unwrap();
        assert!((tuple.s_end() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_contains_breakpoints() {
        let load =
            PiecewisePath::scalar_continuous(&[0.0, 0.33333, 1.0], &[0.0, 1.0, 1.0]).unwrap();
        let grid = time_grid(&load, 0.1);
        assert!(grid.contains(&0.33333));
        assert_eq!(*grid.last().unwrap(), 1.0);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn fista_matches_closed_form_when_decoupled() {
        // Diagonal non-scalar A forces the iterative branch; the problem
        // separates per coordinate under weighted l1.
        let a = DMatrix::from_diagonal(&Vector::from_vec(vec![1.0, 3.0]));
        let load = PiecewisePath::continuous(
            &[0.0, 1.0],
            &[Vector::zeros(2), Vector::from_vec(vec![2.0, 5.0])],
        )
        .unwrap();
        let weights = vec![0.5, 1.0];
        let p = quadratic_problem(
            a.clone(),
            Dissipation::weighted_l1(weights.clone()).unwrap(),
            load,
        );
        let solver = StepSolver::new(&p, 10.0);
        let g = Vector::from_vec(vec![3.0, -0.5]);
        let (delta, residual, _) = solver.solve(&g).unwrap();
        assert!(residual <= INNER_TOL);
        for i in 0..2 {
            let mu = a[(i, i)] + 10.0;
            let expected = (g[i].abs() - weights[i]).max(0.0) * g[i].signum() / mu;
            assert!((delta[i] - expected).abs() < 1e-9);
        }
    }
}
