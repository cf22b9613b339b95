//! Relaxed parametrized solutions built from local solutions with finitely
//! many jumps.
//!
//! Physical time is stretched by the accumulated dissipation,
//! `s(t) = t + Diss_0(z; [0, t])`, and every jump is traversed at frozen time
//! along the straight segments `z(t-) -> z(t) -> z(t+)`. On those segments
//! the parametrized load is chosen so that the energy decreases at unit rate.

use serde::Serialize;
use thiserror::Error;

use crate::checkers::{check_local, check_relaxed, CheckError, CheckReport};
use crate::convex::{Dissipation, DissipationKind};
use crate::model::{EnergyModel, RISProblem};
use crate::paths::{
    compose_monotone, dissipation, scalar, Knot, LipschitzPath, PathError, PiecewisePath, Vector,
};
use crate::tuple::ParametrizedTuple;

/// Largest deviation tolerated between a jump-segment load and its
/// piecewise-linear interpolant when the nonlinearity is not affine.
const INTERPOLATION_TOL: f64 = 1e-12;
const MAX_BISECTION_DEPTH: u32 = 16;

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error("dissipation must be a scaled norm to traverse jumps at unit speed, got {0}")]
    AsymmetricDissipation(String),
    #[error("candidate is not a local solution:\n{0}")]
    NotLocal(Box<CheckReport>),
    #[error("constructed tuple fails the relaxed check:\n{0}")]
    NotRelaxed(Box<CheckReport>),
    #[error("projection mismatch {mismatch:e} at t = {t}")]
    Projection { t: f64, mismatch: f64 },
    #[error("invalid input: {0}")]
    Precondition(String),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Left limit, point value and right limit of `z` at a jump.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpTriple {
    pub t: f64,
    pub left: Vector,
    pub value: Vector,
    pub right: Vector,
}

/// Parameter intervals `[s(t-), s(t)]` and `[s(t), s(t+)]` of one jump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JumpInterval {
    pub t: f64,
    pub lower: (f64, f64),
    pub upper: (f64, f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct JumpDecomposition {
    /// Jump points in `(0, T]`.
    pub jumps: Vec<JumpTriple>,
    /// Whether `z(0+)` differs from the initial state.
    pub initial_jump: bool,
    /// `[0, R(z(0+) - z0)]`.
    pub initial_interval: (f64, f64),
    pub intervals: Vec<JumpInterval>,
    /// `s(t)` with its one-sided limits at the jump points.
    pub s_map: PiecewisePath,
}

impl JumpDecomposition {
    pub fn jump_times(&self) -> Vec<f64> {
        self.jumps.iter().map(|j| j.t).collect()
    }

    /// Nonempty open parameter intervals on which `t_hat` is frozen.
    pub fn frozen_intervals(&self) -> Vec<(f64, f64)> {
        std::iter::once(self.initial_interval)
            .chain(self.intervals.iter().flat_map(|i| [i.lower, i.upper]))
            .filter(|(a, b)| b > a)
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Parametrization {
    pub decomposition: JumpDecomposition,
    pub t_hat: LipschitzPath,
    pub z_hat: LipschitzPath,
}

impl Parametrization {
    pub fn s_end(&self) -> f64 {
        self.t_hat.end()
    }
}

/// A physical time together with a parameter at which the constructed
/// tuple passes through `(t, z(t))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProjectionPoint {
    pub t: f64,
    pub s: f64,
    pub mismatch: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionResult {
    pub tuple: ParametrizedTuple,
    pub decomposition: JumpDecomposition,
    pub projection_witness: Vec<ProjectionPoint>,
    pub report: CheckReport,
}

fn require_scaled_norm(r: &Dissipation) -> Result<f64, ConstructionError> {
    match r.kind() {
        DissipationKind::ScaledNorm { alpha } => Ok(*alpha),
        other => Err(ConstructionError::AsymmetricDissipation(format!(
            "{other:?}"
        ))),
    }
}

/// `R(z(0+) - z0) + Diss_R(z; [0, t])`, where the variation on `[0, t]`
/// starts from the right limit at 0.
pub fn diss0(r: &Dissipation, z: &PiecewisePath, z0: &Vector, t: f64) -> Result<f64, PathError> {
    let start = z.start();
    if t <= start {
        return Ok(0.0);
    }
    let initial = r.eval(&(z.right_limit(start)? - z0));
    // The variation from 0 counts R(z(0+) - z(0)); replace it by the jump from z0.
    let from_zero = dissipation(r, z, start, t)?;
    let at_zero = r.eval(&(z.right_limit(start)? - z.value(start)?));
    Ok(initial + from_zero - at_zero)
}

/// Builds `s(t)`, its inverse `t_hat` and the state `z_hat` that follows
/// `z` off the jumps and straight segments across them.
pub fn build_parametrization(
    z: &PiecewisePath,
    r: &Dissipation,
    z0: &Vector,
) -> Result<Parametrization, ConstructionError> {
    let alpha = require_scaled_norm(r)?;
    if z.dim() != z0.len() {
        return Err(ConstructionError::Precondition(format!(
            "candidate has dimension {}, initial state {}",
            z.dim(),
            z0.len()
        )));
    }
    let cost = |a: &Vector, b: &Vector| alpha * (b - a).norm();
    let knots = z.knots();
    let t0 = z.start();

    // Arc-length nodes (s, t, z) in order; coincident parameters collapse.
    let mut nodes: Vec<(f64, f64, Vector)> = Vec::new();
    let mut push = |s: f64, t: f64, v: &Vector| match nodes.last() {
        Some((s_last, _, _)) if *s_last >= s => {}
        _ => nodes.push((s, t, v.clone())),
    };
    let mut s_knots = Vec::with_capacity(knots.len());
    let mut jumps = Vec::new();
    let mut intervals = Vec::new();

    let first = &knots[0];
    let s_initial = cost(z0, &first.right);
    push(0.0, t0, z0);
    push(s_initial, t0, &first.right);
    s_knots.push(Knot::jump(t0, scalar(0.0), scalar(0.0), scalar(s_initial)));

    let mut s = s_initial;
    for w in knots.windows(2) {
        let (prev, k) = (&w[0], &w[1]);
        let s_left = s + (k.t - prev.t) + cost(&prev.right, &k.left);
        let s_mid = s_left + cost(&k.left, &k.value);
        let s_right = if k.t < z.end() {
            s_mid + cost(&k.value, &k.right)
        } else {
            s_mid
        };
        push(s_left, k.t, &k.left);
        push(s_mid, k.t, &k.value);
        push(s_right, k.t, &k.right);
        if s_right > s_left {
            jumps.push(JumpTriple {
                t: k.t,
                left: k.left.clone(),
                value: k.value.clone(),
                right: k.right.clone(),
            });
            intervals.push(JumpInterval {
                t: k.t,
                lower: (s_left, s_mid),
                upper: (s_mid, s_right),
            });
        }
        s_knots.push(Knot::jump(
            k.t,
            scalar(s_left),
            scalar(s_mid),
            scalar(s_right),
        ));
        s = s_right;
    }

    let params: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let times: Vec<f64> = nodes.iter().map(|n| n.1 - t0).collect();
    let states: Vec<Vector> = nodes.into_iter().map(|n| n.2).collect();
    let t_hat = LipschitzPath::scalar_from_points(&params, &times)?;
    let z_hat = LipschitzPath::from_points(&params, &states)?;
    let decomposition = JumpDecomposition {
        jumps,
        initial_jump: s_initial > 0.0,
        initial_interval: (0.0, s_initial),
        intervals,
        s_map: PiecewisePath::new(s_knots)?,
    };
    Ok(Parametrization {
        decomposition,
        t_hat,
        z_hat,
    })
}

/// Load along a jump segment: `A z + DF(z) + z' / |z'|²`, which makes
/// `<D_z Î, z'> = -1`.
fn jump_load(energy: &EnergyModel, z: &Vector, rate: &Vector) -> Vector {
    energy.gradient(z) + rate / rate.norm_squared()
}

/// Parameters subdividing `[a, b]` until the jump load is interpolated to
/// [`INTERPOLATION_TOL`]; just the endpoints for affine nonlinearities.
fn jump_nodes(energy: &EnergyModel, z_hat: &LipschitzPath, a: f64, b: f64) -> Vec<f64> {
    let mut out = vec![a];
    if !energy.nonlinearity().is_affine() {
        let k = z_hat.segment_index(0.5 * (a + b));
        let rate = z_hat.segment_slope(k);
        let eval = |s: f64| jump_load(energy, &z_hat.segment_value(k, s), &rate);
        fn refine(eval: &dyn Fn(f64) -> Vector, a: f64, b: f64, depth: u32, out: &mut Vec<f64>) {
            let mid = 0.5 * (a + b);
            let chord = (eval(a) + eval(b)) * 0.5;
            if depth < MAX_BISECTION_DEPTH && (eval(mid) - chord).norm() > INTERPOLATION_TOL {
                refine(eval, a, mid, depth + 1, out);
                out.push(mid);
                refine(eval, mid, b, depth + 1, out);
            }
        }
        refine(&eval, a, b, 0, &mut out);
    }
    out.push(b);
    out
}

/// `ell ∘ t_hat` off the frozen intervals and the unit-rate jump load on
/// them. Point values at interval ends are those of `ell ∘ t_hat`.
pub fn build_load_hat(
    param: &Parametrization,
    load: &PiecewisePath,
    energy: &EnergyModel,
) -> Result<PiecewisePath, ConstructionError> {
    let composed = compose_monotone(load, &param.t_hat)?;
    let frozen = param.decomposition.frozen_intervals();
    let inside = |s: f64| frozen.iter().any(|&(a, b)| a < s && s < b);
    let mut knots: Vec<Knot> = composed
        .knots()
        .iter()
        .filter(|k| !inside(k.t))
        .cloned()
        .collect();
    let z_hat = &param.z_hat;
    for &(a, b) in &frozen {
        let k = z_hat.segment_index(0.5 * (a + b));
        let rate = z_hat.segment_slope(k);
        let at = |s: f64| jump_load(energy, &z_hat.segment_value(k, s), &rate);
        let nodes = jump_nodes(energy, z_hat, a, b);
        for slot in knots.iter_mut() {
            if slot.t == a {
                slot.right = at(a);
            } else if slot.t == b {
                slot.left = at(b);
            }
        }
        knots.extend(
            nodes[1..nodes.len() - 1]
                .iter()
                .map(|&s| Knot::continuous(s, at(s))),
        );
    }
    knots.sort_by(|x, y| x.t.total_cmp(&y.t));
    Ok(PiecewisePath::new(knots)?)
}

/// Parameters at which the tuple passes through `(t, z(t))` for every
/// breakpoint `t` of `z`.
pub fn projection_witness(
    z: &PiecewisePath,
    param: &Parametrization,
) -> Result<Vec<ProjectionPoint>, PathError> {
    let s_map = &param.decomposition.s_map;
    z.knots()
        .iter()
        .map(|k| {
            let s = s_map.value(k.t)?[0];
            let t_err = (param.t_hat.scalar(s)? - (k.t - z.start())).abs();
            let z_err = (param.z_hat.value(s)? - &k.value).norm();
            Ok(ProjectionPoint {
                t: k.t,
                s,
                mismatch: t_err.max(z_err),
            })
        })
        .collect()
}

/// Turns a local solution into a relaxed parametrized solution and verifies
/// the result with the relaxed checker.
pub fn construct_relaxed_from_local(
    z: &PiecewisePath,
    problem: &RISProblem,
    tol: f64,
) -> Result<ConstructionResult, ConstructionError> {
    require_scaled_norm(problem.dissipation())?;
    let local = check_local(z, problem, tol, &[])?;
    if !local.passed {
        return Err(ConstructionError::NotLocal(Box::new(local)));
    }
    let param = build_parametrization(z, problem.dissipation(), problem.z0())?;
    let ell_hat = build_load_hat(&param, problem.load(), problem.energy())?;
    let tuple = ParametrizedTuple::new(param.t_hat.clone(), param.z_hat.clone(), ell_hat)?;
    let report = check_relaxed(&tuple, problem, tol)?;
    if !report.passed {
        return Err(ConstructionError::NotRelaxed(Box::new(report)));
    }
    let projection_witness = projection_witness(z, &param)?;
    if let Some(bad) = projection_witness.iter().find(|p| p.mismatch > tol) {
        return Err(ConstructionError::Projection {
            t: bad.t,
            mismatch: bad.mismatch,
        });
    }
    Ok(ConstructionResult {
        tuple,
        decomposition: param.decomposition,
        projection_witness,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{counterexample2, counterexample2_limit};
    use crate::model::Nonlinearity;

    #[test]
    fn diss0_examples() {
        let r = Dissipation::scaled_norm(1.0).unwrap();
        let lim = counterexample2_limit().unwrap();
        let z = lim.physical.unwrap();
        assert_eq!(diss0(&r, &z, &scalar(0.0), 2.0).unwrap(), 0.5);
        let lifted = PiecewisePath::new(vec![
            Knot::scalar(0.0, 0.0, 0.0, 1.0),
            Knot::scalar(1.0, 1.0, 1.0, 1.0),
        ])
        .unwrap();
        assert_eq!(diss0(&r, &lifted, &scalar(0.0), 1.0).unwrap(), 1.0);
    }

    #[test]
    fn limit_state_reproduces_limit_tuple() {
        let lim = counterexample2_limit().unwrap();
        let r = lim.problem.dissipation();
        let param = build_parametrization(lim.physical.as_ref().unwrap(), r, &scalar(0.0)).unwrap();
        assert_eq!(param.s_end(), 2.5);
        assert!(param.t_hat.sup_distance(lim.tuple.t_hat()).unwrap() < 1e-15);
        assert!(param.z_hat.sup_distance(lim.tuple.z_hat()).unwrap() < 1e-15);
        let ell_hat = build_load_hat(&param, lim.problem.load(), lim.problem.energy()).unwrap();
        for s in [1.1, 1.25, 1.49] {
            assert!((ell_hat.value(s).unwrap()[0] - (s - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn crafted_jump_load() {
        let energy = EnergyModel::scalar(1.0, Nonlinearity::Zero).unwrap();
        let r = Dissipation::scaled_norm(1.0).unwrap();
        let z = PiecewisePath::new(vec![
            Knot::scalar(0.0, 0.0, 0.0, 0.0),
            Knot::scalar(0.5, 0.0, 1.0, 1.0),
            Knot::scalar(1.0, 1.0, 1.0, 1.0),
        ])
        .unwrap();
        let load = PiecewisePath::new(vec![
            Knot::scalar(0.0, 0.0, 0.0, 0.0),
            Knot::scalar(0.5, 0.3, 0.7, 2.0),
            Knot::scalar(1.0, 2.0, 2.0, 2.0),
        ])
        .unwrap();
        let param = build_parametrization(&z, &r, &scalar(0.0)).unwrap();
        let ell_hat = build_load_hat(&param, &load, &energy).unwrap();
        for s in [0.6, 0.9, 1.4] {
            let expected = param.z_hat.value(s).unwrap()[0] + 1.0;
            assert!((ell_hat.value(s).unwrap()[0] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn continuous_solution_passes() {
        let case = counterexample2(4).unwrap();
        let z = case.physical.as_ref().unwrap();
        let result = construct_relaxed_from_local(z, &case.problem, 1e-8).unwrap();
        assert!(result.report.passed);
        assert!(result.projection_witness.iter().all(|p| p.mismatch < 1e-12));
    }

    #[test]
    fn rejects_non_local_and_asymmetric() {
        let lim = counterexample2_limit().unwrap();
        let err = construct_relaxed_from_local(lim.physical.as_ref().unwrap(), &lim.problem, 1e-8);
        assert!(matches!(err, Err(ConstructionError::NotLocal(_))));
        let ctl = crate::experiments::asymmetric_jump_control().unwrap();
        let z = PiecewisePath::constant(0.0, 1.0, Vector::zeros(2)).unwrap();
        let err = construct_relaxed_from_local(&z, &ctl.problem, 1e-8);
        assert!(matches!(
            err,
            Err(ConstructionError::AsymmetricDissipation(_))
        ));
    }
}
