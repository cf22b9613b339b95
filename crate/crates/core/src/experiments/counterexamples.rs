//! Closed-form data of the two one-dimensional instability examples and of
//! the asymmetric-dissipation negative control.
//!
//! All breakpoints and coefficients are formed as exact rationals in `n`
//! and converted to floating point only when the knots are assembled.

use num_rational::Ratio;

use crate::convex::Dissipation;
use crate::model::{EnergyModel, ModelError, Nonlinearity, RISProblem};
use crate::paths::{scalar, Knot, LipschitzPath, PathError, PiecewisePath, Vector};
use crate::tuple::ParametrizedTuple;

type Q = Ratio<i64>;

fn q(num: i64, den: i64) -> Q {
    Q::new(num, den)
}

fn f(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Builds scalar knots `(t, left, value, right)`, merging entries with equal
/// times (keeping the first left limit and the last value and right limit).
fn scalar_path(entries: &[(Q, Q, Q, Q)]) -> Result<PiecewisePath, PathError> {
    let mut merged: Vec<(Q, Q, Q, Q)> = Vec::new();
    for &e in entries {
        match merged.last_mut() {
            Some(last) if last.0 == e.0 => {
                last.2 = e.2;
                last.3 = e.3;
            }
            _ => merged.push(e),
        }
    }
    PiecewisePath::new(
        merged
            .into_iter()
            .map(|(t, l, v, r)| Knot::scalar(f(t), f(l), f(v), f(r)))
            .collect(),
    )
}

fn continuous(points: &[(Q, Q)]) -> Result<LipschitzPath, PathError> {
    let entries: Vec<_> = points.iter().map(|&(t, v)| (t, v, v, v)).collect();
    LipschitzPath::new(scalar_path(&entries)?)
}

#[derive(Debug, thiserror::Error)]
pub enum ExampleError {
    #[error("n must be at least 1")]
    InvalidIndex,
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A problem together with a parametrized candidate and, where available, a
/// physical-time candidate.
#[derive(Clone, Debug)]
pub struct ExampleCase {
    pub problem: RISProblem,
    pub tuple: ParametrizedTuple,
    pub physical: Option<PiecewisePath>,
}

/// `R = |.|`, `E(z) = ½z² - z`, `z0 = 0`.
fn scalar_problem(load: PiecewisePath) -> Result<RISProblem, ExampleError> {
    let energy = EnergyModel::scalar(1.0, Nonlinearity::Linear { b: vec![-1.0] })?;
    let r = Dissipation::scaled_norm(1.0).expect("positive scale");
    let ell0 = load.value(0.0)?;
    Ok(RISProblem::new(energy, r, load, scalar(0.0), ell0)?)
}

fn check_index(n: u32) -> Result<i64, ExampleError> {
    if n == 0 {
        Err(ExampleError::InvalidIndex)
    } else {
        Ok(i64::from(n))
    }
}

/// Loads rising linearly from 0 to 1/2 on `(1, 1 + 1/n)` and then either
/// staying at 1/2 (`drop = false`) or falling back to 0 (`drop = true`).
fn ramp_load(n: i64, drop: bool) -> Result<PiecewisePath, PathError> {
    let (zero, half, one, two) = (q(0, 1), q(1, 2), q(1, 1), q(2, 1));
    let top = one + q(1, n);
    let after = if drop { zero } else { half };
    scalar_path(&[
        (zero, zero, zero, zero),
        (one, zero, zero, zero),
        (top, half, after, after),
        (two, after, after, after),
    ])
}

/// `(t_hat_n, z_hat_n)` shared by both examples: slope `1/(1 + n/2)` in time
/// and `(n/2)/(1 + n/2)` in state on `(1, 3/2 + 1/n)`.
fn ramp_parametrization(n: i64) -> Result<(LipschitzPath, LipschitzPath), PathError> {
    let (zero, half, one) = (q(0, 1), q(1, 2), q(1, 1));
    let s_top = q(3, 2) + q(1, n);
    let s_end = q(5, 2);
    let t_hat = continuous(&[
        (zero, zero),
        (one, one),
        (s_top, one + q(1, n)),
        (s_end, s_end - half),
    ])?;
    let z_hat = continuous(&[(zero, zero), (one, zero), (s_top, half), (s_end, half)])?;
    Ok((t_hat, z_hat))
}

/// Physical-time solution shared by both examples: it follows the ramp.
fn ramp_state(n: i64) -> Result<LipschitzPath, PathError> {
    let (zero, half, one, two) = (q(0, 1), q(1, 2), q(1, 1), q(2, 1));
    continuous(&[
        (zero, zero),
        (one, zero),
        (one + q(1, n), half),
        (two, half),
    ])
}

fn ramp_load_hat(n: i64, drop: bool) -> Result<PiecewisePath, PathError> {
    let (zero, half, one) = (q(0, 1), q(1, 2), q(1, 1));
    let s_top = q(3, 2) + q(1, n);
    let after = if drop { zero } else { half };
    scalar_path(&[
        (zero, zero, zero, zero),
        (one, zero, zero, zero),
        (s_top, half, after, after),
        (q(5, 2), after, after, after),
    ])
}

/// First example: loads `ell_n` with a ramp to 1/2 and the exact normalized
/// parametrized solution with `S_n = 5/2`.
pub fn counterexample1(n: u32) -> Result<ExampleCase, ExampleError> {
    let n = check_index(n)?;
    let (t_hat, z_hat) = ramp_parametrization(n)?;
    let tuple = ParametrizedTuple::new(t_hat, z_hat, ramp_load_hat(n, false)?)?;
    Ok(ExampleCase {
        problem: scalar_problem(ramp_load(n, false)?)?,
        tuple,
        physical: Some(ramp_state(n)?.into_path()),
    })
}

/// The pointwise limit of [`counterexample1`]: a unit-speed viscous jump on
/// `(1, 3/2)` with `ell_hat(s) = s - 1` there, against the step load. The
/// physical-time state coincides with the step load itself.
pub fn counterexample1_limit() -> Result<ExampleCase, ExampleError> {
    let (zero, half, one) = (q(0, 1), q(1, 2), q(1, 1));
    let (s_jump, s_end, two) = (q(3, 2), q(5, 2), q(2, 1));
    let t_hat = continuous(&[(zero, zero), (one, one), (s_jump, one), (s_end, two)])?;
    let z_hat = continuous(&[(zero, zero), (one, zero), (s_jump, half), (s_end, half)])?;
    let ell_hat =
        continuous(&[(zero, zero), (one, zero), (s_jump, half), (s_end, half)])?.into_path();
    Ok(ExampleCase {
        problem: scalar_problem(step_load()?)?,
        tuple: ParametrizedTuple::new(t_hat, z_hat, ell_hat)?,
        physical: Some(step_load()?),
    })
}

/// Second example: loads `ell_n` with a ramp to 1/2 followed by a drop to 0,
/// the exact parametrized solution and the differential solution `z_n`.
pub fn counterexample2(n: u32) -> Result<ExampleCase, ExampleError> {
    let n = check_index(n)?;
    let (t_hat, z_hat) = ramp_parametrization(n)?;
    let tuple = ParametrizedTuple::new(t_hat, z_hat, ramp_load_hat(n, true)?)?;
    let (zero, half, one, two) = (q(0, 1), q(1, 2), q(1, 1), q(2, 1));
    let z_n = continuous(&[
        (zero, zero),
        (one, zero),
        (one + q(1, n), half),
        (two, half),
    ])?;
    Ok(ExampleCase {
        problem: scalar_problem(ramp_load(n, true)?)?,
        tuple,
        physical: Some(z_n.into_path()),
    })
}

/// Limit of [`counterexample2`]: zero load, the limit tuple with
/// `ell_hat(s) = s - 1` on `(1, 3/2)` and the physical-time limit that jumps
/// from 0 to 1/2 right after `t = 1`.
pub fn counterexample2_limit() -> Result<ExampleCase, ExampleError> {
    let (zero, half, one, two) = (q(0, 1), q(1, 2), q(1, 1), q(2, 1));
    let (s_jump, s_end) = (q(3, 2), q(5, 2));
    let load = PiecewisePath::zero(0.0, 2.0, 1)?;
    let t_hat = continuous(&[(zero, zero), (one, one), (s_jump, one), (s_end, two)])?;
    let z_hat = continuous(&[(zero, zero), (one, zero), (s_jump, half), (s_end, half)])?;
    let ell_hat = scalar_path(&[
        (zero, zero, zero, zero),
        (one, zero, zero, zero),
        (s_jump, half, zero, zero),
        (s_end, zero, zero, zero),
    ])?;
    let z_tilde = limit_state(zero)?;
    Ok(ExampleCase {
        problem: scalar_problem(load)?,
        tuple: ParametrizedTuple::new(t_hat, z_hat, ell_hat)?,
        physical: Some(z_tilde),
    })
}

fn limit_state(at_jump: Q) -> Result<PiecewisePath, PathError> {
    let (zero, half, one, two) = (q(0, 1), q(1, 2), q(1, 1), q(2, 1));
    scalar_path(&[
        (zero, zero, zero, zero),
        (one, zero, at_jump, half),
        (two, half, half, half),
    ])
}

/// The physical-time limit of the second example with point value 0
/// (`upper = false`) or 1/2 (`upper = true`) at the jump time.
pub fn counterexample2_limit_state(upper: bool) -> Result<PiecewisePath, PathError> {
    limit_state(if upper { q(1, 2) } else { q(0, 1) })
}

/// Negative control with the asymmetric `R(v) = ½|v_1| + |v_2|`: an initial
/// viscous jump from 0 to `(1, ½)` on `s in [0, 1]` with
/// `ell_hat = z_hat + z_hat'/||z_hat'||²`, followed by rest until `T = 1`.
pub fn asymmetric_jump_control() -> Result<ExampleCase, ExampleError> {
    let d = 2;
    let target = Vector::from_vec(vec![1.0, 0.5]);
    let rate = target.clone();
    let energy = EnergyModel::new(nalgebra::DMatrix::identity(d, d), Nonlinearity::Zero)?;
    let r = Dissipation::weighted_l1(vec![0.5, 1.0]).expect("positive weights");
    let zero = Vector::zeros(d);
    let load = PiecewisePath::new(vec![
        Knot::jump(0.0, zero.clone(), zero.clone(), target.clone()),
        Knot::continuous(1.0, target.clone()),
    ])?;
    let problem = RISProblem::new(energy, r, load, zero.clone(), zero.clone())?;
    let t_hat = LipschitzPath::scalar_from_points(&[0.0, 1.0, 2.0], &[0.0, 0.0, 1.0])?;
    let z_hat = LipschitzPath::from_points(
        &[0.0, 1.0, 2.0],
        &[zero.clone(), target.clone(), target.clone()],
    )?;
    let push = &rate / rate.norm_squared();
    let ell_hat = PiecewisePath::new(vec![
        Knot::continuous(0.0, push.clone()),
        Knot::jump(1.0, &target + &push, target.clone(), target.clone()),
        Knot::continuous(2.0, target.clone()),
    ])?;
    Ok(ExampleCase {
        problem,
        tuple: ParametrizedTuple::new(t_hat, z_hat, ell_hat)?,
        physical: None,
    })
}

/// The load of the first example's limit, a step from 0 to 1/2 after `t = 1`.
pub fn step_load() -> Result<PiecewisePath, PathError> {
    let (zero, half, one, two) = (q(0, 1), q(1, 2), q(1, 1), q(2, 1));
    scalar_path(&[
        (zero, zero, zero, zero),
        (one, zero, zero, half),
        (two, half, half, half),
    ])
}

/// `ell_n` of the first (`drop = false`) or second (`drop = true`) example.
pub fn ramp_loads(n: u32, drop: bool) -> Result<PiecewisePath, ExampleError> {
    Ok(ramp_load(check_index(n)?, drop)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checkers::{check_normalized_pbv, ConditionId};

    #[test]
    fn ramp_slopes_are_rational() {
        let case = counterexample1(4).unwrap();
        let t = case.tuple.t_hat();
        let z = case.tuple.z_hat();
        assert_eq!(t.segment_slope(1)[0], 1.0 / 3.0);
        assert!((z.segment_slope(1)[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(case.tuple.s_end(), 2.5);
    }

    #[test]
    fn degenerate_index_merges_knots() {
        let case = counterexample2(1).unwrap();
        assert_eq!(case.tuple.t_hat().knots().len(), 3);
        let load = &case.problem.load();
        assert_eq!(load.left_limit(2.0).unwrap()[0], 0.5);
        assert_eq!(load.value(2.0).unwrap()[0], 0.0);
        assert!(counterexample1(0).is_err());
    }

    #[test]
    fn exact_tuple_passes_and_limit_fails_at_compatibility() {
        let report = check_normalized_pbv(
            &counterexample1(4).unwrap().tuple,
            &counterexample1(4).unwrap().problem,
            1e-10,
        )
        .unwrap();
        assert!(report.passed, "{report}");
        let lim = counterexample1_limit().unwrap();
        let report = check_normalized_pbv(&lim.tuple, &lim.problem, 1e-8).unwrap();
        let failed: Vec<_> = report.failed().map(|c| c.id).collect();
        assert_eq!(failed, vec![ConditionId::LoadCompatibility], "{report}");
    }

    #[test]
    fn limits_and_control() {
        use crate::checkers::{check_differential, check_local, check_relaxed};
        let lim = counterexample1_limit().unwrap();
        let report = check_relaxed(&lim.tuple, &lim.problem, 1e-8).unwrap();
        assert!(report.passed, "{report}");
        let pbv = check_normalized_pbv(&lim.tuple, &lim.problem, 1e-8).unwrap();
        println!("{pbv}");

        let ce2 = counterexample2(4).unwrap();
        let z = ce2.physical.as_ref().unwrap();
        assert!(check_differential(z, &ce2.problem, 1e-8).unwrap().passed);
        assert!(check_local(z, &ce2.problem, 1e-8, &[]).unwrap().passed);
        assert!(
            check_normalized_pbv(&ce2.tuple, &ce2.problem, 1e-8)
                .unwrap()
                .passed
        );

        let lim2 = counterexample2_limit().unwrap();
        let report =
            check_local(lim2.physical.as_ref().unwrap(), &lim2.problem, 1e-8, &[]).unwrap();
        let ineq = report.condition(ConditionId::EnergyInequality).unwrap();
        assert!((ineq.residual - 0.125).abs() < 1e-10, "{report}");
        println!("{report}");

        let ctl = asymmetric_jump_control().unwrap();
        let report = check_normalized_pbv(&ctl.tuple, &ctl.problem, 1e-8).unwrap();
        let norm = report.condition(ConditionId::Normalization).unwrap();
        println!("{report}");
        assert!((norm.residual - 1.25f64.sqrt() * 0.3).abs() < 1e-6);
    }
}
