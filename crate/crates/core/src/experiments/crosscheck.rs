use rayon::prelude::*;
use serde::Serialize;

use super::counterexamples::{counterexample1, counterexample2, ExampleCase, ExampleError};
use crate::checkers::energy_residual;
use crate::model::RISProblem;
use crate::tuple::ParametrizedTuple;
use crate::viscous::{reparametrize, solve_viscous, ViscousError};

#[derive(Debug, thiserror::Error)]
pub enum CrosscheckError {
    #[error("viscosities must be positive and strictly decreasing")]
    InvalidViscosities,
    #[error(transparent)]
    Example(#[from] ExampleError),
    #[error(transparent)]
    Solver(#[from] ViscousError),
    #[error(transparent)]
    Check(#[from] crate::checkers::CheckError),
    #[error(transparent)]
    Path(#[from] crate::paths::PathError),
}

/// Which closed-form example serves as the reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Reference {
    First,
    Second,
}

impl Reference {
    pub fn case(self, n: u32) -> Result<ExampleCase, ExampleError> {
        match self {
            Reference::First => counterexample1(n),
            Reference::Second => counterexample2(n),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrosscheckRow {
    pub epsilon: f64,
    pub step: f64,
    pub n: u32,
    #[serde(rename = "S")]
    pub s_end: f64,
    pub sup_err_z: f64,
    pub sup_err_t: f64,
    pub normalization_residual: f64,
    pub energy_residual: f64,
}

/// Largest segmentwise deviation of `t_hat' + 𝔭(z_hat', -D_z Î)` from 1,
/// evaluated at segment midpoints.
pub fn normalization_residual(tuple: &ParametrizedTuple, problem: &RISProblem) -> f64 {
    let (t_hat, z_hat, ell_hat) = (tuple.t_hat(), tuple.z_hat(), tuple.ell_hat());
    let r = problem.dissipation();
    let energy = problem.energy();
    let mut worst: f64 = 0.0;
    for k in 0..z_hat.segment_count() {
        let (a, b) = z_hat.segment_times(k);
        let mid = 0.5 * (a + b);
        let rate = z_hat.segment_slope(k);
        let speed = t_hat.segment_slope(t_hat.segment_index(mid))[0];
        let force = ell_hat.value_clamped(mid) - energy.gradient(&z_hat.segment_value(k, mid));
        let p = r.contact_potential(&rate, &force).total;
        worst = worst.max((speed + p - 1.0).abs());
    }
    worst
}

/// Solves the viscous problem of the reference example for every
/// viscosity and compares the reparametrized result with the exact tuple at
/// equal parameters. Both tuples are continued constantly to the larger of
/// the two parameter ranges.
pub fn viscous_crosscheck(
    reference: Reference,
    n: u32,
    epsilons: &[f64],
    step_rule: impl Fn(f64) -> f64 + Sync,
) -> Result<Vec<CrosscheckRow>, CrosscheckError> {
    if epsilons.iter().any(|&e| !e.is_finite() || e <= 0.0)
        || epsilons.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(CrosscheckError::InvalidViscosities);
    }
    let case = reference.case(n)?;
    epsilons
        .par_iter()
        .map(|&epsilon| {
            let step = step_rule(epsilon);
            let traj = solve_viscous(&case.problem, epsilon, step)?;
            let tuple = reparametrize(&traj, &case.problem)?;
            let s_end = tuple.s_end().max(case.tuple.s_end());
            let (approx, exact) = (tuple.extended_to(s_end), case.tuple.extended_to(s_end));
            Ok(CrosscheckRow {
                epsilon,
                step,
                n,
                s_end: tuple.s_end(),
                sup_err_z: approx.z_hat().sup_distance(exact.z_hat())?,
                sup_err_t: approx.t_hat().sup_distance(exact.t_hat())?,
                normalization_residual: normalization_residual(&tuple, &case.problem),
                energy_residual: energy_residual(
                    &tuple,
                    case.problem.energy(),
                    case.problem.dissipation(),
                    0.0,
                    tuple.s_end(),
                )?,
            })
        })
        .collect()
}

/// Whether `errors` is nonincreasing up to a relative slack.
pub fn is_monotone_within(errors: &[f64], slack: f64) -> bool {
    errors.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack))
}

pub fn write_crosscheck_csv<W: std::io::Write>(
    rows: &[CrosscheckRow],
    writer: W,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "epsilon",
        "step",
        "n",
        "S",
        "sup_err_z",
        "normalization_residual",
        "energy_residual",
    ])?;
    for r in rows {
        w.write_record([
            r.epsilon.to_string(),
            r.step.to_string(),
            r.n.to_string(),
            r.s_end.to_string(),
            format!("{:e}", r.sup_err_z),
            format!("{:e}", r.normalization_residual),
            format!("{:e}", r.energy_residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::viscous::default_step;

    #[test]
    fn coarse_sweep_converges() {
        let rows =
            viscous_crosscheck(Reference::First, 4, &[4e-2, 2e-2, 1e-2], default_step).unwrap();
        let errors: Vec<f64> = rows.iter().map(|r| r.sup_err_z).collect();
        assert!(is_monotone_within(&errors, 0.1), "{errors:?}");
        assert!(errors[2] < 5e-2);
        assert!(rows.iter().all(|r| r.energy_residual > -1e-7));
    }

    #[test]
    fn rejects_unsorted_viscosities() {
        assert!(viscous_crosscheck(Reference::First, 4, &[1e-3, 1e-2], default_step).is_err());
    }
}
