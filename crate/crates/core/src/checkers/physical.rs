//! Checks of physical-time candidates `z : [0, T] -> R^d`.

use super::{CheckError, CheckReport, Concept, ConditionId, Location, Worst};
use crate::model::RISProblem;
use crate::paths::{dissipation, kurzweil_stieltjes, PiecewisePath, Vector};
use crate::quadrature;

fn check_domain(z: &PiecewisePath, problem: &RISProblem) -> Result<(), CheckError> {
    let load = problem.load();
    let tol = load.snap_tolerance();
    if (z.start() - load.start()).abs() > tol || (z.end() - load.end()).abs() > tol {
        return Err(CheckError::Precondition(format!(
            "candidate lives on [{}, {}], load on [{}, {}]",
            z.start(),
            z.end(),
            load.start(),
            load.end()
        )));
    }
    if z.dim() != problem.dim() {
        return Err(CheckError::Precondition(format!(
            "candidate has dimension {}, problem has {}",
            z.dim(),
            problem.dim()
        )));
    }
    Ok(())
}

/// Pieces `[u0, u1]` on which both `z` and the load are affine.
fn common_pieces(z: &PiecewisePath, load: &PiecewisePath) -> Vec<(f64, f64)> {
    let cuts = PiecewisePath::merged_breakpoints(&[z, load]);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// State and load on the piece `[u0, u1]`, using one-sided limits at its ends.
fn on_piece(path: &PiecewisePath, u0: f64, u1: f64, t: f64) -> Vector {
    let k = path.segment_index(0.5 * (u0 + u1));
    path.segment_value(k, t)
}

/// Checks the local concept: stability `-D_z I(t, z(t)) ∈ ∂R(0)` almost
/// everywhere and the energy inequality with Kurzweil power term for all
/// `t1 <= t2` among the knots, `grid` and interior sample points.
pub fn check_local(
    z: &PiecewisePath,
    problem: &RISProblem,
    tol: f64,
    grid: &[f64],
) -> Result<CheckReport, CheckError> {
    check_domain(z, problem)?;
    let load = problem.load();
    let energy = problem.energy();
    let r = problem.dissipation();
    let mut report = CheckReport::new(Concept::Local);

    let mut stability = Worst::default();
    let pieces = common_pieces(z, load);
    let mut times: Vec<f64> = Vec::new();
    for &(u0, u1) in &pieces {
        let samples = std::iter::once(u0)
            .chain(quadrature::nodes(u0, u1))
            .chain(std::iter::once(u1));
        for t in samples {
            let force = on_piece(load, u0, u1, t) - energy.gradient(&on_piece(z, u0, u1, t));
            let dist = r.dist_to_subdiff0(&force);
            stability.update(dist, || {
                (
                    Location::Time { t },
                    format!("dist(-D_z I, ∂R(0)) = {dist:e}"),
                )
            });
        }
        times.push(u0);
        times.extend([0.25, 0.5, 0.75].map(|q| u0 + q * (u1 - u0)));
    }
    times.push(z.end());
    let tol_t = load.snap_tolerance();
    times.extend(grid.iter().copied().filter(|&t| load.contains(t)));
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= tol_t);
    for &t in grid {
        if !load.contains(t) {
            continue;
        }
        let force = load.value(t)? - energy.gradient(&z.value(t)?);
        let dist = r.dist_to_subdiff0(&force);
        // Point values at jump times are not constrained by an a.e. condition.
        let at_jump = z
            .jump_times()
            .iter()
            .chain(load.jump_times().iter())
            .any(|&j| (j - t).abs() <= tol_t);
        if !at_jump {
            stability.update(dist, || {
                (
                    Location::Time { t },
                    format!("dist(-D_z I, ∂R(0)) = {dist:e}"),
                )
            });
        }
    }
    report.push(ConditionId::LocalStability, stability, tol);

    // G(t) = I(t, z(t)) + Diss(z; [0, t]) + int_0^t z dell; the inequality
    // for (t1, t2) is G(t2) <= G(t1) by additivity of both integrals.
    let mut g = Vec::with_capacity(times.len());
    let mut accumulated = 0.0;
    for (i, &t) in times.iter().enumerate() {
        if i > 0 {
            let t_prev = times[i - 1];
            accumulated += dissipation(r, z, t_prev, t)? + kurzweil_stieltjes(z, load, t_prev, t)?;
        }
        g.push(problem.energy_at(t, &z.value(t)?)? + accumulated);
    }
    let mut inequality = Worst::default();
    let mut argmin = 0;
    for j in 0..g.len() {
        if g[j] < g[argmin] {
            argmin = j;
        }
        let gap = g[j] - g[argmin];
        let (t1, t2) = (times[argmin], times[j]);
        inequality.update(gap, || {
            (
                Location::TimePair { t1, t2 },
                format!("I(t2) + Diss - I(t1) + int z dell = {gap:e}"),
            )
        });
    }
    report.push(ConditionId::EnergyInequality, inequality, tol);
    Ok(report)
}

/// Checks that a continuous `z` satisfies `0 ∈ ∂R(z') + D_z I(t, z)` almost
/// everywhere and starts at `z0`.
pub fn check_differential(
    z: &PiecewisePath,
    problem: &RISProblem,
    tol: f64,
) -> Result<CheckReport, CheckError> {
    check_domain(z, problem)?;
    if let Some(&t) = z.jump_times().first() {
        return Err(CheckError::Precondition(format!(
            "differential solutions are continuous, but z jumps at t = {t}"
        )));
    }
    let load = problem.load();
    let energy = problem.energy();
    let r = problem.dissipation();
    let mut report = CheckReport::new(Concept::Differential);

    let mut initial = Worst::default();
    let start = z.value(z.start())?;
    initial.update((&start - problem.z0()).norm(), || {
        (
            Location::Time { t: z.start() },
            format!("z(0) = {:?}", start.as_slice()),
        )
    });
    report.push(ConditionId::InitialValue, initial, tol);

    let mut inclusion = Worst::default();
    for (u0, u1) in common_pieces(z, load) {
        let rate = z.segment_slope(z.segment_index(0.5 * (u0 + u1)));
        let samples = std::iter::once(u0)
            .chain(quadrature::nodes(u0, u1))
            .chain(std::iter::once(u1));
        for t in samples {
            let force = on_piece(load, u0, u1, t) - energy.gradient(&on_piece(z, u0, u1, t));
            let dist = r.subdiff_distance(&rate, &force);
            inclusion.update(dist, || {
                (
                    Location::Time { t },
                    format!(
                        "dist(-D_z I, ∂R(z')) = {dist:e} with z' = {:?}",
                        rate.as_slice()
                    ),
                )
            });
        }
    }
    report.push(ConditionId::Inclusion, inclusion, tol);
    Ok(report)
}
