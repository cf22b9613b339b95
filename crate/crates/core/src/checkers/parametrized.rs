//! Checks of parametrized candidates `(S, t_hat, z_hat, ell_hat)`.

use super::{
    increasing_set, CheckError, CheckReport, Concept, ConditionId, IncreasingSet, Location, Worst,
};
use crate::convex::Dissipation;
use crate::model::{EnergyModel, RISProblem};
use crate::paths::{compose_monotone, PiecewisePath, Vector};
use crate::quadrature;
use crate::tuple::ParametrizedTuple;

/// Absolute tolerance requested from the adaptive quadrature.
const QUAD_TOL: f64 = 1e-13;

/// Iterations of the switch-point bisection.
const BISECTION_STEPS: usize = 80;

/// A parameter interval on which all three components are affine.
struct Piece<'a> {
    s0: f64,
    s1: f64,
    t_slope: f64,
    z_start: Vector,
    z_slope: Vector,
    ell: &'a PiecewisePath,
    ell_segment: usize,
}

impl Piece<'_> {
    fn z(&self, s: f64) -> Vector {
        &self.z_start + &self.z_slope * (s - self.s0)
    }

    fn ell(&self, s: f64) -> Vector {
        self.ell.segment_value(self.ell_segment, s)
    }

    /// `-D_z Î(s, z_hat(s))`.
    fn driving_force(&self, energy: &EnergyModel, s: f64) -> Vector {
        self.ell(s) - energy.gradient(&self.z(s))
    }

    /// Segment end limits plus interior Gauss nodes.
    fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.s0)
            .chain(quadrature::nodes(self.s0, self.s1))
            .chain(std::iter::once(self.s1))
    }

    /// `(int 𝔭(z', -D_z Î), int <ell_hat, z'>)` over `[a, b] ⊆ [s0, s1]`.
    fn integrals(&self, energy: &EnergyModel, r: &Dissipation, a: f64, b: f64) -> (f64, f64) {
        if b <= a {
            return (0.0, 0.0);
        }
        let speed = self.z_slope.norm();
        let mut contact = r.eval(&self.z_slope) * (b - a);
        if speed > 0.0 {
            let dist = |s: f64| r.dist_to_subdiff0(&self.driving_force(energy, s));
            contact += speed * quadrature::integrate(&dist, a, b, QUAD_TOL);
        }
        // <ell_hat, z'> is affine on the piece, so the midpoint rule is exact.
        let power = self.ell(0.5 * (a + b)).dot(&self.z_slope) * (b - a);
        (contact, power)
    }
}

fn pieces(tuple: &ParametrizedTuple) -> Vec<Piece<'_>> {
    let cuts = tuple.breakpoints();
    cuts.windows(2)
        .map(|w| {
            let (s0, s1) = (w[0], w[1]);
            let mid = 0.5 * (s0 + s1);
            let t_seg = tuple.t_hat().segment_index(mid);
            let z_seg = tuple.z_hat().segment_index(mid);
            Piece {
                s0,
                s1,
                t_slope: tuple.t_hat().segment_slope(t_seg)[0],
                z_start: tuple.z_hat().segment_value(z_seg, s0),
                z_slope: tuple.z_hat().segment_slope(z_seg),
                ell: tuple.ell_hat(),
                ell_segment: tuple.ell_hat().segment_index(mid),
            }
        })
        .collect()
}

fn check_compatible(tuple: &ParametrizedTuple, problem: &RISProblem) -> Result<(), CheckError> {
    if tuple.dim() != problem.dim() {
        return Err(CheckError::Precondition(format!(
            "tuple has dimension {}, problem has {}",
            tuple.dim(),
            problem.dim()
        )));
    }
    Ok(())
}

/// Signed gap `E(z(s2)) + int 𝔭 - E(z(s1)) - int <ell_hat, z'>` over
/// `[s1, s2]`. It is nonnegative up to quadrature error for every tuple.
pub fn energy_residual(
    tuple: &ParametrizedTuple,
    energy: &EnergyModel,
    r: &Dissipation,
    s1: f64,
    s2: f64,
) -> Result<f64, CheckError> {
    let tol = tuple.t_hat().snap_tolerance();
    if s1 < -tol || s2 > tuple.s_end() + tol || s2 < s1 {
        return Err(CheckError::Precondition(format!(
            "need 0 <= s1 <= s2 <= S, got s1 = {s1}, s2 = {s2}, S = {}",
            tuple.s_end()
        )));
    }
    let z = tuple.z_hat();
    let mut gap = energy.value(&z.value(s2)?) - energy.value(&z.value(s1)?);
    for piece in pieces(tuple) {
        let (a, b) = (piece.s0.max(s1), piece.s1.min(s2));
        let (contact, power) = piece.integrals(energy, r, a, b);
        gap += contact - power;
    }
    Ok(gap)
}

/// Oscillation of `G(s) = E(z(s)) + int_0^s 𝔭 - int_0^s <ell_hat, z'>` over
/// knots and piece midpoints: `(max G - min G, s_a, s_b)` with `s_a < s_b`
/// the locations of the extrema.
pub fn energy_identity_gap(
    tuple: &ParametrizedTuple,
    energy: &EnergyModel,
    r: &Dissipation,
) -> (f64, f64, f64) {
    let z0 = tuple.z_hat().value_clamped(0.0);
    let mut running = 0.0;
    let mut values = vec![(0.0, energy.value(&z0))];
    for piece in pieces(tuple) {
        let mid = 0.5 * (piece.s0 + piece.s1);
        let (c1, p1) = piece.integrals(energy, r, piece.s0, mid);
        values.push((mid, energy.value(&piece.z(mid)) + running + c1 - p1));
        let (c2, p2) = piece.integrals(energy, r, mid, piece.s1);
        running += c1 - p1 + c2 - p2;
        values.push((piece.s1, energy.value(&piece.z(piece.s1)) + running));
    }
    let (lo, hi) = values.iter().fold((values[0], values[0]), |(lo, hi), &v| {
        (
            if v.1 < lo.1 { v } else { lo },
            if v.1 > hi.1 { v } else { hi },
        )
    });
    (hi.1 - lo.1, lo.0.min(hi.0), lo.0.max(hi.0))
}

/// Conditions shared by both parametrized concepts.
fn common_conditions(
    tuple: &ParametrizedTuple,
    problem: &RISProblem,
    tol: f64,
    report: &mut CheckReport,
) -> Result<IncreasingSet, CheckError> {
    check_compatible(tuple, problem)?;
    let m = increasing_set(tuple.t_hat())?;
    let energy = problem.energy();
    let r = problem.dissipation();

    let mut endpoints = Worst::default();
    let t0 = tuple.t_hat().scalar(0.0)?;
    endpoints.update(t0.abs(), || {
        (Location::Parameter { s: 0.0 }, format!("t_hat(0) = {t0}"))
    });
    let s_end = tuple.s_end();
    let t_end = tuple.t_hat().scalar(s_end)?;
    endpoints.update((t_end - problem.final_time()).abs(), || {
        (
            Location::Parameter { s: s_end },
            format!("t_hat(S) = {t_end}, T = {}", problem.final_time()),
        )
    });
    let z_start = tuple.z_hat().value(0.0)?;
    endpoints.update((&z_start - problem.z0()).norm(), || {
        (
            Location::Parameter { s: 0.0 },
            format!("z_hat(0) = {:?}", z_start.as_slice()),
        )
    });
    report.push(ConditionId::Endpoints, endpoints, tol);

    let mut complementarity = Worst::default();
    let mut normalization = Worst::default();
    for piece in pieces(tuple) {
        let speed = piece.z_slope.norm();
        let r_rate = r.eval(&piece.z_slope);
        complementarity.update((-piece.t_slope).max(0.0), || {
            (
                Location::Parameter { s: piece.s0 },
                format!("t_hat' = {}", piece.t_slope),
            )
        });
        for s in piece.samples() {
            let dist = r.dist_to_subdiff0(&piece.driving_force(energy, s));
            let rate = piece.t_slope.max(0.0);
            complementarity.update(rate * dist, || {
                (
                    Location::Parameter { s },
                    format!("t_hat' = {rate}, dist = {dist:e}"),
                )
            });
            let total = piece.t_slope + r_rate + speed * dist;
            normalization.update((total - 1.0).abs(), || {
                (
                    Location::Parameter { s },
                    format!(
                        "t_hat' = {}, R(z') = {r_rate}, ||z'|| dist = {}",
                        piece.t_slope,
                        speed * dist
                    ),
                )
            });
        }
    }
    report.push(ConditionId::Complementarity, complementarity, tol);
    report.push(ConditionId::Normalization, normalization, tol);

    let (gap, s_a, s_b) = energy_identity_gap(tuple, energy, r);
    let mut identity = Worst::default();
    identity.update(gap, || {
        (
            Location::ParameterInterval { from: s_a, to: s_b },
            "extremal pair of the energy balance".to_string(),
        )
    });
    report.push(ConditionId::EnergyIdentity, identity, tol);
    Ok(m)
}

/// Largest deviation of `path` from `target` on the interval from `a` to `b`,
/// with the endpoints included as requested. Exact for piecewise-affine paths.
fn sup_deviation(
    path: &PiecewisePath,
    target: &Vector,
    a: f64,
    b: f64,
    include_a: bool,
    include_b: bool,
) -> f64 {
    let tol = path.snap_tolerance();
    let dev = |v: Vector| (v - target).norm();
    if b - a <= tol {
        return if include_a && include_b {
            dev(path.value_clamped(a))
        } else {
            0.0
        };
    }
    let mut worst = dev(path.right_clamped(a)).max(dev(path.left_clamped(b)));
    if include_a {
        worst = worst.max(dev(path.value_clamped(a)));
    }
    if include_b {
        worst = worst.max(dev(path.value_clamped(b)));
    }
    for k in path.knots() {
        if k.t > a + tol && k.t < b - tol {
            worst = worst
                .max(dev(k.left.clone()))
                .max(dev(k.value.clone()))
                .max(dev(k.right.clone()));
        }
    }
    worst
}

/// Largest deviation between two paths on the open interval `(a, b)`,
/// ignoring point values at knots.
fn sup_open_difference(f: &PiecewisePath, g: &PiecewisePath, a: f64, b: f64) -> (f64, f64) {
    let tol = f.snap_tolerance().max(g.snap_tolerance());
    let mut cuts = vec![a];
    cuts.extend(
        PiecewisePath::merged_breakpoints(&[f, g])
            .into_iter()
            .filter(|&t| t > a + tol && t < b - tol),
    );
    cuts.push(b);
    let mut worst = (0.0, a);
    for w in cuts.windows(2) {
        let start = (f.right_clamped(w[0]) - g.right_clamped(w[0])).norm();
        let end = (f.left_clamped(w[1]) - g.left_clamped(w[1])).norm();
        if start > worst.0 {
            worst = (start, w[0]);
        }
        if end > worst.0 {
            worst = (end, w[1]);
        }
    }
    worst
}

fn dist_to_limits(load: &PiecewisePath, t: f64, v: &Vector) -> f64 {
    [
        load.left_clamped(t),
        load.value_clamped(t),
        load.right_clamped(t),
    ]
    .into_iter()
    .map(|x| (v - x).norm())
    .fold(f64::INFINITY, f64::min)
}

/// Best switch point on the plateau `[a, b]` at level `t_star`; returns
/// `(residual, s_star)`.
fn best_switch_point(
    ell_hat: &PiecewisePath,
    load: &PiecewisePath,
    t_star: f64,
    a: f64,
    b: f64,
) -> (f64, f64) {
    let before = load.left_clamped(t_star);
    let after = load.right_clamped(t_star);
    let before_dev = |s: f64| sup_deviation(ell_hat, &before, a, s, true, false);
    let after_dev = |s: f64| sup_deviation(ell_hat, &after, s, b, false, true);
    let residual = |s: f64| {
        before_dev(s)
            .max(after_dev(s))
            .max(dist_to_limits(load, t_star, &ell_hat.value_clamped(s)))
    };

    let tol = ell_hat.snap_tolerance();
    let mut candidates = vec![a, b];
    candidates.extend(
        ell_hat
            .breakpoints()
            .filter(|&s| s > a + tol && s < b - tol),
    );
    // before_dev is nondecreasing and after_dev nonincreasing in s.
    let (mut lo, mut hi) = (a, b);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if before_dev(mid) < after_dev(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    candidates.push(hi);
    candidates.sort_by(f64::total_cmp);

    let mut best = (f64::INFINITY, a);
    for s in candidates {
        let r = residual(s);
        if r < best.0 {
            best = (r, s);
        }
    }
    best
}

/// Checks the normalized parametrized concept, including the switch-point
/// compatibility of `ell_hat` with the load `problem.load()`.
pub fn check_normalized_pbv(
    tuple: &ParametrizedTuple,
    problem: &RISProblem,
    tol: f64,
) -> Result<CheckReport, CheckError> {
    let mut report = CheckReport::new(Concept::NormalizedPbv);
    let m = common_conditions(tuple, problem, tol, &mut report)?;
    let load = problem.load();
    let ell_hat = tuple.ell_hat();
    let t_hat = tuple.t_hat();
    let composed = compose_monotone(load, t_hat)?;
    let s_end = tuple.s_end();
    let tol_s = t_hat.snap_tolerance();

    let mut compat = Worst::default();
    for &(a, b) in &m.intervals {
        let (dev, s) = sup_open_difference(ell_hat, &composed, a, b);
        compat.update(dev, || {
            (
                Location::Parameter { s },
                "ell_hat differs from ell(t_hat) off the plateaus".into(),
            )
        });
    }
    // Single-point preimages: knots inside the increasing set and the
    // endpoints when they do not belong to a plateau.
    let plateaus = m.plateaus(s_end);
    let on_plateau = |s: f64| {
        plateaus
            .iter()
            .any(|&(a, b)| s >= a - tol_s && s <= b + tol_s)
    };
    for s in PiecewisePath::merged_breakpoints(&[ell_hat, &composed, t_hat]) {
        if on_plateau(s) {
            continue;
        }
        let t = t_hat.value_clamped(s)[0];
        let dev = dist_to_limits(load, t, &ell_hat.value_clamped(s));
        compat.update(dev, || {
            (
                Location::Parameter { s },
                format!("ell_hat(s) is none of ell(t-), ell(t), ell(t+) at t = {t}"),
            )
        });
    }
    for &(a, b) in &plateaus {
        let t_star = t_hat.value_clamped(a)[0];
        let (dev, s_star) = best_switch_point(ell_hat, load, t_star, a, b);
        compat.update(dev, || {
            (
                Location::ParameterInterval { from: a, to: b },
                format!("no admissible switch point at t* = {t_star} (best s* = {s_star})"),
            )
        });
    }
    report.push(ConditionId::LoadCompatibility, compat, tol);
    Ok(report)
}

/// Checks the relaxed concept: the common conditions plus
/// `ell_hat = ell ∘ t_hat` almost everywhere on the increasing set.
pub fn check_relaxed(
    tuple: &ParametrizedTuple,
    problem: &RISProblem,
    tol: f64,
) -> Result<CheckReport, CheckError> {
    let mut report = CheckReport::new(Concept::Relaxed);
    let m = common_conditions(tuple, problem, tol, &mut report)?;
    let composed = compose_monotone(problem.load(), tuple.t_hat())?;
    let mut consistency = Worst::default();
    for &(a, b) in &m.intervals {
        let (dev, s) = sup_open_difference(tuple.ell_hat(), &composed, a, b);
        consistency.update(dev, || {
            (
                Location::Parameter { s },
                "ell_hat differs from ell(t_hat) on the increasing set".into(),
            )
        });
    }
    report.push(ConditionId::LoadConsistency, consistency, tol);
    Ok(report)
}
