use super::{PathError, PiecewisePath, Position, Result, Vector};
use crate::convex::Dissipation;

/// Knots of `path` lying strictly inside `(t1, t2)`.
fn interior_knots(path: &PiecewisePath, t1: f64, t2: f64) -> &[super::Knot] {
    let tol = path.snap_tolerance();
    let knots = path.knots();
    let lo = knots.partition_point(|k| k.t <= t1 + tol);
    let hi = knots.partition_point(|k| k.t < t2 - tol);
    if lo >= hi {
        &[]
    } else {
        &knots[lo..hi]
    }
}

/// Supremum over partitions of `[t1, t2]` of `sum cost(z(xi_i) - z(xi_{i-1}))`
/// for a positively 1-homogeneous, subadditive `cost`.
///
/// Segments contribute the cost of their chord, every knot contributes the
/// cost of its two half-jumps (only the inner half-jump at `t1` and `t2`).
pub fn variation_with(
    z: &PiecewisePath,
    t1: f64,
    t2: f64,
    cost: impl Fn(&Vector) -> f64,
) -> Result<f64> {
    z.check_interval(t1, t2)?;
    if t2 - t1 <= z.snap_tolerance() {
        return Ok(0.0);
    }
    let knots = z.knots();
    let mut total = 0.0;
    if let Position::Knot(k) = z.locate(t1) {
        total += cost(&(&knots[k].right - &knots[k].value));
    }
    if let Position::Knot(k) = z.locate(t2) {
        total += cost(&(&knots[k].value - &knots[k].left));
    }
    let mut previous = z.right_clamped(t1);
    for knot in interior_knots(z, t1, t2) {
        total += cost(&(&knot.left - &previous));
        total += cost(&(&knot.value - &knot.left));
        total += cost(&(&knot.right - &knot.value));
        previous = knot.right.clone();
    }
    total += cost(&(z.left_clamped(t2) - previous));
    Ok(total)
}

/// Pointwise total variation `Var(f; [a, b])` with the Euclidean norm.
pub fn total_variation(f: &PiecewisePath, a: f64, b: f64) -> Result<f64> {
    variation_with(f, a, b, |v| v.norm())
}

/// Dissipation `Diss_R(z; [t1, t2])`, the supremum over partitions of the
/// summed dissipation of increments.
pub fn dissipation(r: &Dissipation, z: &PiecewisePath, t1: f64, t2: f64) -> Result<f64> {
    if let Some(d) = r.dim() {
        if d != z.dim() {
            return Err(PathError::IncompatibleDimensions(d, z.dim()));
        }
    }
    variation_with(z, t1, t2, |v| r.eval(v))
}

fn common_cuts(a: &PiecewisePath, b: &PiecewisePath, t1: f64, t2: f64) -> Vec<f64> {
    let tol = a.snap_tolerance().max(b.snap_tolerance());
    let mut cuts = vec![t1];
    cuts.extend(
        PiecewisePath::merged_breakpoints(&[a, b])
            .into_iter()
            .filter(|&t| t > t1 + tol && t < t2 - tol),
    );
    cuts.push(t2);
    cuts
}

fn check_pair(a: &PiecewisePath, b: &PiecewisePath, t1: f64, t2: f64) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(PathError::IncompatibleDimensions(a.dim(), b.dim()));
    }
    a.check_interval(t1, t2)?;
    b.check_interval(t1, t2)
}

/// Kurzweil-Stieltjes integral `int_{t1}^{t2} <z(r), d ell(r)>`.
///
/// Both integrands are affine between knots, so the absolutely continuous
/// part is integrated in closed form. A jump of `ell` at an interior time `t`
/// contributes `<z(t), ell(t+) - ell(t-)>`; at `t1` only `<z(t1), ell(t1+) -
/// ell(t1)>` and at `t2` only `<z(t2), ell(t2) - ell(t2-)>` are counted. In
/// particular, changing `ell` at a single interior point never changes the
/// integral.
pub fn kurzweil_stieltjes(z: &PiecewisePath, ell: &PiecewisePath, t1: f64, t2: f64) -> Result<f64> {
    check_pair(z, ell, t1, t2)?;
    if t2 - t1 <= z.snap_tolerance().max(ell.snap_tolerance()) {
        return Ok(0.0);
    }
    let cuts = common_cuts(z, ell, t1, t2);
    let mut total = z
        .value_clamped(t1)
        .dot(&(ell.right_clamped(t1) - ell.value_clamped(t1)));
    total += z
        .value_clamped(t2)
        .dot(&(ell.value_clamped(t2) - ell.left_clamped(t2)));
    for &u in &cuts[1..cuts.len() - 1] {
        total += z
            .value_clamped(u)
            .dot(&(ell.right_clamped(u) - ell.left_clamped(u)));
    }
    for w in cuts.windows(2) {
        let (u0, u1) = (w[0], w[1]);
        let mean = (z.right_clamped(u0) + z.left_clamped(u1)) * 0.5;
        total += mean.dot(&(ell.left_clamped(u1) - ell.right_clamped(u0)));
    }
    Ok(total)
}

/// Lebesgue integral `int_{s1}^{s2} <f(r), g'(r)> dr` for `g` continuous on
/// `[s1, s2]` (jumps of `g` are ignored, point values of `f` are irrelevant).
pub fn integral_against_derivative(
    f: &PiecewisePath,
    g: &PiecewisePath,
    s1: f64,
    s2: f64,
) -> Result<f64> {
    check_pair(f, g, s1, s2)?;
    if s2 - s1 <= f.snap_tolerance().max(g.snap_tolerance()) {
        return Ok(0.0);
    }
    let cuts = common_cuts(f, g, s1, s2);
    Ok(cuts
        .windows(2)
        .map(|w| {
            let mean = (f.right_clamped(w[0]) + f.left_clamped(w[1])) * 0.5;
            mean.dot(&(g.left_clamped(w[1]) - g.right_clamped(w[0])))
        })
        .sum())
}

/// `int_0^1 ||p + theta q|| d theta` in closed form.
fn mean_norm_of_affine(p: &Vector, q: &Vector) -> f64 {
    let a = q.norm_squared();
    let c = p.norm_squared();
    if a <= 1e-300 || a <= 1e-28 * c {
        return p.norm();
    }
    let shift = p.dot(q) / a;
    let m = (c / a - shift * shift).max(0.0);
    let antiderivative = |u: f64| {
        if m > 0.0 {
            0.5 * (u * (u * u + m).sqrt() + m * (u / m.sqrt()).asinh())
        } else {
            0.5 * u * u.abs()
        }
    };
    a.sqrt() * (antiderivative(1.0 + shift) - antiderivative(shift))
}

/// `||f - g||_{L^1}` with the Euclidean norm, evaluated segmentwise in closed
/// form. Both paths must share their domain.
pub fn l1_distance(f: &PiecewisePath, g: &PiecewisePath) -> Result<f64> {
    let tol = f.snap_tolerance().max(g.snap_tolerance());
    if (f.start() - g.start()).abs() > tol || (f.end() - g.end()).abs() > tol {
        return Err(PathError::Precondition(format!(
            "domains differ: [{}, {}] vs [{}, {}]",
            f.start(),
            f.end(),
            g.start(),
            g.end()
        )));
    }
    check_pair(f, g, f.start(), f.end())?;
    let cuts = common_cuts(f, g, f.start(), f.end());
    Ok(cuts
        .windows(2)
        .map(|w| {
            let p = f.right_clamped(w[0]) - g.right_clamped(w[0]);
            let e = f.left_clamped(w[1]) - g.left_clamped(w[1]);
            (w[1] - w[0]) * mean_norm_of_affine(&p, &(e - &p))
        })
        .sum())
}
