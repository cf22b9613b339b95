use super::{Knot, LipschitzPath, PathError, PiecewisePath, Result};

/// Exact representation of `f ∘ t_hat` for a nondecreasing scalar `t_hat`.
///
/// The knots are those of `t_hat` plus the preimages of the knots of `f` on
/// strictly increasing segments. Point values are `f(t_hat(s))`. A one-sided
/// limit at `s` follows the corresponding one-sided limit of `f` when `t_hat`
/// increases on that side and is the point value `f(t*)` when `t_hat` is
/// constant there, so the result is constant `f(t*)` on every plateau.
pub fn compose_monotone(f: &PiecewisePath, t_hat: &LipschitzPath) -> Result<PiecewisePath> {
    if t_hat.dim() != 1 {
        return Err(PathError::NotScalar(t_hat.dim()));
    }
    let time_tol = f.snap_tolerance();
    let knots = t_hat.knots();
    for w in knots.windows(2) {
        if w[1].value[0] < w[0].value[0] - time_tol {
            return Err(PathError::NotMonotone(w[0].t, w[1].t));
        }
    }
    for k in knots {
        if !f.contains(k.value[0]) {
            return Err(PathError::OutOfDomain {
                t: k.value[0],
                a: f.start(),
                b: f.end(),
            });
        }
    }

    let level = |k: usize| knots[k].value[0].clamp(f.start(), f.end());
    let increasing = |k: usize| level(k + 1) - level(k) > time_tol;

    // (s, segment of t_hat containing s in its closure, on a knot of t_hat?)
    let mut cuts: Vec<(f64, usize, bool)> = Vec::new();
    for k in 0..knots.len() - 1 {
        cuts.push((knots[k].t, k, true));
        if increasing(k) {
            let (s0, s1) = (knots[k].t, knots[k + 1].t);
            let (t0, t1) = (level(k), level(k + 1));
            for t in f.breakpoints() {
                if t > t0 + time_tol && t < t1 - time_tol {
                    let s = s0 + (t - t0) / (t1 - t0) * (s1 - s0);
                    cuts.push((s, k, false));
                }
            }
        }
    }
    cuts.push((knots[knots.len() - 1].t, knots.len() - 1, true));

    let eval_t = |s: f64, seg: usize, on_knot: bool| -> f64 {
        if on_knot {
            level(seg)
        } else {
            t_hat.segment_value(seg, s)[0].clamp(f.start(), f.end())
        }
    };

    let last = cuts.len() - 1;
    let mut out = Vec::with_capacity(cuts.len());
    for (i, &(s, seg, on_knot)) in cuts.iter().enumerate() {
        let t = eval_t(s, seg, on_knot);
        let value = f.value_clamped(t);
        // Segments of t_hat to the left and right of s.
        let (left_seg, right_seg) = if on_knot {
            (seg.checked_sub(1), (seg + 1 < knots.len()).then_some(seg))
        } else {
            (Some(seg), Some(seg))
        };
        let left = match left_seg {
            Some(k) if i > 0 && increasing(k) => f.left_clamped(t),
            _ => value.clone(),
        };
        let right = match right_seg {
            Some(k) if i < last && increasing(k) => f.right_clamped(t),
            _ => value.clone(),
        };
        out.push(Knot::jump(s, left, value, right));
    }
    PiecewisePath::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::scalar;

    #[test]
    fn identity_reparametrization_keeps_the_path() {
        let f = PiecewisePath::new(vec![
            Knot::scalar(0.0, 0.0, 0.0, 0.0),
            Knot::scalar(1.0, 0.0, 0.2, 0.5),
            Knot::scalar(2.0, 0.5, 0.5, 0.5),
        ])
        .unwrap();
        let id = LipschitzPath::scalar_from_points(&[0.0, 2.0], &[0.0, 2.0]).unwrap();
        let g = compose_monotone(&f, &id).unwrap();
        assert_eq!(g.sup_distance(&f).unwrap(), 0.0);
        assert_eq!(g.value(1.0).unwrap()[0], 0.2);
    }

    #[test]
    fn plateaus_freeze_the_point_value() {
        // jump of f at t = 1 traversed by a plateau of t_hat on [1, 1.5]
        let f = PiecewisePath::new(vec![
            Knot::scalar(0.0, 0.0, 0.0, 0.0),
            Knot::scalar(1.0, 0.0, 0.0, 0.5),
            Knot::scalar(2.0, 0.5, 0.5, 0.5),
        ])
        .unwrap();
        let t_hat = LipschitzPath::scalar_from_points(&[0.0, 1.0, 1.5, 2.5], &[0.0, 1.0, 1.0, 2.0])
            .unwrap();
        let g = compose_monotone(&f, &t_hat).unwrap();
        assert_eq!(g.value(1.2).unwrap(), scalar(0.0));
        assert_eq!(g.right_limit(1.5).unwrap(), scalar(0.5));
        assert_eq!(g.left_limit(1.5).unwrap(), scalar(0.0));
        assert_eq!(g.value(2.0).unwrap(), scalar(0.5));
    }

    #[test]
    fn constant_function_stays_constant() {
        let f = PiecewisePath::constant(0.0, 3.0, scalar(4.0)).unwrap();
        let t_hat = LipschitzPath::scalar_from_points(&[0.0, 1.0, 2.0], &[0.0, 1.5, 3.0]).unwrap();
        let g = compose_monotone(&f, &t_hat).unwrap();
        assert_eq!(g.domain(), (0.0, 2.0));
        assert!(g.knots().iter().all(|k| k.value[0] == 4.0));
    }

    #[test]
    fn rejects_decreasing_reparametrization() {
        let f = PiecewisePath::constant(0.0, 1.0, scalar(0.0)).unwrap();
        let t_hat = LipschitzPath::scalar_from_points(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.5]).unwrap();
        assert!(matches!(
            compose_monotone(&f, &t_hat),
            Err(PathError::NotMonotone(..))
        ));
    }
}
