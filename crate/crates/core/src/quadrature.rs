//! Gauss-Legendre quadrature.

use std::sync::OnceLock;

/// Number of nodes of the basic rule.
pub const NODES: usize = 16;

const MAX_DEPTH: u32 = 14;

/// Nodes and weights on `[-1, 1]`, computed once by Newton's method on the
/// Legendre polynomial.
fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = NODES;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    })
}

/// Interior nodes of the rule mapped to `[a, b]`.
pub fn nodes(a: f64, b: f64) -> impl Iterator<Item = f64> {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    rule().iter().map(move |&(x, _)| mid + half * x)
}

/// One application of the rule on `[a, b]`.
pub fn gauss(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * rule()
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

/// Adaptive bisection driven by the difference between one panel and two
/// half panels.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (left, right) = (gauss(f, a, m), gauss(f, m, b));
        if depth >= MAX_DEPTH || (left + right - whole).abs() <= tol {
            left + right
        } else {
            recurse(f, a, m, left, 0.5 * tol, depth + 1)
                + recurse(f, m, b, right, 0.5 * tol, depth + 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    recurse(f, a, b, gauss(f, a, b), tol, 0)
}
