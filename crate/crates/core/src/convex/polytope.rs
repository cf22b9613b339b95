//! Polytope utilities: facet offsets and Euclidean projection onto a convex
//! hull (Wolfe's minimum-norm-point algorithm).

use nalgebra::{DMatrix, DVector};

use super::ConvexError;
use crate::paths::Vector;

const MAX_ITERATIONS: usize = 10_000;

/// All `k`-element subsets of `0..n`, lexicographically.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Vector orthogonal to the rows of the `(d-1) x d` matrix `rows`, by
/// cofactor expansion (generalised cross product).
fn orthogonal_complement(rows: &DMatrix<f64>, d: usize) -> Vector {
    Vector::from_fn(d, |i, _| {
        let minor = rows.clone().remove_column(i);
        let det = if minor.nrows() == 0 {
            1.0
        } else {
            minor.determinant()
        };
        if i % 2 == 0 {
            det
        } else {
            -det
        }
    })
}

/// Smallest distance from the origin to a facet hyperplane of
/// `conv(vertices)`. Fails unless the origin is an interior point.
pub(crate) fn inradius_at_origin(vertices: &[Vector]) -> Result<f64, ConvexError> {
    let d = vertices[0].len();
    let scale = vertices
        .iter()
        .map(|v| v.amax())
        .fold(0.0, f64::max)
        .max(1e-300);
    let tol = 1e-10 * scale;
    let mut best = f64::INFINITY;
    for subset in subsets(vertices.len(), d) {
        let base = &vertices[subset[0]];
        let rows = DMatrix::from_fn(d - 1, d, |r, c| vertices[subset[r + 1]][c] - base[c]);
        let normal = orthogonal_complement(&rows, d);
        let norm = normal.norm();
        if norm <= 1e-12 * scale.powi(d as i32 - 1).max(1e-300) {
            continue;
        }
        let n = normal / norm;
        let b = n.dot(base);
        let below = vertices.iter().all(|v| n.dot(v) <= b + tol);
        let above = vertices.iter().all(|v| n.dot(v) >= b - tol);
        let offset = match (below, above) {
            (true, true) => return Err(ConvexError::DegeneratePolytope),
            (true, false) => b,
            (false, true) => -b,
            (false, false) => continue,
        };
        if offset <= tol {
            return Err(ConvexError::OriginNotInterior);
        }
        best = best.min(offset);
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(ConvexError::DegeneratePolytope)
    }
}

/// Barycentric coefficients of the point of minimal norm in the affine hull
/// of `points[active]`.
fn affine_minimizer(points: &[Vector], active: &[usize]) -> DVector<f64> {
    let m = active.len();
    let mut kkt = DMatrix::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..m {
            kkt[(i, j)] = points[active[i]].dot(&points[active[j]]);
        }
        kkt[(i, m)] = 1.0;
        kkt[(m, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = 1.0;
    let sol = kkt
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|x| x.is_finite()))
        .unwrap_or_else(|| {
            kkt.svd(true, true)
                .solve(&rhs, 1e-14)
                .unwrap_or_else(|_| DVector::from_element(m + 1, 1.0 / m as f64))
        });
    sol.rows(0, m).into_owned()
}

/// Point of minimal Euclidean norm in `conv(points)`, with its barycentric
/// weights indexed like `points`.
pub(crate) fn min_norm_point(points: &[Vector]) -> Result<(Vector, Vec<f64>), ConvexError> {
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max);
    let tol = 1e-13 * scale.max(1e-300);
    let start = (0..points.len())
        .min_by(|&a, &b| {
            points[a]
                .norm_squared()
                .total_cmp(&points[b].norm_squared())
        })
        .ok_or(ConvexError::DegeneratePolytope)?;
    let mut active = vec![start];
    let mut weights = vec![1.0];
    let mut x = points[start].clone();
    let combine = |active: &[usize], w: &[f64]| {
        active
            .iter()
            .zip(w)
            .fold(Vector::zeros(points[0].len()), |acc, (&i, &wi)| {
                acc + &points[i] * wi
            })
    };
    for _ in 0..MAX_ITERATIONS {
        let (j, best) = (0..points.len())
            .map(|j| (j, x.dot(&points[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if x.norm_squared() - best <= tol || active.contains(&j) {
            return Ok((x, expand(points.len(), &active, &weights)));
        }
        active.push(j);
        weights.push(0.0);
        loop {
            let mu = affine_minimizer(points, &active);
            if mu.iter().all(|&m| m > 1e-15) {
                weights = mu.iter().copied().collect();
                x = combine(&active, &weights);
                break;
            }
            let theta = active
                .iter()
                .enumerate()
                .filter(|&(i, _)| mu[i] <= 1e-15)
                .map(|(i, _)| weights[i] / (weights[i] - mu[i]))
                .fold(1.0, f64::min);
            for (i, w) in weights.iter_mut().enumerate() {
                *w += theta * (mu[i] - *w);
            }
            let keep: Vec<usize> = (0..active.len()).filter(|&i| weights[i] > 1e-15).collect();
            active = keep.iter().map(|&i| active[i]).collect();
            weights = keep.iter().map(|&i| weights[i]).collect();
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            x = combine(&active, &weights);
            if active.len() == 1 {
                break;
            }
        }
    }
    Err(ConvexError::NoConvergence(MAX_ITERATIONS))
}

fn expand(n: usize, active: &[usize], weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (&i, &w) in active.iter().zip(weights) {
        out[i] = w;
    }
    out
}

/// Euclidean projection of `w` onto `conv(vertices)`.
pub(crate) fn project_onto_hull(vertices: &[Vector], w: &Vector) -> Result<Vector, ConvexError> {
    let shifted: Vec<Vector> = vertices.iter().map(|a| a - w).collect();
    let (x, _) = min_norm_point(&shifted)?;
    Ok(x + w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn square() -> Vec<Vector> {
        vec![
            v(&[1.0, 1.0]),
            v(&[-1.0, 1.0]),
            v(&[-1.0, -1.0]),
            v(&[1.0, -1.0]),
        ]
    }

    #[test]
    fn subsets_enumerate_binomially() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(5, 3).len(), 10);
        assert_eq!(subsets(3, 1), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn inradius_of_square_and_interval() {
        assert_abs_diff_eq!(inradius_at_origin(&square()).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            inradius_at_origin(&[v(&[-2.0]), v(&[0.5])]).unwrap(),
            0.5,
            epsilon = 1e-14
        );
        assert!(matches!(
            inradius_at_origin(&[v(&[1.0, 0.0]), v(&[2.0, 1.0]), v(&[2.0, -1.0])]),
            Err(ConvexError::OriginNotInterior)
        ));
        assert!(matches!(
            inradius_at_origin(&[v(&[1.0, 0.0]), v(&[-1.0, 0.0])]),
            Err(ConvexError::DegeneratePolytope)
        ));
    }

    #[test]
    fn projection_onto_square() {
        let p = project_onto_hull(&square(), &v(&[3.0, 0.5])).unwrap();
        assert_abs_diff_eq!(p, v(&[1.0, 0.5]), epsilon = 1e-12);
        let p = project_onto_hull(&square(), &v(&[3.0, -4.0])).unwrap();
        assert_abs_diff_eq!(p, v(&[1.0, -1.0]), epsilon = 1e-12);
        let inside = v(&[0.2, -0.3]);
        assert_abs_diff_eq!(
            project_onto_hull(&square(), &inside).unwrap(),
            inside,
            epsilon = 1e-12
        );
    }
}
