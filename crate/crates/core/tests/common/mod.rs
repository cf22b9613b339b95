//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rislab::convex::Dissipation;
use rislab::model::{EnergyModel, Nonlinearity, RISProblem};
use rislab::paths::{Knot, LipschitzPath, PiecewisePath, Vector};
use rislab::tuple::ParametrizedTuple;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vector(rng: &mut TestRng, d: usize, scale: f64) -> Vector {
    Vector::from_fn(d, |_, _| rng.random_range(-scale..scale))
}

/// Increasing times on `[a, b]` with `count` interior points.
pub fn times(rng: &mut TestRng, a: f64, b: f64, count: usize) -> Vec<f64> {
    let mut ts: Vec<f64> = (0..count).map(|_| rng.random_range(a..b)).collect();
    ts.push(a);
    ts.push(b);
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|x, y| (*x - *y).abs() < 1e-6);
    ts
}

/// Piecewise-affine path on `[a, b]`; each knot jumps with probability
/// `jump_prob` on either side.
pub fn path(rng: &mut TestRng, d: usize, a: f64, b: f64, jump_prob: f64) -> PiecewisePath {
    let count = rng.random_range(1..7);
    let ts = times(rng, a, b, count);
    let last = ts.len() - 1;
    let knots = ts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let value = vector(rng, d, 2.0);
            let mut side = |on: bool| {
                if on && rng.random_bool(jump_prob) {
                    vector(rng, d, 2.0)
                } else {
                    value.clone()
                }
            };
            let left = side(i > 0);
            let right = side(i < last);
            Knot::jump(t, left, value, right)
        })
        .collect();
    PiecewisePath::new(knots).expect("valid knots")
}

/// Scaled norm, weighted l1 or a random polytope containing the origin in
/// its interior, chosen by `kind % 3`.
pub fn dissipation(rng: &mut TestRng, d: usize, kind: usize) -> Dissipation {
    match kind % 3 {
        0 => Dissipation::scaled_norm(rng.random_range(0.2..2.0)).unwrap(),
        1 => {
            Dissipation::weighted_l1((0..d).map(|_| rng.random_range(0.2..2.0)).collect()).unwrap()
        }
        _ => Dissipation::polyhedral(polytope_vertices(rng, d)).unwrap(),
    }
}

pub fn polytope_vertices(rng: &mut TestRng, d: usize) -> Vec<Vec<f64>> {
    let mut radius = || rng.random_range(0.5..2.0);
    match d {
        1 => vec![vec![-radius()], vec![radius()]],
        2 => {
            let k = rng.random_range(3..8);
            (0..k)
                .map(|i| {
                    let jitter = rng.random_range(-0.3..0.3);
                    let angle = 2.0 * PI * (i as f64 + jitter) / k as f64;
                    let r = rng.random_range(0.5..2.0);
                    vec![r * angle.cos(), r * angle.sin()]
                })
                .collect()
        }
        _ => {
            let mut vs = Vec::new();
            for i in 0..d {
                for sign in [-1.0, 1.0] {
                    let mut v = vec![0.0; d];
                    v[i] = sign * rng.random_range(0.5..2.0);
                    vs.push(v);
                }
            }
            for _ in 0..rng.random_range(0..4) {
                vs.push((0..d).map(|_| rng.random_range(-1.5..1.5)).collect());
            }
            vs
        }
    }
}

pub fn spd_matrix(rng: &mut TestRng, d: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    &b * b.transpose() + DMatrix::identity(d, d) * rng.random_range(0.3..1.5)
}

/// Continuous local solution for `R = alpha |.|` and quadratic energy: the
/// state alternates between rest and motion, and the load is chosen so that
/// the inclusion holds exactly on every segment.
pub fn local_solution(rng: &mut TestRng, d: usize) -> (RISProblem, PiecewisePath) {
    let alpha = rng.random_range(0.3..1.5);
    let a = spd_matrix(rng, d);
    let b = vector(rng, d, 1.0);
    let energy = EnergyModel::new(
        a.clone(),
        Nonlinearity::Linear {
            b: b.as_slice().to_vec(),
        },
    )
    .unwrap();
    let r = Dissipation::scaled_norm(alpha).unwrap();
    let (end, count) = (rng.random_range(1.0..3.0), rng.random_range(2..6));
    let ts = times(rng, 0.0, end, count);
    let mut states = vec![vector(rng, d, 1.0)];
    let mut load_knots: Vec<Knot> = Vec::new();
    let force = |z: &Vector| &a * z + &b;
    // Each segment carries its own load limits; consecutive segments meet
    // at knots whose point value belongs to the earlier segment.
    let mut pieces: Vec<(Vector, Vector)> = Vec::new();
    for _ in 1..ts.len() {
        let z = states.last().unwrap().clone();
        let moving = rng.random_bool(0.6);
        let (next, l0, l1) = if moving {
            let dir = vector(rng, d, 1.0);
            let dir = if dir.norm() < 1e-3 {
                Vector::from_element(d, 1.0)
            } else {
                dir
            };
            let next = &z + &dir * rng.random_range(0.1..1.0);
            let unit = (&next - &z).normalize() * alpha;
            (next.clone(), force(&z) + &unit, force(&next) + &unit)
        } else {
            let mut inside = || {
                let v = vector(rng, d, 1.0);
                &v * (alpha * rng.random_range(0.0..1.0) / v.norm().max(1e-12))
            };
            (z.clone(), force(&z) + inside(), force(&z) + inside())
        };
        pieces.push((l0, l1));
        states.push(next);
    }
    for (i, &t) in ts.iter().enumerate() {
        let left = if i == 0 {
            pieces[0].0.clone()
        } else {
            pieces[i - 1].1.clone()
        };
        let right = if i + 1 < ts.len() {
            pieces[i].0.clone()
        } else {
            left.clone()
        };
        let value = if i == 0 { right.clone() } else { left.clone() };
        load_knots.push(Knot::jump(t, left, value, right));
    }
    let load = PiecewisePath::new(load_knots).unwrap();
    let z = LipschitzPath::from_points(&ts, &states).unwrap();
    let ell0 = load.value(0.0).unwrap();
    let problem = RISProblem::new(energy, r, load, states[0].clone(), ell0).unwrap();
    (problem, z.into_path())
}

/// Arbitrary tuple with nondecreasing `t_hat`, random energy and load.
pub fn tuple_with_energy(rng: &mut TestRng) -> (ParametrizedTuple, EnergyModel, Dissipation) {
    let d = rng.random_range(1..=3);
    let s_end = rng.random_range(0.5..3.0);
    let count = rng.random_range(1..6);
    let ss = times(rng, 0.0, s_end, count);
    let mut t = 0.0;
    let t_vals: Vec<f64> = ss
        .iter()
        .enumerate()
        .map(|(i, _)| {
            if i > 0 && rng.random_bool(0.7) {
                t += rng.random_range(0.0..1.0);
            }
            t
        })
        .collect();
    let z_vals: Vec<Vector> = ss.iter().map(|_| vector(rng, d, 1.5)).collect();
    let t_hat = LipschitzPath::scalar_from_points(&ss, &t_vals).unwrap();
    let z_hat = LipschitzPath::from_points(&ss, &z_vals).unwrap();
    let ell_hat = path(rng, d, 0.0, s_end, 0.4);
    let nonlinearity = match rng.random_range(0..3) {
        0 => Nonlinearity::Zero,
        1 => Nonlinearity::Linear {
            b: vector(rng, d, 1.0).as_slice().to_vec(),
        },
        _ => Nonlinearity::DoubleWell {
            kappa: rng.random_range(0.1..2.0),
        },
    };
    let energy = EnergyModel::new(spd_matrix(rng, d), nonlinearity).unwrap();
    let kind = rng.random_range(0..3);
    let r = dissipation(rng, d, kind);
    (
        ParametrizedTuple::new(t_hat, z_hat, ell_hat).unwrap(),
        energy,
        r,
    )
}
