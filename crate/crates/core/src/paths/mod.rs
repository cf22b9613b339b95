//! Exact piecewise-affine paths with jumps.
//!
//! A [`PiecewisePath`] is stored as a strictly increasing list of knots. Each
//! knot carries the left limit, the point value and the right limit of the
//! path at that time. Between two consecutive knots the path is the affine
//! interpolant from the right limit of the first knot to the left limit of the
//! second one, so the knot list alone determines the function.

mod compose;
mod convergence;
mod integrals;
pub mod io;

use std::ops::Deref;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compose::compose_monotone;
pub use convergence::{
    convergence_diagnostics, ConvergenceDiagnostics, ConvergenceMode, ConvergenceTolerances,
    ElementDistances,
};
pub use integrals::{
    dissipation, integral_against_derivative, kurzweil_stieltjes, l1_distance, total_variation,
    variation_with,
};

/// Column vector used for states, loads and their increments.
pub type Vector = DVector<f64>;

/// Relative tolerance used to identify nearly coincident times.
pub const TIME_SNAP: f64 = 1e-12;

/// Relative tolerance under which two node values count as equal.
pub const VALUE_SNAP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("a path needs at least two knots, got {0}")]
    TooFewKnots(usize),
    #[error("knot times must be strictly increasing (t[{index}] = {time})")]
    NotIncreasing { index: usize, time: f64 },
    #[error("knot {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite entry at knot {0}")]
    NonFinite(usize),
    #[error("the {0} endpoint limit must equal the point value")]
    EndpointLimit(&'static str),
    #[error("time {t} lies outside the domain [{a}, {b}]")]
    OutOfDomain { t: f64, a: f64, b: f64 },
    #[error("interval [{t1}, {t2}] is reversed")]
    ReversedInterval { t1: f64, t2: f64 },
    #[error("path is not continuous at t = {0}")]
    Discontinuous(f64),
    #[error("reparametrization is decreasing on [{0}, {1}]")]
    NotMonotone(f64, f64),
    #[error("expected a scalar path, got dimension {0}")]
    NotScalar(usize),
    #[error("paths have different dimensions ({0} vs {1})")]
    IncompatibleDimensions(usize, usize),
    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, PathError>;

/// One breakpoint of a path with its one-sided limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub t: f64,
    pub left: Vector,
    pub value: Vector,
    pub right: Vector,
}

impl Knot {
    pub fn continuous(t: f64, value: Vector) -> Self {
        Knot {
            t,
            left: value.clone(),
            right: value.clone(),
            value,
        }
    }

    pub fn jump(t: f64, left: Vector, value: Vector, right: Vector) -> Self {
        Knot {
            t,
            left,
            value,
            right,
        }
    }

    pub fn scalar(t: f64, left: f64, value: f64, right: f64) -> Self {
        Knot::jump(
            t,
            Vector::from_element(1, left),
            Vector::from_element(1, value),
            Vector::from_element(1, right),
        )
    }

    pub fn is_continuous(&self) -> bool {
        let scale = 1.0 + self.value.amax();
        (&self.left - &self.value).amax() <= VALUE_SNAP * scale
            && (&self.right - &self.value).amax() <= VALUE_SNAP * scale
    }
}

/// Where a time falls relative to the knot list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Position {
    Knot(usize),
    /// Strictly inside the segment between knot `k` and knot `k + 1`.
    Segment(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Knot>", into = "Vec<Knot>")]
pub struct PiecewisePath {
    knots: Vec<Knot>,
}

impl TryFrom<Vec<Knot>> for PiecewisePath {
    type Error = PathError;

    fn try_from(knots: Vec<Knot>) -> Result<Self> {
        PiecewisePath::new(knots)
    }
}

impl From<PiecewisePath> for Vec<Knot> {
    fn from(path: PiecewisePath) -> Self {
        path.knots
    }
}

impl PiecewisePath {
    pub fn new(knots: Vec<Knot>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(PathError::TooFewKnots(knots.len()));
        }
        let dim = knots[0].value.len();
        let span = knots[knots.len() - 1].t - knots[0].t;
        for (index, k) in knots.iter().enumerate() {
            for v in [&k.left, &k.value, &k.right] {
                if v.len() != dim {
                    return Err(PathError::DimensionMismatch {
                        index,
                        expected: dim,
                        found: v.len(),
                    });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(PathError::NonFinite(index));
                }
            }
            if !k.t.is_finite() {
                return Err(PathError::NonFinite(index));
            }
            if index > 0 && k.t - knots[index - 1].t <= TIME_SNAP * span.abs().max(1.0) {
                return Err(PathError::NotIncreasing { index, time: k.t });
            }
        }
        let first = &knots[0];
        let last = &knots[knots.len() - 1];
        let tol = |v: &Vector| VALUE_SNAP * (1.0 + v.amax());
        if (&first.left - &first.value).amax() > tol(&first.value) {
            return Err(PathError::EndpointLimit("left"));
        }
        if (&last.right - &last.value).amax() > tol(&last.value) {
            return Err(PathError::EndpointLimit("right"));
        }
        let mut knots = knots;
        knots[0].left = knots[0].value.clone();
        let n = knots.len() - 1;
        knots[n].right = knots[n].value.clone();
        Ok(PiecewisePath { knots })
    }

    /// Continuous piecewise-linear interpolant through `(ts[i], values[i])`.
    pub fn continuous(ts: &[f64], values: &[Vector]) -> Result<Self> {
        if ts.len() != values.len() {
            return Err(PathError::Precondition(format!(
                "{} times but {} values",
                ts.len(),
                values.len()
            )));
        }
        PiecewisePath::new(
            ts.iter()
                .zip(values)
                .map(|(&t, v)| Knot::continuous(t, v.clone()))
                .collect(),
        )
    }

    pub fn scalar_continuous(ts: &[f64], values: &[f64]) -> Result<Self> {
        let vs: Vec<Vector> = values.iter().map(|&v| Vector::from_element(1, v)).collect();
        PiecewisePath::continuous(ts, &vs)
    }

    pub fn constant(a: f64, b: f64, value: Vector) -> Result<Self> {
        PiecewisePath::continuous(&[a, b], &[value.clone(), value])
    }

    pub fn zero(a: f64, b: f64, dim: usize) -> Result<Self> {
        PiecewisePath::constant(a, b, Vector::zeros(dim))
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().map(|k| k.t)
    }

    pub fn dim(&self) -> usize {
        self.knots[0].value.len()
    }

    pub fn start(&self) -> f64 {
        self.knots[0].t
    }

    pub fn end(&self) -> f64 {
        self.knots[self.knots.len() - 1].t
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.start(), self.end())
    }

    pub fn segment_count(&self) -> usize {
        self.knots.len() - 1
    }

    pub(crate) fn snap_tolerance(&self) -> f64 {
        TIME_SNAP * (self.end() - self.start()).max(1.0)
    }

    pub fn contains(&self, t: f64) -> bool {
        let tol = self.snap_tolerance();
        t >= self.start() - tol && t <= self.end() + tol
    }

    pub(crate) fn check_interval(&self, t1: f64, t2: f64) -> Result<()> {
        for t in [t1, t2] {
            if !self.contains(t) {
                return Err(PathError::OutOfDomain {
                    t,
                    a: self.start(),
                    b: self.end(),
                });
            }
        }
        if t2 < t1 {
            return Err(PathError::ReversedInterval { t1, t2 });
        }
        Ok(())
    }

    /// Locates `t`, snapping to a knot when within the time tolerance. Times
    /// outside the domain are clamped.
    pub(crate) fn locate(&self, t: f64) -> Position {
        let tol = self.snap_tolerance();
        let idx = self.knots.partition_point(|k| k.t < t);
        if idx < self.knots.len() && (self.knots[idx].t - t).abs() <= tol {
            return Position::Knot(idx);
        }
        if idx > 0 && (t - self.knots[idx - 1].t).abs() <= tol {
            return Position::Knot(idx - 1);
        }
        if idx == 0 {
            Position::Knot(0)
        } else if idx == self.knots.len() {
            Position::Knot(self.knots.len() - 1)
        } else {
            Position::Segment(idx - 1)
        }
    }

    /// Endpoints `(t0, t1)` of segment `k`.
    pub fn segment_times(&self, k: usize) -> (f64, f64) {
        (self.knots[k].t, self.knots[k + 1].t)
    }

    /// Affine extension of segment `k` evaluated at `t`.
    pub fn segment_value(&self, k: usize, t: f64) -> Vector {
        let (t0, t1) = self.segment_times(k);
        let a = &self.knots[k].right;
        let b = &self.knots[k + 1].left;
        let theta = (t - t0) / (t1 - t0);
        a + (b - a) * theta
    }

    pub fn segment_slope(&self, k: usize) -> Vector {
        let (t0, t1) = self.segment_times(k);
        (&self.knots[k + 1].left - &self.knots[k].right) / (t1 - t0)
    }

    /// Index of the segment whose closure contains `t`, preferring the one to
    /// the right at interior knots.
    pub fn segment_index(&self, t: f64) -> usize {
        match self.locate(t) {
            Position::Segment(k) => k,
            Position::Knot(k) => k.min(self.segment_count() - 1),
        }
    }

    pub(crate) fn value_clamped(&self, t: f64) -> Vector {
        match self.locate(t) {
            Position::Knot(k) => self.knots[k].value.clone(),
            Position::Segment(k) => self.segment_value(k, t),
        }
    }

    pub(crate) fn left_clamped(&self, t: f64) -> Vector {
        match self.locate(t) {
            Position::Knot(k) => self.knots[k].left.clone(),
            Position::Segment(k) => self.segment_value(k, t),
        }
    }

    pub(crate) fn right_clamped(&self, t: f64) -> Vector {
        match self.locate(t) {
            Position::Knot(k) => self.knots[k].right.clone(),
            Position::Segment(k) => self.segment_value(k, t),
        }
    }

    fn ensure_in_domain(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(PathError::OutOfDomain {
                t,
                a: self.start(),
                b: self.end(),
            })
        }
    }

    pub fn value(&self, t: f64) -> Result<Vector> {
        self.ensure_in_domain(t)?;
        Ok(self.value_clamped(t))
    }

    /// `f(t-)`; at the left endpoint this is the point value.
    pub fn left_limit(&self, t: f64) -> Result<Vector> {
        self.ensure_in_domain(t)?;
        Ok(self.left_clamped(t))
    }

    /// `f(t+)`; at the right endpoint this is the point value.
    pub fn right_limit(&self, t: f64) -> Result<Vector> {
        self.ensure_in_domain(t)?;
        Ok(self.right_clamped(t))
    }

    /// Point value of a scalar path.
    pub fn scalar(&self, t: f64) -> Result<f64> {
        if self.dim() != 1 {
            return Err(PathError::NotScalar(self.dim()));
        }
        Ok(self.value(t)?[0])
    }

    pub fn is_continuous(&self) -> bool {
        self.knots.iter().all(Knot::is_continuous)
    }

    /// Times at which the path is discontinuous (using the conventions
    /// `f(a-) = f(a)` and `f(b+) = f(b)` at the endpoints).
    pub fn jump_times(&self) -> Vec<f64> {
        self.knots
            .iter()
            .filter(|k| !k.is_continuous())
            .map(|k| k.t)
            .collect()
    }

    /// Largest segment slope norm.
    pub fn lipschitz_constant(&self) -> f64 {
        (0..self.segment_count())
            .map(|k| self.segment_slope(k).norm())
            .fold(0.0, f64::max)
    }

    /// Same function with additional continuity knots at `times` (times that
    /// already are knots, or lie outside the domain, are ignored).
    pub fn refined(&self, times: &[f64]) -> PiecewisePath {
        let tol = self.snap_tolerance();
        let mut extra: Vec<f64> = times
            .iter()
            .copied()
            .filter(|&t| t > self.start() + tol && t < self.end() - tol)
            .filter(|&t| matches!(self.locate(t), Position::Segment(_)))
            .collect();
        extra.sort_by(f64::total_cmp);
        extra.dedup_by(|a, b| (*a - *b).abs() <= tol);
        if extra.is_empty() {
            return self.clone();
        }
        let mut knots = Vec::with_capacity(self.knots.len() + extra.len());
        let mut it = extra.into_iter().peekable();
        for (k, knot) in self.knots.iter().enumerate() {
            knots.push(knot.clone());
            if k + 1 < self.knots.len() {
                let t1 = self.knots[k + 1].t;
                while let Some(&t) = it.peek() {
                    if t < t1 - tol {
                        knots.push(Knot::continuous(t, self.segment_value(k, t)));
                        it.next();
                    } else {
                        break;
                    }
                }
            }
        }
        PiecewisePath { knots }
    }

    /// Restriction to `[t1, t2]` with the endpoint conventions re-imposed.
    pub fn restrict(&self, t1: f64, t2: f64) -> Result<PiecewisePath> {
        self.check_interval(t1, t2)?;
        if t2 - t1 <= self.snap_tolerance() {
            return Err(PathError::Precondition(format!(
                "cannot restrict to the degenerate interval [{t1}, {t2}]"
            )));
        }
        let refined = self.refined(&[t1, t2]);
        let tol = refined.snap_tolerance();
        let mut knots: Vec<Knot> = refined
            .knots
            .into_iter()
            .filter(|k| k.t >= t1 - tol && k.t <= t2 + tol)
            .collect();
        let n = knots.len() - 1;
        knots[0].left = knots[0].value.clone();
        knots[n].right = knots[n].value.clone();
        PiecewisePath::new(knots)
    }

    /// Extends the path to `[start, new_end]` by constant continuation with the
    /// final point value.
    pub fn extended_to(&self, new_end: f64) -> PiecewisePath {
        if new_end <= self.end() + self.snap_tolerance() {
            return self.clone();
        }
        let mut knots = self.knots.clone();
        let v = self.knots[self.knots.len() - 1].value.clone();
        knots.push(Knot::continuous(new_end, v));
        PiecewisePath { knots }
    }

    /// Applies `f` to every left limit, value and right limit. Only meaningful
    /// for maps that are affine, since segments are re-interpolated.
    pub fn map_affine(&self, f: impl Fn(&Vector) -> Vector) -> Result<PiecewisePath> {
        PiecewisePath::new(
            self.knots
                .iter()
                .map(|k| Knot::jump(k.t, f(&k.left), f(&k.value), f(&k.right)))
                .collect(),
        )
    }

    /// Sorted union of knot times of several paths, coincident times merged.
    pub fn merged_breakpoints(paths: &[&PiecewisePath]) -> Vec<f64> {
        let tol = paths.iter().map(|p| p.snap_tolerance()).fold(0.0, f64::max);
        let mut ts: Vec<f64> = paths.iter().flat_map(|p| p.breakpoints()).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() <= tol);
        ts
    }

    /// Maximum distance between the two paths over all knot values and
    /// one-sided limits of both; exact sup-distance for this representation.
    pub fn sup_distance(&self, other: &PiecewisePath) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(PathError::IncompatibleDimensions(self.dim(), other.dim()));
        }
        let mut worst: f64 = 0.0;
        for t in PiecewisePath::merged_breakpoints(&[self, other]) {
            if !self.contains(t) || !other.contains(t) {
                continue;
            }
            worst = worst
                .max((self.left_clamped(t) - other.left_clamped(t)).norm())
                .max((self.value_clamped(t) - other.value_clamped(t)).norm())
                .max((self.right_clamped(t) - other.right_clamped(t)).norm());
        }
        Ok(worst)
    }

    /// Samples `n + 1` equispaced point values, for plotting.
    pub fn sample(&self, n: usize) -> Vec<(f64, Vector)> {
        let (a, b) = self.domain();
        (0..=n)
            .map(|i| {
                let t = a + (b - a) * i as f64 / n.max(1) as f64;
                (t, self.value_clamped(t))
            })
            .collect()
    }
}

/// A continuous path with a recorded Lipschitz bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewisePath", into = "PiecewisePath")]
pub struct LipschitzPath {
    path: PiecewisePath,
    lipschitz: f64,
}

impl TryFrom<PiecewisePath> for LipschitzPath {
    type Error = PathError;

    fn try_from(path: PiecewisePath) -> Result<Self> {
        LipschitzPath::new(path)
    }
}

impl From<LipschitzPath> for PiecewisePath {
    fn from(path: LipschitzPath) -> Self {
        path.path
    }
}

impl LipschitzPath {
    /// Wraps a continuous path. Jumps below the value tolerance are removed.
    pub fn new(path: PiecewisePath) -> Result<Self> {
        if let Some(k) = path.knots.iter().find(|k| !k.is_continuous()) {
            return Err(PathError::Discontinuous(k.t));
        }
        let knots = path
            .knots
            .into_iter()
            .map(|k| Knot::continuous(k.t, k.value))
            .collect();
        let path = PiecewisePath { knots };
        let lipschitz = path.lipschitz_constant();
        Ok(LipschitzPath { path, lipschitz })
    }

    pub fn from_points(ts: &[f64], values: &[Vector]) -> Result<Self> {
        LipschitzPath::new(PiecewisePath::continuous(ts, values)?)
    }

    pub fn scalar_from_points(ts: &[f64], values: &[f64]) -> Result<Self> {
        LipschitzPath::new(PiecewisePath::scalar_continuous(ts, values)?)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn as_path(&self) -> &PiecewisePath {
        &self.path
    }

    pub fn into_path(self) -> PiecewisePath {
        self.path
    }

    /// True when every segment slope of a scalar path is `>= -tol`.
    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.path.dim() == 1
            && (0..self.path.segment_count()).all(|k| self.path.segment_slope(k)[0] >= -tol)
    }
}

impl Deref for LipschitzPath {
    type Target = PiecewisePath;

    fn deref(&self) -> &PiecewisePath {
        &self.path
    }
}

/// Shorthand for a one-component vector.
pub fn scalar(x: f64) -> Vector {
    Vector::from_element(1, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_path() -> PiecewisePath {
        // 0 on [0,1], jumps to 1/2 right after t = 1.
        PiecewisePath::new(vec![
            Knot::scalar(0.0, 0.0, 0.0, 0.0),
            Knot::scalar(1.0, 0.0, 0.0, 0.5),
            Knot::scalar(2.0, 0.5, 0.5, 0.5),
        ])
        .unwrap()
    }

    #[test]
    fn evaluates_point_values_and_limits() {
        let p = step_path();
        assert_eq!(p.value(1.0).unwrap()[0], 0.0);
        assert_eq!(p.left_limit(1.0).unwrap()[0], 0.0);
        assert_eq!(p.right_limit(1.0).unwrap()[0], 0.5);
        assert_eq!(p.value(1.5).unwrap()[0], 0.5);
        assert_eq!(p.value(0.5).unwrap()[0], 0.0);
        assert_eq!(p.jump_times(), vec![1.0]);
    }

    #[test]
    fn rejects_bad_knots() {
        assert_eq!(
            PiecewisePath::new(vec![Knot::scalar(0.0, 0.0, 0.0, 0.0)]),
            Err(PathError::TooFewKnots(1))
        );
        assert!(matches!(
            PiecewisePath::new(vec![
                Knot::scalar(1.0, 0.0, 0.0, 0.0),
                Knot::scalar(0.5, 0.0, 0.0, 0.0)
            ]),
            Err(PathError::NotIncreasing { .. })
        ));
        assert_eq!(
            PiecewisePath::new(vec![
                Knot::scalar(0.0, 1.0, 0.0, 0.0),
                Knot::scalar(1.0, 0.0, 0.0, 0.0)
            ]),
            Err(PathError::EndpointLimit("left"))
        );
        assert!(matches!(
            step_path().value(3.0),
            Err(PathError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn refine_and_restrict_preserve_values() {
        let p = PiecewisePath::scalar_continuous(&[0.0, 2.0], &[0.0, 2.0]).unwrap();
        let r = p.refined(&[0.5, 1.0, 5.0]);
        assert_eq!(r.knots().len(), 4);
        assert_eq!(r.value(0.75).unwrap()[0], 0.75);
        let s = step_path().restrict(0.5, 1.0).unwrap();
        assert_eq!(s.domain(), (0.5, 1.0));
        // the jump to the right of t = 1 is cut off by the endpoint convention
        assert_eq!(s.right_limit(1.0).unwrap()[0], 0.0);
    }

    #[test]
    fn lipschitz_path_requires_continuity() {
        assert_eq!(
            LipschitzPath::new(step_path()),
            Err(PathError::Discontinuous(1.0))
        );
        let l = LipschitzPath::scalar_from_points(&[0.0, 1.0, 3.0], &[0.0, 2.0, 3.0]).unwrap();
        assert_eq!(l.lipschitz(), 2.0);
        assert!(l.is_nondecreasing(0.0));
    }

    #[test]
    fn sup_distance_sees_jumps() {
        let zero = PiecewisePath::zero(0.0, 2.0, 1).unwrap();
        assert_eq!(step_path().sup_distance(&zero).unwrap(), 0.5);
    }

    #[test]
    fn serde_round_trip() {
        let p = step_path();
        let json = serde_json::to_string(&p).unwrap();
        let back: PiecewisePath = serde_json::from_str(&json).unwrap();
        assert_eq!(p, back);
    }
}
