use serde::{Deserialize, Serialize};

use super::{l1_distance, total_variation, PathError, PiecewisePath, Result};

/// Thresholds used to classify the tail of a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTolerances {
    /// Bound on the sampled sup-distance of the last element.
    pub pointwise: f64,
    /// Bound on the `L^1` distance of the last element.
    pub l1: f64,
    /// Bound on `|Var(f_n) - Var(f)|` for the last element.
    pub variation: f64,
}

impl Default for ConvergenceTolerances {
    fn default() -> Self {
        ConvergenceTolerances {
            pointwise: 1e-6,
            l1: 5e-2,
            variation: 5e-2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceMode {
    /// `L^1` convergence together with convergence of total variations.
    Intermediate,
    /// `L^1` convergence with bounded, but not converging, variations.
    WeakStarOnly,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementDistances {
    pub index: usize,
    /// Max of `|f_n(t) - f(t)|` over the grid and all breakpoints.
    pub sup_on_grid: f64,
    pub l1: f64,
    pub variation: f64,
    pub variation_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceDiagnostics {
    pub elements: Vec<ElementDistances>,
    pub limit_variation: f64,
    pub pointwise: bool,
    pub weak_star: bool,
    pub intermediate: bool,
    pub mode: ConvergenceMode,
}

/// Distances of every element of `seq` to `limit` and a classification of
/// the last element against `tol`.
///
/// Point values are compared on `grid` together with every breakpoint of
/// every path involved.
pub fn convergence_diagnostics(
    seq: &[PiecewisePath],
    limit: &PiecewisePath,
    grid: &[f64],
    tol: &ConvergenceTolerances,
) -> Result<ConvergenceDiagnostics> {
    if seq.is_empty() {
        return Err(PathError::Precondition("empty sequence".into()));
    }
    let mut all: Vec<&PiecewisePath> = seq.iter().collect();
    all.push(limit);
    let mut points = PiecewisePath::merged_breakpoints(&all);
    points.extend(grid.iter().copied().filter(|&t| limit.contains(t)));

    let limit_variation = total_variation(limit, limit.start(), limit.end())?;
    let mut elements = Vec::with_capacity(seq.len());
    for (index, f) in seq.iter().enumerate() {
        if f.dim() != limit.dim() {
            return Err(PathError::IncompatibleDimensions(f.dim(), limit.dim()));
        }
        let mut sup: f64 = 0.0;
        for &t in &points {
            sup = sup.max((f.value(t)? - limit.value(t)?).norm());
        }
        let variation = total_variation(f, f.start(), f.end())?;
        elements.push(ElementDistances {
            index,
            sup_on_grid: sup,
            l1: l1_distance(f, limit)?,
            variation,
            variation_gap: (variation - limit_variation).abs(),
        });
    }
    let tail = &elements[elements.len() - 1];
    let pointwise = tail.sup_on_grid <= tol.pointwise;
    let weak_star = tail.l1 <= tol.l1;
    let intermediate = weak_star && tail.variation_gap <= tol.variation;
    let mode = if intermediate {
        ConvergenceMode::Intermediate
    } else if weak_star {
        ConvergenceMode::WeakStarOnly
    } else {
        ConvergenceMode::None
    };
    Ok(ConvergenceDiagnostics {
        elements,
        limit_variation,
        pointwise,
        weak_star,
        intermediate,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::scalar;

    #[test]
    fn constant_sequence_has_zero_distances() {
        let f = PiecewisePath::constant(0.0, 1.0, scalar(2.0)).unwrap();
        let d = convergence_diagnostics(
            &[f.clone(), f.clone()],
            &f,
            &[0.5],
            &ConvergenceTolerances::default(),
        )
        .unwrap();
        assert!(d
            .elements
            .iter()
            .all(|e| e.sup_on_grid == 0.0 && e.l1 == 0.0 && e.variation_gap == 0.0));
        assert_eq!(d.mode, ConvergenceMode::Intermediate);
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let f = PiecewisePath::constant(0.0, 1.0, scalar(2.0)).unwrap();
        assert!(convergence_diagnostics(&[], &f, &[], &ConvergenceTolerances::default()).is_err());
    }
}
