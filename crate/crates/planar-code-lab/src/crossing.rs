//! Threshold estimation from a swept result table.
//!
//! Below threshold the larger code wins, above it the smaller one does, so
//! the failure-rate curves of two distances cross once near the threshold.
//! For every adjacent pair of sampled distances we locate the first sign
//! change of their rate difference along the grid and interpolate it
//! linearly; the estimate is the median of those pairwise crossings and the
//! quoted uncertainty is their full range. Deliberately no finite-size
//! scaling: transparent, and accurate to well under a grid step.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::stats;
use crate::table::ResultTable;

#[derive(Debug, Error, PartialEq)]
pub enum CrossingError {
    #[error("need at least two distances, table has {0}")]
    TooFewDistances(usize),
    #[error("need at least three grid points per distance, table has {0}")]
    TooFewPoints(usize),
    #[error("distances {0} and {1} sample different noise grids")]
    GridMismatch(usize, usize),
    #[error("failure-rate curves do not cross inside the sampled range")]
    NoCrossing,
}

/// Crossing of one adjacent distance pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairCrossing {
    pub d_low: usize,
    pub d_high: usize,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossingEstimate {
    /// Median of the pairwise crossings.
    pub p_c: f64,
    /// Full range (max minus min) of the pairwise crossings.
    pub spread: f64,
    pub pairwise: Vec<PairCrossing>,
}

/// Estimate the threshold from a table sweeping at least two distances over
/// a common noise grid.
pub fn estimate_crossing(table: &ResultTable) -> Result<CrossingEstimate, CrossingError> {
    let mut curves: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for row in &table.rows {
        curves.entry(row.distance).or_default().push((row.p(), row.rate));
    }
    if curves.len() < 2 {
        return Err(CrossingError::TooFewDistances(curves.len()));
    }
    for curve in curves.values_mut() {
        curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let distances: Vec<usize> = curves.keys().copied().collect();
    let reference = &curves[&distances[0]];
    if reference.len() < 3 {
        return Err(CrossingError::TooFewPoints(reference.len()));
    }
    for window in distances.windows(2) {
        let (a, b) = (&curves[&window[0]], &curves[&window[1]]);
        if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.0 != y.0) {
            return Err(CrossingError::GridMismatch(window[0], window[1]));
        }
    }

    let mut pairwise = Vec::new();
    for window in distances.windows(2) {
        let (d_low, d_high) = (window[0], window[1]);
        let low = &curves[&d_low];
        let high = &curves[&d_high];
        let diff: Vec<f64> = low.iter().zip(high).map(|(a, b)| b.1 - a.1).collect();
        let crossing = find_crossing(low, &diff);
        if let Some(p) = crossing {
            pairwise.push(PairCrossing { d_low, d_high, p });
        }
    }
    if pairwise.is_empty() {
        return Err(CrossingError::NoCrossing);
    }
    let ps: Vec<f64> = pairwise.iter().map(|c| c.p).collect();
    let max = ps.iter().copied().fold(f64::MIN, f64::max);
    let min = ps.iter().copied().fold(f64::MAX, f64::min);
    Ok(CrossingEstimate { p_c: stats::median(&ps), spread: max - min, pairwise })
}

/// First point where `diff` touches or crosses zero. An exact zero counts
/// only at nonzero rates; two curves flat at zero have not crossed.
fn find_crossing(curve: &[(f64, f64)], diff: &[f64]) -> Option<f64> {
    for i in 0..diff.len() {
        if diff[i] == 0.0 && curve[i].1 > 0.0 {
            return Some(curve[i].0);
        }
        if i + 1 < diff.len() && diff[i] * diff[i + 1] < 0.0 {
            let (p0, p1) = (curve[i].0, curve[i + 1].0);
            return Some(p0 + (p1 - p0) * diff[i] / (diff[i] - diff[i + 1]));
        }
    }
    None
}
