//! Pair enumeration over a (possibly x-sorted) arrangement of the sample.

use serde::{Deserialize, Serialize};

use crate::error::{EwpoError, Result};
use crate::sample::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    /// Consecutive observations: n - 1 pairs.
    Adjacent,
    /// Every unordered pair: n(n - 1)/2 pairs.
    FullPairwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairScheme {
    pub kind: PairKind,
    pub sorted: bool,
}

impl PairScheme {
    pub const fn new(kind: PairKind, sorted: bool) -> Self {
        Self { kind, sorted }
    }

    pub const fn adjacent() -> Self {
        Self::new(PairKind::Adjacent, false)
    }

    pub const fn full() -> Self {
        Self::new(PairKind::FullPairwise, false)
    }

    pub const fn sorted(self) -> Self {
        Self::new(self.kind, true)
    }

    pub fn pair_count(&self, n: usize) -> usize {
        match self.kind {
            PairKind::Adjacent => n.saturating_sub(1),
            PairKind::FullPairwise => n * n.saturating_sub(1) / 2,
        }
    }
}

/// One observation pair, by original sample index.
///
/// `i` comes after `j` in the arrangement, so differences are `v_i - v_j`.
/// Without sorting this is simply `i > j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairIndex {
    pub i: usize,
    pub j: usize,
}

impl PairIndex {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

/// Pairs in canonical order together with the arrangement they were built on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairList {
    /// `order[pos]` is the original index of the observation at arrangement position `pos`.
    pub order: Vec<usize>,
    pub pairs: Vec<PairIndex>,
}

/// Arrangement permutation: identity, or a stable ascending sort on `x`.
pub fn arrangement(x: &[f64], sorted: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    if sorted {
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    }
    order
}

/// Applies an arrangement to a pair of slices.
pub(crate) fn arranged(sample: &Sample, sorted: bool) -> (Vec<f64>, Vec<f64>) {
    if !sorted {
        return (sample.x().to_vec(), sample.y().to_vec());
    }
    let order = arrangement(sample.x(), true);
    let xs = order.iter().map(|&k| sample.x()[k]).collect();
    let ys = order.iter().map(|&k| sample.y()[k]).collect();
    (xs, ys)
}

/// Enumerates pairs in canonical order: adjacent pairs by position, full pairs
/// with the later position ascending and the earlier one ascending within it.
pub fn enumerate_pairs(scheme: PairScheme, x: &[f64]) -> Result<PairList> {
    let n = x.len();
    if n < 2 {
        return Err(EwpoError::InsufficientObservations { need: 2, got: n });
    }
    let order = arrangement(x, scheme.sorted);
    let mut pairs = Vec::with_capacity(scheme.pair_count(n));
    match scheme.kind {
        PairKind::Adjacent => {
            for pos in 1..n {
                pairs.push(PairIndex::new(order[pos], order[pos - 1]));
            }
        }
        PairKind::FullPairwise => {
            for pi in 1..n {
                for pj in 0..pi {
                    pairs.push(PairIndex::new(order[pi], order[pj]));
                }
            }
        }
    }
    Ok(PairList { order, pairs })
}

/// Visits every pair of positions `(i, j)` (i after j) of an arrangement of length `n`
/// in canonical order, without materialising the pair list.
#[inline]
pub(crate) fn for_each_position_pair(kind: PairKind, n: usize, mut f: impl FnMut(usize, usize)) {
    match kind {
        PairKind::Adjacent => {
            for i in 1..n {
                f(i, i - 1);
            }
        }
        PairKind::FullPairwise => {
            for i in 1..n {
                for j in 0..i {
                    f(i, j);
                }
            }
        }
    }
}

/// Two-point slope `(y_i - y_j) / (x_i - x_j)`.
pub fn pairwise_slope(sample: &Sample, pair: PairIndex) -> Result<f64> {
    let (x, y) = (sample.x(), sample.y());
    let dx = x[pair.i] - x[pair.j];
    if dx == 0.0 {
        return Err(EwpoError::DegeneratePair {
            i: pair.i,
            j: pair.j,
        });
    }
    Ok((y[pair.i] - y[pair.j]) / dx)
}

/// Two-point intercept `y_i - slope * x_i`.
pub fn pairwise_intercept(sample: &Sample, pair: PairIndex) -> Result<f64> {
    let slope = pairwise_slope(sample, pair)?;
    Ok(sample.y()[pair.i] - slope * sample.x()[pair.i])
}
