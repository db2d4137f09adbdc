//! Pair-sum kernels shared by the slope and intercept estimators.
//!
//! The streaming kernel visits pairs one at a time (never materialising the
//! n(n-1)/2 pair list) and accumulates with compensated sums, sequentially and
//! in canonical pair order, so results are deterministic. The closed forms
//! below are exact rearrangements of the same full-pairwise sums in
//! O(n log n); the weight strategies opt into them.

use serde::{Deserialize, Serialize};

use crate::pairs::{for_each_position_pair, PairKind};
use crate::summation::NeumaierSum;
use crate::weights::PairWeight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// `Σ w β / Σ w`
    #[serde(alias = "avg")]
    WeightedAverage,
    /// `argmin Σ (w (β_p - β))²`, i.e. `Σ w² β / Σ w²`
    #[serde(alias = "loss")]
    QuadraticLoss,
}

impl Method {
    #[inline]
    pub fn effective_weight(self, w: f64) -> f64 {
        match self {
            Method::WeightedAverage => w,
            Method::QuadraticLoss => w * w,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::WeightedAverage => "avg",
            Method::QuadraticLoss => "loss",
        }
    }
}

/// Which implementation evaluates full-pairwise sums.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    /// Closed form when the weight strategy provides one, streaming otherwise.
    #[default]
    Auto,
    /// Always the O(n²) streaming kernel.
    Streaming,
}

/// Weighted sums over the non-degenerate pairs of one arrangement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSums {
    /// `Σ w_eff β_p` (slope) or `Σ w_eff β0_p` (intercept).
    pub num: f64,
    /// `Σ w_eff`
    pub den: f64,
    /// `Σ |w_eff|`, the scale against which `den` is judged to vanish.
    pub abs_den: f64,
    pub used: usize,
    pub dropped: usize,
}

pub(crate) fn streaming_slope_sums(
    weight: &dyn PairWeight,
    kind: PairKind,
    method: Method,
    xs: &[f64],
    ys: &[f64],
) -> PairSums {
    let mut num = NeumaierSum::new();
    let mut den = NeumaierSum::new();
    let mut abs_den = NeumaierSum::new();
    let (mut used, mut dropped) = (0usize, 0usize);
    for_each_position_pair(kind, xs.len(), |i, j| {
        let dx = xs[i] - xs[j];
        if dx == 0.0 {
            dropped += 1;
            return;
        }
        let dy = ys[i] - ys[j];
        let w = method.effective_weight(weight.weight(dx, dy));
        num.add(w * (dy / dx));
        den.add(w);
        abs_den.add(w.abs());
        used += 1;
    });
    PairSums {
        num: num.value(),
        den: den.value(),
        abs_den: abs_den.value(),
        used,
        dropped,
    }
}

/// Sums for the weighted pairwise intercept `β0_p = y_i - β_p x_i`.
pub(crate) fn streaming_intercept_sums(
    weight: &dyn PairWeight,
    kind: PairKind,
    method: Method,
    xs: &[f64],
    ys: &[f64],
) -> PairSums {
    let mut num = NeumaierSum::new();
    let mut den = NeumaierSum::new();
    let mut abs_den = NeumaierSum::new();
    let (mut used, mut dropped) = (0usize, 0usize);
    for_each_position_pair(kind, xs.len(), |i, j| {
        let dx = xs[i] - xs[j];
        if dx == 0.0 {
            dropped += 1;
            return;
        }
        let dy = ys[i] - ys[j];
        let slope = dy / dx;
        let w = method.effective_weight(weight.weight(dx, dy));
        num.add(w * (ys[i] - slope * xs[i]));
        den.add(w);
        abs_den.add(w.abs());
        used += 1;
    });
    PairSums {
        num: num.value(),
        den: den.value(),
        abs_den: abs_den.value(),
        used,
        dropped,
    }
}

/// Runs of equal x values, as index lists in ascending x order
/// (indices ascending within a run).
struct TieStructure {
    sorted: Vec<usize>,
    /// `(start, end)` ranges into `sorted`.
    runs: Vec<(usize, usize)>,
}

impl TieStructure {
    fn new(xs: &[f64]) -> Self {
        let mut sorted: Vec<usize> = (0..xs.len()).collect();
        sorted.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let mut runs = Vec::new();
        let mut start = 0;
        for k in 1..=sorted.len() {
            if k == sorted.len() || xs[sorted[k]] != xs[sorted[start]] {
                runs.push((start, k));
                start = k;
            }
        }
        Self { sorted, runs }
    }

    fn tied_pairs(&self) -> usize {
        self.runs
            .iter()
            .map(|&(s, e)| (e - s) * (e - s).saturating_sub(1) / 2)
            .sum()
    }
}

fn total_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// `Σ_{pairs} sgn(Δx) Δy` and `Σ |Δx|` over non-tied pairs.
///
/// Observation k enters with coefficient (#x strictly below) - (#x strictly above),
/// independent of the arrangement.
pub(crate) fn abs_dx_sums(xs: &[f64], ys: &[f64]) -> PairSums {
    let n = xs.len();
    let ties = TieStructure::new(xs);
    let mut num = NeumaierSum::new();
    let mut den = NeumaierSum::new();
    for &(s, e) in &ties.runs {
        let below = s as f64;
        let above = (n - e) as f64;
        let c = below - above;
        for &k in &ties.sorted[s..e] {
            num.add(c * ys[k]);
            den.add(c * xs[k]);
        }
    }
    let dropped = ties.tied_pairs();
    let den = den.value();
    PairSums {
        num: num.value(),
        den,
        abs_den: den,
        used: total_pairs(n) - dropped,
        dropped,
    }
}

/// `Σ_{i>j} Δy_ij` and `Σ_{i>j} Δx_ij` over non-tied pairs, oriented by arrangement position.
pub(crate) fn signed_dx_sums(xs: &[f64], ys: &[f64]) -> PairSums {
    let n = xs.len();
    let mut num = NeumaierSum::new();
    let mut den = NeumaierSum::new();
    for k in 0..n {
        let c = 2.0 * k as f64 - (n as f64 - 1.0);
        num.add(c * ys[k]);
        den.add(c * xs[k]);
    }
    // Remove the Δy of tied pairs; their Δx are exactly zero.
    let ties = TieStructure::new(xs);
    for &(s, e) in &ties.runs {
        let g = e - s;
        if g < 2 {
            continue;
        }
        for (a, &k) in ties.sorted[s..e].iter().enumerate() {
            let c = 2.0 * a as f64 - (g as f64 - 1.0);
            num.add(-c * ys[k]);
        }
    }
    let abs = abs_dx_sums(xs, ys);
    PairSums {
        num: num.value(),
        den: den.value(),
        abs_den: abs.den,
        used: abs.used,
        dropped: abs.dropped,
    }
}

/// `Σ_{i>j} Δx Δy = n Σ (x - x̄)(y - ȳ)` and `Σ_{i>j} Δx² = n Σ (x - x̄)²`.
pub(crate) fn cross_moment_sums(xs: &[f64], ys: &[f64]) -> PairSums {
    let n = xs.len();
    let nf = n as f64;
    let mx = crate::summation::sum(xs.iter().copied()) / nf;
    let my = crate::summation::sum(ys.iter().copied()) / nf;
    let mut sxy = NeumaierSum::new();
    let mut sxx = NeumaierSum::new();
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy.add(dx * dy);
        sxx.add(dx * dx);
    }
    let dropped = TieStructure::new(xs).tied_pairs();
    let den = nf * sxx.value();
    PairSums {
        num: nf * sxy.value(),
        den,
        abs_den: den,
        used: total_pairs(n) - dropped,
        dropped,
    }
}
