//! Delete-d jackknife.
//!
//! Each replicate drops `d` observations chosen uniformly without replacement
//! and re-estimates on the remaining `n - d`, which keep their original
//! relative order (adjacent schemes depend on it).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{EwpoError, Result};
use crate::estimators::{estimate_slope, EstimatorConfig};
use crate::rng::{task_rng, TaskRng};
use crate::sample::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JackknifeConfig {
    /// Observations removed per replicate.
    pub d: usize,
    /// Number of replicates.
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl JackknifeConfig {
    pub const DEFAULT_REPS: usize = 10_000;

    /// `d = ⌈n/2⌉`, 10 000 replicates, 95% intervals.
    pub fn for_n(n: usize, seed: u64) -> Self {
        Self {
            d: n.div_ceil(2),
            reps: Self::DEFAULT_REPS,
            alpha: 0.05,
            seed,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let nf = n as f64;
        if !((self.d as f64) > nf.sqrt() && self.d < n) {
            return Err(EwpoError::config(format!(
                "jackknife d = {} must satisfy sqrt(n) < d < n (n = {n}, sqrt(n) = {:.3})",
                self.d,
                nf.sqrt()
            )));
        }
        if n - self.d < 2 {
            return Err(EwpoError::config(format!(
                "jackknife d = {} leaves fewer than 2 observations of {n}",
                self.d
            )));
        }
        if self.reps < 100 {
            return Err(EwpoError::config(format!("jackknife reps = {} must be at least 100", self.reps)));
        }
        if (self.reps as f64).ln() >= ln_binomial(n as u64, (n - self.d) as u64) {
            return Err(EwpoError::config(format!(
                "jackknife reps = {} must be below the number of distinct subsamples C({n}, {})",
                self.reps,
                n - self.d
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(EwpoError::config(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        Ok(())
    }
}

/// Sorted indices of `keep` observations out of `n`, uniformly without replacement.
pub fn subsample_indices(n: usize, keep: usize, rng: &mut TaskRng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for t in 0..keep {
        let j = rng.random_range(t..n);
        idx.swap(t, j);
    }
    idx.truncate(keep);
    idx.sort_unstable();
    idx
}

/// Applies `stat` to `jk.reps` delete-d subsamples, in replicate order.
///
/// Replicate r draws from stream r of `jk.seed`, so the output does not depend
/// on thread count.
pub fn jackknife_replicates<F>(sample: &Sample, jk: &JackknifeConfig, stat: F) -> Result<Vec<f64>>
where
    F: Fn(&Sample) -> Result<f64> + Sync,
{
    let n = sample.len();
    jk.validate(n)?;
    let keep = n - jk.d;
    (0..jk.reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = task_rng(jk.seed, r as u64);
            let idx = subsample_indices(n, keep, &mut rng);
            stat(&sample.select(&idx)?)
        })
        .collect()
}

/// 1-based order-statistic ranks of the interval bounds: `⌊(α/2)R⌋` and `⌈(1 - α/2)R⌉`.
pub fn bound_ranks(reps: usize, alpha: f64) -> (usize, usize) {
    let r = reps as f64;
    let lower = ((alpha / 2.0 * r).floor() as usize).max(1);
    let upper = (((1.0 - alpha / 2.0) * r).ceil() as usize).clamp(lower, reps);
    (lower, upper)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JackknifeInterval {
    pub lower: f64,
    pub upper: f64,
    /// Estimate on the full sample.
    pub estimate: f64,
    pub config: JackknifeConfig,
    /// Replicate slopes in replicate order.
    pub replicates: Vec<f64>,
}

/// Percentile interval for the slope from delete-d replicates.
pub fn jackknife_ci(sample: &Sample, config: &EstimatorConfig, jk: &JackknifeConfig) -> Result<JackknifeInterval> {
    let estimate = estimate_slope(sample, config)?;
    let replicates = jackknife_replicates(sample, jk, |s| estimate_slope(s, config))?;
    let mut sorted = replicates.clone();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = bound_ranks(jk.reps, jk.alpha);
    Ok(JackknifeInterval {
        lower: sorted[lo - 1],
        upper: sorted[hi - 1],
        estimate,
        config: *jk,
        replicates,
    })
}
