//! Descriptive statistics for replicate vectors.

use serde::{Deserialize, Serialize};

use crate::error::{EwpoError, Result};
use crate::summation::{self, NeumaierSum};

/// Mean, dispersion and shape of a set of draws.
///
/// `sd` and `variance` use the n-1 divisor; skewness is `m3 / m2^1.5` and
/// kurtosis is the raw (non-excess) `m4 / m2²`, both from biased central moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(EwpoError::InsufficientObservations { need: 2, got: n });
        }
        let nf = n as f64;
        let mean = mean(values);
        let (mut m2, mut m3, mut m4) = (NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new());
        for v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        let (m2, m3, m4) = (m2.value() / nf, m3.value() / nf, m4.value() / nf);
        let variance = m2 * nf / (nf - 1.0);
        let (skewness, kurtosis) = if m2 > 0.0 {
            (m3 / m2.powf(1.5), m4 / (m2 * m2))
        } else {
            (f64::NAN, f64::NAN)
        };
        Ok(Self {
            n,
            mean,
            sd: variance.sqrt(),
            variance,
            skewness,
            kurtosis,
        })
    }

    /// Standard error of the mean, `sd / √n`.
    pub fn std_error(&self) -> f64 {
        self.sd / (self.n as f64).sqrt()
    }
}

pub fn mean(values: &[f64]) -> f64 {
    summation::sum(values.iter().copied()) / values.len() as f64
}

/// Sample standard deviation (n-1 divisor).
pub fn sd(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss = summation::sum(values.iter().map(|v| (v - m) * (v - m)));
    (ss / (values.len() as f64 - 1.0)).sqrt()
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let sab = summation::sum(a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)));
    let saa = summation::sum(a.iter().map(|x| (x - ma) * (x - ma)));
    let sbb = summation::sum(b.iter().map(|y| (y - mb) * (y - mb)));
    sab / (saa * sbb).sqrt()
}

/// Quantile of ascending `sorted` by linear interpolation between order
/// statistics (position `p (n - 1)`, the common "type 7" rule).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    let h = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}
