//! Univariate estimators built from pairwise slopes.

use serde::{Deserialize, Serialize};

use crate::error::{EwpoError, Result};
use crate::kernel::{self, Kernel, Method, PairSums};
use crate::pairs::{arranged, PairKind, PairScheme};
use crate::sample::Sample;
use crate::summation;
use crate::weights::WeightKind;

/// How the intercept of a fit is obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterceptMode {
    /// `ȳ - β̂₁ x̄`
    #[default]
    Means,
    /// Weighted average of the pairwise intercepts `y_i - β_p x_i`.
    Weighted,
    /// Model without intercept: `β̂₀ = 0`.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub scheme: PairScheme,
    pub weight: WeightKind,
    pub method: Method,
    #[serde(default)]
    pub intercept: InterceptMode,
    #[serde(default)]
    pub kernel: Kernel,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self::new(PairScheme::full(), WeightKind::AbsDeltaX, Method::WeightedAverage)
    }
}

impl EstimatorConfig {
    pub const fn new(scheme: PairScheme, weight: WeightKind, method: Method) -> Self {
        Self {
            scheme,
            weight,
            method,
            intercept: InterceptMode::Means,
            kernel: Kernel::Auto,
        }
    }

    pub const fn with_intercept(mut self, intercept: InterceptMode) -> Self {
        self.intercept = intercept;
        self
    }

    pub const fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    /// Only non-sorted adjacent |Δx| has a consistency argument for the pairwise intercept.
    pub fn weighted_intercept_is_analyzed(&self) -> bool {
        self.scheme == PairScheme::adjacent()
            && self.weight == WeightKind::AbsDeltaX
            && self.method == Method::WeightedAverage
    }

    /// Short label such as `full/sorted/absdx/avg`.
    pub fn label(&self) -> String {
        let kind = match self.scheme.kind {
            PairKind::Adjacent => "adjacent",
            PairKind::FullPairwise => "full",
        };
        let order = if self.scheme.sorted { "sorted" } else { "unsorted" };
        format!("{kind}/{order}/{}/{}", self.weight, self.method.name())
    }
}

/// Slope estimate with pair bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeEstimate {
    pub beta1_hat: f64,
    pub used_pairs: usize,
    pub dropped_pairs: usize,
}

fn ratio(sums: PairSums) -> Result<f64> {
    if sums.used == 0 {
        return Err(EwpoError::AllPairsDegenerate {
            pairs: sums.dropped,
        });
    }
    if sums.den == 0.0 || sums.den.abs() <= 1e-14 * sums.abs_den {
        return Err(EwpoError::WeightsSumToZero);
    }
    Ok(sums.num / sums.den)
}

fn slope_sums(sample: &Sample, config: &EstimatorConfig) -> PairSums {
    let (xs, ys) = arranged(sample, config.scheme.sorted);
    let weight = config.weight.strategy();
    let closed = match (config.scheme.kind, config.kernel) {
        (PairKind::FullPairwise, Kernel::Auto) => weight.full_pairwise_closed_form(&xs, &ys, config.method),
        _ => None,
    };
    closed.unwrap_or_else(|| {
        kernel::streaming_slope_sums(weight, config.scheme.kind, config.method, &xs, &ys)
    })
}

/// Slope with counts of used and dropped (zero-Δx) pairs.
pub fn estimate_slope_detailed(sample: &Sample, config: &EstimatorConfig) -> Result<SlopeEstimate> {
    let sums = slope_sums(sample, config);
    Ok(SlopeEstimate {
        beta1_hat: ratio(sums)?,
        used_pairs: sums.used,
        dropped_pairs: sums.dropped,
    })
}

/// Weighted-average (`Σ w β / Σ w`) or quadratic-loss (`Σ w² β / Σ w²`) slope.
pub fn estimate_slope(sample: &Sample, config: &EstimatorConfig) -> Result<f64> {
    estimate_slope_detailed(sample, config).map(|e| e.beta1_hat)
}

pub fn estimate_intercept_from_means(sample: &Sample, beta1_hat: f64) -> f64 {
    sample.mean_y() - beta1_hat * sample.mean_x()
}

/// Weighted average of pairwise intercepts, with the same weights as the slope
/// (squared under the quadratic-loss method).
pub fn estimate_intercept_weighted(sample: &Sample, config: &EstimatorConfig) -> Result<f64> {
    let (xs, ys) = arranged(sample, config.scheme.sorted);
    let sums = kernel::streaming_intercept_sums(
        config.weight.strategy(),
        config.scheme.kind,
        config.method,
        &xs,
        &ys,
    );
    ratio(sums)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta0_hat: f64,
    pub beta1_hat: f64,
    /// `y_i - β̂₀ - β̂₁ x_i`, in sample order.
    pub residuals: Vec<f64>,
    pub config: EstimatorConfig,
    pub n: usize,
    pub used_pairs: usize,
    pub dropped_pairs: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn residual_mean(&self) -> f64 {
        summation::sum(self.residuals.iter().copied()) / self.n as f64
    }
}

pub fn fit(sample: &Sample, config: &EstimatorConfig) -> Result<FitResult> {
    let slope = estimate_slope_detailed(sample, config)?;
    let beta1_hat = slope.beta1_hat;
    let mut warnings = Vec::new();
    if let Some(caveat) = config.weight.strategy().caveat() {
        warnings.push(caveat.to_string());
    }
    let beta0_hat = match config.intercept {
        InterceptMode::Means => estimate_intercept_from_means(sample, beta1_hat),
        InterceptMode::Weighted => {
            if !config.weighted_intercept_is_analyzed() {
                warnings.push(format!(
                    "pairwise intercept under {} has no consistency result",
                    config.label()
                ));
            }
            estimate_intercept_weighted(sample, config)?
        }
        InterceptMode::Zero => 0.0,
    };
    let residuals = sample
        .x()
        .iter()
        .zip(sample.y())
        .map(|(x, y)| y - beta0_hat - beta1_hat * x)
        .collect();
    Ok(FitResult {
        beta0_hat,
        beta1_hat,
        residuals,
        config: *config,
        n: sample.len(),
        used_pairs: slope.used_pairs,
        dropped_pairs: slope.dropped_pairs,
        warnings,
    })
}
