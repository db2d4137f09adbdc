//! Endogeneity diagnostics on pairwise-estimator residuals.
//!
//! Pairwise weighted averages do not force residuals to be orthogonal to the
//! regressor, so the residuals carry information about `corr(x, u)`:
//! their mean (zero-intercept models) and their covariance with `x`.

mod null;
mod screening;

pub use null::{JackknifeNull, NullModel, NullRegistry, NullSource, SimulatedBrownianNull, StudentTNull};
pub use screening::{iv_screening, Candidate, ScreeningEntry, UNTRANSFORMED};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{EwpoError, Result};
use crate::estimators::{fit, EstimatorConfig, FitResult, InterceptMode};
use crate::kernel::Method;
use crate::sample::Sample;
use crate::stats;
use crate::summation::NeumaierSum;
use crate::weights::WeightKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    ResidualMean,
    Covariance,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    #[default]
    TwoSided,
    /// Reject only for statistics below the α quantile.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub lower: f64,
    /// Absent for one-sided lower tests.
    pub upper: Option<f64>,
    pub alpha: f64,
}

impl CriticalValues {
    pub fn rejects(&self, statistic: f64) -> bool {
        statistic < self.lower || self.upper.is_some_and(|u| statistic > u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub test_kind: TestKind,
    pub weight_kind: WeightKind,
    pub null_source: NullSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_values: Option<CriticalValues>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reject: Option<bool>,
    /// Estimated slope bias.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl TestReport {
    fn decide(&mut self, cv: CriticalValues) {
        self.reject = Some(cv.rejects(self.statistic));
        self.critical_values = Some(cv);
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EwpoError::config(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    Ok(())
}

fn check_fit(sample: &Sample, fit: &FitResult) -> Result<()> {
    if fit.n != sample.len() || fit.residuals.len() != sample.len() {
        return Err(EwpoError::LengthMismatch {
            x: sample.len(),
            y: fit.residuals.len(),
        });
    }
    Ok(())
}

fn require_zero_intercept(fit: &FitResult) -> Result<()> {
    if fit.config.intercept != InterceptMode::Zero {
        return Err(EwpoError::config("residual test requires zero-intercept model"));
    }
    Ok(())
}

/// Residuals indistinguishable from an exact fit at working precision.
fn is_exact_fit(sample: &Sample, fit: &FitResult) -> bool {
    let scale = sample.y().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_resid = fit.residuals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    max_resid <= 64.0 * f64::EPSILON * scale
}

/// One-sample t-test of `mean(û) = 0` for a zero-intercept fit.
///
/// With `alpha`, a two-sided decision against Student-t with n - 1 degrees of
/// freedom is attached. `delta_hat = -mean(û) / x̄`.
pub fn residual_mean_test(sample: &Sample, fit: &FitResult, alpha: Option<f64>) -> Result<TestReport> {
    check_fit(sample, fit)?;
    require_zero_intercept(fit)?;
    let n = sample.len();
    if n < 3 {
        return Err(EwpoError::InsufficientObservations { need: 3, got: n });
    }
    let mut warnings = fit.warnings.clone();
    let mean_x = sample.mean_x();
    if mean_x.abs() < 0.1 * stats::sd(sample.x()) {
        warnings.push(format!(
            "mean of x ({mean_x:.4}) is small relative to its spread; the residual test has little power"
        ));
    }
    let dof = (n - 1) as f64;
    let (statistic, mean_u) = if is_exact_fit(sample, fit) {
        (0.0, 0.0)
    } else {
        let mean_u = stats::mean(&fit.residuals);
        let sd_u = stats::sd(&fit.residuals);
        if sd_u == 0.0 {
            return Err(EwpoError::Undefined("residuals are constant and nonzero; t-ratio undefined".into()));
        }
        (mean_u / (sd_u / (n as f64).sqrt()), mean_u)
    };
    let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| EwpoError::Undefined(e.to_string()))?;
    let mut report = TestReport {
        statistic,
        test_kind: TestKind::ResidualMean,
        weight_kind: fit.config.weight,
        null_source: NullSource::AnalyticT,
        critical_values: None,
        reject: None,
        delta_hat: (mean_x != 0.0).then(|| -mean_u / mean_x),
        p_value: Some(2.0 * t.sf(statistic.abs())),
        warnings,
    };
    if let Some(alpha) = alpha {
        check_alpha(alpha)?;
        let q = t.inverse_cdf(1.0 - alpha / 2.0);
        report.decide(CriticalValues {
            lower: -q,
            upper: Some(q),
            alpha,
        });
    }
    Ok(report)
}

/// `β̂₁ + mean(û) / x̄` for a zero-intercept fit.
pub fn bias_corrected_slope(sample: &Sample, fit: &FitResult) -> Result<f64> {
    check_fit(sample, fit)?;
    require_zero_intercept(fit)?;
    let mean_x = sample.mean_x();
    if mean_x == 0.0 {
        return Err(EwpoError::Undefined("mean of regressor is zero; correction undefined".into()));
    }
    if is_exact_fit(sample, fit) {
        return Ok(fit.beta1_hat);
    }
    Ok(fit.beta1_hat + stats::mean(&fit.residuals) / mean_x)
}

/// `S = n⁻² Σ_{p>q} Δx_pq Δû_pq`, evaluated as `n⁻¹ Σ (x - x̄)(û - ū)`.
pub fn covariance_statistic(sample: &Sample, fit: &FitResult) -> f64 {
    debug_assert_eq!(sample.len(), fit.residuals.len());
    let n = sample.len() as f64;
    let mean_x = sample.mean_x();
    let mean_u = stats::mean(&fit.residuals);
    let mut acc = NeumaierSum::new();
    for (x, u) in sample.x().iter().zip(&fit.residuals) {
        acc += (x - mean_x) * (u - mean_u);
    }
    acc.value() / n
}

/// Reasons a covariance-test configuration is rejected.
pub fn check_covariance_config(config: &EstimatorConfig, null: &dyn NullModel) -> Result<()> {
    if config.method == Method::QuadraticLoss {
        return Err(EwpoError::config(
            "covariance test needs a weighted-average estimator; the quadratic-loss form satisfies the \
             least-squares normal equations and forces the statistic to zero",
        ));
    }
    null.supports(TestKind::Covariance, config)
}

/// Fits `config`, computes the covariance statistic and decides against `null`.
///
/// Under the Brownian null the reported statistic is `S / (σ̂_x σ̂_u)`.
pub fn covariance_test(
    sample: &Sample,
    config: &EstimatorConfig,
    alpha: f64,
    null: &dyn NullModel,
    tail: Tail,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    check_covariance_config(config, null)?;
    let fitted = fit(sample, config)?;
    let raw = covariance_statistic(sample, &fitted);
    let statistic = match null.source() {
        NullSource::SimulatedBrownian => {
            let scale = stats::sd(sample.x()) * stats::sd(&fitted.residuals);
            if scale == 0.0 {
                return Err(EwpoError::Undefined("zero residual spread; scaled statistic undefined".into()));
            }
            raw / scale
        }
        _ => raw,
    };
    let draws = null.null_draws(sample, config, raw)?;
    let sorted = stats::sorted_copy(&draws);
    let cv = match tail {
        Tail::TwoSided => CriticalValues {
            lower: stats::quantile_sorted(&sorted, alpha / 2.0),
            upper: Some(stats::quantile_sorted(&sorted, 1.0 - alpha / 2.0)),
            alpha,
        },
        Tail::Lower => CriticalValues {
            lower: stats::quantile_sorted(&sorted, alpha),
            upper: None,
            alpha,
        },
    };
    let mut report = TestReport {
        statistic,
        test_kind: TestKind::Covariance,
        weight_kind: config.weight,
        null_source: null.source(),
        critical_values: None,
        reject: None,
        delta_hat: None,
        p_value: None,
        warnings: fitted.warnings,
    };
    report.decide(cv);
    Ok(report)
}
