//! Quantities recorded per Monte Carlo replication.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::endogeneity::{
    bias_corrected_slope, covariance_statistic, covariance_test, residual_mean_test, JackknifeNull, NullModel,
    SimulatedBrownianNull, Tail,
};
use crate::error::{EwpoError, Result};
use crate::estimators::{estimate_slope, fit, EstimatorConfig, InterceptMode};
use crate::inference::BrownianSimConfig;
use crate::montecarlo::DgpSpec;
use crate::sample::Sample;
use crate::stats;

/// Inputs of one replication.
#[derive(Debug, Clone, Copy)]
pub struct RepContext<'a> {
    pub sample: &'a Sample,
    pub spec: &'a DgpSpec,
    pub config: &'a EstimatorConfig,
    /// Seed reserved for randomness inside the target (e.g. resampling).
    pub seed: u64,
}

pub trait McTarget: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn evaluate(&self, ctx: &RepContext<'_>) -> Result<f64>;
}

fn zero_intercept(config: &EstimatorConfig) -> EstimatorConfig {
    config.with_intercept(InterceptMode::Zero)
}

/// Slope estimate.
#[derive(Debug, Clone, Copy, Default)]
pub struct EstimatorDist;

impl McTarget for EstimatorDist {
    fn name(&self) -> &str {
        "estimator"
    }

    fn evaluate(&self, ctx: &RepContext<'_>) -> Result<f64> {
        estimate_slope(ctx.sample, ctx.config)
    }
}

/// Intercept under the configured intercept mode.
#[derive(Debug, Clone, Copy, Default)]
pub struct InterceptDist;

impl McTarget for InterceptDist {
    fn name(&self) -> &str {
        "intercept"
    }

    fn evaluate(&self, ctx: &RepContext<'_>) -> Result<f64> {
        Ok(fit(ctx.sample, ctx.config)?.beta0_hat)
    }
}

/// Covariance statistic `S`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CovStatDist;

impl McTarget for CovStatDist {
    fn name(&self) -> &str {
        "cov-stat"
    }

    fn evaluate(&self, ctx: &RepContext<'_>) -> Result<f64> {
        Ok(covariance_statistic(ctx.sample, &fit(ctx.sample, ctx.config)?))
    }
}

/// Mean residual of the zero-intercept fit.
#[derive(Debug, Clone, Copy, Default)]
pub struct ResidualMeanDist;

impl McTarget for ResidualMeanDist {
    fn name(&self) -> &str {
        "residual-mean"
    }

    fn evaluate(&self, ctx: &RepContext<'_>) -> Result<f64> {
        Ok(stats::mean(&fit(ctx.sample, &zero_intercept(ctx.config))?.residuals))
    }
}

/// Bias-corrected slope of the zero-intercept fit.
#[derive(Debug, Clone, Copy, Default)]
pub struct BiasCorrectedDist;

impl McTarget for BiasCorrectedDist {
    fn name(&self) -> &str {
        "bias-corrected"
    }

    fn evaluate(&self, ctx: &RepContext<'_>) -> Result<f64> {
        let f = fit(ctx.sample, &zero_intercept(ctx.config))?;
        bias_corrected_slope(ctx.sample, &f)
    }
}

/// Rejection indicator (0 or 1) of the residual-mean t-test.
#[derive(Debug, Clone, Copy)]
pub struct ResidualTestRejection {
    pub alpha: f64,
}

impl McTarget for ResidualTestRejection {
    fn name(&self) -> &str {
        "residual-reject"
    }

    fn evaluate(&self, ctx: &RepContext<'_>) -> Result<f64> {
        let f = fit(ctx.sample, &zero_intercept(ctx.config))?;
        let r = residual_mean_test(ctx.sample, &f, Some(self.alpha))?;
        Ok(if r.reject == Some(true) { 1.0 } else { 0.0 })
    }
}

/// Which null the covariance-test rejection target uses.
#[derive(Debug, Clone)]
enum RejectionNull {
    Brownian(Arc<SimulatedBrownianNull>),
    /// Resampling seeded per replication.
    Jackknife { d: Option<usize>, reps: usize },
}

/// Rejection indicator (0 or 1) of the covariance test.
#[derive(Debug, Clone)]
pub struct CovTestRejection {
    pub alpha: f64,
    pub tail: Tail,
    null: RejectionNull,
}

impl CovTestRejection {
    pub fn brownian(alpha: f64, tail: Tail, sim: BrownianSimConfig) -> Self {
        Self {
            alpha,
            tail,
            null: RejectionNull::Brownian(Arc::new(SimulatedBrownianNull::new(sim))),
        }
    }

    pub fn jackknife(alpha: f64, tail: Tail, d: Option<usize>, reps: usize) -> Self {
        Self {
            alpha,
            tail,
            null: RejectionNull::Jackknife { d, reps },
        }
    }
}

impl McTarget for CovTestRejection {
    fn name(&self) -> &str {
        "cov-reject"
    }

    fn evaluate(&self, ctx: &RepContext<'_>) -> Result<f64> {
        let report = match &self.null {
            RejectionNull::Brownian(null) => {
                covariance_test(ctx.sample, ctx.config, self.alpha, null.as_ref(), self.tail)?
            }
            RejectionNull::Jackknife { d, reps } => {
                let null = JackknifeNull { d: *d, reps: *reps, seed: ctx.seed };
                covariance_test(ctx.sample, ctx.config, self.alpha, &null as &dyn NullModel, self.tail)?
            }
        };
        Ok(if report.reject == Some(true) { 1.0 } else { 0.0 })
    }
}

/// Name-indexed replication targets.
#[derive(Debug, Clone, Default)]
pub struct TargetRegistry {
    entries: BTreeMap<String, Arc<dyn McTarget>>,
}

impl TargetRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Targets that need no extra settings; rejection targets use `alpha`.
    pub fn builtin(alpha: f64) -> Self {
        let mut reg = Self::new();
        reg.register(Arc::new(EstimatorDist));
        reg.register(Arc::new(InterceptDist));
        reg.register(Arc::new(CovStatDist));
        reg.register(Arc::new(ResidualMeanDist));
        reg.register(Arc::new(BiasCorrectedDist));
        reg.register(Arc::new(ResidualTestRejection { alpha }));
        reg
    }

    pub fn register(&mut self, target: Arc<dyn McTarget>) {
        self.entries.insert(target.name().to_string(), target);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn McTarget>> {
        self.entries.get(name).cloned().ok_or_else(|| EwpoError::UnknownStrategy {
            what: "target",
            name: name.to_string(),
            options: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}
