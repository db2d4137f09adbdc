//! Sources of null distributions for the endogeneity tests.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::endogeneity::{covariance_statistic, TestKind};
use crate::error::{EwpoError, Result};
use crate::estimators::{fit, EstimatorConfig};
use crate::inference::{jackknife_replicates, simulate_prop2_null, BrownianSimConfig, JackknifeConfig};
use crate::pairs::PairScheme;
use crate::sample::Sample;
use crate::weights::WeightKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullSource {
    AnalyticT,
    SimulatedBrownian,
    Jackknife,
}

impl fmt::Display for NullSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NullSource::AnalyticT => "t",
            NullSource::SimulatedBrownian => "brownian",
            NullSource::Jackknife => "jackknife",
        })
    }
}

/// A null distribution for a test statistic.
pub trait NullModel: Send + Sync + fmt::Debug {
    fn source(&self) -> NullSource;

    fn name(&self) -> String {
        self.source().to_string()
    }

    /// Whether this null applies to the given test and estimator.
    fn supports(&self, kind: TestKind, config: &EstimatorConfig) -> Result<()>;

    /// Draws from the null law of the statistic on the scale the test reports.
    /// `statistic` is the unscaled covariance statistic of `sample`.
    fn null_draws(&self, sample: &Sample, config: &EstimatorConfig, statistic: f64) -> Result<Vec<f64>>;
}

/// Student-t reference of the residual-mean test; evaluated in closed form.
#[derive(Debug, Clone, Copy, Default)]
pub struct StudentTNull;

impl NullModel for StudentTNull {
    fn source(&self) -> NullSource {
        NullSource::AnalyticT
    }

    fn supports(&self, kind: TestKind, _config: &EstimatorConfig) -> Result<()> {
        match kind {
            TestKind::ResidualMean => Ok(()),
            TestKind::Covariance => Err(EwpoError::config(
                "the t reference applies to the residual-mean test only; use the brownian or jackknife null",
            )),
        }
    }

    fn null_draws(&self, _: &Sample, _: &EstimatorConfig, _: f64) -> Result<Vec<f64>> {
        Err(EwpoError::config("the t null is analytic and has no draws"))
    }
}

/// Simulated limit law of `S / (σ_x σ_u)` for the Δx-weighted full-pairwise
/// estimator. Draws are simulated once and reused.
#[derive(Debug)]
pub struct SimulatedBrownianNull {
    config: BrownianSimConfig,
    draws: OnceLock<Result<Vec<f64>>>,
}

impl SimulatedBrownianNull {
    /// The sigma fields of `config` are ignored: the unit law is simulated.
    pub fn new(config: BrownianSimConfig) -> Self {
        Self {
            config: BrownianSimConfig {
                sigma_x: 1.0,
                sigma_u: 1.0,
                ..config
            },
            draws: OnceLock::new(),
        }
    }

    pub fn config(&self) -> &BrownianSimConfig {
        &self.config
    }
}

impl NullModel for SimulatedBrownianNull {
    fn source(&self) -> NullSource {
        NullSource::SimulatedBrownian
    }

    fn supports(&self, kind: TestKind, config: &EstimatorConfig) -> Result<()> {
        if kind != TestKind::Covariance {
            return Err(EwpoError::config("the brownian null applies to the covariance test only"));
        }
        if config.weight != WeightKind::DeltaX || config.scheme != PairScheme::full() {
            return Err(EwpoError::config(format!(
                "the brownian null is the limit law under signed dx weights on unsorted full-pairwise data \
                 (got {}); with |dx|-type weights it may not be appropriate, use the jackknife null instead",
                config.label()
            )));
        }
        Ok(())
    }

    fn null_draws(&self, _: &Sample, _: &EstimatorConfig, _: f64) -> Result<Vec<f64>> {
        match self.draws.get_or_init(|| simulate_prop2_null(&self.config)) {
            Ok(d) => Ok(d.clone()),
            Err(e) => Err(EwpoError::config(e.to_string())),
        }
    }
}

/// Delete-d jackknife null for the covariance statistic.
///
/// Replicate statistics are centered at the full-sample value and rescaled by
/// `√((n - d)/d)`, the delete-d variance correction (1 at `d = n/2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JackknifeNull {
    /// Defaults to `⌈n/2⌉`.
    pub d: Option<usize>,
    pub reps: usize,
    pub seed: u64,
}

impl JackknifeNull {
    pub fn new(reps: usize, seed: u64) -> Self {
        Self { d: None, reps, seed }
    }

    pub fn jackknife_config(&self, n: usize) -> JackknifeConfig {
        JackknifeConfig {
            d: self.d.unwrap_or(n.div_ceil(2)),
            reps: self.reps,
            alpha: 0.05,
            seed: self.seed,
        }
    }
}

impl NullModel for JackknifeNull {
    fn source(&self) -> NullSource {
        NullSource::Jackknife
    }

    fn supports(&self, kind: TestKind, _config: &EstimatorConfig) -> Result<()> {
        match kind {
            TestKind::Covariance => Ok(()),
            TestKind::ResidualMean => Err(EwpoError::config("the residual-mean test uses the t reference")),
        }
    }

    fn null_draws(&self, sample: &Sample, config: &EstimatorConfig, statistic: f64) -> Result<Vec<f64>> {
        let n = sample.len();
        let jk = self.jackknife_config(n);
        let scale = ((n - jk.d.min(n)) as f64 / jk.d as f64).sqrt();
        let reps = jackknife_replicates(sample, &jk, |s| Ok(covariance_statistic(s, &fit(s, config)?)))?;
        Ok(reps.into_iter().map(|s| scale * (s - statistic)).collect())
    }
}

/// Name-indexed null models.
#[derive(Debug, Clone, Default)]
pub struct NullRegistry {
    entries: BTreeMap<String, Arc<dyn NullModel>>,
}

impl NullRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `t`, `brownian` and `jackknife` with the given simulation settings.
    pub fn builtin(brownian: BrownianSimConfig, jackknife: JackknifeNull) -> Self {
        let mut reg = Self::new();
        reg.register(Arc::new(StudentTNull));
        reg.register(Arc::new(SimulatedBrownianNull::new(brownian)));
        reg.register(Arc::new(jackknife));
        reg
    }

    pub fn register(&mut self, model: Arc<dyn NullModel>) {
        self.entries.insert(model.name(), model);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn NullModel>> {
        self.entries.get(name).cloned().ok_or_else(|| EwpoError::UnknownStrategy {
            what: "null",
            name: name.to_string(),
            options: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}
