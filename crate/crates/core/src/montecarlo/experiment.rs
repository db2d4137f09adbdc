//! Declarative experiments and summary tables.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::endogeneity::Tail;
use crate::error::{EwpoError, Result};
use crate::estimators::EstimatorConfig;
use crate::inference::BrownianSimConfig;
use crate::montecarlo::targets::{CovTestRejection, McTarget, RepContext, TargetRegistry};
use crate::montecarlo::{DgpSpec, UDist, XDist};
use crate::rng::{derive_seed, task_rng};
use crate::stats::Moments;

/// Replicate values of `target` for one cell. Replication r draws its sample
/// from stream r of `spec.seed`.
pub fn run_cell(spec: &DgpSpec, config: &EstimatorConfig, target: &dyn McTarget, reps: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = task_rng(spec.seed, r as u64);
            let draw = spec.draw(&mut rng)?;
            target.evaluate(&RepContext {
                sample: &draw.sample,
                spec,
                config,
                seed: derive_seed(spec.seed, r as u64),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub rho: f64,
    /// `Exogen` or the ρ value.
    pub label: String,
    pub mean: f64,
    pub sd: f64,
    /// MC standard error of the mean, `sd / √reps`.
    pub se: f64,
    pub skewness: f64,
    /// Raw kurtosis (3 under normality).
    pub kurtosis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub target: String,
    pub config: EstimatorConfig,
    pub reps: usize,
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn row(&self, n: usize, rho: f64) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.n == n && r.rho == rho)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,rho,label,mean,sd,se,skewness,kurtosis\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.n, r.rho, r.label, r.mean, r.sd, r.se, r.skewness, r.kurtosis
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("target: {}  estimator: {}  reps: {}\n", self.target, self.config.label(), self.reps);
        let _ = writeln!(
            out,
            "{:>7} {:>8} {:>12} {:>12} {:>12} {:>9} {:>9}",
            "n", "rho", "mean", "sd", "se", "skew", "kurt"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>7} {:>8} {:>12.4} {:>12.4} {:>12.4} {:>9.3} {:>9.3}",
                r.n, r.label, r.mean, r.sd, r.se, r.skewness, r.kurtosis
            );
        }
        out
    }
}

/// Runs `reps` replications of every cell and summarises each.
pub fn run_experiment(
    dgps: &[DgpSpec],
    config: &EstimatorConfig,
    target: &dyn McTarget,
    reps: usize,
) -> Result<SummaryTable> {
    run_experiment_with_draws(dgps, config, target, reps).map(|(table, _)| table)
}

/// As [`run_experiment`], also returning the replicate values of each cell.
pub fn run_experiment_with_draws(
    dgps: &[DgpSpec],
    config: &EstimatorConfig,
    target: &dyn McTarget,
    reps: usize,
) -> Result<(SummaryTable, Vec<Vec<f64>>)> {
    if reps < 100 {
        return Err(EwpoError::config(format!("reps = {reps} must be at least 100")));
    }
    let mut rows = Vec::with_capacity(dgps.len());
    let mut all = Vec::with_capacity(dgps.len());
    for spec in dgps {
        let draws = run_cell(spec, config, target, reps)?;
        let m = Moments::of(&draws)?;
        rows.push(SummaryRow {
            n: spec.n,
            rho: spec.rho,
            label: spec.label(),
            mean: m.mean,
            sd: m.sd,
            se: m.std_error(),
            skewness: m.skewness,
            kurtosis: m.kurtosis,
        });
        all.push(draws);
    }
    let table = SummaryTable {
        target: target.name().to_string(),
        config: *config,
        reps,
        rows,
    };
    Ok((table, all))
}

/// How the second parameter of a normal law is read when given as `param`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalParam {
    #[default]
    Variance,
    Sd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "kebab-case", deny_unknown_fields)]
enum XDistFile {
    Uniform {
        a: f64,
        b: f64,
    },
    Normal {
        mean: f64,
        variance: Option<f64>,
        sd: Option<f64>,
        param: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "kebab-case", deny_unknown_fields)]
enum UDistFile {
    Normal {
        variance: Option<f64>,
        sd: Option<f64>,
        param: Option<f64>,
    },
    SkewedNormal {
        lambda: Option<f64>,
        variance: Option<f64>,
        sd: Option<f64>,
        param: Option<f64>,
    },
}

fn resolve_variance(
    variance: Option<f64>,
    sd: Option<f64>,
    param: Option<f64>,
    convention: NormalParam,
    default: Option<f64>,
) -> Result<f64> {
    let given = [variance.is_some(), sd.is_some(), param.is_some()].iter().filter(|b| **b).count();
    if given > 1 {
        return Err(EwpoError::config("give only one of `variance`, `sd`, `param`"));
    }
    if let Some(v) = variance {
        return Ok(v);
    }
    if let Some(s) = sd {
        return Ok(s * s);
    }
    if let Some(p) = param {
        return Ok(match convention {
            NormalParam::Variance => p,
            NormalParam::Sd => p * p,
        });
    }
    default.ok_or_else(|| EwpoError::config("normal x needs one of `variance`, `sd`, `param`"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DgpGrid {
    #[serde(default)]
    beta0: f64,
    beta1: f64,
    x: XDistFile,
    u: UDistFile,
    ns: Vec<usize>,
    #[serde(default = "zero_rho")]
    rhos: Vec<f64>,
}

fn zero_rho() -> Vec<f64> {
    vec![0.0]
}

/// Null used by the `cov-reject` target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NullSettings {
    Brownian { steps: usize, reps: usize },
    Jackknife { d: Option<usize>, reps: usize },
}

/// Experiment file: a grid of cells over sample sizes and correlations.
///
/// ```toml
/// seed = 7
/// reps = 1000
/// target = "cov-stat"
/// normal_param = "variance"
///
/// [estimator]
/// scheme = { kind = "full-pairwise", sorted = false }
/// weight = "absdx"
/// method = "avg"
///
/// [dgp]
/// beta0 = 1.0
/// beta1 = 0.5
/// x = { dist = "uniform", a = -5.0, b = 5.0 }
/// u = { dist = "normal", variance = 1.0 }
/// ns = [50, 500]
/// rhos = [0.0, 0.2, 0.5, 0.8]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub seed: u64,
    pub reps: usize,
    pub target: String,
    #[serde(default)]
    pub normal_param: NormalParam,
    pub estimator: EstimatorConfig,
    dgp: DgpGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<Tail>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null: Option<NullSettings>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| EwpoError::config(format!("experiment file: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| EwpoError::config(format!("experiment file: {e}")))
    }

    /// Parses by extension: `.json`, otherwise TOML.
    pub fn from_path_text(path: &std::path::Path, text: &str) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(text),
            _ => Self::from_toml(text),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(0.05)
    }

    fn x_dist(&self) -> Result<XDist> {
        Ok(match self.dgp.x {
            XDistFile::Uniform { a, b } => XDist::Uniform { a, b },
            XDistFile::Normal { mean, variance, sd, param } => XDist::Normal {
                mean,
                variance: resolve_variance(variance, sd, param, self.normal_param, None)?,
            },
        })
    }

    fn u_dist(&self) -> Result<UDist> {
        Ok(match self.dgp.u {
            UDistFile::Normal { variance, sd, param } => UDist::Normal {
                variance: resolve_variance(variance, sd, param, self.normal_param, Some(1.0))?,
            },
            UDistFile::SkewedNormal { lambda, variance, sd, param } => UDist::SkewedNormal {
                lambda: lambda.unwrap_or(1.0),
                variance: resolve_variance(variance, sd, param, self.normal_param, Some(1.0))?,
            },
        })
    }

    /// Cells in file order (sizes outer, correlations inner), each with its own derived seed.
    pub fn cells(&self) -> Result<Vec<DgpSpec>> {
        let (x_dist, u_dist) = (self.x_dist()?, self.u_dist()?);
        let mut out = Vec::new();
        for &n in &self.dgp.ns {
            for &rho in &self.dgp.rhos {
                let spec = DgpSpec {
                    beta0: self.dgp.beta0,
                    beta1: self.dgp.beta1,
                    x_dist,
                    u_dist,
                    rho,
                    n,
                    seed: derive_seed(self.seed, out.len() as u64),
                };
                spec.validate()?;
                out.push(spec);
            }
        }
        Ok(out)
    }

    pub fn target(&self) -> Result<Arc<dyn McTarget>> {
        if self.target == "cov-reject" {
            let tail = self.tail.unwrap_or_default();
            return Ok(Arc::new(match self.null {
                Some(NullSettings::Brownian { steps, reps }) => {
                    CovTestRejection::brownian(self.alpha(), tail, BrownianSimConfig::new(steps, reps, self.seed))
                }
                Some(NullSettings::Jackknife { d, reps }) => CovTestRejection::jackknife(self.alpha(), tail, d, reps),
                None => return Err(EwpoError::config("target `cov-reject` needs a [null] section")),
            }));
        }
        TargetRegistry::builtin(self.alpha()).get(&self.target)
    }

    pub fn run(&self) -> Result<SummaryTable> {
        let target = self.target()?;
        run_experiment(&self.cells()?, &self.estimator, target.as_ref(), self.reps)
    }

    /// Summary plus the replicate values of every cell, in cell order.
    pub fn run_with_draws(&self) -> Result<(SummaryTable, Vec<Vec<f64>>)> {
        let target = self.target()?;
        run_experiment_with_draws(&self.cells()?, &self.estimator, target.as_ref(), self.reps)
    }
}
