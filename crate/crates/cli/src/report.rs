//! Resolved invocations, their results and the report that ties them together.

use std::fmt::Write as _;

use ewpo_core::endogeneity::{JackknifeNull, NullSource, ScreeningEntry, Tail, TestKind, TestReport};
use ewpo_core::inference::{BrownianSimConfig, CriticalValueTable, CvSource, JackknifeConfig};
use ewpo_core::montecarlo::{ExperimentSpec, SummaryTable};
use ewpo_core::multivariate::MultiFitResult;
use ewpo_core::{EstimatorConfig, FitResult};
use serde::{Deserialize, Serialize};

use crate::args::OutFormat;
use crate::dataset::DataSelection;
use crate::error::{CliError, CliResult};

/// A command with every default filled in. Together with the seed it
/// determines the result completely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Invocation {
    Estimate {
        data: DataSelection,
        estimator: EstimatorConfig,
    },
    Test {
        data: DataSelection,
        estimator: EstimatorConfig,
        kind: TestKind,
        null: NullSource,
        alpha: f64,
        tail: Tail,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        jackknife: Option<JackknifeNull>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        brownian: Option<BrownianSimConfig>,
    },
    Jackknife {
        data: DataSelection,
        estimator: EstimatorConfig,
        /// `d` is resolved once the sample size is known.
        d: Option<usize>,
        reps: usize,
        alpha: f64,
        seed: u64,
    },
    SimulateCv {
        source: CvSource,
        sim: BrownianSimConfig,
        alphas: Vec<f64>,
    },
    Montecarlo {
        experiment: ExperimentSpec,
    },
    IvScreen {
        data: DataSelection,
        estimator: EstimatorConfig,
        candidates: Vec<String>,
    },
}

/// Fitted slope and intercept that a test was run on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub beta0_hat: f64,
    pub beta1_hat: f64,
    pub n: usize,
    pub used_pairs: usize,
    pub dropped_pairs: usize,
}

impl From<&FitResult> for FitSummary {
    fn from(f: &FitResult) -> Self {
        Self {
            beta0_hat: f.beta0_hat,
            beta1_hat: f.beta1_hat,
            n: f.n,
            used_pairs: f.used_pairs,
            dropped_pairs: f.dropped_pairs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JackknifeSummary {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub config: JackknifeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Fit(FitResult),
    MultiFit(MultiFitResult),
    Test {
        fit: FitSummary,
        report: TestReport,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bias_corrected_slope: Option<f64>,
    },
    Jackknife(JackknifeSummary),
    CriticalValues(CriticalValueTable),
    Summary(SummaryTable),
    Screening { entries: Vec<ScreeningEntry> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub invocation: Invocation,
    pub result: Outcome,
    pub elapsed_seconds: f64,
}

impl RunReport {
    pub fn new(seed: u64, invocation: Invocation, result: Outcome, elapsed_seconds: f64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            invocation,
            result,
            elapsed_seconds,
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Data(format!("not a run report: {e}")))
    }

    pub fn render(&self, format: OutFormat) -> CliResult<String> {
        match format {
            OutFormat::Json => serde_json::to_string_pretty(self)
                .map(|s| s + "\n")
                .map_err(|e| CliError::Data(e.to_string())),
            OutFormat::Csv => render_csv(&self.result),
            OutFormat::Text => Ok(render_text(&self.result)),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn csv_rows(header: &[&str], rows: Vec<Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Data(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn render_csv(result: &Outcome) -> CliResult<String> {
    match result {
        Outcome::Fit(f) => csv_rows(
            &["parameter", "estimate"],
            vec![
                vec!["beta0".into(), f.beta0_hat.to_string()],
                vec!["beta1".into(), f.beta1_hat.to_string()],
            ],
        ),
        Outcome::MultiFit(f) => {
            let mut rows = vec![vec!["beta0".to_string(), f.beta0_hat.to_string()]];
            for (k, b) in f.beta_hat.iter().enumerate() {
                rows.push(vec![format!("beta{}", k + 1), b.to_string()]);
            }
            csv_rows(&["parameter", "estimate"], rows)
        }
        Outcome::Test { report, .. } => {
            let cv = report.critical_values;
            csv_rows(
                &["statistic", "lower", "upper", "alpha", "reject", "p_value", "delta_hat"],
                vec![vec![
                    report.statistic.to_string(),
                    opt(cv.map(|c| c.lower)),
                    opt(cv.and_then(|c| c.upper)),
                    opt(cv.map(|c| c.alpha)),
                    report.reject.map_or_else(String::new, |r| r.to_string()),
                    opt(report.p_value),
                    opt(report.delta_hat),
                ]],
            )
        }
        Outcome::Jackknife(j) => csv_rows(
            &["estimate", "lower", "upper", "d", "reps", "alpha"],
            vec![vec![
                j.estimate.to_string(),
                j.lower.to_string(),
                j.upper.to_string(),
                j.config.d.to_string(),
                j.config.reps.to_string(),
                j.config.alpha.to_string(),
            ]],
        ),
        Outcome::CriticalValues(t) => Ok(t.to_csv()),
        Outcome::Summary(t) => Ok(t.to_csv()),
        Outcome::Screening { entries } => csv_rows(
            &["rank", "name", "statistic", "feasible", "selected"],
            entries
                .iter()
                .enumerate()
                .map(|(r, e)| {
                    vec![
                        (r + 1).to_string(),
                        e.name.clone(),
                        opt(e.statistic),
                        e.feasible.to_string(),
                        e.selected.to_string(),
                    ]
                })
                .collect(),
        ),
    }
}

fn render_text(result: &Outcome) -> String {
    let mut out = String::new();
    match result {
        Outcome::Fit(f) => {
            let _ = writeln!(out, "estimator  {}  ({:?} intercept)", f.config.label(), f.config.intercept);
            let _ = writeln!(out, "beta0      {}", f.beta0_hat);
            let _ = writeln!(out, "beta1      {}", f.beta1_hat);
            let _ = writeln!(out, "n {}  pairs used {}  dropped {}", f.n, f.used_pairs, f.dropped_pairs);
            for w in &f.warnings {
                let _ = writeln!(out, "warning: {w}");
            }
        }
        Outcome::MultiFit(f) => {
            let _ = writeln!(out, "estimator  {}  ({:?})", f.config.label(), f.representation);
            let _ = writeln!(out, "beta0      {}", f.beta0_hat);
            for (k, b) in f.beta_hat.iter().enumerate() {
                let _ = writeln!(out, "beta{:<6} {b}", k + 1);
            }
        }
        Outcome::Test {
            fit,
            report,
            bias_corrected_slope,
        } => {
            let _ = writeln!(
                out,
                "{:?} test, {} null, weight {}",
                report.test_kind, report.null_source, report.weight_kind
            );
            let _ = writeln!(out, "beta0 {}  beta1 {}  n {}", fit.beta0_hat, fit.beta1_hat, fit.n);
            let _ = writeln!(out, "statistic  {}", report.statistic);
            if let Some(cv) = report.critical_values {
                let upper = cv.upper.map_or_else(|| "-".to_string(), |u| u.to_string());
                let _ = writeln!(out, "critical   [{}, {upper}] at alpha {}", cv.lower, cv.alpha);
            }
            if let Some(p) = report.p_value {
                let _ = writeln!(out, "p-value    {p}");
            }
            if let Some(r) = report.reject {
                let _ = writeln!(out, "decision   {}", if r { "reject exogeneity" } else { "do not reject" });
            }
            if let Some(d) = report.delta_hat {
                let _ = writeln!(out, "delta_hat  {d}");
            }
            if let Some(b) = bias_corrected_slope {
                let _ = writeln!(out, "corrected  {b}");
            }
            for w in &report.warnings {
                let _ = writeln!(out, "warning: {w}");
            }
        }
        Outcome::Jackknife(j) => {
            let _ = writeln!(out, "estimate   {}", j.estimate);
            let _ = writeln!(
                out,
                "{:.0}% interval [{}, {}]  (d {}, reps {})",
                100.0 * (1.0 - j.config.alpha),
                j.lower,
                j.upper,
                j.config.d,
                j.config.reps
            );
        }
        Outcome::CriticalValues(t) => {
            let _ = writeln!(out, "{:>8} {:>12} {:>12}", "alpha", "lower", "upper");
            for r in &t.rows {
                let _ = writeln!(out, "{:>8} {:>12.4} {:>12.4}", r.alpha, r.lower, r.upper);
            }
        }
        Outcome::Summary(t) => out.push_str(&t.to_text()),
        Outcome::Screening { entries } => {
            for (r, e) in entries.iter().enumerate() {
                let stat = e.statistic.map_or_else(|| "infeasible".to_string(), |s| s.to_string());
                let mark = if e.selected { "*" } else { " " };
                let _ = writeln!(out, "{mark}{:>3} {:<20} {stat}", r + 1, e.name);
            }
        }
    }
    out
}
