//! Command resolution and execution.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ewpo_core::endogeneity::{
    bias_corrected_slope, check_covariance_config, covariance_test, iv_screening, residual_mean_test, Candidate,
    JackknifeNull, NullModel, NullSource, SimulatedBrownianNull, StudentTNull, Tail, TestKind,
};
use ewpo_core::inference::{
    critical_values, jackknife_ci, simulate_prop1_ratio, simulate_prop2_null, BrownianSimConfig, CvSource,
    JackknifeConfig,
};
use ewpo_core::montecarlo::ExperimentSpec;
use ewpo_core::multivariate::fit_multivariate;
use ewpo_core::{fit, InterceptMode};

use crate::args::{Command, KindArg, NullArg, TailArg, DEFAULT_SEED};
use crate::dataset::{parse_dataset, read_columns};
use crate::error::{CliError, CliResult};
use crate::report::{FitSummary, Invocation, JackknifeSummary, Outcome, RunReport};

/// Files a run writes besides its report; not part of the recorded invocation.
#[derive(Debug, Default)]
pub struct SideOutputs {
    pub draws: Option<PathBuf>,
}

/// Turns parsed arguments into a fully specified invocation and its seed.
pub fn resolve(command: Command, seed: Option<u64>) -> CliResult<(Invocation, u64, SideOutputs)> {
    let base_seed = seed.unwrap_or(DEFAULT_SEED);
    let none = SideOutputs::default();
    Ok(match command {
        Command::Estimate { data, estimator } => (
            Invocation::Estimate {
                data: data.selection(),
                estimator: estimator.config(InterceptMode::Means),
            },
            base_seed,
            none,
        ),
        Command::Test {
            data,
            estimator,
            kind,
            null,
            alpha,
            tail,
            d,
            jk_reps,
            steps,
            sim_reps,
        } => {
            let tail = match tail {
                TailArg::TwoSided => Tail::TwoSided,
                TailArg::Lower => Tail::Lower,
            };
            let invocation = match kind {
                KindArg::Residual => {
                    if let Some(n) = null.filter(|n| *n != NullArg::T) {
                        return Err(CliError::Usage(format!(
                            "--null {} does not apply: the residual-mean test is referred to Student t",
                            null_name(n)
                        )));
                    }
                    if let Some(mode) = estimator.explicit_intercept().filter(|m| *m != InterceptMode::Zero) {
                        return Err(CliError::Usage(format!(
                            "the residual-mean test needs a model without intercept (got --intercept {mode:?}); \
                             with an intercept the residuals have mean zero by construction"
                        )));
                    }
                    Invocation::Test {
                        data: data.selection(),
                        estimator: estimator.config(InterceptMode::Zero),
                        kind: TestKind::ResidualMean,
                        null: NullSource::AnalyticT,
                        alpha,
                        tail,
                        jackknife: None,
                        brownian: None,
                    }
                }
                KindArg::Covariance => {
                    let null = match null.unwrap_or(NullArg::Jackknife) {
                        NullArg::T => NullSource::AnalyticT,
                        NullArg::Brownian => NullSource::SimulatedBrownian,
                        NullArg::Jackknife => NullSource::Jackknife,
                    };
                    Invocation::Test {
                        data: data.selection(),
                        estimator: estimator.config(InterceptMode::Means),
                        kind: TestKind::Covariance,
                        null,
                        alpha,
                        tail,
                        jackknife: (null == NullSource::Jackknife).then_some(JackknifeNull {
                            d,
                            reps: jk_reps,
                            seed: base_seed,
                        }),
                        brownian: (null == NullSource::SimulatedBrownian)
                            .then(|| BrownianSimConfig::new(steps, sim_reps, base_seed)),
                    }
                }
            };
            (invocation, base_seed, none)
        }
        Command::Jackknife {
            data,
            estimator,
            d,
            reps,
            alpha,
        } => (
            Invocation::Jackknife {
                data: data.selection(),
                estimator: estimator.config(InterceptMode::Means),
                d,
                reps,
                alpha,
                seed: base_seed,
            },
            base_seed,
            none,
        ),
        Command::SimulateCv {
            prop,
            steps,
            reps,
            alphas,
            draws,
        } => (
            Invocation::SimulateCv {
                source: if prop == 1 {
                    CvSource::Prop1Ratio
                } else {
                    CvSource::Prop2Statistic
                },
                sim: BrownianSimConfig::new(steps, reps, base_seed),
                alphas,
            },
            base_seed,
            SideOutputs { draws },
        ),
        Command::Montecarlo { spec, draws } => {
            let text = read_text(&spec)?;
            let mut experiment = ExperimentSpec::from_path_text(&spec, &text)?;
            if let Some(s) = seed {
                experiment.seed = s;
            }
            let seed = experiment.seed;
            (Invocation::Montecarlo { experiment }, seed, SideOutputs { draws })
        }
        Command::IvScreen {
            data,
            estimator,
            candidates,
        } => (
            Invocation::IvScreen {
                data: data.selection(),
                estimator: estimator.config(InterceptMode::Means),
                candidates,
            },
            base_seed,
            none,
        ),
        Command::Rerun { .. } => return Err(CliError::Usage("rerun cannot be nested".into())),
    })
}

fn null_name(n: NullArg) -> &'static str {
    match n {
        NullArg::T => "t",
        NullArg::Brownian => "brownian",
        NullArg::Jackknife => "jackknife",
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn null_model(null: NullSource, jackknife: Option<JackknifeNull>, brownian: Option<BrownianSimConfig>) -> CliResult<Box<dyn NullModel>> {
    Ok(match null {
        NullSource::AnalyticT => Box::new(StudentTNull),
        NullSource::Jackknife => Box::new(
            jackknife.ok_or_else(|| CliError::Usage("jackknife null settings missing".into()))?,
        ),
        NullSource::SimulatedBrownian => Box::new(SimulatedBrownianNull::new(
            brownian.ok_or_else(|| CliError::Usage("brownian null settings missing".into()))?,
        )),
    })
}

/// Executes an invocation, writing side outputs as requested.
pub fn execute(invocation: &Invocation, side: &SideOutputs) -> CliResult<Outcome> {
    match invocation {
        Invocation::Estimate { data, estimator } => {
            let dataset = parse_dataset(data)?;
            if dataset.x.len() == 1 {
                Ok(Outcome::Fit(fit(&dataset.sample()?, estimator)?))
            } else {
                Ok(Outcome::MultiFit(fit_multivariate(&dataset.design()?, estimator)?))
            }
        }
        Invocation::Test {
            data,
            estimator,
            kind,
            null,
            alpha,
            tail,
            jackknife,
            brownian,
        } => {
            let model = null_model(*null, *jackknife, *brownian)?;
            if *kind == TestKind::Covariance {
                // Conflicts are reported before any data are read.
                check_covariance_config(estimator, model.as_ref())?;
            }
            let sample = parse_dataset(data)?.sample()?;
            match kind {
                TestKind::ResidualMean => {
                    let fitted = fit(&sample, estimator)?;
                    let report = residual_mean_test(&sample, &fitted, Some(*alpha))?;
                    Ok(Outcome::Test {
                        fit: FitSummary::from(&fitted),
                        bias_corrected_slope: Some(bias_corrected_slope(&sample, &fitted)?),
                        report,
                    })
                }
                TestKind::Covariance => {
                    let fitted = fit(&sample, estimator)?;
                    let report = covariance_test(&sample, estimator, *alpha, model.as_ref(), *tail)?;
                    Ok(Outcome::Test {
                        fit: FitSummary::from(&fitted),
                        report,
                        bias_corrected_slope: None,
                    })
                }
            }
        }
        Invocation::Jackknife {
            data,
            estimator,
            d,
            reps,
            alpha,
            seed,
        } => {
            let sample = parse_dataset(data)?.sample()?;
            let jk = JackknifeConfig {
                d: d.unwrap_or(sample.len().div_ceil(2)),
                reps: *reps,
                alpha: *alpha,
                seed: *seed,
            };
            let ci = jackknife_ci(&sample, estimator, &jk)?;
            Ok(Outcome::Jackknife(JackknifeSummary {
                estimate: ci.estimate,
                lower: ci.lower,
                upper: ci.upper,
                config: ci.config,
            }))
        }
        Invocation::SimulateCv { source, sim, alphas } => {
            let draws = match source {
                CvSource::Prop1Ratio => simulate_prop1_ratio(sim)?,
                CvSource::Prop2Statistic => simulate_prop2_null(sim)?,
            };
            let mut table = critical_values(&draws, alphas)?;
            table.source = Some(*source);
            table.config = Some(*sim);
            if let Some(path) = &side.draws {
                let mut text = String::from("draw\n");
                for d in &draws {
                    let _ = writeln!(text, "{d}");
                }
                write_text(path, &text)?;
            }
            Ok(Outcome::CriticalValues(table))
        }
        Invocation::Montecarlo { experiment } => {
            let Some(path) = &side.draws else {
                return Ok(Outcome::Summary(experiment.run()?));
            };
            let (table, draws) = experiment.run_with_draws()?;
            let mut text = String::from("n,rho,label,replicate,value\n");
            for (row, values) in table.rows.iter().zip(&draws) {
                for (r, v) in values.iter().enumerate() {
                    let _ = writeln!(text, "{},{},{},{r},{v}", row.n, row.rho, row.label);
                }
            }
            write_text(path, &text)?;
            Ok(Outcome::Summary(table))
        }
        Invocation::IvScreen {
            data,
            estimator,
            candidates,
        } => {
            let sample = parse_dataset(data)?.sample()?;
            let names: Vec<&str> = candidates.iter().map(String::as_str).collect();
            let columns = read_columns(Path::new(&data.path), &names)?;
            let candidates: Vec<Candidate> = candidates
                .iter()
                .zip(columns)
                .map(|(name, g)| Candidate { name: name.clone(), g })
                .collect();
            Ok(Outcome::Screening {
                entries: iv_screening(&sample, &candidates, estimator)?,
            })
        }
    }
}

/// Resolves, executes and times one command.
pub fn run_report(invocation: Invocation, seed: u64, side: &SideOutputs) -> CliResult<RunReport> {
    let start = Instant::now();
    let result = execute(&invocation, side)?;
    Ok(RunReport::new(seed, invocation, result, start.elapsed().as_secs_f64()))
}

/// Re-executes the invocation of a stored report with its seed.
pub fn rerun(path: &Path, check: bool) -> CliResult<RunReport> {
    let previous = RunReport::from_json(&read_text(path)?)?;
    let report = run_report(previous.invocation.clone(), previous.seed, &SideOutputs::default())?;
    if check {
        let old = serde_json::to_value(&previous.result).map_err(|e| CliError::Data(e.to_string()))?;
        let new = serde_json::to_value(&report.result).map_err(|e| CliError::Data(e.to_string()))?;
        if old != new {
            return Err(CliError::Mismatch(format!("{} differs from the recorded result", path.display())));
        }
    }
    Ok(report)
}
