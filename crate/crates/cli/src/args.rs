use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ewpo_core::{EstimatorConfig, InterceptMode, Kernel, Method, PairKind, PairScheme, WeightKind};

use crate::dataset::DataSelection;

#[derive(Debug, Parser)]
#[command(name = "ewpo", version, about = "Pairwise-observation regression estimators and endogeneity tests")]
pub struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for simulations and resampling.
    #[arg(long, global = true, env = "EWPO_THREADS")]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Text)]
    pub out: OutFormat,

    #[command(subcommand)]
    pub command: Command,
}

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the pairwise estimator; several --x columns give the multivariate fit.
    Estimate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
    /// Endogeneity test on the residuals of a fit.
    Test {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        estimator: EstimatorArgs,
        #[arg(long, value_enum, default_value_t = KindArg::Covariance)]
        kind: KindArg,
        /// Defaults to `t` for the residual test and `jackknife` for the covariance test.
        #[arg(long, value_enum)]
        null: Option<NullArg>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = TailArg::TwoSided)]
        tail: TailArg,
        /// Observations deleted per jackknife replicate (default ⌈n/2⌉).
        #[arg(long)]
        d: Option<usize>,
        /// Jackknife replicates.
        #[arg(long, default_value_t = 1000)]
        jk_reps: usize,
        /// Grid steps of the Brownian simulation.
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Brownian null replications.
        #[arg(long, default_value_t = 50_000)]
        sim_reps: usize,
    },
    /// Delete-d jackknife interval for the slope.
    Jackknife {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        estimator: EstimatorArgs,
        /// Observations deleted per replicate (default ⌈n/2⌉).
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Simulated critical values of the Brownian limit laws.
    SimulateCv {
        /// 1: slope ratio law, 2: covariance statistic null.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        prop: u8,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 50_000)]
        reps: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.10,0.05,0.01")]
        alphas: Vec<f64>,
        /// Also write every simulated draw to this CSV file.
        #[arg(long)]
        draws: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment described by a TOML or JSON file.
    Montecarlo {
        #[arg(long)]
        spec: PathBuf,
        /// Also write replicate values (one row per replicate and cell) to this CSV file.
        #[arg(long)]
        draws: Option<PathBuf>,
    },
    /// Rank candidate transforms g by the covariance statistic of the model divided by g.
    IvScreen {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        estimator: EstimatorArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        candidates: Vec<String>,
    },
    /// Re-run the command recorded in a JSON report.
    Rerun {
        report: PathBuf,
        /// Fail unless every number matches the recorded result.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "y")]
    pub y: String,
    /// Regressor column(s), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "x")]
    pub x: Vec<String>,
}

impl DataArgs {
    pub fn selection(&self) -> DataSelection {
        DataSelection {
            path: self.data.to_string_lossy().into_owned(),
            y: self.y.clone(),
            x: self.x.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EstimatorArgs {
    #[arg(long, value_enum, default_value_t = SchemeArg::Full)]
    pub scheme: SchemeArg,
    /// Sort observations by x before pairing.
    #[arg(long)]
    pub sorted: bool,
    #[arg(long, default_value = "absdx", value_parser = parse_weight)]
    pub weight: WeightKind,
    #[arg(long, value_enum, default_value_t = MethodArg::Avg)]
    pub method: MethodArg,
    /// Fit without intercept.
    #[arg(long, conflicts_with = "intercept")]
    pub no_intercept: bool,
    #[arg(long, value_enum)]
    pub intercept: Option<InterceptArg>,
    #[arg(long, value_enum, default_value_t = KernelArg::Auto, hide = true)]
    pub kernel: KernelArg,
}

fn parse_weight(s: &str) -> Result<WeightKind, String> {
    s.parse().map_err(|e: ewpo_core::EwpoError| e.to_string())
}

impl EstimatorArgs {
    /// Intercept mode given explicitly, if any.
    pub fn explicit_intercept(&self) -> Option<InterceptMode> {
        if self.no_intercept {
            return Some(InterceptMode::Zero);
        }
        self.intercept.map(|i| match i {
            InterceptArg::Means => InterceptMode::Means,
            InterceptArg::Weighted => InterceptMode::Weighted,
            InterceptArg::Zero => InterceptMode::Zero,
        })
    }

    pub fn config(&self, default_intercept: InterceptMode) -> EstimatorConfig {
        let kind = match self.scheme {
            SchemeArg::Adjacent => PairKind::Adjacent,
            SchemeArg::Full => PairKind::FullPairwise,
        };
        let method = match self.method {
            MethodArg::Avg => Method::WeightedAverage,
            MethodArg::Loss => Method::QuadraticLoss,
        };
        let kernel = match self.kernel {
            KernelArg::Auto => Kernel::Auto,
            KernelArg::Streaming => Kernel::Streaming,
        };
        EstimatorConfig::new(PairScheme::new(kind, self.sorted), self.weight, method)
            .with_intercept(self.explicit_intercept().unwrap_or(default_intercept))
            .with_kernel(kernel)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Adjacent,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Avg,
    Loss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InterceptArg {
    Means,
    Weighted,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Auto,
    Streaming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Residual,
    Covariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NullArg {
    T,
    Brownian,
    Jackknife,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailArg {
    TwoSided,
    Lower,
}
