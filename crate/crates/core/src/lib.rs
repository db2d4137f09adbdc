//! Linear regression estimators built from pairwise observations.
//!
//! A sample of paired observations is turned into pairwise slopes (adjacent or
//! full-pairwise, optionally after sorting on x) which are combined by a
//! weighted average or a quadratic loss. Around the estimators sit a
//! multivariate extension through residual makers, endogeneity tests on the
//! residuals, jackknife intervals, Brownian-functional simulators for the
//! non-standard null laws, and a Monte Carlo harness.

pub mod endogeneity;
pub mod error;
pub mod estimators;
pub mod inference;
pub mod kernel;
pub mod montecarlo;
pub mod multivariate;
pub mod pairs;
pub mod rng;
pub mod sample;
pub mod stats;
pub mod summation;
pub mod weights;

pub use error::{ErrorClass, EwpoError, Result};
pub use estimators::{
    estimate_intercept_from_means, estimate_intercept_weighted, estimate_slope, fit, EstimatorConfig,
    FitResult, InterceptMode,
};
pub use kernel::{Kernel, Method};
pub use pairs::{enumerate_pairs, pairwise_intercept, pairwise_slope, PairIndex, PairKind, PairScheme};
pub use sample::Sample;
pub use weights::{PairWeight, WeightKind, WeightRegistry};

/// Weight of a pair under a built-in scheme, oriented as `x_i - x_j`.
pub fn pair_weight(kind: WeightKind, sample: &Sample, pair: PairIndex) -> f64 {
    let (x, y) = (sample.x(), sample.y());
    kind.strategy()
        .weight(x[pair.i] - x[pair.j], y[pair.i] - y[pair.j])
}
