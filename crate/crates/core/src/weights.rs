//! Pair weighting schemes.
//!
//! Each scheme is a [`PairWeight`] strategy. The built-ins are reachable both
//! through the [`WeightKind`] tag stored in configurations and by name through
//! a [`WeightRegistry`], which front ends use to resolve user input.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{EwpoError, Result};
use crate::kernel::{self, Method, PairSums};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightKind {
    /// `x_i - x_j`, signed by pair orientation.
    #[serde(rename = "dx")]
    DeltaX,
    /// `|x_i - x_j|`
    #[serde(rename = "absdx")]
    AbsDeltaX,
    /// `sqrt(Δx² + Δy²)`
    #[serde(rename = "euclid")]
    Euclidean,
    /// `sqrt(|Δx|)`
    #[serde(rename = "sqrtabsdx")]
    SqrtAbsDeltaX,
}

impl WeightKind {
    pub const ALL: [WeightKind; 4] = [
        WeightKind::DeltaX,
        WeightKind::AbsDeltaX,
        WeightKind::Euclidean,
        WeightKind::SqrtAbsDeltaX,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeightKind::DeltaX => "dx",
            WeightKind::AbsDeltaX => "absdx",
            WeightKind::Euclidean => "euclid",
            WeightKind::SqrtAbsDeltaX => "sqrtabsdx",
        }
    }

    /// The built-in strategy for this tag.
    pub fn strategy(self) -> &'static dyn PairWeight {
        match self {
            WeightKind::DeltaX => &DeltaX,
            WeightKind::AbsDeltaX => &AbsDeltaX,
            WeightKind::Euclidean => &Euclidean,
            WeightKind::SqrtAbsDeltaX => &SqrtAbsDeltaX,
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for WeightKind {
    type Err = EwpoError;

    fn from_str(s: &str) -> Result<Self> {
        WeightRegistry::builtin().get(s).map(|w| w.kind())
    }
}

/// A weighting scheme for pairwise parameters.
pub trait PairWeight: Send + Sync + fmt::Debug {
    fn kind(&self) -> WeightKind;

    fn name(&self) -> &'static str {
        self.kind().name()
    }

    /// Weight of a pair from its oriented differences.
    fn weight(&self, dx: f64, dy: f64) -> f64;

    /// Exact full-pairwise sums over the arrangement `xs`, `ys` without pair
    /// iteration, when the scheme admits one.
    fn full_pairwise_closed_form(&self, _xs: &[f64], _ys: &[f64], _method: Method) -> Option<PairSums> {
        None
    }

    /// Whether the weight is invariant to affine maps `y -> a + b y`.
    fn y_equivariant(&self) -> bool {
        true
    }

    /// Short caveat to surface alongside results, if any.
    fn caveat(&self) -> Option<&'static str> {
        None
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DeltaX;

impl PairWeight for DeltaX {
    fn kind(&self) -> WeightKind {
        WeightKind::DeltaX
    }

    #[inline]
    fn weight(&self, dx: f64, _dy: f64) -> f64 {
        dx
    }

    fn full_pairwise_closed_form(&self, xs: &[f64], ys: &[f64], method: Method) -> Option<PairSums> {
        Some(match method {
            Method::WeightedAverage => kernel::signed_dx_sums(xs, ys),
            Method::QuadraticLoss => kernel::cross_moment_sums(xs, ys),
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AbsDeltaX;

impl PairWeight for AbsDeltaX {
    fn kind(&self) -> WeightKind {
        WeightKind::AbsDeltaX
    }

    #[inline]
    fn weight(&self, dx: f64, _dy: f64) -> f64 {
        dx.abs()
    }

    fn full_pairwise_closed_form(&self, xs: &[f64], ys: &[f64], method: Method) -> Option<PairSums> {
        Some(match method {
            Method::WeightedAverage => kernel::abs_dx_sums(xs, ys),
            Method::QuadraticLoss => kernel::cross_moment_sums(xs, ys),
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl PairWeight for Euclidean {
    fn kind(&self) -> WeightKind {
        WeightKind::Euclidean
    }

    #[inline]
    fn weight(&self, dx: f64, dy: f64) -> f64 {
        dx.hypot(dy)
    }

    fn y_equivariant(&self) -> bool {
        false
    }

    fn caveat(&self) -> Option<&'static str> {
        Some("euclidean weights have no analytic consistency result; simulation-supported only")
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SqrtAbsDeltaX;

impl PairWeight for SqrtAbsDeltaX {
    fn kind(&self) -> WeightKind {
        WeightKind::SqrtAbsDeltaX
    }

    #[inline]
    fn weight(&self, dx: f64, _dy: f64) -> f64 {
        dx.abs().sqrt()
    }

    fn full_pairwise_closed_form(&self, xs: &[f64], ys: &[f64], method: Method) -> Option<PairSums> {
        // Squared, the weight is |Δx|: the loss form is the |Δx| weighted average.
        match method {
            Method::QuadraticLoss => Some(kernel::abs_dx_sums(xs, ys)),
            Method::WeightedAverage => None,
        }
    }
}

/// Name-indexed collection of weighting strategies.
#[derive(Debug, Clone, Default)]
pub struct WeightRegistry {
    entries: BTreeMap<String, Arc<dyn PairWeight>>,
}

impl WeightRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the four built-in schemes under their short names.
    pub fn builtin() -> Self {
        let mut reg = Self::new();
        reg.register(Arc::new(DeltaX));
        reg.register(Arc::new(AbsDeltaX));
        reg.register(Arc::new(Euclidean));
        reg.register(Arc::new(SqrtAbsDeltaX));
        reg
    }

    pub fn register(&mut self, weight: Arc<dyn PairWeight>) -> Option<Arc<dyn PairWeight>> {
        self.entries.insert(weight.name().to_string(), weight)
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn PairWeight>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| EwpoError::UnknownStrategy {
                what: "weight",
                name: name.to_string(),
                options: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}
