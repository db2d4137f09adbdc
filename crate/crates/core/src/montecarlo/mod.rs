//! Data-generating processes and replication runner.

mod experiment;
mod targets;

pub use experiment::{
    run_cell, run_experiment, run_experiment_with_draws, ExperimentSpec, NormalParam, NullSettings, SummaryRow, SummaryTable,
};
pub use targets::{
    BiasCorrectedDist, CovStatDist, CovTestRejection, EstimatorDist, InterceptDist, McTarget, RepContext,
    ResidualMeanDist, ResidualTestRejection, TargetRegistry,
};

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{EwpoError, Result};
use crate::rng::{task_rng, TaskRng};
use crate::sample::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "kebab-case")]
pub enum XDist {
    /// Support `[a, b)`.
    Uniform { a: f64, b: f64 },
    Normal { mean: f64, variance: f64 },
}

impl XDist {
    pub fn mean(&self) -> f64 {
        match *self {
            XDist::Uniform { a, b } => 0.5 * (a + b),
            XDist::Normal { mean, .. } => mean,
        }
    }

    pub fn sd(&self) -> f64 {
        match *self {
            XDist::Uniform { a, b } => (b - a) / 12f64.sqrt(),
            XDist::Normal { variance, .. } => variance.sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            XDist::Uniform { a, b } if !(a < b && a.is_finite() && b.is_finite()) => {
                Err(EwpoError::config(format!("uniform x needs finite a < b, got ({a}, {b})")))
            }
            XDist::Normal { mean, variance } if !(variance > 0.0 && variance.is_finite() && mean.is_finite()) => {
                Err(EwpoError::config(format!("normal x needs finite mean and positive variance, got {variance}")))
            }
            _ => Ok(()),
        }
    }

    fn draw(&self, n: usize, rng: &mut TaskRng) -> Vec<f64> {
        match *self {
            XDist::Uniform { a, b } => {
                let d = Uniform::new(a, b).expect("validated bounds");
                (0..n).map(|_| d.sample(rng)).collect()
            }
            XDist::Normal { mean, variance } => {
                let d = Normal::new(mean, variance.sqrt()).expect("validated variance");
                (0..n).map(|_| d.sample(rng)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "kebab-case")]
pub enum UDist {
    Normal {
        variance: f64,
    },
    /// `ξ + λ|v| + z` with `v ~ N(0, 1)`, `z ~ N(0, variance)` and
    /// `ξ = -λ√(2/π)` centering the draw.
    SkewedNormal {
        #[serde(default = "one")]
        lambda: f64,
        #[serde(default = "one")]
        variance: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl UDist {
    pub fn standard_normal() -> Self {
        UDist::Normal { variance: 1.0 }
    }

    fn variance(&self) -> f64 {
        match *self {
            UDist::Normal { variance } | UDist::SkewedNormal { variance, .. } => variance,
        }
    }

    fn validate(&self) -> Result<()> {
        let v = self.variance();
        if !(v > 0.0 && v.is_finite()) {
            return Err(EwpoError::config(format!("noise variance must be positive, got {v}")));
        }
        if let UDist::SkewedNormal { lambda, .. } = *self {
            if !lambda.is_finite() {
                return Err(EwpoError::config("skewed-normal lambda must be finite"));
            }
        }
        Ok(())
    }

    fn draw(&self, n: usize, rng: &mut TaskRng) -> Vec<f64> {
        let sd = self.variance().sqrt();
        match *self {
            UDist::Normal { .. } => (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect(),
            UDist::SkewedNormal { lambda, .. } => {
                let xi = -lambda * (2.0 / std::f64::consts::PI).sqrt();
                (0..n)
                    .map(|_| {
                        let v: f64 = rng.sample(StandardNormal);
                        let z: f64 = rng.sample(StandardNormal);
                        xi + lambda * v.abs() + sd * z
                    })
                    .collect()
            }
        }
    }
}

/// `y = β₀ + β₁ x + u` with `corr(x, u) = ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub beta0: f64,
    pub beta1: f64,
    pub x_dist: XDist,
    pub u_dist: UDist,
    #[serde(default)]
    pub rho: f64,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

/// A generated sample together with its disturbances.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub sample: Sample,
    pub u: Vec<f64>,
}

impl DgpSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(EwpoError::InsufficientObservations { need: 2, got: self.n });
        }
        if !(self.rho.abs() < 1.0) {
            return Err(EwpoError::config(format!("rho = {} must satisfy |rho| < 1", self.rho)));
        }
        if self.rho != 0.0 && matches!(self.u_dist, UDist::SkewedNormal { .. }) {
            return Err(EwpoError::config("correlation induction defined for normal noise only"));
        }
        if !(self.beta0.is_finite() && self.beta1.is_finite()) {
            return Err(EwpoError::config("coefficients must be finite"));
        }
        self.x_dist.validate()?;
        self.u_dist.validate()
    }

    /// Row label used in summary tables: `Exogen` for ρ = 0.
    pub fn label(&self) -> String {
        if self.rho == 0.0 {
            "Exogen".to_string()
        } else {
            format!("{}", self.rho)
        }
    }

    /// Draws x, then u; with ρ ≠ 0 the noise becomes
    /// `ρ (σ_u/σ_x)(x - μ_x) + √(1 - ρ²) u₀` using population moments of x.
    pub fn draw(&self, rng: &mut TaskRng) -> Result<Draw> {
        self.validate()?;
        let x = self.x_dist.draw(self.n, rng);
        let mut u = self.u_dist.draw(self.n, rng);
        if self.rho != 0.0 {
            let (mx, sx) = (self.x_dist.mean(), self.x_dist.sd());
            let su = self.u_dist.variance().sqrt();
            let c = (1.0 - self.rho * self.rho).sqrt();
            for (u, x) in u.iter_mut().zip(&x) {
                *u = self.rho * (su / sx) * (x - mx) + c * *u;
            }
        }
        let y = x.iter().zip(&u).map(|(x, u)| self.beta0 + self.beta1 * x + u).collect();
        Ok(Draw {
            sample: Sample::new(x, y)?,
            u,
        })
    }
}

/// One sample from `spec`, using stream 0 of `spec.seed`.
pub fn generate(spec: &DgpSpec) -> Result<Sample> {
    Ok(spec.draw(&mut task_rng(spec.seed, 0))?.sample)
}
