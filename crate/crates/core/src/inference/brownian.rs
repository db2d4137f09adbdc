//! Discretised functionals of two independent standard Brownian motions.
//!
//! Both walks take `steps` Gaussian increments of variance `1/steps`:
//! `B_p = Σ_{q≤p} ε_q / √steps`. Time integrals are right-point Riemann sums
//! `(1/steps) Σ B_p`, stochastic integrals are left-point (Itô) sums
//! `Σ B_{p-1} (W_p - W_{p-1})`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EwpoError, Result};
use crate::rng::{task_rng, TaskRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrownianSimConfig {
    pub steps: usize,
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub sigma_x: f64,
    #[serde(default = "one")]
    pub sigma_u: f64,
}

fn one() -> f64 {
    1.0
}

impl BrownianSimConfig {
    pub fn new(steps: usize, reps: usize, seed: u64) -> Self {
        Self {
            steps,
            reps,
            seed,
            sigma_x: 1.0,
            sigma_u: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 100 {
            return Err(EwpoError::config(format!("steps = {} must be at least 100", self.steps)));
        }
        if self.reps < 1000 {
            return Err(EwpoError::config(format!("reps = {} must be at least 1000", self.reps)));
        }
        if !(self.sigma_x > 0.0 && self.sigma_u > 0.0 && self.sigma_x.is_finite() && self.sigma_u.is_finite()) {
            return Err(EwpoError::config("sigma_x and sigma_u must be positive and finite"));
        }
        Ok(())
    }
}

/// One joint draw of the functionals of `B` and `W` entering the limit laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrownianFunctionals {
    pub b1: f64,
    pub w1: f64,
    /// `∫ B dλ`
    pub int_b: f64,
    /// `∫ W dλ`
    pub int_w: f64,
    /// `∫ B W dλ`
    pub int_bw: f64,
    /// `∫ B dW`
    pub int_b_dw: f64,
    /// `∫ W dB`
    pub int_w_db: f64,
}

impl BrownianFunctionals {
    /// `(W(1) - 2∫W) / (B(1) - 2∫B)`, the limit of the Δx-weighted full-pairwise slope error.
    pub fn prop1_ratio(&self) -> f64 {
        (self.w1 - 2.0 * self.int_w) / (self.b1 - 2.0 * self.int_b)
    }

    /// `B(1)W(1) + ∫BW - ∫B dW - ∫W dB - B(1)² · ratio`, the unit-scale
    /// limit of the covariance statistic under Δx weights.
    pub fn prop2_statistic(&self) -> f64 {
        self.b1 * self.w1 + self.int_bw - self.int_b_dw - self.int_w_db - self.b1 * self.b1 * self.prop1_ratio()
    }
}

pub fn simulate_functionals(steps: usize, rng: &mut TaskRng) -> BrownianFunctionals {
    let scale = 1.0 / (steps as f64).sqrt();
    let (mut b, mut w) = (0.0f64, 0.0f64);
    let (mut sum_b, mut sum_w, mut sum_bw, mut b_dw, mut w_db) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..steps {
        let db = rng.sample::<f64, _>(StandardNormal) * scale;
        let dw = rng.sample::<f64, _>(StandardNormal) * scale;
        b_dw += b * dw;
        w_db += w * db;
        b += db;
        w += dw;
        sum_b += b;
        sum_w += w;
        sum_bw += b * w;
    }
    let h = 1.0 / steps as f64;
    BrownianFunctionals {
        b1: b,
        w1: w,
        int_b: sum_b * h,
        int_w: sum_w * h,
        int_bw: sum_bw * h,
        int_b_dw: b_dw,
        int_w_db: w_db,
    }
}

/// `cfg.reps` independent draws; draw r uses stream r of `cfg.seed`.
pub fn simulate_functional_draws(cfg: &BrownianSimConfig) -> Result<Vec<BrownianFunctionals>> {
    cfg.validate()?;
    Ok((0..cfg.reps)
        .into_par_iter()
        .map(|r| simulate_functionals(cfg.steps, &mut task_rng(cfg.seed, r as u64)))
        .collect())
}

/// Draws of the slope-error limit, scaled by `σ_u / σ_x`.
pub fn simulate_prop1_ratio(cfg: &BrownianSimConfig) -> Result<Vec<f64>> {
    let scale = cfg.sigma_u / cfg.sigma_x;
    Ok(simulate_functional_draws(cfg)?
        .iter()
        .map(|f| scale * f.prop1_ratio())
        .collect())
}

/// Draws of the covariance-statistic limit, scaled by `σ_x σ_u`.
pub fn simulate_prop2_null(cfg: &BrownianSimConfig) -> Result<Vec<f64>> {
    let scale = cfg.sigma_x * cfg.sigma_u;
    Ok(simulate_functional_draws(cfg)?
        .iter()
        .map(|f| scale * f.prop2_statistic())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Moments;

    #[test]
    fn determinism() {
        let cfg = BrownianSimConfig::new(200, 1000, 5);
        assert_eq!(simulate_prop2_null(&cfg).unwrap(), simulate_prop2_null(&cfg).unwrap());
        let other = BrownianSimConfig { seed: 6, ..cfg };
        assert_ne!(simulate_prop1_ratio(&cfg).unwrap(), simulate_prop1_ratio(&other).unwrap());
    }

    #[test]
    fn config_bounds() {
        assert!(BrownianSimConfig::new(99, 1000, 0).validate().is_err());
        assert!(BrownianSimConfig::new(100, 999, 0).validate().is_err());
        let mut c = BrownianSimConfig::new(100, 1000, 0);
        c.sigma_u = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn sigma_scaling() {
        let unit = BrownianSimConfig::new(100, 1000, 2);
        let scaled = BrownianSimConfig { sigma_x: 2.0, sigma_u: 3.0, ..unit };
        let a = simulate_prop2_null(&unit).unwrap();
        let b = simulate_prop2_null(&scaled).unwrap();
        assert!(a.iter().zip(&b).all(|(a, b)| (6.0 * a - b).abs() <= 1e-12 * b.abs().max(1.0)));
        let a = simulate_prop1_ratio(&unit).unwrap();
        let b = simulate_prop1_ratio(&scaled).unwrap();
        assert!(a.iter().zip(&b).all(|(a, b)| (1.5 * a - b).abs() <= 1e-12 * b.abs().max(1.0)));
    }

    #[test]
    fn endpoint_moments() {
        let draws = simulate_functional_draws(&BrownianSimConfig::new(200, 20_000, 17)).unwrap();
        let b1: Vec<f64> = draws.iter().map(|f| f.b1).collect();
        let m = Moments::of(&b1).unwrap();
        assert!(m.mean.abs() < 4.0 * m.std_error());
        assert!((m.variance - 1.0).abs() < 0.05);
        let prod: Vec<f64> = draws.iter().map(|f| f.b1 * f.w1).collect();
        let m = Moments::of(&prod).unwrap();
        assert!(m.mean.abs() < 3.0 * m.std_error());
    }

    #[test]
    fn ito_identity_holds_pathwise() {
        // ∫W dB + ∫B dW = B(1)W(1) - Σ ΔB ΔW, and the bracket is O(1/√steps)
        let f = simulate_functionals(10_000, &mut task_rng(1, 0));
        let resid = f.b1 * f.w1 - f.int_w_db - f.int_b_dw;
        assert!(resid.abs() < 0.1, "{resid}");
    }
}
