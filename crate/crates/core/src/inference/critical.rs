//! Empirical critical values.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{EwpoError, Result};
use crate::inference::brownian::{simulate_prop1_ratio, simulate_prop2_null, BrownianSimConfig};
use crate::stats::{quantile_sorted, sorted_copy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CvSource {
    Prop1Ratio,
    Prop2Statistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub alpha: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValueTable {
    /// Sorted by ascending alpha.
    pub rows: Vec<CvRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<CvSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<BrownianSimConfig>,
}

impl CriticalValueTable {
    pub fn row(&self, alpha: f64) -> Option<&CvRow> {
        self.rows.iter().find(|r| (r.alpha - alpha).abs() < 1e-12)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,lower,upper\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.alpha, r.lower, r.upper);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialises")
    }
}

/// Two-sided bounds per alpha: the interpolated α/2 and 1 - α/2 quantiles of `draws`.
pub fn critical_values(draws: &[f64], alphas: &[f64]) -> Result<CriticalValueTable> {
    if draws.is_empty() {
        return Err(EwpoError::InsufficientObservations { need: 1, got: 0 });
    }
    if let Some(index) = draws.iter().position(|v| !v.is_finite()) {
        return Err(EwpoError::NonFinite { field: "draws", index });
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 0.5)) {
        return Err(EwpoError::config(format!("alpha = {a} must lie in (0, 0.5)")));
    }
    let sorted = sorted_copy(draws);
    let mut alphas = alphas.to_vec();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let rows = alphas
        .into_iter()
        .map(|alpha| CvRow {
            alpha,
            lower: quantile_sorted(&sorted, alpha / 2.0),
            upper: quantile_sorted(&sorted, 1.0 - alpha / 2.0),
        })
        .collect();
    Ok(CriticalValueTable {
        rows,
        source: None,
        config: None,
    })
}

pub fn simulate_critical_values(
    source: CvSource,
    cfg: &BrownianSimConfig,
    alphas: &[f64],
) -> Result<CriticalValueTable> {
    let draws = match source {
        CvSource::Prop1Ratio => simulate_prop1_ratio(cfg)?,
        CvSource::Prop2Statistic => simulate_prop2_null(cfg)?,
    };
    let mut table = critical_values(&draws, alphas)?;
    table.source = Some(source);
    table.config = Some(*cfg);
    Ok(table)
}
