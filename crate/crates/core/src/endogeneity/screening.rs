//! Choosing among instrument-transformed models by the covariance statistic.

use serde::{Deserialize, Serialize};

use crate::endogeneity::covariance_statistic;
use crate::error::{EwpoError, Result};
use crate::estimators::{fit, EstimatorConfig};
use crate::sample::Sample;

/// A candidate transform `g`: the model is re-estimated on `(g x, g y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub name: String,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningEntry {
    pub name: String,
    /// Position in the input (0 is the untransformed model).
    pub index: usize,
    pub statistic: Option<f64>,
    pub feasible: bool,
    pub selected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub const UNTRANSFORMED: &str = "untransformed";

/// Ranks the untransformed model and every candidate by `|S|`, smallest first.
///
/// Ties keep input order; candidates whose transformed sample cannot be
/// estimated are listed last as infeasible. The first entry is selected.
pub fn iv_screening(sample: &Sample, candidates: &[Candidate], config: &EstimatorConfig) -> Result<Vec<ScreeningEntry>> {
    let n = sample.len();
    if let Some(bad) = candidates.iter().find(|c| c.g.len() != n) {
        return Err(EwpoError::config(format!(
            "candidate `{}` has {} values for {n} observations",
            bad.name,
            bad.g.len()
        )));
    }
    let statistic = |s: &Sample| -> Result<f64> { Ok(covariance_statistic(s, &fit(s, config)?)) };
    let mut entries = vec![ScreeningEntry {
        name: UNTRANSFORMED.to_string(),
        index: 0,
        statistic: Some(statistic(sample)?),
        feasible: true,
        selected: false,
        error: None,
    }];
    for (k, c) in candidates.iter().enumerate() {
        let result = sample.scaled_by(&c.g).and_then(|s| statistic(&s));
        entries.push(ScreeningEntry {
            name: c.name.clone(),
            index: k + 1,
            feasible: result.is_ok(),
            error: result.as_ref().err().map(|e| e.to_string()),
            statistic: result.ok(),
            selected: false,
        });
    }
    entries.sort_by(|a, b| match (a.statistic, b.statistic) {
        (Some(x), Some(y)) => x.abs().total_cmp(&y.abs()),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    entries[0].selected = true;
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Sample {
        Sample::new(
            vec![0.3, -1.2, 2.2, 0.9, 4.0, -0.5, 1.1],
            vec![1.0, -0.3, 2.5, 0.1, 3.3, 0.4, 2.0],
        )
        .unwrap()
    }

    #[test]
    fn identity_candidate_ties_with_untransformed() {
        let s = sample();
        let ones = Candidate { name: "ones".into(), g: vec![1.0; 7] };
        let out = iv_screening(&s, &[ones], &EstimatorConfig::default()).unwrap();
        assert_eq!(out[0].name, UNTRANSFORMED);
        assert!(out[0].selected && !out[1].selected);
        assert_eq!(out[0].statistic, out[1].statistic);
    }

    #[test]
    fn degenerate_candidate_is_infeasible() {
        let s = sample();
        let zeros = Candidate { name: "zeros".into(), g: vec![0.0; 7] };
        let scale = Candidate { name: "scale".into(), g: (1..=7).map(|v| v as f64).collect() };
        let out = iv_screening(&s, &[zeros, scale], &EstimatorConfig::default()).unwrap();
        let last = out.last().unwrap();
        assert_eq!(last.name, "zeros");
        assert!(!last.feasible && last.error.is_some());
        assert!(out.iter().filter(|e| e.selected).count() == 1);
        assert!(iv_screening(&s, &[Candidate { name: "short".into(), g: vec![1.0] }], &EstimatorConfig::default()).is_err());
    }
}
