//! K-regressor estimator: each coefficient is a univariate pairwise estimate on
//! the regressor and response after partialling out the other regressors and
//! the constant.
//!
//! Two pipelines compute the same thing. The implicit one partials through a
//! QR factorisation and streams pairs; the dense one materialises the residual
//! maker, the sort selection and the difference matrix, and is meant for small
//! n as a cross-check.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{EwpoError, Result};
use crate::estimators::{self, EstimatorConfig};
use crate::pairs::{arrangement, PairKind, PairScheme};
use crate::sample::Sample;
use crate::summation::NeumaierSum;

/// Largest n for which a dense difference matrix is built.
pub const DENSE_GUARD: usize = 512;

/// Minimum ratio of smallest to largest singular value of `[1, X_{-k}]`.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Regressors (without the constant column) and response.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl DesignMatrix {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let (n, k) = x.shape();
        if y.len() != n {
            return Err(EwpoError::LengthMismatch { x: n, y: y.len() });
        }
        if k == 0 {
            return Err(EwpoError::config("design needs at least one regressor"));
        }
        if n <= k + 1 {
            return Err(EwpoError::InsufficientObservations { need: k + 2, got: n });
        }
        for c in 0..k {
            if let Some(index) = x.column(c).iter().position(|v| !v.is_finite()) {
                return Err(EwpoError::NonFinite { field: "x", index });
            }
        }
        if let Some(index) = y.iter().position(|v| !v.is_finite()) {
            return Err(EwpoError::NonFinite { field: "y", index });
        }
        Ok(Self { x, y })
    }

    /// Builds a design from regressor columns.
    pub fn from_columns(columns: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        if let Some(bad) = columns.iter().find(|c| c.len() != n) {
            return Err(EwpoError::LengthMismatch { x: bad.len(), y: n });
        }
        let x = DMatrix::from_fn(n, columns.len(), |i, c| columns[c][i]);
        Self::new(x, DVector::from_vec(y))
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// `[1, X_{-k}]`
    fn others_with_constant(&self, k: usize) -> DMatrix<f64> {
        others_with_constant(&self.x, k)
    }
}

fn others_with_constant(x: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    x.clone().remove_column(k).insert_column(0, 1.0)
}

fn check_rank(z: &DMatrix<f64>, k: usize) -> Result<()> {
    let sv = z.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if !(ratio > RANK_TOLERANCE) {
        return Err(EwpoError::CollinearRegressors { k, ratio });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    /// Pairs are streamed; nothing of size n² is stored.
    #[default]
    Implicit,
    /// Explicit difference matrix, limited to n ≤ [`DENSE_GUARD`].
    Dense,
}

/// Difference operator `D` of a pair scheme over positions `0..n`.
///
/// Each dense row holds a single +1 (later position) and -1 (earlier
/// position), in canonical pair order.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceOperator {
    pub scheme: PairScheme,
    pub n: usize,
    pub representation: Representation,
    dense: Option<DMatrix<f64>>,
}

impl DifferenceOperator {
    pub fn implicit(scheme: PairScheme, n: usize) -> Self {
        Self {
            scheme,
            n,
            representation: Representation::Implicit,
            dense: None,
        }
    }

    pub fn matrix(&self) -> Option<&DMatrix<f64>> {
        self.dense.as_ref()
    }

    pub fn rows(&self) -> usize {
        self.scheme.pair_count(self.n)
    }

    /// `D v`, the pair differences of `v` in canonical order.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n {
            return Err(EwpoError::LengthMismatch { x: self.n, y: v.len() });
        }
        if let Some(d) = &self.dense {
            return Ok((d * DVector::from_column_slice(v)).iter().copied().collect());
        }
        Ok(position_pairs(self.scheme.kind, self.n)
            .map(|(i, j)| v[i] - v[j])
            .collect())
    }
}

fn position_pairs(kind: PairKind, n: usize) -> Box<dyn Iterator<Item = (usize, usize)>> {
    match kind {
        PairKind::Adjacent => Box::new((1..n).map(|i| (i, i - 1))),
        PairKind::FullPairwise => Box::new((1..n).flat_map(|i| (0..i).map(move |j| (i, j)))),
    }
}

pub fn build_difference_matrix(scheme: PairScheme, n: usize) -> Result<DifferenceOperator> {
    build_difference_matrix_with_guard(scheme, n, DENSE_GUARD)
}

pub fn build_difference_matrix_with_guard(
    scheme: PairScheme,
    n: usize,
    guard: usize,
) -> Result<DifferenceOperator> {
    if n < 2 {
        return Err(EwpoError::InsufficientObservations { need: 2, got: n });
    }
    if n > guard {
        return Err(EwpoError::config(format!(
            "dense difference matrix requested for n = {n} above the limit {guard}; use the implicit representation"
        )));
    }
    let mut d = DMatrix::zeros(scheme.pair_count(n), n);
    for (row, (i, j)) in position_pairs(scheme.kind, n).enumerate() {
        d[(row, i)] = 1.0;
        d[(row, j)] = -1.0;
    }
    Ok(DifferenceOperator {
        scheme,
        n,
        representation: Representation::Dense,
        dense: Some(d),
    })
}

/// Permutation matrix `S(v)` with `S v` in ascending (stable) order.
pub fn selection_matrix(v: &[f64]) -> DMatrix<f64> {
    let order = arrangement(v, true);
    let mut s = DMatrix::zeros(v.len(), v.len());
    for (pos, &orig) in order.iter().enumerate() {
        s[(pos, orig)] = 1.0;
    }
    s
}

/// `M_k = I - Z (Z'Z)^{-1} Z'` with `Z = [1, X_{-k}]`.
pub fn residual_maker(x: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    if k >= x.ncols() {
        return Err(EwpoError::config(format!(
            "regressor index {k} out of range for {} columns",
            x.ncols()
        )));
    }
    let z = others_with_constant(x, k);
    check_rank(&z, k)?;
    let ztz_inv = (z.transpose() * &z)
        .try_inverse()
        .ok_or(EwpoError::CollinearRegressors { k, ratio: 0.0 })?;
    let n = x.nrows();
    Ok(DMatrix::identity(n, n) - &z * ztz_inv * z.transpose())
}

/// Partialled regressor `M_k x_k` and response `M_k y`.
///
/// The implicit route takes residuals from a QR factorisation of `[1, X_{-k}]`;
/// the dense route multiplies by the explicit residual maker.
pub fn partialled(design: &DesignMatrix, k: usize, representation: Representation) -> Result<(Vec<f64>, Vec<f64>)> {
    if k >= design.k() {
        return Err(EwpoError::config(format!("regressor index {k} out of range for {} columns", design.k())));
    }
    let xk = design.x.column(k).into_owned();
    let (xt, yt) = partialled_unchecked(design, k, xk.clone(), representation)?;
    // A regressor explained by the others leaves only roundoff behind.
    let centered = xk.add_scalar(-xk.mean()).norm();
    let left = xt.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(left > RANK_TOLERANCE * centered) {
        let ratio = if centered > 0.0 { left / centered } else { 0.0 };
        return Err(EwpoError::CollinearRegressors { k, ratio });
    }
    Ok((xt, yt))
}

fn partialled_unchecked(
    design: &DesignMatrix,
    k: usize,
    xk: DVector<f64>,
    representation: Representation,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match representation {
        Representation::Implicit => {
            let z = design.others_with_constant(k);
            check_rank(&z, k)?;
            let q = z.qr().q();
            let resid = |v: &DVector<f64>| -> Vec<f64> {
                let fitted = &q * (q.transpose() * v);
                (v - fitted).iter().copied().collect()
            };
            Ok((resid(&xk), resid(&design.y)))
        }
        Representation::Dense => {
            let m = residual_maker(&design.x, k)?;
            Ok(((&m * xk).iter().copied().collect(), (&m * &design.y).iter().copied().collect()))
        }
    }
}

/// Pairwise parameters `β_k` of regressor k over non-degenerate pairs, in canonical order.
pub fn pairwise_parameters(
    design: &DesignMatrix,
    k: usize,
    scheme: PairScheme,
    representation: Representation,
) -> Result<Vec<f64>> {
    let (xt, yt) = partialled(design, k, representation)?;
    match representation {
        Representation::Implicit => {
            let order = arrangement(&xt, scheme.sorted);
            Ok(position_pairs(scheme.kind, xt.len())
                .filter_map(|(i, j)| {
                    let (a, b) = (order[i], order[j]);
                    let dx = xt[a] - xt[b];
                    (dx != 0.0).then(|| (yt[a] - yt[b]) / dx)
                })
                .collect())
        }
        Representation::Dense => {
            let (dx, dy) = dense_differences(&xt, &yt, scheme)?;
            Ok(dx.iter().zip(&dy).filter(|(dx, _)| **dx != 0.0).map(|(dx, dy)| dy / dx).collect())
        }
    }
}

/// `D S(x̃) x̃` and `D S(x̃) ỹ` through explicit matrices.
fn dense_differences(xt: &[f64], yt: &[f64], scheme: PairScheme) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = xt.len();
    let d = build_difference_matrix(scheme, n)?;
    let d = d.matrix().expect("dense operator");
    let xv = DVector::from_column_slice(xt);
    let yv = DVector::from_column_slice(yt);
    let (dx, dy) = if scheme.sorted {
        let s = selection_matrix(xt);
        (d * (&s * xv), d * (&s * yv))
    } else {
        (d * xv, d * yv)
    };
    Ok((dx.iter().copied().collect(), dy.iter().copied().collect()))
}

fn dense_slope(xt: &[f64], yt: &[f64], config: &EstimatorConfig) -> Result<estimators::SlopeEstimate> {
    let (dx, dy) = dense_differences(xt, yt, config.scheme)?;
    let weight = config.weight.strategy();
    let (mut num, mut den, mut abs_den) = (NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new());
    let (mut used, mut dropped) = (0, 0);
    for (dx, dy) in dx.iter().zip(&dy) {
        if *dx == 0.0 {
            dropped += 1;
            continue;
        }
        let w = config.method.effective_weight(weight.weight(*dx, *dy));
        num += w * (dy / dx);
        den += w;
        abs_den += w.abs();
        used += 1;
    }
    if used == 0 {
        return Err(EwpoError::AllPairsDegenerate { pairs: dropped });
    }
    let (num, den, abs_den) = (num.value(), den.value(), abs_den.value());
    if den == 0.0 || den.abs() <= 1e-14 * abs_den {
        return Err(EwpoError::WeightsSumToZero);
    }
    Ok(estimators::SlopeEstimate {
        beta1_hat: num / den,
        used_pairs: used,
        dropped_pairs: dropped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorFit {
    pub k: usize,
    pub beta_hat: f64,
    pub used_pairs: usize,
    pub dropped_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiFitResult {
    pub beta_hat: Vec<f64>,
    pub beta0_hat: f64,
    pub residuals: Vec<f64>,
    pub per_regressor: Vec<RegressorFit>,
    pub config: EstimatorConfig,
    pub representation: Representation,
}

pub fn fit_multivariate(design: &DesignMatrix, config: &EstimatorConfig) -> Result<MultiFitResult> {
    fit_multivariate_with(design, config, Representation::Implicit)
}

pub fn fit_multivariate_with(
    design: &DesignMatrix,
    config: &EstimatorConfig,
    representation: Representation,
) -> Result<MultiFitResult> {
    let mut per_regressor = Vec::with_capacity(design.k());
    for k in 0..design.k() {
        let (xt, yt) = partialled(design, k, representation)?;
        let est = match representation {
            Representation::Implicit => {
                let sample = Sample::new(xt, yt)?;
                estimators::estimate_slope_detailed(&sample, config)?
            }
            Representation::Dense => dense_slope(&xt, &yt, config)?,
        };
        per_regressor.push(RegressorFit {
            k,
            beta_hat: est.beta1_hat,
            used_pairs: est.used_pairs,
            dropped_pairs: est.dropped_pairs,
        });
    }
    let beta_hat: Vec<f64> = per_regressor.iter().map(|r| r.beta_hat).collect();
    let n = design.n() as f64;
    let mean = |v: nalgebra::DVectorView<f64>| crate::summation::sum(v.iter().copied()) / n;
    let mut beta0_hat = mean(design.y.column(0));
    for (k, b) in beta_hat.iter().enumerate() {
        beta0_hat -= b * mean(design.x.column(k));
    }
    let fitted = &design.x * DVector::from_column_slice(&beta_hat);
    let residuals = design
        .y
        .iter()
        .zip(fitted.iter())
        .map(|(y, f)| y - beta0_hat - f)
        .collect();
    Ok(MultiFitResult {
        beta_hat,
        beta0_hat,
        residuals,
        per_regressor,
        config: *config,
        representation,
    })
}
