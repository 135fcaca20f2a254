//! Batch weight vectors.
//!
//! A batch-weighted estimator combines per-batch score means with a weight
//! vector on the probability simplex. Equal weights are always valid;
//! inverse-variance weights minimize the combined asymptotic variance
//! `sum_tau w_tau^2 * sigma2_tau`; the stability variant inflates each
//! batch's variance by its nuisance drift before inverting.

use crate::error::{CoreError, Result};

/// Variances this small are floored before inversion so a degenerate batch
/// cannot swallow the whole weight budget.
pub const VARIANCE_FLOOR: f64 = 1e-12;

const SUM_TOL: f64 = 1e-10;

/// A point on the probability simplex indexed by batch.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Validates an externally supplied weight vector: finite, nonnegative
    /// entries summing to one.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(CoreError::InvalidArgument("empty weight vector".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(CoreError::InvalidArgument(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(CoreError::InvalidArgument(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self(weights))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Weighted sum of per-batch means.
    pub fn combine(&self, means: &[f64]) -> Result<f64> {
        if means.len() != self.0.len() {
            return Err(CoreError::DimensionMismatch {
                expected: self.0.len(),
                actual: means.len(),
            });
        }
        Ok(self.0.iter().zip(means).map(|(w, d)| w * d).sum())
    }

    /// Asymptotic variance `sum_tau w_tau^2 * sigma2_tau` of the combined
    /// estimate.
    pub fn combined_variance(&self, variances: &[f64]) -> Result<f64> {
        if variances.len() != self.0.len() {
            return Err(CoreError::DimensionMismatch {
                expected: self.0.len(),
                actual: variances.len(),
            });
        }
        Ok(self.0.iter().zip(variances).map(|(w, v)| w * w * v).sum())
    }

    /// Largest absolute per-entry difference, used as the convergence
    /// measure of iterated reweighting.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Uniform weights over `num_batches` batches.
pub fn equal_weights(num_batches: usize) -> Result<WeightVector> {
    if num_batches == 0 {
        return Err(CoreError::InvalidArgument("no batches to weight".into()));
    }
    Ok(WeightVector(vec![1.0 / num_batches as f64; num_batches]))
}

/// Inverse-variance weights `w_tau = (1 / sigma2_tau) / sum_s (1 / sigma2_s)`,
/// the minimizer of the combined variance over the simplex. Variances are
/// floored at [`VARIANCE_FLOOR`].
pub fn efficient_weights(variances: &[f64]) -> Result<WeightVector> {
    if variances.is_empty() {
        return Err(CoreError::InvalidArgument("no variances".into()));
    }
    if variances.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(CoreError::InvalidArgument(
            "variances must be finite and nonnegative".into(),
        ));
    }
    let inv: Vec<f64> = variances.iter().map(|&v| 1.0 / v.max(VARIANCE_FLOOR)).collect();
    let total: f64 = inv.iter().sum();
    Ok(WeightVector(inv.iter().map(|&x| x / total).collect()))
}

/// Inverse weights of the drift-inflated variances
/// `sigma2_tau + alpha * drift_tau`.
pub fn stability_weights(variances: &[f64], drift: &[f64], alpha: f64) -> Result<WeightVector> {
    if drift.len() != variances.len() {
        return Err(CoreError::DimensionMismatch {
            expected: variances.len(),
            actual: drift.len(),
        });
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(CoreError::InvalidArgument(format!(
            "stability penalty {alpha} must be finite and nonnegative"
        )));
    }
    if drift.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(CoreError::InvalidArgument(
            "drift terms must be finite and nonnegative".into(),
        ));
    }
    let inflated: Vec<f64> = variances
        .iter()
        .zip(drift)
        .map(|(&v, &d)| v + alpha * d)
        .collect();
    efficient_weights(&inflated)
}
