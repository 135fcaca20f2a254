//! Nonparametric outcome regressors.
//!
//! Every regressor predicts within `[min target, max target]` of its
//! training data (results are clamped, which only absorbs float rounding),
//! so a fitted outcome model is bounded by the reward bound of the data it
//! saw. An [`Regressor::Empty`] model predicts 0 and stands in for batches
//! with no history.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::policy::index_code;

/// Bandwidth choice for the Gaussian-kernel regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BandwidthSpec {
    /// `1.06 * sd_d * n^(-1/5)` per dimension; constant dimensions fall
    /// back to sd 1, where any bandwidth acts the same.
    Silverman,
    /// One bandwidth for every dimension.
    Scalar(f64),
    PerDim(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelRegressor {
    covariates: Vec<Vec<f64>>,
    targets: Vec<f64>,
    bandwidth: Vec<f64>,
    min_target: f64,
    max_target: f64,
}

/// Nadaraya-Watson regressor with a Gaussian product kernel.
pub fn fit_nw(
    covariates: Vec<Vec<f64>>,
    targets: Vec<f64>,
    bandwidth: BandwidthSpec,
) -> Result<KernelRegressor> {
    let dim = check_training_data(&covariates, &targets)?;
    let bandwidth = match bandwidth {
        BandwidthSpec::Silverman => silverman_bandwidth(&covariates),
        BandwidthSpec::Scalar(h) => vec![h; dim],
        BandwidthSpec::PerDim(h) => {
            if h.len() != dim {
                return Err(CoreError::DimensionMismatch {
                    expected: dim,
                    actual: h.len(),
                });
            }
            h
        }
    };
    if bandwidth.iter().any(|&h| !h.is_finite() || h <= 0.0) {
        return Err(CoreError::InvalidArgument(
            "bandwidths must be positive and finite".into(),
        ));
    }
    let (min_target, max_target) = target_range(&targets);
    Ok(KernelRegressor {
        covariates,
        targets,
        bandwidth,
        min_target,
        max_target,
    })
}

impl KernelRegressor {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let dim = self.bandwidth.len();
        if x.len() != dim {
            return Err(CoreError::DimensionMismatch {
                expected: dim,
                actual: x.len(),
            });
        }
        let mut num = 0.0;
        let mut den = 0.0;
        let mut nearest = 0usize;
        let mut nearest_d = f64::INFINITY;
        for (i, xi) in self.covariates.iter().enumerate() {
            let mut d = 0.0;
            for j in 0..dim {
                let u = (x[j] - xi[j]) / self.bandwidth[j];
                d += u * u;
            }
            if d < nearest_d {
                nearest_d = d;
                nearest = i;
            }
            let w = (-0.5 * d).exp();
            num += w * self.targets[i];
            den += w;
        }
        // Far queries underflow every kernel weight; in that limit the
        // nearest point dominates, so return its target.
        let value = if den <= f64::MIN_POSITIVE {
            self.targets[nearest]
        } else {
            num / den
        };
        Ok(value.clamp(self.min_target, self.max_target))
    }

    pub fn bandwidth(&self) -> &[f64] {
        &self.bandwidth
    }

    pub fn training_covariates(&self) -> &[Vec<f64>] {
        &self.covariates
    }

    pub fn training_targets(&self) -> &[f64] {
        &self.targets
    }
}

/// Per-dimension rule-of-thumb bandwidth `1.06 * sd * n^(-1/5)`.
pub fn silverman_bandwidth(covariates: &[Vec<f64>]) -> Vec<f64> {
    let n = covariates.len();
    let dim = covariates.first().map_or(0, Vec::len);
    let rate = (n as f64).powf(-0.2);
    let mut out = Vec::with_capacity(dim);
    for d in 0..dim {
        let mean = covariates.iter().map(|r| r[d]).sum::<f64>() / n as f64;
        let var = covariates
            .iter()
            .map(|r| (r[d] - mean) * (r[d] - mean))
            .sum::<f64>()
            / n as f64;
        let sd = var.sqrt();
        let sd = if sd > 0.0 { sd } else { 1.0 };
        out.push(1.06 * sd * rate);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnRegressor {
    covariates: Vec<Vec<f64>>,
    targets: Vec<f64>,
    neighbors: usize,
    min_target: f64,
    max_target: f64,
}

/// k-nearest-neighbor regressor (Euclidean distance, distance ties broken
/// by training index).
pub fn fit_knn(
    covariates: Vec<Vec<f64>>,
    targets: Vec<f64>,
    neighbors: usize,
) -> Result<KnnRegressor> {
    check_training_data(&covariates, &targets)?;
    if neighbors == 0 {
        return Err(CoreError::InvalidArgument(
            "need at least one neighbor".into(),
        ));
    }
    let (min_target, max_target) = target_range(&targets);
    Ok(KnnRegressor {
        covariates,
        targets,
        neighbors,
        min_target,
        max_target,
    })
}

impl KnnRegressor {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let dim = self.covariates[0].len();
        if x.len() != dim {
            return Err(CoreError::DimensionMismatch {
                expected: dim,
                actual: x.len(),
            });
        }
        let mut order: Vec<(f64, usize)> = self
            .covariates
            .iter()
            .enumerate()
            .map(|(i, xi)| {
                let d: f64 = xi.iter().zip(x).map(|(&a, &b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        let k = self.neighbors.min(order.len());
        order.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        let mean = order[..k]
            .iter()
            .map(|&(_, i)| self.targets[i])
            .sum::<f64>()
            / k as f64;
        Ok(mean.clamp(self.min_target, self.max_target))
    }

    pub fn training_covariates(&self) -> &[Vec<f64>] {
        &self.covariates
    }

    pub fn training_targets(&self) -> &[f64] {
        &self.targets
    }
}

/// One outcome model for a single action.
#[derive(Debug, Clone, PartialEq)]
pub enum Regressor {
    /// No training data; predicts 0 everywhere.
    Empty,
    Constant(f64),
    /// Values indexed by the integer covariate code `x[0]`; used for finite
    /// covariate spaces (both oracle tables and per-code empirical means).
    Table(Vec<f64>),
    Nw(KernelRegressor),
    Knn(KnnRegressor),
}

impl Regressor {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            Regressor::Empty => Ok(0.0),
            Regressor::Constant(v) => Ok(*v),
            Regressor::Table(values) => {
                let idx = index_code(x, values.len())?;
                Ok(values[idx])
            }
            Regressor::Nw(model) => model.predict(x),
            Regressor::Knn(model) => model.predict(x),
        }
    }
}

/// Per-code empirical means on an integer-coded covariate space; codes
/// never observed predict `0`, matching the no-data default.
pub fn fit_table_mean(
    covariates: &[Vec<f64>],
    targets: &[f64],
    num_codes: usize,
) -> Result<Regressor> {
    if num_codes == 0 {
        return Err(CoreError::InvalidArgument("need at least one code".into()));
    }
    let mut sums = vec![0.0; num_codes];
    let mut counts = vec![0usize; num_codes];
    for (x, &y) in covariates.iter().zip(targets) {
        let idx = index_code(x, num_codes)?;
        sums[idx] += y;
        counts[idx] += 1;
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect();
    Ok(Regressor::Table(values))
}

fn check_training_data(covariates: &[Vec<f64>], targets: &[f64]) -> Result<usize> {
    if covariates.is_empty() || covariates.len() != targets.len() {
        return Err(CoreError::InvalidArgument(format!(
            "{} covariate rows for {} targets",
            covariates.len(),
            targets.len()
        )));
    }
    let dim = covariates[0].len();
    for row in covariates {
        if row.len() != dim {
            return Err(CoreError::DimensionMismatch {
                expected: dim,
                actual: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidArgument(
                "non-finite training covariate".into(),
            ));
        }
    }
    if targets.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::InvalidArgument(
            "non-finite training target".into(),
        ));
    }
    Ok(dim)
}

fn target_range(targets: &[f64]) -> (f64, f64) {
    let min = targets.iter().copied().fold(f64::INFINITY, f64::min);
    let max = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}
