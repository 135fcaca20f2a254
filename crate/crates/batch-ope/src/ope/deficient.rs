//! Moment sharing across batches for logs with deficient support.
//!
//! When the behavior policy drops an action in some batches, per-round
//! augmented scores do not exist there. Splitting the score by arm still
//! gives usable per-batch moments wherever the arm keeps positive
//! probability on every round of the batch:
//!
//! ```text
//! psi_a(t) = e[a] * ( 1[k == a] * (y - f[a]) / q[a] + f[a] )
//! ```
//!
//! Each live `(arm, batch)` pair contributes its batch mean `g`, and a
//! weight vector `zeta` that sums to one within every arm recombines them
//! into an estimate `zeta' g`. The variance-minimizing `zeta` solves an
//! equality-constrained quadratic program whose KKT system is solved here
//! directly.

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};
use crate::log::BanditLog;
use crate::nuisance::NuisanceSequence;
use crate::ope::estimators::{confidence_interval, EstimatorResult};
use crate::ope::score::{eval_probs, NuisancePredictions};
use crate::policy::PolicyTable;

/// Relative ridge added to the moment covariance diagonal.
const COVARIANCE_RIDGE: f64 = 1e-8;

/// Largest acceptable infinity-norm residual of the solved KKT system.
pub const KKT_RESIDUAL_TOL: f64 = 1e-8;

/// Per-arm per-batch moment means and their covariance, restricted to the
/// live pairs. Live pairs are ordered arm-major: all batches of arm 1,
/// then arm 2, and so on.
#[derive(Debug, Clone)]
pub struct DeficientMoments {
    num_actions: usize,
    num_batches: usize,
    /// `(action, batch)` of each live pair, both 1-based.
    live: Vec<(usize, usize)>,
    means: DVector<f64>,
    covariance: DMatrix<f64>,
    total_rounds: usize,
}

impl DeficientMoments {
    /// Assembles moments from already-computed parts. The covariance must
    /// be square with one row per live pair, and every arm must appear in
    /// at least one live pair.
    pub fn from_parts(
        num_actions: usize,
        num_batches: usize,
        live: Vec<(usize, usize)>,
        means: Vec<f64>,
        covariance: DMatrix<f64>,
        total_rounds: usize,
    ) -> Result<Self> {
        let n = live.len();
        if means.len() != n || covariance.nrows() != n || covariance.ncols() != n {
            return Err(CoreError::InvalidArgument(format!(
                "{n} live pairs need {n} means and a {n}x{n} covariance"
            )));
        }
        for &(action, batch) in &live {
            if action == 0 || action > num_actions || batch == 0 || batch > num_batches {
                return Err(CoreError::InvalidArgument(format!(
                    "live pair ({action}, {batch}) outside 1..={num_actions} x 1..={num_batches}"
                )));
            }
        }
        for action in 1..=num_actions {
            if !live.iter().any(|&(a, _)| a == action) {
                return Err(CoreError::DeficientSupport { action });
            }
        }
        Ok(Self {
            num_actions,
            num_batches,
            live,
            means: DVector::from_vec(means),
            covariance,
            total_rounds,
        })
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_batches(&self) -> usize {
        self.num_batches
    }

    pub fn live_pairs(&self) -> &[(usize, usize)] {
        &self.live
    }

    pub fn means(&self) -> &DVector<f64> {
        &self.means
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn total_rounds(&self) -> usize {
        self.total_rounds
    }
}

/// Computes per-arm per-batch moments of a log. A pair `(arm, batch)` is
/// live when every round of the batch gives the arm positive probability.
/// The covariance is block-diagonal over batches: scores from different
/// batches are uncorrelated by construction, and each within-batch block
/// is the sample covariance of the live arms' scores scaled by the inverse
/// batch fraction, plus a small diagonal ridge.
pub fn deficient_moments(
    log: &BanditLog,
    preds: &NuisancePredictions,
    eval: &[Vec<f64>],
) -> Result<DeficientMoments> {
    if eval.len() != log.len() {
        return Err(CoreError::InvalidArgument(format!(
            "{} evaluation rows for {} rounds",
            eval.len(),
            log.len()
        )));
    }
    let k = log.num_actions();
    let m = log.schedule().num_batches();
    let fractions = log.schedule().fractions();

    let mut live = Vec::new();
    for action in 1..=k {
        let mut any = false;
        for tau in 1..=m {
            let alive = log
                .batch_records(tau)?
                .iter()
                .all(|rec| rec.behavior_probs[action - 1] > 0.0);
            if alive {
                live.push((action, tau));
                any = true;
            }
        }
        if !any {
            return Err(CoreError::DeficientSupport { action });
        }
    }

    let n = live.len();
    let mut means = vec![0.0; n];
    let mut covariance = DMatrix::zeros(n, n);
    for tau in 1..=m {
        let members: Vec<usize> = (0..n).filter(|&i| live[i].1 == tau).collect();
        if members.is_empty() {
            continue;
        }
        let start = log.schedule().batch_start(tau)?;
        let records = log.batch_records(tau)?;
        let rounds = records.len();
        // Per-arm scores of this batch, one row per member pair.
        let mut scores = vec![vec![0.0; rounds]; members.len()];
        for (row, &i) in members.iter().enumerate() {
            let action = live[i].0;
            for (j, rec) in records.iter().enumerate() {
                let t = start + j;
                let fhat = preds.batchwise[t][action - 1];
                let mut value = eval[t][action - 1] * fhat;
                if rec.action == action {
                    value += eval[t][action - 1] * (rec.reward - fhat)
                        / rec.behavior_probs[action - 1];
                }
                scores[row][j] = value;
            }
        }
        let batch_means: Vec<f64> = scores
            .iter()
            .map(|s| s.iter().sum::<f64>() / rounds as f64)
            .collect();
        for (row, &i) in members.iter().enumerate() {
            means[i] = batch_means[row];
        }
        let scale = 1.0 / (fractions[tau - 1] * rounds as f64);
        for (ri, &i) in members.iter().enumerate() {
            for (rj, &j) in members.iter().enumerate() {
                let mut acc = 0.0;
                for t in 0..rounds {
                    acc += (scores[ri][t] - batch_means[ri]) * (scores[rj][t] - batch_means[rj]);
                }
                covariance[(i, j)] = acc * scale;
            }
        }
    }

    let trace: f64 = (0..n).map(|i| covariance[(i, i)]).sum();
    let ridge = if trace > 0.0 {
        COVARIANCE_RIDGE * trace / n as f64
    } else {
        1e-12
    };
    for i in 0..n {
        covariance[(i, i)] += ridge;
    }

    DeficientMoments::from_parts(k, m, live, means, covariance, log.len())
}

/// Minimizes `zeta' Sigma zeta` subject to the weights of every arm
/// summing to one, by solving the KKT system
///
/// ```text
/// [ 2 Sigma  A' ] [ zeta ]   [ 0 ]
/// [ A        0  ] [ mu   ] = [ 1 ]
/// ```
///
/// where row `a` of `A` marks the live pairs of arm `a`. Errors if the
/// system is singular or the solution fails the residual check.
pub fn deficient_weights(moments: &DeficientMoments) -> Result<Vec<f64>> {
    let n = moments.live.len();
    let k = moments.num_actions;
    let dim = n + k;
    let mut kkt = DMatrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            kkt[(i, j)] = 2.0 * moments.covariance[(i, j)];
        }
    }
    for (i, &(action, _)) in moments.live.iter().enumerate() {
        kkt[(n + action - 1, i)] = 1.0;
        kkt[(i, n + action - 1)] = 1.0;
    }
    let mut rhs = DVector::zeros(dim);
    for a in 0..k {
        rhs[n + a] = 1.0;
    }
    let solution = kkt
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| CoreError::Numerical("singular moment-sharing KKT system".into()))?;
    let residual = (&kkt * &solution - &rhs).abs().max();
    if residual > KKT_RESIDUAL_TOL {
        return Err(CoreError::Numerical(format!(
            "KKT residual {residual:e} exceeds {KKT_RESIDUAL_TOL:e}"
        )));
    }
    Ok(solution.as_slice()[..n].to_vec())
}

/// Shared-support estimate with its variance `zeta' Sigma zeta`. The
/// reported weights cover every `(arm, batch)` cell arm-major, with zeros
/// at the dead pairs.
pub fn estimate_shared_support(
    name: &str,
    log: &BanditLog,
    preds: &NuisancePredictions,
    eval: &[Vec<f64>],
    level: f64,
) -> Result<EstimatorResult> {
    let moments = deficient_moments(log, preds, eval)?;
    let zeta = deficient_weights(&moments)?;
    let zeta_vec = DVector::from_vec(zeta.clone());
    let estimate = zeta_vec.dot(moments.means());
    let asymptotic_variance = (moments.covariance() * &zeta_vec).dot(&zeta_vec);
    let total = moments.total_rounds();
    let (ci_lower, ci_upper) = confidence_interval(estimate, asymptotic_variance, total, level)?;
    let m = moments.num_batches();
    let mut full = vec![0.0; moments.num_actions() * m];
    for (value, &(action, batch)) in zeta.iter().zip(moments.live_pairs()) {
        full[(action - 1) * m + (batch - 1)] = *value;
    }
    Ok(EstimatorResult {
        name: name.to_string(),
        estimate,
        asymptotic_variance,
        std_error: (asymptotic_variance / total as f64).sqrt(),
        ci_lower,
        ci_upper,
        level,
        weights: Some(full),
        iterations: None,
        diagnostics: None,
    })
}

/// Convenience entry point: scores the log and runs the shared-support
/// estimator in one call.
pub fn estimate_ba2ipwis(
    log: &BanditLog,
    seq: &NuisanceSequence,
    policy: &PolicyTable,
    level: f64,
) -> Result<EstimatorResult> {
    let preds = NuisancePredictions::compute(log, seq)?;
    let eval = eval_probs(log, policy)?;
    estimate_shared_support("BA2IPWIS", log, &preds, &eval, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_moments(vars: &[f64], live: Vec<(usize, usize)>, k: usize, m: usize) -> DeficientMoments {
        let n = vars.len();
        let mut cov = DMatrix::zeros(n, n);
        for i in 0..n {
            cov[(i, i)] = vars[i];
        }
        DeficientMoments::from_parts(k, m, live, vec![1.0; n], cov, 100).unwrap()
    }

    #[test]
    fn diagonal_weights_match_inverse_variances() {
        let moments = diag_moments(&[1.0, 2.0], vec![(1, 1), (1, 2)], 1, 2);
        let zeta = deficient_weights(&moments).unwrap();
        assert!((zeta[0] - 2.0 / 3.0).abs() < 1e-10, "{zeta:?}");
        assert!((zeta[1] - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn arms_are_weighted_independently_in_the_diagonal_case() {
        let moments = diag_moments(
            &[1.0, 1.0, 3.0, 1.0],
            vec![(1, 1), (1, 2), (2, 1), (2, 2)],
            2,
            2,
        );
        let zeta = deficient_weights(&moments).unwrap();
        assert!((zeta[0] - 0.5).abs() < 1e-10);
        assert!((zeta[1] - 0.5).abs() < 1e-10);
        assert!((zeta[2] - 0.25).abs() < 1e-10, "{zeta:?}");
        assert!((zeta[3] - 0.75).abs() < 1e-10);
    }

    #[test]
    fn correlated_moments_still_satisfy_the_constraints() {
        let mut cov = DMatrix::zeros(3, 3);
        cov[(0, 0)] = 2.0;
        cov[(1, 1)] = 1.0;
        cov[(2, 2)] = 1.5;
        cov[(0, 1)] = 0.4;
        cov[(1, 0)] = 0.4;
        let moments = DeficientMoments::from_parts(
            2,
            2,
            vec![(1, 1), (1, 2), (2, 2)],
            vec![0.5, 0.7, 0.6],
            cov,
            50,
        )
        .unwrap();
        let zeta = deficient_weights(&moments).unwrap();
        assert!((zeta[0] + zeta[1] - 1.0).abs() < 1e-10);
        assert!((zeta[2] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn every_arm_needs_a_live_pair() {
        let cov = DMatrix::identity(1, 1);
        let err = DeficientMoments::from_parts(2, 2, vec![(1, 1)], vec![0.5], cov, 10)
            .unwrap_err();
        assert!(matches!(err, CoreError::DeficientSupport { action: 2 }));
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let cov = DMatrix::identity(2, 2);
        assert!(
            DeficientMoments::from_parts(1, 2, vec![(1, 1)], vec![0.5], cov.clone(), 10).is_err()
        );
        assert!(DeficientMoments::from_parts(
            1,
            2,
            vec![(1, 1), (1, 3)],
            vec![0.5, 0.5],
            cov,
            10
        )
        .is_err());
    }
}
