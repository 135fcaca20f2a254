//! Per-round scores and their per-batch summaries.
//!
//! The augmented score of a round with covariate `x`, logged action `k`,
//! reward `y`, denominator probabilities `q` (logged or estimated
//! propensities), evaluation probabilities `e`, and outcome predictions `f`
//! is
//!
//! ```text
//! phi = sum_a e[a] * ( 1[k == a] * (y - f[a]) / q[a] + f[a] )
//! ```
//!
//! Its batch mean estimates the target policy value when `f` is fixed
//! before the batch starts, which is exactly how the nuisance sequence is
//! built. Per-batch means, variance estimates, and the nuisance-drift term
//! all live in [`MomentSummary`].

use crate::error::{CoreError, Result};
use crate::log::BanditLog;
use crate::nuisance::NuisanceSequence;
use crate::policy::PolicyTable;

/// Augmented inverse-propensity score of a single round.
///
/// Errors when the logged action has a non-positive denominator, or when
/// the evaluation policy puts mass on an action whose denominator is zero
/// (the importance ratio would be unbounded).
pub fn phi(
    eval_probs: &[f64],
    denom_probs: &[f64],
    action: usize,
    reward: f64,
    fhat: &[f64],
) -> Result<f64> {
    let k = eval_probs.len();
    if denom_probs.len() != k || fhat.len() != k {
        return Err(CoreError::DimensionMismatch {
            expected: k,
            actual: denom_probs.len().min(fhat.len()),
        });
    }
    if action == 0 || action > k {
        return Err(CoreError::InvalidArgument(format!(
            "action {action} outside 1..={k}"
        )));
    }
    if denom_probs[action - 1] <= 0.0 {
        return Err(CoreError::ZeroPropensity { action });
    }
    let mut value = 0.0;
    for a0 in 0..k {
        if eval_probs[a0] > 0.0 && denom_probs[a0] <= 0.0 {
            return Err(CoreError::ZeroPropensity { action: a0 + 1 });
        }
        value += eval_probs[a0] * fhat[a0];
    }
    value += eval_probs[action - 1] * (reward - fhat[action - 1]) / denom_probs[action - 1];
    Ok(value)
}

/// Whether scores use outcome predictions or the plain importance-weighted
/// reward (`fhat` identically 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreMode {
    Augmented,
    InverseProbability,
}

/// Which propensities sit in the score denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Denominator {
    /// The logged behavior probabilities.
    Logged,
    /// Estimated per-batch propensities from the nuisance sequence.
    Estimated,
}

/// Evaluation-policy probabilities precomputed per round.
pub fn eval_probs(log: &BanditLog, policy: &PolicyTable) -> Result<Vec<Vec<f64>>> {
    if policy.num_actions() != log.num_actions() {
        return Err(CoreError::InvalidPolicy(format!(
            "evaluation policy covers {} actions, log has {}",
            policy.num_actions(),
            log.num_actions()
        )));
    }
    log.records().iter().map(|rec| policy.probs(&rec.x)).collect()
}

/// Outcome and propensity model predictions precomputed per round. This is
/// the expensive part of scoring, shared across every estimator evaluated
/// on the same log.
#[derive(Debug, Clone)]
pub struct NuisancePredictions {
    /// `batchwise[t - 1][a - 1]`: prediction of the batch-`tau(t)` model.
    pub batchwise: Vec<Vec<f64>>,
    /// `terminal[t - 1][a - 1]`: prediction of the full-log model.
    pub terminal: Vec<Vec<f64>>,
    /// `ghat[t - 1][a - 1]`: estimated propensities, when fitted.
    pub ghat: Option<Vec<Vec<f64>>>,
}

impl NuisancePredictions {
    pub fn compute(log: &BanditLog, seq: &NuisanceSequence) -> Result<Self> {
        if seq.num_batches() != log.schedule().num_batches() {
            return Err(CoreError::InvalidArgument(format!(
                "nuisance sequence has {} batches, log has {}",
                seq.num_batches(),
                log.schedule().num_batches()
            )));
        }
        if seq.num_actions() != log.num_actions() {
            return Err(CoreError::InvalidArgument(format!(
                "nuisance sequence covers {} actions, log has {}",
                seq.num_actions(),
                log.num_actions()
            )));
        }
        let k = log.num_actions();
        let mut batchwise = Vec::with_capacity(log.len());
        let mut terminal = Vec::with_capacity(log.len());
        let mut ghat = seq.has_propensity().then(|| Vec::with_capacity(log.len()));
        for rec in log.records() {
            let mut row_b = Vec::with_capacity(k);
            let mut row_t = Vec::with_capacity(k);
            for action in 1..=k {
                row_b.push(seq.outcome_model(rec.batch, action).predict(&rec.x)?);
                row_t.push(seq.terminal_model(action).predict(&rec.x)?);
            }
            batchwise.push(row_b);
            terminal.push(row_t);
            if let Some(rows) = &mut ghat {
                let table = seq
                    .propensity_table(rec.batch)
                    .expect("has_propensity checked");
                rows.push(table.probs(&rec.x)?);
            }
        }
        Ok(Self {
            batchwise,
            terminal,
            ghat,
        })
    }
}

/// Per-batch score summaries: everything the weighting and estimation
/// steps need, with per-round scores retained so variance estimates can be
/// re-evaluated at updated point estimates.
#[derive(Debug, Clone)]
pub struct MomentSummary {
    fractions: Vec<f64>,
    /// Scores with the per-batch outcome models, grouped by batch.
    scores: Vec<Vec<f64>>,
    /// The same rounds scored with the terminal outcome model.
    terminal_scores: Vec<Vec<f64>>,
    /// Per-batch mean squared prediction gap between the batch model and
    /// the terminal model at the logged actions.
    drift: Vec<f64>,
}

impl MomentSummary {
    /// Scores every round of the log. `mode` picks augmented or plain
    /// importance weighting; `denominator` picks logged or estimated
    /// propensities.
    pub fn compute(
        log: &BanditLog,
        preds: &NuisancePredictions,
        eval: &[Vec<f64>],
        mode: ScoreMode,
        denominator: Denominator,
    ) -> Result<Self> {
        if eval.len() != log.len() {
            return Err(CoreError::InvalidArgument(format!(
                "{} evaluation rows for {} rounds",
                eval.len(),
                log.len()
            )));
        }
        let m = log.schedule().num_batches();
        let zeros = vec![0.0; log.num_actions()];
        let mut scores: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut terminal_scores: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut drift = Vec::with_capacity(m);
        for tau in 1..=m {
            let start = log.schedule().batch_start(tau)?;
            let end = log.schedule().batch_end(tau)?;
            let mut batch_scores = Vec::with_capacity(end - start);
            let mut batch_terminal = Vec::with_capacity(end - start);
            let mut gap = 0.0;
            for (idx, rec) in log.records()[start..end].iter().enumerate() {
                let i = start + idx;
                let denom: &[f64] = match denominator {
                    Denominator::Logged => &rec.behavior_probs,
                    Denominator::Estimated => preds
                        .ghat
                        .as_ref()
                        .ok_or_else(|| {
                            CoreError::InvalidArgument(
                                "no propensity models in the nuisance sequence".into(),
                            )
                        })?[i]
                        .as_slice(),
                };
                let (fhat, fhat_term): (&[f64], &[f64]) = match mode {
                    ScoreMode::Augmented => (&preds.batchwise[i], &preds.terminal[i]),
                    ScoreMode::InverseProbability => (&zeros, &zeros),
                };
                batch_scores.push(phi(&eval[i], denom, rec.action, rec.reward, fhat)?);
                batch_terminal.push(phi(&eval[i], denom, rec.action, rec.reward, fhat_term)?);
                let d = fhat[rec.action - 1] - fhat_term[rec.action - 1];
                gap += d * d;
            }
            drift.push(gap / (end - start) as f64);
            scores.push(batch_scores);
            terminal_scores.push(batch_terminal);
        }
        Ok(Self {
            fractions: log.schedule().fractions(),
            scores,
            terminal_scores,
            drift,
        })
    }

    /// Builds a summary directly from per-batch scores; used by tests and
    /// by callers that produce scores some other way.
    pub fn from_parts(
        fractions: Vec<f64>,
        scores: Vec<Vec<f64>>,
        terminal_scores: Vec<Vec<f64>>,
        drift: Vec<f64>,
    ) -> Result<Self> {
        let m = fractions.len();
        if m == 0 || scores.len() != m || terminal_scores.len() != m || drift.len() != m {
            return Err(CoreError::InvalidArgument(
                "per-batch slices must share one length".into(),
            ));
        }
        if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9
            || fractions.iter().any(|&r| r <= 0.0)
        {
            return Err(CoreError::InvalidArgument(
                "fractions must be positive and sum to one".into(),
            ));
        }
        for (s, ts) in scores.iter().zip(&terminal_scores) {
            if s.is_empty() || s.len() != ts.len() {
                return Err(CoreError::InvalidArgument(
                    "each batch needs matching non-empty score slices".into(),
                ));
            }
        }
        Ok(Self {
            fractions,
            scores,
            terminal_scores,
            drift,
        })
    }

    pub fn num_batches(&self) -> usize {
        self.fractions.len()
    }

    pub fn total_rounds(&self) -> usize {
        self.scores.iter().map(Vec::len).sum()
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn batch_sizes(&self) -> Vec<usize> {
        self.scores.iter().map(Vec::len).collect()
    }

    pub fn scores(&self) -> &[Vec<f64>] {
        &self.scores
    }

    pub fn terminal_scores(&self) -> &[Vec<f64>] {
        &self.terminal_scores
    }

    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    /// Per-batch means `d_tau`.
    pub fn means(&self) -> Vec<f64> {
        self.scores
            .iter()
            .map(|s| s.iter().sum::<f64>() / s.len() as f64)
            .collect()
    }

    /// Per-batch variance estimates at point estimate `theta`, scaled by
    /// the inverse batch fraction:
    /// `sigma2[tau] = (1 / r_tau) * mean_{t in tau} (phi_t - theta)^2`.
    pub fn var_hat(&self, theta: f64) -> Vec<f64> {
        Self::scaled_second_moments(&self.fractions, &self.scores, theta)
    }

    /// Same as [`MomentSummary::var_hat`] but with the rounds scored by the
    /// terminal outcome model.
    pub fn var_tilde(&self, theta: f64) -> Vec<f64> {
        Self::scaled_second_moments(&self.fractions, &self.terminal_scores, theta)
    }

    fn scaled_second_moments(fractions: &[f64], scores: &[Vec<f64>], theta: f64) -> Vec<f64> {
        fractions
            .iter()
            .zip(scores)
            .map(|(&r, s)| {
                let mean_sq =
                    s.iter().map(|&v| (v - theta) * (v - theta)).sum::<f64>() / s.len() as f64;
                mean_sq / r
            })
            .collect()
    }
}

/// Scores a log against an evaluation policy and summarizes it by batch,
/// using the logged behavior probabilities as the denominator.
pub fn batch_means(
    log: &BanditLog,
    seq: &NuisanceSequence,
    policy: &PolicyTable,
    mode: ScoreMode,
) -> Result<MomentSummary> {
    let preds = NuisancePredictions::compute(log, seq)?;
    let eval = eval_probs(log, policy)?;
    MomentSummary::compute(log, &preds, &eval, mode, Denominator::Logged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_matches_the_worked_example() {
        let got = phi(&[0.3, 0.7], &[0.5, 0.5], 2, 1.0, &[0.2, 0.5]).unwrap();
        assert!((got - 1.11).abs() < 1e-15, "{got}");
    }

    #[test]
    fn phi_with_zero_fhat_is_importance_weighting() {
        let got = phi(&[0.3, 0.7], &[0.5, 0.5], 2, 1.0, &[0.0, 0.0]).unwrap();
        assert!((got - 1.4).abs() < 1e-15);
    }

    #[test]
    fn phi_rejects_support_violations() {
        // Logged action itself has probability zero.
        assert!(matches!(
            phi(&[0.3, 0.7], &[1.0, 0.0], 2, 1.0, &[0.0, 0.0]),
            Err(CoreError::ZeroPropensity { action: 2 })
        ));
        // Evaluation policy covers an action the behavior never plays.
        assert!(matches!(
            phi(&[0.3, 0.7], &[1.0, 0.0], 1, 1.0, &[0.0, 0.0]),
            Err(CoreError::ZeroPropensity { action: 2 })
        ));
        // No evaluation mass on the dead action: fine.
        let got = phi(&[1.0, 0.0], &[1.0, 0.0], 1, 1.0, &[0.5, 0.9]).unwrap();
        assert!((got - 1.0).abs() < 1e-15);
    }

    #[test]
    fn var_hat_matches_the_two_point_example() {
        let summary = MomentSummary::from_parts(
            vec![0.5, 0.5],
            vec![vec![0.0, 2.0], vec![1.0, 1.0]],
            vec![vec![0.0, 2.0], vec![1.0, 1.0]],
            vec![0.0, 0.0],
        )
        .unwrap();
        let v = summary.var_hat(1.0);
        assert!((v[0] - 2.0).abs() < 1e-15, "{v:?}");
        assert!((v[1] - 0.0).abs() < 1e-15);
    }

    #[test]
    fn means_are_per_batch_averages() {
        let summary = MomentSummary::from_parts(
            vec![0.75, 0.25],
            vec![vec![1.0, 2.0, 3.0], vec![4.0]],
            vec![vec![1.0, 2.0, 3.0], vec![4.0]],
            vec![0.0, 0.0],
        )
        .unwrap();
        assert_eq!(summary.means(), vec![2.0, 4.0]);
        assert_eq!(summary.batch_sizes(), vec![3, 1]);
        assert_eq!(summary.total_rounds(), 4);
    }

    #[test]
    fn from_parts_validates_shapes() {
        assert!(MomentSummary::from_parts(vec![], vec![], vec![], vec![]).is_err());
        assert!(MomentSummary::from_parts(
            vec![0.5, 0.5],
            vec![vec![1.0]],
            vec![vec![1.0]],
            vec![0.0]
        )
        .is_err());
        assert!(MomentSummary::from_parts(
            vec![0.7, 0.7],
            vec![vec![1.0], vec![1.0]],
            vec![vec![1.0], vec![1.0]],
            vec![0.0, 0.0]
        )
        .is_err());
    }
}
