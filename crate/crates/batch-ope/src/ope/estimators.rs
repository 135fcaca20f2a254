//! Point estimators, iterated batch reweighting, and confidence intervals.
//!
//! Batch-weighted estimators combine per-batch score means with a weight
//! vector. Because the variance-minimizing weights depend on the point
//! estimate and the point estimate depends on the weights, the efficient
//! variants iterate the two updates a fixed number of steps from equal
//! weights, stopping early once the weights are stationary.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::log::BanditLog;
use crate::nuisance::NuisanceSequence;
use crate::ope::deficient;
use crate::ope::score::{
    eval_probs, Denominator, MomentSummary, NuisancePredictions, ScoreMode,
};
use crate::ope::weights::{
    efficient_weights, equal_weights, stability_weights, WeightVector,
};
use crate::policy::PolicyTable;

/// Convergence tolerance for iterated reweighting: iteration stops when no
/// weight moves by more than this.
pub const WEIGHT_STOP_TOL: f64 = 1e-10;

/// Default number of reweighting steps.
pub const DEFAULT_STEPS: usize = 10;

/// Default drift penalty of the stability weighting rule.
pub const DEFAULT_STABILITY_ALPHA: f64 = 1.0;

/// Which per-batch variance estimate to use: scores built with the
/// per-batch outcome models, or the same rounds rescored with the terminal
/// model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceKind {
    Batchwise,
    Terminal,
}

/// How batch weights are chosen at each reweighting step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum WeightRule {
    Equal,
    Efficient { kind: VarianceKind },
    /// Inverse weights of variance plus `alpha` times the nuisance drift.
    Stability { alpha: f64 },
}

impl WeightRule {
    fn weights_at(&self, summary: &MomentSummary, theta: f64) -> Result<WeightVector> {
        match *self {
            WeightRule::Equal => equal_weights(summary.num_batches()),
            WeightRule::Efficient { kind } => {
                efficient_weights(&variances_of(summary, kind, theta))
            }
            WeightRule::Stability { alpha } => {
                stability_weights(&summary.var_hat(theta), summary.drift(), alpha)
            }
        }
    }

    /// Variance estimate reported alongside the final point estimate.
    fn variance_kind(&self) -> VarianceKind {
        match self {
            WeightRule::Efficient { kind } => *kind,
            WeightRule::Equal | WeightRule::Stability { .. } => VarianceKind::Batchwise,
        }
    }
}

fn variances_of(summary: &MomentSummary, kind: VarianceKind, theta: f64) -> Vec<f64> {
    match kind {
        VarianceKind::Batchwise => summary.var_hat(theta),
        VarianceKind::Terminal => summary.var_tilde(theta),
    }
}

/// Weight and estimate sequence of an iterated reweighting run.
///
/// `weights[i]` produced `estimates[i]`; the final entries are the
/// reported weights and point estimate. With one step this is exactly the
/// equal-weight estimator.
#[derive(Debug, Clone)]
pub struct NStepTrace {
    pub weights: Vec<WeightVector>,
    pub estimates: Vec<f64>,
    pub converged: bool,
}

impl NStepTrace {
    pub fn final_weights(&self) -> &WeightVector {
        self.weights.last().expect("trace is never empty")
    }

    pub fn final_estimate(&self) -> f64 {
        *self.estimates.last().expect("trace is never empty")
    }

    pub fn iterations(&self) -> usize {
        self.weights.len()
    }
}

/// Runs up to `steps` rounds of estimate-then-reweight starting from equal
/// weights, recording each iterate.
pub fn n_step_trace(
    summary: &MomentSummary,
    rule: WeightRule,
    steps: usize,
) -> Result<NStepTrace> {
    if steps == 0 {
        return Err(CoreError::InvalidArgument(
            "at least one reweighting step is required".into(),
        ));
    }
    let means = summary.means();
    let mut weights = vec![equal_weights(summary.num_batches())?];
    let mut estimates = vec![weights[0].combine(&means)?];
    let mut converged = false;
    for _ in 1..steps {
        let theta = *estimates.last().expect("non-empty");
        let next = rule.weights_at(summary, theta)?;
        let delta = next.max_abs_diff(weights.last().expect("non-empty"));
        estimates.push(next.combine(&means)?);
        weights.push(next);
        if delta < WEIGHT_STOP_TOL {
            converged = true;
            break;
        }
    }
    Ok(NStepTrace {
        weights,
        estimates,
        converged,
    })
}

/// Per-batch quantities behind a batch-weighted estimate, kept for
/// inspection and reporting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchDiagnostics {
    /// Per-batch score means.
    pub means: Vec<f64>,
    /// Per-batch variance estimates at the final point estimate.
    pub variances: Vec<f64>,
    /// Per-batch mean squared gap between batch and terminal outcome
    /// predictions at the logged actions.
    pub drift: Vec<f64>,
}

/// A point estimate with its uncertainty report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub name: String,
    pub estimate: f64,
    /// Variance of the centered and root-total-scaled estimate; the
    /// standard error is `sqrt(asymptotic_variance / total_rounds)`.
    pub asymptotic_variance: f64,
    pub std_error: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub level: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<BatchDiagnostics>,
}

/// Normal critical value for the supported two-sided levels.
pub fn z_value(level: f64) -> Result<f64> {
    const TABLE: [(f64, f64); 3] = [(0.90, 1.645), (0.95, 1.96), (0.99, 2.576)];
    for (lvl, z) in TABLE {
        if (level - lvl).abs() < 1e-9 {
            return Ok(z);
        }
    }
    Err(CoreError::Unsupported(format!(
        "no critical value for confidence level {level}; use 0.90, 0.95, or 0.99"
    )))
}

/// Two-sided interval `estimate ± z * sqrt(variance / total_rounds)`.
pub fn confidence_interval(
    estimate: f64,
    asymptotic_variance: f64,
    total_rounds: usize,
    level: f64,
) -> Result<(f64, f64)> {
    if asymptotic_variance < 0.0 || !asymptotic_variance.is_finite() {
        return Err(CoreError::Numerical(format!(
            "variance {asymptotic_variance} is not usable"
        )));
    }
    if total_rounds == 0 {
        return Err(CoreError::InvalidArgument("no rounds".into()));
    }
    let half = z_value(level)? * (asymptotic_variance / total_rounds as f64).sqrt();
    Ok((estimate - half, estimate + half))
}

/// Batch-weighted estimate from a score summary: runs the reweighting
/// iteration, then reports the combined estimate with variance
/// `sum_tau w_tau^2 * sigma2_tau` evaluated at the final estimate.
pub fn estimate_batch_weighted(
    name: &str,
    summary: &MomentSummary,
    rule: WeightRule,
    steps: usize,
    level: f64,
) -> Result<EstimatorResult> {
    let trace = n_step_trace(summary, rule, steps)?;
    let estimate = trace.final_estimate();
    let weights = trace.final_weights();
    let variances = variances_of(summary, rule.variance_kind(), estimate);
    let asymptotic_variance = weights.combined_variance(&variances)?;
    let (ci_lower, ci_upper) =
        confidence_interval(estimate, asymptotic_variance, summary.total_rounds(), level)?;
    Ok(EstimatorResult {
        name: name.to_string(),
        estimate,
        asymptotic_variance,
        std_error: (asymptotic_variance / summary.total_rounds() as f64).sqrt(),
        ci_lower,
        ci_upper,
        level,
        weights: Some(weights.as_slice().to_vec()),
        iterations: Some(trace.iterations()),
        diagnostics: Some(BatchDiagnostics {
            means: summary.means(),
            variances,
            drift: summary.drift().to_vec(),
        }),
    })
}

/// Sample mean of per-round contributions with a plug-in variance.
fn estimate_from_contributions(
    name: &str,
    contributions: &[f64],
    level: f64,
) -> Result<EstimatorResult> {
    if contributions.is_empty() {
        return Err(CoreError::InvalidArgument("no rounds".into()));
    }
    let n = contributions.len() as f64;
    let estimate = contributions.iter().sum::<f64>() / n;
    let asymptotic_variance = contributions
        .iter()
        .map(|&c| (c - estimate) * (c - estimate))
        .sum::<f64>()
        / n;
    let (ci_lower, ci_upper) =
        confidence_interval(estimate, asymptotic_variance, contributions.len(), level)?;
    Ok(EstimatorResult {
        name: name.to_string(),
        estimate,
        asymptotic_variance,
        std_error: (asymptotic_variance / n).sqrt(),
        ci_lower,
        ci_upper,
        level,
        weights: None,
        iterations: None,
        diagnostics: None,
    })
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_alpha() -> f64 {
    DEFAULT_STABILITY_ALPHA
}

/// The estimator menu. Each variant names one reportable estimator;
/// [`evaluate_all`] shares the per-round score work across a whole menu.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum EstimatorSpec {
    /// Mean predicted value under the terminal outcome model.
    DirectMethod,
    /// Direct method with the per-batch outcome models.
    AdaptiveDirectMethod,
    /// Importance-weighted reward, pooled over all rounds.
    InverseProbability,
    /// Augmented scores with the terminal outcome model, pooled over all
    /// rounds.
    Augmented,
    /// Equal-weight batch means of augmented scores.
    BatchEqual,
    /// Variance-minimizing batch weights of augmented scores.
    BatchEfficient {
        kind: VarianceKind,
        #[serde(default = "default_steps")]
        steps: usize,
    },
    /// Drift-penalized batch weights of augmented scores.
    BatchStability {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_steps")]
        steps: usize,
    },
    /// Variance-minimizing batch weights of plain importance-weighted
    /// scores.
    BatchIpw {
        #[serde(default = "default_steps")]
        steps: usize,
    },
    /// Equal-weight batch means with estimated propensities in the
    /// denominator.
    DoublyRobustEqual,
    /// Variance-minimizing batch weights with estimated propensities.
    DoublyRobustEfficient {
        #[serde(default = "default_steps")]
        steps: usize,
    },
    /// Per-arm per-batch moment sharing for logs whose behavior policy
    /// drops actions in some batches.
    SharedSupport,
}

impl EstimatorSpec {
    /// Report name of this estimator.
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorSpec::DirectMethod => "DM",
            EstimatorSpec::AdaptiveDirectMethod => "AdaDM",
            EstimatorSpec::InverseProbability => "IPW",
            EstimatorSpec::Augmented => "AIPW",
            EstimatorSpec::BatchEqual => "PBA2IPW",
            EstimatorSpec::BatchEfficient {
                kind: VarianceKind::Batchwise,
                ..
            } => "EBA2IPW",
            EstimatorSpec::BatchEfficient {
                kind: VarianceKind::Terminal,
                ..
            } => "EBA2IPW'",
            EstimatorSpec::BatchStability { .. } => "SBA2IPW",
            EstimatorSpec::BatchIpw { .. } => "BAdaIPW",
            EstimatorSpec::DoublyRobustEqual => "PBADR",
            EstimatorSpec::DoublyRobustEfficient { .. } => "EBADR",
            EstimatorSpec::SharedSupport => "BA2IPWIS",
        }
    }

    /// The menu used by the replication harness.
    pub fn standard_menu() -> Vec<EstimatorSpec> {
        vec![
            EstimatorSpec::DirectMethod,
            EstimatorSpec::InverseProbability,
            EstimatorSpec::Augmented,
            EstimatorSpec::AdaptiveDirectMethod,
            EstimatorSpec::BatchEqual,
            EstimatorSpec::BatchEfficient {
                kind: VarianceKind::Batchwise,
                steps: DEFAULT_STEPS,
            },
            EstimatorSpec::BatchEfficient {
                kind: VarianceKind::Terminal,
                steps: DEFAULT_STEPS,
            },
            EstimatorSpec::BatchStability {
                alpha: DEFAULT_STABILITY_ALPHA,
                steps: DEFAULT_STEPS,
            },
            EstimatorSpec::BatchIpw {
                steps: DEFAULT_STEPS,
            },
        ]
    }
}

/// Precomputed per-round quantities shared by every estimator on one log,
/// with score summaries built lazily on first use.
pub struct EvalContext<'a> {
    log: &'a BanditLog,
    preds: NuisancePredictions,
    eval: Vec<Vec<f64>>,
    augmented: Option<MomentSummary>,
    importance: Option<MomentSummary>,
    estimated_denom: Option<MomentSummary>,
}

impl<'a> EvalContext<'a> {
    pub fn new(
        log: &'a BanditLog,
        seq: &NuisanceSequence,
        policy: &PolicyTable,
    ) -> Result<Self> {
        let preds = NuisancePredictions::compute(log, seq)?;
        let eval = eval_probs(log, policy)?;
        Self::from_parts(log, preds, eval)
    }

    /// Builds a context from predictions and evaluation probabilities
    /// computed elsewhere, e.g. when sharing predictions across several
    /// evaluation policies.
    pub fn from_parts(
        log: &'a BanditLog,
        preds: NuisancePredictions,
        eval: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if eval.len() != log.len() || preds.batchwise.len() != log.len() {
            return Err(CoreError::InvalidArgument(format!(
                "{} evaluation rows and {} prediction rows for {} rounds",
                eval.len(),
                preds.batchwise.len(),
                log.len()
            )));
        }
        Ok(Self {
            log,
            preds,
            eval,
            augmented: None,
            importance: None,
            estimated_denom: None,
        })
    }

    pub fn predictions(&self) -> &NuisancePredictions {
        &self.preds
    }

    pub fn eval_probs(&self) -> &[Vec<f64>] {
        &self.eval
    }

    fn augmented_summary(&mut self) -> Result<&MomentSummary> {
        if self.augmented.is_none() {
            self.augmented = Some(MomentSummary::compute(
                self.log,
                &self.preds,
                &self.eval,
                ScoreMode::Augmented,
                Denominator::Logged,
            )?);
        }
        Ok(self.augmented.as_ref().expect("just filled"))
    }

    fn importance_summary(&mut self) -> Result<&MomentSummary> {
        if self.importance.is_none() {
            self.importance = Some(MomentSummary::compute(
                self.log,
                &self.preds,
                &self.eval,
                ScoreMode::InverseProbability,
                Denominator::Logged,
            )?);
        }
        Ok(self.importance.as_ref().expect("just filled"))
    }

    fn estimated_denom_summary(&mut self) -> Result<&MomentSummary> {
        if self.estimated_denom.is_none() {
            self.estimated_denom = Some(MomentSummary::compute(
                self.log,
                &self.preds,
                &self.eval,
                ScoreMode::Augmented,
                Denominator::Estimated,
            )?);
        }
        Ok(self.estimated_denom.as_ref().expect("just filled"))
    }

    /// Mean of `sum_a e[a] * f[a]` with either prediction set.
    fn direct_contributions(&self, kind: VarianceKind) -> Vec<f64> {
        let preds = match kind {
            VarianceKind::Batchwise => &self.preds.batchwise,
            VarianceKind::Terminal => &self.preds.terminal,
        };
        self.eval
            .iter()
            .zip(preds)
            .map(|(e, f)| e.iter().zip(f).map(|(ev, fv)| ev * fv).sum())
            .collect()
    }

    fn importance_contributions(&self) -> Vec<f64> {
        self.log
            .records()
            .iter()
            .zip(&self.eval)
            .map(|(rec, e)| {
                e[rec.action - 1] / rec.behavior_probs[rec.action - 1] * rec.reward
            })
            .collect()
    }

    pub fn evaluate(&mut self, spec: &EstimatorSpec, level: f64) -> Result<EstimatorResult> {
        let name = spec.name();
        match spec {
            EstimatorSpec::DirectMethod => estimate_from_contributions(
                name,
                &self.direct_contributions(VarianceKind::Terminal),
                level,
            ),
            EstimatorSpec::AdaptiveDirectMethod => estimate_from_contributions(
                name,
                &self.direct_contributions(VarianceKind::Batchwise),
                level,
            ),
            EstimatorSpec::InverseProbability => {
                estimate_from_contributions(name, &self.importance_contributions(), level)
            }
            EstimatorSpec::Augmented => {
                let summary = self.augmented_summary()?;
                let pooled: Vec<f64> = summary
                    .terminal_scores()
                    .iter()
                    .flatten()
                    .copied()
                    .collect();
                estimate_from_contributions(name, &pooled, level)
            }
            EstimatorSpec::BatchEqual => {
                let summary = self.augmented_summary()?;
                estimate_batch_weighted(name, summary, WeightRule::Equal, 1, level)
            }
            EstimatorSpec::BatchEfficient { kind, steps } => {
                let rule = WeightRule::Efficient { kind: *kind };
                let steps = *steps;
                let summary = self.augmented_summary()?;
                estimate_batch_weighted(name, summary, rule, steps, level)
            }
            EstimatorSpec::BatchStability { alpha, steps } => {
                let rule = WeightRule::Stability { alpha: *alpha };
                let steps = *steps;
                let summary = self.augmented_summary()?;
                estimate_batch_weighted(name, summary, rule, steps, level)
            }
            EstimatorSpec::BatchIpw { steps } => {
                let steps = *steps;
                let summary = self.importance_summary()?;
                estimate_batch_weighted(
                    name,
                    summary,
                    WeightRule::Efficient {
                        kind: VarianceKind::Batchwise,
                    },
                    steps,
                    level,
                )
            }
            EstimatorSpec::DoublyRobustEqual => {
                let summary = self.estimated_denom_summary()?;
                estimate_batch_weighted(name, summary, WeightRule::Equal, 1, level)
            }
            EstimatorSpec::DoublyRobustEfficient { steps } => {
                let steps = *steps;
                let summary = self.estimated_denom_summary()?;
                estimate_batch_weighted(
                    name,
                    summary,
                    WeightRule::Efficient {
                        kind: VarianceKind::Batchwise,
                    },
                    steps,
                    level,
                )
            }
            EstimatorSpec::SharedSupport => {
                deficient::estimate_shared_support(name, self.log, &self.preds, &self.eval, level)
            }
        }
    }
}

/// Evaluates every estimator in `specs` on one log, sharing the nuisance
/// predictions and evaluation probabilities.
pub fn evaluate_all(
    log: &BanditLog,
    seq: &NuisanceSequence,
    policy: &PolicyTable,
    specs: &[EstimatorSpec],
    level: f64,
) -> Result<Vec<EstimatorResult>> {
    let mut ctx = EvalContext::new(log, seq, policy)?;
    specs.iter().map(|s| ctx.evaluate(s, level)).collect()
}

/// Evaluates a single estimator on one log.
pub fn evaluate(
    log: &BanditLog,
    seq: &NuisanceSequence,
    policy: &PolicyTable,
    spec: &EstimatorSpec,
    level: f64,
) -> Result<EstimatorResult> {
    let mut ctx = EvalContext::new(log, seq, policy)?;
    ctx.evaluate(spec, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(scores: Vec<Vec<f64>>) -> MomentSummary {
        let total: usize = scores.iter().map(Vec::len).sum();
        let fractions = scores
            .iter()
            .map(|s| s.len() as f64 / total as f64)
            .collect();
        let drift = vec![0.0; scores.len()];
        MomentSummary::from_parts(fractions, scores.clone(), scores, drift).unwrap()
    }

    #[test]
    fn one_step_is_the_equal_weight_estimate() {
        let s = summary(vec![vec![0.0, 2.0], vec![4.0, 6.0]]);
        let trace = n_step_trace(
            &s,
            WeightRule::Efficient {
                kind: VarianceKind::Batchwise,
            },
            1,
        )
        .unwrap();
        assert_eq!(trace.iterations(), 1);
        assert_eq!(trace.final_weights().as_slice(), &[0.5, 0.5]);
        assert_eq!(trace.final_estimate(), 0.5 * 1.0 + 0.5 * 5.0);
        assert!(!trace.converged);
    }

    #[test]
    fn reweighting_moves_mass_to_the_quiet_batch() {
        // Batch 1 scores are spread out, batch 2 scores are constant, and
        // both means are 3, so the estimate stays put while the weights
        // migrate to batch 2 and converge.
        let s = summary(vec![vec![0.0, 6.0], vec![3.0, 3.0]]);
        let trace = n_step_trace(
            &s,
            WeightRule::Efficient {
                kind: VarianceKind::Batchwise,
            },
            10,
        )
        .unwrap();
        assert!(trace.converged, "{:?}", trace.weights);
        assert!(trace.iterations() <= 10);
        let w = trace.final_weights().as_slice();
        assert!(w[1] > 0.999_999, "{w:?}");
        assert!((trace.final_estimate() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn equal_rule_converges_immediately() {
        let s = summary(vec![vec![0.0, 2.0], vec![4.0, 6.0]]);
        let trace = n_step_trace(&s, WeightRule::Equal, 10).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterations(), 2);
        assert_eq!(trace.final_estimate(), 3.0);
    }

    #[test]
    fn interval_matches_hand_computation() {
        let (lo, hi) = confidence_interval(0.5, 1.0, 1000, 0.95).unwrap();
        let half = 1.96 * (1.0f64 / 1000.0).sqrt();
        assert!((hi - 0.5 - half).abs() < 1e-15);
        assert!((0.5 - lo - half).abs() < 1e-15);
        assert!((half - 0.061_980_642_139_300_23).abs() < 1e-15);
    }

    #[test]
    fn unsupported_levels_are_rejected() {
        assert!(z_value(0.9).is_ok());
        assert!(z_value(0.95).is_ok());
        assert!(z_value(0.99).is_ok());
        assert!(matches!(z_value(0.85), Err(CoreError::Unsupported(_))));
        assert!(confidence_interval(0.0, -1.0, 10, 0.95).is_err());
    }

    #[test]
    fn batch_weighted_report_is_consistent() {
        let s = summary(vec![vec![0.0, 2.0], vec![1.0, 1.0]]);
        let got = estimate_batch_weighted(
            "EBA2IPW",
            &s,
            WeightRule::Efficient {
                kind: VarianceKind::Batchwise,
            },
            10,
            0.95,
        )
        .unwrap();
        let w = got.weights.as_ref().unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(got.ci_lower <= got.estimate && got.estimate <= got.ci_upper);
        assert_eq!(got.level, 0.95);
        let diag = got.diagnostics.as_ref().unwrap();
        assert_eq!(diag.means.len(), 2);
        // Reported variance is the weighted combination of the per-batch
        // variances at the reported estimate.
        let vars = s.var_hat(got.estimate);
        let combined: f64 = w.iter().zip(&vars).map(|(w, v)| w * w * v).sum();
        assert!((combined - got.asymptotic_variance).abs() < 1e-15);
    }

    #[test]
    fn contribution_estimates_use_population_variance() {
        let got = estimate_from_contributions("IPW", &[0.0, 1.0, 2.0, 3.0], 0.95).unwrap();
        assert!((got.estimate - 1.5).abs() < 1e-15);
        assert!((got.asymptotic_variance - 1.25).abs() < 1e-15);
        assert!((got.std_error - (1.25f64 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn spec_names_are_stable() {
        assert_eq!(EstimatorSpec::BatchEqual.name(), "PBA2IPW");
        assert_eq!(
            EstimatorSpec::BatchEfficient {
                kind: VarianceKind::Terminal,
                steps: 10
            }
            .name(),
            "EBA2IPW'"
        );
        assert_eq!(EstimatorSpec::SharedSupport.name(), "BA2IPWIS");
        let menu = EstimatorSpec::standard_menu();
        assert_eq!(menu.len(), 9);
    }

    #[test]
    fn spec_serde_round_trips() {
        let spec = EstimatorSpec::BatchEfficient {
            kind: VarianceKind::Batchwise,
            steps: 10,
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back: EstimatorSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
        // Omitted fields take their defaults.
        let with_default: EstimatorSpec =
            serde_json::from_str(r#"{"estimator":"batch_stability"}"#).unwrap();
        assert_eq!(
            with_default,
            EstimatorSpec::BatchStability {
                alpha: DEFAULT_STABILITY_ALPHA,
                steps: DEFAULT_STEPS
            }
        );
    }
}
