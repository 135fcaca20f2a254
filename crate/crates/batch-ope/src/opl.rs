//! Policy selection from a candidate set.
//!
//! Off-policy learning over a finite menu: every candidate is evaluated
//! on the same log with the same estimator, and the one with the highest
//! estimate wins. The per-round nuisance predictions are shared across
//! candidates; only the evaluation probabilities change.

use crate::error::{CoreError, Result};
use crate::log::BanditLog;
use crate::nuisance::NuisanceSequence;
use crate::ope::estimators::{EstimatorResult, EstimatorSpec, EvalContext};
use crate::ope::score::{eval_probs, NuisancePredictions};
use crate::policy::PolicyTable;

/// A named policy entered into selection.
#[derive(Debug, Clone)]
pub struct PolicyCandidate {
    pub id: String,
    pub policy: PolicyTable,
}

/// The winning candidate with every candidate's evaluation.
#[derive(Debug, Clone)]
pub struct PolicySelection {
    /// Index of the winner in the candidate slice.
    pub chosen: usize,
    pub chosen_id: String,
    /// One result per candidate, in input order. Result names are
    /// `estimator:candidate-id`.
    pub results: Vec<EstimatorResult>,
}

/// Evaluates every candidate with `spec` and picks the highest estimate.
/// Ties go to the earliest candidate.
pub fn select_policy(
    log: &BanditLog,
    seq: &NuisanceSequence,
    candidates: &[PolicyCandidate],
    spec: &EstimatorSpec,
    level: f64,
) -> Result<PolicySelection> {
    if candidates.is_empty() {
        return Err(CoreError::InvalidArgument(
            "policy selection needs at least one candidate".into(),
        ));
    }
    let preds = NuisancePredictions::compute(log, seq)?;
    let mut results = Vec::with_capacity(candidates.len());
    for candidate in candidates {
        let eval = eval_probs(log, &candidate.policy)?;
        let mut ctx = EvalContext::from_parts(log, preds.clone(), eval)?;
        let mut result = ctx.evaluate(spec, level)?;
        result.name = format!("{}:{}", result.name, candidate.id);
        results.push(result);
    }
    let mut chosen = 0;
    for (i, r) in results.iter().enumerate().skip(1) {
        if r.estimate > results[chosen].estimate {
            chosen = i;
        }
    }
    Ok(PolicySelection {
        chosen,
        chosen_id: candidates[chosen].id.clone(),
        results,
    })
}
