//! Off-policy evaluation on batched logs.
//!
//! [`score`] turns a log into per-round scores and per-batch summaries,
//! [`weights`] supplies batch weight vectors, [`estimators`] combines the
//! two into point estimates with confidence intervals, [`deficient`]
//! handles logs whose behavior policy drops actions in some batches, and
//! [`bound`] enumerates exact score variances for synthetic environments.

pub mod bound;
pub mod deficient;
pub mod estimators;
pub mod score;
pub mod weights;

pub use bound::{batch_score_variances, efficiency_bound, EfficiencyBound};
pub use deficient::{
    deficient_moments, deficient_weights, estimate_ba2ipwis, estimate_shared_support,
    DeficientMoments, KKT_RESIDUAL_TOL,
};
pub use estimators::{
    confidence_interval, estimate_batch_weighted, evaluate, evaluate_all, n_step_trace, z_value,
    BatchDiagnostics, EstimatorResult, EstimatorSpec, EvalContext, NStepTrace, VarianceKind,
    WeightRule, DEFAULT_STABILITY_ALPHA, DEFAULT_STEPS, WEIGHT_STOP_TOL,
};
pub use score::{
    batch_means, eval_probs, phi, Denominator, MomentSummary, NuisancePredictions, ScoreMode,
};
pub use weights::{
    efficient_weights, equal_weights, stability_weights, WeightVector, VARIANCE_FLOOR,
};
