//! Off-policy evaluation for batched contextual bandit logs.
//!
//! Logs produced by batched adaptive experiments violate the i.i.d.
//! assumptions behind classical off-policy estimators: the behavior policy
//! of each batch depends on everything observed before it. This crate
//! provides estimators built for that setting, along with the machinery
//! to exercise them end to end:
//!
//! - [`log`]: the batched log format with stable JSONL serialization.
//! - [`schedule`], [`policy`]: batch boundaries and action distributions.
//! - [`behavior`]: adaptive behavior policies for generating logs, each
//!   reconstructible from the data available before a batch starts.
//! - [`env`], [`simulate`]: synthetic reward models and log sampling,
//!   plus conversion of classification datasets into bandit logs.
//! - [`nuisance`]: outcome regression and propensity estimation fitted
//!   batch by batch on strictly prior data.
//! - [`ope`]: the estimators themselves with weighting schemes and
//!   confidence intervals.
//! - [`opl`]: policy selection over a candidate menu.
//!
//! Everything randomized takes an explicit seed and is reproducible
//! across platforms.

pub mod behavior;
pub mod classifier;
pub mod env;
pub mod error;
pub mod libsvm;
pub mod log;
pub mod nuisance;
pub mod ope;
pub mod opl;
pub mod policy;
pub mod schedule;
pub mod simulate;

pub use behavior::{
    rw_next_policy, BehaviorPolicy, ConstantBehavior, FixedBehavior, RwBehavior, RwPolicyState,
    UcbBehavior,
};
pub use classifier::{SoftmaxClassifier, SoftmaxOptions};
pub use env::{true_policy_value, ContinuousEnv, DiscreteEnv, SyntheticEnv};
pub use error::{CoreError, Result};
pub use libsvm::{parse_libsvm, LibsvmDataset};
pub use log::{BanditLog, LogRecord};
pub use nuisance::{
    build_nuisance_sequence, empirical_propensity, fit_propensity, BandwidthSpec,
    NuisanceSequence, OutcomeMethod, Regressor,
};
pub use ope::{
    batch_means, confidence_interval, efficiency_bound, estimate_ba2ipwis,
    estimate_batch_weighted, evaluate, evaluate_all, n_step_trace, EstimatorResult,
    EstimatorSpec, MomentSummary, VarianceKind, WeightRule, WeightVector,
};
pub use opl::{select_policy, PolicyCandidate, PolicySelection};
pub use policy::{mix_policies, PolicyTable};
pub use schedule::BatchSchedule;
pub use simulate::{classification_to_bandit, sample_batched_log};
