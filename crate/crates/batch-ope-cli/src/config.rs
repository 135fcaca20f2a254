//! JSON configuration for the command-line tools.
//!
//! Config structs mirror the core types one-to-one but keep their own
//! serde shapes, so the wire format can stay stable independently of the
//! library's internals. Every `build` method validates and constructs the
//! corresponding core object.

use batch_ope::behavior::{BehaviorPolicy, ConstantBehavior, FixedBehavior, RwBehavior, UcbBehavior};
use batch_ope::nuisance::{BandwidthSpec, OutcomeMethod};
use batch_ope::{
    BatchSchedule, ContinuousEnv, CoreError, DiscreteEnv, EstimatorSpec, PolicyTable, Result,
    SyntheticEnv,
};
use serde::{Deserialize, Serialize};

/// Synthetic reward model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EnvConfig {
    /// Randomly drawn finite-covariate Bernoulli environment.
    DiscreteRandom {
        num_covariates: usize,
        num_actions: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Explicit covariate distribution and mean-reward table.
    Discrete {
        covariate_probs: Vec<f64>,
        mean_reward: Vec<Vec<f64>>,
    },
    /// Randomly drawn continuous-covariate environment with sigmoid means.
    ContinuousRandom {
        dim: usize,
        num_actions: usize,
        #[serde(default)]
        seed: u64,
    },
}

impl EnvConfig {
    pub fn build(&self) -> Result<SyntheticEnv> {
        match self {
            EnvConfig::DiscreteRandom {
                num_covariates,
                num_actions,
                seed,
            } => Ok(SyntheticEnv::Discrete(DiscreteEnv::random(
                *num_covariates,
                *num_actions,
                *seed,
            )?)),
            EnvConfig::Discrete {
                covariate_probs,
                mean_reward,
            } => Ok(SyntheticEnv::Discrete(DiscreteEnv::new(
                covariate_probs.clone(),
                mean_reward.clone(),
            )?)),
            EnvConfig::ContinuousRandom {
                dim,
                num_actions,
                seed,
            } => Ok(SyntheticEnv::Continuous(ContinuousEnv::random(
                *dim,
                *num_actions,
                *seed,
            )?)),
        }
    }
}

/// Batch layout: `total_rounds` split as evenly as possible into
/// `num_batches` batches. Defaults to 1500 rounds in 10 batches.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleConfig {
    #[serde(default = "default_total_rounds")]
    pub total_rounds: usize,
    #[serde(default = "default_num_batches")]
    pub num_batches: usize,
}

fn default_total_rounds() -> usize {
    1500
}

fn default_num_batches() -> usize {
    10
}

impl ScheduleConfig {
    pub fn build(&self) -> Result<BatchSchedule> {
        BatchSchedule::even(self.total_rounds, self.num_batches)
    }
}

fn default_exploit_mass() -> f64 {
    0.8
}

fn default_num_buckets() -> usize {
    16
}

/// The logging policy that generated (or generates) the data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BehaviorConfig {
    /// Per-batch random walk over action scores, independent of context.
    RandomWalk { noise_scale: f64 },
    /// Exploit the empirically best arm per covariate bucket.
    Ucb {
        #[serde(default = "default_exploit_mass")]
        exploit_mass: f64,
        #[serde(default = "default_num_buckets")]
        num_buckets: usize,
    },
    /// Known per-batch action distributions.
    Fixed { tables: Vec<Vec<f64>> },
    /// One fixed distribution for every batch.
    Constant { probs: Vec<f64> },
}

impl BehaviorConfig {
    /// Builds the behavior policy. `seed` drives any internal randomness
    /// (only the random walk uses it), so one seed per replication keeps
    /// logs independent.
    pub fn build(&self, num_actions: usize, seed: u64) -> Result<Box<dyn BehaviorPolicy>> {
        match self {
            BehaviorConfig::RandomWalk { noise_scale } => {
                Ok(Box::new(RwBehavior::new(num_actions, *noise_scale, seed)))
            }
            BehaviorConfig::Ucb {
                exploit_mass,
                num_buckets,
            } => Ok(Box::new(UcbBehavior::new(
                num_actions,
                *exploit_mass,
                *num_buckets,
            )?)),
            BehaviorConfig::Fixed { tables } => {
                let tables = tables
                    .iter()
                    .map(|row| PolicyTable::global(row.clone()))
                    .collect::<Result<Vec<_>>>()?;
                for t in &tables {
                    if t.num_actions() != num_actions {
                        return Err(CoreError::InvalidPolicy(format!(
                            "behavior table covers {} actions, expected {num_actions}",
                            t.num_actions()
                        )));
                    }
                }
                Ok(Box::new(FixedBehavior::new(tables)?))
            }
            BehaviorConfig::Constant { probs } => {
                let table = PolicyTable::global(probs.clone())?;
                if table.num_actions() != num_actions {
                    return Err(CoreError::InvalidPolicy(format!(
                        "behavior covers {} actions, expected {num_actions}",
                        table.num_actions()
                    )));
                }
                Ok(Box::new(ConstantBehavior(table)))
            }
        }
    }
}

/// The target policy being evaluated.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EvalPolicyConfig {
    /// One action distribution everywhere.
    Global { probs: Vec<f64> },
    /// One distribution per integer covariate code.
    Indexed { rows: Vec<Vec<f64>> },
}

impl EvalPolicyConfig {
    pub fn build(&self) -> Result<PolicyTable> {
        match self {
            EvalPolicyConfig::Global { probs } => PolicyTable::global(probs.clone()),
            EvalPolicyConfig::Indexed { rows } => PolicyTable::indexed(rows.clone()),
        }
    }
}

/// Outcome-model family fitted per batch on strictly prior data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum OutcomeConfig {
    /// Per-covariate-code empirical means (integer-coded covariates).
    TableMean,
    /// All predictions zero; reduces augmented scores to importance
    /// weighting.
    Zero,
    /// Gaussian-kernel regression; omit `bandwidth` for the data-driven
    /// rule.
    NadarayaWatson {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bandwidth: Option<f64>,
    },
    KNearest { neighbors: usize },
}

impl OutcomeConfig {
    pub fn build(&self) -> OutcomeMethod {
        match self {
            OutcomeConfig::TableMean => OutcomeMethod::TableMean,
            OutcomeConfig::Zero => OutcomeMethod::Zero,
            OutcomeConfig::NadarayaWatson { bandwidth: None } => {
                OutcomeMethod::NadarayaWatson(BandwidthSpec::Silverman)
            }
            OutcomeConfig::NadarayaWatson {
                bandwidth: Some(h),
            } => OutcomeMethod::NadarayaWatson(BandwidthSpec::Scalar(*h)),
            OutcomeConfig::KNearest { neighbors } => OutcomeMethod::Knn {
                neighbors: *neighbors,
            },
        }
    }
}

/// Nuisance estimation: outcome models always, propensity models when a
/// floor is given (needed by the estimated-denominator estimators).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NuisanceConfig {
    pub outcome: OutcomeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propensity_floor: Option<f64>,
}

fn default_level() -> f64 {
    0.95
}

fn default_replications() -> usize {
    100
}

fn default_estimators() -> Vec<EstimatorSpec> {
    EstimatorSpec::standard_menu()
}

fn default_eval_mixture() -> f64 {
    0.9
}

/// Config for `simulate`: draw one batched log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub env: EnvConfig,
    pub schedule: ScheduleConfig,
    pub behavior: BehaviorConfig,
    #[serde(default)]
    pub seed: u64,
}

/// Config for `estimate`: run an estimator menu on an existing log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub evaluation: EvalPolicyConfig,
    pub nuisance: NuisanceConfig,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default = "default_level")]
    pub level: f64,
}

/// Config for a synthetic-environment replication study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticExperimentConfig {
    pub env: EnvConfig,
    pub schedule: ScheduleConfig,
    pub behavior: BehaviorConfig,
    pub evaluation: EvalPolicyConfig,
    pub nuisance: NuisanceConfig,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Config for a classification-dataset replication study. Each
/// replication reshuffles the dataset into classifier-training rows, log
/// rows, and a holdout that defines the reference value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationExperimentConfig {
    /// Path to a LIBSVM-format multiclass dataset.
    pub dataset: String,
    pub schedule: ScheduleConfig,
    pub behavior: BehaviorConfig,
    pub nuisance: NuisanceConfig,
    /// Rows used to train the classifier behind the target policy.
    pub train_rounds: usize,
    /// Weight on the classifier's action; the rest spreads uniformly.
    #[serde(default = "default_eval_mixture")]
    pub eval_mixture: f64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
}

/// A replication study over either source of logs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Synthetic(SyntheticExperimentConfig),
    Classification(ClassificationExperimentConfig),
}

impl ExperimentConfig {
    pub fn replications(&self) -> usize {
        match self {
            ExperimentConfig::Synthetic(c) => c.replications,
            ExperimentConfig::Classification(c) => c.replications,
        }
    }

    pub fn set_replications(&mut self, n: usize) {
        match self {
            ExperimentConfig::Synthetic(c) => c.replications = n,
            ExperimentConfig::Classification(c) => c.replications = n,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ExperimentConfig::Synthetic(c) => c.seed = seed,
            ExperimentConfig::Classification(c) => c.seed = seed,
        }
    }
}
