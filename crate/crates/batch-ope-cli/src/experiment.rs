//! Replication studies: many independent logs, one estimator menu,
//! aggregated error and coverage statistics.

use std::fs::File;
use std::io::BufReader;

use batch_ope::classifier::{SoftmaxClassifier, SoftmaxOptions};
use batch_ope::policy::mix_policies;
use batch_ope::{
    classification_to_bandit, evaluate_all, parse_libsvm, sample_batched_log, true_policy_value,
    CoreError, EstimatorResult, LibsvmDataset, PolicyTable, Result, SyntheticEnv,
};
use batch_ope::nuisance::build_nuisance_sequence;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{
    ClassificationExperimentConfig, ExperimentConfig, SyntheticExperimentConfig,
};

/// Offset mixed into per-replication seeds for the behavior policy's own
/// randomness, so it does not share a stream with the environment draws.
const BEHAVIOR_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Offset for the dataset split shuffle in classification studies.
const SPLIT_SEED_OFFSET: u64 = 0x6A09_E667_F3BC_C908;

/// Draw count for Monte Carlo reference values on continuous
/// environments.
const REFERENCE_DRAWS: usize = 200_000;

/// One replication's estimator outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub replication: usize,
    pub seed: u64,
    /// Ground-truth (or holdout-reference) value of the target policy for
    /// this replication.
    pub theta_ref: f64,
    pub results: Vec<EstimatorResult>,
}

/// Aggregated performance of one estimator across replications.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub name: String,
    /// Mean squared error against the reference value.
    pub mse: f64,
    /// Sample standard deviation of the squared errors.
    pub mse_sd: f64,
    /// Mean error.
    pub bias: f64,
    /// Fraction of replications whose interval covered the reference.
    pub coverage: f64,
    pub mean_ci_width: f64,
    pub mean_estimate: f64,
}

/// A full study: per-estimator summaries plus the raw rows they were
/// computed from, the config echoed verbatim for provenance, and the
/// wall-clock time. Everything except `wall_clock_seconds` is a pure
/// function of the config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub mode: String,
    /// Mean reference value across replications (constant for synthetic
    /// studies).
    pub theta_ref: f64,
    pub replications: usize,
    pub level: f64,
    pub wall_clock_seconds: f64,
    pub config: ExperimentConfig,
    pub summaries: Vec<EstimatorSummary>,
    pub rows: Vec<ReplicationRow>,
}

/// True value of the target policy: exact for finite covariate spaces,
/// seeded Monte Carlo otherwise.
pub fn reference_value(env: &SyntheticEnv, policy: &PolicyTable) -> Result<f64> {
    match env {
        SyntheticEnv::Discrete(_) => true_policy_value(env, policy),
        SyntheticEnv::Continuous(_) => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0000_0000_0001);
            let mut acc = 0.0;
            for _ in 0..REFERENCE_DRAWS {
                let x = env.sample_covariate(&mut rng);
                let probs = policy.probs(&x)?;
                for (a0, &p) in probs.iter().enumerate() {
                    if p > 0.0 {
                        acc += p * env.mean_reward_at(&x, a0 + 1)?;
                    }
                }
            }
            Ok(acc / REFERENCE_DRAWS as f64)
        }
    }
}

/// Aggregates rows into per-estimator summaries. Every row must carry the
/// same estimators in the same order.
pub fn summarize(rows: &[ReplicationRow]) -> Result<Vec<EstimatorSummary>> {
    let first = rows
        .first()
        .ok_or_else(|| CoreError::InvalidArgument("no replications".into()))?;
    let n = rows.len() as f64;
    let mut summaries = Vec::with_capacity(first.results.len());
    for (j, lead) in first.results.iter().enumerate() {
        let mut sq_errors = Vec::with_capacity(rows.len());
        let mut bias = 0.0;
        let mut covered = 0usize;
        let mut width = 0.0;
        let mut mean_estimate = 0.0;
        for row in rows {
            let r = row.results.get(j).ok_or_else(|| {
                CoreError::InvalidArgument("replications disagree on the estimator menu".into())
            })?;
            if r.name != lead.name {
                return Err(CoreError::InvalidArgument(
                    "replications disagree on the estimator menu".into(),
                ));
            }
            let err = r.estimate - row.theta_ref;
            sq_errors.push(err * err);
            bias += err;
            if r.ci_lower <= row.theta_ref && row.theta_ref <= r.ci_upper {
                covered += 1;
            }
            width += r.ci_upper - r.ci_lower;
            mean_estimate += r.estimate;
        }
        let mse = sq_errors.iter().sum::<f64>() / n;
        let mse_sd = if rows.len() > 1 {
            (sq_errors.iter().map(|&e| (e - mse) * (e - mse)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        summaries.push(EstimatorSummary {
            name: lead.name.clone(),
            mse,
            mse_sd,
            bias: bias / n,
            coverage: covered as f64 / n,
            mean_ci_width: width / n,
            mean_estimate: mean_estimate / n,
        });
    }
    Ok(summaries)
}

/// Runs a synthetic replication study: each replication draws a fresh log
/// from the same environment and behavior family, refits nuisances, and
/// evaluates the whole menu.
pub fn run_synthetic(cfg: &SyntheticExperimentConfig) -> Result<ExperimentReport> {
    let started = std::time::Instant::now();
    if cfg.replications == 0 {
        return Err(CoreError::InvalidArgument(
            "at least one replication is required".into(),
        ));
    }
    let env = cfg.env.build()?;
    let schedule = cfg.schedule.build()?;
    let policy = cfg.evaluation.build()?;
    if policy.num_actions() != env.num_actions() {
        return Err(CoreError::InvalidPolicy(format!(
            "evaluation policy covers {} actions, environment has {}",
            policy.num_actions(),
            env.num_actions()
        )));
    }
    let theta_ref = reference_value(&env, &policy)?;
    let method = cfg.nuisance.outcome.build();

    let rows: Vec<ReplicationRow> = (0..cfg.replications)
        .into_par_iter()
        .map(|i| -> Result<ReplicationRow> {
            let seed = cfg.seed.wrapping_add(i as u64);
            let behavior = cfg
                .behavior
                .build(env.num_actions(), seed.wrapping_add(BEHAVIOR_SEED_OFFSET))?;
            let log = sample_batched_log(&env, &schedule, behavior.as_ref(), seed)?;
            let seq = build_nuisance_sequence(&log, &method, cfg.nuisance.propensity_floor)?;
            let results = evaluate_all(&log, &seq, &policy, &cfg.estimators, cfg.level)?;
            Ok(ReplicationRow {
                replication: i,
                seed,
                theta_ref,
                results,
            })
        })
        .collect::<Result<_>>()?;

    let summaries = summarize(&rows)?;
    Ok(ExperimentReport {
        mode: "synthetic".into(),
        theta_ref,
        replications: cfg.replications,
        level: cfg.level,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        config: ExperimentConfig::Synthetic(cfg.clone()),
        summaries,
        rows,
    })
}

/// Runs a classification replication study. Each replication shuffles the
/// dataset into classifier-training rows, log rows, and a holdout; the
/// target policy mixes the trained classifier with uniform exploration,
/// and the holdout's expected accuracy under that policy is the reference
/// value.
pub fn run_classification(cfg: &ClassificationExperimentConfig) -> Result<ExperimentReport> {
    let started = std::time::Instant::now();
    if cfg.replications == 0 {
        return Err(CoreError::InvalidArgument(
            "at least one replication is required".into(),
        ));
    }
    let file = File::open(&cfg.dataset)?;
    let dataset = parse_libsvm(BufReader::new(file))?;
    let schedule = cfg.schedule.build()?;
    let total = schedule.total_rounds();
    if cfg.train_rounds == 0 {
        return Err(CoreError::InvalidArgument(
            "classifier training needs at least one row".into(),
        ));
    }
    if cfg.train_rounds + total + 1 > dataset.len() {
        return Err(CoreError::InvalidArgument(format!(
            "dataset has {} rows; need more than train_rounds + total_rounds = {}",
            dataset.len(),
            cfg.train_rounds + total
        )));
    }
    if !(0.0..=1.0).contains(&cfg.eval_mixture) {
        return Err(CoreError::InvalidArgument(format!(
            "eval_mixture {} outside [0, 1]",
            cfg.eval_mixture
        )));
    }
    let k = dataset.num_classes();
    let method = cfg.nuisance.outcome.build();

    let rows: Vec<ReplicationRow> = (0..cfg.replications)
        .into_par_iter()
        .map(|i| -> Result<ReplicationRow> {
            let seed = cfg.seed.wrapping_add(i as u64);
            let mut order: Vec<usize> = (0..dataset.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(SPLIT_SEED_OFFSET));
            order.shuffle(&mut rng);
            let train = dataset.select(&order[..cfg.train_rounds])?;
            let log_rows = dataset.select(&order[cfg.train_rounds..cfg.train_rounds + total])?;
            let holdout = dataset.select(&order[cfg.train_rounds + total..])?;

            let classifier = SoftmaxClassifier::fit(
                &train.dense_rows(),
                train.labels(),
                k,
                SoftmaxOptions::default(),
            )?;
            let policy = mix_policies(
                PolicyTable::Classifier(classifier),
                PolicyTable::uniform(k)?,
                cfg.eval_mixture,
            )?;
            let theta_ref = holdout_value(&holdout, &policy)?;

            let behavior = cfg
                .behavior
                .build(k, seed.wrapping_add(BEHAVIOR_SEED_OFFSET))?;
            let log = classification_to_bandit(&log_rows, &schedule, behavior.as_ref(), seed)?;
            let seq = build_nuisance_sequence(&log, &method, cfg.nuisance.propensity_floor)?;
            let results = evaluate_all(&log, &seq, &policy, &cfg.estimators, cfg.level)?;
            Ok(ReplicationRow {
                replication: i,
                seed,
                theta_ref,
                results,
            })
        })
        .collect::<Result<_>>()?;

    let theta_ref = rows.iter().map(|r| r.theta_ref).sum::<f64>() / rows.len() as f64;
    let summaries = summarize(&rows)?;
    Ok(ExperimentReport {
        mode: "classification".into(),
        theta_ref,
        replications: cfg.replications,
        level: cfg.level,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        config: ExperimentConfig::Classification(cfg.clone()),
        summaries,
        rows,
    })
}

/// Expected accuracy of `policy` on labeled holdout rows: the mean
/// probability assigned to the true label.
pub fn holdout_value(holdout: &LibsvmDataset, policy: &PolicyTable) -> Result<f64> {
    if holdout.is_empty() {
        return Err(CoreError::InvalidArgument("empty holdout".into()));
    }
    let mut acc = 0.0;
    for i in 0..holdout.len() {
        let probs = policy.probs(&holdout.dense_row(i))?;
        acc += probs[holdout.labels()[i] - 1];
    }
    Ok(acc / holdout.len() as f64)
}

/// Runs whichever study the config describes.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg {
        ExperimentConfig::Synthetic(c) => run_synthetic(c),
        ExperimentConfig::Classification(c) => run_classification(c),
    }
}
