//! Log generation: synthetic environments and classification streams.

use rand::Rng;
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::behavior::BehaviorPolicy;
use crate::env::SyntheticEnv;
use crate::error::{CoreError, Result};
use crate::libsvm::LibsvmDataset;
use crate::log::{BanditLog, LogRecord};
use crate::schedule::BatchSchedule;

/// Draws an action (1-based) from a validated probability row. Actions
/// with zero probability are never returned.
pub fn sample_action<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    let mut last_positive = None;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cum += p;
        last_positive = Some(i);
        if u < cum {
            return i + 1;
        }
    }
    last_positive.expect("validated row has a positive entry") + 1
}

/// Runs the batched logging loop: before each batch the behavior policy is
/// asked for its table given only the records logged so far, then every
/// round of the batch draws an action from that table and a reward from
/// `draw_reward`.
fn run_batches<R, C, D>(
    schedule: &BatchSchedule,
    num_actions: usize,
    behavior: &dyn BehaviorPolicy,
    rng: &mut R,
    mut draw_context: C,
    mut draw_reward: D,
) -> Result<BanditLog>
where
    R: Rng,
    C: FnMut(&mut R, usize) -> Vec<f64>,
    D: FnMut(&mut R, usize, &[f64], usize) -> Result<f64>,
{
    if behavior.num_actions() != num_actions {
        return Err(CoreError::InvalidPolicy(format!(
            "behavior covers {} actions, environment has {}",
            behavior.num_actions(),
            num_actions
        )));
    }
    let mut records: Vec<LogRecord> = Vec::with_capacity(schedule.total_rounds());
    for tau in 1..=schedule.num_batches() {
        let table = behavior.policy_for_batch(tau, &records)?;
        if table.num_actions() != num_actions {
            return Err(CoreError::InvalidPolicy(format!(
                "batch {} policy covers {} actions, expected {}",
                tau,
                table.num_actions(),
                num_actions
            )));
        }
        for t in schedule.batch_start(tau)? + 1..=schedule.batch_end(tau)? {
            let x = draw_context(rng, t);
            let probs = table.probs(&x)?;
            let action = sample_action(rng, &probs);
            let reward = draw_reward(rng, t, &x, action)?;
            records.push(LogRecord {
                t,
                batch: tau,
                x,
                action,
                reward,
                behavior_probs: probs,
            });
        }
    }
    BanditLog::new(schedule.clone(), num_actions, records)
}

/// Samples a full batched log from a synthetic environment. The same seed,
/// environment, schedule, and behavior always produce the same log.
pub fn sample_batched_log(
    env: &SyntheticEnv,
    schedule: &BatchSchedule,
    behavior: &dyn BehaviorPolicy,
    seed: u64,
) -> Result<BanditLog> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_batches(
        schedule,
        env.num_actions(),
        behavior,
        &mut rng,
        |rng, _| env.sample_covariate(rng),
        |rng, _, x, a| env.sample_reward(rng, x, a),
    )
}

/// Streams a labeled dataset as a bandit log: rows are visited in a
/// seed-shuffled order without replacement, the label acts as the one good
/// arm, and the reward is `1[action == label]`.
pub fn classification_to_bandit(
    dataset: &LibsvmDataset,
    schedule: &BatchSchedule,
    behavior: &dyn BehaviorPolicy,
    seed: u64,
) -> Result<BanditLog> {
    let total = schedule.total_rounds();
    if total > dataset.len() {
        return Err(CoreError::InvalidArgument(format!(
            "log needs {} rounds but the dataset has {} rows",
            total,
            dataset.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut rng);
    let labels: Vec<usize> = order[..total]
        .iter()
        .map(|&row| dataset.labels()[row])
        .collect();
    run_batches(
        schedule,
        dataset.num_classes(),
        behavior,
        &mut rng,
        |_, t| dataset.dense_row(order[t - 1]),
        |_, t, _, action| Ok(f64::from(u8::from(action == labels[t - 1]))),
    )
}
