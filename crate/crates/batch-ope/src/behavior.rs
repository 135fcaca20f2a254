//! Batch-adaptive behavior policies.
//!
//! A behavior policy commits to one [`PolicyTable`] per batch, chosen from
//! the data observed before that batch starts. Generators must be pure in
//! `(their own parameters, batch index, pre-batch history)` so that a
//! batch's probabilities can be regenerated from a truncated log and
//! compared exactly.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{CoreError, Result};
use crate::log::LogRecord;
use crate::policy::{nearest_index, PolicyTable};

pub trait BehaviorPolicy {
    fn num_actions(&self) -> usize;

    /// Policy for batch `tau` (1-based). `history` holds exactly the
    /// records with `t <= t_{tau-1}`.
    fn policy_for_batch(&self, tau: usize, history: &[LogRecord]) -> Result<PolicyTable>;
}

// ─── Random-walk behavior ───

/// Raw per-action scores of a random-walk policy. The walk lives on the
/// scores; standardization to a probability row happens per batch when the
/// policy is read off.
#[derive(Debug, Clone)]
pub struct RwPolicyState {
    scores: Vec<f64>,
    noise_scale: f64,
    rng: ChaCha8Rng,
}

impl RwPolicyState {
    /// Initial scores drawn uniformly from `[0, 1)`.
    pub fn init(num_actions: usize, noise_scale: f64, seed: u64) -> Result<Self> {
        if num_actions == 0 {
            return Err(CoreError::InvalidPolicy("need at least one action".into()));
        }
        if !noise_scale.is_finite() || noise_scale < 0.0 {
            return Err(CoreError::InvalidArgument(format!(
                "noise scale {noise_scale} must be non-negative"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scores = (0..num_actions).map(|_| rng.gen::<f64>()).collect();
        Ok(Self {
            scores,
            noise_scale,
            rng,
        })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Standardized view of the current scores.
    pub fn policy(&self) -> PolicyTable {
        PolicyTable::Global(standardize_scores(&self.scores))
    }
}

/// Advances the walk one batch: adds `noise_scale * N(0, 1)` to every score
/// and returns the standardized policy together with the new state.
pub fn rw_next_policy(state: &RwPolicyState) -> (PolicyTable, RwPolicyState) {
    let mut next = state.clone();
    for s in &mut next.scores {
        let z: f64 = StandardNormal.sample(&mut next.rng);
        *s += state.noise_scale * z;
    }
    (next.policy(), next)
}

/// Maps raw scores to a strictly positive probability row: when any score
/// is non-positive, every score is shifted by `-min + 0.01` first; the row
/// is then divided by its sum.
pub fn standardize_scores(scores: &[f64]) -> Vec<f64> {
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let mut row: Vec<f64> = if min <= 0.0 {
        scores.iter().map(|s| s - min + 0.01).collect()
    } else {
        scores.to_vec()
    };
    let sum: f64 = row.iter().sum();
    for p in &mut row {
        *p /= sum;
    }
    row
}

/// Covariate-independent random-walk behavior. Batch 1 uses the
/// standardized initial draw; each later batch adds one noise step.
#[derive(Debug, Clone)]
pub struct RwBehavior {
    pub num_actions: usize,
    pub noise_scale: f64,
    pub seed: u64,
}

impl RwBehavior {
    pub fn new(num_actions: usize, noise_scale: f64, seed: u64) -> Self {
        Self {
            num_actions,
            noise_scale,
            seed,
        }
    }
}

impl BehaviorPolicy for RwBehavior {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn policy_for_batch(&self, tau: usize, _history: &[LogRecord]) -> Result<PolicyTable> {
        if tau == 0 {
            return Err(CoreError::InvalidArgument("batch indices are 1-based".into()));
        }
        // Replay the walk from the seed so the result is pure in (seed, tau).
        let mut state = RwPolicyState::init(self.num_actions, self.noise_scale, self.seed)?;
        for _ in 1..tau {
            state = rw_next_policy(&state).1;
        }
        Ok(state.policy())
    }
}

// ─── Greedy bucketed behavior ───

/// Behavior that plays the empirically best action with fixed mass and
/// spreads the rest uniformly, with "best" judged per covariate bucket.
/// Buckets are centroids fit on the first logged batch; before any data
/// exists there is a single bucket and action 1 is treated as best.
#[derive(Debug, Clone)]
pub struct UcbBehavior {
    pub num_actions: usize,
    pub exploit_mass: f64,
    pub num_buckets: usize,
}

impl UcbBehavior {
    pub fn new(num_actions: usize, exploit_mass: f64, num_buckets: usize) -> Result<Self> {
        if num_actions == 0 {
            return Err(CoreError::InvalidPolicy("need at least one action".into()));
        }
        if !(0.0..=1.0).contains(&exploit_mass) {
            return Err(CoreError::InvalidArgument(format!(
                "exploit mass {exploit_mass} outside [0, 1]"
            )));
        }
        if num_buckets == 0 {
            return Err(CoreError::InvalidArgument("need at least one bucket".into()));
        }
        Ok(Self {
            num_actions,
            exploit_mass,
            num_buckets,
        })
    }

    fn row_for_best(&self, best: usize) -> Vec<f64> {
        let k = self.num_actions;
        if k == 1 {
            return vec![1.0];
        }
        let rest = (1.0 - self.exploit_mass) / (k - 1) as f64;
        let mut row = vec![rest; k];
        row[best] = self.exploit_mass;
        row
    }
}

impl BehaviorPolicy for UcbBehavior {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn policy_for_batch(&self, tau: usize, history: &[LogRecord]) -> Result<PolicyTable> {
        if tau == 0 {
            return Err(CoreError::InvalidArgument("batch indices are 1-based".into()));
        }
        if history.is_empty() {
            return PolicyTable::global(self.row_for_best(0));
        }
        let first_batch: Vec<&LogRecord> = history.iter().filter(|r| r.batch == 1).collect();
        let dim = history[0].x.len();
        let centroids = if dim == 0 {
            vec![Vec::new()]
        } else {
            let points: Vec<Vec<f64>> = first_batch.iter().map(|r| r.x.clone()).collect();
            kmeans(&points, self.num_buckets, 10)
        };

        // Empirical mean reward per (bucket, action); unseen cells stay 0.
        let b = centroids.len();
        let mut sums = vec![vec![0.0; self.num_actions]; b];
        let mut counts = vec![vec![0usize; self.num_actions]; b];
        for rec in history {
            let bucket = nearest_index(&centroids, &rec.x)?;
            sums[bucket][rec.action - 1] += rec.reward;
            counts[bucket][rec.action - 1] += 1;
        }
        let rows: Vec<Vec<f64>> = (0..b)
            .map(|bucket| {
                let mut best = 0;
                let mut best_mean = f64::NEG_INFINITY;
                for a0 in 0..self.num_actions {
                    let mean = if counts[bucket][a0] == 0 {
                        0.0
                    } else {
                        sums[bucket][a0] / counts[bucket][a0] as f64
                    };
                    if mean > best_mean {
                        best_mean = mean;
                        best = a0;
                    }
                }
                self.row_for_best(best)
            })
            .collect();
        if rows.len() == 1 {
            return PolicyTable::global(rows.into_iter().next().expect("one row"));
        }
        PolicyTable::bucketed(centroids, rows)
    }
}

/// Deterministic Lloyd iterations. Initial centroids are the first
/// `num_buckets` distinct points in order of appearance; clusters that go
/// empty keep their previous centroid. Returns at least one centroid.
pub fn kmeans(points: &[Vec<f64>], num_buckets: usize, max_iters: usize) -> Vec<Vec<f64>> {
    let mut centroids: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if centroids.len() == num_buckets {
            break;
        }
        if !centroids.contains(p) {
            centroids.push(p.clone());
        }
    }
    if centroids.is_empty() {
        return vec![points.first().cloned().unwrap_or_default()];
    }

    let mut assignment = vec![usize::MAX; points.len()];
    for _ in 0..max_iters {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let a = nearest_index(&centroids, p).expect("consistent dimensions");
            if assignment[i] != a {
                assignment[i] = a;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let dim = centroids[0].len();
        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (i, p) in points.iter().enumerate() {
            counts[assignment[i]] += 1;
            for (d, &v) in p.iter().enumerate() {
                sums[assignment[i]][d] += v;
            }
        }
        for (c, centroid) in centroids.iter_mut().enumerate() {
            if counts[c] > 0 {
                for d in 0..dim {
                    centroid[d] = sums[c][d] / counts[c] as f64;
                }
            }
        }
    }
    centroids
}

// ─── Fixed behaviors ───

/// One pre-committed policy per batch; useful for experiments that pin the
/// propensities exactly.
#[derive(Debug, Clone)]
pub struct FixedBehavior {
    tables: Vec<PolicyTable>,
}

impl FixedBehavior {
    pub fn new(tables: Vec<PolicyTable>) -> Result<Self> {
        if tables.is_empty() {
            return Err(CoreError::InvalidPolicy("no batch policies".into()));
        }
        let k = tables[0].num_actions();
        if tables.iter().any(|t| t.num_actions() != k) {
            return Err(CoreError::InvalidPolicy(
                "batch policies cover different action sets".into(),
            ));
        }
        Ok(Self { tables })
    }
}

impl BehaviorPolicy for FixedBehavior {
    fn num_actions(&self) -> usize {
        self.tables[0].num_actions()
    }

    fn policy_for_batch(&self, tau: usize, _history: &[LogRecord]) -> Result<PolicyTable> {
        self.tables
            .get(tau.wrapping_sub(1))
            .cloned()
            .ok_or_else(|| {
                CoreError::InvalidArgument(format!(
                    "no policy for batch {tau}; {} provided",
                    self.tables.len()
                ))
            })
    }
}

/// The same policy in every batch.
#[derive(Debug, Clone)]
pub struct ConstantBehavior(pub PolicyTable);

impl BehaviorPolicy for ConstantBehavior {
    fn num_actions(&self) -> usize {
        self.0.num_actions()
    }

    fn policy_for_batch(&self, _tau: usize, _history: &[LogRecord]) -> Result<PolicyTable> {
        Ok(self.0.clone())
    }
}
