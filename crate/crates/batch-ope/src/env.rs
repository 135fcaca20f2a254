//! Synthetic reward environments.
//!
//! Both variants draw Bernoulli rewards, so `|Y| <= 1` and the per-cell
//! reward variance is `f*(1 - f*)`. The discrete variant has a finite
//! covariate space and supports exact enumeration of policy values; the
//! continuous variant draws standard-normal covariates and squashes a
//! linear score through a sigmoid.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::policy::{index_code, validate_prob_row, PolicyTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteEnv {
    /// Distribution over the finite covariate space.
    covariate_probs: Vec<f64>,
    /// `mean_reward[x][a - 1]` is the Bernoulli mean of action `a` at
    /// covariate code `x`.
    mean_reward: Vec<Vec<f64>>,
}

impl DiscreteEnv {
    pub fn new(covariate_probs: Vec<f64>, mean_reward: Vec<Vec<f64>>) -> Result<Self> {
        if covariate_probs.is_empty() || covariate_probs.len() != mean_reward.len() {
            return Err(CoreError::InvalidEnvironment(format!(
                "{} covariate probabilities for {} reward rows",
                covariate_probs.len(),
                mean_reward.len()
            )));
        }
        validate_prob_row(&covariate_probs, covariate_probs.len())
            .map_err(|e| CoreError::InvalidEnvironment(e.to_string()))?;
        let k = mean_reward[0].len();
        if k == 0 {
            return Err(CoreError::InvalidEnvironment("no actions".into()));
        }
        for row in &mean_reward {
            if row.len() != k {
                return Err(CoreError::InvalidEnvironment(
                    "ragged mean-reward table".into(),
                ));
            }
            if let Some(&bad) = row.iter().find(|m| !m.is_finite() || **m < 0.0 || **m > 1.0) {
                return Err(CoreError::InvalidEnvironment(format!(
                    "Bernoulli mean {bad} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            covariate_probs,
            mean_reward,
        })
    }

    /// Uniform covariates and means drawn uniformly from `[0.1, 0.9]`.
    pub fn random(num_covariates: usize, num_actions: usize, seed: u64) -> Result<Self> {
        if num_covariates == 0 || num_actions == 0 {
            return Err(CoreError::InvalidEnvironment(
                "need at least one covariate and one action".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mean_reward = (0..num_covariates)
            .map(|_| (0..num_actions).map(|_| rng.gen_range(0.1..0.9)).collect())
            .collect();
        Self::new(
            vec![1.0 / num_covariates as f64; num_covariates],
            mean_reward,
        )
    }

    pub fn num_actions(&self) -> usize {
        self.mean_reward[0].len()
    }

    pub fn num_covariates(&self) -> usize {
        self.covariate_probs.len()
    }

    pub fn covariate_probs(&self) -> &[f64] {
        &self.covariate_probs
    }

    /// Bernoulli mean of action `a` (1-based) at covariate code `x`.
    pub fn mean(&self, x: usize, action: usize) -> f64 {
        self.mean_reward[x][action - 1]
    }

    /// Reward variance of action `a` at covariate code `x`.
    pub fn variance(&self, x: usize, action: usize) -> f64 {
        let m = self.mean(x, action);
        m * (1.0 - m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousEnv {
    /// Per-action linear scores; `mean_reward(a, x) = sigmoid(w_a . x + b_a)`.
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

impl ContinuousEnv {
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != bias.len() {
            return Err(CoreError::InvalidEnvironment(format!(
                "{} weight rows for {} biases",
                weights.len(),
                bias.len()
            )));
        }
        let dim = weights[0].len();
        if dim == 0 || weights.iter().any(|w| w.len() != dim) {
            return Err(CoreError::InvalidEnvironment(
                "weight rows must share a positive dimension".into(),
            ));
        }
        let finite = weights.iter().flatten().chain(&bias).all(|v| v.is_finite());
        if !finite {
            return Err(CoreError::InvalidEnvironment(
                "non-finite score parameter".into(),
            ));
        }
        Ok(Self { weights, bias })
    }

    pub fn random(dim: usize, num_actions: usize, seed: u64) -> Result<Self> {
        if dim == 0 || num_actions == 0 {
            return Err(CoreError::InvalidEnvironment(
                "need at least one dimension and one action".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..num_actions)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let bias = (0..num_actions).map(|_| rng.gen_range(-0.5..0.5)).collect();
        Self::new(weights, bias)
    }

    pub fn num_actions(&self) -> usize {
        self.bias.len()
    }

    pub fn dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn mean(&self, x: &[f64], action: usize) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        let score: f64 = self.bias[action - 1]
            + self.weights[action - 1]
                .iter()
                .zip(x)
                .map(|(&w, &v)| w * v)
                .sum::<f64>();
        Ok(1.0 / (1.0 + (-score).exp()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SyntheticEnv {
    Discrete(DiscreteEnv),
    Continuous(ContinuousEnv),
}

impl SyntheticEnv {
    pub fn num_actions(&self) -> usize {
        match self {
            SyntheticEnv::Discrete(env) => env.num_actions(),
            SyntheticEnv::Continuous(env) => env.num_actions(),
        }
    }

    pub fn covariate_dim(&self) -> usize {
        match self {
            SyntheticEnv::Discrete(_) => 1,
            SyntheticEnv::Continuous(env) => env.dim(),
        }
    }

    /// Rewards are Bernoulli in both variants.
    pub fn reward_bound(&self) -> f64 {
        1.0
    }

    pub fn sample_covariate<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            SyntheticEnv::Discrete(env) => {
                let u: f64 = rng.gen();
                let mut cum = 0.0;
                let mut last = 0;
                for (i, &p) in env.covariate_probs.iter().enumerate() {
                    if p <= 0.0 {
                        continue;
                    }
                    cum += p;
                    last = i;
                    if u < cum {
                        return vec![i as f64];
                    }
                }
                vec![last as f64]
            }
            SyntheticEnv::Continuous(env) => (0..env.dim())
                .map(|_| StandardNormal.sample(rng))
                .collect(),
        }
    }

    pub fn mean_reward_at(&self, x: &[f64], action: usize) -> Result<f64> {
        self.check_action(action)?;
        match self {
            SyntheticEnv::Discrete(env) => {
                let code = index_code(x, env.num_covariates())?;
                Ok(env.mean(code, action))
            }
            SyntheticEnv::Continuous(env) => env.mean(x, action),
        }
    }

    pub fn sample_reward<R: Rng>(&self, rng: &mut R, x: &[f64], action: usize) -> Result<f64> {
        let mean = self.mean_reward_at(x, action)?;
        let u: f64 = rng.gen();
        Ok(f64::from(u8::from(u < mean)))
    }

    fn check_action(&self, action: usize) -> Result<()> {
        if action == 0 || action > self.num_actions() {
            return Err(CoreError::InvalidArgument(format!(
                "action {} outside 1..={}",
                action,
                self.num_actions()
            )));
        }
        Ok(())
    }
}

/// Exact policy value `sum_x p(x) sum_a pi(a|x) f*(a, x)` on a finite
/// covariate space. Continuous environments are rejected: their value has
/// no closed form here.
pub fn true_policy_value(env: &SyntheticEnv, policy: &PolicyTable) -> Result<f64> {
    let discrete = match env {
        SyntheticEnv::Discrete(d) => d,
        SyntheticEnv::Continuous(_) => {
            return Err(CoreError::Unsupported(
                "exact policy value needs a finite covariate space".into(),
            ))
        }
    };
    if policy.num_actions() != discrete.num_actions() {
        return Err(CoreError::InvalidPolicy(format!(
            "policy covers {} actions, environment has {}",
            policy.num_actions(),
            discrete.num_actions()
        )));
    }
    let mut value = 0.0;
    for (code, &px) in discrete.covariate_probs.iter().enumerate() {
        let row = policy.probs(&[code as f64])?;
        let mean: f64 = row
            .iter()
            .enumerate()
            .map(|(a0, &p)| p * discrete.mean(code, a0 + 1))
            .sum();
        value += px * mean;
    }
    Ok(value)
}
