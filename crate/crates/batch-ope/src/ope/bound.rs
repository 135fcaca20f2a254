//! Exact per-batch score variances for synthetic discrete environments.
//!
//! With the true outcome means plugged in, the per-batch variance of the
//! augmented score has a closed form that can be enumerated over the
//! covariate support:
//!
//! ```text
//! sigma2_tau = (1 / r_tau) * E_x[ sum_a e(a|x)^2 v(a, x) / q_tau(a|x)
//!                                 + (sum_a e(a|x) f(a, x) - theta0)^2 ]
//! ```
//!
//! where `v` is the reward variance and `q_tau` the batch's behavior
//! probabilities. These are the targets that sampled variance estimates
//! are checked against, and their optimal combination is the smallest
//! variance any batch weighting can reach.

use crate::env::{true_policy_value, DiscreteEnv, SyntheticEnv};
use crate::error::{CoreError, Result};
use crate::policy::PolicyTable;

/// Exact per-batch variances with the variance-optimal and equal-weight
/// combinations.
#[derive(Debug, Clone)]
pub struct EfficiencyBound {
    /// True policy value.
    pub theta0: f64,
    /// Exact `sigma2_tau` per batch.
    pub batch_variances: Vec<f64>,
    /// `(sum_tau 1 / sigma2_tau)^-1`: the minimum of
    /// `sum_tau w_tau^2 sigma2_tau` over the weight simplex.
    pub efficient_variance: f64,
    /// `sum_tau sigma2_tau / M^2`.
    pub equal_weight_variance: f64,
}

/// Enumerates the exact per-batch score variances of a discrete
/// environment under known behavior tables, one per batch.
pub fn batch_score_variances(
    env: &SyntheticEnv,
    eval: &PolicyTable,
    behaviors: &[PolicyTable],
    fractions: &[f64],
) -> Result<Vec<f64>> {
    let discrete = match env {
        SyntheticEnv::Discrete(d) => d,
        SyntheticEnv::Continuous(_) => {
            return Err(CoreError::Unsupported(
                "exact variances need a finite covariate support".into(),
            ))
        }
    };
    if behaviors.len() != fractions.len() || behaviors.is_empty() {
        return Err(CoreError::InvalidArgument(
            "one behavior table and one fraction per batch".into(),
        ));
    }
    if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9
        || fractions.iter().any(|&r| r <= 0.0)
    {
        return Err(CoreError::InvalidArgument(
            "fractions must be positive and sum to one".into(),
        ));
    }
    if eval.num_actions() != env.num_actions() {
        return Err(CoreError::InvalidPolicy(format!(
            "evaluation policy covers {} actions, environment has {}",
            eval.num_actions(),
            env.num_actions()
        )));
    }
    let theta0 = true_policy_value(env, eval)?;
    behaviors
        .iter()
        .zip(fractions)
        .map(|(behavior, &r)| {
            if behavior.num_actions() != env.num_actions() {
                return Err(CoreError::InvalidPolicy(
                    "behavior table action count differs from the environment".into(),
                ));
            }
            Ok(expected_conditional_variance(discrete, eval, behavior, theta0)? / r)
        })
        .collect()
}

fn expected_conditional_variance(
    env: &DiscreteEnv,
    eval: &PolicyTable,
    behavior: &PolicyTable,
    theta0: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for (code, &px) in env.covariate_probs().iter().enumerate() {
        let x = vec![code as f64];
        let e = eval.probs(&x)?;
        let q = behavior.probs(&x)?;
        let mut inner = 0.0;
        let mut conditional_value = 0.0;
        for a0 in 0..env.num_actions() {
            if e[a0] > 0.0 {
                if q[a0] <= 0.0 {
                    return Err(CoreError::ZeroPropensity { action: a0 + 1 });
                }
                inner += e[a0] * e[a0] * env.variance(code, a0 + 1) / q[a0];
            }
            conditional_value += e[a0] * env.mean(code, a0 + 1);
        }
        let centered = conditional_value - theta0;
        total += px * (inner + centered * centered);
    }
    Ok(total)
}

/// Computes [`EfficiencyBound`] for a discrete environment.
pub fn efficiency_bound(
    env: &SyntheticEnv,
    eval: &PolicyTable,
    behaviors: &[PolicyTable],
    fractions: &[f64],
) -> Result<EfficiencyBound> {
    let batch_variances = batch_score_variances(env, eval, behaviors, fractions)?;
    let theta0 = true_policy_value(env, eval)?;
    let m = batch_variances.len() as f64;
    let inv_sum: f64 = batch_variances
        .iter()
        .map(|&v| 1.0 / v.max(f64::MIN_POSITIVE))
        .sum();
    let equal_weight_variance = batch_variances.iter().sum::<f64>() / (m * m);
    Ok(EfficiencyBound {
        theta0,
        batch_variances,
        efficient_variance: 1.0 / inv_sum,
        equal_weight_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state_env() -> SyntheticEnv {
        SyntheticEnv::Discrete(
            DiscreteEnv::new(
                vec![0.25, 0.75],
                vec![vec![0.2, 0.4], vec![0.6, 0.8]],
            )
            .unwrap(),
        )
    }

    #[test]
    fn single_batch_variance_matches_hand_computation() {
        // eval plays arm 1 always: theta0 = 0.25 * 0.2 + 0.75 * 0.6 = 0.5.
        // Per covariate: v(x, 1) / 0.5 + (f(x, 1) - 0.5)^2 gives 0.41 and
        // 0.49, mixing to 0.47.
        let env = two_state_env();
        let eval = PolicyTable::global(vec![1.0, 0.0]).unwrap();
        let behavior = PolicyTable::global(vec![0.5, 0.5]).unwrap();
        let vars = batch_score_variances(&env, &eval, &[behavior], &[1.0]).unwrap();
        assert!((vars[0] - 0.47).abs() < 1e-12, "{vars:?}");
    }

    #[test]
    fn equal_batches_make_equal_and_efficient_weighting_agree() {
        let env = two_state_env();
        let eval = PolicyTable::global(vec![1.0, 0.0]).unwrap();
        let behavior = PolicyTable::global(vec![0.5, 0.5]).unwrap();
        let bound = efficiency_bound(
            &env,
            &eval,
            &[behavior.clone(), behavior],
            &[0.5, 0.5],
        )
        .unwrap();
        assert!((bound.theta0 - 0.5).abs() < 1e-12);
        assert!((bound.batch_variances[0] - 0.94).abs() < 1e-12);
        assert!((bound.efficient_variance - 0.47).abs() < 1e-12);
        assert!((bound.equal_weight_variance - 0.47).abs() < 1e-12);
    }

    #[test]
    fn unequal_batches_favor_the_efficient_combination() {
        let env = two_state_env();
        let eval = PolicyTable::global(vec![0.3, 0.7]).unwrap();
        let wide = PolicyTable::global(vec![0.5, 0.5]).unwrap();
        let skewed = PolicyTable::global(vec![0.9, 0.1]).unwrap();
        let bound = efficiency_bound(&env, &eval, &[wide, skewed], &[0.5, 0.5]).unwrap();
        assert!(bound.efficient_variance < bound.equal_weight_variance);
        assert!(bound.batch_variances[1] > bound.batch_variances[0]);
    }

    #[test]
    fn dead_actions_with_evaluation_mass_error() {
        let env = two_state_env();
        let eval = PolicyTable::global(vec![0.3, 0.7]).unwrap();
        let dead = PolicyTable::global(vec![1.0, 0.0]).unwrap();
        let err = batch_score_variances(&env, &eval, &[dead], &[1.0]).unwrap_err();
        assert!(matches!(err, CoreError::ZeroPropensity { action: 2 }));
    }

    #[test]
    fn continuous_environments_are_not_enumerable() {
        use crate::env::ContinuousEnv;
        let env = SyntheticEnv::Continuous(ContinuousEnv::random(3, 2, 7).unwrap());
        let eval = PolicyTable::global(vec![0.5, 0.5]).unwrap();
        let behavior = PolicyTable::global(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            batch_score_variances(&env, &eval, &[behavior], &[1.0]),
            Err(CoreError::Unsupported(_))
        ));
    }
}
