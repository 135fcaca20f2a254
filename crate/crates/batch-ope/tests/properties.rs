//! Property tests for the estimator invariants.

use batch_ope::behavior::FixedBehavior;
use batch_ope::nuisance::{build_nuisance_sequence, NuisanceSequence, OutcomeMethod, Regressor};
use batch_ope::ope::{
    deficient_weights, efficient_weights, equal_weights, estimate_batch_weighted,
    n_step_trace, stability_weights, DeficientMoments, MomentSummary, VarianceKind, WeightRule,
};
use batch_ope::{
    evaluate, sample_batched_log, BanditLog, BatchSchedule, DiscreteEnv, EstimatorSpec,
    PolicyTable, SyntheticEnv,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn simplex(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-6..1.0f64, dim).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / total).collect()
    })
}

proptest! {
    #[test]
    fn weight_constructors_land_on_the_simplex(
        vars in prop::collection::vec(0.0..10.0f64, 1..8),
        drift in prop::collection::vec(0.0..5.0f64, 1..8),
        alpha in 0.0..3.0f64,
    ) {
        let w = efficient_weights(&vars).unwrap();
        prop_assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(w.as_slice().iter().all(|&v| v >= 0.0));

        let n = vars.len().min(drift.len());
        let w = stability_weights(&vars[..n], &drift[..n], alpha).unwrap();
        prop_assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-9);

        let w = equal_weights(n).unwrap();
        prop_assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn efficient_weights_minimize_combined_variance(
        vars in prop::collection::vec(0.01..10.0f64, 2..6),
        raw in prop::collection::vec(1e-6..1.0f64, 2..6),
    ) {
        let n = vars.len().min(raw.len());
        let vars = &vars[..n];
        let total: f64 = raw[..n].iter().sum();
        let competitor: Vec<f64> = raw[..n].iter().map(|v| v / total).collect();

        let best = efficient_weights(vars).unwrap();
        let best_var: f64 = best
            .as_slice()
            .iter()
            .zip(vars)
            .map(|(w, v)| w * w * v)
            .sum();
        let other_var: f64 = competitor.iter().zip(vars).map(|(w, v)| w * w * v).sum();
        prop_assert!(best_var <= other_var + 1e-12, "{best_var} > {other_var}");
    }

    #[test]
    fn batch_weighted_estimates_are_affine_equivariant(
        scores in prop::collection::vec(
            prop::collection::vec(-2.0..2.0f64, 3..6), 2..5),
        scale in 0.1..3.0f64,
        shift in -2.0..2.0f64,
    ) {
        let m = scores.len();
        let fractions: Vec<f64> = {
            let total: usize = scores.iter().map(Vec::len).sum();
            scores.iter().map(|s| s.len() as f64 / total as f64).collect()
        };
        let base = MomentSummary::from_parts(
            fractions.clone(),
            scores.clone(),
            scores.clone(),
            vec![0.0; m],
        ).unwrap();
        let mapped: Vec<Vec<f64>> = scores
            .iter()
            .map(|s| s.iter().map(|&v| scale * v + shift).collect())
            .collect();
        let transformed = MomentSummary::from_parts(
            fractions,
            mapped.clone(),
            mapped,
            vec![0.0; m],
        ).unwrap();

        for rule in [
            WeightRule::Equal,
            WeightRule::Efficient { kind: VarianceKind::Batchwise },
        ] {
            let a = n_step_trace(&base, rule, 10).unwrap();
            let b = n_step_trace(&transformed, rule, 10).unwrap();
            // Scaling and shifting every score moves the estimate the same
            // way and leaves the weights unchanged.
            prop_assert!(
                (b.final_estimate() - (scale * a.final_estimate() + shift)).abs() < 1e-8,
                "{} vs {}", b.final_estimate(), scale * a.final_estimate() + shift
            );
            let wa = a.final_weights().as_slice();
            let wb = b.final_weights().as_slice();
            for (x, y) in wa.iter().zip(wb) {
                prop_assert!((x - y).abs() < 1e-6, "{wa:?} vs {wb:?}");
            }
        }
    }

    #[test]
    fn reweighting_is_deterministic(
        scores in prop::collection::vec(
            prop::collection::vec(-1.0..1.0f64, 2..5), 2..4),
    ) {
        let total: usize = scores.iter().map(Vec::len).sum();
        let fractions: Vec<f64> = scores
            .iter()
            .map(|s| s.len() as f64 / total as f64)
            .collect();
        let summary = MomentSummary::from_parts(
            fractions,
            scores.clone(),
            scores.clone(),
            vec![0.0; scores.len()],
        ).unwrap();
        let rule = WeightRule::Efficient { kind: VarianceKind::Batchwise };
        let a = estimate_batch_weighted("EBA2IPW", &summary, rule, 10, 0.95).unwrap();
        let b = estimate_batch_weighted("EBA2IPW", &summary, rule, 10, 0.95).unwrap();
        prop_assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        prop_assert_eq!(a.asymptotic_variance.to_bits(), b.asymptotic_variance.to_bits());
        prop_assert_eq!(a.weights, b.weights);
    }

    #[test]
    fn shared_weights_satisfy_constraints_and_beat_feasible_points(
        diag in prop::collection::vec(0.05..5.0f64, 4),
        raw1 in simplex(2),
        raw2 in simplex(2),
    ) {
        // Two arms, two batches, all pairs live, diagonal covariance.
        let live = vec![(1, 1), (1, 2), (2, 1), (2, 2)];
        let mut cov = DMatrix::zeros(4, 4);
        for i in 0..4 {
            cov[(i, i)] = diag[i];
        }
        let moments = DeficientMoments::from_parts(
            2, 2, live, vec![0.3, 0.4, 0.5, 0.6], cov.clone(), 100,
        ).unwrap();
        let zeta = deficient_weights(&moments).unwrap();
        prop_assert!((zeta[0] + zeta[1] - 1.0).abs() < 1e-8);
        prop_assert!((zeta[2] + zeta[3] - 1.0).abs() < 1e-8);

        // Any feasible competitor (per-arm sums of one) has at least the
        // optimal objective.
        let competitor = [raw1[0], raw1[1], raw2[0], raw2[1]];
        let objective = |z: &[f64]| -> f64 {
            let mut acc = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    acc += z[i] * cov[(i, j)] * z[j];
                }
            }
            acc
        };
        prop_assert!(objective(&zeta) <= objective(&competitor) + 1e-9);
    }
}

fn tiny_env() -> SyntheticEnv {
    SyntheticEnv::Discrete(
        DiscreteEnv::new(vec![0.4, 0.6], vec![vec![0.7, 0.3], vec![0.2, 0.6]]).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn estimated_propensities_equal_to_logged_ones_reproduce_the_estimate(
        seed in 0u64..1000,
    ) {
        // A fixed behavior whose tables are handed to the nuisance
        // sequence as the propensity models: the estimated-denominator
        // estimator must then match the logged-denominator one exactly.
        let env = tiny_env();
        let schedule = BatchSchedule::even(120, 3).unwrap();
        let tables = vec![
            PolicyTable::global(vec![0.5, 0.5]).unwrap(),
            PolicyTable::global(vec![0.3, 0.7]).unwrap(),
            PolicyTable::global(vec![0.6, 0.4]).unwrap(),
        ];
        let behavior = FixedBehavior::new(tables.clone()).unwrap();
        let log = sample_batched_log(&env, &schedule, &behavior, seed).unwrap();
        let outcome = build_nuisance_sequence(&log, &OutcomeMethod::TableMean, None).unwrap();
        let seq = NuisanceSequence::new(
            outcome_models(&outcome),
            terminal_models(&outcome),
            Some(tables),
        ).unwrap();
        let policy = PolicyTable::global(vec![0.2, 0.8]).unwrap();

        let plain = evaluate(&log, &seq, &policy, &EstimatorSpec::BatchEqual, 0.95).unwrap();
        let dr = evaluate(&log, &seq, &policy, &EstimatorSpec::DoublyRobustEqual, 0.95).unwrap();
        prop_assert!((plain.estimate - dr.estimate).abs() < 1e-12);

        let plain_e = evaluate(&log, &seq, &policy, &EstimatorSpec::BatchEfficient {
            kind: VarianceKind::Batchwise, steps: 10 }, 0.95).unwrap();
        let dr_e = evaluate(&log, &seq, &policy, &EstimatorSpec::DoublyRobustEfficient {
            steps: 10 }, 0.95).unwrap();
        prop_assert!((plain_e.estimate - dr_e.estimate).abs() < 1e-12);
    }

    #[test]
    fn logs_round_trip_through_jsonl(seed in 0u64..1000, batches in 1usize..5) {
        let env = tiny_env();
        let schedule = BatchSchedule::even(40, batches).unwrap();
        let tables = (0..batches)
            .map(|i| {
                let p = 0.2 + 0.1 * i as f64;
                PolicyTable::global(vec![p, 1.0 - p]).unwrap()
            })
            .collect();
        let behavior = FixedBehavior::new(tables).unwrap();
        let log = sample_batched_log(&env, &schedule, &behavior, seed).unwrap();
        let mut buffer = Vec::new();
        log.write_jsonl(&mut buffer).unwrap();
        let back = BanditLog::read_jsonl(buffer.as_slice()).unwrap();
        prop_assert_eq!(&log, &back);
    }
}

/// Clones the outcome models out of a fitted sequence so they can be
/// recombined with oracle propensities.
fn outcome_models(seq: &NuisanceSequence) -> Vec<Vec<Regressor>> {
    (1..=seq.num_batches())
        .map(|tau| {
            (1..=seq.num_actions())
                .map(|a| seq.outcome_model(tau, a).clone())
                .collect()
        })
        .collect()
}

fn terminal_models(seq: &NuisanceSequence) -> Vec<Regressor> {
    (1..=seq.num_actions())
        .map(|a| seq.terminal_model(a).clone())
        .collect()
}
