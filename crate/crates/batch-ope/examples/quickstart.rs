use batch_ope::{
    build_nuisance_sequence, evaluate_all, sample_batched_log, BatchSchedule, DiscreteEnv,
    EstimatorSpec, OutcomeMethod, PolicyTable, RwBehavior, SyntheticEnv,
};

fn main() -> batch_ope::Result<()> {
    let env = SyntheticEnv::Discrete(DiscreteEnv::new(
        vec![0.5, 0.5],
        vec![vec![0.85, 0.15], vec![0.35, 0.65]],
    )?);
    let schedule = BatchSchedule::even(1500, 10)?;
    let behavior = RwBehavior::new(2, 0.3, 99);
    let log = sample_batched_log(&env, &schedule, &behavior, 7)?;

    let seq = build_nuisance_sequence(&log, &OutcomeMethod::TableMean, None)?;
    let policy = PolicyTable::global(vec![0.8, 0.2])?;
    let results = evaluate_all(&log, &seq, &policy, &EstimatorSpec::standard_menu(), 0.95)?;
    for r in &results {
        println!(
            "{:<10} {:.4} [{:.4}, {:.4}]",
            r.name, r.estimate, r.ci_lower, r.ci_upper
        );
    }
    Ok(())
}
