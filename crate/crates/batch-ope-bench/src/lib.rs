//! Shared fixtures for the criterion benchmarks: one mid-sized adaptive
//! log with fitted nuisances, built once per process.

use batch_ope::nuisance::build_nuisance_sequence;
use batch_ope::{
    sample_batched_log, BanditLog, BatchSchedule, DiscreteEnv, NuisanceSequence, OutcomeMethod,
    PolicyTable, RwBehavior, SyntheticEnv,
};

/// A random-walk log over two covariates and three actions.
pub fn bench_log(total_rounds: usize, num_batches: usize) -> BanditLog {
    let env = SyntheticEnv::Discrete(
        DiscreteEnv::new(
            vec![0.4, 0.6],
            vec![vec![0.8, 0.3, 0.5], vec![0.2, 0.7, 0.4]],
        )
        .unwrap(),
    );
    let schedule = BatchSchedule::even(total_rounds, num_batches).unwrap();
    let behavior = RwBehavior::new(3, 0.25, 99);
    sample_batched_log(&env, &schedule, &behavior, 7).unwrap()
}

/// Table-mean nuisances fitted batch by batch on `log`.
pub fn bench_nuisances(log: &BanditLog) -> NuisanceSequence {
    build_nuisance_sequence(log, &OutcomeMethod::TableMean, None).unwrap()
}

/// A fixed target policy over three actions.
pub fn bench_policy() -> PolicyTable {
    PolicyTable::global(vec![0.6, 0.3, 0.1]).unwrap()
}
