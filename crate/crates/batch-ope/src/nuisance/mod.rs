//! Nuisance models: per-batch outcome regressors and behavior-propensity
//! estimates.
//!
//! The outcome model for batch `tau` is trained only on rounds
//! `t <= t_{tau-1}`, one regressor per action, so batch 1 always gets the
//! no-data model that predicts 0. A terminal model trained on all `T`
//! rounds sits alongside the sequence. Propensity estimates follow the
//! same pre-batch rule and are floored away from zero.

mod regressor;

pub use regressor::{
    fit_knn, fit_nw, fit_table_mean, silverman_bandwidth, BandwidthSpec, KernelRegressor,
    KnnRegressor, Regressor,
};

use crate::error::{CoreError, Result};
use crate::log::{BanditLog, LogRecord};
use crate::policy::PolicyTable;

/// How per-action outcome models are fit.
#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeMethod {
    NadarayaWatson(BandwidthSpec),
    Knn { neighbors: usize },
    /// Per-code empirical means; needs an integer-coded covariate space.
    TableMean,
    /// Skip outcome modeling; every model predicts 0.
    Zero,
}

#[derive(Debug, Clone)]
pub struct NuisanceSequence {
    /// `outcome[tau - 1][a - 1]`: model for batch `tau`, action `a`.
    outcome: Vec<Vec<Regressor>>,
    /// Model per action trained on the full log.
    terminal: Vec<Regressor>,
    /// Optional per-batch propensity tables for estimated-denominator
    /// scores.
    propensity: Option<Vec<PolicyTable>>,
}

impl NuisanceSequence {
    pub fn new(
        outcome: Vec<Vec<Regressor>>,
        terminal: Vec<Regressor>,
        propensity: Option<Vec<PolicyTable>>,
    ) -> Result<Self> {
        if outcome.is_empty() || terminal.is_empty() {
            return Err(CoreError::InvalidArgument(
                "need at least one batch and one action".into(),
            ));
        }
        let k = terminal.len();
        if outcome.iter().any(|per_batch| per_batch.len() != k) {
            return Err(CoreError::InvalidArgument(
                "per-batch models must cover every action".into(),
            ));
        }
        if let Some(tables) = &propensity {
            if tables.len() != outcome.len() {
                return Err(CoreError::InvalidArgument(format!(
                    "{} propensity tables for {} batches",
                    tables.len(),
                    outcome.len()
                )));
            }
            if tables.iter().any(|t| t.num_actions() != k) {
                return Err(CoreError::InvalidArgument(
                    "propensity tables must cover every action".into(),
                ));
            }
        }
        Ok(Self {
            outcome,
            terminal,
            propensity,
        })
    }

    /// Oracle sequence on a finite covariate space: every batch and the
    /// terminal model share the known per-action value tables
    /// (`tables[a - 1][code]`).
    pub fn from_tables(tables: Vec<Vec<f64>>, num_batches: usize) -> Result<Self> {
        if tables.is_empty() || num_batches == 0 {
            return Err(CoreError::InvalidArgument(
                "need at least one action table and one batch".into(),
            ));
        }
        let per_action: Vec<Regressor> =
            tables.into_iter().map(Regressor::Table).collect();
        Ok(Self {
            outcome: vec![per_action.clone(); num_batches],
            terminal: per_action,
            propensity: None,
        })
    }

    pub fn with_propensity(mut self, tables: Vec<PolicyTable>) -> Result<Self> {
        if tables.len() != self.num_batches() {
            return Err(CoreError::InvalidArgument(format!(
                "{} propensity tables for {} batches",
                tables.len(),
                self.num_batches()
            )));
        }
        self.propensity = Some(tables);
        Ok(self)
    }

    pub fn num_batches(&self) -> usize {
        self.outcome.len()
    }

    pub fn num_actions(&self) -> usize {
        self.terminal.len()
    }

    pub fn outcome_model(&self, tau: usize, action: usize) -> &Regressor {
        &self.outcome[tau - 1][action - 1]
    }

    pub fn terminal_model(&self, action: usize) -> &Regressor {
        &self.terminal[action - 1]
    }

    pub fn propensity_table(&self, tau: usize) -> Option<&PolicyTable> {
        self.propensity.as_ref().map(|t| &t[tau - 1])
    }

    pub fn has_propensity(&self) -> bool {
        self.propensity.is_some()
    }
}

/// Fits the full outcome-model sequence from a log. When
/// `propensity_floor` is given, per-batch propensity tables (empirical
/// action frequencies over pre-batch data, floored and renormalized) are
/// attached as well.
pub fn build_nuisance_sequence(
    log: &BanditLog,
    method: &OutcomeMethod,
    propensity_floor: Option<f64>,
) -> Result<NuisanceSequence> {
    let k = log.num_actions();
    let m = log.schedule().num_batches();
    let num_codes = match method {
        OutcomeMethod::TableMean => Some(table_code_count(log)?),
        _ => None,
    };

    let mut outcome = Vec::with_capacity(m);
    for tau in 1..=m {
        outcome.push(fit_models_for(log.before_batch(tau)?, k, method, num_codes)?);
    }
    let terminal = fit_models_for(log.records(), k, method, num_codes)?;
    let propensity = propensity_floor
        .map(|floor| fit_propensity(log, floor))
        .transpose()?;
    NuisanceSequence::new(outcome, terminal, propensity)
}

fn fit_models_for(
    records: &[LogRecord],
    num_actions: usize,
    method: &OutcomeMethod,
    num_codes: Option<usize>,
) -> Result<Vec<Regressor>> {
    let mut models = Vec::with_capacity(num_actions);
    for action in 1..=num_actions {
        if matches!(method, OutcomeMethod::Zero) {
            models.push(Regressor::Empty);
            continue;
        }
        let mut covariates = Vec::new();
        let mut targets = Vec::new();
        for rec in records.iter().filter(|r| r.action == action) {
            covariates.push(rec.x.clone());
            targets.push(rec.reward);
        }
        if covariates.is_empty() {
            models.push(Regressor::Empty);
            continue;
        }
        let model = match method {
            OutcomeMethod::NadarayaWatson(bw) => {
                Regressor::Nw(fit_nw(covariates, targets, bw.clone())?)
            }
            OutcomeMethod::Knn { neighbors } => {
                Regressor::Knn(fit_knn(covariates, targets, *neighbors)?)
            }
            OutcomeMethod::TableMean => fit_table_mean(
                &covariates,
                &targets,
                num_codes.expect("code count precomputed"),
            )?,
            OutcomeMethod::Zero => unreachable!("handled above"),
        };
        models.push(model);
    }
    Ok(models)
}

fn table_code_count(log: &BanditLog) -> Result<usize> {
    if log.covariate_dim() != 1 {
        return Err(CoreError::InvalidArgument(format!(
            "per-code means need 1-dimensional integer codes, got dimension {}",
            log.covariate_dim()
        )));
    }
    let mut max_code = 0usize;
    for rec in log.records() {
        let v = rec.x[0];
        if v < 0.0 || (v - v.round()).abs() > 1e-9 {
            return Err(CoreError::InvalidArgument(format!(
                "covariate {v} is not an integer code"
            )));
        }
        max_code = max_code.max(v.round() as usize);
    }
    Ok(max_code + 1)
}

// ─── Propensity estimation ───

/// Floors every entry at `floor` and renormalizes, iterating to the fixed
/// point where the row both sums to one and respects the floor.
pub fn clip_and_renormalize(probs: &[f64], floor: f64) -> Result<Vec<f64>> {
    let k = probs.len();
    if k == 0 {
        return Err(CoreError::InvalidArgument("empty probability row".into()));
    }
    if !(floor > 0.0) || floor * k as f64 > 1.0 + 1e-12 {
        return Err(CoreError::InvalidArgument(format!(
            "floor {floor} infeasible for {k} actions"
        )));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(CoreError::InvalidArgument(
            "negative or non-finite probability".into(),
        ));
    }
    let mut row = probs.to_vec();
    for _ in 0..10_000 {
        let mut next: Vec<f64> = row.iter().map(|&p| p.max(floor)).collect();
        let sum: f64 = next.iter().sum();
        for p in &mut next {
            *p /= sum;
        }
        let delta = next
            .iter()
            .zip(&row)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        row = next;
        if delta < 1e-12 {
            return Ok(row);
        }
    }
    Err(CoreError::Numerical(
        "propensity flooring did not converge".into(),
    ))
}

/// Empirical action frequencies of `records`, floored at `floor`. With no
/// records the estimate is uniform.
pub fn empirical_propensity(
    records: &[LogRecord],
    num_actions: usize,
    floor: f64,
) -> Result<Vec<f64>> {
    if num_actions == 0 {
        return Err(CoreError::InvalidArgument("no actions".into()));
    }
    if records.is_empty() {
        return clip_and_renormalize(&vec![1.0 / num_actions as f64; num_actions], floor);
    }
    let mut counts = vec![0.0; num_actions];
    for rec in records {
        counts[rec.action - 1] += 1.0;
    }
    let n = records.len() as f64;
    for c in &mut counts {
        *c /= n;
    }
    clip_and_renormalize(&counts, floor)
}

/// Per-batch propensity tables from pre-batch empirical frequencies.
pub fn fit_propensity(log: &BanditLog, floor: f64) -> Result<Vec<PolicyTable>> {
    let k = log.num_actions();
    (1..=log.schedule().num_batches())
        .map(|tau| {
            let row = empirical_propensity(log.before_batch(tau)?, k, floor)?;
            PolicyTable::global(row)
        })
        .collect()
}
