//! Logged bandit data and its serialized form.
//!
//! A log is one JSON object per line: a header
//! `{"T":..,"M":..,"boundaries":[..],"K":..}` followed by one record
//! `{"t":..,"batch":..,"x":[..],"a":..,"y":..,"pb":[..]}` per round, sorted
//! by `t`. Floats are written with 17 significant digits so a write/read
//! cycle reproduces every `f64` bit for bit.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::Deserialize;

use crate::error::{CoreError, Result};
use crate::policy::validate_prob_row;
use crate::schedule::BatchSchedule;

#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    /// Round index, 1-based.
    pub t: usize,
    /// Batch index, 1-based.
    pub batch: usize,
    pub x: Vec<f64>,
    /// Logged action, 1-based.
    pub action: usize,
    pub reward: f64,
    /// Behavior probabilities over all actions at `x` when the record was
    /// logged; position `a - 1` holds action `a`.
    pub behavior_probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditLog {
    schedule: BatchSchedule,
    num_actions: usize,
    records: Vec<LogRecord>,
}

impl BanditLog {
    pub fn new(
        schedule: BatchSchedule,
        num_actions: usize,
        records: Vec<LogRecord>,
    ) -> Result<Self> {
        if num_actions == 0 {
            return Err(CoreError::InvalidLog("no actions".into()));
        }
        if records.len() != schedule.total_rounds() {
            return Err(CoreError::InvalidLog(format!(
                "{} records for {} scheduled rounds",
                records.len(),
                schedule.total_rounds()
            )));
        }
        let dim = records.first().map_or(0, |r| r.x.len());
        for (i, rec) in records.iter().enumerate() {
            if rec.t != i + 1 {
                return Err(CoreError::InvalidLog(format!(
                    "record {} has t={}, expected {}",
                    i,
                    rec.t,
                    i + 1
                )));
            }
            if rec.batch != schedule.batch_of(rec.t)? {
                return Err(CoreError::InvalidLog(format!(
                    "round {} claims batch {}, schedule says {}",
                    rec.t,
                    rec.batch,
                    schedule.batch_of(rec.t)?
                )));
            }
            if rec.x.len() != dim {
                return Err(CoreError::InvalidLog(format!(
                    "round {} has {} covariates, expected {}",
                    rec.t,
                    rec.x.len(),
                    dim
                )));
            }
            if rec.x.iter().any(|v| !v.is_finite()) || !rec.reward.is_finite() {
                return Err(CoreError::InvalidLog(format!(
                    "round {} has a non-finite covariate or reward",
                    rec.t
                )));
            }
            if rec.action == 0 || rec.action > num_actions {
                return Err(CoreError::InvalidLog(format!(
                    "round {} action {} outside 1..={}",
                    rec.t, rec.action, num_actions
                )));
            }
            validate_prob_row(&rec.behavior_probs, num_actions)
                .map_err(|e| CoreError::InvalidLog(format!("round {}: {}", rec.t, e)))?;
            if rec.behavior_probs[rec.action - 1] <= 0.0 {
                return Err(CoreError::InvalidLog(format!(
                    "round {} logged action {} with zero behavior probability",
                    rec.t, rec.action
                )));
            }
        }
        Ok(Self {
            schedule,
            num_actions,
            records,
        })
    }

    pub fn schedule(&self) -> &BatchSchedule {
        &self.schedule
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn covariate_dim(&self) -> usize {
        self.records.first().map_or(0, |r| r.x.len())
    }

    /// Records of batch `tau` (1-based), in round order.
    pub fn batch_records(&self, tau: usize) -> Result<&[LogRecord]> {
        let start = self.schedule.batch_start(tau)?;
        let end = self.schedule.batch_end(tau)?;
        Ok(&self.records[start..end])
    }

    /// Records strictly before batch `tau`, i.e. rounds `t <= t_{tau-1}`.
    pub fn before_batch(&self, tau: usize) -> Result<&[LogRecord]> {
        let start = self.schedule.batch_start(tau)?;
        Ok(&self.records[..start])
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let mut line = String::new();
        line.push_str("{\"T\":");
        let _ = write!(line, "{}", self.schedule.total_rounds());
        line.push_str(",\"M\":");
        let _ = write!(line, "{}", self.schedule.num_batches());
        line.push_str(",\"boundaries\":[");
        for (i, b) in self.schedule.boundaries().iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            let _ = write!(line, "{b}");
        }
        line.push_str("],\"K\":");
        let _ = write!(line, "{}", self.num_actions);
        line.push_str("}\n");
        out.write_all(line.as_bytes())?;

        for rec in &self.records {
            line.clear();
            let _ = write!(line, "{{\"t\":{},\"batch\":{},\"x\":[", rec.t, rec.batch);
            push_float_list(&mut line, &rec.x)?;
            let _ = write!(line, "],\"a\":{},\"y\":", rec.action);
            push_float(&mut line, rec.reward)?;
            line.push_str(",\"pb\":[");
            push_float_list(&mut line, &rec.behavior_probs)?;
            line.push_str("]}\n");
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| CoreError::Parse {
                line: 1,
                message: "missing header line".into(),
            })?
            .map_err(CoreError::Io)?;
        let header: Header = serde_json::from_str(&header_line).map_err(|e| CoreError::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let schedule = BatchSchedule::new(header.boundaries)?;
        if schedule.total_rounds() != header.t_total || schedule.num_batches() != header.m_total {
            return Err(CoreError::Parse {
                line: 1,
                message: "header T/M disagree with boundaries".into(),
            });
        }

        let mut records = Vec::with_capacity(header.t_total);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(CoreError::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawRecord = serde_json::from_str(&line).map_err(|e| CoreError::Parse {
                line: i + 2,
                message: e.to_string(),
            })?;
            records.push(LogRecord {
                t: raw.t,
                batch: raw.batch,
                x: raw.x,
                action: raw.a,
                reward: raw.y,
                behavior_probs: raw.pb,
            });
        }
        Self::new(schedule, header.k, records)
    }
}

#[derive(Deserialize)]
struct Header {
    #[serde(rename = "T")]
    t_total: usize,
    #[serde(rename = "M")]
    m_total: usize,
    boundaries: Vec<usize>,
    #[serde(rename = "K")]
    k: usize,
}

#[derive(Deserialize)]
struct RawRecord {
    t: usize,
    batch: usize,
    x: Vec<f64>,
    a: usize,
    y: f64,
    pb: Vec<f64>,
}

/// Writes `v` with 17 significant digits, enough to identify any `f64`
/// uniquely, in a JSON-compatible exponent form.
fn push_float(line: &mut String, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(CoreError::InvalidLog(format!(
            "cannot serialize non-finite value {v}"
        )));
    }
    let _ = write!(line, "{v:.16e}");
    Ok(())
}

fn push_float_list(line: &mut String, values: &[f64]) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        push_float(line, v)?;
    }
    Ok(())
}
