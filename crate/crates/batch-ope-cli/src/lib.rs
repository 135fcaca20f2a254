//! Config schema, replication harness, and report rendering behind the
//! `batch-ope` binary. Split out as a library so integration tests and
//! downstream tooling can drive experiments without shelling out.

pub mod config;
pub mod experiment;
pub mod report;
