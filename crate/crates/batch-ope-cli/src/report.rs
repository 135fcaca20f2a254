//! Report serialization: JSON for machines, CSV and aligned tables for
//! people.

use std::io::Write;

use crate::experiment::ExperimentReport;

/// Writes the full report as pretty-printed JSON.
pub fn write_json<W: Write>(mut out: W, report: &ExperimentReport) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)?;
    Ok(())
}

/// Writes the per-estimator summary table as CSV.
pub fn write_csv<W: Write>(mut out: W, report: &ExperimentReport) -> anyhow::Result<()> {
    writeln!(out, "estimator,mse,mse_sd,bias,coverage,mean_ci_width")?;
    for s in &report.summaries {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.name, s.mse, s.mse_sd, s.bias, s.coverage, s.mean_ci_width
        )?;
    }
    Ok(())
}

/// Renders the summary as an aligned text table for the terminal.
pub fn render_table(report: &ExperimentReport) -> String {
    let mut lines = Vec::new();
    lines.push(format!(
        "{} study, {} replications, reference value {:.6}, level {:.2}",
        report.mode, report.replications, report.theta_ref, report.level
    ));
    let name_width = report
        .summaries
        .iter()
        .map(|s| s.name.len())
        .chain(std::iter::once("estimator".len()))
        .max()
        .unwrap_or(9);
    lines.push(format!(
        "{:<name_width$}  {:>12}  {:>12}  {:>9}  {:>9}",
        "estimator", "mse", "bias", "coverage", "ci width"
    ));
    for s in &report.summaries {
        lines.push(format!(
            "{:<name_width$}  {:>12.6e}  {:>12.5}  {:>9.3}  {:>9.4}",
            s.name, s.mse, s.bias, s.coverage, s.mean_ci_width
        ));
    }
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{
        BehaviorConfig, EnvConfig, EvalPolicyConfig, ExperimentConfig, NuisanceConfig,
        OutcomeConfig, ScheduleConfig, SyntheticExperimentConfig,
    };
    use crate::experiment::EstimatorSummary;

    fn tiny_report() -> ExperimentReport {
        let config = ExperimentConfig::Synthetic(SyntheticExperimentConfig {
            env: EnvConfig::Discrete {
                covariate_probs: vec![1.0],
                mean_reward: vec![vec![0.7, 0.5]],
            },
            schedule: ScheduleConfig {
                total_rounds: 100,
                num_batches: 2,
            },
            behavior: BehaviorConfig::Constant {
                probs: vec![0.5, 0.5],
            },
            evaluation: EvalPolicyConfig::Global {
                probs: vec![0.9, 0.1],
            },
            nuisance: NuisanceConfig {
                outcome: OutcomeConfig::TableMean,
                propensity_floor: None,
            },
            estimators: vec![],
            level: 0.95,
            replications: 4,
            seed: 0,
        });
        ExperimentReport {
            mode: "synthetic".into(),
            theta_ref: 0.66,
            replications: 4,
            level: 0.95,
            wall_clock_seconds: 0.25,
            config,
            summaries: vec![EstimatorSummary {
                name: "PBA2IPW".into(),
                mse: 0.001,
                mse_sd: 0.0005,
                bias: -0.01,
                coverage: 0.95,
                mean_ci_width: 0.12,
                mean_estimate: 0.65,
            }],
            rows: vec![],
        }
    }

    #[test]
    fn csv_has_header_and_one_row_per_estimator() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &tiny_report()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "estimator,mse,mse_sd,bias,coverage,mean_ci_width");
        assert!(lines[1].starts_with("PBA2IPW,"));
    }

    #[test]
    fn json_round_trips() {
        let mut buf = Vec::new();
        write_json(&mut buf, &tiny_report()).unwrap();
        let back: ExperimentReport = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back.summaries[0].name, "PBA2IPW");
        assert_eq!(back.theta_ref, 0.66);
    }

    #[test]
    fn table_mentions_every_estimator() {
        let text = render_table(&tiny_report());
        assert!(text.contains("PBA2IPW"));
        assert!(text.contains("coverage"));
    }
}
