//! End-to-end smoke tests for the `batch-ope` binary: simulate a log,
//! estimate on it, run a small study, and re-render the saved report.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_batch-ope"))
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

fn assert_success(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

const SIMULATE_CONFIG: &str = r#"{
  "env": {
    "type": "discrete",
    "covariate_probs": [0.5, 0.5],
    "mean_reward": [[0.8, 0.2], [0.4, 0.6]]
  },
  "schedule": {"total_rounds": 200, "num_batches": 4},
  "behavior": {"type": "random_walk", "noise_scale": 0.3},
  "seed": 11
}"#;

const ESTIMATE_CONFIG: &str = r#"{
  "evaluation": {"type": "global", "probs": [0.7, 0.3]},
  "nuisance": {"outcome": {"method": "table_mean"}},
  "level": 0.95
}"#;

const EXPERIMENT_CONFIG: &str = r#"{
  "mode": "synthetic",
  "env": {
    "type": "discrete",
    "covariate_probs": [0.5, 0.5],
    "mean_reward": [[0.8, 0.2], [0.4, 0.6]]
  },
  "schedule": {"total_rounds": 200, "num_batches": 4},
  "behavior": {"type": "constant", "probs": [0.5, 0.5]},
  "evaluation": {"type": "global", "probs": [0.7, 0.3]},
  "nuisance": {"outcome": {"method": "table_mean"}},
  "estimators": [
    {"estimator": "batch_equal"},
    {"estimator": "batch_efficient", "kind": "batchwise"}
  ],
  "replications": 6,
  "seed": 5
}"#;

#[test]
fn simulate_then_estimate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sim_cfg = dir.path().join("sim.json");
    let est_cfg = dir.path().join("est.json");
    let log = dir.path().join("log.jsonl");
    let results = dir.path().join("results.json");
    write(&sim_cfg, SIMULATE_CONFIG);
    write(&est_cfg, ESTIMATE_CONFIG);

    let out = bin()
        .args(["simulate", "--config"])
        .arg(&sim_cfg)
        .arg("--out")
        .arg(&log)
        .output()
        .unwrap();
    assert_success(&out, "simulate");
    // One schedule header line, then one line per round.
    let text = fs::read_to_string(&log).unwrap();
    assert_eq!(text.lines().count(), 201);

    let out = bin()
        .args(["estimate", "--log"])
        .arg(&log)
        .arg("--config")
        .arg(&est_cfg)
        .arg("--out")
        .arg(&results)
        .output()
        .unwrap();
    assert_success(&out, "estimate");
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&results).unwrap()).unwrap();
    let arr = parsed.as_array().unwrap();
    // The default menu carries nine estimators.
    assert_eq!(arr.len(), 9);
    assert!(arr.iter().any(|r| r["name"] == "PBA2IPW"));
    for r in arr {
        assert!(r["estimate"].as_f64().unwrap().is_finite());
    }
}

#[test]
fn seed_override_changes_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let sim_cfg = dir.path().join("sim.json");
    write(&sim_cfg, SIMULATE_CONFIG);
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let c = dir.path().join("c.jsonl");
    for (path, seed) in [(&a, None), (&b, Some("11")), (&c, Some("12"))] {
        let mut cmd = bin();
        cmd.args(["simulate", "--config"])
            .arg(&sim_cfg)
            .arg("--out")
            .arg(path);
        if let Some(s) = seed {
            cmd.args(["--seed", s]);
        }
        assert_success(&cmd.output().unwrap(), "simulate");
    }
    let (ta, tb, tc) = (
        fs::read_to_string(&a).unwrap(),
        fs::read_to_string(&b).unwrap(),
        fs::read_to_string(&c).unwrap(),
    );
    assert_eq!(ta, tb, "explicit seed equal to the config's must match");
    assert_ne!(ta, tc, "a different seed must change the log");
}

#[test]
fn experiment_writes_report_and_csv_and_report_rerenders() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    let report = dir.path().join("report.json");
    let csv = dir.path().join("summary.csv");
    write(&cfg, EXPERIMENT_CONFIG);

    let out = bin()
        .args(["experiment", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&report)
        .arg("--csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert_success(&out, "experiment");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PBA2IPW"), "table on stdout: {stdout}");

    let csv_text = fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("estimator,mse,"));
    assert_eq!(csv_text.lines().count(), 3);

    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["replications"], 6);
    // 0.5 * (0.7 * 0.8 + 0.3 * 0.2) + 0.5 * (0.7 * 0.4 + 0.3 * 0.6).
    assert!((parsed["theta_ref"].as_f64().unwrap() - 0.54).abs() < 1e-12);

    let out = bin()
        .args(["report", "--in"])
        .arg(&report)
        .output()
        .unwrap();
    assert_success(&out, "report");
    assert!(String::from_utf8_lossy(&out.stdout).contains("EBA2IPW"));
}

#[test]
fn replication_override_trims_the_study() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    let report = dir.path().join("report.json");
    write(&cfg, EXPERIMENT_CONFIG);
    let out = bin()
        .args(["experiment", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&report)
        .args(["--replications", "2"])
        .output()
        .unwrap();
    assert_success(&out, "experiment");
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["replications"], 2);
}

#[test]
fn empty_estimator_menu_yields_an_empty_array() {
    let dir = tempfile::tempdir().unwrap();
    let sim_cfg = dir.path().join("sim.json");
    let est_cfg = dir.path().join("est.json");
    let log = dir.path().join("log.jsonl");
    write(&sim_cfg, SIMULATE_CONFIG);
    write(
        &est_cfg,
        r#"{
  "evaluation": {"type": "global", "probs": [0.7, 0.3]},
  "nuisance": {"outcome": {"method": "table_mean"}},
  "estimators": []
}"#,
    );
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&sim_cfg)
        .arg("--out")
        .arg(&log)
        .output()
        .unwrap();
    assert_success(&out, "simulate");
    let out = bin()
        .args(["estimate", "--log"])
        .arg(&log)
        .arg("--config")
        .arg(&est_cfg)
        .output()
        .unwrap();
    assert_success(&out, "estimate");
    let parsed: serde_json::Value =
        serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed, serde_json::json!([]));
}

#[test]
fn malformed_log_exits_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let est_cfg = dir.path().join("est.json");
    let log = dir.path().join("log.jsonl");
    write(&est_cfg, ESTIMATE_CONFIG);
    write(&log, "this is not a log\n");
    let out = bin()
        .args(["estimate", "--log"])
        .arg(&log)
        .arg("--config")
        .arg(&est_cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty(), "expected an error message on stderr");
}

#[test]
fn bad_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    write(&cfg, r#"{"mode": "nonsense"}"#);
    let out = bin()
        .args(["experiment", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn deficient_support_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let sim_cfg = dir.path().join("sim.json");
    let est_cfg = dir.path().join("est.json");
    let log = dir.path().join("log.jsonl");
    // The behavior never plays action 2, the evaluation policy wants it.
    write(
        &sim_cfg,
        r#"{
  "env": {
    "type": "discrete",
    "covariate_probs": [1.0],
    "mean_reward": [[0.8, 0.2]]
  },
  "schedule": {"total_rounds": 40, "num_batches": 2},
  "behavior": {"type": "constant", "probs": [1.0, 0.0]},
  "seed": 1
}"#,
    );
    write(
        &est_cfg,
        r#"{
  "evaluation": {"type": "global", "probs": [0.5, 0.5]},
  "nuisance": {"outcome": {"method": "table_mean"}},
  "estimators": [{"estimator": "batch_equal"}]
}"#,
    );
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&sim_cfg)
        .arg("--out")
        .arg(&log)
        .output()
        .unwrap();
    assert_success(&out, "simulate");
    let out = bin()
        .args(["estimate", "--log"])
        .arg(&log)
        .arg("--config")
        .arg(&est_cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
