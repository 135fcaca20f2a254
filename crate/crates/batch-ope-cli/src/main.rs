//! Command-line driver: simulate logs, evaluate estimator menus on them,
//! and run replication studies.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use batch_ope::nuisance::build_nuisance_sequence;
use batch_ope::{sample_batched_log, BanditLog, CoreError};
use batch_ope_cli::config::{EstimateConfig, ExperimentConfig, SimulateConfig};
use batch_ope_cli::experiment::{run_experiment, ExperimentReport};
use batch_ope_cli::report::{render_table, write_csv, write_json};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "batch-ope",
    about = "Off-policy evaluation for batched adaptive bandit logs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a batched log from a synthetic environment config.
    Simulate {
        /// JSON config describing environment, schedule, and behavior.
        #[arg(long)]
        config: PathBuf,
        /// Output JSONL log path.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate an estimator menu on an existing log; results are
    /// emitted as JSON.
    Estimate {
        /// JSONL log to evaluate.
        #[arg(long)]
        log: PathBuf,
        /// JSON config with evaluation policy, nuisances, and menu.
        #[arg(long)]
        config: PathBuf,
        /// Writes the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a replication study and aggregate error statistics.
    Experiment {
        /// JSON config describing the full study.
        #[arg(long)]
        config: PathBuf,
        /// Writes the report as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Writes the summary table as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Overrides the config's replication count.
        #[arg(long)]
        replications: Option<usize>,
        /// Overrides the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-render a saved experiment report.
    Report {
        /// JSON report produced by the experiment subcommand.
        #[arg(long = "in")]
        input: PathBuf,
        /// Writes the summary as CSV here instead of a table on stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> anyhow::Result<T> {
    let file = File::open(path)
        .map_err(|e| anyhow::anyhow!("cannot open {}: {e}", path.display()))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

/// Writes a line to stdout, treating a closed pipe (e.g. `| head`) as
/// success rather than an error.
fn print_stdout(text: &str) -> anyhow::Result<()> {
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    match writeln!(w, "{text}").and_then(|()| w.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate { config, out, seed } => {
            let mut cfg: SimulateConfig = read_json(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let env = cfg.env.build()?;
            let schedule = cfg.schedule.build()?;
            let behavior = cfg.behavior.build(env.num_actions(), cfg.seed)?;
            let log = sample_batched_log(&env, &schedule, behavior.as_ref(), cfg.seed)?;
            let file = File::create(&out)?;
            log.write_jsonl(BufWriter::new(file))?;
            eprintln!(
                "wrote {} rounds in {} batches to {}",
                log.len(),
                log.schedule().num_batches(),
                out.display()
            );
        }
        Command::Estimate { log, config, out } => {
            let cfg: EstimateConfig = read_json(&config)?;
            let file = File::open(&log)
                .map_err(|e| anyhow::anyhow!("cannot open {}: {e}", log.display()))?;
            let log = BanditLog::read_jsonl(BufReader::new(file))?;
            let policy = cfg.evaluation.build()?;
            let method = cfg.nuisance.outcome.build();
            let seq = build_nuisance_sequence(&log, &method, cfg.nuisance.propensity_floor)?;
            let results =
                batch_ope::evaluate_all(&log, &seq, &policy, &cfg.estimators, cfg.level)?;
            match out {
                Some(path) => {
                    let mut w = BufWriter::new(File::create(&path)?);
                    serde_json::to_writer_pretty(&mut w, &results)?;
                    writeln!(w)?;
                }
                None => print_stdout(&serde_json::to_string_pretty(&results)?)?,
            }
        }
        Command::Experiment {
            config,
            out,
            csv,
            replications,
            seed,
        } => {
            let mut cfg: ExperimentConfig = read_json(&config)?;
            if let Some(n) = replications {
                cfg.set_replications(n);
            }
            if let Some(s) = seed {
                cfg.set_seed(s);
            }
            let report = run_experiment(&cfg)?;
            print_stdout(&render_table(&report))?;
            if let Some(path) = out {
                write_json(BufWriter::new(File::create(&path)?), &report)?;
            }
            if let Some(path) = csv {
                write_csv(BufWriter::new(File::create(&path)?), &report)?;
            }
        }
        Command::Report { input, csv } => {
            let report: ExperimentReport = read_json(&input)?;
            match csv {
                Some(path) => write_csv(BufWriter::new(File::create(&path)?), &report)?,
                None => print_stdout(&render_table(&report))?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            // Estimation failures on a parseable input (deficient support,
            // singular systems) exit 2; config and I/O problems exit 1.
            let runtime = err.downcast_ref::<CoreError>().is_some_and(|e| {
                matches!(
                    e,
                    CoreError::ZeroPropensity { .. }
                        | CoreError::DeficientSupport { .. }
                        | CoreError::Numerical(_)
                )
            });
            if runtime {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
