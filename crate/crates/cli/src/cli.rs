//! Argument parsing and dispatch for the `artemis` binary.

use std::ffi::OsString;
use std::net::SocketAddr;
use std::path::PathBuf;

use artemis_core::data::ClassMix;
use artemis_server::ServerConfig;
use artemis_sim::{MissionConfig, RetryPolicy};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::error::{exit, CliError, Result};
use crate::manifest::{run_pipeline, RunManifest, RunStatus, RUN_RECORD};
use crate::stages::{self, CompareParams, ModelKind, SimulateParams, TrainParams};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "artemis", version, about = "Triage data pipeline, field robot simulation and command server")]
pub struct Cli {
    /// Seed for every random stream of the command (default 42).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Drop duplicate, incomplete and out-of-range rows from a raw table.
    Preprocess(PreprocessArgs),
    /// Correlation of each vital with acuity and per-vital histograms.
    Analyze(AnalyzeArgs),
    /// Generate a rule-labelled synthetic table.
    Synthesize(SynthesizeArgs),
    /// Train a classifier and save it as a model file.
    Train(TrainArgs),
    /// Per-class metrics and ROC curves of a model on a labelled table.
    Evaluate(EvaluateArgs),
    /// Paired comparison of two models over random subsets.
    Compare(CompareArgs),
    /// Run a field mission and write its report log.
    Simulate(SimulateArgs),
    /// Run the command server.
    Serve(ServeArgs),
    /// Execute the stages listed in a run manifest.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Where to write the per-category drop counts as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// One histogram width for every vital instead of the per-vital defaults.
    #[arg(long)]
    pub bin_width: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 60_000)]
    pub count: usize,
    /// Class weights for acuity 1..=5, e.g. `0.2,0.2,0.2,0.2,0.2`.
    #[arg(long)]
    pub mix: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(value_enum)]
    pub kind: ModelKind,
    #[arg(long)]
    pub input: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub output: PathBuf,
    /// Train on this fraction of the input and hold out the rest.
    #[arg(long)]
    pub split: Option<f64>,
    /// Where to write the held-out rows (implies `--split 0.8` when no split is given).
    #[arg(long)]
    pub holdout: Option<PathBuf>,
    /// Where to write the per-epoch training loss.
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 128)]
    pub batch_size: usize,
    /// Depth limit for `tree`.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Oversample minority classes before training.
    #[arg(long)]
    pub rebalance: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Metrics JSON.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// ROC points as `class,fpr,tpr` CSV.
    #[arg(long)]
    pub roc: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Exactly two model files: A then B.
    #[arg(long, num_args = 2, required = true)]
    pub model: Vec<PathBuf>,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub subsets: usize,
    /// Share of the input drawn into each subset.
    #[arg(long, default_value_t = 0.2)]
    pub fraction: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Scenario JSON; the built-in demo when absent.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Mission log (JSON lines).
    #[arg(long)]
    pub output: PathBuf,
    /// Command server to deliver reports to.
    #[arg(long, env = "ARTEMIS_SERVER_URL")]
    pub server_url: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub step_dt: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_steps: u64,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "ARTEMIS_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    /// Event log; in-memory only when absent.
    #[arg(long, env = "ARTEMIS_LOG")]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the manifest's `input`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Overrides the manifest's `output_dir`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Overrides `simulate.scenario`.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Overrides `simulate.server_url`.
    #[arg(long)]
    pub server_url: Option<String>,
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::OK,
                _ => exit::USAGE,
            };
        }
    };
    match execute(cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match cli.command {
        Command::Preprocess(a) => {
            let delimiter = u8::try_from(a.delimiter)
                .map_err(|_| CliError::Usage(format!("delimiter {:?} is not a single byte", a.delimiter)))?;
            let s = stages::preprocess_file(&a.input, &a.output, a.report.as_deref(), delimiter)?;
            let c = s.counts;
            println!(
                "{} rows in, {} duplicates, {} missing, {} outliers, {} rows out ({} unparsable rows skipped)",
                c.input_count,
                c.duplicate_count,
                c.missing_count,
                c.outlier_count,
                c.output_count,
                s.unparsable_rows.len()
            );
        }
        Command::Analyze(a) => {
            let analysis = stages::analyze_file(&a.input, &a.output, a.bin_width)?;
            for c in &analysis.correlations {
                println!("{:<12} r = {:+.4}", c.feature.column(), c.r);
            }
        }
        Command::Synthesize(a) => {
            let mix = match &a.mix {
                Some(text) => stages::parse_mix(text)?,
                None => ClassMix::reference(),
            };
            let records = stages::synthesize_file(&a.output, a.count, &mix, seed)?;
            println!("wrote {} records to {}", records.len(), a.output.display());
        }
        Command::Train(a) => train(a, seed)?,
        Command::Evaluate(a) => {
            let report = stages::evaluate_file(&a.model, &a.input, a.output.as_deref(), a.roc.as_deref())?;
            print!("{}", report.to_table());
        }
        Command::Compare(a) => {
            let params = CompareParams {
                subsets: a.subsets,
                fraction: a.fraction,
            };
            let c = stages::compare_files(&a.model[0], &a.model[1], &a.input, a.output.as_deref(), &params, seed)?;
            let r = &c.report;
            println!("{} vs {}: {} wins, {} losses, {} ties", c.model_a, c.model_b, r.wins_a, r.wins_b, r.ties);
            match (&r.test, &r.note) {
                (Some(t), _) => println!("one-tailed Wilcoxon p = {:.6} ({:?})", t.p_value, t.method),
                (None, Some(note)) => println!("no test: {note}"),
                (None, None) => {}
            }
        }
        Command::Simulate(a) => {
            let params = SimulateParams {
                scenario: a.scenario.as_deref(),
                server_url: a.server_url.as_deref(),
                seed: cli.seed,
                config: MissionConfig {
                    step_dt: a.step_dt,
                    max_steps: a.max_steps,
                    retry: RetryPolicy::default(),
                },
            };
            let log = stages::simulate_file(&a.model, &a.output, &params)?;
            println!(
                "{} reports in {} steps{}",
                log.entries.len(),
                log.steps,
                if log.complete { "" } else { " (incomplete)" }
            );
        }
        Command::Serve(a) => {
            let config = ServerConfig {
                listen: a.listen,
                log_path: a.log,
            };
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(format!("tokio runtime: {e}")))?;
            runtime.block_on(artemis_server::run(config))?;
        }
        Command::Run(a) => {
            let mut manifest = RunManifest::load(&a.config)?;
            if let Some(s) = cli.seed {
                manifest.seed = s;
            }
            if let Some(p) = a.input {
                manifest.input = Some(p);
            }
            if let Some(p) = a.output {
                manifest.output_dir = p;
            }
            if let Some(p) = a.scenario {
                manifest.simulate.scenario = Some(p);
            }
            if let Some(u) = a.server_url {
                manifest.simulate.server_url = Some(u);
            }
            let outcome = run_pipeline(&manifest)?;
            for artifact in &outcome.record.artifacts {
                println!("{}  {}", artifact.sha256, artifact.path);
            }
            println!("run record: {}", manifest.output_dir.join(RUN_RECORD).display());
            if outcome.record.status == RunStatus::Failed {
                return Err(outcome.error.expect("failed runs carry their error"));
            }
        }
    }
    Ok(())
}

fn train(a: TrainArgs, seed: u64) -> Result<()> {
    let params = TrainParams {
        epochs: a.epochs,
        learning_rate: a.learning_rate,
        batch_size: a.batch_size,
        max_depth: a.max_depth,
        rebalance: a.rebalance,
    };
    let records = stages::load_dataset(&a.input)?;
    let ratio = a.split.or(a.holdout.as_ref().map(|_| 0.8));
    let train = match ratio {
        Some(ratio) => {
            let (train, holdout) = stages::split_dataset(&records, ratio, seed)?;
            if let Some(path) = &a.holdout {
                stages::write_dataset(path, &holdout)?;
            }
            train
        }
        None => records,
    };
    let trained = stages::train_model(&train, a.kind, &params, seed)?;
    stages::save_trained(&trained, &a.output, a.history.as_deref())?;
    match trained.history.last() {
        Some(loss) => println!("trained {} on {} rows, final loss {loss:.4}", a.kind.as_str(), train.len()),
        None => println!("trained {} on {} rows", a.kind.as_str(), train.len()),
    }
    Ok(())
}
