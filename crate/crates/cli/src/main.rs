//! `adl-sense`: synthesize corpora, extract features, train and evaluate
//! stage models, and run the recognition pipeline.
//!
//! Exit codes: 0 success, 2 usage error, 3 data or format error,
//! 4 training failure.

mod cmd;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use adl_sense::data::Variant;
use adl_sense::nn::{NormalizationKind, Preset};
use adl_sense::sensors::SensorSet;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "adl-sense",
    version,
    about = "Activity and environment recognition from sensor windows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus as raw sensor logs, one file per label
    /// and channel kind.
    Synth(SynthArgs),
    /// Turn sensor logs into a feature CSV for one recipe.
    Extract(ExtractArgs),
    /// Train a network on a feature CSV.
    Train(TrainArgs),
    /// Evaluate a trained network on a feature CSV.
    Eval(EvalArgs),
    /// Train and evaluate every cell of a preset x recipe x normalization x
    /// budget grid.
    Sweep(SweepArgs),
    /// Train or run the hierarchical recognition pipeline.
    #[command(subcommand)]
    Pipeline(PipelineCommand),
}

#[derive(Subcommand)]
enum PipelineCommand {
    /// Train the environment, activity and standing stages.
    Train(PipelineTrainArgs),
    /// Classify every window of a set of logs, one JSON line per window.
    Run(PipelineRunArgs),
}

#[derive(Args)]
pub struct SynthArgs {
    /// Synthesis spec in `key = value` format.
    #[arg(long)]
    pub spec: PathBuf,
    /// Output directory for the log files.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct ExtractArgs {
    /// Log files or directories of `*.log` files.
    #[arg(long, required = true, num_args = 1..)]
    pub logs: Vec<PathBuf>,
    /// Recipe: A1..A4, or F1..F5[:SENSORS][:env], e.g. F3:ACC+MAG:env.
    #[arg(long)]
    pub variant: Variant,
    #[arg(long)]
    pub out: PathBuf,
    /// Environment model whose predictions fill the environment block.
    #[arg(long, conflicts_with = "oracle_env")]
    pub env_model: Option<PathBuf>,
    /// Fill the environment block from the ground-truth scene of each window.
    #[arg(long)]
    pub oracle_env: bool,
    /// Comma-separated environment labels for --oracle-env; defaults to the
    /// nine built-in scenes.
    #[arg(long, requires = "oracle_env")]
    pub env_labels: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Feature CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub preset: Option<Preset>,
    /// none, minmax or zscore; defaults to the preset's usual choice.
    #[arg(long)]
    pub normalize: Option<NormalizationKind>,
    /// Iteration budget, e.g. 2000000 or 2M.
    #[arg(long, value_parser = config::parse_count)]
    pub iterations: Option<u64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Hold out this fraction of each label and report accuracy on it.
    #[arg(long)]
    pub holdout: Option<f64>,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Json,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Feature CSV.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    pub report: ReportFormat,
    /// Evaluate only the held-out part of a split with this test fraction.
    #[arg(long)]
    pub holdout: Option<f64>,
    /// Seed of the held-out split.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Directory of `*.log` files.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Grid in `key = value` format.
    #[arg(long)]
    pub grid: PathBuf,
    /// Results CSV, one row per grid cell.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the grid's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct PipelineTrainArgs {
    /// Environment corpus: audio logs labelled with scenes.
    #[arg(long)]
    pub env_logs: PathBuf,
    /// General activity corpus: motion logs.
    #[arg(long)]
    pub adl_logs: PathBuf,
    /// Standing activity corpus: motion and audio logs.
    #[arg(long)]
    pub standing_logs: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_parser = config::parse_count)]
    pub env_iterations: Option<u64>,
    #[arg(long, value_parser = config::parse_count)]
    pub adl_iterations: Option<u64>,
    #[arg(long, value_parser = config::parse_count)]
    pub standing_iterations: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct PipelineRunArgs {
    #[arg(long)]
    pub pipeline: PathBuf,
    /// Log files or directories of `*.log` files.
    #[arg(long, required = true, num_args = 1..)]
    pub logs: Vec<PathBuf>,
    /// Only use these sensors of each window, e.g. ACC+MIC.
    #[arg(long)]
    pub sensors: Option<SensorSet>,
    /// Write JSON lines here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => cmd::synth::run(&a),
        Command::Extract(a) => cmd::extract::run(&a),
        Command::Train(a) => cmd::train::run(&a),
        Command::Eval(a) => cmd::eval::run(&a),
        Command::Sweep(a) => cmd::sweep::run(&a),
        Command::Pipeline(PipelineCommand::Train(a)) => cmd::pipeline::train(&a),
        Command::Pipeline(PipelineCommand::Run(a)) => cmd::pipeline::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
