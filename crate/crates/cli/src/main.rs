//! `camox` — generate synthetic studies, extract PPG from frame files, train
//! and evaluate the LOOCV pipeline, and emit reports.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliResult;

#[derive(Parser)]
#[command(name = "camox", version, about = "Smartphone-camera pulse oximetry pipeline")]
struct Cli {
    /// Overrides the seed in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for split-level parallelism (0 = one per core).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// JSON config: a study spec for `synth`, a training config for
    /// `train`/`ablate`, a report config for `report`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic varied-FiO₂ study in the dataset layout.
    Synth(SynthArgs),
    /// Convert a raw frame file into a PPG CSV of channel means.
    Extract(ExtractArgs),
    /// Run leave-one-subject-out training and write test predictions.
    Train(TrainArgs),
    /// Rerun LOOCV at several label floors (train with --floors).
    Ablate(TrainArgs),
    /// Compute metrics from a predictions CSV.
    Report(ReportArgs),
}

#[derive(Args)]
pub struct SynthArgs {
    /// Output dataset directory (must be empty or absent).
    #[arg(long, short)]
    pub out: PathBuf,
    /// Study spec JSON (defaults to --config, then built-in defaults).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub subjects: Option<usize>,
    /// Subject ids rendered with a callus tissue profile.
    #[arg(long, value_delimiter = ',')]
    pub callus: Vec<u32>,
}

#[derive(Args)]
pub struct ExtractArgs {
    /// Raw frame file (CAMOX1 container).
    pub frames: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub subject: u32,
    #[arg(long, default_value = "left")]
    pub hand: String,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Dataset root.
    #[arg(long, env = "CAMOX_DATA_DIR")]
    pub data: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Subject ids left out of every split.
    #[arg(long = "exclude-subject", value_delimiter = ',')]
    pub exclude: Vec<u32>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Minimum ground-truth SpO₂ kept.
    #[arg(long)]
    pub floor: Option<f64>,
    /// Label floors for an ablation run, e.g. 70,75,80,85,90.
    #[arg(long, value_delimiter = ',')]
    pub floors: Vec<f64>,
    /// Clamp predictions to [0, 100].
    #[arg(long)]
    pub clamp: bool,
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long, short)]
    pub predictions: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Hypoxemia thresholds, e.g. 95,90,85.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Vec<f64>,
    /// Ablation CSV to include in the report.
    #[arg(long)]
    pub ablation: Option<PathBuf>,
}

/// Options shared by every command.
pub struct Global {
    pub seed: Option<u64>,
    pub jobs: usize,
    pub config: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    let g = Global {
        seed: cli.seed,
        jobs: cli.jobs,
        config: cli.config,
    };
    match cli.command {
        Command::Synth(a) => commands::synth(&g, a),
        Command::Extract(a) => commands::extract(&g, a),
        Command::Train(a) if !a.floors.is_empty() => commands::ablate(&g, a),
        Command::Train(a) => commands::train(&g, a),
        Command::Ablate(a) => commands::ablate(&g, a),
        Command::Report(a) => commands::report(&g, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit as u8)
        }
    }
}
