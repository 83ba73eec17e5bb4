//! Command-line front end: argument definitions, config resolution and the
//! five commands. The binary is a thin wrapper around [`run`].

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};

pub use commands::{
    cmd_energy, cmd_eval, cmd_generate, cmd_sweep, cmd_train, load_splits, DataSource, RunConfig,
};
pub use config::ConfigFile;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "INTERVALCAST_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "intervalcast",
    version,
    about = "Interval-conditioned time-series forecasting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the synthetic four-hypothesis trace as CSV.
    Generate(GenerateArgs),
    /// Train one model per seed under a policy.
    Train(TrainArgs),
    /// Per-interval MAE table for one or more checkpoints.
    Eval(EvalArgs),
    /// Train and evaluate over a grid of one hyperparameter.
    Sweep(SweepArgs),
    /// Threshold study of the sleep-mode energy model.
    Energy(EnergyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// key = value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output location [default: $INTERVALCAST_OUT or ./out].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// `synth` or a CSV path [default: synth].
    #[arg(long)]
    pub data: Option<String>,
    /// Seed of the synthetic trace [default: 0].
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// Noise level of the synthetic trace [default: 0.05].
    #[arg(long, allow_negative_numbers = true)]
    pub noise_sd: Option<f64>,
    /// Keep the first N CSV columns [default: 100].
    #[arg(long)]
    pub channels: Option<usize>,
    /// Domain maximum used for normalization [default: 1].
    #[arg(long)]
    pub domain_max: Option<f64>,
    /// History length w [default: 48].
    #[arg(long)]
    pub window: Option<usize>,
    /// Forecast horizon tau [default: 24].
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Stride between windows [default: 1].
    #[arg(long)]
    pub stride: Option<usize>,
    /// Train,val,test fractions [default: 0.66,0.17,0.17].
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PolicyArgs {
    /// b | e2e | c | d | dstar [default: b].
    #[arg(long)]
    pub policy: Option<String>,
    /// Task interval `lo,hi` (e2e).
    #[arg(long)]
    pub interval: Option<String>,
    /// Minimum sampled interval length (c) [default: 0.1].
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of partition cells (d, dstar) [default: 4].
    #[arg(long = "L")]
    pub cells: Option<usize>,
    /// Decay rate, a number or `inf` (dstar) [default: 37].
    #[arg(long)]
    pub nu: Option<String>,
    /// Classification weight (dstar) [default: 0.5].
    #[arg(long)]
    pub phi: Option<f64>,
    /// Decoupled weight decay [default: 0.01].
    #[arg(long)]
    pub weight_decay: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct FitArgs {
    /// linear[:kernel] | mlp[:hidden] [default: mlp:64].
    #[arg(long)]
    pub model: Option<String>,
    /// [default: 50]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// [default: 32]
    #[arg(long)]
    pub batch: Option<usize>,
    /// Early-stopping patience [default: 5].
    #[arg(long)]
    pub patience: Option<usize>,
    /// Comma-separated seeds [default: 0].
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// [default: 0.05]
    #[arg(long, allow_negative_numbers = true)]
    pub noise_sd: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    /// File stem of the outputs [default: <policy>-seed<seed>].
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvalTargetArgs {
    /// Query intervals `lo,hi;lo,hi;...` [default: the cells of --eval-L].
    #[arg(long)]
    pub intervals: Option<String>,
    /// Equal cells used as query intervals [default: 4].
    #[arg(long)]
    pub eval_l: Option<usize>,
    /// avg | max, for dstar models [default: avg].
    #[arg(long)]
    pub strategy: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub target: EvalTargetArgs,
    /// Checkpoints to compare; the first baseline-policy one is the reference.
    #[arg(long, num_args = 1.., required = true)]
    pub checkpoint: Vec<PathBuf>,
    /// Roll the origin by the horizon through the test split instead of
    /// scoring every test window.
    #[arg(long)]
    pub rolling: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub target: EvalTargetArgs,
    /// `L=4,8,16,32`, `nu=0,1,2,5,inf`, `delta=0:0.4:9` or `strategy=avg,max`.
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Single-column CSV of true utilization.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Single-column CSV of forecast utilization.
    #[arg(long)]
    pub forecast: Option<PathBuf>,
    /// Factor applied to both series before simulation [default: 1].
    #[arg(long)]
    pub scale: Option<f64>,
    /// [default: 0.5]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Mbps [default: 100].
    #[arg(long)]
    pub c_cap: Option<f64>,
    /// Mbps [default: 30].
    #[arg(long)]
    pub c_cov: Option<f64>,
    /// [default: 0.5]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Wh [default: 1266].
    #[arg(long)]
    pub e_on: Option<f64>,
    /// Wh [default: 320].
    #[arg(long)]
    pub e_off: Option<f64>,
    /// `lo:hi:n` or a comma list [default: 0:0.025:26].
    #[arg(long)]
    pub thresholds: Option<String>,
}

/// Parses `args` (program name first) and runs the command. Returns the
/// text to print on success.
pub fn run<I, T>(args: I) -> Result<String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Ok(e.to_string());
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return Err(Error::Config(
                first.trim_start_matches("error: ").to_string(),
            ));
        }
    };
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Energy(a) => cmd_energy(&a),
    }
}
