//! `xcp`: calibrate, apply and evaluate extreme conformal corrections, and run
//! simulation studies.
//!
//! Exit codes: 0 success, 2 usage, 3 data, 4 numerical failure. Errors are
//! printed to stderr as `xcp: error[<code>]: <message>`. Set `XCP_LOG` (for
//! example `XCP_LOG=debug`) for diagnostics.

mod artifact;
mod commands;
mod error;
mod table;

use clap::{Args, Parser, Subcommand};
use extreme_conformal::{Method, Sidedness, Split};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "xcp",
    version,
    about = "Conformal prediction intervals at extreme confidence levels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate a correction from scores or (prediction, observed) pairs.
    Calibrate(CalibrateArgs),
    /// Apply a correction artifact to new predictions.
    Predict(PredictArgs),
    /// Run a simulation study from a TOML config.
    Simulate(SimulateArgs),
    /// Empirical coverage of intervals against observations.
    Evaluate(EvaluateArgs),
    /// Write the covariates an external model must predict at.
    Design(DesignArgs),
}

#[derive(Args)]
pub struct CalibrateArgs {
    /// CSV with header `score`, `prediction,observed` or `lower_pred,upper_pred,observed`.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Target miscoverage in (0, 1).
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value = "gpd_safeprofile")]
    pub method: Method,
    /// Probability level of the GPD threshold.
    #[arg(long, default_value_t = 0.95)]
    pub tau0: f64,
    #[arg(long, default_value = "sidak")]
    pub split: Split,
    #[arg(long, default_value_t = 1000)]
    pub boot_reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sidedness of a plain `score` file (default unilateral); otherwise must agree with the header.
    #[arg(long)]
    pub sidedness: Option<Sidedness>,
    /// Artifact path (JSON).
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(short, long)]
    pub artifact: PathBuf,
    /// CSV with a `prediction` column, or `lower_pred` and `upper_pred`.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Lower end of unilateral intervals.
    #[arg(long, default_value_t = f64::NEG_INFINITY, allow_hyphen_values = true)]
    pub y_min: f64,
    /// Output CSV; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(short, long)]
    pub config: PathBuf,
    /// Created atomically; must not exist or be empty.
    #[arg(short, long)]
    pub output_dir: PathBuf,
    /// Run repetitions on one thread.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// CSV with `lower,upper` (as written by `predict`).
    #[arg(long)]
    pub intervals: PathBuf,
    /// CSV with an `observed` column.
    #[arg(long)]
    pub observations: PathBuf,
    /// Nominal miscoverage, for the exceedance ratio.
    #[arg(long)]
    pub alpha: f64,
}

#[derive(Args)]
pub struct DesignArgs {
    #[arg(short, long)]
    pub config: PathBuf,
    /// Zero-based cell index.
    #[arg(long, default_value_t = 0)]
    pub cell: usize,
    #[arg(short, long)]
    pub output: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("XCP_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Calibrate(a) => commands::calibrate(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Design(a) => commands::design(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
