//! Command-line surface. Every knob is optional here; resolution against the
//! optional config file and the defaults happens in [`crate::config`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "vcnn",
    about = "Confidence and prediction intervals for feedforward regression models via vine copulas",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset as CSV.
    Generate(GenerateArgs),
    /// Train a feedforward regression trunk on a CSV dataset.
    Train(TrainArgs),
    /// Fit the uncertainty model on a trained trunk and produce intervals.
    Uncertainty(UncertaintyArgs),
    /// Score an interval report against held-out targets.
    Eval(EvalArgs),
    /// Run a full demo pipeline (generate, train, uncertainty, eval).
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (must be new or empty). Defaults to
    /// `$VCNN_OUT_ROOT/<command>-seed<seed>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for head training and per-point quantiles
    /// (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// One of: fig2a, fig2b, fig2c, bimodal, moons.
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub n_test: Option<usize>,
    /// Jitter for the moons dataset.
    #[arg(long)]
    pub noise_sd: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Training CSV path.
    #[arg(long)]
    pub train: PathBuf,
    /// Target column name.
    #[arg(long)]
    pub target: Option<String>,
    /// Hidden layer widths, comma separated (e.g. 50,50).
    #[arg(long)]
    pub hidden: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct UncertaintyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Trained trunk model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Training CSV (the data the uncertainty model is fitted on).
    #[arg(long)]
    pub train: PathBuf,
    /// Test CSV (where intervals are evaluated).
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub target: Option<String>,
    /// Number of bootstrapped heads.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub truncation_level: Option<usize>,
    /// Comma-separated copula families
    /// (independence,gaussian,clayton,gumbel,frank,kernel).
    #[arg(long)]
    pub families: Option<String>,
    #[arg(long)]
    pub kernel_bandwidth_multiplier: Option<f64>,
    #[arg(long)]
    pub kernel_grid_size: Option<usize>,
    #[arg(long)]
    pub bootstrap_sample_size: Option<usize>,
    /// Comma-separated quantile levels for the calibration grid.
    #[arg(long)]
    pub tau_grid: Option<String>,
    /// Disable pinning the target as a vine leaf.
    #[arg(long)]
    pub no_pin: bool,
    #[arg(long)]
    pub head_epochs: Option<usize>,
    #[arg(long)]
    pub head_learning_rate: Option<f64>,
    #[arg(long)]
    pub head_batch_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Interval report CSV produced by `uncertainty` or `demo`.
    #[arg(long)]
    pub intervals: PathBuf,
    /// Test CSV holding the true targets.
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub target: Option<String>,
    /// Optional per-point quantile predictions CSV for the calibration curve.
    #[arg(long)]
    pub quantiles: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// One of: fig2a, fig2b, fig2c, bimodal, moons.
    #[arg(long)]
    pub name: String,
    /// Number of bootstrapped heads.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub truncation_level: Option<usize>,
    #[arg(long)]
    pub families: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
}
