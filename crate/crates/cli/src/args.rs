//! Command-line surface.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "evenodds",
    version,
    about = "Fair binary classification via a reduction to weighted classification",
    after_help = "Exit status: 0 ok, 2 usage, 3 not applicable, 4 file/parse, 5 numeric."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train one constrained model and write its artifact plus reports.
    Train(TrainArgs),
    /// Solve once per slack value to trace an accuracy-disparity curve.
    Sweep(SweepArgs),
    /// Sweep cost adjustments over a grid of deterministic classifiers.
    Grid(GridArgs),
    /// Evaluate a saved model on a data file.
    Evaluate(EvalArgs),
}

/// Flags shared by every command that ingests a dataset.
#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Label column (0/1 values, or two tokens mapped by sorted order).
    #[arg(long)]
    pub label: String,
    /// Protected attribute column (always one-hot encoded into the
    /// features and kept as the group vector).
    #[arg(long)]
    pub protected: String,
    /// Additional categorical columns to one-hot encode.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub categorical: Vec<String>,
    /// Columns to ignore entirely.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub drop: Vec<String>,
    /// Fraction of rows held out for testing.
    #[arg(long, default_value_t = 0.25)]
    pub test_frac: f64,
    /// Seed for the shuffled split.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip zero-mean/unit-variance scaling of numeric columns.
    #[arg(long)]
    pub no_standardize: bool,
}

/// Solver flags shared by `train` and `sweep`.
#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Constraint system: `dp`, `eo`, or `file:PATH`.
    #[arg(long, default_value = "dp")]
    pub constraint: String,
    /// Dual budget B (default: 2√n).
    #[arg(long = "B")]
    pub budget: Option<f64>,
    /// Target suboptimality ν (default: n^(-1/2)/2).
    #[arg(long)]
    pub nu: Option<f64>,
    /// Dual learning rate η (default: ν/(2ρ̄²B)).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Iteration cap (default: min(theoretical cap, 5000)).
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Base learner: logistic, stumps, or threshold1d.
    #[arg(long, default_value = "logistic")]
    pub learner: String,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Uniform constraint slack ε (default: count-scaled slacks with
    /// C' = 0.1, α = 0.5).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Output directory for reports and the model artifact.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Comma-separated slack values (default: 10 log-spaced points in
    /// [0.001, 0.1]).
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub eps: Option<Vec<f64>>,
    /// Solve up to this many slack values concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Constraint system: `dp` or `eo` (grids need the built-in systems).
    #[arg(long, default_value = "dp")]
    pub constraint: String,
    /// Base learner: logistic, stumps, or threshold1d.
    #[arg(long, default_value = "logistic")]
    pub learner: String,
    /// Lower end of every grid dimension (default −4).
    #[arg(long, allow_negative_numbers = true)]
    pub grid_lo: Option<f64>,
    /// Upper end of every grid dimension (default +4).
    #[arg(long, allow_negative_numbers = true)]
    pub grid_hi: Option<f64>,
    /// Points per grid dimension.
    #[arg(long, default_value_t = 33)]
    pub grid_points: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Saved model artifact (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Data file to score: either a raw CSV matching the artifact's
    /// schema or a pre-encoded file written by train/sweep.
    #[arg(long)]
    pub data: PathBuf,
    /// Optional directory for a metrics.csv report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
