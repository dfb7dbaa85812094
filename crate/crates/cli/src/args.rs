use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "nystrom-skd", version, about = "Nyström landmark optimisation by SKD descent")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset as CSV.
    Generate(GenerateArgs),
    /// Draw initial samples, run descent, and record metrics per repetition.
    Optimize(OptimizeArgs),
    /// Report SKD, residual norms and approximation factors for a landmark file.
    Evaluate(EvaluateArgs),
    /// Print the gradient Lipschitz constants and the matching stepsize.
    Lipschitz(LipschitzArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Two-component Gaussian mixture restricted to [-1, 1]².
    #[arg(long, required = true)]
    pub bigaussian: bool,
    /// Number of points.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Weight of the first mixture component.
    #[arg(long, default_value_t = 0.5)]
    pub weight: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Dataset source and preprocessing, shared by the data-consuming commands.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// Numeric CSV, one point per row.
    #[arg(long, conflicts_with = "bigaussian", required_unless_present = "bigaussian")]
    pub data: Option<PathBuf>,
    /// The CSV starts with a header row.
    #[arg(long)]
    pub header: bool,
    /// Generate N bi-Gaussian points instead of reading a file.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub bigaussian: Option<u64>,
    /// Seed for --bigaussian.
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
    /// File of 0-based row indices to drop before any other preprocessing.
    #[arg(long)]
    pub exclude: Option<PathBuf>,
    /// Drop exact duplicate rows (after exclusion).
    #[arg(long)]
    pub deduplicate: bool,
    /// Rescale every column to zero mean and unit population variance (last).
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Exact,
    OneSample,
    TwoSample,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Gaussian kernel parameter.
    #[arg(long)]
    pub rho: f64,
    /// Number of landmarks.
    #[arg(long = "n", value_parser = clap::value_parser!(u64).range(1..))]
    pub n_landmarks: u64,
    #[arg(long, value_enum, default_value = "exact")]
    pub estimator: EstimatorArg,
    /// Batch size b (split evenly for the two-sample estimator).
    #[arg(long)]
    pub batch: Option<usize>,
    /// Two-sample batch size for T₁ (overrides the even split).
    #[arg(long, requires = "batch_y")]
    pub batch_x: Option<usize>,
    /// Two-sample batch size for T₂.
    #[arg(long, requires = "batch_x")]
    pub batch_y: Option<usize>,
    /// Stepsize, or `auto` for safety / L.
    #[arg(long)]
    pub gamma: String,
    /// Fraction of 1/L used with --gamma auto.
    #[arg(long, default_value_t = 1.0)]
    pub safety: f64,
    /// Number of descent iterations T.
    #[arg(long)]
    pub iters: usize,
    /// Number of repetitions m.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    /// Base seed; repetition r uses base + r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cost logging cadence.
    #[arg(long, default_value_t = 100)]
    pub log_every: usize,
    /// Comma-separated subset of skd, trace, frobenius, spectral, factors, or all.
    #[arg(long, default_value = "skd")]
    pub metrics: String,
    /// JSON-lines results; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for per-repetition cost traces (rep_<r>.csv).
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
    /// Directory for initial and final landmarks (rep_<r>_initial.csv, rep_<r>_final.csv).
    #[arg(long)]
    pub landmarks_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub rho: f64,
    /// Landmark CSV, one landmark per row.
    #[arg(long)]
    pub landmarks: PathBuf,
    /// The landmark CSV starts with a header row.
    #[arg(long)]
    pub landmarks_header: bool,
    /// Comma-separated subset of skd, trace, frobenius, spectral, factors, or all.
    #[arg(long, default_value = "all")]
    pub metrics: String,
    /// JSON report; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LipschitzArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub rho: f64,
    /// Number of landmarks.
    #[arg(long = "n", value_parser = clap::value_parser!(u64).range(1..))]
    pub n_landmarks: u64,
    /// Fraction of 1/L reported as the suggested stepsize.
    #[arg(long, default_value_t = 1.0)]
    pub safety: f64,
}
