use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rnml_core::{Family, Target};

#[derive(Debug, Parser)]
#[command(name = "rnml", version, about = "Radon–Nikodym spectral regression and classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset CSV.
    Gen(GenArgs),
    /// Fit a model and print its spectrum.
    Fit(FitArgs),
    /// Evaluate a model on a grid or on query vectors.
    Predict(PredictArgs),
    /// Write the (node, weight) distribution estimate of a model.
    Distribution(DistributionArgs),
    /// Rank states by coverage and write the best ones as a transform.
    Select(SelectArgs),
    /// Signed coverage problem separating two label classes.
    Classify2(Classify2Args),
    /// Apply a transform written by `select` to a dataset.
    Reproject(ReprojectArgs),
    /// Run the gen/fit/predict pipeline over the fixed experiment grid.
    Repro(ReproArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = parse_target)]
    pub target: Target,
    #[arg(long, default_value_t = 1000)]
    pub m: usize,
    /// Feature noise amplitude R.
    #[arg(long, default_value_t = 0.1)]
    pub r: f64,
    #[arg(long, default_value = "chebyshev", value_parser = parse_family)]
    pub basis: Family,
    #[arg(long, default_value_t = 10)]
    pub dx: usize,
    #[arg(long, env = "RNML_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset CSV.
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Model JSON.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Expand grid points through this basis (grid mode).
    #[arg(long, value_parser = parse_family, conflicts_with = "queries")]
    pub basis: Option<Family>,
    #[arg(long, default_value_t = -1.2, allow_negative_numbers = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.2, allow_negative_numbers = true)]
    pub hi: f64,
    #[arg(long, default_value_t = 241)]
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV of x-vectors (query mode); a trailing `y` column is ignored.
    #[arg(long, required_unless_present = "basis")]
    pub queries: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Sweep CSV; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistributionArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Number of states to keep; all of them when omitted.
    #[arg(long)]
    pub d: Option<usize>,
    /// Count only observations with `y-lo <= y < y-hi`.
    #[arg(long, requires = "y_hi", allow_negative_numbers = true)]
    pub y_lo: Option<f64>,
    #[arg(long, requires = "y_lo", allow_negative_numbers = true)]
    pub y_hi: Option<f64>,
    /// Transform CSV.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct Classify2Args {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Label weighted +1; defaults to the larger label.
    #[arg(long, allow_negative_numbers = true)]
    pub class1: Option<f64>,
    /// Label weighted −1; defaults to the other label.
    #[arg(long, allow_negative_numbers = true)]
    pub class2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReprojectArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long)]
    pub transform: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    /// Output directory for sweep CSVs and manifest.json.
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub m: usize,
    #[arg(long, env = "RNML_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 241)]
    pub count: usize,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: rnml_core::Error| e.to_string())
}

fn parse_target(s: &str) -> Result<Target, String> {
    s.parse().map_err(|e: rnml_core::Error| e.to_string())
}
