use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cquant::FamilyId;

#[derive(Debug, Parser)]
#[command(name = "cquant", version, about = "Optimal constrained quantization of uniform measures on planar curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Numerically optimize an n-point codebook.
    Solve(SolveArgs),
    /// Emit a known optimal codebook and its error.
    ClosedForm(ClosedFormArgs),
    /// Estimate the limit, dimension and coefficient of an error sequence.
    Asymptotics(AsymptoticsArgs),
}

/// Either a named family or explicit geometry.
#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Named problem family.
    #[arg(long, value_parser = parse_family, conflicts_with_all = ["measure", "constraint"])]
    pub family: Option<FamilyId>,

    /// Support start (segment-line) or constraint radius (circle-circle).
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Slope of the constraint line.
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<f64>,
    /// Intercept of the constraint line.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Constraint window start (abscissa).
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<f64>,
    /// Constraint window end (abscissa).
    #[arg(long, allow_negative_numbers = true)]
    pub e: Option<f64>,

    /// Support curve as JSON, inline or as a file path.
    #[arg(long, requires = "constraint")]
    pub measure: Option<String>,
    /// Constraint curve as JSON, inline or as a file path.
    #[arg(long, requires = "measure")]
    pub constraint: Option<String>,
    /// Admissible parameter window `lo,hi` on the constraint.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// RNG seed for the random starts.
    #[arg(long, env = "CQ_SEED")]
    pub seed: Option<u64>,
    /// Solver configuration file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of multi-start seeds.
    #[arg(long)]
    pub starts: Option<usize>,
    /// Iteration cap per start.
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the result here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClosedFormArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub n: usize,
    /// Re-evaluate the codebook with the distortion engine and report the
    /// discrepancy.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Smallest n passed to the estimators.
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    /// Largest n of the sequence.
    #[arg(long)]
    pub n_max: usize,
    /// Use closed-form errors instead of solving.
    #[arg(long)]
    pub exact: bool,
    /// With `--exact`: use the reference error expressions where they
    /// differ from the exact errors.
    #[arg(long, requires = "exact")]
    pub stated: bool,
    /// Estimate the limit even when an exact one is known.
    #[arg(long)]
    pub estimate_limit: bool,
    /// Quantization order.
    #[arg(long, default_value_t = 2.0)]
    pub order: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Also write the per-n table as CSV to this path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// What to print: the JSON summary or the CSV table.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<FamilyId, String> {
    s.parse().map_err(|e: cquant::Error| e.to_string())
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}
