use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "fhmin", version, about = "Allen-Cahn flow to Dirichlet minimizers of the Flory-Huggins energy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Positive minimizer u_θ of W for each θ.
    Utheta(UthetaArgs),
    /// Dump W, W', W'' and the modified potential on a grid of u.
    PotentialTable(PotentialTableArgs),
    /// Integrate one case to equilibrium.
    Solve(SolveArgs),
    /// Run a (θ, κ, seed) grid and write records plus a manifest.
    Sweep(SweepArgs),
    /// Scan the fiber map Φ(s) = E(s u).
    PhiScan(PhiScanArgs),
    /// Bisect for the bifurcation threshold in κ.
    Threshold(ThresholdArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// N = 128, dt = 1e-4
    Full,
    /// N = 64, dt = 4e-4
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Modified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Guard {
    Strict,
    Clamped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// θ ∈ {0.3, 0.5, 0.7, 0.9, 0.95} at κ = 0.02
    Table1,
    /// θ = 0.7, κ ∈ {0.02, …, 0.299}
    Table2,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, env = "FHMIN_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
}

/// Discretization overrides shared by the solver commands.
#[derive(Debug, Args)]
pub struct NumericsArgs {
    /// Base numerics before the overrides below.
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Cells per side.
    #[arg(long)]
    pub n: Option<usize>,
    /// Side length of the square (default √2·π, so λ₁ = 1).
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Residual threshold of the stopping rule.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub checkpoint_period: Option<f64>,
    /// Initial amplitude a₀.
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum)]
    pub guard: Option<Guard>,
    /// Threshold constant C of the modified potential.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub trivial_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct UthetaArgs {
    #[arg(long, value_delimiter = ',')]
    pub theta: Vec<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also write the table to this file.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PotentialTableArgs {
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Defaults to `<output-dir>/potential_table.csv`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub sign: Option<Sign>,
    /// Also write a 16-bit grayscale PNG of the final field.
    #[arg(long)]
    pub image: bool,
    /// Dump the field at every checkpoint.
    #[arg(long)]
    pub checkpoints: bool,
    /// Field dump format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub numerics: NumericsArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, value_delimiter = ',')]
    pub theta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub kappa: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub seed: Vec<u64>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Records file format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub numerics: NumericsArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PhiScanArgs {
    /// Scan the first Dirichlet eigenfunction (max 1).
    #[arg(long, conflicts_with = "field")]
    pub eigenfunction: bool,
    /// Scan a field saved by `solve` (CSV).
    #[arg(long)]
    pub field: Option<PathBuf>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub smax: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Cells per side for the eigenfunction.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Defaults to `<output-dir>/phi_scan.csv`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub low: Option<f64>,
    #[arg(long)]
    pub high: Option<f64>,
    #[arg(long)]
    pub resolution: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub seed: Vec<u64>,
    /// Time of each probe run.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[command(flatten)]
    pub numerics: NumericsArgs,
    #[command(flatten)]
    pub common: Common,
}
