use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "gifkit",
    version,
    about = "Generalized incompressible flows on finite grids"
)]
pub struct Cli {
    /// Seed for randomized batteries.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Tolerance; each subcommand documents its default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output file for the main JSON result (standard output if omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a path measure from a constructor and JSON parameters.
    Build(BuildArgs),
    /// Check incompressibility (default tolerance 1e-12).
    Check(CheckArgs),
    /// Running averages, maximal function and the maximal inequality.
    Ergodic(ErgodicArgs),
    /// Ergodicity, weak ergodicity and decomposition checks.
    Structure(StructureArgs),
    /// Solve the discrete minimum-action problem (default tolerance 1e-9).
    Brenier(BrenierArgs),
    /// Run the full property battery.
    Suite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuildKind {
    Classical,
    StoppingRotation,
    KbAverage,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    pub kind: BuildKind,
    /// Constructor parameters as a JSON file.
    #[arg(long)]
    pub params: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub measure: PathBuf,
}

#[derive(Debug, Args)]
pub struct ErgodicArgs {
    #[arg(long)]
    pub measure: PathBuf,
    /// `{"values": [...]}`, one value per cell.
    #[arg(long)]
    pub observable: PathBuf,
    /// Per-atom running averages as CSV.
    #[arg(long)]
    pub report: PathBuf,
    /// Levels for the `in_E_alpha` columns and the sweep.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<f64>,
    /// Maximal-inequality sweep as CSV.
    #[arg(long)]
    pub sweep: Option<PathBuf>,
    /// Directory for `profile.svg` and, with `--sweep`, `sweep.svg`.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StructureCheck {
    Ergodic,
    WeakErgodic,
    Decompose,
    Lemma53,
}

#[derive(Debug, Args)]
pub struct StructureArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, value_enum)]
    pub check: StructureCheck,
    /// Start cells `E` for `decompose` and `lemma53`.
    #[arg(long, value_delimiter = ',')]
    pub cells: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub shift: usize,
    /// Restrict the weak-ergodic scan to support-generated events.
    #[arg(long)]
    pub restricted: bool,
}

#[derive(Debug, Args)]
pub struct BrenierArgs {
    /// ActionProblem JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Largest number of enumerated paths.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u128,
    #[arg(long)]
    pub no_probe: bool,
    /// A feasible PathMeasure whose action bounds the optimum.
    #[arg(long)]
    pub warm_start: Option<PathBuf>,
    /// Also write the optimal measure here.
    #[arg(long)]
    pub measure_out: Option<PathBuf>,
    /// Skip the exact cross-check even on small instances.
    #[arg(long)]
    pub no_oracle: bool,
}
