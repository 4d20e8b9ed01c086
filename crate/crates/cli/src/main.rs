//! `inner-gmres`: generate test problems, run solves, analyze splittings and
//! reproduce the benchmark tables.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// GMRES and flexible GMRES with stationary inner-iteration preconditioning
/// for singular systems.
///
/// Threads for table cells and α sweeps follow RAYON_NUM_THREADS. Set
/// RUST_LOG=info (or debug) for diagnostics on stderr.
///
/// Exit codes: 0 success, 1 other failure (including the iteration limit),
/// 2 invalid input, 3 breakdown without a solution, 4 inner-solver failure.
#[derive(Debug, Parser)]
#[command(name = "inner-gmres", version, about, long_about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a test problem and write it as Matrix Market files plus `meta.txt`.
    Generate(GenerateArgs),
    /// Run one solve and print its record.
    Solve(SolveArgs),
    /// Spectral report of a splitting: semiconvergence, ν(H), the eigenvalue disk of A·C^(ℓ).
    Analyze(AnalyzeArgs),
    /// Grid search for the α minimizing ν(H(α)).
    EstimateAlpha(EstimateArgs),
    /// Run the method roster of a benchmark table.
    Table(TableArgs),
    /// Check the construction invariants of a stored problem.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Stokes,
    Structured,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Problem family.
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Grid size (Stokes, even) or block size (structured).
    #[arg(long)]
    pub q: usize,
    /// Viscosity (Stokes).
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Convection discretization (Stokes): centered or upwind.
    #[arg(long, default_value = "centered")]
    pub convection: String,
    /// Condition exponent: ‖A‖‖A†‖ = √2·10^j (structured).
    #[arg(long, default_value_t = 3)]
    pub j: u32,
    /// Target density of the rotated matrix (structured).
    #[arg(long)]
    pub density: Option<f64>,
    /// Seed for the random rotations (structured).
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Splitting flags shared by `solve`, `analyze` and `estimate-alpha`.
#[derive(Debug, Args, Clone, Default)]
pub struct SplittingArgs {
    /// Shift α of the GSS and HSS families.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Shift β of GSS/IGSS; defaults to ‖B‖²/‖C‖.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Relaxation factor of SOR/SSOR; defaults to 1.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Relative tolerance of the inexact inner solves (IGSS, IHSS); defaults to 0.1.
    #[arg(long)]
    pub inner_tol: Option<f64>,
    /// Iteration limit of the IHSS inner solves; defaults to n.
    #[arg(long)]
    pub inner_maxit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// TOML experiment config; flags given here take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Problem directory written by `generate`.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Outer solver: gmres, gmres-inner or fgmres.
    #[arg(long)]
    pub method: Option<String>,
    /// Splitting: jacobi, gauss-seidel, sor, ssor, gss, igss, hss or ihss.
    #[arg(long)]
    pub splitting: Option<String>,
    #[command(flatten)]
    pub params: SplittingArgs,
    /// Inner steps per outer step for gmres-inner: a count, or `auto` to pick
    /// the count from the stationary iteration (capped at 10).
    #[arg(long)]
    pub ell: Option<String>,
    /// Search α on this log grid (`lo:hi:points`, exponents of ten) instead of `--alpha`.
    #[arg(long)]
    pub alpha_grid: Option<String>,
    /// Inner-iteration cap per outer step for fgmres; defaults to n.
    #[arg(long)]
    pub inner_cap: Option<usize>,
    /// Relative residual target.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Outer iteration limit; defaults to n.
    #[arg(long)]
    pub maxit: Option<usize>,
    /// Run a second Gram–Schmidt pass at every step.
    #[arg(long)]
    pub reorthogonalize: bool,
    /// Seed recorded in the config (used when the config generates a structured problem).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-iteration residual trace (CSV).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Record output (CSV).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leave the time columns empty so outputs compare byte for byte.
    #[arg(long)]
    pub no_time: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Problem directory written by `generate`.
    #[arg(long)]
    pub problem: PathBuf,
    /// Splitting name (exact kinds only).
    #[arg(long)]
    pub splitting: String,
    #[command(flatten)]
    pub params: SplittingArgs,
    /// Inner steps ℓ for the eigenvalue disk of A·C^(ℓ).
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
    /// Also compute the index of A (one dense SVD per power).
    #[arg(long)]
    pub index: bool,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Problem directory written by `generate`.
    #[arg(long)]
    pub problem: PathBuf,
    /// Splitting family to tune: gss or hss.
    #[arg(long)]
    pub splitting_kind: String,
    /// Log grid `lo:hi:points`: `points` values 10^e, e evenly spaced in [lo, hi].
    #[arg(long, default_value = "-3:0:31", allow_hyphen_values = true)]
    pub grid: String,
    /// Shift β for GSS; defaults to ‖B‖²/‖C‖.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Per-point table output (CSV).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Table id: stokes-mu1, stokes-mu1e-5, struct-j3, struct-j6, struct-j9,
    /// params-j3, params-j6 or params-j9.
    #[arg(long)]
    pub id: String,
    /// Sizes to run, e.g. `q=16` or `16,32`; defaults to the smallest published size.
    #[arg(long)]
    pub subset: Option<String>,
    /// Output directory for `<id>.csv` and `<id>.txt`; the text table is printed either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the structured problems.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Override the reference α of the Stokes tables.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Search α by grid instead of using the reference values.
    #[arg(long)]
    pub alpha_search: bool,
    /// Directory for per-run residual traces.
    #[arg(long)]
    pub traces: Option<PathBuf>,
    /// Leave the time columns empty so outputs compare byte for byte.
    #[arg(long)]
    pub no_time: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Problem directory written by `generate`.
    #[arg(long)]
    pub problem: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code_for(&e))
        }
    }
}
