use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "unbiased",
    version,
    about = "Unbiased projector systems: solve, verify, certify"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Command tolerance: Newton acceptance for solve/family, check tolerance for verify/symplectic.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the JSON result to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print JSON to standard output instead of a table.
    #[arg(long, global = true)]
    pub json: bool,
    /// TOML file with defaults for any flag; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multi-start Newton search for critical points.
    Solve(SolveArgs),
    /// Check a transition matrix for unbiasedness.
    Verify(VerifyArgs),
    /// Exact certificates for the Birkhoff polytope.
    Polytope(PolytopeArgs),
    /// Numerical checks of the symplectic statements.
    Symplectic(SymplecticArgs),
    /// Trace Hessian null directions of solved records.
    Family(FamilyArgs),
}

#[derive(Debug, Args, Default)]
pub struct SolveArgs {
    /// Matrix dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// `uniform:<n>`, an inline JSON weight literal, or a path to one.
    #[arg(long)]
    pub weights: Option<String>,
    /// Number of random starts.
    #[arg(long)]
    pub starts: Option<usize>,
    /// Newton iteration cap per start.
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Seed start 0 with the Fourier matrix.
    #[arg(long)]
    pub fourier: bool,
    /// Number of starts drawn near the Fourier matrix.
    #[arg(long)]
    pub fourier_perturbed: Option<usize>,
    /// Relative singular-value cutoff for the Hessian nullity.
    #[arg(long)]
    pub nullity_tolerance: Option<f64>,
    #[arg(long)]
    pub cluster_tolerance: Option<f64>,
    /// Write a per-cluster CSV summary.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct VerifyArgs {
    /// JSON matrix literal `{"n", "re", "im"}`.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub weights: Option<String>,
    /// Also check the Hermitian specialization.
    #[arg(long)]
    pub mub: bool,
}

#[derive(Debug, Args, Default)]
pub struct PolytopeArgs {
    /// Matrix dimension, 2 to 8.
    #[arg(long)]
    pub n: Option<usize>,
    /// Write the reflexivity evaluation table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct SymplecticArgs {
    /// Matrix dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Tangent pairs per point, lemma instances per k and integrable samples.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Random cotangent points for the pullback check.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct FamilyArgs {
    /// Records file written by `solve --out`.
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub cluster_tolerance: Option<f64>,
}
