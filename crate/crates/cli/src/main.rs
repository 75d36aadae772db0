mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entropic_nc::FamilyKind;

#[derive(Parser, Debug)]
#[command(
    name = "entropic-nc",
    version,
    about = "Evaluate the five-cycle entropic non-contextuality inequality"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Observable configuration (JSON); defaults to the built-in vectors
    #[arg(long, global = true)]
    pub observables: Option<PathBuf>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; output does not depend on it
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Read angles in degrees instead of radians
    #[arg(long, global = true)]
    pub degrees: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Entangled,
    Product,
}

impl From<Family> for FamilyKind {
    fn from(f: Family) -> Self {
        match f {
            Family::Entangled => FamilyKind::Entangled,
            Family::Product => FamilyKind::Product,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check normalization and cyclic orthogonality and print the Gram matrix
    Verify,
    /// Evaluate M for one state
    Eval(EvalArgs),
    /// Evaluate M over an (alpha, beta) lattice
    Scan(ScanArgs),
    /// Search for the largest M in a state family
    Optimize(OptimizeArgs),
    /// Check the classical bound on random joint distributions
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long, value_enum, conflicts_with = "state")]
    pub family: Option<Family>,
    #[arg(long, allow_hyphen_values = true, requires = "family")]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "family")]
    pub beta: Option<f64>,
    /// Four real amplitudes, normalized before use
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub state: Option<Vec<f64>>,
    /// Estimate from this many simulated shots per pair instead of exactly
    #[arg(long)]
    pub shots: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long, value_enum, default_value = "entangled")]
    pub family: Family,
    /// Lattice points per axis when no explicit range is given
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// start,stop,steps
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha_range: Option<Vec<f64>>,
    /// start,stop,steps
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta_range: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[arg(long, value_enum, default_value = "entangled")]
    pub family: Family,
    #[arg(long, default_value_t = 60)]
    pub coarse_steps: usize,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// start,stop for both axes
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Dirichlet concentrations, used in turn
    #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
    pub concentrations: Vec<f64>,
    /// Sample only joint distributions without adjacent (+1,+1) outcomes
    #[arg(long)]
    pub exclusive: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
