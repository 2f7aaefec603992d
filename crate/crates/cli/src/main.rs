//! `nested-adiabatic`: generate instances, run the nested search, sweep
//! scaling experiments and verify discretization bounds.
//!
//! Exit codes: 0 ok, 2 usage, 3 unsatisfiable, 4 no partial solutions,
//! 5 resource limit, 1 anything else.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod sweep;
mod verify;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nested_adiabatic::Error;

/// Invalid flags, files or configuration.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(
    name = "nested-adiabatic",
    version,
    about = "Nested adiabatic quantum search simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random k-SAT instance.
    Generate(GenerateArgs),
    /// Run the three-stage nested search on an instance.
    Run(RunArgs),
    /// Run a parameter sweep and fit the scaling exponent.
    Sweep(SweepArgs),
    /// Compare measured discretization errors with their bounds.
    Verify(VerifyArgs),
    /// Print exact solution counts of an instance.
    Census(CensusArgs),
}

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub clauses: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; `.cnf` writes DIMACS, anything else native JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct InstanceArgs {
    /// Native JSON instance, or DIMACS CNF (`.cnf` / `--dimacs`).
    pub instance: PathBuf,
    /// Read the instance as DIMACS CNF regardless of extension.
    #[arg(long)]
    pub dimacs: bool,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Primary-variable count (overrides the configured partition).
    #[arg(long)]
    pub n_a: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Output directory (default: config, then $NESTED_ADIABATIC_OUT_DIR).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: InstanceArgs,
    /// Simulated measurement shots (overrides the config).
    #[arg(long)]
    pub shots: Option<usize>,
}

#[derive(Args)]
pub struct SweepArgs {
    /// JSON sweep specification.
    pub spec: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: InstanceArgs,
    /// Use `H_f` for both ends of every stage (commuting factors).
    #[arg(long)]
    pub degenerate: bool,
}

#[derive(Args)]
pub struct CensusArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub dimacs: bool,
    #[arg(long)]
    pub n_a: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Unsatisfiable) => 3,
        Some(Error::NoPartialSolutions) => 4,
        Some(Error::Resource(_)) => 5,
        Some(Error::Input(_) | Error::Parse { .. } | Error::Json(_)) => 2,
        Some(_) => 1,
        None if err.downcast_ref::<std::io::Error>().is_some() => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Run(a) => commands::run(&a),
        Command::Sweep(a) => sweep::sweep(&a),
        Command::Verify(a) => verify::verify(&a),
        Command::Census(a) => commands::census(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
