//! `cusp-eigen`: closed-form bounds, discrete eigenvalues, verification
//! checks and parameter sweeps.
//!
//! Exit codes: 0 success, 1 IO error, 2 invalid input, 3 solver did not
//! converge (output still written), 4 a verification check failed.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Library(cusp_eigen::Error),
    Io(String),
    NotConverged,
    VerificationFailed,
}

impl From<cusp_eigen::Error> for CliError {
    fn from(e: cusp_eigen::Error) -> Self {
        CliError::Library(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) | CliError::Library(_) => 2,
            CliError::NotConverged => 3,
            CliError::VerificationFailed => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Io(m) => f.write_str(m),
            CliError::Library(e) => e.fmt(f),
            CliError::NotConverged => f.write_str("solver did not converge"),
            CliError::VerificationFailed => f.write_str("verification failed"),
        }
    }
}

#[derive(Parser)]
#[command(name = "cusp-eigen", version, about = "Neumann (p,q)-eigenvalues on outward cuspidal domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// key=value file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the merged configuration here and continue.
    #[arg(long, global = true)]
    write_config: Option<PathBuf>,
    #[command(flatten)]
    run: RunConfig,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form lower bounds as JSON.
    Bounds(Common),
    /// Discrete eigenvalue by Rayleigh quotient minimisation (n = 2).
    Solve(Common),
    /// Inequality and identity checks as CSV.
    Verify(Common),
    /// Bounds over a parameter grid as CSV.
    Sweep(Common),
}

type Action = fn(&RunConfig) -> Result<commands::Output, CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, action): (Common, Action) = match cli.command {
        Command::Bounds(c) => (c, commands::bounds),
        Command::Solve(c) => (c, commands::solve),
        Command::Verify(c) => (c, commands::verify),
        Command::Sweep(c) => (c, commands::sweep),
    };
    let base = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            RunConfig::parse_file(&text)?
        }
        None => RunConfig::default(),
    };
    let cfg = common.run.over(base);
    if let Some(path) = &common.write_config {
        std::fs::write(path, cfg.to_file()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers())
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    let output = pool.install(|| action(&cfg))?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &output.text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{}", output.text),
    }
    output.status
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.code())
        }
    }
}
