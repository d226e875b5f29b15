//! Command-line driver. `main.rs` only parses arguments and maps errors to
//! exit codes; everything else lives here so tests can call it directly.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{cmd_build, cmd_sweep, cmd_verify, cmd_witness};
pub use config::{RunArgs, RunConfig};
pub use error::CliError;

/// Worker-count environment variable.
pub const WORKERS_ENV: &str = "LATTICEWEAVE_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "latticeweave",
    version,
    about = "Graph-state construction and fidelity certification on two-species lattices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a construction sequence and write the graph and stabilizer group.
    Build(RunArgs),
    /// Fidelity lower bound and exact local fidelity of one region.
    Verify(RunArgs),
    /// Bound and exact fidelity over a theta' grid, per scheme and channel.
    Sweep(RunArgs),
    /// Two-qubit witnesses on every interior edge.
    Witness(RunArgs),
}

/// Sizes the global worker pool from `LATTICEWEAVE_WORKERS`, if set.
pub fn configure_workers() -> Result<Option<usize>, CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV}={raw:?} must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    Ok(Some(n))
}

pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    match &cli.command {
        Command::Build(a) => cmd_build(&RunConfig::resolve(a)?),
        Command::Verify(a) => cmd_verify(&RunConfig::resolve(a)?),
        Command::Sweep(a) => cmd_sweep(&RunConfig::resolve(a)?),
        Command::Witness(a) => cmd_witness(&RunConfig::resolve(a)?),
    }
}
