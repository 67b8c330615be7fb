//! The `qcpu-sim` command-line front end.
//!
//! Exit codes: 0 on success, 1 on a numerical failure or a failed identity,
//! 2 on a usage or configuration error.

mod config;
mod output;
mod run;
mod spectrum;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use config::{
    EvolutionSection, GridSection, InitialState, OutputSection, RunConfig, OUT_DIR_ENV,
};
pub use run::{CompareReport, RunSummary};
pub use verify::{IdentityCheck, VerifyReport};

/// Failure of a command, carrying its exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad arguments or configuration; exit 2.
    Usage(String),
    /// NaN, failed identity or I/O failure during a run; exit 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => m,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "qcpu-sim",
    version,
    about = "Simulate QCPU networks and discretized Schrodinger evolution"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the network identities on seeded random payloads.
    VerifyIdentities {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Register dimension of the random payloads.
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=64))]
        dim: u64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a configured evolution and write snapshots, diagnostics and a summary.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare the whole network, the Euler loop and the exact propagator.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Number of dt-halving rungs for the convergence estimate.
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(3..=12))]
        ladder: u64,
    },
    /// Tabulate analytic and numerical momentum and kinetic eigenvalues.
    Spectrum {
        #[arg(long = "L")]
        length: f64,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long)]
        centered: bool,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `std::env::args`, runs the command and maps the outcome to an exit code.
pub fn run_from_env() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::VerifyIdentities { seed, dim, out } => {
            verify::cmd_verify_identities(seed, dim as usize, out)
        }
        Command::Simulate { config } => run::cmd_simulate(&config),
        Command::Compare { config, ladder } => run::cmd_compare(&config, ladder as usize),
        Command::Spectrum {
            length,
            k,
            mu,
            centered,
            out,
        } => spectrum::cmd_spectrum(length, k, mu, centered, out),
    }
}
