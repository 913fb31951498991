//! `fracal`: run fractional variational problems and verification suites.
//!
//! Exit codes: 0 success, 1 validation or usage error, 2 solver did not
//! converge, 3 numerical failure (including a verification case that
//! misses its bound).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] fracal::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 1,
            CliError::Core(fracal::Error::Domain { .. } | fracal::Error::Precondition(_)) => 1,
            CliError::Io(_) | CliError::Core(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fracal",
    version,
    about = "Fractional action-like variational calculus toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the left, right and combined fractional derivatives of a test function.
    Ops {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: `output` from the config, else `.`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// identity, zero, constant, square, cube, sine or exp.
        #[arg(long)]
        function: Option<String>,
    },
    /// Minimise the discretised action with fixed endpoints.
    Minimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite: reductions, ibp, constants, classical-limit or falva-limit.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn out_dir(flag: Option<PathBuf>, problem: &config::Problem) -> PathBuf {
    flag.or_else(|| problem.output.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Ops { config, out, function } => {
            let problem = config::load(&config)?;
            commands::ops(&problem, function.as_deref(), &out_dir(out, &problem))?;
            Ok(0)
        }
        Command::Minimize { config, out } => {
            let problem = config::load(&config)?;
            let converged = commands::minimize(&problem, &out_dir(out, &problem))?;
            Ok(if converged { 0 } else { 2 })
        }
        Command::Verify { suite, seed, out } => {
            let all = commands::verify(&suite, seed, &out)?;
            Ok(if all { 0 } else { 3 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
