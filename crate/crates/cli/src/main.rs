//! `spincat`: command-line front end for cat state preparation.
//!
//! Exit codes: 0 success, 1 numerical or convergence failure, 2 invalid
//! arguments.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Completion;

const EXIT_NUMERICAL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn is_validation(err: &anyhow::Error) -> bool {
    use spincat_core::Error as E;
    matches!(
        err.downcast_ref::<E>(),
        Some(E::AtomCount { .. } | E::InvalidArgument(_) | E::InvalidSchedule(_) | E::DimensionMismatch { .. })
    )
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(invalid) = cli.command.validate() {
        eprintln!("error: {}", invalid.0);
        return ExitCode::from(EXIT_USAGE);
    }
    let result = match &cli.command {
        Command::Cat(a) => commands::cat(a),
        Command::Adiabatic(a) => commands::adiabatic(a),
        Command::Optimize(a) => commands::optimize(a),
        Command::Scan(a) => commands::scan(a),
    };
    match result {
        Ok(Completion::Clean) => ExitCode::SUCCESS,
        Ok(Completion::Degraded) => ExitCode::from(EXIT_NUMERICAL),
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_validation(&err) {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_NUMERICAL)
            }
        }
    }
}
