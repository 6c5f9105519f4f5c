//! `apn` command-line driver.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check or a
//! computation error, 2 on invalid flags or input files. Reports go to
//! stdout (or `--out`), diagnostics to stderr.

mod args;
mod commands;
mod output;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Failure;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Verify => commands::verify(&cli),
        Command::Secvar { frame } => commands::secvar(&cli, frame),
        Command::Sample => commands::sample(&cli),
        Command::Derive => commands::derive(&cli),
    };
    match outcome {
        Ok(o) => {
            if let Err(e) = output::emit(&o.report, cli.format, cli.out.as_deref()) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if o.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
