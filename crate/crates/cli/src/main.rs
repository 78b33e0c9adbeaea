//! `morrey`: command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage, configuration or input
//! error, 3 the grid is too coarse for the requested experiment.

use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod config;

use args::Cli;
use commands::{CliError, Status};

fn run(argv: Vec<String>) -> u8 {
    let argv = match config::merge(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return 2;
        }
    }
    match commands::execute(&cli) {
        Ok(Status::Pass) => 0,
        Ok(Status::Fail) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Core(morrey::Error::Resolution { .. }) => 3,
                _ => 2,
            }
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args().collect()))
}
