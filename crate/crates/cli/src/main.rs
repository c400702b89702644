//! `choi-sqpt`: element-wise and full χ tomography on simulated channels.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 channel/χ file unreadable or
//! malformed, 4 physicality validation failure.

mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(&cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code as u8)
        }
    }
}
