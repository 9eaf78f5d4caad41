//! `fhmin` command-line tool. Exit codes: 0 success, 2 invalid input,
//! 3 numerical failure or anomaly.

mod cli;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use commands::Failure;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Utheta(a) => commands::utheta(a),
        Command::PotentialTable(a) => commands::potential_table(a),
        Command::Solve(a) => commands::solve(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::PhiScan(a) => commands::phi_scan_cmd(a),
        Command::Threshold(a) => commands::threshold(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
