mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::BellSweep(a) => commands::bell_sweep_cmd(a),
        Command::Scaling(a) => commands::scaling_cmd(a),
        Command::Scatter(a) => commands::scatter_cmd(a),
        Command::Decoherence(a) => commands::decoherence_cmd(a),
        Command::OracleCheck(a) => commands::oracle_check_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ghzq: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
