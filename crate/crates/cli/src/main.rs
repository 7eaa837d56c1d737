//! Command-line driver for the quantum-dot resonance and entanglement
//! toolkit.
//!
//! Usage: `qdot <command> [--config <file>] [key=value ...]`
//!
//! Commands: solve, scan, threshold, trajectory, oracle, convergence.
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

const USAGE: &str = "usage: qdot <solve|scan|threshold|trajectory|oracle|convergence> \
[--config <file>] [key=value ...]";

fn run() -> Result<(), CliError> {
    let mut args = std::env::args().skip(1);
    let command = args.next().ok_or_else(|| CliError::Config(USAGE.to_string()))?;

    let mut config_path: Option<PathBuf> = None;
    let mut overrides: Vec<(String, String)> = Vec::new();
    while let Some(arg) = args.next() {
        if arg == "--config" {
            let path = args
                .next()
                .ok_or_else(|| CliError::Config("--config needs a path".to_string()))?;
            config_path = Some(PathBuf::from(path));
        } else if let Some((key, value)) = arg.split_once('=') {
            overrides.push((key.trim().to_string(), value.trim().to_string()));
        } else {
            return Err(CliError::Config(format!("unexpected argument '{arg}'\n{USAGE}")));
        }
    }

    let cfg = RunConfig::load(config_path.as_deref(), &overrides).map_err(CliError::Config)?;
    match command.as_str() {
        "solve" => commands::cmd_solve(&cfg),
        "scan" => commands::cmd_scan(&cfg),
        "threshold" => commands::cmd_threshold(&cfg),
        "trajectory" => commands::cmd_trajectory(&cfg),
        "oracle" => commands::cmd_oracle(&cfg),
        "convergence" => commands::cmd_convergence(&cfg),
        other => Err(CliError::Config(format!("unknown command '{other}'\n{USAGE}"))),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
