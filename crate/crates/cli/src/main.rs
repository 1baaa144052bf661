use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod manifest;

use commands::{EmpiricalArgs, FitArgs, McArgs, SimulateArgs};

/// Simulation, quantile autoregression fits and limit-law experiments.
#[derive(Debug, Parser)]
#[command(name = "qarlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one path and write it as a `t,y` CSV.
    Simulate(SimulateArgs),
    /// Fit quantile or least-squares autoregressions to a CSV column.
    Fit(FitArgs),
    /// Run a Monte Carlo experiment.
    Mc(McArgs),
    /// Price-series report: linear and quantile fits side by side.
    Empirical(EmpiricalArgs),
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Input(String),
    Numeric(String),
    Experiment(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Input(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Experiment(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m)
            | CliError::Input(m)
            | CliError::Numeric(m)
            | CliError::Experiment(m) => m,
        }
    }
}

impl From<qarlab::Error> for CliError {
    fn from(e: qarlab::Error) -> Self {
        use qarlab::Error::*;
        let msg = e.to_string();
        match e {
            InvalidConfig(_) | InvalidTau(_) | ExplosiveOverflow { .. } | RegimeMismatch(_) => {
                CliError::Validation(msg)
            }
            Ingest(_) => CliError::Input(msg),
            ExperimentFailure { .. } => CliError::Experiment(msg),
            _ => CliError::Numeric(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Fit(a) => commands::fit(a),
        Command::Mc(a) => commands::mc(a),
        Command::Empirical(a) => commands::empirical(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
