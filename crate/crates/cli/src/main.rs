use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod input;
mod output;

use commands::{ci, estimate, generate, rate, simulate};

/// Estimation and inference for competing risks current status data.
#[derive(Debug, Parser)]
#[command(name = "csrisk", version)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit estimators to an observation file.
    Estimate(estimate::EstimateArgs),
    /// Pointwise confidence intervals.
    Ci(ci::CiArgs),
    /// Coverage experiment from a simulation config.
    Simulate(simulate::SimulateArgs),
    /// Draw one simulated dataset.
    Generate(generate::GenerateArgs),
    /// Variance scaling of the naive estimator on shrinking grids.
    Rate(rate::RateArgs),
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input or usage; exit code 2.
    Input(String),
    /// Solver did not converge; exit code 3.
    NonConvergence(String),
    /// Anything else, e.g. I/O; exit code 1.
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::NonConvergence(m) | CliError::Runtime(m) => m,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Input("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    match &cli.command {
        Command::Estimate(a) => estimate::run(a),
        Command::Ci(a) => ci::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Generate(a) => generate::run(a),
        Command::Rate(a) => rate::run(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
