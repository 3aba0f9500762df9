use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod element;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("acceptance checks failed: {}", .0.join("; "))]
    Check(Vec<String>),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Check(_) => 4,
        }
    }
}

/// Phase-shaped reset control: filter design, describing-function sweeps
/// and hybrid simulation.
///
/// Frequencies in the config are in Hz and angles in degrees; they are
/// converted to rad/s and radians internally.
///
/// Exit codes: 0 ok, 2 config error, 3 runtime error or instability,
/// 4 acceptance check failed.
#[derive(Debug, Parser)]
#[command(name = "resetshape", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
pub struct CliArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Enforce the command's acceptance checks (exit 4 on failure).
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the shaping filter and write the design document and phase plot.
    Design(CliArgs),
    /// Analytic higher-order describing functions over a log grid.
    Hosidf(CliArgs),
    /// Open-loop simulation of a reset element against its analytic harmonics.
    Simulate(CliArgs),
    /// Closed-loop tracking suite of the stage controllers.
    Track(CliArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Design(a) => commands::design(a),
        Command::Hosidf(a) => commands::hosidf(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Track(a) => commands::track(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
