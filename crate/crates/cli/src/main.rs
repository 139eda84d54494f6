//! `rdp`: curves, spectra, codec simulation and frontier oracle runs.

mod commands;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] rdp_core::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            // Bad values that only the library can judge are still argument errors.
            CliError::Core(rdp_core::Error::InvalidArgument(_) | rdp_core::Error::ParseSource { .. }) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rdp", version, about = "Rate-distortion-perception tradeoff toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Optional `key=value` file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<String>,
    /// Worker threads (overridden by RDP_WORKERS).
    #[arg(long)]
    pub workers: Option<String>,
    /// Also write a matplotlib script next to the CSV.
    #[arg(long)]
    pub emit_plot_script: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// R(D, S) curves from both closed-form evaluators.
    Curves(commands::CurvesArgs),
    /// Exact finite-n information spectrum and its asymptotic step function.
    Spectrum(commands::SpectrumArgs),
    /// Build and evaluate two-stage codecs.
    Simulate(commands::SimulateArgs),
    /// Exhaustive (distortion, sigma) frontier at tiny block lengths.
    Oracle(commands::OracleArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Curves(args) => commands::curves(args),
        Command::Spectrum(args) => commands::spectrum(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Oracle(args) => commands::oracle(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
