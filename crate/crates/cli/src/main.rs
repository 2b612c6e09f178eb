//! `qgradcam` command-line driver.
//!
//! Exit status: 0 on success, 1 when a verification (gradient check,
//! training divergence) fails, 2 for usage and configuration errors.

mod datasets;
mod demo;
mod error;
mod explain;
mod gradcheck;
mod train;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "qgradcam", version, about = "Hybrid CNN + variational quantum classifier with Grad-CAM heatmaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and write a checkpoint plus a JSON-lines metrics log.
    Train(train::TrainArgs),
    /// Write the class heatmap and overlay for one input.
    Explain(explain::ExplainArgs),
    /// Compare analytic, shift-rule and finite-difference input gradients.
    Gradcheck(gradcheck::GradcheckArgs),
    /// Generate a synthetic dataset as IDX files.
    DemoData(demo::DemoArgs),
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("QGCAM_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("QGCAM_THREADS must be a positive integer, got {value:?}")))?;
    qgradcam::parallel::set_global_threads(threads).map_err(CliError::from)
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Train(a) => train::run(a),
        Command::Explain(a) => explain::run(a),
        Command::Gradcheck(a) => gradcheck::run(a),
        Command::DemoData(a) => demo::run(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
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
