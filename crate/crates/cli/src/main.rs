use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use qtomo::config::OutputFormat;

mod commands;
mod options;
mod verify;

use options::RunArgs;

/// Optical tomograms and moment retrieval for q-deformed states.
#[derive(Debug, Parser)]
#[command(name = "qtomo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump the Fock amplitudes of a state: n, Re c_n, Im c_n, |c_n|².
    State(RunArgs),
    /// Sample the tomogram on a (theta, x) grid.
    Tomogram(RunArgs),
    /// Extract normally ordered moments up to --gamma-max from a tomogram.
    Moments {
        #[command(flatten)]
        run: RunArgs,
        /// Grid file (CSV or JSON) to read instead of building the state.
        #[arg(long, value_name = "FILE")]
        input: Option<String>,
    },
    /// Run the self-check suites. Exits 1 if any check fails.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, hide = true)]
        sabotage_qint: bool,
    },
}

fn verify(run: &RunArgs, sabotage: bool) -> Result<bool> {
    let (cfg, _) = run.resolve()?;
    let report = verify::run(cfg.clone(), sabotage)?;
    match &cfg.output.path {
        Some(path) => {
            std::fs::write(path, report.json()).with_context(|| format!("writing {path}"))?;
            print!("{}", report.human());
        }
        None if cfg.output.format == OutputFormat::Json => print!("{}", report.json()),
        None => print!("{}", report.human()),
    }
    Ok(report.all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::State(run) => commands::state(run).map(|_| true),
        Command::Tomogram(run) => commands::tomogram(run).map(|_| true),
        Command::Moments { run, input } => commands::moments(run, input.as_deref()).map(|_| true),
        Command::Verify { run, sabotage_qint } => verify(run, *sabotage_qint),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
