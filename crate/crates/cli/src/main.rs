use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qvhs_cli::{enhance, eval, exit, sweep, synth, UsageError};

#[derive(Debug, Parser)]
#[command(name = "qvhs", version, about = "Peak-aware enhancement of density-of-states spectra")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset with planted peaks.
    Synth(synth::SynthArgs),
    /// Detect, fit and recalibrate every record.
    Enhance(enhance::EnhanceArgs),
    /// Score the pipeline against ground truth.
    Eval(eval::EvalArgs),
    /// Rank hyperparameter configurations on a dataset.
    Sweep(sweep::SweepArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();

    let result = match &cli.command {
        Command::Synth(a) => synth::run(a).map(|()| 0),
        Command::Enhance(a) => enhance::run(a),
        Command::Eval(a) => eval::run(a),
        Command::Sweep(a) => sweep::run(a),
    };
    match result {
        Ok(0) => ExitCode::from(exit::OK),
        Ok(skipped) => {
            eprintln!("warning: {skipped} record(s) skipped");
            ExitCode::from(exit::PARTIAL)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(exit::USAGE)
            } else {
                ExitCode::from(exit::FAILURE)
            }
        }
    }
}
