use std::process::ExitCode;

use anderson_cli::cli::{Cli, Invocation};
use anderson_cli::commands::replay::replay;
use anderson_cli::{execute, CliError};
use clap::Parser;

fn run() -> Result<(), CliError> {
    match Cli::parse().command.resolve()? {
        Invocation::Run(command, cfg) => {
            let manifest = execute(command, &cfg)?;
            println!(
                "{command}: wrote {} files to {} in {:.2} s",
                manifest.outputs.len() + 1,
                cfg.output_dir.display(),
                manifest.wall_clock_seconds
            );
            if !manifest.failures.is_empty() {
                println!("{} point(s) failed; see manifest.json", manifest.failures.len());
            }
        }
        Invocation::Replay { manifest, out, threads } => {
            let report = replay(&manifest, out, threads)?;
            println!(
                "replay {}: {} files identical in {}",
                report.command,
                report.identical.len(),
                report.output_dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
