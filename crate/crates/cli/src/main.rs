//! `triad`: simulate the leader-driven opinion triad, sample its bifurcation
//! boundaries and map its regimes.

mod args;
mod commands;
mod config;
mod error;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::FileConfig;
use error::CliResult;

fn run(cli: &Cli) -> CliResult<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let out_dir = config::out_dir(cli.out_dir.as_deref(), &file);
    match &cli.command {
        Command::Simulate(a) => commands::simulate::run(a, &file, &out_dir),
        Command::Boundaries(a) => commands::boundaries::run(a, &file, &out_dir),
        Command::Diagram(a) => commands::diagram::run(a, &file, &out_dir),
        Command::Kappa4(a) => commands::kappa4::run(a, &file, &out_dir),
        Command::Classify(a) => commands::classify::run(a, &file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
