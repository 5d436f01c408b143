use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

#[derive(Parser)]
#[command(name = "fenopt", version, about = "Fenestration design optimization campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an optimization campaign from a JSON config.
    Run(commands::run::RunArgs),
    /// Compare two campaigns (or two directories of campaigns) run for run.
    Compare(commands::compare::CompareArgs),
    /// Print a solution file as a building and window report.
    Inspect {
        solution: PathBuf,
    },
    /// List the legal glazing compositions of a catalog.
    Catalog(commands::catalog::CatalogArgs),
    /// Run a campaign on a shifted benchmark function.
    Bench(commands::bench::BenchArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(error::EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(a) => commands::run::run(a),
        Command::Compare(a) => commands::compare::compare(a),
        Command::Inspect { solution } => commands::inspect::inspect(&solution),
        Command::Catalog(a) => commands::catalog::catalog(a),
        Command::Bench(a) => commands::bench::bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error::exit_code(&e))
        }
    }
}
