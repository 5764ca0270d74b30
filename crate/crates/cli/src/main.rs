mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::resolve;
use error::CliError;

fn run(cli: Cli) -> Result<output::OutDir, CliError> {
    let cfg = cli.config.as_deref();
    let out = cli.out.as_deref();
    if !matches!(cli.command, Command::Simulate(_)) {
        // only `simulate` runs trials in parallel
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build_global()
            .map_err(|e| CliError::Runtime(e.into()))?;
    }
    match &cli.command {
        Command::Construct(a) => commands::construct(&resolve(a, cfg)?, out),
        Command::De(a) => commands::de(&resolve(a, cfg)?, out),
        Command::Threshold(a) => commands::threshold(&resolve(a, cfg)?, out),
        Command::Potential(a) => commands::potential(&resolve(a, cfg)?, out),
        Command::OptimizeTau(a) => commands::optimize_tau(&resolve(a, cfg)?, out),
        Command::Simulate(a) => commands::simulate(&resolve(a, cfg)?, out),
        Command::Verify(a) => commands::verify(&resolve(a, cfg)?, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors and 0 for --help/--version
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(dir) => {
            println!("results in {}", dir.path().display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
