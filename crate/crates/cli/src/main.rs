use std::process::ExitCode;

use clap::Parser;
use polariphase_cli::cli::{run, Cli};
use polariphase_cli::commands::ERROR_EXIT_CODE;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli, &mut std::io::stdout().lock()) {
        Ok(status) => ExitCode::from(status.code()),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(ERROR_EXIT_CODE)
        }
    }
}
