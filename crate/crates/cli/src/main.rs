use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = rmopick::Cli::parse();
    match rmopick::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
