use std::process::ExitCode;

use adiabatic_qjump::cli::{parse_config, run, CliArgs};
use clap::Parser;

fn main() -> ExitCode {
    let args = CliArgs::parse();
    let manifest = match parse_config(&args) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&manifest) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for f in &outcome.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
