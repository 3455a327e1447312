mod cli;
mod run;

use std::process::ExitCode;

use clap::Parser;

use crate::cli::Cli;
use crate::run::CliError;

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run::main(args) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::NotMorphism(witness) = &e {
                eprintln!("witness: {witness}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
