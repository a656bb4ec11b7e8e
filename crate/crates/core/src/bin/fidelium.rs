use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use fidelium::cli::{run, CliError, RunConfig};

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(config) => config,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&config) {
        Ok(json) => {
            let _ = writeln!(std::io::stdout().lock(), "{json}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            if let CliError::Usage(message) = &err {
                eprintln!("error: {message}");
            } else {
                let _ = writeln!(std::io::stdout().lock(), "{}", err.to_json());
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
