use std::process::ExitCode;

use clap::Parser;
use solvable_plane_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                eprintln!("ERROR UsageError: {}", e.to_string().lines().next().unwrap_or_default());
                return ExitCode::from(2);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match execute(cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ERROR {}: {}", e.code(), e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
