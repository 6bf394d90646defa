mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use commands::{Cli, Failure};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("ALAM_THREADS") {
        let parsed = n.trim().parse::<usize>().ok().filter(|&k| k > 0);
        let Some(k) = parsed else {
            eprintln!("error[Input]: ALAM_THREADS must be a positive integer, got {n:?}");
            return ExitCode::from(2);
        };
        if let Err(e) = alam::par::init_threads(k) {
            eprintln!("error[{}]: {e}", e.name());
            return ExitCode::from(2);
        }
    }
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error[{}]: {e}", e.name());
            ExitCode::from(2)
        }
    }
}
