use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use pinwheel_cli::{exit_code, run, Cli, EXIT_RUNTIME};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(EXIT_RUNTIME as u8);
        }
    }
    match run(&cli) {
        Ok(outcome) => {
            let _ = std::io::stdout().write_all(outcome.report.as_bytes());
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_RUNTIME as u8)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
