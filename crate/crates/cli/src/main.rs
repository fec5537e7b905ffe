use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use irs_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(&cli.command, &mut out) {
        Ok(()) => {
            let _ = out.flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = out.flush();
            eprintln!("irs-sim: error: {e}");
            ExitCode::FAILURE
        }
    }
}
