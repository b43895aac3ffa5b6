use std::process::ExitCode;

use clap::Parser;
use ehsense_runner::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match ehsense_runner::init_threads().and_then(|()| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.machine_line());
            ExitCode::from(1)
        }
    }
}
