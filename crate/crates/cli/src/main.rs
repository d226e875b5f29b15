use std::process::ExitCode;

use clap::Parser;
use latticeweave_cli::{configure_workers, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers().and_then(|_| run(&cli));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
