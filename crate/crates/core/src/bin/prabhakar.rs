use std::io;
use std::process::ExitCode;

use clap::Parser;
use prabhakar::cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli, &mut io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("prabhakar: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
