use std::process::ExitCode;

use clap::Parser;
use kida_cli::{exit_code, run, Cli, RunConfig};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let name = cli.command.name();
    let config = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error in {name}: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    match run(&config).and_then(|out| out.emit(config.output.as_deref())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error in {name}: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
