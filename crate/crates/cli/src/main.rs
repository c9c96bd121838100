use std::process::ExitCode;

use clap::Parser;

use classicml_cli::args::Cli;
use classicml_cli::commands::run;
use classicml_cli::error::EXIT_CONFIG;

fn threads_from_env() -> Result<(), String> {
    match std::env::var("CLASSICML_THREADS") {
        Err(_) => Ok(()),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                classicml::parallel::set_threads(n);
                Ok(())
            }
            _ => Err(format!("CLASSICML_THREADS must be a positive integer, got '{v}'")),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = threads_from_env() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr();
    match run(&cli, &mut stdout, &mut stderr) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
