mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn threads(command: &Command) -> usize {
    match command {
        Command::Spectrum(a) | Command::Displacement(a) => a.common.threads,
        Command::Wigner(a) => a.common.threads,
        Command::Fidelity(a) => a.common.threads,
        Command::Entropy(a) => a.common.threads,
        Command::Validate(a) => a.common.threads,
        Command::Calibrate(a) => a.common.threads,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let n = threads(&cli.command);
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        eprintln!("warning: thread pool: {e}");
    }
    let result = match cli.command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Wigner(a) => commands::wigner_map(a),
        Command::Fidelity(a) => commands::fidelity_scan(a),
        Command::Entropy(a) => commands::entropy_scan(a),
        Command::Displacement(a) => commands::displacement(a),
        Command::Validate(a) => commands::validate(a),
        Command::Calibrate(a) => commands::calibrate_coupling(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hhgq: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
