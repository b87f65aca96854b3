//! `lieb-towers` command-line front end.

mod args;
mod commands;
mod failure;
mod table;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::failure::Failure;

/// Result of a command: a JSON report, a human-readable table and whether
/// every check passed.
pub struct Output {
    pub json: String,
    pub table: String,
    pub pass: bool,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("LIEB_TOWERS_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        Failure::Parse(format!(
            "LIEB_TOWERS_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Other(e.to_string()))
}

fn run(cli: Cli) -> Result<Output, Failure> {
    configure_threads()?;
    let cfg = cli.config()?;
    match &cli.command {
        Command::Spectrum => commands::spectrum::run(&cfg),
        Command::Verify { which } => commands::verify::run(&cfg, *which),
        Command::Suite => commands::suite::run(&cfg),
        Command::Path { from, to } => commands::path::run(&cfg, from.as_deref(), to.as_deref()),
        Command::Pph => commands::pph::run(&cfg),
    }
}

fn emit(cli_output: Option<&std::path::Path>, out: &Output) -> Result<(), Failure> {
    match cli_output {
        Some(path) => {
            std::fs::write(path, &out.json)
                .map_err(|e| Failure::Other(format!("writing {}: {e}", path.display())))?;
            print!("{}", out.table);
        }
        None => {
            print!("{}", out.json);
            eprint!("{}", out.table);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output_path = cli.output.clone();
    let result = run(cli).and_then(|out| {
        emit(output_path.as_deref(), &out)?;
        Ok(out.pass)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
