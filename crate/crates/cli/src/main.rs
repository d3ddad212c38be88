mod args;
#[cfg(feature = "chart")]
mod chart;
mod commands;
mod error;
mod manifest;
mod settings;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;
use crate::manifest::{manifest_path, RunManifest};
use crate::settings::Settings;

fn run(command: &Command) -> Result<(), CliError> {
    let settings = Settings::resolve(command)?;
    let started_at = chrono::Utc::now().to_rfc3339();
    let outputs = commands::dispatch(command, &settings)?;
    let Some(first) = outputs.first() else {
        return Ok(());
    };
    let manifest_file = manifest_path(Path::new(&first.path));
    let manifest = RunManifest {
        command: settings.command,
        config: &settings,
        seed: settings.seed,
        workers: settings.effective_workers().unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }),
        engine_version: env!("CARGO_PKG_VERSION"),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        outputs,
    };
    manifest.write(&manifest_file)?;
    for o in &manifest.outputs {
        eprintln!("wrote {} (sha256 {})", o.path, o.sha256);
    }
    eprintln!("wrote {}", manifest_file.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
