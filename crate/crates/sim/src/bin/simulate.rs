use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use qdcnot::commands::{provenance, run, Command};
use qdcnot::config::{Mode, RunConfig};
use qdcnot::output::write_all;

/// Simulate a post-selected linear-optical CNOT gate driven by a
/// quantum-dot single-photon source.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

fn main_inner(cli: Cli) -> Result<Vec<PathBuf>> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(mode) = cli.mode {
        cfg.experiment.mode = mode;
    }
    let dir = cli
        .out
        .unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    cfg.validate()?;
    let artifacts = run(&cfg, cli.command)?;
    write_all(&dir, &provenance(&cfg, cli.command), &artifacts)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
