use anyhow::{Context, Result};
use clap::Parser;
use quadgreen_cli::config::{parse_config, Experiment};
use quadgreen_cli::experiments;
use std::path::PathBuf;
use std::process::ExitCode;

/// Verification experiments for discrete Laplacians on quad-graphs:
/// weights, wave-function identities, quasimomentum contours, Green's
/// functions and theta sums.
#[derive(Parser)]
#[command(name = "quadgreen", version, about)]
struct Cli {
    /// Configuration document (key = value with [sections]).
    #[arg(long)]
    config: PathBuf,

    /// Override the experiment named in the config.
    #[arg(long)]
    experiment: Option<String>,

    /// Override the random seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the output directory (also: QUADGREEN_OUT).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the contour grid resolution (cells per chart side).
    #[arg(long)]
    resolution: Option<usize>,

    /// Override the asserted tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    let text = std::fs::read_to_string(&cli.config)
        .with_context(|| format!("reading config {}", cli.config.display()))?;
    let mut config = parse_config(&text)?;
    if let Some(name) = &cli.experiment {
        config.experiment = Experiment::parse(name)
            .with_context(|| format!("unknown experiment '{name}'"))?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out_dir = Some(out.display().to_string());
    }
    if let Some(resolution) = cli.resolution {
        config.resolution = resolution;
    }
    if let Some(tolerance) = cli.tolerance {
        config.tolerance = tolerance;
    }

    let outcome = experiments::run(&config)?;
    println!("{}", outcome.headline);
    println!(
        "{}: artifacts in {}",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.out_dir.display()
    );
    Ok(outcome.passed)
}
