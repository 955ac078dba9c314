use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use tunnel_cli::experiments;
use tunnel_cli::ExperimentConfig;

/// Wave-packet tunneling experiments: arrival times, phase times and Nelson ensembles.
#[derive(Parser, Debug)]
#[command(name = "tunnel-arrival", version)]
struct Cli {
    /// TOML configuration; defaults are used for anything it leaves out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the Nelson ensembles (overrides `nelson.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// |ψ|² snapshots of free and barrier runs.
    Snapshots,
    /// Arrival-time distributions at the configured detectors.
    Analysis1,
    /// Mean arrival time against detector position, and transmitted momentum.
    Analysis2,
    /// Exit-time difference and its stationary-phase estimate against barrier width.
    Analysis3,
    /// Stochastic-mechanics ensembles compared with the grid solution.
    Nelson,
    /// Height × width sweep with one table per point.
    Sweep,
}

fn run(cli: Cli) -> anyhow::Result<Vec<PathBuf>> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.output_dir = out.to_string_lossy().into_owned();
    }
    if let Some(seed) = cli.seed {
        config.nelson.get_or_insert_with(Default::default).seed = seed;
    }
    config.validate()?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let out = PathBuf::from(&config.output_dir);
    let files = match cli.command {
        Command::Snapshots => experiments::run_snapshots(&config, &out)?.1,
        Command::Analysis1 => experiments::run_analysis1(&config, &out)?.1,
        Command::Analysis2 => experiments::run_analysis2(&config, &out)?.1,
        Command::Analysis3 => experiments::run_analysis3(&config, &out)?.1,
        Command::Nelson => experiments::run_nelson(&config, &out)?.1,
        Command::Sweep => experiments::run_sweep(&config, &out)?.1,
    };
    Ok(files)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
