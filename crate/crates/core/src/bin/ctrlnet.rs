use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ctrlnet::experiments::{Experiment, ExperimentConfig};

/// Reproduce the residual-network control experiments and write CSV, SVG and a manifest.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// TOML configuration; built-in defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides `seed` in the configuration).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output root (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for grid sweeps and Monte-Carlo repeats.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Dotted configuration override, e.g. `--set micro.surrogate.nodes=30`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Static-control decay curves for the three weight profiles.
    Decay,
    /// True loss, kernel surrogate and relative error on the particle grid.
    MicroSurface,
    /// Projected gradient descent on the particle surrogate.
    MicroDescent,
    /// Mean-field loss surface and its surrogate.
    MfSurface,
    /// Projected gradient descent on the mean-field surrogate.
    MfDescent,
    /// HUM bias for a linear system.
    Hum,
    /// Extended flow with per-particle static feedback.
    StaticControl,
    /// Particle push-forward against the finite-volume solution.
    Consistency,
    /// Print the effective configuration as TOML.
    ShowConfig,
}

fn experiment(c: Command) -> Option<Experiment> {
    Some(match c {
        Command::Decay => Experiment::Decay,
        Command::MicroSurface => Experiment::MicroSurface,
        Command::MicroDescent => Experiment::MicroDescent,
        Command::MfSurface => Experiment::MfSurface,
        Command::MfDescent => Experiment::MfDescent,
        Command::Hum => Experiment::Hum,
        Command::StaticControl => Experiment::StaticControl,
        Command::Consistency => Experiment::Consistency,
        Command::ShowConfig => return None,
    })
}

fn run(cli: Cli) -> ctrlnet::Result<()> {
    let mut cfg = ExperimentConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ctrlnet::Error::Config(e.to_string()))?;
    }
    let Some(exp) = experiment(cli.command) else {
        print!("{}", cfg.to_toml()?);
        return Ok(());
    };
    let manifest = exp.run(&cfg)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&manifest.metrics)
            .map_err(|e| ctrlnet::Error::Parse(e.to_string()))?
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
