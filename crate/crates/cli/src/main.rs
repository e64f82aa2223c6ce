mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::RunDir;

/// Vibrational ladder descent with chirped pulses: bound states, wave-packet
/// propagation and genetic pulse optimization.
#[derive(Parser)]
#[command(name = "vibladder", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; layered over --preset when both are given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario: old20, old24, mld20 or mld24.
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Bound levels, lifetimes and dipole matrix elements.
    Eigensolve {
        #[command(flatten)]
        common: Common,
    },
    /// Propagate the initial level under one pulse.
    Propagate {
        #[command(flatten)]
        common: Common,
        /// TOML file holding a pulse; replaces the [pulse] section.
        #[arg(long)]
        pulse: Option<PathBuf>,
    },
    /// Genetic search for the pulse that maximizes the target population.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Optimize the analytic Gaussian test function instead of the
        /// propagation problem.
        #[arg(long)]
        surrogate: bool,
    },
    /// Analytic and sampled spectrum of a pulse.
    PulseSpectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pulse: Option<PathBuf>,
        #[arg(long)]
        omega_min: Option<f64>,
        #[arg(long)]
        omega_max: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eigensolve { .. } => "eigensolve",
            Command::Propagate { .. } => "propagate",
            Command::Optimize { .. } => "optimize",
            Command::PulseSpectrum { .. } => "pulse-spectrum",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Eigensolve { common }
            | Command::Propagate { common, .. }
            | Command::Optimize { common, .. }
            | Command::PulseSpectrum { common, .. } => common,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let command = &cli.command;
    let common = command.common();
    if let Some(threads) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {threads} threads: {e}")))?;
    }
    let mut cfg = RunConfig::load(common.config.as_deref(), common.preset.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = Some(out.clone());
    }
    let out_path = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(command.name()));
    let out = RunDir::create(&out_path)?;
    out.write_provenance(command.name(), &cfg)?;

    match command {
        Command::Eigensolve { .. } => commands::eigensolve(&cfg, &out),
        Command::Propagate { pulse, .. } => commands::propagate(&cfg, pulse.as_deref(), &out),
        Command::Optimize { surrogate, .. } => commands::optimize_command(&cfg, *surrogate, &out),
        Command::PulseSpectrum {
            pulse,
            omega_min,
            omega_max,
            ..
        } => commands::pulse_spectrum(&cfg, pulse.as_deref(), *omega_min, *omega_max, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
