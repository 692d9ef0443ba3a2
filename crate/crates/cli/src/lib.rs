//! Command-line front end for the `dressed-lattice` simulator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{write_all, Provenance};

#[derive(Debug, Parser)]
#[command(
    name = "dressed-lattice",
    version,
    about = "rf-dressed state-dependent optical lattice simulator"
)]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Dotted-path override, e.g. rf.coupling_kHz=400. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0, global = true)]
    pub threads: usize,
    /// Seed for synthetic data.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Breit–Rabi levels and the F = 1 transition frequencies.
    Zeeman {
        #[arg(long = "field-mT")]
        field_mt: Option<f64>,
    },
    /// Adiabatic surfaces over one unit cell.
    Surfaces,
    /// Minimum avoided-crossing gap.
    Gap,
    /// Flat-potential oscillation frequency against coupling.
    RabiCal,
    /// Ground and low bands on the quasimomentum grid.
    Bands,
    /// Ground-band momentum distribution and its central width.
    Momentum,
    /// Central width against final rf frequency.
    WidthSweep,
    /// Nonadiabatic loss-rate estimates.
    Loss,
    /// Fit a decay or exponential law to CSV data.
    Fit {
        /// CSV input (overrides fit.input).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Regenerate the data tables of figure 2, 3 or 4.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(2..=4))]
        which: u8,
    },
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Zeeman { .. } => "zeeman".into(),
            Command::Surfaces => "surfaces".into(),
            Command::Gap => "gap".into(),
            Command::RabiCal => "rabi-cal".into(),
            Command::Bands => "bands".into(),
            Command::Momentum => "momentum".into(),
            Command::WidthSweep => "width-sweep".into(),
            Command::Loss => "loss".into(),
            Command::Fit { .. } => "fit".into(),
            Command::Figure { which } => format!("figure {which}"),
        }
    }
}

pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let doc = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => "{}".into(),
    };
    let mut cfg = RunConfig::from_str_with_overrides(&doc, &cli.overrides)?;
    if let Some(out) = &cli.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<Vec<output::Artifact>, CliError> {
    match &cli.command {
        Command::Zeeman { field_mt } => commands::zeeman(cfg, *field_mt),
        Command::Surfaces => commands::surfaces(cfg),
        Command::Gap => commands::gap(cfg),
        Command::RabiCal => commands::rabi_cal(cfg),
        Command::Bands => commands::bands(cfg),
        Command::Momentum => commands::momentum(cfg),
        Command::WidthSweep => commands::width_sweep(cfg),
        Command::Loss => commands::loss(cfg),
        Command::Fit { input } => commands::fit(cfg, input.as_deref()),
        Command::Figure { which } => figures::figure(cfg, *which, cli.seed),
    }
}

/// Run one subcommand; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = load_config(cli)?;
    if let Command::Zeeman { field_mt: Some(b) } = cli.command {
        cfg.physical.field_mT = b;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let artifacts = pool.install(|| dispatch(cli, &cfg))?;
    let prov = Provenance {
        command: cli.command.name(),
        seed: cli.seed,
        config_json: cfg.canonical_json(),
    };
    write_all(&PathBuf::from(&cfg.output.dir), &prov, &artifacts)
}
