//! Command-line front end: distance sweeps, link simulations and fading
//! traces, all emitted as CSV.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use radiolink_core::fading::RicianParameters;

use crate::commands::{FadeRequest, SweepGrid};
use crate::config::{ModelName, ScenarioConfig};
use crate::error::CliError;
use crate::output::{commit, Destination};

#[derive(Debug, Parser)]
#[command(
    name = "radiolink",
    version,
    about = "Terrain-aware radio link simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Attenuation versus distance under one propagation model.
    Sweep(SweepArgs),
    /// Packet-level link simulation; writes a time series and a summary.
    Run(RunArgs),
    /// Normalized Rician fading power envelope.
    Fade(FadeArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario file (TOML, dotted keys).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, value_name = "NAME")]
    pub model: Option<ModelName>,
    /// Terrain profile CSV (`distance_m,elevation_m`).
    #[arg(long, value_name = "FILE")]
    pub profile: Option<PathBuf>,
    #[arg(long, value_name = "M")]
    pub tx_height: Option<f64>,
    #[arg(long, value_name = "M")]
    pub rx_height: Option<f64>,
    #[arg(long, value_name = "F")]
    pub freq_mhz: Option<f64>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Output file; `-` or omitted writes to stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    /// Loads the scenario file (if any) and applies flag overrides.
    pub fn scenario(&self) -> Result<ScenarioConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(m) = self.model {
            cfg.model = m;
        }
        if let Some(p) = &self.profile {
            cfg.profile = Some(p.clone());
        }
        if let Some(h) = self.tx_height {
            cfg.geometry.tx_height_m = h;
        }
        if let Some(h) = self.rx_height {
            cfg.geometry.rx_height_m = h;
        }
        if let Some(f) = self.freq_mhz {
            cfg.geometry.frequency_mhz = Some(f);
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_name = "M")]
    pub d_min: f64,
    #[arg(long, value_name = "M")]
    pub d_max: f64,
    #[arg(long, value_name = "N", default_value_t = 50)]
    pub n_points: usize,
    /// Logarithmic instead of linear spacing.
    #[arg(long)]
    pub log: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Summary CSV; defaults to `<out stem>_stats.csv` beside `--out`.
    #[arg(long, value_name = "FILE")]
    pub stats_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FadeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub k_factor: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_name = "M_PER_S")]
    pub max_velocity: Option<f64>,
    #[arg(long)]
    pub table_offset: Option<usize>,
    /// Sample spacing in seconds.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Number of samples.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Sweep(args) => {
            let cfg = args.common.scenario()?;
            let grid = SweepGrid {
                d_min_m: args.d_min,
                d_max_m: args.d_max,
                n_points: args.n_points,
                log_spacing: args.log,
            };
            let rows = commands::sweep(&cfg, &grid)?;
            let bytes = commands::write_sweep_csv(&rows)?;
            commit(vec![(
                Destination::from_arg(args.common.out.as_deref()),
                bytes,
            )])
        }
        Command::Run(args) => {
            let out = args
                .common
                .out
                .clone()
                .filter(|p| p.as_os_str() != "-")
                .ok_or_else(|| CliError::Usage("run requires --out FILE".into()))?;
            let stats_out = args.stats_out.clone().unwrap_or_else(|| {
                let stem = out
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "run".into());
                out.with_file_name(format!("{stem}_stats.csv"))
            });
            let cfg = args.common.scenario()?;
            let stats = commands::run(&cfg)?;
            let mut series = Vec::new();
            stats.write_records_csv(&mut series)?;
            let mut summary = Vec::new();
            stats.write_summary_csv(&mut summary)?;
            commit(vec![
                (Destination::File(out), series),
                (Destination::File(stats_out), summary),
            ])
        }
        Command::Fade(args) => {
            let cfg = args.common.scenario()?;
            let base = cfg.fading.params();
            let params = RicianParameters {
                k_factor: args.k_factor.unwrap_or(base.k_factor),
                sigma: args.sigma.unwrap_or(base.sigma),
                max_velocity_m_per_s: args.max_velocity.unwrap_or(base.max_velocity_m_per_s),
                table_offset: args.table_offset.unwrap_or(base.table_offset),
            };
            let trace = commands::fade(&FadeRequest {
                params,
                frequency_mhz: cfg.frequency_mhz(),
                dt_s: args.dt,
                n_samples: args.n,
                seed: cfg.seed,
            })?;
            let mut bytes = Vec::new();
            trace.write_csv(&mut bytes)?;
            commit(vec![(
                Destination::from_arg(args.common.out.as_deref()),
                bytes,
            )])
        }
    }
}
