//! Command-line front end: `single` and `sweep`.
//!
//! `sweep` writes a CSV plus a TOML manifest next to it
//! (`<out>.manifest.toml`). The manifest holds the full config snapshot and
//! the grid, so `sweep --manifest <file>` reproduces the CSV byte for byte.

use crate::cic::Scheme;
use crate::config::{config_from_table, parse_config, ConfigError, ScenarioConfig};
use crate::montecarlo::{
    linear_grid, run_trials_with, sweep, Execution, RunSummary, SimError, SweepVariable,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("simulation error: {0}")]
    Sim(#[from] SimError),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("output error: cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) | CliError::Manifest(_) => 3,
            CliError::Sim(_) => 4,
            CliError::Output { .. } => 5,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "uavcic",
    version,
    about = "UE1 uplink rates under UAV interference with cooperative cancellation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and print per-scheme rates.
    Single(SingleArgs),
    /// Sweep one parameter and write a CSV with a manifest.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML config file; missing keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Run trials on the calling thread only.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args, Clone, Default)]
pub struct SingleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Clone, Default)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// ru, pu_dbm, distance_m or bits.
    #[arg(long = "var")]
    pub var: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub list: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Replay the config and grid of an earlier sweep.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

impl CommonArgs {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn load(&self, base: Option<ScenarioConfig>) -> Result<ScenarioConfig, CliError> {
        let mut cfg = match (base, &self.config) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(
                    "--config and --manifest are mutually exclusive".into(),
                ))
            }
            (Some(cfg), None) => cfg,
            (None, Some(path)) => parse_config(path)?,
            (None, None) => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(n) = self.trials {
            cfg.n_trials = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSpec {
    pub variable: String,
    pub grid: Vec<f64>,
}

/// Sidecar describing how a CSV was produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub timestamp: String,
    pub seed: u64,
    pub output: String,
    pub sweep: SweepSpec,
    pub config: ScenarioConfig,
}

impl RunManifest {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".manifest.toml");
    PathBuf::from(name)
}

/// Config and sweep grid recorded in a manifest.
pub fn read_manifest(path: &Path) -> Result<(ScenarioConfig, SweepVariable, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Manifest(format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Manifest(e.message().to_string()))?;
    let config = table
        .get("config")
        .and_then(|v| v.as_table())
        .ok_or_else(|| CliError::Manifest("missing [config] table".into()))?;
    let sweep = table
        .get("sweep")
        .and_then(|v| v.as_table())
        .ok_or_else(|| CliError::Manifest("missing [sweep] table".into()))?;
    let variable = sweep
        .get("variable")
        .and_then(|v| v.as_str())
        .ok_or_else(|| CliError::Manifest("missing sweep.variable".into()))?
        .parse()?;
    let grid = sweep
        .get("grid")
        .and_then(|v| v.as_array())
        .ok_or_else(|| CliError::Manifest("missing sweep.grid".into()))?
        .iter()
        .map(|v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)))
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| CliError::Manifest("sweep.grid must hold numbers".into()))?;
    Ok((config_from_table(config)?, variable, grid))
}

/// Paths written by a sweep.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub rows: usize,
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<SweepOutput, CliError> {
    let (cfg, variable, grid) = match &args.manifest {
        Some(path) => {
            if args.var.is_some() || args.list.is_some() || args.from.is_some() {
                return Err(CliError::Usage(
                    "--manifest fixes the variable and grid".into(),
                ));
            }
            let (cfg, variable, grid) = read_manifest(path)?;
            (args.common.load(Some(cfg))?, variable, grid)
        }
        None => {
            let var = args
                .var
                .as_deref()
                .ok_or_else(|| CliError::Usage("--var is required".into()))?;
            let variable: SweepVariable = var
                .parse()
                .map_err(|e: SimError| CliError::Usage(e.to_string()))?;
            let grid = match (&args.list, args.from, args.to, args.steps) {
                (Some(list), None, None, None) => list.clone(),
                (None, Some(from), Some(to), Some(steps)) => linear_grid(from, to, steps)?,
                _ => {
                    return Err(CliError::Usage(
                        "give either --list or all of --from/--to/--steps".into(),
                    ))
                }
            };
            (args.common.load(None)?, variable, grid)
        }
    };

    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("sweep_{variable}.csv")));
    let result = sweep(&cfg, variable, &grid, args.common.execution())?;
    let csv = result.to_csv();
    write(&out, &csv)?;

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
        seed: cfg.seed,
        output: out.display().to_string(),
        sweep: SweepSpec {
            variable: variable.name().to_string(),
            grid,
        },
        config: cfg,
    };
    let manifest_file = manifest_path(&out);
    write(&manifest_file, &manifest.to_toml())?;
    Ok(SweepOutput {
        csv: out,
        manifest: manifest_file,
        rows: result.rows.len(),
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Output {
        path: path.display().to_string(),
        source,
    })
}

pub fn cmd_single(args: &SingleArgs) -> Result<(ScenarioConfig, RunSummary), CliError> {
    let cfg = args.common.load(None)?;
    let summary = run_trials_with(&cfg, args.common.execution())?;
    Ok((cfg, summary))
}

pub fn format_report(cfg: &ScenarioConfig, s: &RunSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "trials {}  seed {}  pu {} dBm  ru {} bps/Hz  distance {} m  helpers {}",
        cfg.n_trials,
        cfg.seed,
        cfg.pu_dbm,
        cfg.ru_bps_hz,
        cfg.uav_bs1_horizontal_distance_m,
        cfg.helper_count()
    );
    let _ = writeln!(
        out,
        "{:<18} {:>12} {:>12}",
        "scheme", "rate bps/Hz", "stderr"
    );
    for scheme in Scheme::ALL {
        let e = s.rate(scheme);
        let _ = writeln!(
            out,
            "{:<18} {:>12.6} {:>12.6}",
            scheme.name(),
            e.mean,
            e.stderr
        );
    }
    let e = &s.interference_free;
    let _ = writeln!(
        out,
        "{:<18} {:>12.6} {:>12.6}",
        "interference-free", e.mean, e.stderr
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "UAV decoded: df {:.4}  qf1 {:.4}  direct SIC at BS1 {:.4}",
        s.df_decode_fraction, s.qf1_decode_fraction, s.direct_sic_fraction
    );
    let d = &s.dominance;
    let _ = writeln!(
        out,
        "qf1 > df {:.4}   df > qf1 {:.4}",
        d.qf1_over_df, d.df_over_qf1
    );
    let _ = writeln!(
        out,
        "qf2 > df {:.4}   df > qf2 {:.4}",
        d.qf2_over_df, d.df_over_qf2
    );
    let _ = writeln!(
        out,
        "qf2 > qf1 {:.4}  qf1 > qf2 {:.4}",
        d.qf2_over_qf1, d.qf1_over_qf2
    );
    out
}

pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Single(args) => {
            let (cfg, summary) = cmd_single(&args)?;
            Ok(format_report(&cfg, &summary))
        }
        Command::Sweep(args) => {
            let out = cmd_sweep(&args)?;
            Ok(format!(
                "wrote {} rows to {} (manifest {})\n",
                out.rows,
                out.csv.display(),
                out.manifest.display()
            ))
        }
    }
}
