//! Command-line entry point.
//!
//! Exit codes: 0 on success, 2 on usage or validation errors (bad flags,
//! bad config, parameters out of range), 1 when a computation fails.

mod commands;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand};
use newton_atlas_core::functions::{Family, ParamValue, Params};
use newton_atlas_core::{IterationConfig, C64};

use crate::config::{self, FileConfig};
use output::{manifest_path, write_json, RunManifest};

pub const WORKERS_ENV: &str = "NEWTON_ATLAS_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "newton-atlas",
    version,
    about = "Newton maps of entire functions"
)]
pub struct Cli {
    /// TOML scene file; flags override its keys.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Basin image of a Newton map (PPM).
    Render(RenderArgs),
    /// One orbit, step by step (CSV).
    Orbit(OrbitArgs),
    /// Type of the Baker domain shared by escaping orbits (JSON).
    ClassifyType(ClassifyTypeArgs),
    /// Rotation numbers of the sine family (CSV).
    Rotation(RotationArgs),
    /// Residuals of the projection onto the quotient map (JSON).
    Semiconj(SemiconjArgs),
    /// Logarithmic chart on a tract and its η₀ certificate (JSON).
    Chart(ChartArgs),
    /// f(z1)/f(z0) recovered from the Newton map (JSON).
    Reconstruct(ReconstructArgs),
    /// |f| along a ray or an orbit (CSV).
    Probe(ProbeArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct MapArgs {
    /// Catalog family: f_alpha, n_alpha, g_alpha, h_alpha, sine, expexp, poly_exp (alias poly).
    #[arg(long)]
    pub family: Option<Family>,
    /// Family parameter, repeatable: `--param alpha=0.5`, `--param "p=z^3-1"`.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, ParamValue)>,
    /// Entire function of z, instead of a family.
    #[arg(long, conflicts_with = "family")]
    pub formula: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct IterArgs {
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol_root: Option<f64>,
    #[arg(long)]
    pub escape_radius: Option<f64>,
    #[arg(long)]
    pub f_zero_tol: Option<f64>,
    #[arg(long)]
    pub cycle_window: Option<usize>,
    /// log|f| below which a non-contracting orbit counts as having left the tract.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "no_tract_floor")]
    pub tract_floor: Option<f64>,
    #[arg(long)]
    pub no_tract_floor: bool,
}

impl IterArgs {
    pub fn apply(&self, mut cfg: IterationConfig) -> IterationConfig {
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.tol_root {
            cfg.tol_root = v;
        }
        if let Some(v) = self.escape_radius {
            cfg.escape_radius = v;
        }
        if let Some(v) = self.f_zero_tol {
            cfg.f_zero_tol = v;
        }
        if let Some(v) = self.cycle_window {
            cfg.cycle_detection_window = v;
        }
        if let Some(v) = self.tract_floor {
            cfg.tract_log_floor = Some(v);
        }
        if self.no_tract_floor {
            cfg.tract_log_floor = None;
        }
        cfg
    }
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub iter: IterArgs,
    /// Centre of the view, e.g. `0`, `0.25-3i`.
    #[arg(long, value_parser = config::parse_complex, allow_hyphen_values = true)]
    pub center: Option<C64>,
    /// Width of the view in the plane.
    #[arg(long)]
    pub width: Option<f64>,
    /// Image size: `N` for N×N or `WxH`.
    #[arg(long, value_parser = parse_px)]
    pub px: Option<(u32, u32)>,
    #[arg(long)]
    pub palette_seed: Option<u64>,
    /// Worker threads; falls back to NEWTON_ATLAS_WORKERS, then to all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub iter: IterArgs,
    #[arg(long, value_parser = config::parse_complex, allow_hyphen_values = true)]
    pub z0: C64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyTypeArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub iter: IterArgs,
    /// Orbit seed, repeatable (at least two).
    #[arg(long = "z0", required = true, value_parser = config::parse_complex, allow_hyphen_values = true)]
    pub z0: Vec<C64>,
    /// Steps per orbit unless --max-iter is given.
    #[arg(long, default_value_t = 400)]
    pub steps: usize,
    /// Ray in `t` on which to seed a logarithmic chart.
    #[arg(long, allow_hyphen_values = true)]
    pub ray: Option<String>,
    #[arg(long, default_value_t = 1e-2)]
    pub r_target: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RotationArgs {
    #[arg(long)]
    pub epsilon: f64,
    /// Value of α, repeatable.
    #[arg(long)]
    pub alpha: Vec<f64>,
    /// Evenly spaced α values `LO:HI:COUNT`.
    #[arg(long, value_parser = parse_grid)]
    pub alpha_grid: Option<(f64, f64, usize)>,
    /// Solve for the α whose rotation number is this value.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SemiconjArgs {
    /// n_alpha or expexp.
    #[arg(long, default_value = "n_alpha")]
    pub family: Family,
    /// Value of α, repeatable.
    #[arg(long, required = true)]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Seed of the sample generator.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = -0.2, allow_negative_numbers = true)]
    pub im_min: f64,
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    pub im_max: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ChartArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Ray in `t` along which f tends to 0, e.g. `0.25-1i*t`.
    #[arg(long, allow_hyphen_values = true)]
    pub ray: String,
    #[arg(long, default_value_t = 1e-2)]
    pub r_target: f64,
    #[arg(long, default_value_t = 50.0)]
    pub eta_max: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eta_step: f64,
    #[arg(long, default_value_t = 41)]
    pub grid_n: usize,
    #[arg(long, default_value_t = 20.0)]
    pub re_span: f64,
    #[arg(long, default_value_t = 20.0)]
    pub im_half: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, value_parser = config::parse_complex, allow_hyphen_values = true)]
    pub z0: C64,
    #[arg(long, value_parser = config::parse_complex, allow_hyphen_values = true)]
    pub z1: C64,
    #[arg(long, default_value_t = 1)]
    pub segments: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Ray in `t`.
    #[arg(
        long,
        allow_hyphen_values = true,
        conflicts_with = "z0",
        required_unless_present = "z0"
    )]
    pub ray: Option<String>,
    #[arg(long, default_value_t = 20.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 400)]
    pub samples: usize,
    /// Orbit seed.
    #[arg(long, value_parser = config::parse_complex, allow_hyphen_values = true)]
    pub z0: Option<C64>,
    #[arg(long, default_value_t = 1000)]
    pub n_max: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_param(s: &str) -> Result<(String, ParamValue), String> {
    Params::parse_assignment(s).map_err(|e| e.to_string())
}

fn parse_px(s: &str) -> Result<(u32, u32), String> {
    let dim = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| format!("bad pixel count `{t}`"))
    };
    match s.split_once(['x', 'X']) {
        Some((w, h)) => Ok((dim(w)?, dim(h)?)),
        None => dim(s).map(|n| (n, n)),
    }
}

fn parse_grid(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, k] = parts[..] else {
        return Err(format!("expected LO:HI:COUNT, got `{s}`"));
    };
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("bad number `{t}`"));
    let k: usize = k.parse().map_err(|_| format!("bad count `{k}`"))?;
    if k < 2 {
        return Err("COUNT must be at least 2".into());
    }
    Ok((num(lo)?, num(hi)?, k))
}

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad input; exit 2.
    Invalid(anyhow::Error),
    /// The computation failed; exit 1.
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

pub(crate) trait OrInvalid<T> {
    fn or_invalid(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrInvalid<T> for Result<T, E> {
    fn or_invalid(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Invalid(e.into()))
    }
}

/// What a subcommand hands back for the manifest.
pub struct Report {
    pub config: serde_json::Value,
    pub outputs: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Render(_) => "render",
            Command::Orbit(_) => "orbit",
            Command::ClassifyType(_) => "classify-type",
            Command::Rotation(_) => "rotation",
            Command::Semiconj(_) => "semiconj",
            Command::Chart(_) => "chart",
            Command::Reconstruct(_) => "reconstruct",
            Command::Probe(_) => "probe",
        }
    }

    fn out(&self) -> &Path {
        match self {
            Command::Render(a) => &a.out,
            Command::Orbit(a) => &a.out,
            Command::ClassifyType(a) => &a.out,
            Command::Rotation(a) => &a.out,
            Command::Semiconj(a) => &a.out,
            Command::Chart(a) => &a.out,
            Command::Reconstruct(a) => &a.out,
            Command::Probe(a) => &a.out,
        }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}\n");
            eprintln!("{}", Cli::command().render_usage());
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), Failure> {
    let started = Instant::now();
    let file = match &cli.config {
        Some(path) => config::load(path).or_invalid()?,
        None => FileConfig::default(),
    };
    let report = match &cli.command {
        Command::Render(a) => commands::render(a, &file)?,
        Command::Orbit(a) => commands::orbit(a, &file)?,
        Command::ClassifyType(a) => commands::classify_type(a, &file)?,
        Command::Rotation(a) => commands::rotation(a, &file)?,
        Command::Semiconj(a) => commands::semiconj(a)?,
        Command::Chart(a) => commands::chart(a, &file)?,
        Command::Reconstruct(a) => commands::reconstruct(a, &file)?,
        Command::Probe(a) => commands::probe(a, &file)?,
    };
    let manifest_file = manifest_path(cli.command.out());
    let mut outputs: Vec<String> = report
        .outputs
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    outputs.push(manifest_file.display().to_string());
    let manifest = RunManifest {
        subcommand: cli.command.name(),
        tool_version: env!("CARGO_PKG_VERSION"),
        config: report.config,
        outputs,
        summary: report.summary,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    write_json(&manifest_file, &manifest)?;
    println!(
        "{}",
        serde_json::to_string(&manifest.summary).unwrap_or_default()
    );
    Ok(())
}

/// `--workers`, then the config file, then NEWTON_ATLAS_WORKERS, then all cores.
pub fn resolve_workers(flag: Option<usize>, file: Option<usize>) -> Result<usize, Failure> {
    let chosen = match flag.or(file) {
        Some(n) => n,
        None => match std::env::var(WORKERS_ENV) {
            Ok(s) => s.trim().parse::<usize>().map_err(|_| {
                Failure::Invalid(anyhow::anyhow!("{WORKERS_ENV}=`{s}` is not a count"))
            })?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if chosen == 0 {
        return Err(Failure::Invalid(anyhow::anyhow!(
            "workers must be positive"
        )));
    }
    Ok(chosen)
}
