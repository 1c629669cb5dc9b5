use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twophoton::master::{EvolveConfig, MethodChoice, SteadyConfig, SteadyOptions};
use twophoton::meanfield::MeanFieldConfig;
use twophoton::Backend;

use crate::config::{Axis, Window};

/// Exact and mean-field steady states, trajectories and critical analysis of
/// a bosonic mode with two-photon drive and two-photon loss.
///
/// Rates (--g, --delta, grids, windows) are given in units of gamma and
/// times in units of 1/gamma. --gamma only rescales the written outputs.
#[derive(Debug, Parser)]
#[command(name = "twophoton", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time evolution from the vacuum, one trajectory CSV per backend.
    Evolve(EvolveArgs),
    /// Steady state at one parameter point.
    Steady(SteadyArgs),
    /// Steady states on a (delta, g) grid.
    Sweep(GridArgs),
    /// Sweep plus susceptibility map and its ridge.
    Susceptibility(GridArgs),
    /// Sweep, susceptibility and the pump threshold.
    Threshold(GridArgs),
    /// Power-law fit of |psi| along delta = g.
    Exponent(ExponentArgs),
    /// Second derivative of |psi| in delta at resonance, over a pump range.
    Curvature(CurvatureArgs),
    /// Re-run the configuration recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Master,
    Meanfield,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Master => Backend::Master,
            BackendArg::Meanfield => Backend::MeanField,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Evolve,
    Direct,
}

impl From<MethodArg> for MethodChoice {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => MethodChoice::Auto,
            MethodArg::Evolve => MethodChoice::Evolve,
            MethodArg::Direct => MethodChoice::Direct,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output rate unit; the written rates are multiplied by it.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for independent points; 0 uses every core.
    #[arg(long, env = "TWOPHOTON_WORKERS", default_value_t = 0)]
    pub workers: usize,
}

/// Steady-state solver settings shared by the master backend.
#[derive(Debug, Clone, Args)]
pub struct MasterSteadyArgs {
    /// Fock cutoff; omitted means the automatic heuristic with retries.
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[arg(long, default_value_t = SteadyOptions::default().max_retries)]
    pub max_retries: usize,
    /// Cutoff growth factor per retry.
    #[arg(long, default_value_t = SteadyOptions::default().growth)]
    pub growth: f64,
    /// Generator-residual stopping threshold of the evolution method.
    #[arg(long, default_value_t = SteadyConfig::default().residual_tol)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = SteadyConfig::default().t_cap)]
    pub t_cap: f64,
    #[arg(long, default_value_t = SteadyConfig::default().rel_tol)]
    pub steady_rel_tol: f64,
    #[arg(long, default_value_t = SteadyConfig::default().abs_tol)]
    pub steady_abs_tol: f64,
}

impl MasterSteadyArgs {
    pub fn options(&self) -> SteadyOptions {
        SteadyOptions {
            method: self.method.into(),
            cutoff: self.cutoff,
            max_retries: self.max_retries,
            growth: self.growth,
            evolve: SteadyConfig {
                residual_tol: self.residual_tol,
                t_cap: self.t_cap,
                rel_tol: self.steady_rel_tol,
                abs_tol: self.steady_abs_tol,
            },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MeanFieldSteadyArgs {
    #[arg(long, default_value_t = MeanFieldConfig::default().rel_tol)]
    pub mf_rel_tol: f64,
    #[arg(long, default_value_t = MeanFieldConfig::default().abs_tol)]
    pub mf_abs_tol: f64,
    /// Stationarity threshold on |dpsi/dt| relative to max(gamma, g).
    #[arg(long, default_value_t = MeanFieldConfig::default().rate_tol)]
    pub mf_rate_tol: f64,
    /// Integration horizon for mean-field stationary points.
    #[arg(long, default_value_t = 1e4)]
    pub mf_t_cap: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub g: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "master,meanfield"
    )]
    pub backends: Vec<BackendArg>,
    /// Fock cutoff; omitted means the automatic heuristic with retries.
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long, default_value_t = SteadyOptions::default().max_retries)]
    pub max_retries: usize,
    #[arg(long, default_value_t = SteadyOptions::default().growth)]
    pub growth: f64,
    #[arg(long, default_value_t = EvolveConfig::default().t_max)]
    pub t_max: f64,
    #[arg(long, default_value_t = EvolveConfig::default().samples)]
    pub samples: usize,
    #[arg(long, default_value_t = EvolveConfig::default().rel_tol)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = EvolveConfig::default().abs_tol)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = MeanFieldConfig::default().rel_tol)]
    pub mf_rel_tol: f64,
    #[arg(long, default_value_t = MeanFieldConfig::default().abs_tol)]
    pub mf_abs_tol: f64,
    /// Eigenvalue positivity check on every sample.
    #[arg(long)]
    pub full_validation: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SteadyArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub g: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = BackendArg::Master)]
    pub backend: BackendArg,
    #[command(flatten)]
    pub master: MasterSteadyArgs,
    #[command(flatten)]
    pub meanfield: MeanFieldSteadyArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, value_enum, default_value_t = BackendArg::Meanfield)]
    pub backend: BackendArg,
    /// Detuning grid `start:stop:step`, or a single value.
    #[arg(
        long = "delta-range",
        visible_alias = "delta",
        default_value = "0:2:0.05",
        allow_hyphen_values = true
    )]
    pub delta: Axis,
    /// Pump grid `start:stop:step`, or a single value.
    #[arg(
        long = "g-range",
        visible_alias = "g",
        default_value = "0.5:3:0.05",
        allow_hyphen_values = true
    )]
    pub g: Axis,
    #[command(flatten)]
    pub master: MasterSteadyArgs,
    #[command(flatten)]
    pub meanfield: MeanFieldSteadyArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ExponentArgs {
    #[arg(long, value_enum, default_value_t = BackendArg::Meanfield)]
    pub backend: BackendArg,
    /// Pump window `min:max` on the line delta = g.
    #[arg(long, default_value = "20:200", allow_hyphen_values = true)]
    pub window: Window,
    /// Number of log-spaced points.
    #[arg(long, default_value_t = 12)]
    pub points: usize,
    #[command(flatten)]
    pub master: MasterSteadyArgs,
    #[command(flatten)]
    pub meanfield: MeanFieldSteadyArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct CurvatureArgs {
    #[arg(long, value_enum, default_value_t = BackendArg::Meanfield)]
    pub backend: BackendArg,
    /// Pump grid `start:stop:step`, or a single value.
    #[arg(
        long = "g-range",
        visible_alias = "g",
        default_value = "0.05:20:0.05",
        allow_hyphen_values = true
    )]
    pub g: Axis,
    /// Detuning step of the stencil; defaults to 1e-2 (master) or 1e-4
    /// (mean field).
    #[arg(long)]
    pub step: Option<f64>,
    #[command(flatten)]
    pub master: MasterSteadyArgs,
    #[command(flatten)]
    pub meanfield: MeanFieldSteadyArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    /// Output directory for the re-run.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the recorded worker count.
    #[arg(long)]
    pub workers: Option<usize>,
}
