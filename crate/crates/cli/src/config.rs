use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use twophoton::analysis::axis;
use twophoton::master::{EvolveConfig, SteadyOptions};
use twophoton::meanfield::MeanFieldConfig;
use twophoton::{Backend, EffectiveParams, Error, SweepOptions};

use crate::args::{
    Command, Common, CurvatureArgs, EvolveArgs, ExponentArgs, GridArgs, MasterSteadyArgs,
    MeanFieldSteadyArgs, SteadyArgs,
};

/// Smallest cutoff that leaves room for the three edge levels.
const MIN_CUTOFF: usize = 4;

/// A grid `start:stop:step` (inclusive within half a step) or one value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Value(f64),
    Range { start: f64, stop: f64, step: f64 },
}

impl Axis {
    pub fn nodes(&self) -> Result<Vec<f64>, Error> {
        match *self {
            Axis::Value(v) if v.is_finite() => Ok(vec![v]),
            Axis::Value(v) => Err(Error::InvalidParameter(format!(
                "grid value {v} is not finite"
            ))),
            Axis::Range { start, stop, step } => axis(start, stop, step),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("'{s}' is not a number"))
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(Axis::Value(parse_f64(v)?)),
            [a, b, c] => Ok(Axis::Range {
                start: parse_f64(a)?,
                stop: parse_f64(b)?,
                step: parse_f64(c)?,
            }),
            _ => Err(format!("expected 'start:stop:step' or a number, got '{s}'")),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Value(v) => write!(f, "{v}"),
            Axis::Range { start, stop, step } => write!(f, "{start}:{stop}:{step}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub min: f64,
    pub max: f64,
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split(':').collect::<Vec<_>>().as_slice() {
            [a, b] => Ok(Window {
                min: parse_f64(a)?,
                max: parse_f64(b)?,
            }),
            _ => Err(format!("expected 'min:max', got '{s}'")),
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.min, self.max)
    }
}

/// Settings every command records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Output {
    /// Output rate unit: written rates are multiplied by it, times and
    /// susceptibilities divided by it. Computations run with gamma = 1.
    pub gamma: f64,
    /// Resolved worker count.
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveRun {
    pub g: f64,
    pub delta: f64,
    pub backends: Vec<Backend>,
    /// `None`: automatic cutoff, grown by `growth` up to `max_retries` times
    /// while the trajectory reaches the top levels.
    pub cutoff: Option<usize>,
    pub max_retries: usize,
    pub growth: f64,
    pub master: EvolveConfig,
    pub meanfield: MeanFieldConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyRun {
    pub g: f64,
    pub delta: f64,
    pub backend: Backend,
    pub solver: SweepOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRun {
    pub backend: Backend,
    pub delta: Axis,
    pub g: Axis,
    pub solver: SweepOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentRun {
    pub backend: Backend,
    pub window: Window,
    pub points: usize,
    pub solver: SweepOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureRun {
    pub backend: Backend,
    pub g: Axis,
    pub step: f64,
    pub solver: SweepOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Task {
    Evolve(EvolveRun),
    Steady(SteadyRun),
    Sweep(GridRun),
    Susceptibility(GridRun),
    Threshold(GridRun),
    Exponent(ExponentRun),
    Curvature(CurvatureRun),
}

/// Fully resolved configuration of one run. Every default the command line
/// applied is filled in, so the manifest alone reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub output: Output,
    pub task: Task,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Evolve(_) => "evolve",
            Task::Steady(_) => "steady",
            Task::Sweep(_) => "sweep",
            Task::Susceptibility(_) => "susceptibility",
            Task::Threshold(_) => "threshold",
            Task::Exponent(_) => "exponent",
            Task::Curvature(_) => "curvature",
        }
    }
}

pub fn resolve_workers(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

fn output(c: &Common) -> Output {
    Output {
        gamma: c.gamma,
        workers: resolve_workers(c.workers),
    }
}

fn solver(workers: usize, m: &MasterSteadyArgs, mf: &MeanFieldSteadyArgs) -> SweepOptions {
    SweepOptions {
        gamma: 1.0,
        workers,
        master: m.options(),
        meanfield: MeanFieldConfig {
            rel_tol: mf.mf_rel_tol,
            abs_tol: mf.mf_abs_tol,
            rate_tol: mf.mf_rate_tol,
            ..MeanFieldConfig::default()
        },
        meanfield_t_cap: mf.mf_t_cap,
    }
}

fn grid(a: &GridArgs) -> RunConfig {
    let out = output(&a.common);
    RunConfig {
        output: out,
        task: Task::Sweep(GridRun {
            backend: a.backend.into(),
            delta: a.delta,
            g: a.g,
            solver: solver(out.workers, &a.master, &a.meanfield),
        }),
    }
}

/// Build the resolved configuration of a command (not `replay`).
pub fn from_command(cmd: &Command) -> RunConfig {
    match cmd {
        Command::Evolve(a) => from_evolve(a),
        Command::Steady(a) => from_steady(a),
        Command::Sweep(a) => grid(a),
        Command::Susceptibility(a) => with_task(grid(a), Task::Susceptibility),
        Command::Threshold(a) => with_task(grid(a), Task::Threshold),
        Command::Exponent(a) => from_exponent(a),
        Command::Curvature(a) => from_curvature(a),
        Command::Replay(_) => unreachable!("replay reads its configuration from a manifest"),
    }
}

fn with_task(mut c: RunConfig, wrap: fn(GridRun) -> Task) -> RunConfig {
    if let Task::Sweep(g) = c.task {
        c.task = wrap(g);
    }
    c
}

fn from_evolve(a: &EvolveArgs) -> RunConfig {
    let mut backends: Vec<Backend> = Vec::new();
    for b in &a.backends {
        let b = Backend::from(*b);
        if !backends.contains(&b) {
            backends.push(b);
        }
    }
    RunConfig {
        output: output(&a.common),
        task: Task::Evolve(EvolveRun {
            g: a.g,
            delta: a.delta,
            backends,
            cutoff: a.cutoff,
            max_retries: a.max_retries,
            growth: a.growth,
            master: EvolveConfig {
                t_max: a.t_max,
                rel_tol: a.rel_tol,
                abs_tol: a.abs_tol,
                samples: a.samples,
                full_validation: a.full_validation,
                ..EvolveConfig::default()
            },
            meanfield: MeanFieldConfig {
                t_max: a.t_max,
                rel_tol: a.mf_rel_tol,
                abs_tol: a.mf_abs_tol,
                samples: a.samples,
                ..MeanFieldConfig::default()
            },
        }),
    }
}

fn from_steady(a: &SteadyArgs) -> RunConfig {
    let out = output(&a.common);
    RunConfig {
        output: out,
        task: Task::Steady(SteadyRun {
            g: a.g,
            delta: a.delta,
            backend: a.backend.into(),
            solver: solver(out.workers, &a.master, &a.meanfield),
        }),
    }
}

fn from_exponent(a: &ExponentArgs) -> RunConfig {
    let out = output(&a.common);
    RunConfig {
        output: out,
        task: Task::Exponent(ExponentRun {
            backend: a.backend.into(),
            window: a.window,
            points: a.points,
            solver: solver(out.workers, &a.master, &a.meanfield),
        }),
    }
}

fn from_curvature(a: &CurvatureArgs) -> RunConfig {
    let out = output(&a.common);
    let backend: Backend = a.backend.into();
    RunConfig {
        output: out,
        task: Task::Curvature(CurvatureRun {
            backend,
            g: a.g,
            step: a
                .step
                .unwrap_or_else(|| twophoton::analysis::curvature::default_step(backend)),
            solver: solver(out.workers, &a.master, &a.meanfield),
        }),
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

fn positive(name: &str, v: f64) -> Result<(), Error> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn point(g: f64, delta: f64) -> Result<(), Error> {
    EffectiveParams::new(g, 1.0, delta).map(|_| ())
}

fn check_cutoff(cutoff: Option<usize>) -> Result<(), Error> {
    match cutoff {
        Some(n) if n < MIN_CUTOFF => Err(Error::InvalidCutoff {
            cutoff: n,
            min: MIN_CUTOFF,
        }),
        _ => Ok(()),
    }
}

fn check_growth(growth: f64) -> Result<(), Error> {
    if growth > 1.0 && growth.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "cutoff growth must exceed 1, got {growth}"
        )))
    }
}

fn check_master(o: &SteadyOptions) -> Result<(), Error> {
    check_cutoff(o.cutoff)?;
    check_growth(o.growth)?;
    positive("residual tolerance", o.evolve.residual_tol)?;
    positive("t_cap", o.evolve.t_cap)?;
    positive("steady rel_tol", o.evolve.rel_tol)?;
    positive("steady abs_tol", o.evolve.abs_tol)?;
    Ok(())
}

fn check_meanfield(c: &MeanFieldConfig, t_cap: f64) -> Result<(), Error> {
    positive("mean-field rel_tol", c.rel_tol)?;
    positive("mean-field abs_tol", c.abs_tol)?;
    positive("mean-field rate_tol", c.rate_tol)?;
    positive("mean-field t_cap", t_cap)?;
    positive("mean-field t_max", c.t_max)?;
    if c.samples < 2 {
        return Err(invalid("at least two samples are required".to_string()));
    }
    Ok(())
}

fn check_solver(s: &SweepOptions) -> Result<(), Error> {
    check_master(&s.master)?;
    check_meanfield(&s.meanfield, s.meanfield_t_cap)
}

fn check_g_axis(a: &Axis) -> Result<Vec<f64>, Error> {
    let nodes = a.nodes()?;
    if nodes[0] < 0.0 {
        return Err(invalid(format!(
            "pump rates must be non-negative, got {}",
            nodes[0]
        )));
    }
    Ok(nodes)
}

impl RunConfig {
    /// Set the worker count everywhere it is recorded.
    pub fn set_workers(&mut self, workers: usize) {
        self.output.workers = workers;
        match &mut self.task {
            Task::Evolve(_) => {}
            Task::Steady(r) => r.solver.workers = workers,
            Task::Sweep(r) | Task::Susceptibility(r) | Task::Threshold(r) => {
                r.solver.workers = workers
            }
            Task::Exponent(r) => r.solver.workers = workers,
            Task::Curvature(r) => r.solver.workers = workers,
        }
    }

    /// Check every field against the preconditions of the code it feeds,
    /// before anything runs.
    pub fn validate(&self) -> Result<(), Error> {
        positive("gamma", self.output.gamma)?;
        if self.output.workers == 0 {
            return Err(invalid(
                "worker count must be resolved to at least 1".to_string(),
            ));
        }
        match &self.task {
            Task::Evolve(r) => {
                point(r.g, r.delta)?;
                if r.backends.is_empty() {
                    return Err(invalid("no backend selected".to_string()));
                }
                check_cutoff(r.cutoff)?;
                check_growth(r.growth)?;
                let m = &r.master;
                positive("t_max", m.t_max)?;
                positive("rel_tol", m.rel_tol)?;
                positive("abs_tol", m.abs_tol)?;
                if m.samples < 2 {
                    return Err(invalid("at least two samples are required".to_string()));
                }
                check_meanfield(&r.meanfield, 1.0)
            }
            Task::Steady(r) => {
                point(r.g, r.delta)?;
                check_solver(&r.solver)
            }
            Task::Sweep(r) | Task::Susceptibility(r) | Task::Threshold(r) => {
                let gs = check_g_axis(&r.g)?;
                r.delta.nodes()?;
                if !matches!(self.task, Task::Sweep(_)) && gs.len() < 3 {
                    return Err(invalid(format!(
                        "susceptibility needs at least 3 pump rates, got {}",
                        gs.len()
                    )));
                }
                check_solver(&r.solver)
            }
            Task::Exponent(r) => {
                positive("window start", r.window.min)?;
                positive("window end", r.window.max)?;
                if r.window.max <= r.window.min {
                    return Err(invalid(format!("window {} is empty", r.window)));
                }
                if r.points < twophoton::analysis::exponent::MIN_FIT_POINTS {
                    return Err(Error::FitRefused(format!(
                        "at least {} points are required, got {}",
                        twophoton::analysis::exponent::MIN_FIT_POINTS,
                        r.points
                    )));
                }
                check_solver(&r.solver)
            }
            Task::Curvature(r) => {
                let gs = check_g_axis(&r.g)?;
                if gs[0] <= 0.0 {
                    return Err(invalid("curvature needs positive pump rates".to_string()));
                }
                positive("stencil step", r.step)?;
                check_solver(&r.solver)
            }
        }
    }
}
