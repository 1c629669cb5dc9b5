//! Exact dynamics of the truncated master equation: time evolution,
//! steady states by evolution or by a direct sparse solve, and cutoff
//! selection.
//!
//! The generator never mixes the four parity blocks of `rho`. Evolution
//! integrates only the blocks that are populated initially (zero blocks stay
//! zero exactly), and the steady-state solvers work on the even-even block,
//! which is where the vacuum ends up. Restricting to that block removes the
//! degeneracy of the full stationary space.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::fock::{BlockOperator, LindbladGenerator, Parity, ParityBlock};
use crate::ode::{uniform_times, DormandPrince, Event, Flow, OdeSystem, StepStats};
use crate::params::EffectiveParams;
use crate::state::{
    check_truncation, observables, DensityMatrix, Observables, TruncationReport,
    DEFAULT_EDGE_LEVELS, DEFAULT_EDGE_TOL,
};

/// Largest even-block size handed to the direct solver by
/// [`steady_state_auto`].
pub const DIRECT_MAX_UNKNOWNS: usize = 8000;
/// Residual the direct solution must reach.
pub const DIRECT_RESIDUAL_TOL: f64 = 1e-10;
/// Pivot ratio above which the direct solve is declared ill-conditioned.
pub const MAX_PIVOT_RATIO: f64 = 1e13;

/// How the state is stored during integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    /// Populated parity blocks only.
    #[default]
    Blocks,
    /// The whole matrix, no structure used. Slower; kept as a cross-check.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Evenly spaced recorded samples including `t = 0` and `t_max`.
    pub samples: usize,
    /// Run the eigenvalue positivity check on every sample.
    pub full_validation: bool,
    pub edge_levels: usize,
    pub edge_tol: f64,
    pub representation: Representation,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            samples: 400,
            full_validation: false,
            edge_levels: DEFAULT_EDGE_LEVELS,
            edge_tol: DEFAULT_EDGE_TOL,
            representation: Representation::Blocks,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub obs: Observables,
}

/// Worst values seen over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Conservation {
    pub max_trace_drift: f64,
    pub max_hermiticity_defect: f64,
    pub max_odd_weight: f64,
    /// Most negative diagonal entry seen (0 if none).
    pub min_population: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: EffectiveParams,
    pub cutoff: usize,
    pub samples: Vec<Sample>,
    pub stats: StepStats,
    /// `|L(rho)|_1 / |rho|_1` at the last sample.
    pub final_residual: f64,
    pub conservation: Conservation,
    pub final_state: DensityMatrix,
}

/// Entrywise-L1 generator residual of a state.
pub fn residual(generator: &LindbladGenerator, rho: &DensityMatrix) -> Result<f64> {
    let d = generator.apply(rho.entries())?;
    Ok(l1(d.as_slice()) / rho.entrywise_l1())
}

fn l1(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

struct BlockSystem {
    generator: LindbladGenerator,
    blocks: Vec<(BlockOperator, usize)>,
    len: usize,
}

impl BlockSystem {
    fn new(generator: LindbladGenerator, blocks: Vec<ParityBlock>) -> Self {
        let mut offset = 0;
        let blocks = blocks
            .into_iter()
            .map(|b: ParityBlock| {
                let o = offset;
                offset += b.len();
                (generator.block_operator(b), o)
            })
            .collect();
        Self {
            generator,
            blocks,
            len: offset,
        }
    }

    /// Populated blocks of `rho`; `oe` is implied by `eo` through Hermiticity.
    fn for_state(generator: LindbladGenerator, rho: &DensityMatrix) -> (Self, Vec<Complex64>) {
        let dim = rho.dim();
        let candidates = [
            ParityBlock::new(dim, Parity::Even, Parity::Even),
            ParityBlock::new(dim, Parity::Odd, Parity::Odd),
            ParityBlock::new(dim, Parity::Even, Parity::Odd),
        ];
        let mut blocks = Vec::new();
        let mut y = Vec::new();
        for b in candidates {
            let data = b.gather(rho.entries());
            if !b.is_empty() && data.iter().any(|z| z.norm() != 0.0) {
                blocks.push(b);
                y.extend(data);
            }
        }
        (Self::new(generator, blocks), y)
    }

    fn assemble(&self, y: &[Complex64]) -> DMatrix<Complex64> {
        let dim = self.generator.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (op, o) in &self.blocks {
            let b = op.block();
            let data = &y[*o..*o + b.len()];
            b.scatter(data, &mut m);
            if !b.is_diagonal() {
                for p in 0..b.nrows {
                    for q in 0..b.ncols {
                        m[(b.col_level(q), b.row_level(p))] = data[p * b.ncols + q].conj();
                    }
                }
            }
        }
        m
    }
}

impl OdeSystem for BlockSystem {
    fn dim(&self) -> usize {
        self.len
    }

    fn rhs(&self, _t: f64, y: &[Complex64], dydt: &mut [Complex64]) {
        for (op, o) in &self.blocks {
            let r = *o..*o + op.block().len();
            op.apply(&y[r.clone()], &mut dydt[r]);
        }
    }
}

struct FullSystem {
    generator: LindbladGenerator,
}

impl OdeSystem for FullSystem {
    fn dim(&self) -> usize {
        self.generator.dim().pow(2)
    }

    fn rhs(&self, _t: f64, y: &[Complex64], dydt: &mut [Complex64]) {
        let n = self.generator.dim();
        let rho = DMatrix::from_column_slice(n, n, y);
        let d = self
            .generator
            .apply(&rho)
            .expect("state length matches the generator");
        dydt.copy_from_slice(d.as_slice());
    }
}

/// Integrate the master equation from `rho0`, recording `config.samples`
/// evenly spaced observables.
///
/// Every sample is validated as a density matrix, and the top
/// `config.edge_levels` levels must stay below `config.edge_tol`.
pub fn evolve(
    rho0: &DensityMatrix,
    params: &EffectiveParams,
    config: &EvolveConfig,
) -> Result<Trajectory> {
    if !(config.t_max > 0.0 && config.t_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "t_max must be positive, got {}",
            config.t_max
        )));
    }
    if config.samples < 2 {
        return Err(Error::InvalidParameter(
            "at least two samples are required".to_string(),
        ));
    }
    if config.edge_levels == 0 || config.edge_levels >= rho0.dim() {
        return Err(Error::InvalidParameter(format!(
            "edge levels must lie in 1..{}, got {}",
            rho0.dim(),
            config.edge_levels
        )));
    }
    let dim = rho0.dim();
    let generator = LindbladGenerator::new(*params, dim)?;
    let solver = DormandPrince::with_tolerances(config.rel_tol, config.abs_tol);
    let times = uniform_times(config.t_max, config.samples);
    // Empty levels, and the anti-Hermitian part of a full-matrix run, pick up
    // noise of a few abs_tol; allow two decades of it.
    let noise = 100.0 * config.abs_tol;

    let mut samples = Vec::with_capacity(times.len());
    let mut conservation = Conservation::default();
    let mut last: Option<DensityMatrix> = None;
    let mut record = |t: f64, m: DMatrix<Complex64>| -> Result<Flow> {
        let rho = DensityMatrix::from_entries(m)?;
        rho.validate_with(config.full_validation, noise)
            .map_err(|e| Error::IntegrationFailure {
                t,
                reason: e.to_string(),
            })?;
        let edge = check_truncation(&rho, config.edge_levels, config.edge_tol);
        edge.require()?;
        conservation.max_trace_drift = conservation
            .max_trace_drift
            .max((rho.trace().re - 1.0).abs());
        conservation.max_hermiticity_defect = conservation
            .max_hermiticity_defect
            .max(rho.hermiticity_defect());
        conservation.max_odd_weight = conservation.max_odd_weight.max(rho.odd_weight());
        conservation.min_population = (0..rho.dim())
            .map(|k| rho.population(k))
            .fold(conservation.min_population, f64::min);
        let mut obs = observables(&rho);
        obs.edge_weight = edge.edge_weight;
        samples.push(Sample { t, obs });
        last = Some(rho);
        Ok(Flow::Continue)
    };

    let stats = match config.representation {
        Representation::Blocks => {
            let (sys, mut y) = BlockSystem::for_state(generator.clone(), rho0);
            let out = solver.integrate(&sys, 0.0, &mut y, config.t_max, &times, |ev| match ev {
                Event::Checkpoint { t, y, .. } => record(t, sys.assemble(y)),
                Event::Step { .. } => Ok(Flow::Continue),
            })?;
            out.stats
        }
        Representation::Full => {
            let sys = FullSystem {
                generator: generator.clone(),
            };
            let mut y = rho0.entries().as_slice().to_vec();
            let out = solver.integrate(&sys, 0.0, &mut y, config.t_max, &times, |ev| match ev {
                Event::Checkpoint { t, y, .. } => {
                    record(t, DMatrix::from_column_slice(dim, dim, y))
                }
                Event::Step { .. } => Ok(Flow::Continue),
            })?;
            out.stats
        }
    };

    let final_state =
        last.ok_or_else(|| Error::Consistency("no sample was recorded".to_string()))?;
    let final_residual = residual(&generator, &final_state)?;
    Ok(Trajectory {
        params: *params,
        cutoff: dim,
        samples,
        stats,
        final_residual,
        conservation,
        final_state,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SteadyMethod {
    Evolve,
    Direct,
}

/// Stopping rule and tolerances for [`steady_state_evolve`].
///
/// The integration tolerances are tighter than the trajectory defaults: once
/// the step size is limited by stability, the fast-decaying high-level
/// coherences carry noise proportional to the tolerance, and that noise sets
/// a floor on the generator residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyConfig {
    pub residual_tol: f64,
    pub t_cap: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for SteadyConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-9,
            t_cap: 500.0,
            rel_tol: 1e-12,
            abs_tol: 1e-16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyReport {
    pub state: DensityMatrix,
    pub observables: Observables,
    pub method: SteadyMethod,
    pub cutoff: usize,
    /// `|L(rho)|_1 / |rho|_1`
    pub residual: f64,
    pub truncation: TruncationReport,
    /// Time at which evolution met the residual target.
    pub t_converged: Option<f64>,
    pub stats: Option<StepStats>,
    /// Pivot ratio of the direct factorisation.
    pub condition_estimate: Option<f64>,
}

impl SteadyReport {
    pub fn truncation_ok(&self) -> bool {
        self.truncation.adequate
    }

    fn build(
        state: DensityMatrix,
        method: SteadyMethod,
        residual: f64,
        t_converged: Option<f64>,
        stats: Option<StepStats>,
        condition_estimate: Option<f64>,
    ) -> Self {
        let truncation = check_truncation(&state, DEFAULT_EDGE_LEVELS, DEFAULT_EDGE_TOL);
        Self {
            observables: observables(&state),
            cutoff: state.dim(),
            state,
            method,
            residual,
            truncation,
            t_converged,
            stats,
            condition_estimate,
        }
    }
}

fn even_block(dim: usize) -> ParityBlock {
    ParityBlock::new(dim, Parity::Even, Parity::Even)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 4 {
        return Err(Error::InvalidCutoff {
            cutoff: dim,
            min: 4,
        });
    }
    Ok(())
}

/// Evolve from the vacuum until the generator residual drops below
/// `config.residual_tol`.
pub fn steady_state_evolve(
    params: &EffectiveParams,
    dim: usize,
    config: &SteadyConfig,
) -> Result<SteadyReport> {
    check_dim(dim)?;
    if !(config.residual_tol > 0.0 && config.t_cap > 0.0) {
        return Err(Error::InvalidParameter(
            "residual tolerance and t_cap must be positive".to_string(),
        ));
    }
    let generator = LindbladGenerator::new(*params, dim)?;
    let block = even_block(dim);
    let sys = BlockSystem::new(generator.clone(), vec![block]);
    let mut y = vec![Complex64::new(0.0, 0.0); block.len()];
    y[0] = Complex64::new(1.0, 0.0);

    let solver = DormandPrince::with_tolerances(config.rel_tol, config.abs_tol);
    let mut last_residual = f64::INFINITY;
    let out = solver.integrate(&sys, 0.0, &mut y, config.t_cap, &[], |ev| {
        if let Event::Step { y, dydt, .. } = ev {
            last_residual = l1(dydt) / l1(y);
            if last_residual <= config.residual_tol {
                return Ok(Flow::Stop);
            }
        }
        Ok(Flow::Continue)
    })?;
    if !out.stopped {
        return Err(Error::NotConverged {
            t: out.t,
            residual: last_residual,
        });
    }
    let state = DensityMatrix::from_entries(sys.assemble(&y))?;
    state.validate(false)?;
    let res = residual(&generator, &state)?;
    Ok(SteadyReport::build(
        state,
        SteadyMethod::Evolve,
        res,
        Some(out.t),
        Some(out.stats),
        None,
    ))
}

/// Solve `L(rho) = 0` on the even block with one diagonal entry pinned,
/// then normalise.
///
/// Pinning `rho[k, k] = 1` replaces one equation. Since the trace functional
/// annihilates the range of `L`, the dropped equation is implied by the
/// rest, so the pinned system has the same solution as the trace-one
/// constrained one up to scale. The pin starts at the vacuum and moves to the
/// most populated level if the vacuum population turns out negligible.
pub fn steady_state_direct(params: &EffectiveParams, dim: usize) -> Result<SteadyReport> {
    check_dim(dim)?;
    let generator = LindbladGenerator::new(*params, dim)?;
    let block = even_block(dim);
    let ne = block.nrows;

    let (mut x, cond) = solve_pinned(&generator, &block, 0)?;
    let pops: Vec<f64> = (0..ne).map(|p| x[p * ne + p].re).collect();
    let (k_max, p_max) =
        pops.iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (k, p)| if p > acc.1 { (k, p) } else { acc },
            );
    let mut cond = cond;
    if k_max != 0 && pops[0].abs() < 1e-3 * p_max {
        let (x2, c2) = solve_pinned(&generator, &block, k_max)?;
        x = x2;
        cond = c2;
    }

    let tr: Complex64 = (0..ne).map(|p| x[p * ne + p]).sum();
    if !(tr.norm() > 0.0 && tr.re.is_finite()) {
        return Err(Error::Solver {
            reason: "solution has zero trace".to_string(),
            condition_estimate: cond,
        });
    }
    for v in x.iter_mut() {
        *v /= tr;
    }
    // Symmetrise away rounding so the state is exactly Hermitian.
    for p in 0..ne {
        x[p * ne + p].im = 0.0;
        for q in p + 1..ne {
            let avg = (x[p * ne + q] + x[q * ne + p].conj()) * 0.5;
            x[p * ne + q] = avg;
            x[q * ne + p] = avg.conj();
        }
    }

    let sys = BlockSystem::new(generator.clone(), vec![block]);
    let state = DensityMatrix::from_entries(sys.assemble(&x))?;
    let res = residual(&generator, &state)?;
    if !(res <= DIRECT_RESIDUAL_TOL) {
        return Err(Error::Consistency(format!(
            "direct steady state has residual {res:.3e} above {DIRECT_RESIDUAL_TOL:.0e}"
        )));
    }
    state.validate(false)?;
    Ok(SteadyReport::build(
        state,
        SteadyMethod::Direct,
        res,
        None,
        None,
        Some(cond),
    ))
}

fn solve_pinned(
    generator: &LindbladGenerator,
    block: &ParityBlock,
    pin: usize,
) -> Result<(Vec<Complex64>, f64)> {
    let ne = block.nrows;
    let n = ne * ne;
    let mut a = BandedMatrix::zeros(n, ne, ne + 1);
    for p in 0..ne {
        let m = block.row_level(p);
        for q in 0..ne {
            let k = p * ne + q;
            let s = generator.stencil(m, block.col_level(q));
            a.set(k, k, s.center);
            if p >= 1 {
                a.set(k, k - ne, s.row_down);
            }
            if q >= 1 {
                a.set(k, k - 1, s.col_down);
            }
            if p + 1 < ne {
                a.set(k, k + ne, s.row_up);
            }
            if q + 1 < ne {
                a.set(k, k + 1, s.col_up);
                if p + 1 < ne {
                    a.set(k, k + ne + 1, Complex64::new(s.both_up, 0.0));
                }
            }
        }
    }
    let row = pin * ne + pin;
    a.set_unit_row(row);
    let lu = a.factor()?;
    let cond = lu.condition_estimate();
    if cond > MAX_PIVOT_RATIO {
        return Err(Error::Solver {
            reason: "generator block is numerically singular".to_string(),
            condition_estimate: cond,
        });
    }
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    b[row] = Complex64::new(1.0, 0.0);
    lu.solve(&mut b);
    if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Solver {
            reason: "non-finite solution".to_string(),
            condition_estimate: cond,
        });
    }
    Ok((b, cond))
}

/// Cutoff heuristic `max(16, ceil(4 x + 10 sqrt(x)))` with `x = |g| / 2 gamma`,
/// sized for near-Poissonian statistics of mean `x`.
pub fn auto_cutoff(params: &EffectiveParams) -> usize {
    let x = params.g_abs() / (2.0 * params.gamma());
    let n = (4.0 * x + 10.0 * x.sqrt()).ceil();
    (n as usize).max(16)
}

/// Number of unknowns of the even block at a given cutoff.
pub fn even_unknowns(dim: usize) -> usize {
    Parity::Even.levels(dim).pow(2)
}

/// Method choice for [`steady_state_auto`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    /// Direct when the even block has at most [`DIRECT_MAX_UNKNOWNS`]
    /// unknowns, evolution otherwise.
    #[default]
    Auto,
    Evolve,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyOptions {
    pub method: MethodChoice,
    /// Fixed cutoff; `None` picks [`auto_cutoff`] and enables retries.
    pub cutoff: Option<usize>,
    pub max_retries: usize,
    pub growth: f64,
    pub evolve: SteadyConfig,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            method: MethodChoice::Auto,
            cutoff: None,
            max_retries: 2,
            growth: 1.5,
            evolve: SteadyConfig::default(),
        }
    }
}

/// Steady state with automatic cutoff: start from [`auto_cutoff`] and grow
/// it by `growth` while the top levels carry too much weight.
///
/// With a fixed cutoff no retry happens; an inadequate truncation is then an
/// error.
pub fn steady_state_auto(
    params: &EffectiveParams,
    options: &SteadyOptions,
) -> Result<SteadyReport> {
    let mut dim = options.cutoff.unwrap_or_else(|| auto_cutoff(params));
    let retries = if options.cutoff.is_some() {
        0
    } else {
        options.max_retries
    };
    let mut attempt = 0;
    loop {
        let use_direct = match options.method {
            MethodChoice::Auto => even_unknowns(dim) <= DIRECT_MAX_UNKNOWNS,
            MethodChoice::Direct => true,
            MethodChoice::Evolve => false,
        };
        let report = if use_direct {
            steady_state_direct(params, dim)?
        } else {
            steady_state_evolve(params, dim, &options.evolve)?
        };
        if report.truncation.adequate {
            return Ok(report);
        }
        if attempt >= retries {
            report.truncation.require()?;
        }
        attempt += 1;
        dim = ((dim as f64) * options.growth).ceil() as usize;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(g: f64, delta: f64) -> EffectiveParams {
        EffectiveParams::new(g, 1.0, delta).unwrap()
    }

    #[test]
    fn cutoff_heuristic() {
        assert_eq!(auto_cutoff(&p(0.0, 0.0)), 16);
        assert_eq!(auto_cutoff(&p(2.0, 0.0)), 16);
        // x = 10: 40 + 31.62 -> 72
        assert_eq!(auto_cutoff(&p(20.0, 0.0)), 72);
        assert_eq!(even_unknowns(72), 36 * 36);
    }

    #[test]
    fn dark_vacuum_stays_put() {
        let rho = DensityMatrix::vacuum(12).unwrap();
        let cfg = EvolveConfig {
            t_max: 3.0,
            samples: 7,
            ..EvolveConfig::default()
        };
        let tr = evolve(&rho, &p(0.0, 1.5), &cfg).unwrap();
        assert_eq!(tr.samples.len(), 7);
        for s in &tr.samples {
            assert_eq!(s.obs.n, 0.0);
            assert_eq!(s.obs.psi, Complex64::new(0.0, 0.0));
        }
        assert_eq!(tr.final_residual, 0.0);
    }

    #[test]
    fn block_and_full_representations_agree() {
        let params = p(3.0, 0.7);
        // Mixed parity start populates ee, oo and eo blocks.
        let amp: Vec<Complex64> = (0..10)
            .map(|k| Complex64::new(1.0 / (1.0 + k as f64), 0.1 * k as f64))
            .collect();
        let rho = DensityMatrix::from_ket(&amp).unwrap();
        let mut cfg = EvolveConfig {
            t_max: 1.0,
            samples: 5,
            edge_tol: 1.0,
            ..EvolveConfig::default()
        };
        let a = evolve(&rho, &params, &cfg).unwrap();
        cfg.representation = Representation::Full;
        let b = evolve(&rho, &params, &cfg).unwrap();
        let diff = a.final_state.entries() - b.final_state.entries();
        assert!(diff.camax() < 1e-7, "{}", diff.camax());
    }

    #[test]
    fn too_small_cutoff_is_reported() {
        let rho = DensityMatrix::vacuum(12).unwrap();
        let cfg = EvolveConfig {
            t_max: 5.0,
            ..EvolveConfig::default()
        };
        assert!(matches!(
            evolve(&rho, &p(20.0, 0.0), &cfg),
            Err(Error::TruncationInadequate { cutoff: 12, .. })
        ));
    }

    #[test]
    fn evolve_rejects_bad_config() {
        let rho = DensityMatrix::vacuum(8).unwrap();
        let bad = EvolveConfig {
            t_max: 0.0,
            ..EvolveConfig::default()
        };
        assert!(evolve(&rho, &p(1.0, 0.0), &bad).is_err());
    }

    #[test]
    fn direct_vacuum_without_pump() {
        let r = steady_state_direct(&p(0.0, 2.0), 10).unwrap();
        assert!((r.state.population(0) - 1.0).abs() < 1e-14);
        assert!(r.observables.n.abs() < 1e-14);
    }

    #[test]
    fn exact_moments_at_zero_detuning() {
        for g in [1.0, 2.0, 6.0] {
            let x: f64 = g / 2.0;
            let r = steady_state_direct(&p(g, 0.0), 40).unwrap();
            assert!((r.observables.psi.re - x).abs() < 1e-8 * x, "{g}");
            assert!(r.observables.psi.im.abs() < 1e-10);
            assert!((r.observables.n - x * x.tanh()).abs() < 1e-8 * x);
            assert!(r.residual <= DIRECT_RESIDUAL_TOL);
        }
    }

    #[test]
    fn evolve_and_direct_agree() {
        let params = p(3.0, 2.0);
        let a = steady_state_direct(&params, 24).unwrap();
        let b = steady_state_evolve(&params, 24, &SteadyConfig::default()).unwrap();
        assert!(b.residual < 1e-8);
        assert!((a.observables.psi - b.observables.psi).norm() < 1e-7);
        assert!((a.observables.n - b.observables.n).abs() < 1e-7);
    }

    #[test]
    fn auto_cutoff_adequate_fixed_cutoff_not() {
        let params = p(12.0, 0.0);
        let opts = SteadyOptions {
            cutoff: None,
            ..SteadyOptions::default()
        };
        let r = steady_state_auto(&params, &opts).unwrap();
        assert!(r.truncation_ok());
        let fixed = SteadyOptions {
            cutoff: Some(14),
            ..SteadyOptions::default()
        };
        assert!(matches!(
            steady_state_auto(&params, &fixed),
            Err(Error::TruncationInadequate { .. })
        ));
    }

    #[test]
    fn direct_rejects_tiny_cutoff() {
        assert!(matches!(
            steady_state_direct(&p(1.0, 0.0), 3),
            Err(Error::InvalidCutoff { .. })
        ));
    }
}
