//! Mean-field dynamics with the pairing ("Cooper") decoupling of the quartic
//! moments.
//!
//! Two equivalent formulations are integrated: the equal-time Keldysh pair
//! `G = 2n + 1`, `F = 2 psi`, and the reduced equation for `psi` alone that
//! follows from the conserved quantity `G^2 - |F|^2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{uniform_times, DormandPrince, Event, Flow, OdeSystem, StepStats};
use crate::params::EffectiveParams;

/// Green-pair invariant drift beyond which integration is aborted.
pub const INVARIANT_ABORT: f64 = 1e-6;

/// `d psi / dt = -2i delta psi + sqrt(1 + 4|psi|^2) (g - 2 gamma psi)`.
pub fn mf_rhs(psi: Complex64, params: &EffectiveParams) -> Complex64 {
    let i = Complex64::i();
    let root = (1.0 + 4.0 * psi.norm_sqr()).sqrt();
    -2.0 * i * params.delta() * psi + root * (params.g() - 2.0 * params.gamma() * psi)
}

/// Photon number slaved to `psi` through the conserved quantity.
pub fn n_from_psi(psi: Complex64) -> f64 {
    // (sqrt(1 + 4x) - 1) / 2 written without cancellation at small x.
    let x = psi.norm_sqr();
    2.0 * x / ((1.0 + 4.0 * x).sqrt() + 1.0)
}

/// Equal-time Keldysh functions `G = 2n + 1` and `F = 2 psi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenPair {
    pub g: f64,
    pub f: Complex64,
}

impl GreenPair {
    pub const VACUUM: GreenPair = GreenPair {
        g: 1.0,
        f: Complex64 { re: 0.0, im: 0.0 },
    };

    /// `G^2 - |F|^2`, equal to one from the vacuum.
    pub fn invariant(&self) -> f64 {
        self.g * self.g - self.f.norm_sqr()
    }

    pub fn n(&self) -> f64 {
        (self.g - 1.0) / 2.0
    }

    pub fn psi(&self) -> Complex64 {
        self.f / 2.0
    }
}

/// Right-hand side of the Green pair with `g_eff = g - gamma F`:
/// `dG/dt = g_eff F* + g_eff* F`, `dF/dt = -2i delta F + 2 g_eff G`.
pub fn green_rhs(pair: &GreenPair, params: &EffectiveParams) -> (f64, Complex64) {
    let g_eff = params.g() - params.gamma() * pair.f;
    let dg = 2.0 * (g_eff.conj() * pair.f).re;
    let df = -2.0 * Complex64::i() * params.delta() * pair.f + 2.0 * g_eff * pair.g;
    (dg, df)
}

/// Decoupling of the quartic moments in the exact moment equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoupling {
    /// `<a'^2 a^2> -> |psi|^2`, `<(2a'a + 1) a^2> -> psi (2n + 1)`.
    Cooper,
    /// Full Gaussian factorisation, adding the density channel:
    /// `<a'^2 a^2> -> |psi|^2 + 2n^2`, `<(2a'a + 1) a^2> -> psi (6n + 1)`.
    Density,
}

/// `(dn/dt, dpsi/dt)` from the exact moment equations under a decoupling.
///
/// With [`Decoupling::Cooper`] this is the Green-pair flow in `(n, psi)`
/// variables. The density variant is offered for comparison only.
pub fn moment_rhs(
    n: f64,
    psi: Complex64,
    params: &EffectiveParams,
    decoupling: Decoupling,
) -> (f64, Complex64) {
    let g = params.g();
    let gamma = params.gamma();
    let (pairs, mixed) = match decoupling {
        Decoupling::Cooper => (psi.norm_sqr(), psi * (2.0 * n + 1.0)),
        Decoupling::Density => (psi.norm_sqr() + 2.0 * n * n, psi * (6.0 * n + 1.0)),
    };
    let dn = 2.0 * (g.conj() * psi).re - 4.0 * gamma * pairs;
    let dpsi =
        -2.0 * Complex64::i() * params.delta() * psi + g * (2.0 * n + 1.0) - 2.0 * gamma * mixed;
    (dn, dpsi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldConfig {
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub samples: usize,
    /// Stationarity threshold on `|dpsi/dt|`, in units of `max(gamma, |g|)`.
    pub rate_tol: f64,
}

impl Default for MeanFieldConfig {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            samples: 400,
            rate_tol: 1e-10,
        }
    }
}

impl MeanFieldConfig {
    fn check(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if self.samples < 2 {
            return Err(Error::InvalidParameter(
                "at least two samples are required".to_string(),
            ));
        }
        Ok(())
    }
}

fn rate_scale(params: &EffectiveParams) -> f64 {
    params.gamma().max(params.g_abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSample {
    pub t: f64,
    pub psi: Complex64,
    pub n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldTrajectory {
    pub samples: Vec<MeanFieldSample>,
    pub stats: StepStats,
    /// First accepted step at which `|dpsi/dt|` fell below the threshold.
    pub steady_since: Option<f64>,
}

struct Reduced<'a> {
    params: &'a EffectiveParams,
}

impl OdeSystem for Reduced<'_> {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, _t: f64, y: &[Complex64], dydt: &mut [Complex64]) {
        dydt[0] = mf_rhs(y[0], self.params);
    }
}

/// Integrate the reduced equation from `psi0` and record samples.
pub fn evolve_psi(
    psi0: Complex64,
    params: &EffectiveParams,
    config: &MeanFieldConfig,
) -> Result<MeanFieldTrajectory> {
    config.check()?;
    if !(psi0.re.is_finite() && psi0.im.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "initial psi must be finite, got {psi0}"
        )));
    }
    let sys = Reduced { params };
    let solver = DormandPrince::with_tolerances(config.rel_tol, config.abs_tol);
    let times = uniform_times(config.t_max, config.samples);
    let threshold = config.rate_tol * rate_scale(params);
    let mut y = [psi0];
    let mut samples = Vec::with_capacity(times.len());
    let mut steady_since = (mf_rhs(psi0, params).norm() <= threshold).then_some(0.0);
    let out = solver.integrate(&sys, 0.0, &mut y, config.t_max, &times, |ev| {
        match ev {
            Event::Checkpoint { t, y, .. } => samples.push(MeanFieldSample {
                t,
                psi: y[0],
                n: n_from_psi(y[0]),
            }),
            Event::Step { t, dydt, .. } => {
                if steady_since.is_none() && dydt[0].norm() <= threshold {
                    steady_since = Some(t);
                }
            }
        }
        Ok(Flow::Continue)
    })?;
    Ok(MeanFieldTrajectory {
        samples,
        stats: out.stats,
        steady_since,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSteady {
    pub psi: Complex64,
    pub n: f64,
    pub t: f64,
    pub stats: StepStats,
}

/// Integrate from the vacuum until `|dpsi/dt| <= rate_tol * max(gamma, |g|)`.
pub fn steady_psi(
    params: &EffectiveParams,
    config: &MeanFieldConfig,
    t_cap: f64,
) -> Result<MeanFieldSteady> {
    if !(t_cap > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_cap must be positive, got {t_cap}"
        )));
    }
    let sys = Reduced { params };
    let solver = DormandPrince::with_tolerances(config.rel_tol, config.abs_tol);
    let threshold = config.rate_tol * rate_scale(params);
    let mut y = [Complex64::new(0.0, 0.0)];
    if mf_rhs(y[0], params).norm() <= threshold {
        return Ok(MeanFieldSteady {
            psi: y[0],
            n: 0.0,
            t: 0.0,
            stats: StepStats::default(),
        });
    }
    let mut last_rate = f64::INFINITY;
    let out = solver.integrate(&sys, 0.0, &mut y, t_cap, &[], |ev| {
        if let Event::Step { dydt, .. } = ev {
            last_rate = dydt[0].norm();
            if last_rate <= threshold {
                return Ok(Flow::Stop);
            }
        }
        Ok(Flow::Continue)
    })?;
    if !out.stopped {
        return Err(Error::NotConverged {
            t: out.t,
            residual: last_rate,
        });
    }
    Ok(MeanFieldSteady {
        psi: y[0],
        n: n_from_psi(y[0]),
        t: out.t,
        stats: out.stats,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenSample {
    pub t: f64,
    pub pair: GreenPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenTrajectory {
    pub samples: Vec<GreenSample>,
    pub stats: StepStats,
    /// `G0^2 - |F0|^2`.
    pub invariant: f64,
    pub max_invariant_drift: f64,
}

struct Green<'a> {
    params: &'a EffectiveParams,
}

impl OdeSystem for Green<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, y: &[Complex64], dydt: &mut [Complex64]) {
        let pair = GreenPair {
            g: y[0].re,
            f: y[1],
        };
        let (dg, df) = green_rhs(&pair, self.params);
        dydt[0] = Complex64::new(dg, 0.0);
        dydt[1] = df;
    }
}

/// Integrate the Green pair, watching the invariant `G^2 - |F|^2`.
pub fn evolve_green(
    start: GreenPair,
    params: &EffectiveParams,
    config: &MeanFieldConfig,
) -> Result<GreenTrajectory> {
    config.check()?;
    if !(start.g.is_finite() && start.f.re.is_finite() && start.f.im.is_finite()) {
        return Err(Error::InvalidParameter(
            "initial Green functions must be finite".to_string(),
        ));
    }
    if start.g < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "G must be at least 1, got {}",
            start.g
        )));
    }
    let invariant = start.invariant();
    if invariant <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "G^2 - |F|^2 must be positive, got {invariant}"
        )));
    }
    let sys = Green { params };
    let solver = DormandPrince::with_tolerances(config.rel_tol, config.abs_tol);
    let times = uniform_times(config.t_max, config.samples);
    let mut y = [Complex64::new(start.g, 0.0), start.f];
    let mut samples = Vec::with_capacity(times.len());
    let mut worst = 0.0_f64;
    let out = solver.integrate(&sys, 0.0, &mut y, config.t_max, &times, |ev| {
        if let Event::Checkpoint { t, y, .. } = ev {
            let pair = GreenPair {
                g: y[0].re,
                f: y[1],
            };
            let drift = (pair.invariant() - invariant).abs();
            if drift > INVARIANT_ABORT * invariant.max(1.0) {
                return Err(Error::IntegrationFailure {
                    t,
                    reason: format!("G^2 - |F|^2 drifted by {drift:.3e}"),
                });
            }
            worst = worst.max(drift);
            samples.push(GreenSample { t, pair });
        }
        Ok(Flow::Continue)
    })?;
    Ok(GreenTrajectory {
        samples,
        stats: out.stats,
        invariant,
        max_invariant_drift: worst,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSample {
    pub t: f64,
    pub n: f64,
    pub psi: Complex64,
}

struct Moments<'a> {
    params: &'a EffectiveParams,
    decoupling: Decoupling,
}

impl OdeSystem for Moments<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, y: &[Complex64], dydt: &mut [Complex64]) {
        let (dn, dpsi) = moment_rhs(y[0].re, y[1], self.params, self.decoupling);
        dydt[0] = Complex64::new(dn, 0.0);
        dydt[1] = dpsi;
    }
}

/// Integrate the decoupled `(n, psi)` moment equations from the vacuum.
pub fn evolve_moments(
    params: &EffectiveParams,
    decoupling: Decoupling,
    config: &MeanFieldConfig,
) -> Result<(Vec<MomentSample>, StepStats)> {
    config.check()?;
    let sys = Moments { params, decoupling };
    let solver = DormandPrince::with_tolerances(config.rel_tol, config.abs_tol);
    let times = uniform_times(config.t_max, config.samples);
    let mut y = [Complex64::new(0.0, 0.0); 2];
    let mut samples = Vec::with_capacity(times.len());
    let out = solver.integrate(&sys, 0.0, &mut y, config.t_max, &times, |ev| {
        if let Event::Checkpoint { t, y, .. } = ev {
            samples.push(MomentSample {
                t,
                n: y[0].re,
                psi: y[1],
            });
        }
        Ok(Flow::Continue)
    })?;
    Ok((samples, out.stats))
}
