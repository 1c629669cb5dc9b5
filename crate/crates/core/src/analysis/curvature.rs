use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::{check_axis, solve_point, with_workers, Backend, SweepOptions};
use crate::error::{Error, Result};
use crate::stationary::{curvature_delta0, curvature_delta0_fd};

/// Default detuning step of the master-equation stencil, in units of gamma.
pub const MASTER_CURVATURE_STEP: f64 = 1e-2;
/// Default detuning step of the mean-field stencil, in units of gamma.
pub const MEANFIELD_CURVATURE_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvaturePoint {
    pub g: f64,
    /// `d^2 |psi| / d delta^2` at `delta = 0` by a three-point stencil.
    pub curvature: f64,
    /// Closed-form mean-field value, for comparison.
    pub closed_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureScan {
    pub backend: Backend,
    pub step: f64,
    pub points: Vec<CurvaturePoint>,
    /// Set when the stencil step is not small against the detuning scale
    /// `gamma` on which `|psi|` varies near resonance.
    pub wide_stencil: bool,
}

impl CurvatureScan {
    /// Pump rate with the largest `|curvature|` on the scan grid.
    pub fn extremum(&self) -> Option<f64> {
        self.points
            .iter()
            .max_by(|a, b| a.curvature.abs().total_cmp(&b.curvature.abs()))
            .map(|p| p.g)
    }
}

pub fn default_step(backend: Backend) -> f64 {
    match backend {
        Backend::Master => MASTER_CURVATURE_STEP,
        Backend::MeanField => MEANFIELD_CURVATURE_STEP,
    }
}

/// Second difference of `|psi|` across `delta = 0` for each pump rate.
///
/// The mean-field stencil is evaluated on the closed-form stationary
/// amplitude: a second difference at step `1e-4` needs `|psi|` to roughly
/// sixteen digits, which the integrated stationary point does not carry. The
/// master stencil uses three steady-state solves.
pub fn curvature_scan(
    backend: Backend,
    g_axis: &[f64],
    step: Option<f64>,
    options: &SweepOptions,
) -> Result<CurvatureScan> {
    check_axis("g", g_axis)?;
    if g_axis[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "curvature scan needs positive pump rates".to_string(),
        ));
    }
    let gamma = options.gamma;
    let step = step.unwrap_or_else(|| default_step(backend) * gamma);
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "stencil step must be positive, got {step}"
        )));
    }
    let points = match backend {
        Backend::MeanField => g_axis
            .iter()
            .map(|&g| {
                Ok(CurvaturePoint {
                    g,
                    curvature: curvature_delta0_fd(g, gamma, step)?,
                    closed_form: curvature_delta0(g, gamma)?,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        Backend::Master => with_workers(options.workers, || {
            g_axis
                .par_iter()
                .map(|&g| {
                    let f = |d: f64| solve_point(Backend::Master, d, g, options).map(|p| p.abs_psi);
                    let (lo, mid, hi) = (f(-step)?, f(0.0)?, f(step)?);
                    Ok(CurvaturePoint {
                        g,
                        curvature: (lo - 2.0 * mid + hi) / (step * step),
                        closed_form: curvature_delta0(g, gamma)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })??,
    };
    Ok(CurvatureScan {
        backend,
        step,
        points,
        wide_stencil: step > 0.1 * gamma,
    })
}
