use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::log_axis;
use super::sweep::{solve_point, with_workers, Backend, SweepOptions};
use crate::error::{Error, Result};

/// Fewest points a power-law fit accepts.
pub const MIN_FIT_POINTS: usize = 5;
/// Below this coefficient of determination a fit carries a warning.
pub const GOOD_FIT_R2: f64 = 0.99;

/// Least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
}

pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    let n = points.len();
    if n < 3 {
        return Err(Error::FitRefused(format!(
            "a line with error bars needs 3 points, got {n}"
        )));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::FitRefused("non-finite sample".to_string()));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitRefused("all abscissae coincide".to_string()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr: (sse / (nf - 2.0) / sxx).sqrt(),
        r_squared,
    })
}

/// Exponent from the fit with one end point dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub without_first: f64,
    pub without_last: f64,
}

/// `|psi| ~ g^(1/delta)` along the line `detuning = g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub backend: Backend,
    /// `(ln g, ln |psi|)`
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub delta_exponent: f64,
    pub delta_stderr: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub sensitivity: Sensitivity,
    pub warning: Option<String>,
}

/// Fit `ln |psi| = intercept + ln g / delta` to `(g, |psi|)` samples.
pub fn fit_power_law(backend: Backend, samples: &[(f64, f64)]) -> Result<PowerLawFit> {
    if samples.len() < MIN_FIT_POINTS {
        return Err(Error::FitRefused(format!(
            "at least {MIN_FIT_POINTS} points are required, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|&(g, a)| !(g > 0.0 && a > 0.0)) {
        return Err(Error::FitRefused(
            "log-log fit needs positive g and |psi|".to_string(),
        ));
    }
    let points: Vec<(f64, f64)> = samples.iter().map(|&(g, a)| (g.ln(), a.ln())).collect();
    let line = fit_line(&points)?;
    let exponent = |l: &LineFit| 1.0 / l.slope;
    let n = points.len();
    let sensitivity = Sensitivity {
        without_first: exponent(&fit_line(&points[1..])?),
        without_last: exponent(&fit_line(&points[..n - 1])?),
    };
    let warning = (line.r_squared < GOOD_FIT_R2).then(|| {
        format!(
            "poor power-law fit: r^2 = {:.4} < {GOOD_FIT_R2}",
            line.r_squared
        )
    });
    let window = (samples[0].0, samples[n - 1].0);
    Ok(PowerLawFit {
        backend,
        points,
        slope: line.slope,
        intercept: line.intercept,
        delta_exponent: exponent(&line),
        // First-order propagation through 1 / slope.
        delta_stderr: line.slope_stderr / (line.slope * line.slope),
        r_squared: line.r_squared,
        window,
        sensitivity,
        warning,
    })
}

/// Steady `|psi|` at `n_points` log-spaced pump rates on the line
/// `detuning = g` and the power-law fit through them.
pub fn fit_exponent(
    backend: Backend,
    window: (f64, f64),
    n_points: usize,
    options: &SweepOptions,
) -> Result<PowerLawFit> {
    if n_points < MIN_FIT_POINTS {
        return Err(Error::FitRefused(format!(
            "at least {MIN_FIT_POINTS} points are required, got {n_points}"
        )));
    }
    let gs = log_axis(window.0, window.1, n_points)?;
    let samples = with_workers(options.workers, || {
        gs.par_iter()
            .map(|&g| solve_point(backend, g, g, options).map(|p| (g, p.abs_psi)))
            .collect::<Result<Vec<_>>>()
    })??;
    fit_power_law(backend, &samples)
}
