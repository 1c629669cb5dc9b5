//! CSV and JSON serialisation of run results.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), enough to
//! round-trip any `f64`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::analysis::{PowerLawFit, SusceptibilityMap, SweepGrid};
use crate::master::{Conservation, SteadyMethod, SteadyReport, Trajectory};
use crate::meanfield::MeanFieldTrajectory;
use crate::ode::StepStats;
use crate::params::EffectiveParams;
use crate::state::{Observables, TruncationReport};

/// Version of the CSV column layouts and JSON summaries.
pub const SCHEMA_VERSION: &str = "1.0.0";

pub const TRAJECTORY_HEADER: &str = "t,re_psi,im_psi,abs_psi,n,trace,purity,edge_weight";
pub const SWEEP_HEADER: &str = "delta,g,abs_psi,n,converged,cutoff";
pub const SUSCEPTIBILITY_HEADER: &str = "delta,g,chi,chi_norm";
pub const FIT_HEADER: &str = "log_g,log_psi";

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn row(w: &mut impl Write, fields: &[f64]) -> io::Result<()> {
    let line: Vec<String> = fields.iter().map(|&x| fmt_f64(x)).collect();
    writeln!(w, "{}", line.join(","))
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_trajectory_csv(w: &mut impl Write, traj: &Trajectory) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for s in &traj.samples {
        let o = &s.obs;
        row(
            w,
            &[
                s.t,
                o.psi.re,
                o.psi.im,
                o.abs_psi(),
                o.n,
                o.trace,
                o.purity,
                o.edge_weight,
            ],
        )?;
    }
    Ok(())
}

/// Mean-field rows carry no density matrix: trace, purity and edge weight
/// are written as `NaN`.
pub fn write_meanfield_csv(w: &mut impl Write, traj: &MeanFieldTrajectory) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for s in &traj.samples {
        row(
            w,
            &[
                s.t,
                s.psi.re,
                s.psi.im,
                s.psi.norm(),
                s.n,
                f64::NAN,
                f64::NAN,
                f64::NAN,
            ],
        )?;
    }
    Ok(())
}

/// Single-row trajectory-schema CSV of a steady state, at `t = NaN`.
pub fn write_steady_csv(w: &mut impl Write, obs: &Observables) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    row(
        w,
        &[
            f64::NAN,
            obs.psi.re,
            obs.psi.im,
            obs.abs_psi(),
            obs.n,
            obs.trace,
            obs.purity,
            obs.edge_weight,
        ],
    )
}

pub fn write_sweep_csv(w: &mut impl Write, grid: &SweepGrid) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for p in &grid.points {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(p.delta),
            fmt_f64(p.g),
            fmt_f64(p.abs_psi),
            fmt_f64(p.n),
            p.converged,
            p.cutoff.map(|c| c.to_string()).unwrap_or_default()
        )?;
    }
    Ok(())
}

/// Empty `chi` fields mark cells whose stencil touched a failed point.
pub fn write_susceptibility_csv(w: &mut impl Write, map: &SusceptibilityMap) -> io::Result<()> {
    writeln!(w, "{SUSCEPTIBILITY_HEADER}")?;
    let ng = map.g_axis.len();
    for (i, d) in map.delta_axis.iter().enumerate() {
        for (j, g) in map.g_axis.iter().enumerate() {
            let k = i * ng + j;
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(*d),
                fmt_f64(*g),
                opt(map.chi[k]),
                opt(map.chi_norm[k])
            )?;
        }
    }
    Ok(())
}

pub fn write_ridge_csv(w: &mut impl Write, map: &SusceptibilityMap) -> io::Result<()> {
    writeln!(w, "g,delta_max")?;
    for r in &map.ridge {
        writeln!(w, "{},{}", fmt_f64(r.g), opt(r.delta))?;
    }
    Ok(())
}

pub fn write_fit_csv(w: &mut impl Write, fit: &PowerLawFit) -> io::Result<()> {
    writeln!(w, "{FIT_HEADER}")?;
    for &(x, y) in &fit.points {
        row(w, &[x, y])?;
    }
    Ok(())
}

/// JSON-facing digest of a master-equation trajectory (everything but the
/// samples and the final density matrix).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub source: String,
    pub params: EffectiveParams,
    pub cutoff: Option<usize>,
    pub samples: usize,
    pub stats: StepStats,
    pub final_residual: Option<f64>,
    pub conservation: Option<Conservation>,
    pub final_abs_psi: f64,
    pub final_n: f64,
}

impl TrajectorySummary {
    pub fn master(traj: &Trajectory) -> Self {
        let last = traj.samples.last().map(|s| s.obs);
        Self {
            source: "master".to_string(),
            params: traj.params,
            cutoff: Some(traj.cutoff),
            samples: traj.samples.len(),
            stats: traj.stats,
            final_residual: Some(traj.final_residual),
            conservation: Some(traj.conservation),
            final_abs_psi: last.map_or(f64::NAN, |o| o.abs_psi()),
            final_n: last.map_or(f64::NAN, |o| o.n),
        }
    }

    pub fn meanfield(params: EffectiveParams, traj: &MeanFieldTrajectory) -> Self {
        let last = traj.samples.last();
        Self {
            source: "meanfield".to_string(),
            params,
            cutoff: None,
            samples: traj.samples.len(),
            stats: traj.stats,
            final_residual: None,
            conservation: None,
            final_abs_psi: last.map_or(f64::NAN, |s| s.psi.norm()),
            final_n: last.map_or(f64::NAN, |s| s.n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadySummary {
    pub params: EffectiveParams,
    pub method: SteadyMethod,
    pub cutoff: usize,
    pub observables: Observables,
    pub residual: f64,
    pub truncation: TruncationReport,
    pub t_converged: Option<f64>,
    pub stats: Option<StepStats>,
    pub condition_estimate: Option<f64>,
}

impl SteadySummary {
    pub fn new(params: EffectiveParams, r: &SteadyReport) -> Self {
        Self {
            params,
            method: r.method,
            cutoff: r.cutoff,
            observables: r.observables,
            residual: r.residual,
            truncation: r.truncation,
            t_converged: r.t_converged,
            stats: r.stats,
            condition_estimate: r.condition_estimate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{fit_power_law, sweep, Backend, SweepOptions};

    fn text(f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn sweep_csv_layout() {
        let grid = sweep(
            Backend::MeanField,
            &[0.0, 1.0],
            &[0.5, 1.5],
            &SweepOptions::default(),
        )
        .unwrap();
        let s = text(|w| write_sweep_csv(w, &grid));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines.len(), 5);
        let fields: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(fields.len(), 6);
        assert_eq!(fields[1].parse::<f64>().unwrap(), 1.5);
        assert_eq!(fields[4], "true");
        assert_eq!(fields[5], "");
    }

    #[test]
    fn fit_csv_layout() {
        let samples: Vec<(f64, f64)> = (1..=5).map(|k| (k as f64, (k as f64).sqrt())).collect();
        let fit = fit_power_law(Backend::MeanField, &samples).unwrap();
        let s = text(|w| write_fit_csv(w, &fit));
        assert_eq!(s.lines().next(), Some(FIT_HEADER));
        assert_eq!(s.lines().count(), 6);
    }
}
