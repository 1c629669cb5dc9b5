use num_complex::Complex64;
use serde_json::{json, Value};
use twophoton::analysis::{
    curvature_scan, find_threshold, fit_exponent, solve_point, susceptibility, sweep,
    CurvatureScan, SusceptibilityMap,
};
use twophoton::io::{
    fmt_f64, write_fit_csv, write_meanfield_csv, write_ridge_csv, write_steady_csv,
    write_susceptibility_csv, write_sweep_csv, write_trajectory_csv, SteadySummary,
    TrajectorySummary,
};
use twophoton::meanfield::MeanFieldTrajectory;
use twophoton::{
    auto_cutoff, evolve, evolve_psi, steady_state_auto, Backend, DensityMatrix, EffectiveParams,
    Error, Observables, PowerLawFit, SweepGrid, Trajectory,
};

use crate::config::{CurvatureRun, EvolveRun, ExponentRun, GridRun, RunConfig, SteadyRun, Task};

/// Files to write and the summary for the manifest and stdout.
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: Value,
}

fn csv(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory cannot fail");
    buf
}

pub fn execute(config: &RunConfig) -> Result<Artifacts, Error> {
    let gamma = config.output.gamma;
    match &config.task {
        Task::Evolve(r) => run_evolve(r, gamma),
        Task::Steady(r) => run_steady(r, gamma),
        Task::Sweep(r) => run_grid(r, gamma, Stage::Sweep),
        Task::Susceptibility(r) => run_grid(r, gamma, Stage::Susceptibility),
        Task::Threshold(r) => run_grid(r, gamma, Stage::Threshold),
        Task::Exponent(r) => run_exponent(r, gamma),
        Task::Curvature(r) => run_curvature(r, gamma),
    }
}

fn evolve_master(r: &EvolveRun, params: &EffectiveParams) -> Result<Trajectory, Error> {
    let mut dim = r.cutoff.unwrap_or_else(|| auto_cutoff(params));
    let retries = if r.cutoff.is_some() { 0 } else { r.max_retries };
    let mut attempt = 0;
    loop {
        let rho0 = DensityMatrix::vacuum(dim)?;
        match evolve(&rho0, params, &r.master) {
            Err(Error::TruncationInadequate { .. }) if attempt < retries => {
                attempt += 1;
                dim = ((dim as f64) * r.growth).ceil() as usize;
            }
            other => return other,
        }
    }
}

fn run_evolve(r: &EvolveRun, gamma: f64) -> Result<Artifacts, Error> {
    let params = EffectiveParams::new(r.g, 1.0, r.delta)?;
    let mut files = Vec::new();
    let mut summaries = Vec::new();
    for backend in &r.backends {
        match backend {
            Backend::Master => {
                let mut traj = evolve_master(r, &params)?;
                summaries.push(TrajectorySummary::master(&traj));
                for s in &mut traj.samples {
                    s.t /= gamma;
                }
                files.push((
                    "evolve_master.csv".to_string(),
                    csv(|w| write_trajectory_csv(w, &traj)),
                ));
            }
            Backend::MeanField => {
                let mut traj: MeanFieldTrajectory =
                    evolve_psi(Complex64::new(0.0, 0.0), &params, &r.meanfield)?;
                summaries.push(TrajectorySummary::meanfield(params, &traj));
                for s in &mut traj.samples {
                    s.t /= gamma;
                }
                files.push((
                    "evolve_meanfield.csv".to_string(),
                    csv(|w| write_meanfield_csv(w, &traj)),
                ));
            }
        }
    }
    Ok(Artifacts {
        files,
        summary: json!({ "trajectories": summaries }),
    })
}

fn run_steady(r: &SteadyRun, _gamma: f64) -> Result<Artifacts, Error> {
    let params = EffectiveParams::new(r.g, 1.0, r.delta)?;
    let (obs, summary) = match r.backend {
        Backend::Master => {
            let report = steady_state_auto(&params, &r.solver.master)?;
            (
                report.observables,
                json!(SteadySummary::new(params, &report)),
            )
        }
        Backend::MeanField => {
            let p = solve_point(Backend::MeanField, r.delta, r.g, &r.solver)?;
            let obs = Observables {
                n: p.n,
                psi: p.psi,
                trace: f64::NAN,
                purity: f64::NAN,
                edge_weight: f64::NAN,
            };
            (
                obs,
                json!({ "backend": "meanfield", "psi": p.psi, "abs_psi": p.abs_psi, "n": p.n, "residual": p.residual }),
            )
        }
    };
    Ok(Artifacts {
        files: vec![("steady.csv".to_string(), csv(|w| write_steady_csv(w, &obs)))],
        summary,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stage {
    Sweep,
    Susceptibility,
    Threshold,
}

fn scale_grid(grid: &SweepGrid, gamma: f64) -> SweepGrid {
    let mut g = grid.clone();
    g.delta_axis.iter_mut().for_each(|x| *x *= gamma);
    g.g_axis.iter_mut().for_each(|x| *x *= gamma);
    for p in &mut g.points {
        p.delta *= gamma;
        p.g *= gamma;
    }
    g
}

fn scale_map(map: &SusceptibilityMap, gamma: f64) -> SusceptibilityMap {
    let mut m = map.clone();
    m.delta_axis.iter_mut().for_each(|x| *x *= gamma);
    m.g_axis.iter_mut().for_each(|x| *x *= gamma);
    m.chi.iter_mut().flatten().for_each(|x| *x /= gamma);
    for r in &mut m.ridge {
        r.g *= gamma;
        if let Some(d) = r.delta.as_mut() {
            *d *= gamma;
        }
    }
    m
}

fn run_grid(r: &GridRun, gamma: f64, stage: Stage) -> Result<Artifacts, Error> {
    let deltas = r.delta.nodes()?;
    let gs = r.g.nodes()?;
    let grid = sweep(r.backend, &deltas, &gs, &r.solver)?;
    let failed = grid.points.len() - grid.converged_count();
    let mut files = vec![(
        "sweep.csv".to_string(),
        csv(|w| write_sweep_csv(w, &scale_grid(&grid, gamma))),
    )];
    let mut summary = json!({
        "backend": r.backend,
        "points": grid.points.len(),
        "failed_points": failed,
    });
    if stage == Stage::Sweep {
        return Ok(Artifacts { files, summary });
    }
    let map = susceptibility(&grid)?;
    let threshold = if stage == Stage::Threshold {
        Some(find_threshold(&map)?)
    } else {
        None
    };
    let scaled = scale_map(&map, gamma);
    files.push((
        "susceptibility.csv".to_string(),
        csv(|w| write_susceptibility_csv(w, &scaled)),
    ));
    files.push((
        "ridge.csv".to_string(),
        csv(|w| write_ridge_csv(w, &scaled)),
    ));
    if let Some(th) = threshold {
        summary["g_th"] = json!(th.g_th * gamma);
        summary["error_bar"] = json!(th.error_bar * gamma);
        summary["delta_spacing"] = json!(th.delta_spacing * gamma);
    }
    Ok(Artifacts { files, summary })
}

fn scale_fit(fit: &PowerLawFit, gamma: f64) -> PowerLawFit {
    let mut f = fit.clone();
    let shift = gamma.ln();
    f.points.iter_mut().for_each(|p| p.0 += shift);
    f.intercept -= f.slope * shift;
    f.window = (f.window.0 * gamma, f.window.1 * gamma);
    f
}

fn run_exponent(r: &ExponentRun, gamma: f64) -> Result<Artifacts, Error> {
    let fit = fit_exponent(r.backend, (r.window.min, r.window.max), r.points, &r.solver)?;
    let fit = scale_fit(&fit, gamma);
    let summary = json!({
        "backend": r.backend,
        "delta_exponent": fit.delta_exponent,
        "delta_stderr": fit.delta_stderr,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "window": [fit.window.0, fit.window.1],
        "sensitivity": fit.sensitivity,
        "warning": fit.warning,
    });
    Ok(Artifacts {
        files: vec![("exponent.csv".to_string(), csv(|w| write_fit_csv(w, &fit)))],
        summary,
    })
}

fn write_curvature_csv(w: &mut Vec<u8>, scan: &CurvatureScan) -> std::io::Result<()> {
    use std::io::Write;
    writeln!(w, "g,curvature,closed_form")?;
    for p in &scan.points {
        writeln!(
            w,
            "{},{},{}",
            fmt_f64(p.g),
            fmt_f64(p.curvature),
            fmt_f64(p.closed_form)
        )?;
    }
    Ok(())
}

fn run_curvature(r: &CurvatureRun, gamma: f64) -> Result<Artifacts, Error> {
    let gs = r.g.nodes()?;
    let mut scan = curvature_scan(r.backend, &gs, Some(r.step), &r.solver)?;
    let g_ext = scan.extremum().map(|g| g * gamma);
    for p in &mut scan.points {
        p.g *= gamma;
        p.curvature /= gamma * gamma;
        p.closed_form /= gamma * gamma;
    }
    let summary = json!({
        "backend": r.backend,
        "step": r.step * gamma,
        "wide_stencil": scan.wide_stencil,
        "extremum_g": g_ext,
    });
    Ok(Artifacts {
        files: vec![(
            "curvature.csv".to_string(),
            csv(|w| write_curvature_csv(w, &scan)),
        )],
        summary,
    })
}
