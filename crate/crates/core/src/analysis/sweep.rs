use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::master::{steady_state_auto, SteadyOptions};
use crate::meanfield::{steady_psi, MeanFieldConfig};
use crate::params::EffectiveParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Exact steady state of the truncated master equation.
    Master,
    /// Stationary point of the reduced mean-field equation, reached by
    /// integration from the vacuum.
    #[serde(rename = "meanfield")]
    MeanField,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Master => "master",
            Backend::MeanField => "meanfield",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "master" => Ok(Backend::Master),
            "meanfield" => Ok(Backend::MeanField),
            other => Err(Error::InvalidParameter(format!(
                "unknown backend '{other}' (expected master or meanfield)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub gamma: f64,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    pub master: SteadyOptions,
    pub meanfield: MeanFieldConfig,
    pub meanfield_t_cap: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            workers: 0,
            master: SteadyOptions::default(),
            meanfield: MeanFieldConfig::default(),
            meanfield_t_cap: 1e4,
        }
    }
}

/// Steady state at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub delta: f64,
    pub g: f64,
    pub psi: Complex64,
    pub abs_psi: f64,
    pub n: f64,
    pub converged: bool,
    /// Fock cutoff actually used (master backend).
    pub cutoff: Option<usize>,
    /// Generator residual (master) or `|dpsi/dt|` (mean field).
    pub residual: f64,
    pub error: Option<String>,
}

impl PointResult {
    fn failed(delta: f64, g: f64, err: &Error) -> Self {
        let cutoff = match err {
            Error::TruncationInadequate { cutoff, .. } => Some(*cutoff),
            _ => None,
        };
        Self {
            delta,
            g,
            psi: Complex64::new(f64::NAN, f64::NAN),
            abs_psi: f64::NAN,
            n: f64::NAN,
            converged: false,
            cutoff,
            residual: f64::NAN,
            error: Some(err.to_string()),
        }
    }
}

/// Solve one point; failures are returned, not flagged.
pub fn solve_point(
    backend: Backend,
    delta: f64,
    g: f64,
    options: &SweepOptions,
) -> Result<PointResult> {
    let params = EffectiveParams::new(g, options.gamma, delta)?;
    match backend {
        Backend::Master => {
            let r = steady_state_auto(&params, &options.master)?;
            Ok(PointResult {
                delta,
                g,
                psi: r.observables.psi,
                abs_psi: r.observables.abs_psi(),
                n: r.observables.n,
                converged: true,
                cutoff: Some(r.cutoff),
                residual: r.residual,
                error: None,
            })
        }
        Backend::MeanField => {
            let s = steady_psi(&params, &options.meanfield, options.meanfield_t_cap)?;
            Ok(PointResult {
                delta,
                g,
                psi: s.psi,
                abs_psi: s.psi.norm(),
                n: s.n,
                converged: true,
                cutoff: None,
                residual: crate::meanfield::mf_rhs(s.psi, &params).norm(),
                error: None,
            })
        }
    }
}

/// Steady states on a `(delta, g)` grid, stored delta-major:
/// `points[i * g_axis.len() + j]` belongs to `(delta_axis[i], g_axis[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub backend: Backend,
    pub delta_axis: Vec<f64>,
    pub g_axis: Vec<f64>,
    pub points: Vec<PointResult>,
}

impl SweepGrid {
    pub fn at(&self, i_delta: usize, j_g: usize) -> &PointResult {
        &self.points[i_delta * self.g_axis.len() + j_g]
    }

    pub fn converged_count(&self) -> usize {
        self.points.iter().filter(|p| p.converged).count()
    }
}

pub(crate) fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} axis is empty")));
    }
    if axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{name} axis has non-finite values"
        )));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "{name} axis must be strictly increasing"
        )));
    }
    Ok(())
}

/// Run `f` on a pool of `workers` threads (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Steady states over the grid. Points run concurrently; each failure is
/// recorded on its point, and only a sweep in which every point fails is an
/// error.
pub fn sweep(
    backend: Backend,
    delta_axis: &[f64],
    g_axis: &[f64],
    options: &SweepOptions,
) -> Result<SweepGrid> {
    check_axis("delta", delta_axis)?;
    check_axis("g", g_axis)?;
    if g_axis[0] < 0.0 {
        return Err(Error::InvalidParameter(
            "pump rates must be non-negative".to_string(),
        ));
    }
    EffectiveParams::new(0.0, options.gamma, 0.0)?;

    let nodes: Vec<(f64, f64)> = delta_axis
        .iter()
        .flat_map(|&d| g_axis.iter().map(move |&g| (d, g)))
        .collect();
    let points = with_workers(options.workers, || {
        nodes
            .par_iter()
            .map(|&(d, g)| {
                solve_point(backend, d, g, options)
                    .unwrap_or_else(|e| PointResult::failed(d, g, &e))
            })
            .collect::<Vec<_>>()
    })?;
    let grid = SweepGrid {
        backend,
        delta_axis: delta_axis.to_vec(),
        g_axis: g_axis.to_vec(),
        points,
    };
    if grid.converged_count() == 0 {
        return Err(Error::SweepFailed);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::psi_qf;

    #[test]
    fn meanfield_matches_closed_form() {
        let deltas = [0.0, 0.5, 1.5, 3.0];
        let gs = [0.5, 1.0, 2.5];
        let grid = sweep(Backend::MeanField, &deltas, &gs, &SweepOptions::default()).unwrap();
        for (i, &d) in deltas.iter().enumerate() {
            for (j, &g) in gs.iter().enumerate() {
                let want = psi_qf(&EffectiveParams::new(g, 1.0, d).unwrap())
                    .unwrap()
                    .psi_abs;
                assert!((grid.at(i, j).abs_psi - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn failures_are_flagged() {
        let opts = SweepOptions {
            master: SteadyOptions {
                cutoff: Some(6),
                ..SteadyOptions::default()
            },
            ..SweepOptions::default()
        };
        // g = 0 succeeds at any cutoff, g = 8 cannot fit in 6 levels.
        let grid = sweep(Backend::Master, &[0.0], &[0.0, 8.0], &opts).unwrap();
        assert!(grid.at(0, 0).converged);
        let bad = grid.at(0, 1);
        assert!(!bad.converged);
        assert_eq!(bad.cutoff, Some(6));
        assert!(bad.abs_psi.is_nan());
        assert!(matches!(
            sweep(Backend::Master, &[0.0], &[8.0], &opts),
            Err(Error::SweepFailed)
        ));
    }

    #[test]
    fn axes_validated() {
        let o = SweepOptions::default();
        assert!(sweep(Backend::MeanField, &[], &[1.0], &o).is_err());
        assert!(sweep(Backend::MeanField, &[1.0, 0.5], &[1.0], &o).is_err());
        assert!(sweep(Backend::MeanField, &[0.0], &[-1.0], &o).is_err());
    }

    #[test]
    fn order_independent_of_workers() {
        let deltas = [0.0, 1.0, 2.0];
        let gs = [1.0, 2.0, 3.0, 4.0];
        let one = sweep(
            Backend::Master,
            &deltas,
            &gs,
            &SweepOptions {
                workers: 1,
                ..SweepOptions::default()
            },
        )
        .unwrap();
        let four = sweep(
            Backend::Master,
            &deltas,
            &gs,
            &SweepOptions {
                workers: 4,
                ..SweepOptions::default()
            },
        )
        .unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn backend_names_round_trip() {
        for b in [Backend::Master, Backend::MeanField] {
            assert_eq!(b.name().parse::<Backend>().unwrap(), b);
            assert_eq!(
                serde_json::to_string(&b).unwrap(),
                format!("\"{}\"", b.name())
            );
        }
        assert!("exact".parse::<Backend>().is_err());
    }
}
