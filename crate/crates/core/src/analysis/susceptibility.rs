use serde::{Deserialize, Serialize};

use super::sweep::{Backend, SweepGrid};
use crate::error::{Error, Result};

/// Location of the largest susceptibility over detuning at one pump rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    pub g: f64,
    /// Refined position; `None` when no valid cell exists at this `g`.
    pub delta: Option<f64>,
    /// Index of the grid node holding the maximum.
    pub node: Option<usize>,
}

/// `chi = d|psi|/dg` on the sweep grid, indexed like [`SweepGrid::points`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityMap {
    pub backend: Backend,
    pub delta_axis: Vec<f64>,
    pub g_axis: Vec<f64>,
    /// `None` where a stencil member did not converge.
    pub chi: Vec<Option<f64>>,
    /// `chi` divided by the maximum of its fixed-delta row.
    pub chi_norm: Vec<Option<f64>>,
    pub ridge: Vec<RidgePoint>,
}

impl SusceptibilityMap {
    pub fn chi_at(&self, i_delta: usize, j_g: usize) -> Option<f64> {
        self.chi[i_delta * self.g_axis.len() + j_g]
    }
}

/// Finite differences along `g`: central in the interior, one-sided at the
/// ends, valid on non-uniform axes.
pub fn susceptibility(grid: &SweepGrid) -> Result<SusceptibilityMap> {
    let ng = grid.g_axis.len();
    let nd = grid.delta_axis.len();
    if ng < 3 {
        return Err(Error::InvalidParameter(format!(
            "susceptibility needs at least 3 pump rates, got {ng}"
        )));
    }
    let g = &grid.g_axis;
    let mut chi = Vec::with_capacity(nd * ng);
    for i in 0..nd {
        let value = |j: usize| {
            let p = grid.at(i, j);
            p.converged.then_some(p.abs_psi)
        };
        for j in 0..ng {
            let (a, b) = match j {
                0 => (0, 1),
                j if j == ng - 1 => (ng - 2, ng - 1),
                j => (j - 1, j + 1),
            };
            // One-sided ends still require the node itself to be valid.
            let own = value(j);
            chi.push(match (value(a), value(b), own) {
                (Some(fa), Some(fb), Some(_)) => Some((fb - fa) / (g[b] - g[a])),
                _ => None,
            });
        }
    }
    let chi_norm = normalize_rows(&chi, ng);
    let ridge = ridge(&grid.delta_axis, g, &chi);
    Ok(SusceptibilityMap {
        backend: grid.backend,
        delta_axis: grid.delta_axis.clone(),
        g_axis: grid.g_axis.clone(),
        chi,
        chi_norm,
        ridge,
    })
}

/// Divide each row of length `row_len` by its largest valid entry. Rows
/// whose maximum is not positive are left untouched.
pub fn normalize_rows(values: &[Option<f64>], row_len: usize) -> Vec<Option<f64>> {
    values
        .chunks(row_len)
        .flat_map(|row| {
            let max = row
                .iter()
                .flatten()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            row.iter()
                .map(move |v| v.map(|x| if max > 0.0 { x / max } else { x }))
        })
        .collect()
}

/// Vertex of the parabola through three points, clamped to the bracket.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d12 - d01) / (x[2] - x[0]);
    if !(curv < 0.0) {
        return x[1];
    }
    // y' = d01 + curv (2 t - x0 - x1) = 0
    let t = 0.5 * (x[0] + x[1] - d01 / curv);
    t.clamp(x[0], x[2])
}

/// Arg-max over detuning at every pump rate, refined by a three-point
/// parabola. A node at `delta = 0` is refined with its mirror image, since
/// `chi` is even in the detuning. Ties go to the smaller `|delta|`.
fn ridge(deltas: &[f64], gs: &[f64], chi: &[Option<f64>]) -> Vec<RidgePoint> {
    let ng = gs.len();
    let cell = |i: usize, j: usize| chi[i * ng + j];
    gs.iter()
        .enumerate()
        .map(|(j, &g)| {
            let mut best: Option<(usize, f64)> = None;
            for (i, d) in deltas.iter().enumerate() {
                let Some(v) = cell(i, j) else { continue };
                best = match best {
                    None => Some((i, v)),
                    Some((bi, bv)) if v > bv || (v == bv && d.abs() < deltas[bi].abs()) => {
                        Some((i, v))
                    }
                    keep => keep,
                };
            }
            let Some((i, v)) = best else {
                return RidgePoint {
                    g,
                    delta: None,
                    node: None,
                };
            };
            let below = if i > 0 {
                cell(i - 1, j).map(|y| (deltas[i - 1], y))
            } else if deltas[i] == 0.0 && deltas.len() > 1 {
                cell(1, j).map(|y| (-deltas[1], y))
            } else {
                None
            };
            let above = if i + 1 < deltas.len() {
                cell(i + 1, j).map(|y| (deltas[i + 1], y))
            } else {
                None
            };
            let delta = match (below, above) {
                (Some((x0, y0)), Some((x2, y2))) => {
                    parabola_vertex([x0, deltas[i], x2], [y0, v, y2])
                }
                _ => deltas[i],
            };
            RidgePoint {
                g,
                delta: Some(delta),
                node: Some(i),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub g_th: f64,
    /// Pump-grid spacing at the crossing.
    pub error_bar: f64,
    /// Detuning the ridge had to exceed.
    pub delta_spacing: f64,
}

/// Smallest pump rate at which the ridge leaves `delta = 0` by more than one
/// detuning spacing, located by bisection on the piecewise-linear ridge.
pub fn find_threshold(map: &SusceptibilityMap) -> Result<Threshold> {
    let g_min = map.g_axis.first().copied().unwrap_or(f64::NAN);
    let g_max = map.g_axis.last().copied().unwrap_or(f64::NAN);
    let points: Vec<(f64, f64)> = map
        .ridge
        .iter()
        .filter_map(|r| r.delta.map(|d| (r.g, d.abs())))
        .collect();
    if points.len() < 2 || map.delta_axis.len() < 2 {
        return Err(Error::NoThreshold { g_min, g_max });
    }
    let spacing = map
        .delta_axis
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let Some(k) = points.iter().position(|&(_, d)| d > spacing) else {
        return Err(Error::NoThreshold { g_min, g_max });
    };
    if k == 0 {
        return Err(Error::InvalidParameter(format!(
            "the ridge is already off delta = 0 at g = {}; start the pump range lower",
            points[0].0
        )));
    }
    let (g0, d0) = points[k - 1];
    let (g1, d1) = points[k];
    let interp = |g: f64| d0 + (d1 - d0) * (g - g0) / (g1 - g0);
    let (mut lo, mut hi) = (g0, g1);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if interp(mid) > spacing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Threshold {
        g_th: 0.5 * (lo + hi),
        error_bar: g1 - g0,
        delta_spacing: spacing,
    })
}
