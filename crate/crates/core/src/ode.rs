//! Adaptive Dormand-Prince 5(4) integration of complex-valued ODE systems.
//!
//! Step-size control follows the PI controller of Hairer's `dopri5`. The
//! integrator lands exactly on every requested checkpoint and reports each
//! accepted step together with the derivative at its end point (first same
//! as last), which callers use to detect stationarity for free.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[Complex64], dydt: &mut [Complex64]);
}

/// Observer verdict after an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug)]
pub enum Event<'a> {
    Checkpoint {
        index: usize,
        t: f64,
        y: &'a [Complex64],
    },
    Step {
        t: f64,
        y: &'a [Complex64],
        dydt: &'a [Complex64],
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub t: f64,
    pub stats: StepStats,
    /// True when the observer asked to stop before `t_final`.
    pub stopped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DormandPrince {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for DormandPrince {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            h_max: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN_INV: f64 = 1.0 / 10.0; // at most 10x growth
const FAC_MAX_INV: f64 = 5.0; // at most 5x shrink

struct Work {
    k: [Vec<Complex64>; 7],
    tmp: Vec<Complex64>,
    y_new: Vec<Complex64>,
}

impl DormandPrince {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol >= 0.0 && self.h_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "integrator tolerances must be positive (rel {}, abs {}, h_max {})",
                self.rel_tol, self.abs_tol, self.h_max
            )));
        }
        Ok(())
    }

    fn initial_step<S: OdeSystem>(
        &self,
        sys: &S,
        t: f64,
        y: &[Complex64],
        f0: &[Complex64],
        w: &mut Work,
    ) -> (f64, usize) {
        let n = y.len().max(1) as f64;
        let scaled = |v: &[Complex64]| -> f64 {
            (v.iter()
                .zip(y)
                .map(|(a, b)| {
                    let sc = self.abs_tol + self.rel_tol * b.norm();
                    (a.norm() / sc).powi(2)
                })
                .sum::<f64>()
                / n)
                .sqrt()
        };
        let d0 = scaled(y);
        let d1 = scaled(f0);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(self.h_max);
        for (i, v) in w.tmp.iter_mut().enumerate() {
            *v = y[i] + f0[i] * h0;
        }
        let f1 = &mut w.k[1];
        sys.rhs(t + h0, &w.tmp, f1);
        let diff: Vec<Complex64> = f1.iter().zip(f0).map(|(a, b)| (a - b) / h0).collect();
        let d2 = scaled(&diff);
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dm).powf(0.2)
        };
        ((100.0 * h0).min(h1).min(self.h_max), 1)
    }

    /// Integrate `y` in place from `t0` to `t_final`.
    ///
    /// `checkpoints` must be non-decreasing; points outside `[t0, t_final]`
    /// are ignored. The observer sees each checkpoint and each accepted step
    /// and may stop the integration early.
    pub fn integrate<S, F>(
        &self,
        sys: &S,
        t0: f64,
        y: &mut [Complex64],
        t_final: f64,
        checkpoints: &[f64],
        mut observe: F,
    ) -> Result<Outcome>
    where
        S: OdeSystem,
        F: FnMut(Event<'_>) -> Result<Flow>,
    {
        self.validate()?;
        let n = sys.dim();
        if y.len() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                found: y.len(),
            });
        }
        if !(t_final >= t0) || !t0.is_finite() || !t_final.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "integration interval [{t0}, {t_final}] is invalid"
            )));
        }

        let zero = Complex64::new(0.0, 0.0);
        let mut w = Work {
            k: std::array::from_fn(|_| vec![zero; n]),
            tmp: vec![zero; n],
            y_new: vec![zero; n],
        };
        let mut stats = StepStats::default();
        let mut t = t0;

        let mut next_cp = 0;
        while next_cp < checkpoints.len() && checkpoints[next_cp] < t0 {
            next_cp += 1;
        }
        while next_cp < checkpoints.len() && checkpoints[next_cp] <= t0 {
            if observe(Event::Checkpoint {
                index: next_cp,
                t,
                y,
            })? == Flow::Stop
            {
                return Ok(Outcome {
                    t,
                    stats,
                    stopped: true,
                });
            }
            next_cp += 1;
        }
        if t_final == t0 {
            return Ok(Outcome {
                t,
                stats,
                stopped: false,
            });
        }

        sys.rhs(t, y, &mut w.k[0]);
        stats.rhs_evals += 1;
        let (mut h, evals) = {
            let f0 = w.k[0].clone();
            self.initial_step(sys, t, y, &f0, &mut w)
        };
        stats.rhs_evals += evals;

        let mut fac_old = 1e-4_f64;
        let mut last_rejected = false;
        let span = (t_final - t0).abs().max(t0.abs());

        loop {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::IntegrationFailure {
                    t,
                    reason: format!("step budget of {} exhausted", self.max_steps),
                });
            }
            let target = if next_cp < checkpoints.len() && checkpoints[next_cp] < t_final {
                checkpoints[next_cp]
            } else {
                t_final
            };
            let h_proposed = h;
            let mut clipped = false;
            if t + h >= target - 1e-13 * span {
                h = target - t;
                clipped = true;
            }
            if h <= 1e-14 * span.max(1.0) && !clipped {
                return Err(Error::IntegrationFailure {
                    t,
                    reason: format!("step size underflow (h = {h:.3e})"),
                });
            }

            self.stages(sys, t, y, h, &mut w);
            stats.rhs_evals += 6;

            let mut err_acc = 0.0;
            let mut finite = true;
            {
                let k = &w.k;
                for i in 0..n {
                    let e = (k[0][i] * E1
                        + k[2][i] * E3
                        + k[3][i] * E4
                        + k[4][i] * E5
                        + k[5][i] * E6
                        + k[6][i] * E7)
                        * h;
                    let sc = self.abs_tol + self.rel_tol * y[i].norm().max(w.y_new[i].norm());
                    let r = e.norm() / sc;
                    err_acc += r * r;
                    finite &= w.y_new[i].re.is_finite() && w.y_new[i].im.is_finite();
                }
            }
            if !finite {
                return Err(Error::IntegrationFailure {
                    t,
                    reason: "state became non-finite".to_string(),
                });
            }
            let err = (err_acc / n.max(1) as f64).sqrt();

            let fac11 = err.powf(EXPO1);
            if err <= 1.0 {
                let mut fac = fac11 / fac_old.powf(BETA);
                fac = FAC_MIN_INV.max(FAC_MAX_INV.min(fac / SAFETY));
                let mut h_new = (h / fac).min(self.h_max);
                if last_rejected {
                    h_new = h_new.min(h);
                }
                fac_old = err.max(1e-4);
                last_rejected = false;
                stats.accepted += 1;

                t = if clipped { target } else { t + h };
                y.copy_from_slice(&w.y_new);
                w.k.swap(0, 6);

                if observe(Event::Step {
                    t,
                    y,
                    dydt: &w.k[0],
                })? == Flow::Stop
                {
                    return Ok(Outcome {
                        t,
                        stats,
                        stopped: true,
                    });
                }
                if clipped {
                    while next_cp < checkpoints.len() && checkpoints[next_cp] <= t + 1e-13 * span {
                        if observe(Event::Checkpoint {
                            index: next_cp,
                            t,
                            y,
                        })? == Flow::Stop
                        {
                            return Ok(Outcome {
                                t,
                                stats,
                                stopped: true,
                            });
                        }
                        next_cp += 1;
                    }
                    if target == t_final && t >= t_final - 1e-13 * span {
                        return Ok(Outcome {
                            t,
                            stats,
                            stopped: false,
                        });
                    }
                    h_new = h_new.max(h_proposed.min(self.h_max));
                }
                h = h_new;
            } else {
                h /= FAC_MAX_INV.min(fac11 / SAFETY);
                last_rejected = true;
                stats.rejected += 1;
            }
        }
    }

    fn stages<S: OdeSystem>(&self, sys: &S, t: f64, y: &[Complex64], h: f64, w: &mut Work) {
        let n = y.len();
        let Work { k, tmp, y_new } = w;
        let [k1, k2, k3, k4, k5, k6, k7] = k;

        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (h * A21);
        }
        sys.rhs(t + C2 * h, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        sys.rhs(t + C3 * h, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        sys.rhs(t + C4 * h, tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        sys.rhs(t + C5 * h, tmp, k5);
        for i in 0..n {
            tmp[i] =
                y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        sys.rhs(t + h, tmp, k6);
        for i in 0..n {
            y_new[i] =
                y[i] + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
        }
        sys.rhs(t + h, y_new, k7);
    }

    /// Convenience wrapper: integrate to `t_final` and return the end state.
    pub fn solve<S: OdeSystem>(
        &self,
        sys: &S,
        t0: f64,
        y0: &[Complex64],
        t_final: f64,
    ) -> Result<(Vec<Complex64>, StepStats)> {
        let mut y = y0.to_vec();
        let out = self.integrate(sys, t0, &mut y, t_final, &[], |_| Ok(Flow::Continue))?;
        Ok((y, out.stats))
    }
}

/// Evenly spaced sample times `0, t_max/(n-1), ..., t_max`.
pub fn uniform_times(t_max: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![t_max],
        _ => (0..samples)
            .map(|i| {
                if i + 1 == samples {
                    t_max
                } else {
                    t_max * i as f64 / (samples - 1) as f64
                }
            })
            .collect(),
    }
}
