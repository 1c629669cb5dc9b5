//! Closed-form stationary states of the mean-field equation and the exact
//! resonant solution.
//!
//! All formulas assume a real non-negative pump; rotate a complex pump away
//! with [`EffectiveParams::gauge_normalized`] first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::n_from_psi;
use crate::params::EffectiveParams;

fn require_real_pump(params: &EffectiveParams) -> Result<f64> {
    if !params.has_real_pump() {
        return Err(Error::InvalidParameter(format!(
            "stationary formulas need a real non-negative pump, got {}; gauge-normalise first",
            params.g()
        )));
    }
    Ok(params.g().re)
}

fn require_rates(g: f64, gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if !(g >= 0.0 && g.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "g must be non-negative, got {g}"
        )));
    }
    Ok(())
}

/// Resonant stationary state: the exact moments and the mean-field photon
/// number share `psi = g / 2 gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonantSolution {
    pub psi: f64,
    /// `psi tanh(psi)`, from the exact stationary density matrix.
    pub n_exact: f64,
    /// `(sqrt(1 + 4 psi^2) - 1) / 2`, mean field.
    pub n_meanfield: f64,
}

pub fn psi_exact_delta0(g: f64, gamma: f64) -> Result<ResonantSolution> {
    require_rates(g, gamma)?;
    let psi = g / (2.0 * gamma);
    Ok(ResonantSolution {
        psi,
        n_exact: psi * psi.tanh(),
        n_meanfield: n_from_psi(psi.into()),
    })
}

/// `|psi|` without quantum fluctuations: `sqrt(g^2 - delta^2) / 2 gamma`
/// inside the line `|delta| = g`, zero outside.
pub fn psi_semiclassical(params: &EffectiveParams) -> f64 {
    let g = params.g_abs();
    let d2 = g * g - params.delta() * params.delta();
    if d2 > 0.0 {
        d2.sqrt() / (2.0 * params.gamma())
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Semiclassical,
    Quantum,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarySolution {
    pub psi_abs: f64,
    /// `arg psi`; `None` at `g = 0`, where it is undefined.
    pub psi_phase: Option<f64>,
    pub n: f64,
    pub branch: Branch,
    pub cos_phi: Option<f64>,
    pub sin_phi: Option<f64>,
}

impl StationarySolution {
    pub fn phase(&self) -> Result<f64> {
        self.psi_phase.ok_or(Error::PhaseUndefined)
    }

    pub fn psi(&self) -> Result<num_complex::Complex64> {
        Ok(num_complex::Complex64::from_polar(
            self.psi_abs,
            self.phase()?,
        ))
    }
}

/// `|psi|^2` on the stationary branch with quantum fluctuations, the
/// positive root of `4 gamma^2 x^2 + (delta^2 - g^2 + gamma^2) x - g^2 / 4`.
///
/// Evaluated in a form free of cancellation on both sides of the line
/// `delta^2 = g^2 - gamma^2`.
pub fn psi_qf_squared(g: f64, gamma: f64, delta: f64) -> f64 {
    let c = g * g - delta * delta - gamma * gamma;
    let s = (c * c + 4.0 * gamma * gamma * g * g).sqrt();
    if c >= 0.0 {
        (s + c) / (8.0 * gamma * gamma)
    } else {
        g * g / (2.0 * (s - c))
    }
}

/// Stationary solution of the reduced mean-field equation.
pub fn psi_qf(params: &EffectiveParams) -> Result<StationarySolution> {
    let g = require_real_pump(params)?;
    let gamma = params.gamma();
    let delta = params.delta();
    let x = psi_qf_squared(g, gamma, delta);
    let psi_abs = x.sqrt();
    let (cos_phi, sin_phi, phase) = if g > 0.0 {
        let root = (1.0 + 4.0 * x).sqrt();
        let cos = 2.0 * gamma * psi_abs / g;
        let sin = -delta * cos / (gamma * root);
        // The angle itself from the ratio, which is exact in terms of inputs.
        (Some(cos), Some(sin), Some((-delta / root).atan2(gamma)))
    } else {
        (None, None, None)
    };
    Ok(StationarySolution {
        psi_abs,
        psi_phase: phase,
        n: n_from_psi(psi_abs.into()),
        branch: Branch::Quantum,
        cos_phi,
        sin_phi,
    })
}

/// Relative residual of the stationarity condition
/// `delta^2 x = (1 + 4x)(g^2 - 4 gamma^2 x) / 4` for `x = |psi|^2`, scaled by
/// the magnitude of its terms.
pub fn stationarity_residual(params: &EffectiveParams, psi_abs: f64) -> f64 {
    let g = params.g_abs();
    let gamma = params.gamma();
    let delta = params.delta();
    let x = psi_abs * psi_abs;
    let lhs = delta * delta * x;
    let rhs = 0.25 * (1.0 + 4.0 * x) * (g * g - 4.0 * gamma * gamma * x);
    let scale = lhs.abs() + 0.25 * (1.0 + 4.0 * x) * (g * g + 4.0 * gamma * gamma * x);
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Coefficients of the stationary biquadratic and their Landau reading
/// `Phi = A eta^2 + B eta^4 - h eta` with `eta = |psi|`.
///
/// The biquadratic is quartic in `eta` with no cubic term, while the
/// stationarity condition of `Phi` is cubic; the identification is an
/// analogy and is not used by any solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauCoefficients {
    /// `(delta^2 - g^2 + gamma^2) / 2`
    pub a: f64,
    /// `gamma^2`
    pub b: f64,
    /// `g^2 / 4`
    pub h: f64,
    /// `4 gamma^2`, coefficient of `|psi|^4`.
    pub quartic: f64,
    /// `delta^2 - g^2 + gamma^2`, coefficient of `|psi|^2`.
    pub quadratic: f64,
    /// `-g^2 / 4`
    pub constant: f64,
}

impl LandauCoefficients {
    /// Positive root in `|psi|^2`.
    pub fn positive_root(&self) -> f64 {
        // With p = quadratic, q = constant, a4 = quartic:
        // x = (-p + sqrt(p^2 - 4 a4 q)) / (2 a4), rationalised when p > 0.
        let p = self.quadratic;
        let disc = (p * p - 4.0 * self.quartic * self.constant).sqrt();
        if p <= 0.0 {
            (disc - p) / (2.0 * self.quartic)
        } else {
            -2.0 * self.constant / (disc + p)
        }
    }
}

pub fn biquadratic_coeffs(params: &EffectiveParams) -> LandauCoefficients {
    let g2 = params.g_abs().powi(2);
    let gamma2 = params.gamma().powi(2);
    let quadratic = params.delta().powi(2) - g2 + gamma2;
    LandauCoefficients {
        a: quadratic / 2.0,
        b: gamma2,
        h: g2 / 4.0,
        quartic: 4.0 * gamma2,
        quadratic,
        constant: -g2 / 4.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CriticalBoundary {
    /// Detuning at which the quadratic Landau coefficient vanishes.
    Critical { delta0: f64 },
    /// `g < gamma`: the quadratic coefficient is positive for every detuning.
    BelowThreshold,
}

impl CriticalBoundary {
    pub fn delta0(&self) -> Option<f64> {
        match self {
            CriticalBoundary::Critical { delta0 } => Some(*delta0),
            CriticalBoundary::BelowThreshold => None,
        }
    }
}

/// `delta0 = sqrt(g^2 - gamma^2)` for `g >= gamma`.
pub fn critical_boundary(g: f64, gamma: f64) -> Result<CriticalBoundary> {
    require_rates(g, gamma)?;
    if g < gamma {
        return Ok(CriticalBoundary::BelowThreshold);
    }
    Ok(CriticalBoundary::Critical {
        delta0: ((g - gamma) * (g + gamma)).sqrt(),
    })
}

/// `d^2 |psi| / d delta^2` at `delta = 0`: `-g / (2 gamma (g^2 + gamma^2))`.
pub fn curvature_delta0(g: f64, gamma: f64) -> Result<f64> {
    require_rates(g, gamma)?;
    Ok(-g / (2.0 * gamma * (g * g + gamma * gamma)))
}

/// Default step of [`curvature_delta0_fd`], in units of gamma.
pub const CURVATURE_FD_STEP: f64 = 1e-4;

/// Three-point second difference of the closed-form `|psi|` at `delta = 0`.
///
/// `|psi|` is even in the detuning, so the stencil reduces to
/// `2 (f(h) - f(0)) / h^2`. The difference `f(h) - f(0)` is formed
/// analytically from the closed form, which keeps full precision even for
/// steps far below the scale of `|psi|`.
pub fn curvature_delta0_fd(g: f64, gamma: f64, step: f64) -> Result<f64> {
    require_rates(g, gamma)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {step}"
        )));
    }
    Ok(2.0 * psi_abs_difference(g, gamma, 0.0, step) / (step * step))
}

/// `|psi|(delta1) - |psi|(delta0)` on the quantum branch without
/// cancellation.
pub fn psi_abs_difference(g: f64, gamma: f64, delta0: f64, delta1: f64) -> f64 {
    let gg = 4.0 * gamma * gamma * g * g;
    // u = s + c with s = sqrt(c^2 + 4 gamma^2 g^2), so that x = u / (8 gamma^2).
    let parts = |delta: f64| {
        let c = g * g - delta * delta - gamma * gamma;
        let s = (c * c + gg).sqrt();
        let u = if c >= 0.0 { s + c } else { gg / (s - c) };
        (s, u)
    };
    let (s0, u0) = parts(delta0);
    let (s1, u1) = parts(delta1);
    // c1 - c0 = delta0^2 - delta1^2 and s1 - s0 = (c1^2 - c0^2) / (s1 + s0),
    // hence u1 - u0 = (c1 - c0) (u1 + u0) / (s1 + s0).
    let dc = (delta0 - delta1) * (delta0 + delta1);
    let du = dc * (u1 + u0) / (s1 + s0);
    let dx = du / (8.0 * gamma * gamma);
    let denom = (u1 / (8.0 * gamma * gamma)).sqrt() + (u0 / (8.0 * gamma * gamma)).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        dx / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(g: f64, delta: f64) -> EffectiveParams {
        EffectiveParams::new(g, 1.0, delta).unwrap()
    }

    #[test]
    fn resonant_values() {
        let r = psi_exact_delta0(20.0, 1.0).unwrap();
        assert_eq!(r.psi, 10.0);
        assert_relative_eq!(r.n_exact, 10.0 * 10f64.tanh(), max_relative = 1e-15);
        assert_relative_eq!(
            r.n_meanfield,
            (401f64.sqrt() - 1.0) / 2.0,
            max_relative = 1e-14
        );
        let z = psi_exact_delta0(0.0, 1.0).unwrap();
        assert_eq!((z.psi, z.n_exact, z.n_meanfield), (0.0, 0.0, 0.0));
        for g in [1e-3, 1e3] {
            let r = psi_exact_delta0(g, 1.0).unwrap();
            assert_relative_eq!(r.n_exact / r.n_meanfield, 1.0, max_relative = 1.1e-3);
        }
        assert!(psi_exact_delta0(1.0, 0.0).is_err());
    }

    #[test]
    fn semiclassical_values() {
        assert_eq!(psi_semiclassical(&p(20.0, 12.0)), 8.0);
        assert_eq!(psi_semiclassical(&p(20.0, 21.0)), 0.0);
        assert_eq!(psi_semiclassical(&p(20.0, 20.0)), 0.0);
        assert_eq!(psi_semiclassical(&p(20.0, 0.0)), 10.0);
    }

    #[test]
    fn quantum_branch_values() {
        assert_eq!(psi_qf(&p(20.0, 0.0)).unwrap().psi_abs, 10.0);
        let s = psi_qf(&p(2.0, 2.0)).unwrap();
        assert_relative_eq!(
            s.psi_abs.powi(2),
            (17f64.sqrt() - 1.0) / 8.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(s.psi_abs, 0.6248, epsilon = 1e-4);
        let zero = psi_qf(&p(0.0, 1.0)).unwrap();
        assert_eq!(zero.psi_abs, 0.0);
        assert_eq!(zero.phase(), Err(Error::PhaseUndefined));
        let complex =
            EffectiveParams::complex(num_complex::Complex64::new(0.0, 1.0), 1.0, 0.0).unwrap();
        assert!(psi_qf(&complex).is_err());
    }

    #[test]
    fn critical_line_power_law() {
        for g in [1e4, 1e6] {
            let s = psi_qf(&p(g, g)).unwrap();
            assert_relative_eq!(s.psi_abs, 0.5 * g.sqrt(), max_relative = 2.0 / g.sqrt());
        }
    }

    #[test]
    fn landau_coefficients() {
        let l = biquadratic_coeffs(&p(2.0, 3f64.sqrt()));
        assert!(l.a.abs() < 1e-15);
        assert_eq!(l.b, 1.0);
        assert_eq!(l.h, 1.0);
        assert_eq!((l.quartic, l.quadratic, l.constant), (4.0, 2.0 * l.a, -1.0));
        for delta in [0.0, 0.5, 3.0] {
            assert!(biquadratic_coeffs(&p(0.9, delta)).a > 0.0);
        }
        let l = biquadratic_coeffs(&p(2.0, 2.0));
        assert_relative_eq!(
            l.positive_root(),
            (17f64.sqrt() - 1.0) / 8.0,
            max_relative = 1e-14
        );
        assert_eq!(biquadratic_coeffs(&p(0.0, 1.0)).h, 0.0);
    }

    #[test]
    fn boundary_values() {
        assert_eq!(critical_boundary(1.0, 1.0).unwrap().delta0(), Some(0.0));
        assert_relative_eq!(
            critical_boundary(2f64.sqrt(), 1.0)
                .unwrap()
                .delta0()
                .unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert_eq!(
            critical_boundary(0.5, 1.0).unwrap(),
            CriticalBoundary::BelowThreshold
        );
        let d = critical_boundary(1e4, 1.0).unwrap().delta0().unwrap();
        assert!((d - 1e4).abs() < 1e-3);
    }

    #[test]
    fn curvature_values() {
        assert_eq!(curvature_delta0(1.0, 1.0).unwrap(), -0.25);
        assert_relative_eq!(
            curvature_delta0(0.1, 1.0).unwrap(),
            -0.0495,
            max_relative = 1e-3
        );
        // g / (g^2 + gamma^2) is invariant under g -> gamma^2 / g.
        assert_relative_eq!(
            curvature_delta0(10.0, 1.0).unwrap(),
            -0.0495,
            max_relative = 1e-3
        );
        assert_relative_eq!(
            curvature_delta0(1e-4, 1.0).unwrap(),
            -0.5e-4,
            max_relative = 1e-7
        );
        assert_relative_eq!(
            curvature_delta0(1e4, 1.0).unwrap(),
            -0.5e-4,
            max_relative = 1e-7
        );
    }

    proptest! {
        #[test]
        fn root_solves_biquadratic(g in 0.0f64..300.0, delta in -400.0f64..400.0, gamma in 0.1f64..5.0) {
            let params = EffectiveParams::new(g, gamma, delta).unwrap();
            let s = psi_qf(&params).unwrap();
            prop_assert!(stationarity_residual(&params, s.psi_abs) <= 1e-12);
            let l = biquadratic_coeffs(&params);
            let x = s.psi_abs.powi(2);
            prop_assert!((l.positive_root() - x).abs() <= 1e-12 * x.max(1e-300));
        }

        #[test]
        fn closed_form_is_fixed_point(g in 0.01f64..200.0, delta in -300.0f64..300.0) {
            let params = p(g, delta);
            let s = psi_qf(&params).unwrap();
            let psi = s.psi().unwrap();
            prop_assert!(crate::meanfield::mf_rhs(psi, &params).norm() <= 1e-9 * g.max(1.0));
            let (c, si) = (s.cos_phi.unwrap(), s.sin_phi.unwrap());
            prop_assert!((c * c + si * si - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn fluctuations_add_amplitude(g in 0.0f64..100.0, delta in -150.0f64..150.0) {
            let params = p(g, delta);
            prop_assert!(psi_qf(&params).unwrap().psi_abs >= psi_semiclassical(&params) * (1.0 - 1e-14));
        }

        #[test]
        fn finite_difference_curvature(g in 0.01f64..50.0) {
            let exact = curvature_delta0(g, 1.0).unwrap();
            let fd = curvature_delta0_fd(g, 1.0, CURVATURE_FD_STEP).unwrap();
            prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs());
        }
    }

    #[test]
    fn semiclassical_gap_closes() {
        let mut last = f64::INFINITY;
        for g in [5.0, 10.0, 20.0, 50.0, 100.0] {
            let params = p(g, 0.5 * g);
            let sc = psi_semiclassical(&params);
            let gap = (psi_qf(&params).unwrap().psi_abs - sc) / sc;
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 0.01);
    }
}
