//! Model parameters: the physical two-cavity circuit and the effective
//! single-mode model obtained after eliminating the readout cavity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Circuit-level parameters of the storage/readout pair.
///
/// Frequencies and amplitudes are angular (rad per unit time); `kappa` is the
/// single-photon loss rate of the readout cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub omega_s: f64,
    pub omega_r: f64,
    pub omega_p: f64,
    pub eps_r: f64,
    pub eps_p: f64,
    pub kappa: f64,
    pub chi_rs: f64,
}

/// Effective two-photon model: pump rate `g`, two-photon loss rate `gamma`
/// and detuning `delta`.
///
/// `gamma > 0` always holds. The default constructor additionally keeps `g`
/// real and non-negative; a complex pump can be brought to that form with
/// [`EffectiveParams::gauge_normalized`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    g: Complex64,
    gamma: f64,
    delta: f64,
}

/// Result of rotating the Fock-basis phase so that the pump becomes real.
///
/// Observables transform as `psi_original = psi_rotated * exp(i * angle)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeRotation {
    pub params: EffectiveParams,
    pub angle: f64,
}

impl EffectiveParams {
    /// Real, non-negative pump.
    pub fn new(g: f64, gamma: f64, delta: f64) -> Result<Self> {
        if !g.is_finite() || g < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "pump rate g must be real, finite and non-negative, got {g}"
            )));
        }
        Self::complex(Complex64::new(g, 0.0), gamma, delta)
    }

    /// Arbitrary complex pump.
    pub fn complex(g: Complex64, gamma: f64, delta: f64) -> Result<Self> {
        if !g.re.is_finite() || !g.im.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pump rate g must be finite, got {g}"
            )));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "detuning must be finite, got {delta}"
            )));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "two-photon loss rate must be finite and positive, got {gamma}"
            )));
        }
        if gamma == 0.0 {
            return Err(Error::DegenerateModel(
                "two-photon loss rate gamma vanishes".to_string(),
            ));
        }
        Ok(Self { g, gamma, delta })
    }

    pub fn g(&self) -> Complex64 {
        self.g
    }

    /// Modulus of the pump rate.
    pub fn g_abs(&self) -> f64 {
        self.g.norm()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// True when the pump is real and non-negative.
    pub fn has_real_pump(&self) -> bool {
        self.g.im == 0.0 && self.g.re >= 0.0
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::complex(self.g, self.gamma, delta)
    }

    pub fn with_pump(&self, g: f64) -> Result<Self> {
        Self::new(g, self.gamma, self.delta)
    }

    /// Same physics with every rate measured in units of `gamma`.
    pub fn in_gamma_units(&self) -> Self {
        Self {
            g: self.g / self.gamma,
            gamma: 1.0,
            delta: self.delta / self.gamma,
        }
    }

    /// Rotate `a -> a exp(i angle / 2)` with `angle = arg g`, leaving a real
    /// non-negative pump of the same modulus.
    pub fn gauge_normalized(&self) -> GaugeRotation {
        let angle = if self.g.norm() == 0.0 {
            0.0
        } else {
            self.g.arg()
        };
        GaugeRotation {
            params: Self {
                g: Complex64::new(self.g.norm(), 0.0),
                ..*self
            },
            angle,
        }
    }
}

/// Map circuit parameters onto the effective model.
///
/// The pump tone enters through the classical amplitude
/// `xi = -i eps_p / (kappa/2 + i (omega_r - omega_p))`, after which
/// `g = 2 xi chi_rs eps_r / kappa`, `gamma = |xi chi_rs|^2 / (2 kappa)` and
/// `delta = (2 omega_s - omega_p - omega_r) / 2`. The returned pump may be
/// complex.
pub fn derive_effective(p: &PhysicalParams) -> Result<EffectiveParams> {
    let fields = [
        ("omega_s", p.omega_s),
        ("omega_r", p.omega_r),
        ("omega_p", p.omega_p),
        ("eps_r", p.eps_r),
        ("eps_p", p.eps_p),
        ("kappa", p.kappa),
        ("chi_rs", p.chi_rs),
    ];
    if let Some((name, value)) = fields.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{name} must be finite, got {value}"
        )));
    }
    if p.kappa <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "readout loss rate kappa must be positive, got {}",
            p.kappa
        )));
    }

    let i = Complex64::i();
    let xi = -i * p.eps_p / Complex64::new(p.kappa / 2.0, p.omega_r - p.omega_p);
    let g = 2.0 * xi * p.chi_rs * p.eps_r / p.kappa;
    let gamma = (xi * p.chi_rs).norm_sqr() / (2.0 * p.kappa);
    let delta = (2.0 * p.omega_s - p.omega_p - p.omega_r) / 2.0;

    if gamma == 0.0 {
        return Err(Error::DegenerateModel(
            "eps_p * chi_rs = 0 leaves no two-photon loss".to_string(),
        ));
    }
    EffectiveParams::complex(g, gamma, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circuit() -> PhysicalParams {
        PhysicalParams {
            omega_s: 5.0,
            omega_r: 7.0,
            omega_p: 7.0,
            eps_r: 1.0,
            eps_p: 1.0,
            kappa: 2.0,
            chi_rs: 1.0,
        }
    }

    #[test]
    fn resonant_pump_has_zero_detuning() {
        let mut p = circuit();
        p.omega_s = 4.3;
        p.omega_r = 6.1;
        p.omega_p = 2.0 * p.omega_s - p.omega_r;
        let eff = derive_effective(&p).unwrap();
        assert!(eff.delta().abs() < 1e-15);
    }

    #[test]
    fn unit_circuit_values() {
        // xi = -i / (1 + 0i) = -i, g = 2 * (-i) / 2 = -i, gamma = 1 / 4.
        let eff = derive_effective(&circuit()).unwrap();
        assert!((eff.g() - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((eff.gamma() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_pump_is_degenerate() {
        let mut p = circuit();
        p.eps_p = 0.0;
        assert!(matches!(
            derive_effective(&p),
            Err(Error::DegenerateModel(_))
        ));
    }

    #[test]
    fn non_positive_kappa_rejected() {
        let mut p = circuit();
        p.kappa = 0.0;
        assert!(matches!(
            derive_effective(&p),
            Err(Error::InvalidParameter(_))
        ));
        p.kappa = -1.0;
        assert!(matches!(
            derive_effective(&p),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn constructor_guards() {
        assert!(matches!(
            EffectiveParams::new(1.0, 0.0, 0.0),
            Err(Error::DegenerateModel(_))
        ));
        assert!(EffectiveParams::new(-1.0, 1.0, 0.0).is_err());
        assert!(EffectiveParams::new(1.0, -1.0, 0.0).is_err());
        assert!(EffectiveParams::new(f64::NAN, 1.0, 0.0).is_err());
        assert!(EffectiveParams::new(1.0, 1.0, f64::INFINITY).is_err());
        assert!(EffectiveParams::new(2.0, 1.0, -3.0)
            .unwrap()
            .has_real_pump());
    }

    #[test]
    fn gauge_rotation_makes_pump_real() {
        let p = EffectiveParams::complex(Complex64::new(0.0, -1.0), 0.25, 0.3).unwrap();
        let rot = p.gauge_normalized();
        assert!(rot.params.has_real_pump());
        assert!((rot.params.g_abs() - 1.0).abs() < 1e-15);
        assert!((rot.angle + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(rot.params.delta(), 0.3);
    }

    #[test]
    fn gamma_units() {
        let p = EffectiveParams::new(5.0, 0.25, 1.0)
            .unwrap()
            .in_gamma_units();
        assert_eq!(p.gamma(), 1.0);
        assert_eq!(p.g().re, 20.0);
        assert_eq!(p.delta(), 4.0);
    }
}
