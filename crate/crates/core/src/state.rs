//! Density matrices of the storage mode and the observables read off them.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative Hermiticity tolerance for a valid state.
pub const STATE_HERMITICITY_TOL: f64 = 1e-10;
/// Allowed deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-8;
/// Most negative population accepted.
pub const POPULATION_FLOOR: f64 = -1e-10;
/// Most negative eigenvalue (or 2x2 principal minor) accepted.
pub const POSITIVITY_FLOOR: f64 = -1e-8;

/// Number of top Fock levels inspected by the default truncation check.
pub const DEFAULT_EDGE_LEVELS: usize = 3;
/// Default largest acceptable population on the top levels.
pub const DEFAULT_EDGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validated state (Hermitian, unit trace, non-negative populations and
    /// 2x2 minors).
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::from_entries(entries)?;
        rho.validate(false)?;
        Ok(rho)
    }

    pub(crate) fn from_entries(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::ShapeMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        if entries.nrows() < 2 {
            return Err(Error::InvalidCutoff {
                cutoff: entries.nrows(),
                min: 2,
            });
        }
        Ok(Self { entries })
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        Self::fock(n, 0)
    }

    /// Number state `|k><k|` on `n` levels.
    pub fn fock(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidParameter(format!(
                "Fock level {k} is outside a cutoff of {n}"
            )));
        }
        let mut m = DMatrix::zeros(n, n);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Self::from_entries(m)
    }

    /// Projector onto a (normalised on the fly) pure state.
    pub fn from_ket(ket: &[Complex64]) -> Result<Self> {
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter(
                "ket has zero or non-finite norm".to_string(),
            ));
        }
        let n = ket.len();
        let m = DMatrix::from_fn(n, n, |i, j| ket[i] * ket[j].conj() / (norm * norm));
        Self::from_entries(m)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn population(&self, k: usize) -> f64 {
        self.entries[(k, k)].re
    }

    /// Largest entry of `|rho - rho'|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let a = &self.entries;
        let n = a.nrows();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Total population of odd photon numbers.
    pub fn odd_weight(&self) -> f64 {
        (1..self.dim())
            .step_by(2)
            .map(|k| self.population(k).abs())
            .sum()
    }

    /// `Tr rho^2`, using Hermiticity.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Sum of absolute values of all entries.
    pub fn entrywise_l1(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).sum()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Check the state invariants. The eigenvalue test runs only when
    /// `full` is set; otherwise positivity is probed through populations and
    /// 2x2 principal minors.
    pub fn validate(&self, full: bool) -> Result<()> {
        self.validate_with(full, 0.0)
    }

    /// [`validate`](Self::validate) for states carrying integration noise
    /// of absolute size `noise`: populations may dip to `-noise` and the
    /// Hermiticity defect may reach `noise`.
    pub fn validate_with(&self, full: bool, noise: f64) -> Result<()> {
        let scale = self.entries.camax().max(1e-300);
        let defect = self.hermiticity_defect();
        if defect > (STATE_HERMITICITY_TOL * scale.max(1.0)).max(noise) {
            return Err(Error::Consistency(format!(
                "density matrix is not Hermitian (defect {defect:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::Consistency(format!("density matrix trace is {tr}")));
        }
        let n = self.dim();
        for k in 0..n {
            let p = self.population(k);
            if !p.is_finite() || p < POPULATION_FLOOR.min(-noise) {
                return Err(Error::Consistency(format!(
                    "population of level {k} is {p:.3e}"
                )));
            }
        }
        for j in 0..n {
            let pj = self.population(j);
            for i in 0..j {
                let minor = self.population(i) * pj - self.entries[(i, j)].norm_sqr();
                if minor < POSITIVITY_FLOOR {
                    return Err(Error::Consistency(format!(
                        "principal minor ({i}, {j}) is {minor:.3e}"
                    )));
                }
            }
        }
        if full {
            let lowest = self.min_eigenvalue();
            if lowest < POSITIVITY_FLOOR {
                return Err(Error::Consistency(format!(
                    "smallest eigenvalue is {lowest:.3e}"
                )));
            }
        }
        Ok(())
    }
}

/// Expectation values of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    /// `Tr[a'a rho]`
    pub n: f64,
    /// `Tr[a^2 rho]`
    pub psi: Complex64,
    pub trace: f64,
    pub purity: f64,
    /// Population on the top [`DEFAULT_EDGE_LEVELS`] Fock levels.
    pub edge_weight: f64,
}

impl Observables {
    pub fn abs_psi(&self) -> f64 {
        self.psi.norm()
    }
}

/// `<a'a>`, `<a^2>`, trace, purity and edge weight in one pass.
pub fn observables(rho: &DensityMatrix) -> Observables {
    let n = rho.dim();
    let e = rho.entries();
    let mut photons = 0.0;
    let mut psi = Complex64::new(0.0, 0.0);
    for k in 0..n {
        photons += k as f64 * e[(k, k)].re;
        if k + 2 < n {
            psi += (((k + 2) * (k + 1)) as f64).sqrt() * e[(k + 2, k)];
        }
    }
    Observables {
        n: photons,
        psi,
        trace: rho.trace().re,
        purity: rho.purity(),
        edge_weight: edge_weight(rho, DEFAULT_EDGE_LEVELS),
    }
}

/// `<a'^2 a^2>`, the bound for `|<a^2>|^2` by Cauchy-Schwarz.
pub fn pair_density(rho: &DensityMatrix) -> f64 {
    (2..rho.dim())
        .map(|k| (k * (k - 1)) as f64 * rho.population(k))
        .sum()
}

fn edge_weight(rho: &DensityMatrix, levels: usize) -> f64 {
    let n = rho.dim();
    let start = n - levels.min(n - 1);
    (start..n).map(|k| rho.population(k)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub cutoff: usize,
    pub levels: usize,
    pub tolerance: f64,
    pub edge_weight: f64,
    pub adequate: bool,
}

impl TruncationReport {
    /// Convert an inadequate report into the matching error.
    pub fn require(&self) -> Result<()> {
        if self.adequate {
            Ok(())
        } else {
            Err(Error::TruncationInadequate {
                cutoff: self.cutoff,
                edge_weight: self.edge_weight,
                tolerance: self.tolerance,
            })
        }
    }
}

/// Population on levels `N-k .. N-1` compared against `tol`.
pub fn check_truncation(rho: &DensityMatrix, k: usize, tol: f64) -> TruncationReport {
    let levels = k.min(rho.dim() - 1);
    let w = edge_weight(rho, levels);
    TruncationReport {
        cutoff: rho.dim(),
        levels,
        tolerance: tol,
        edge_weight: w,
        adequate: w < tol,
    }
}
