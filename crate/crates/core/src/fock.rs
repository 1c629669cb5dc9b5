//! Bosonic operators on a truncated Fock basis and the Lindblad generator of
//! the two-photon model.
//!
//! The generator is `L(rho) = -i[H, rho] + 2 gamma D[a^2](rho)` with
//! `H = delta a'a + (i/2)(g a'^2 - g* a^2)` and
//! `D[X](rho) = X rho X' - (X'X rho + rho X'X)/2`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::EffectiveParams;
use crate::state::DensityMatrix;

/// Relative tolerance for declared-Hermitian operators.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Dense operator on the first `dim` Fock states.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    entries: DMatrix<Complex64>,
    label: String,
    hermitian: bool,
}

impl TruncatedOperator {
    pub fn new(entries: DMatrix<Complex64>, label: impl Into<String>) -> Result<Self> {
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
        Ok(Self {
            entries,
            label: label.into(),
            hermitian: false,
        })
    }

    /// Operator flagged Hermitian; the flag is checked against the entries.
    pub fn new_hermitian(entries: DMatrix<Complex64>, label: impl Into<String>) -> Result<Self> {
        let mut op = Self::new(entries, label)?;
        let scale = op.entries.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        let defect = op.hermiticity_defect();
        if defect > HERMITICITY_TOL * scale {
            return Err(Error::Consistency(format!(
                "operator '{}' deviates from its adjoint by {defect:.3e}",
                op.label
            )));
        }
        op.hermitian = true;
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Largest entry of `|A - A'|`.
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

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
            label: format!("{}^dag", self.label),
            hermitian: self.hermitian,
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            entries: &self.entries * &other.entries,
            label: format!("{} {}", self.label, other.label),
            hermitian: false,
        })
    }

    /// `[A, B] = AB - BA` as a raw matrix.
    pub fn commutator(&self, other: &Self) -> Result<DMatrix<Complex64>> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(&self.entries * &other.entries - &other.entries * &self.entries)
    }
}

fn require_cutoff(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::InvalidCutoff { cutoff: n, min })
    } else {
        Ok(())
    }
}

/// Ladder operator `a` with `<n-1|a|n> = sqrt(n)`.
pub fn annihilation(n: usize) -> Result<TruncatedOperator> {
    require_cutoff(n, 2)?;
    let mut m = DMatrix::zeros(n, n);
    for k in 1..n {
        m[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    TruncatedOperator::new(m, "a")
}

/// `a^2`, with `<n-2|a^2|n> = sqrt(n(n-1))`.
pub fn a_squared(n: usize) -> Result<TruncatedOperator> {
    require_cutoff(n, 3)?;
    let a = annihilation(n)?;
    let mut op = a.matmul(&a)?;
    op.label = "a^2".to_string();
    Ok(op)
}

/// Number operator `a'a = diag(0, 1, ..., n-1)`.
pub fn number_op(n: usize) -> Result<TruncatedOperator> {
    require_cutoff(n, 2)?;
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(i as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    TruncatedOperator::new_hermitian(m, "a^dag a")
}

/// Effective Hamiltonian `delta a'a + (i/2)(g a'^2 - g* a^2)`.
pub fn build_heff(params: &EffectiveParams, n: usize) -> Result<TruncatedOperator> {
    require_cutoff(n, 3)?;
    let a2 = a_squared(n)?;
    let num = number_op(n)?;
    let g = params.g();
    let half_i = Complex64::new(0.0, 0.5);
    let h = num.entries() * Complex64::new(params.delta(), 0.0)
        + (a2.entries().adjoint() * g - a2.entries() * g.conj()) * half_i;
    TruncatedOperator::new_hermitian(h, "H_eff")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(level: usize) -> Self {
        if level % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn offset(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    /// Number of Fock levels of this parity below the cutoff.
    pub fn levels(self, n: usize) -> usize {
        match self {
            Parity::Even => n.div_ceil(2),
            Parity::Odd => n / 2,
        }
    }
}

/// Diagonal projector onto the even or odd photon-number states.
pub fn parity_projector(n: usize, sector: Parity) -> Result<TruncatedOperator> {
    require_cutoff(n, 2)?;
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j && Parity::of(i) == sector {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    TruncatedOperator::new_hermitian(m, format!("P_{sector:?}").to_lowercase())
}

/// One of the four parity blocks `rho[m, n]` with `m` of parity `rows` and
/// `n` of parity `cols`. The generator never couples different blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParityBlock {
    pub rows: Parity,
    pub cols: Parity,
    pub nrows: usize,
    pub ncols: usize,
}

impl ParityBlock {
    pub fn new(dim: usize, rows: Parity, cols: Parity) -> Self {
        Self {
            rows,
            cols,
            nrows: rows.levels(dim),
            ncols: cols.levels(dim),
        }
    }

    pub fn len(&self) -> usize {
        self.nrows * self.ncols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_diagonal(&self) -> bool {
        self.rows == self.cols
    }

    /// Fock level of block row `p`.
    pub fn row_level(&self, p: usize) -> usize {
        2 * p + self.rows.offset()
    }

    pub fn col_level(&self, q: usize) -> usize {
        2 * q + self.cols.offset()
    }

    /// Copy the block out of a full matrix, row-major.
    pub fn gather(&self, full: &DMatrix<Complex64>) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len());
        for p in 0..self.nrows {
            for q in 0..self.ncols {
                out.push(full[(self.row_level(p), self.col_level(q))]);
            }
        }
        out
    }

    /// Write a row-major block into a full matrix.
    pub fn scatter(&self, block: &[Complex64], full: &mut DMatrix<Complex64>) {
        for p in 0..self.nrows {
            for q in 0..self.ncols {
                full[(self.row_level(p), self.col_level(q))] = block[p * self.ncols + q];
            }
        }
    }
}

/// Coefficients of `L(rho)[m, n]` in terms of the five entries of `rho` it
/// depends on.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stencil {
    /// `rho[m, n]`
    pub center: Complex64,
    /// `rho[m-2, n]`
    pub row_down: Complex64,
    /// `rho[m, n-2]`
    pub col_down: Complex64,
    /// `rho[m+2, n]`
    pub row_up: Complex64,
    /// `rho[m, n+2]`
    pub col_up: Complex64,
    /// `rho[m+2, n+2]`
    pub both_up: f64,
}

/// Matrix-free Lindblad generator for a fixed cutoff.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    params: EffectiveParams,
    dim: usize,
    /// `pair[m] = sqrt(m (m-1))`, zero at and beyond the cutoff.
    pair: Vec<f64>,
}

impl LindbladGenerator {
    pub fn new(params: EffectiveParams, dim: usize) -> Result<Self> {
        require_cutoff(dim, 2)?;
        let pair = (0..dim + 2)
            .map(|m| {
                if m < dim {
                    ((m * m.saturating_sub(1)) as f64).sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self { params, dim, pair })
    }

    pub fn params(&self) -> &EffectiveParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub(crate) fn stencil(&self, m: usize, n: usize) -> Stencil {
        let g = self.params.g();
        let gamma = self.params.gamma();
        let delta = self.params.delta();
        let sm = self.pair[m];
        let sn = self.pair[n];
        let sm2 = self.pair[m + 2];
        let sn2 = self.pair[n + 2];
        let decay = gamma * ((m * m.saturating_sub(1)) as f64 + (n * n.saturating_sub(1)) as f64);
        Stencil {
            center: Complex64::new(-decay, -delta * (m as f64 - n as f64)),
            row_down: g * (0.5 * sm),
            col_down: g.conj() * (0.5 * sn),
            row_up: -g.conj() * (0.5 * sm2),
            col_up: -g * (0.5 * sn2),
            both_up: 2.0 * gamma * sm2 * sn2,
        }
    }

    /// `L(rho)` for an arbitrary square matrix of matching size.
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::ShapeMismatch {
                expected: self.dim,
                found: if rho.nrows() != self.dim {
                    rho.nrows()
                } else {
                    rho.ncols()
                },
            });
        }
        let n = self.dim;
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let s = self.stencil(i, j);
            let mut acc = s.center * rho[(i, j)];
            if i >= 2 {
                acc += s.row_down * rho[(i - 2, j)];
            }
            if j >= 2 {
                acc += s.col_down * rho[(i, j - 2)];
            }
            if i + 2 < n {
                acc += s.row_up * rho[(i + 2, j)];
            }
            if j + 2 < n {
                acc += s.col_up * rho[(i, j + 2)];
            }
            if i + 2 < n && j + 2 < n {
                acc += s.both_up * rho[(i + 2, j + 2)];
            }
            acc
        }))
    }

    /// `L` restricted to one parity block, on row-major block storage.
    ///
    /// On a diagonal block the input is assumed Hermitian: only the upper
    /// triangle is evaluated and the lower one is mirrored, so the output is
    /// exactly Hermitian.
    pub fn apply_block(&self, block: &ParityBlock, x: &[Complex64], out: &mut [Complex64]) {
        apply_block_with(
            block,
            |p, q| self.stencil(block.row_level(p), block.col_level(q)),
            x,
            out,
        );
    }

    /// Block action with the stencil coefficients tabulated once, for
    /// repeated application.
    pub fn block_operator(&self, block: ParityBlock) -> BlockOperator {
        let mut stencils = Vec::with_capacity(block.len());
        for p in 0..block.nrows {
            for q in 0..block.ncols {
                stencils.push(self.stencil(block.row_level(p), block.col_level(q)));
            }
        }
        BlockOperator { block, stencils }
    }
}

/// Tabulated restriction of the generator to one parity block.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    block: ParityBlock,
    stencils: Vec<Stencil>,
}

impl BlockOperator {
    pub fn block(&self) -> &ParityBlock {
        &self.block
    }

    /// Same contract as [`LindbladGenerator::apply_block`].
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let nc = self.block.ncols;
        apply_block_with(&self.block, |p, q| self.stencils[p * nc + q], x, out);
    }
}

#[inline(always)]
fn apply_block_with<F: Fn(usize, usize) -> Stencil>(
    block: &ParityBlock,
    stencil: F,
    x: &[Complex64],
    out: &mut [Complex64],
) {
    let (nr, nc) = (block.nrows, block.ncols);
    debug_assert_eq!(x.len(), nr * nc);
    debug_assert_eq!(out.len(), nr * nc);
    let hermitian = block.is_diagonal();
    for p in 0..nr {
        let q_start = if hermitian { p } else { 0 };
        for q in q_start..nc {
            let s = stencil(p, q);
            let k = p * nc + q;
            let mut acc = s.center * x[k];
            if p >= 1 {
                acc += s.row_down * x[k - nc];
            }
            if q >= 1 {
                acc += s.col_down * x[k - 1];
            }
            if p + 1 < nr {
                acc += s.row_up * x[k + nc];
            }
            if q + 1 < nc {
                acc += s.col_up * x[k + 1];
                if p + 1 < nr {
                    acc += s.both_up * x[k + nc + 1];
                }
            }
            out[k] = acc;
        }
    }
    if hermitian {
        for p in 0..nr {
            out[p * nc + p].im = 0.0;
            for q in p + 1..nc {
                out[q * nc + p] = out[p * nc + q].conj();
            }
        }
    }
}

/// Time derivative of a density matrix under the two-photon master equation.
pub fn lindblad_rhs(params: &EffectiveParams, rho: &DensityMatrix) -> Result<DMatrix<Complex64>> {
    LindbladGenerator::new(*params, rho.dim())?.apply(rho.entries())
}
