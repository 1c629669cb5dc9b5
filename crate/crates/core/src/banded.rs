//! Complex banded LU factorisation with partial pivoting.
//!
//! Storage is row-major: row `i` keeps columns `i - kl ..= i + ku + kl`, the
//! extra `kl` super-diagonals holding fill-in produced by row interchanges.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![Complex64::new(0.0, 0.0); n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if self.in_band(i, j) {
            self.data[self.offset(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Panics when `(i, j)` lies outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let k = self.offset(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let k = self.offset(i, j);
        self.data[k] += v;
    }

    /// Replace row `i` by the unit row `e_i`.
    pub fn set_unit_row(&mut self, i: usize) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        for j in lo..=hi {
            let k = self.offset(i, j);
            self.data[k] = Complex64::new(0.0, 0.0);
        }
        self.set(i, i, Complex64::new(1.0, 0.0));
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.offset(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// In-place LU with partial pivoting.
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut pivots = Vec::with_capacity(n);
        let mut pivot_max = 0.0_f64;
        let mut pivot_min = f64::INFINITY;

        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.offset(k, k)].norm();
            for i in k + 1..=last_row {
                let v = self.data[self.offset(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots.push(p);
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Solver {
                    reason: format!("zero pivot in column {k}"),
                    condition_estimate: f64::INFINITY,
                });
            }
            pivot_max = pivot_max.max(best);
            pivot_min = pivot_min.min(best);

            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.offset(k, j);
                    let b = self.offset(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.offset(k, k)];
            let inv = pivot.inv();
            let row_k = self.offset(k, k);
            for i in k + 1..=last_row {
                let ik = self.offset(i, k);
                let l = self.data[ik] * inv;
                self.data[ik] = l;
                if l.norm() == 0.0 {
                    continue;
                }
                let row_i = ik;
                // Columns k+1..=last_col sit contiguously in both rows.
                for d in 1..=(last_col - k) {
                    let u = self.data[row_k + d];
                    self.data[row_i + d] -= l * u;
                }
            }
        }
        Ok(BandedLu {
            lu: self,
            pivots,
            condition_estimate: pivot_max / pivot_min,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    lu: BandedMatrix,
    pivots: Vec<usize>,
    condition_estimate: f64,
}

impl BandedLu {
    /// Ratio of the largest to the smallest pivot modulus.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    pub fn solve(&self, b: &mut [Complex64]) {
        let a = &self.lu;
        let n = a.n;
        let (kl, ku) = (a.kl, a.ku);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk.norm() == 0.0 {
                continue;
            }
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= a.data[a.offset(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                acc -= a.data[a.offset(k, j)] * b[j];
            }
            b[k] = acc / a.data[a.offset(k, k)];
        }
    }
}
