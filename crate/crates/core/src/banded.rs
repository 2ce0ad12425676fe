//! Banded LU without pivoting.
//!
//! Only used on column diagonally dominant matrices (`I - h Q` and `Q - s I`
//! for a rate generator `Q` and `h, s > 0`), where elimination without
//! pivoting is stable.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandedLu {
    dim: usize,
    lower: usize,
    upper: usize,
    /// Row-major band storage, `band[i * width + (j + lower - i)]` holds `a[i][j]`.
    band: Vec<f64>,
}

impl BandedLu {
    /// Allocates a zero matrix with the given half bandwidths.
    pub fn zeros(dim: usize, lower: usize, upper: usize) -> Self {
        Self {
            dim,
            lower,
            upper,
            band: vec![0.0; dim * (lower + upper + 1)],
        }
    }

    #[inline]
    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.lower >= i && j <= i + self.upper);
        i * self.width() + (j + self.lower - i)
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let s = self.slot(i, j);
        self.band[s] += value;
    }

    /// In-place factorization `A = L U`.
    pub fn factorize(mut self) -> Result<Self> {
        let n = self.dim;
        let w = self.width();
        for k in 0..n {
            let pivot = self.band[self.slot(k, k)];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::NumericFailure {
                    what: "banded factorization",
                    residual: pivot,
                    at: k as f64,
                });
            }
            let row_end = (k + self.upper).min(n - 1);
            let len = row_end - k;
            // Row k to the right of the diagonal.
            let k_start = k * w + self.lower + 1;
            for i in (k + 1)..=(k + self.lower).min(n - 1) {
                let ik = self.slot(i, k);
                let factor = self.band[ik] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.band[ik] = factor;
                let (head, tail) = self.band.split_at_mut(i * w);
                let src = &head[k_start..k_start + len];
                let start = ik + 1 - i * w;
                let dst = &mut tail[start..start + len];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= factor * s;
                }
            }
        }
        Ok(self)
    }

    /// Solves `A x = b` in place with a factorized matrix.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.dim;
        let w = self.width();
        for i in 0..n {
            let lo = i.saturating_sub(self.lower);
            let row = i * w + self.lower - i;
            let dot: f64 = self.band[row + lo..row + i]
                .iter()
                .zip(&x[lo..i])
                .map(|(a, b)| a * b)
                .sum();
            x[i] -= dot;
        }
        for i in (0..n).rev() {
            let hi = (i + self.upper).min(n - 1);
            let row = i * w + self.lower - i;
            let dot: f64 = self.band[row + i + 1..=row + hi]
                .iter()
                .zip(&x[i + 1..=hi])
                .map(|(a, b)| a * b)
                .sum();
            x[i] = (x[i] - dot) / self.band[row + i];
        }
    }
}
