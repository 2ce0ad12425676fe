//! Shift-and-invert Krylov approximation of `exp(t Q) v`.
//!
//! The Arnoldi process runs on `Z = (I - s Q)^{-1}`, whose spectrum lies in
//! `(0, 1]` for a rate generator. With `Z V_m = V_{m+1} H`, the action is
//! approximated by `|v| V_m exp(t (I - H_m^{-1}) / s) e_1`. Convergence does
//! not depend on the norm of `Q`, which grows like `gamma nbar N^2`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::RateGenerator;
use crate::banded::BandedLu;
use crate::error::{Error, Result};

const MAX_DIM: usize = 60;
const MAX_SPLITS: u32 = 8;
const CHECK_EVERY: usize = 4;
/// Shift as a fraction of the step.
const SHIFT_FRACTION: f64 = 0.1;

pub struct ShiftInvertExpm<'a> {
    gen: &'a RateGenerator,
    tol: f64,
    factors: HashMap<u64, BandedLu>,
}

impl<'a> ShiftInvertExpm<'a> {
    pub fn new(gen: &'a RateGenerator, tol: f64) -> Self {
        Self {
            gen,
            tol,
            factors: HashMap::new(),
        }
    }

    /// `exp(dt Q) v`.
    pub fn apply(&mut self, v: &[f64], dt: f64) -> Result<Vec<f64>> {
        if dt == 0.0 {
            return Ok(v.to_vec());
        }
        let mut pieces = 1u32;
        loop {
            let h = dt / pieces as f64;
            let mut x = v.to_vec();
            let mut ok = true;
            for _ in 0..pieces {
                match self.step(&x, h)? {
                    Some(y) => x = y,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(x);
            }
            if pieces >= 1 << MAX_SPLITS {
                return Err(Error::NumericFailure {
                    what: "Krylov exponential did not converge",
                    residual: self.tol,
                    at: dt,
                });
            }
            pieces *= 2;
        }
    }

    fn factor(&mut self, shift: f64) -> Result<&BandedLu> {
        let key = shift.to_bits();
        if !self.factors.contains_key(&key) {
            let lu = self.gen.shifted_banded(-shift, 1.0).factorize()?;
            self.factors.insert(key, lu);
        }
        Ok(&self.factors[&key])
    }

    /// One exponential action over `dt`, or `None` if the basis limit is hit
    /// before convergence.
    fn step(&mut self, v: &[f64], dt: f64) -> Result<Option<Vec<f64>>> {
        let beta = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if beta == 0.0 {
            return Ok(Some(v.to_vec()));
        }
        // Rounded to a power of two so that factorizations are shared across
        // nearby step sizes.
        let shift = (SHIFT_FRACTION * dt).log2().round().exp2();
        let tol = self.tol;
        let lu = self.factor(shift)?;
        let d = v.len();

        let mut basis: Vec<Vec<f64>> = vec![v.iter().map(|x| x / beta).collect()];
        let mut hess = DMatrix::<f64>::zeros(MAX_DIM + 1, MAX_DIM);
        let mut prev: Option<DVector<f64>> = None;

        for j in 0..MAX_DIM {
            let mut w = basis[j].clone();
            lu.solve_in_place(&mut w);
            // Two passes of classical Gram-Schmidt.
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
                    hess[(i, j)] += c;
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            hess[(j + 1, j)] = norm;
            let m = j + 1;
            let breakdown = norm <= 1e-13 * hess[(j, j)].abs().max(1e-300);

            // The projected exponential costs O(m^3), so convergence is only
            // checked every few basis vectors.
            if breakdown || m % CHECK_EVERY == 0 || m == MAX_DIM {
                let coeffs = match projected_exp(&hess, m, dt, shift) {
                    Some(c) => c,
                    None => return Ok(None),
                };
                let converged = prev.as_ref().is_some_and(|p: &DVector<f64>| {
                    let diff: f64 = (0..m)
                        .map(|i| (coeffs[i] - p.get(i).copied().unwrap_or(0.0)).powi(2))
                        .sum();
                    diff.sqrt() <= tol
                });
                if breakdown || converged {
                    let mut y = vec![0.0; d];
                    for (i, b) in basis.iter().enumerate().take(m) {
                        let c = beta * coeffs[i];
                        y.iter_mut().zip(b).for_each(|(x, bi)| *x += c * bi);
                    }
                    return Ok(Some(y));
                }
                prev = Some(coeffs);
            }
            basis.push(w.into_iter().map(|x| x / norm).collect());
        }
        Ok(None)
    }
}

/// First column of `exp(dt (I - H^{-1}) / shift)` for the leading `m x m`
/// block of the Hessenberg matrix.
fn projected_exp(hess: &DMatrix<f64>, m: usize, dt: f64, shift: f64) -> Option<DVector<f64>> {
    let h = hess.view((0, 0), (m, m)).into_owned();
    let inv = h.try_inverse()?;
    let gen = (DMatrix::<f64>::identity(m, m) - inv) * (dt / shift);
    if !gen.iter().all(|x| x.is_finite()) {
        return None;
    }
    let e = gen.exp();
    let col = e.column(0).into_owned();
    col.iter().all(|x| x.is_finite()).then_some(col)
}
