//! Symmetric collective states `|N, n, m>` of a ladder ensemble.
//!
//! A state has `n` atoms in the upper level `|1>`, `m - n` in the middle
//! level `|2>` and `N - m` in the ground level `|3>`. Lattice points are
//! ordered row-major with `m` outer and `n` inner, so the flat ordinal of
//! `(n, m)` is `m (m + 1) / 2 + n`.

use crate::error::{Error, Result};

/// Number of lattice points `(N + 1)(N + 2) / 2`.
pub fn dimension(atoms: usize) -> Result<usize> {
    if atoms == 0 {
        return Err(Error::InvalidEnsemble { atoms: 0 });
    }
    Ok((atoms + 1) * (atoms + 2) / 2)
}

/// An ensemble of `atoms` identical ladder atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnsembleSpec {
    atoms: usize,
    dim: usize,
}

impl EnsembleSpec {
    pub fn new(atoms: usize) -> Result<Self> {
        let dim = dimension(atoms)?;
        Ok(Self { atoms, dim })
    }

    /// Accepts a signed count so callers parsing user input get a typed error.
    pub fn from_signed(atoms: i64) -> Result<Self> {
        if atoms < 1 {
            return Err(Error::InvalidEnsemble { atoms });
        }
        Self::new(atoms as usize)
    }

    #[inline]
    pub fn atoms(&self) -> usize {
        self.atoms
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn contains(&self, n: i64, m: i64) -> bool {
        0 <= n && n <= m && m <= self.atoms as i64
    }

    pub fn index(&self, n: i64, m: i64) -> Result<usize> {
        if !self.contains(n, m) {
            return Err(Error::InvalidState {
                n,
                m,
                atoms: self.atoms,
            });
        }
        Ok(self.index_unchecked(n as usize, m as usize))
    }

    /// Ordinal of a point already known to be on the lattice.
    #[inline]
    pub fn index_unchecked(&self, n: usize, m: usize) -> usize {
        debug_assert!(n <= m && m <= self.atoms);
        m * (m + 1) / 2 + n
    }

    pub fn unindex(&self, ordinal: usize) -> Result<(usize, usize)> {
        if ordinal >= self.dim {
            return Err(Error::InvalidOrdinal {
                ordinal,
                dim: self.dim,
            });
        }
        // Largest m with m(m+1)/2 <= ordinal; the float guess is corrected in
        // both directions.
        let mut m = ((((8 * ordinal + 1) as f64).sqrt() - 1.0) / 2.0) as usize;
        while m * (m + 1) / 2 > ordinal {
            m -= 1;
        }
        while (m + 1) * (m + 2) / 2 <= ordinal {
            m += 1;
        }
        Ok((ordinal - m * (m + 1) / 2, m))
    }

    /// All lattice points in ordinal order.
    pub fn states(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.atoms).flat_map(|m| (0..=m).map(move |n| (n, m)))
    }
}

/// Occupations `(n1, n2, n3)` of the three bare levels for lattice point `(n, m)`.
#[inline]
pub fn occupations(atoms: usize, n: usize, m: usize) -> (usize, usize, usize) {
    (n, m - n, atoms - m)
}
