//! Collective operators `S_ij = sum_k |i>_k <j|` on the symmetric lattice.
//!
//! On `|N, n, m>` with occupations `(n1, n2, n3) = (n, m - n, N - m)` every
//! transition operator moves one atom between adjacent levels:
//!
//! | op    | target       | squared amplitude          |
//! |-------|--------------|----------------------------|
//! | `S21` | `(n-1, m)`   | `n (m - n + 1)`            |
//! | `S12` | `(n+1, m)`   | `(n + 1)(m - n)`           |
//! | `S32` | `(n, m-1)`   | `(m - n)(N - m + 1)`       |
//! | `S23` | `(n, m+1)`   | `(m - n + 1)(N - m)`       |
//!
//! These closed forms are checked element by element against the brute-force
//! symmetrized construction in [`crate::oracle`].

use crate::error::Result;
use crate::statespace::EnsembleSpec;
use crate::steadystate::BathParams;

/// One of the two radiative transitions: `1` is `|1> -> |2>`, `2` is `|2> -> |3>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transition {
    One,
    Two,
}

impl Transition {
    pub const BOTH: [Transition; 2] = [Transition::One, Transition::Two];

    pub fn label(self) -> u8 {
        match self {
            Transition::One => 1,
            Transition::Two => 2,
        }
    }

    pub fn from_label(label: u8) -> Option<Self> {
        match label {
            1 => Some(Transition::One),
            2 => Some(Transition::Two),
            _ => None,
        }
    }

    /// The emission operator `J_1 = S21` or `J_2 = S32`.
    pub fn lowering(self) -> CollectiveOpId {
        match self {
            Transition::One => CollectiveOpId::S21,
            Transition::Two => CollectiveOpId::S32,
        }
    }

    pub fn raising(self) -> CollectiveOpId {
        match self {
            Transition::One => CollectiveOpId::S12,
            Transition::Two => CollectiveOpId::S23,
        }
    }

    #[inline]
    /// Array index, 0 for transition 1.
    pub fn slot(self) -> usize {
        match self {
            Transition::One => 0,
            Transition::Two => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CollectiveOpId {
    S12,
    S21,
    S23,
    S32,
    S11,
    S22,
    S33,
}

impl CollectiveOpId {
    pub const ALL: [CollectiveOpId; 7] = [
        CollectiveOpId::S12,
        CollectiveOpId::S21,
        CollectiveOpId::S23,
        CollectiveOpId::S32,
        CollectiveOpId::S11,
        CollectiveOpId::S22,
        CollectiveOpId::S33,
    ];

    /// Level pair `(i, j)` of `|i><j|`, levels numbered 1..=3.
    pub fn levels(self) -> (usize, usize) {
        match self {
            CollectiveOpId::S12 => (1, 2),
            CollectiveOpId::S21 => (2, 1),
            CollectiveOpId::S23 => (2, 3),
            CollectiveOpId::S32 => (3, 2),
            CollectiveOpId::S11 => (1, 1),
            CollectiveOpId::S22 => (2, 2),
            CollectiveOpId::S33 => (3, 3),
        }
    }

    pub fn adjoint(self) -> Self {
        match self {
            CollectiveOpId::S12 => CollectiveOpId::S21,
            CollectiveOpId::S21 => CollectiveOpId::S12,
            CollectiveOpId::S23 => CollectiveOpId::S32,
            CollectiveOpId::S32 => CollectiveOpId::S23,
            diag => diag,
        }
    }
}

/// Result of applying a collective operator to a lattice state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixElement {
    Annihilated,
    Maps {
        amplitude: f64,
        target: (usize, usize),
    },
}

impl MatrixElement {
    pub fn amplitude(&self) -> f64 {
        match *self {
            MatrixElement::Annihilated => 0.0,
            MatrixElement::Maps { amplitude, .. } => amplitude,
        }
    }

    pub fn target(&self) -> Option<(usize, usize)> {
        match *self {
            MatrixElement::Annihilated => None,
            MatrixElement::Maps { target, .. } => Some(target),
        }
    }
}

/// Squared amplitude and target of an off-diagonal operator, or `None` when
/// the state is annihilated. Products are formed in integers.
#[inline]
pub(crate) fn transition_weight(
    op: CollectiveOpId,
    atoms: usize,
    n: usize,
    m: usize,
) -> Option<(u64, (usize, usize))> {
    let (n1, n2, n3) = (n as u64, (m - n) as u64, (atoms - m) as u64);
    let (weight, target) = match op {
        CollectiveOpId::S21 if n1 > 0 => (n1 * (n2 + 1), (n - 1, m)),
        CollectiveOpId::S12 if n2 > 0 => ((n1 + 1) * n2, (n + 1, m)),
        CollectiveOpId::S32 if n2 > 0 => (n2 * (n3 + 1), (n, m - 1)),
        CollectiveOpId::S23 if n3 > 0 => ((n2 + 1) * n3, (n, m + 1)),
        _ => return None,
    };
    Some((weight, target))
}

/// `S_op |N, n, m> = amplitude |N, target>`.
pub fn matrix_element(
    op: CollectiveOpId,
    n: i64,
    m: i64,
    spec: &EnsembleSpec,
) -> Result<MatrixElement> {
    spec.index(n, m)?;
    let (n, m) = (n as usize, m as usize);
    let diagonal = |value: usize| {
        if value == 0 {
            MatrixElement::Annihilated
        } else {
            MatrixElement::Maps {
                amplitude: value as f64,
                target: (n, m),
            }
        }
    };
    Ok(match op {
        CollectiveOpId::S11 => diagonal(n),
        CollectiveOpId::S22 => diagonal(m - n),
        CollectiveOpId::S33 => diagonal(spec.atoms() - m),
        _ => match transition_weight(op, spec.atoms(), n, m) {
            Some((w, target)) => MatrixElement::Maps {
                amplitude: (w as f64).sqrt(),
                target,
            },
            None => MatrixElement::Annihilated,
        },
    })
}

/// Outgoing rates of the diagonal-sector master equation from one lattice state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JumpRates {
    /// Emission on transition 1, to `(n - 1, m)`.
    pub down1: f64,
    /// Absorption on transition 1, to `(n + 1, m)`.
    pub up1: f64,
    /// Emission on transition 2, to `(n, m - 1)`.
    pub down2: f64,
    /// Absorption on transition 2, to `(n, m + 1)`.
    pub up2: f64,
}

impl JumpRates {
    pub fn total(&self) -> f64 {
        self.down1 + self.up1 + self.down2 + self.up2
    }

    /// `(rate, target)` pairs for the moves that stay on the lattice.
    pub fn moves(&self, n: usize, m: usize) -> impl Iterator<Item = (f64, (usize, usize))> {
        let cand = [
            (self.down1, n.checked_sub(1).map(|n| (n, m))),
            (self.up1, Some((n + 1, m))),
            (self.down2, m.checked_sub(1).map(|m| (n, m))),
            (self.up2, Some((n, m + 1))),
        ];
        cand.into_iter()
            .filter_map(|(rate, target)| (rate > 0.0).then_some((rate, target?)))
    }
}

pub fn jump_rates(n: i64, m: i64, spec: &EnsembleSpec, bath: &BathParams) -> Result<JumpRates> {
    spec.index(n, m)?;
    Ok(jump_rates_unchecked(n as usize, m as usize, spec.atoms(), bath))
}

#[inline]
pub(crate) fn jump_rates_unchecked(
    n: usize,
    m: usize,
    atoms: usize,
    bath: &BathParams,
) -> JumpRates {
    let w = |op| transition_weight(op, atoms, n, m).map_or(0.0, |(w, _)| w as f64);
    JumpRates {
        down1: bath.down_rate(Transition::One) * w(CollectiveOpId::S21),
        up1: bath.up_rate(Transition::One) * w(CollectiveOpId::S12),
        down2: bath.down_rate(Transition::Two) * w(CollectiveOpId::S32),
        up2: bath.up_rate(Transition::Two) * w(CollectiveOpId::S23),
    }
}

/// Squared emission amplitude `|J_i |n, m>|^2` with the post-jump state.
#[inline]
pub(crate) fn emission(
    transition: Transition,
    atoms: usize,
    n: usize,
    m: usize,
) -> Option<(f64, (usize, usize))> {
    transition_weight(transition.lowering(), atoms, n, m).map(|(w, t)| (w as f64, t))
}
