//! Bath parameters and stationary population distributions.
//!
//! The stationary populations are `P(n, m) ∝ eta1^n eta2^m` with
//! `eta_i = nbar_i / (1 + nbar_i)`. The normalization is the direct lattice
//! sum of the weights, which stays finite at `eta_i = 1` where the usual
//! geometric-series bracket is `0/0`.

use crate::collective_ops::Transition;
use crate::dynamics::RateGenerator;
use crate::error::{Error, Result};
use crate::statespace::EnsembleSpec;

/// Decay rates and bath saturation parameters for both transitions.
///
/// Bare spontaneous decay on transition `i` is `2 gamma_i`. For `eta_i < 1`
/// the rates are `2 gamma_i (1 + nbar_i)` (emission) and `2 gamma_i nbar_i`
/// (absorption). For `eta_i >= 1`, where no finite occupation exists, the
/// transition is modelled as bare decay `2 gamma_i` plus incoherent
/// repumping `2 gamma_i eta_i`; only the ratio `up / down = eta_i` enters the
/// stationary state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    gamma: [f64; 2],
    eta: [f64; 2],
    nbar: [Option<f64>; 2],
}

fn check_gamma(gamma1: f64, gamma2: f64) -> Result<()> {
    for (what, g) in [("gamma1", gamma1), ("gamma2", gamma2)] {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::OutOfRange { what, value: g });
        }
    }
    Ok(())
}

impl BathParams {
    pub fn from_nbar(gamma1: f64, gamma2: f64, nbar1: f64, nbar2: f64) -> Result<Self> {
        check_gamma(gamma1, gamma2)?;
        for (what, nb) in [("nbar1", nbar1), ("nbar2", nbar2)] {
            if !(nb.is_finite() && nb >= 0.0) {
                return Err(Error::OutOfRange { what, value: nb });
            }
        }
        Ok(Self {
            gamma: [gamma1, gamma2],
            eta: [nbar1 / (1.0 + nbar1), nbar2 / (1.0 + nbar2)],
            nbar: [Some(nbar1), Some(nbar2)],
        })
    }

    /// Accepts any finite `eta >= 0`; values `>= 1` select the repumping model.
    pub fn from_eta(gamma1: f64, gamma2: f64, eta1: f64, eta2: f64) -> Result<Self> {
        check_gamma(gamma1, gamma2)?;
        for (what, e) in [("eta1", eta1), ("eta2", eta2)] {
            if !(e.is_finite() && e >= 0.0) {
                return Err(Error::OutOfRange { what, value: e });
            }
        }
        let nbar = |e: f64| (e < 1.0).then(|| e / (1.0 - e));
        Ok(Self {
            gamma: [gamma1, gamma2],
            eta: [eta1, eta2],
            nbar: [nbar(eta1), nbar(eta2)],
        })
    }

    /// `from_eta` with `gamma1 = gamma2 = 1`.
    pub fn unit_gamma(eta1: f64, eta2: f64) -> Result<Self> {
        Self::from_eta(1.0, 1.0, eta1, eta2)
    }

    pub fn gamma(&self, t: Transition) -> f64 {
        self.gamma[t.slot()]
    }

    pub fn eta(&self, t: Transition) -> f64 {
        self.eta[t.slot()]
    }

    /// Bath occupation, `None` when `eta >= 1`.
    pub fn nbar(&self, t: Transition) -> Option<f64> {
        self.nbar[t.slot()]
    }

    /// Same bath with both decay rates multiplied by `factor`.
    pub fn scaled_gammas(&self, factor: f64) -> Result<Self> {
        check_gamma(self.gamma[0] * factor, self.gamma[1] * factor)?;
        Ok(Self {
            gamma: [self.gamma[0] * factor, self.gamma[1] * factor],
            ..*self
        })
    }

    /// Emission rate coefficient, multiplied by the squared jump amplitude.
    pub fn down_rate(&self, t: Transition) -> f64 {
        let g = self.gamma(t);
        match self.nbar(t) {
            Some(nb) => 2.0 * g * (1.0 + nb),
            None => 2.0 * g,
        }
    }

    /// Absorption (or repumping) rate coefficient.
    pub fn up_rate(&self, t: Transition) -> f64 {
        let g = self.gamma(t);
        match self.nbar(t) {
            Some(nb) => 2.0 * g * nb,
            None => 2.0 * g * self.eta(t),
        }
    }
}

/// Normalized populations over the lattice, indexed by statespace ordinals.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationDistribution {
    values: Vec<f64>,
    spec: EnsembleSpec,
}

impl PopulationDistribution {
    /// Clamps round-off negatives (down to `-1e-12`) and renormalizes.
    pub fn new(spec: EnsembleSpec, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                got: values.len(),
            });
        }
        let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for v in values.iter_mut() {
            if !v.is_finite() {
                return Err(Error::InvalidParameter("non-finite population".into()));
            }
            if *v < 0.0 {
                if *v < -1e-12 * scale.max(1.0) {
                    return Err(Error::OutOfRange {
                        what: "population",
                        value: *v,
                    });
                }
                *v = 0.0;
            }
        }
        let total: f64 = values.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("distribution has zero mass".into()));
        }
        values.iter_mut().for_each(|v| *v /= total);
        Ok(Self { values, spec })
    }

    pub fn point_mass(spec: EnsembleSpec, n: usize, m: usize) -> Result<Self> {
        let idx = spec.index(n as i64, m as i64)?;
        let mut values = vec![0.0; spec.dim()];
        values[idx] = 1.0;
        Ok(Self { values, spec })
    }

    pub fn uniform(spec: EnsembleSpec) -> Self {
        let d = spec.dim();
        Self {
            values: vec![1.0 / d as f64; d],
            spec,
        }
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Population of `(n, m)`; panics off the lattice.
    pub fn at(&self, n: usize, m: usize) -> f64 {
        self.values[self.spec.index_unchecked(n, m)]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }
}

/// Stationary populations `∝ eta1^n eta2^m` for `0 <= eta_i <= 1`.
pub fn closed_form_distribution(
    spec: &EnsembleSpec,
    eta1: f64,
    eta2: f64,
) -> Result<PopulationDistribution> {
    for (what, e) in [("eta1", eta1), ("eta2", eta2)] {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::OutOfRange { what, value: e });
        }
    }
    let weights = if eta1.min(eta2) < 1e-3 || spec.atoms() > 300 {
        log_weights(spec, eta1, eta2)
    } else {
        power_weights(spec, eta1, eta2)
    };
    PopulationDistribution::new(*spec, weights)
}

fn power_weights(spec: &EnsembleSpec, eta1: f64, eta2: f64) -> Vec<f64> {
    let atoms = spec.atoms();
    let mut out = Vec::with_capacity(spec.dim());
    let mut row = 1.0; // eta2^m
    for m in 0..=atoms {
        let mut w = row;
        for _ in 0..=m {
            out.push(w);
            w *= eta1;
        }
        row *= eta2;
    }
    out
}

/// Weights shifted by their maximum log weight so the largest entry is 1.
fn log_weights(spec: &EnsembleSpec, eta1: f64, eta2: f64) -> Vec<f64> {
    // n ln(eta) with 0 * ln(0) = 0.
    let term = |k: usize, eta: f64| if k == 0 { 0.0 } else { k as f64 * eta.ln() };
    let logs: Vec<f64> = spec
        .states()
        .map(|(n, m)| term(n, eta1) + term(m, eta2))
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    logs.into_iter().map(|l| (l - top).exp()).collect()
}

/// Tolerance on `max |Q P|` accepted from the null-space iteration, per unit
/// of the largest outflow rate once that exceeds 1.
pub const STATIONARY_RESIDUAL_TOL: f64 = 1e-10;

/// Stationary distribution of a rate generator by shifted inverse iteration.
///
/// Seeds with the closed form when both `eta` lie in `[0, 1]`, uniform
/// otherwise. When `eta2 = 0` the ground state `(0, 0)` is absorbing and is
/// returned directly.
pub fn stationary_numeric(gen: &RateGenerator) -> Result<PopulationDistribution> {
    let spec = *gen.spec();
    let bath = gen.bath();
    if bath.eta(Transition::Two) == 0.0 {
        return PopulationDistribution::point_mass(spec, 0, 0);
    }
    let (e1, e2) = (bath.eta(Transition::One), bath.eta(Transition::Two));
    let mut x = if e1 <= 1.0 && e2 <= 1.0 {
        closed_form_distribution(&spec, e1, e2)?.into_values()
    } else {
        vec![1.0 / spec.dim() as f64; spec.dim()]
    };

    let norm = gen.max_outflow().max(1.0);
    let shift = 1e-9 * norm;
    let tol = STATIONARY_RESIDUAL_TOL * norm;
    let lu = gen.shifted_banded(-1.0, shift).factorize()?;
    let mut residual = f64::INFINITY;
    for _ in 0..50 {
        lu.solve_in_place(&mut x);
        let total: f64 = x.iter().sum();
        if !(total.is_finite() && total != 0.0) {
            break;
        }
        x.iter_mut().for_each(|v| *v /= total);
        let prev = residual;
        residual = gen.apply(&x).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if residual <= 1e-3 * STATIONARY_RESIDUAL_TOL || residual >= 0.5 * prev {
            break;
        }
    }
    if !(residual <= tol) {
        return Err(Error::NumericFailure {
            what: "stationary null-space iteration",
            residual,
            at: f64::INFINITY,
        });
    }
    PopulationDistribution::new(spec, x)
}
