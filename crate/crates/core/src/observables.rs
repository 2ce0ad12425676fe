//! Intensities, zero-delay correlations, Cauchy–Schwarz parameters and
//! photon-statistics labels.
//!
//! Every moment is a diagonal expectation: an emission `J_i` maps a
//! population on `(n, m)` to its neighbour with weight `|J_i |n, m>|^2`, so
//! `<J_i^+ J_j^+ J_j J_i>` is the transition-`j` intensity of the jumped
//! (unnormalized) population `J_i rho J_i^+`.

use crate::collective_ops::{emission, Transition};
use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};
use crate::statespace::EnsembleSpec;
use crate::steadystate::{BathParams, PopulationDistribution};

/// Equality band used by all classifications.
pub const DEAD_BAND: f64 = 1e-9;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J / K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Diagonal part of `J_i rho J_i^+` for populations `values`.
pub fn jump_state(i: Transition, spec: &EnsembleSpec, values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for ((n, m), &p) in spec.states().zip(values) {
        if p == 0.0 {
            continue;
        }
        if let Some((w, (tn, tm))) = emission(i, spec.atoms(), n, m) {
            out[spec.index_unchecked(tn, tm)] += w * p;
        }
    }
    out
}

/// `Tr[J_i^+ J_i x]` for an arbitrary population vector.
pub fn intensity_of(i: Transition, spec: &EnsembleSpec, values: &[f64]) -> f64 {
    spec.states()
        .zip(values)
        .filter_map(|((n, m), &p)| emission(i, spec.atoms(), n, m).map(|(w, _)| w * p))
        .sum()
}

/// `G1_i(0) = <J_i^+ J_i>`.
pub fn intensity(i: Transition, p: &PopulationDistribution) -> f64 {
    intensity_of(i, p.spec(), p.values())
}

/// `g2_ij(0) = <J_i^+ J_j^+ J_j J_i> / (G1_i G1_j)`.
pub fn g2_zero(i: Transition, j: Transition, p: &PopulationDistribution) -> Result<f64> {
    let gi = intensity(i, p);
    let gj = intensity(j, p);
    for (g, t) in [(gi, i), (gj, j)] {
        if g <= 0.0 {
            return Err(Error::UndefinedCorrelation {
                i: i.label(),
                j: j.label(),
                zero: t.label(),
            });
        }
    }
    let jumped = jump_state(i, p.spec(), p.values());
    Ok(intensity_of(j, p.spec(), &jumped) / (gi * gj))
}

/// Cauchy–Schwarz parameter `chi_k = g2_11 g2_22 / g2_cross^2` with the cross
/// term `g2_12` for `k = 1` and `g2_21` for `k = 2`. Values below 1 violate
/// the classical inequality.
pub fn csi_chi(k: Transition, p: &PopulationDistribution) -> Result<f64> {
    use Transition::{One, Two};
    let cross = match k {
        One => g2_zero(One, Two, p)?,
        Two => g2_zero(Two, One, p)?,
    };
    if cross <= 0.0 {
        return Err(Error::UndefinedCsi { k: k.label() });
    }
    Ok(g2_zero(One, One, p)? * g2_zero(Two, Two, p)? / (cross * cross))
}

/// Signal-to-noise ratio `G1_i / nbar_i`. `None` when the bath has no finite
/// occupation (`eta_i >= 1`); `+inf` for an empty bath.
pub fn snr(i: Transition, p: &PopulationDistribution, bath: &BathParams) -> Option<f64> {
    let nbar = bath.nbar(i)?;
    if nbar == 0.0 {
        return Some(f64::INFINITY);
    }
    Some(intensity(i, p) / nbar)
}

/// Planck occupation `1 / (exp(x) - 1)` for `x = hbar omega / (k_B T)`.
pub fn nbar_from_energy_ratio(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "energy ratio must be positive, got {x}"
        )));
    }
    Ok(1.0 / x.exp_m1())
}

/// Thermal occupation at angular frequency `omega` (rad/s) and temperature
/// `temperature` (K).
pub fn nbar_from_temperature(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "transition frequency must be positive, got {omega}"
        )));
    }
    if !(temperature > 0.0) || temperature.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    nbar_from_energy_ratio(HBAR * omega / (BOLTZMANN * temperature))
}

/// Pseudo-thermal occupation `R d^2 / (gamma hbar^2)` of an incoherent pump.
pub fn nbar_from_pump(pump: f64, dipole: f64, gamma: f64) -> Result<f64> {
    if !(pump >= 0.0 && pump.is_finite()) {
        return Err(Error::InvalidParameter(format!("pump strength {pump}")));
    }
    if !dipole.is_finite() {
        return Err(Error::InvalidParameter(format!("dipole moment {dipole}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("decay rate {gamma}")));
    }
    Ok(pump * dipole * dipole / (gamma * HBAR * HBAR))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    SubPoissonian,
    Poissonian,
    SuperPoissonian,
}

impl Statistics {
    pub fn of(g2_zero: f64) -> Self {
        if g2_zero < 1.0 - DEAD_BAND {
            Statistics::SubPoissonian
        } else if g2_zero > 1.0 + DEAD_BAND {
            Statistics::SuperPoissonian
        } else {
            Statistics::Poissonian
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Statistics::SubPoissonian => "sub-poissonian",
            Statistics::Poissonian => "poissonian",
            Statistics::SuperPoissonian => "super-poissonian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bunching {
    AntiBunched,
    Bunched,
    SuperBunched,
    Unclassified,
}

impl Bunching {
    pub fn as_str(self) -> &'static str {
        match self {
            Bunching::AntiBunched => "anti-bunched",
            Bunching::Bunched => "bunched",
            Bunching::SuperBunched => "super-bunched",
            Bunching::Unclassified => "unclassified",
        }
    }

    pub fn is_bunched(self) -> bool {
        matches!(self, Bunching::Bunched | Bunching::SuperBunched)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhotonStatsLabel {
    pub statistics: Statistics,
    pub bunching: Bunching,
}

/// Zero-delay value and delay series of `g2_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    i: Transition,
    j: Transition,
    g2_zero: f64,
    grid: TimeGrid,
    values: Vec<f64>,
    classification: PhotonStatsLabel,
}

impl CorrelationSeries {
    pub fn new(i: Transition, j: Transition, g2_zero: f64, grid: TimeGrid, values: Vec<f64>) -> Self {
        let classification = classify_values(g2_zero, grid.taus(), &values);
        Self {
            i,
            j,
            g2_zero,
            grid,
            values,
            classification,
        }
    }

    pub fn transitions(&self) -> (Transition, Transition) {
        (self.i, self.j)
    }

    pub fn g2_zero(&self) -> f64 {
        self.g2_zero
    }

    pub fn taus(&self) -> &[f64] {
        self.grid.taus()
    }

    pub fn g2_values(&self) -> &[f64] {
        &self.values
    }

    pub fn classification(&self) -> PhotonStatsLabel {
        self.classification
    }
}

/// Statistics from `g2(0)`; bunching from the first delay at which `g2(tau)`
/// differs from `g2(0)` by more than the dead band.
pub fn classify(series: &CorrelationSeries) -> PhotonStatsLabel {
    classify_values(series.g2_zero, series.taus(), &series.values)
}

fn classify_values(g0: f64, taus: &[f64], values: &[f64]) -> PhotonStatsLabel {
    let statistics = Statistics::of(g0);
    let first_change = taus
        .iter()
        .zip(values)
        .filter(|(&t, _)| t > 0.0)
        .map(|(_, &g)| g - g0)
        .find(|d| d.abs() > DEAD_BAND);
    let bunching = match first_change {
        None => Bunching::Unclassified,
        Some(d) if d > 0.0 => Bunching::AntiBunched,
        Some(_) if g0 > 2.0 => Bunching::SuperBunched,
        Some(_) => Bunching::Bunched,
    };
    PhotonStatsLabel {
        statistics,
        bunching,
    }
}
