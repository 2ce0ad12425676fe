//! Collective fluorescence of `N` three-level ladder atoms driven only by a
//! classical (thermal or pseudo-thermal) bath.
//!
//! The crate works in the fully symmetric subspace `|N, n, m>` where the
//! master equation reduces to a birth–death chain on a triangular lattice.
//! It provides the stationary populations, intensities, zero-delay and
//! delayed second-order correlations, Cauchy–Schwarz parameters and a
//! brute-force full-Hilbert-space reference for `N <= 4`.

mod banded;
pub mod collective_ops;
pub mod dynamics;
pub mod error;
pub mod observables;
pub mod oracle;
pub mod statespace;
pub mod steadystate;

pub use collective_ops::{jump_rates, matrix_element, CollectiveOpId, JumpRates, MatrixElement, Transition};
pub use dynamics::{
    build_generator, evolve, evolve_with, propagate, regression_correlator,
    regression_correlator_with, Method, PropagationOptions,
    RateGenerator, TimeGrid,
};
pub use error::{Error, Result};
pub use observables::{
    classify, csi_chi, g2_zero, intensity, snr, Bunching, CorrelationSeries, PhotonStatsLabel,
    Statistics,
};
pub use statespace::{dimension, EnsembleSpec};
pub use steadystate::{closed_form_distribution, stationary_numeric, BathParams, PopulationDistribution};
