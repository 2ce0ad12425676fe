//! Parameter sets behind each figure preset.
//!
//! | preset | content |
//! |--------|---------|
//! | fig2  | `g2_11(0)` surface, N = 150, eta1, eta2 in k * 1.25 / 50, k = 1..=50 |
//! | fig3a | `g2_11(0)` vs N = 1..=20 for eta1 = eta2 in {1, 0.5, 0.1}, with bunching markers |
//! | fig3b | `g2_11(tau)` for (N, eta1, eta2) = (15, 0.6, 0.6), (6, 0.8, 0.05), (1, 0.2, 0.2) |
//! | fig4a | `g2_12(0)` vs eta1 = eta2 in k * 1.25 / 50 for N in {2, 50, 150} |
//! | fig4b | `g2_12(0)` along the locus where min(SNR1, SNR2) first exceeds the threshold |
//! | fig5  | `chi1` vs eta1 = eta2 in k / 100, k = 1..=100, for N in {4, 10, 150} |
//!
//! Points with eta above 1 use the repumping model and the numerical
//! stationary state.

use anyhow::Result;
use ladder_dicke_core::observables::snr;
use ladder_dicke_core::{BathParams, EnsembleSpec, TimeGrid, Transition};
use rayon::prelude::*;

use crate::config::{PresetId, SweepConfig, TauScale, TauSpec};
use crate::run::{evaluate, run_points, stationary, thread_pool, PointSpec, Row, SeriesRequest};

pub const FIG2_ATOMS: usize = 150;
pub const ETA_AXIS_MAX: f64 = 1.25;
pub const ETA_AXIS_POINTS: usize = 50;
pub const FIG3A_MAX_ATOMS: usize = 20;
pub const FIG3A_ETAS: [f64; 3] = [1.0, 0.5, 0.1];
pub const FIG3B_CURVES: [(usize, f64, f64); 3] = [(15, 0.6, 0.6), (6, 0.8, 0.05), (1, 0.2, 0.2)];
pub const FIG4_ATOMS: [usize; 3] = [2, 50, 150];
pub const FIG5_ATOMS: [usize; 3] = [4, 10, 150];
/// Resolution of the eta2 scan behind fig4b.
pub const FIG4B_SCAN_STEPS: usize = 1000;

/// `k * 1.25 / 50` for `k = 1..=50`.
pub fn eta_axis() -> Vec<f64> {
    (1..=ETA_AXIS_POINTS)
        .map(|k| k as f64 * ETA_AXIS_MAX / ETA_AXIS_POINTS as f64)
        .collect()
}

/// Delay grid for fig3b unless the configuration gives one.
pub fn fig3b_tau() -> TauSpec {
    TauSpec {
        start: 0.0,
        stop: 20.0,
        points: 201,
        scale: TauScale::Linear,
    }
}

/// Short log grid that only resolves the initial slope, used for markers.
fn marker_grid() -> TimeGrid {
    TimeGrid::logarithmic(1e-4, 1e-1, 8).expect("static grid")
}

fn with_gamma(mut p: PointSpec, gamma: [f64; 2]) -> PointSpec {
    p.gamma = gamma;
    p
}

pub fn run_preset(id: PresetId, cfg: &SweepConfig) -> Result<Vec<Row>> {
    let g = cfg.gamma;
    let one = (Transition::One, Transition::One);
    match id {
        PresetId::Fig2 => {
            let axis = eta_axis();
            let points: Vec<PointSpec> = axis
                .iter()
                .flat_map(|&e1| axis.iter().map(move |&e2| (e1, e2)))
                .map(|(e1, e2)| with_gamma(PointSpec::eta(FIG2_ATOMS, e1, e2), g))
                .collect();
            run_points(&points, &SeriesRequest::none())
        }
        PresetId::Fig3a => {
            let points: Vec<PointSpec> = FIG3A_ETAS
                .iter()
                .flat_map(|&e| (1..=FIG3A_MAX_ATOMS).map(move |n| PointSpec::eta(n, e, e)))
                .map(|p| with_gamma(p, g))
                .collect();
            run_points(&points, &SeriesRequest::new(marker_grid(), vec![one]))
        }
        PresetId::Fig3b => {
            let tau = cfg.tau.clone().unwrap_or_else(fig3b_tau);
            let points: Vec<PointSpec> = FIG3B_CURVES
                .iter()
                .map(|&(n, e1, e2)| with_gamma(PointSpec::eta(n, e1, e2), g))
                .collect();
            run_points(&points, &SeriesRequest::new(tau.grid()?, vec![one]))
        }
        PresetId::Fig4a => {
            let points: Vec<PointSpec> = FIG4_ATOMS
                .iter()
                .flat_map(|&n| eta_axis().into_iter().map(move |e| PointSpec::eta(n, e, e)))
                .map(|p| with_gamma(p, g))
                .collect();
            run_points(&points, &SeriesRequest::none())
        }
        PresetId::Fig4b => {
            // The SNR needs a finite bath occupation, so eta1 stays below 1.
            let jobs: Vec<(usize, f64)> = FIG4_ATOMS
                .iter()
                .flat_map(|&n| {
                    (1..ETA_AXIS_POINTS).map(move |k| (n, k as f64 / ETA_AXIS_POINTS as f64))
                })
                .collect();
            let pool = thread_pool()?;
            Ok(pool.install(|| {
                jobs.par_iter()
                    .map(|&(n, e1)| snr_locus(n, e1, g, cfg.snr_min))
                    .collect()
            }))
        }
        PresetId::Fig5 => {
            let points: Vec<PointSpec> = FIG5_ATOMS
                .iter()
                .flat_map(|&n| (1..=100).map(move |k| PointSpec::eta(n, k as f64 / 100.0, k as f64 / 100.0)))
                .map(|p| with_gamma(p, g))
                .collect();
            run_points(&points, &SeriesRequest::none())
        }
    }
}

/// Smallest `eta2 = k / FIG4B_SCAN_STEPS` at which both SNRs exceed
/// `threshold`, or `None` if the scan runs out.
pub fn first_eta2_above(atoms: usize, eta1: f64, gamma: [f64; 2], threshold: f64) -> Result<Option<f64>> {
    let spec = EnsembleSpec::new(atoms)?;
    for k in 1..FIG4B_SCAN_STEPS {
        let e2 = k as f64 / FIG4B_SCAN_STEPS as f64;
        let bath = BathParams::from_eta(gamma[0], gamma[1], eta1, e2)?;
        let p = stationary(&spec, &bath)?;
        let worst = Transition::BOTH
            .iter()
            .filter_map(|&t| snr(t, &p, &bath))
            .fold(f64::INFINITY, f64::min);
        if worst > threshold {
            return Ok(Some(e2));
        }
    }
    Ok(None)
}

fn snr_locus(atoms: usize, eta1: f64, gamma: [f64; 2], threshold: f64) -> Row {
    match first_eta2_above(atoms, eta1, gamma, threshold) {
        Ok(Some(e2)) => evaluate(
            &with_gamma(PointSpec::eta(atoms, eta1, e2), gamma),
            &SeriesRequest::none(),
        ),
        // No admissible eta2: the row keeps N and eta1, everything else null.
        Ok(None) => Row {
            atoms,
            eta: [Some(eta1), None],
            nbar: [Some(eta1 / (1.0 - eta1)), None],
            ..Row::default()
        },
        Err(e) => Row {
            atoms,
            eta: [Some(eta1), None],
            error: Some(e.to_string()),
            ..Row::default()
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_endpoints() {
        let a = eta_axis();
        assert_eq!(a.len(), 50);
        assert_eq!(a[0], 0.025);
        assert_eq!(a[49], 1.25);
    }

    #[test]
    fn locus_satisfies_threshold() {
        let g = [1.0, 1.0];
        let e2 = first_eta2_above(50, 0.3, g, 10.0).unwrap().unwrap();
        let spec = EnsembleSpec::new(50).unwrap();
        let check = |e2: f64| {
            let bath = BathParams::unit_gamma(0.3, e2).unwrap();
            let p = stationary(&spec, &bath).unwrap();
            Transition::BOTH
                .iter()
                .map(|&t| snr(t, &p, &bath).unwrap())
                .fold(f64::INFINITY, f64::min)
        };
        assert!(check(e2) > 10.0);
        assert!(check(e2 - 1.0 / FIG4B_SCAN_STEPS as f64) <= 10.0);
    }

    #[test]
    fn tiny_ensemble_never_reaches_threshold() {
        assert_eq!(first_eta2_above(2, 0.5, [1.0, 1.0], 10.0).unwrap(), None);
    }
}
