//! Evaluation of parameter points, in parallel, in input order.

use anyhow::{anyhow, Result};
use ladder_dicke_core::observables::{snr, Bunching, Statistics};
use ladder_dicke_core::{
    build_generator, closed_form_distribution, csi_chi, g2_zero, intensity, regression_correlator,
    stationary_numeric, BathParams, EnsembleSpec, Error, PopulationDistribution, TimeGrid,
    Transition,
};
use rayon::prelude::*;

use crate::config::{BathValue, SweepConfig};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "LADDER_DICKE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSpec {
    pub atoms: usize,
    pub bath: [BathValue; 2],
    pub gamma: [f64; 2],
}

impl PointSpec {
    pub fn eta(atoms: usize, eta1: f64, eta2: f64) -> Self {
        Self {
            atoms,
            bath: [BathValue::Eta(eta1), BathValue::Eta(eta2)],
            gamma: [1.0, 1.0],
        }
    }

    pub fn bath_params(&self) -> Result<BathParams, Error> {
        let [g1, g2] = self.gamma;
        match self.bath {
            [BathValue::Nbar(a), BathValue::Nbar(b)] => BathParams::from_nbar(g1, g2, a, b),
            [x, y] => BathParams::from_eta(g1, g2, eta_of(x), eta_of(y)),
        }
    }
}

fn eta_of(v: BathValue) -> f64 {
    match v {
        BathValue::Eta(e) => e,
        BathValue::Nbar(nb) => nb / (1.0 + nb),
    }
}

/// Correlator series requested for every point.
#[derive(Debug, Clone, Default)]
pub struct SeriesRequest {
    pub grid: Option<TimeGrid>,
    pub pairs: Vec<(Transition, Transition)>,
}

impl SeriesRequest {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(grid: TimeGrid, pairs: Vec<(Transition, Transition)>) -> Self {
        Self {
            grid: Some(grid),
            pairs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesColumn {
    pub pair: (Transition, Transition),
    /// `None` entries when the correlator is undefined.
    pub values: Vec<Option<f64>>,
}

/// One output row. `None` marks an undefined observable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Row {
    pub atoms: usize,
    pub eta: [Option<f64>; 2],
    pub nbar: [Option<f64>; 2],
    pub intensity: [Option<f64>; 2],
    /// Indexed `[i - 1][j - 1]`.
    pub g2: [[Option<f64>; 2]; 2],
    pub chi: [Option<f64>; 2],
    pub snr: [Option<f64>; 2],
    pub statistics: [Option<Statistics>; 2],
    pub bunching: [Option<Bunching>; 2],
    pub taus: Option<Vec<f64>>,
    pub series: Vec<SeriesColumn>,
    pub error: Option<String>,
}

impl Row {
    pub fn g2(&self, i: Transition, j: Transition) -> Option<f64> {
        self.g2[i.slot()][j.slot()]
    }
}

/// Stationary populations: the closed form inside the thermal domain, the
/// numerical null vector once either `eta` exceeds 1.
pub fn stationary(spec: &EnsembleSpec, bath: &BathParams) -> Result<PopulationDistribution, Error> {
    let (e1, e2) = (bath.eta(Transition::One), bath.eta(Transition::Two));
    if e1 <= 1.0 && e2 <= 1.0 {
        closed_form_distribution(spec, e1, e2)
    } else {
        stationary_numeric(&build_generator(spec, bath))
    }
}

fn defined(r: Result<f64, Error>) -> Result<Option<f64>, Error> {
    match r {
        Ok(x) => Ok(Some(x)),
        Err(Error::UndefinedCorrelation { .. } | Error::UndefinedCsi { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn evaluate(point: &PointSpec, request: &SeriesRequest) -> Row {
    let mut row = Row {
        atoms: point.atoms,
        ..Row::default()
    };
    if let Err(e) = fill(point, request, &mut row) {
        row.error = Some(e.to_string());
    }
    row
}

fn fill(point: &PointSpec, request: &SeriesRequest, row: &mut Row) -> Result<(), Error> {
    let bath = point.bath_params()?;
    for t in Transition::BOTH {
        let k = t.slot();
        row.eta[k] = Some(bath.eta(t));
        row.nbar[k] = bath.nbar(t);
    }
    let spec = EnsembleSpec::new(point.atoms)?;
    let p = stationary(&spec, &bath)?;
    for i in Transition::BOTH {
        let k = i.slot();
        row.intensity[k] = Some(intensity(i, &p));
        row.snr[k] = snr(i, &p, &bath);
        row.chi[k] = defined(csi_chi(i, &p))?;
        for j in Transition::BOTH {
            row.g2[k][j.slot()] = defined(g2_zero(i, j, &p))?;
        }
        row.statistics[k] = row.g2[k][k].map(Statistics::of);
    }
    if let Some(grid) = &request.grid {
        let gen = build_generator(&spec, &bath);
        row.taus = Some(grid.taus().to_vec());
        for &(i, j) in &request.pairs {
            let values = match regression_correlator(i, j, &p, &gen, grid) {
                Ok(s) => {
                    if i == j {
                        row.bunching[i.slot()] = Some(s.classification().bunching);
                    }
                    s.g2_values().iter().map(|&g| Some(g)).collect()
                }
                Err(Error::UndefinedCorrelation { .. }) => vec![None; grid.len()],
                Err(e) => return Err(e),
            };
            row.series.push(SeriesColumn {
                pair: (i, j),
                values,
            });
        }
    }
    Ok(())
}

/// Worker pool sized by `LADDER_DICKE_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(text) = std::env::var(THREADS_ENV) {
        let n: usize = text
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| anyhow!("{THREADS_ENV} must be a positive integer, got {text:?}"))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| anyhow!("thread pool: {e}"))
}

/// Evaluates every point; rows come back in the order of `points`.
pub fn run_points(points: &[PointSpec], request: &SeriesRequest) -> Result<Vec<Row>> {
    let pool = thread_pool()?;
    Ok(pool.install(|| points.par_iter().map(|p| evaluate(p, request)).collect()))
}

/// Cartesian product in the order N, then transition 1, then transition 2.
pub fn grid_points(cfg: &SweepConfig) -> Vec<PointSpec> {
    let mut out = Vec::with_capacity(cfg.grid_size());
    for &atoms in &cfg.atoms {
        for &b1 in &cfg.bath[0] {
            for &b2 in &cfg.bath[1] {
                out.push(PointSpec {
                    atoms,
                    bath: [b1, b2],
                    gamma: cfg.gamma,
                });
            }
        }
    }
    out
}

pub fn series_request(cfg: &SweepConfig) -> Result<SeriesRequest> {
    match &cfg.tau {
        Some(t) => Ok(SeriesRequest::new(t.grid()?, cfg.series.clone())),
        None => Ok(SeriesRequest::none()),
    }
}
