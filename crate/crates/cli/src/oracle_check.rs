//! Cross-check of the fast path against the brute-force oracle for N <= 4.

use std::io::Write;

use anyhow::{bail, Result};
use ladder_dicke_core::oracle::{Oracle, MAX_ATOMS};
use ladder_dicke_core::{
    build_generator, g2_zero, regression_correlator, EnsembleSpec, Error, TimeGrid, Transition,
};
use rayon::prelude::*;

use crate::config::{OutputFormat, SweepConfig};
use crate::output::fmt_g;
use crate::run::{grid_points, stationary, thread_pool, PointSpec};

pub const STEADY_TOL: f64 = 1e-8;
pub const ZERO_DELAY_TOL: f64 = 1e-8;
pub const SERIES_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub atoms: usize,
    pub eta: [f64; 2],
    /// Max abs difference of the stationary diagonal.
    pub steady_dev: Option<f64>,
    /// Max relative difference of the four zero-delay correlations.
    pub zero_delay_dev: Option<f64>,
    /// Max abs difference of the delay series.
    pub series_dev: Option<f64>,
    pub error: Option<String>,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.steady_dev.is_some_and(|d| d <= STEADY_TOL)
            && self.zero_delay_dev.is_none_or(|d| d <= ZERO_DELAY_TOL)
            && self.series_dev.is_none_or(|d| d <= SERIES_TOL)
    }
}

fn pairs() -> impl Iterator<Item = (Transition, Transition)> {
    Transition::BOTH
        .into_iter()
        .flat_map(|i| Transition::BOTH.into_iter().map(move |j| (i, j)))
}

pub fn check_point(point: &PointSpec, grid: Option<&TimeGrid>) -> CheckRow {
    let bath = point.bath_params();
    let mut row = CheckRow {
        atoms: point.atoms,
        eta: bath
            .as_ref()
            .map(|b| [b.eta(Transition::One), b.eta(Transition::Two)])
            .unwrap_or([f64::NAN; 2]),
        steady_dev: None,
        zero_delay_dev: None,
        series_dev: None,
        error: None,
    };
    let result = (|| -> Result<(), Error> {
        let bath = bath?;
        let spec = EnsembleSpec::new(point.atoms)?;
        let oracle = Oracle::new(point.atoms, &bath)?;
        let block = oracle.steady_state_block()?;
        let p = stationary(&spec, &bath)?;
        row.steady_dev = Some(
            p.values()
                .iter()
                .enumerate()
                .map(|(k, &x)| (block[(k, k)].re - x).abs())
                .fold(0.0, f64::max),
        );
        let gen = build_generator(&spec, &bath);
        let default_grid;
        let grid = match grid {
            Some(g) => g,
            None => {
                let slow = bath.gamma(Transition::One).min(bath.gamma(Transition::Two));
                default_grid = TimeGrid::linear(0.0, 4.0 / slow, 20)?;
                &default_grid
            }
        };
        let (mut zero, mut series) = (None::<f64>, None::<f64>);
        for (i, j) in pairs() {
            let want = match oracle.g2(i, j, grid) {
                Ok(s) => s,
                Err(Error::UndefinedCorrelation { .. }) => continue,
                Err(e) => return Err(e),
            };
            let g0 = g2_zero(i, j, &p)?;
            let rel = (g0 - want.g2_zero()).abs() / want.g2_zero().abs().max(1e-300);
            let rel = if want.g2_zero() == 0.0 && g0.abs() <= 1e-12 { 0.0 } else { rel };
            zero = Some(zero.unwrap_or(0.0).max(rel));
            let got = regression_correlator(i, j, &p, &gen, grid)?;
            let dev = got
                .g2_values()
                .iter()
                .zip(want.g2_values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            series = Some(series.unwrap_or(0.0).max(dev));
        }
        row.zero_delay_dev = zero;
        row.series_dev = series;
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

pub fn run_check(cfg: &SweepConfig) -> Result<Vec<CheckRow>> {
    if let Some(&n) = cfg.atoms.iter().find(|&&n| n > MAX_ATOMS) {
        bail!("the oracle supports N <= {MAX_ATOMS}, got {n}");
    }
    let grid = match &cfg.tau {
        Some(t) => Some(t.grid()?),
        None => None,
    };
    let points = grid_points(cfg);
    let pool = thread_pool()?;
    Ok(pool.install(|| points.par_iter().map(|p| check_point(p, grid.as_ref())).collect()))
}

const COLUMNS: [&str; 8] = [
    "N", "eta1", "eta2", "steady_dev", "g2_zero_dev", "series_dev", "pass", "error",
];

pub fn write(rows: &[CheckRow], format: OutputFormat, w: &mut dyn Write) -> Result<()> {
    let opt = |x: Option<f64>| x.map_or("null".to_string(), fmt_g);
    let lines: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.atoms.to_string(),
                fmt_g(r.eta[0]),
                fmt_g(r.eta[1]),
                opt(r.steady_dev),
                opt(r.zero_delay_dev),
                opt(r.series_dev),
                r.passed().to_string(),
                match (&r.error, format) {
                    (None, _) => "null".into(),
                    (Some(e), OutputFormat::Json) => serde_json::to_string(e).expect("string"),
                    (Some(e), OutputFormat::Csv) => format!("\"{}\"", e.replace('"', "\"\"")),
                },
            ]
        })
        .collect();
    match format {
        OutputFormat::Csv => {
            writeln!(w, "{}", COLUMNS.join(","))?;
            for l in lines {
                writeln!(w, "{}", l.join(","))?;
            }
        }
        OutputFormat::Json => {
            writeln!(w, "[")?;
            for (k, l) in lines.iter().enumerate() {
                let fields: Vec<String> = COLUMNS
                    .iter()
                    .zip(l)
                    .map(|(c, v)| format!("\"{c}\":{v}"))
                    .collect();
                let sep = if k + 1 < lines.len() { "," } else { "" };
                writeln!(w, "  {{{}}}{sep}", fields.join(","))?;
            }
            writeln!(w, "]")?;
        }
    }
    Ok(())
}
