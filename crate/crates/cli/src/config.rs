//! Sweep configuration: TOML file schema, flag overrides and validation.
//!
//! Every key of the file is optional and mirrors a command-line flag. Lists
//! accept a TOML array, a single number, or a string that is either
//! comma-separated (`"0.1,0.5,0.9"`) or a range `"start:stop:count"` with
//! both ends included.
//!
//! ```toml
//! mode = "grid"            # single | grid | figure-preset
//! n = "10,50,150"
//! eta1 = "0.05:0.95:19"
//! nbar2 = [0.5, 1.0, 2.0]  # alternative to eta2
//! gamma1 = 1.0
//! gamma2 = 1.0
//! series = ["11", "12"]
//! format = "csv"
//! out = "sweep.csv"
//!
//! [tau]
//! start = 0.0
//! stop = 10.0
//! points = 51
//! scale = "linear"         # linear | log
//! ```
//!
//! The bath on transition `i` may also be given as `temperature{i}` (kelvin)
//! with `omega{i}` (rad/s), or as `pump{i}` with `dipole{i}` (SI units).

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ladder_dicke_core::observables::{nbar_from_pump, nbar_from_temperature};
use ladder_dicke_core::{TimeGrid, Transition};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Single,
    Grid,
    FigurePreset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TauScale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PresetId {
    Fig2,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig5,
}

impl PresetId {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetId::Fig2 => "fig2",
            PresetId::Fig3a => "fig3a",
            PresetId::Fig3b => "fig3b",
            PresetId::Fig4a => "fig4a",
            PresetId::Fig4b => "fig4b",
            PresetId::Fig5 => "fig5",
        }
    }
}

/// A list as written in the file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ListValue {
    One(f64),
    Many(Vec<f64>),
    Text(String),
}

impl ListValue {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            ListValue::One(x) => Ok(vec![*x]),
            ListValue::Many(v) => Ok(v.clone()),
            ListValue::Text(s) => parse_list(s),
        }
    }
}

/// Parses `a,b,c` or `start:stop:count`.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        bail!("empty list");
    }
    let parts: Vec<&str> = text.split(':').collect();
    let out = match parts.as_slice() {
        [single] => single
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .with_context(|| format!("invalid number {s:?}"))
            })
            .collect::<Result<Vec<_>>>()?,
        [start, stop, count] => {
            let start: f64 = start.trim().parse().with_context(|| format!("range start {start:?}"))?;
            let stop: f64 = stop.trim().parse().with_context(|| format!("range stop {stop:?}"))?;
            let count: usize = count.trim().parse().with_context(|| format!("range count {count:?}"))?;
            match count {
                0 => bail!("range {text:?} has zero points"),
                1 => vec![start],
                _ => {
                    let step = (stop - start) / (count - 1) as f64;
                    (0..count).map(|k| start + step * k as f64).collect()
                }
            }
        }
        _ => bail!("expected `a,b,c` or `start:stop:count`, got {text:?}"),
    };
    if let Some(bad) = out.iter().find(|x| !x.is_finite()) {
        bail!("non-finite value {bad} in {text:?}");
    }
    Ok(out)
}

/// Atom numbers must be positive integers.
pub fn atoms_from(values: &[f64]) -> Result<Vec<usize>> {
    values
        .iter()
        .map(|&x| {
            if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                Ok(x as usize)
            } else {
                Err(anyhow!(
                    "N must be a positive integer, got {x} (mean atom numbers are not supported)"
                ))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauTable {
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    pub scale: Option<TauScale>,
}

/// Unresolved settings from the file or the command line.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub mode: Option<Mode>,
    pub n: Option<ListValue>,
    pub eta1: Option<ListValue>,
    pub eta2: Option<ListValue>,
    pub nbar1: Option<ListValue>,
    pub nbar2: Option<ListValue>,
    pub temperature1: Option<ListValue>,
    pub temperature2: Option<ListValue>,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    pub pump1: Option<ListValue>,
    pub pump2: Option<ListValue>,
    pub dipole1: Option<f64>,
    pub dipole2: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub tau: Option<TauTable>,
    pub series: Option<Vec<String>>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub plot_dir: Option<PathBuf>,
    pub preset: Option<PresetId>,
    pub snr_min: Option<f64>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl RawConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Values set in `top` replace those in `self`.
    pub fn overlay(mut self, top: RawConfig) -> Self {
        overlay!(self, top; mode, n, eta1, eta2, nbar1, nbar2, temperature1, temperature2,
            omega1, omega2, pump1, pump2, dipole1, dipole2, gamma1, gamma2, series, format,
            out, plot_dir, preset, snr_min);
        if let Some(t) = top.tau {
            let mut base = self.tau.unwrap_or_default();
            overlay!(base, t; start, stop, points, scale);
            self.tau = Some(base);
        }
        self
    }
}

/// How the bath on one transition is parameterized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BathValue {
    Eta(f64),
    Nbar(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: TauScale,
}

impl TauSpec {
    pub fn grid(&self) -> Result<TimeGrid> {
        let grid = match self.scale {
            TauScale::Linear => TimeGrid::linear(self.start, self.stop, self.points),
            TauScale::Log => TimeGrid::logarithmic(self.start, self.stop, self.points),
        };
        grid.map_err(|e| anyhow!("invalid tau grid: {e}"))
    }
}

pub const DEFAULT_SNR_MIN: f64 = 10.0;

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub mode: Mode,
    pub atoms: Vec<usize>,
    pub bath: [Vec<BathValue>; 2],
    pub gamma: [f64; 2],
    pub tau: Option<TauSpec>,
    pub series: Vec<(Transition, Transition)>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub plot_dir: Option<PathBuf>,
    pub preset: Option<PresetId>,
    pub snr_min: f64,
}

impl SweepConfig {
    /// Number of rows a grid run produces.
    pub fn grid_size(&self) -> usize {
        self.atoms.len() * self.bath[0].len() * self.bath[1].len()
    }
}

pub fn parse_series(label: &str) -> Result<(Transition, Transition)> {
    let bytes = label.trim().as_bytes();
    let digit = |b: u8| Transition::from_label(b.wrapping_sub(b'0'));
    match bytes {
        [a, b] => match (digit(*a), digit(*b)) {
            (Some(i), Some(j)) => Ok((i, j)),
            _ => bail!("invalid correlator {label:?}, expected one of 11, 12, 21, 22"),
        },
        _ => bail!("invalid correlator {label:?}, expected one of 11, 12, 21, 22"),
    }
}

fn bath_axis(raw: &RawConfig, t: Transition, gamma: f64) -> Result<Option<Vec<BathValue>>> {
    let (eta, nbar, temp, omega, pump, dipole) = match t {
        Transition::One => (&raw.eta1, &raw.nbar1, &raw.temperature1, raw.omega1, &raw.pump1, raw.dipole1),
        Transition::Two => (&raw.eta2, &raw.nbar2, &raw.temperature2, raw.omega2, &raw.pump2, raw.dipole2),
    };
    let k = t.label();
    let given = [eta.is_some(), nbar.is_some(), temp.is_some(), pump.is_some()];
    if given.iter().filter(|&&g| g).count() > 1 {
        bail!("transition {k}: give only one of eta{k}, nbar{k}, temperature{k}, pump{k}");
    }
    let axis = if let Some(v) = eta {
        let values = v.values()?;
        if let Some(bad) = values.iter().find(|&&e| e < 0.0) {
            bail!("eta{k} must be non-negative, got {bad}");
        }
        values.into_iter().map(BathValue::Eta).collect()
    } else if let Some(v) = nbar {
        let values = v.values()?;
        if let Some(bad) = values.iter().find(|&&x| x < 0.0) {
            bail!("nbar{k} must be non-negative, got {bad}");
        }
        values.into_iter().map(BathValue::Nbar).collect()
    } else if let Some(v) = temp {
        let omega = omega.ok_or_else(|| anyhow!("temperature{k} needs omega{k}"))?;
        v.values()?
            .into_iter()
            .map(|temp| Ok(BathValue::Nbar(nbar_from_temperature(omega, temp)?)))
            .collect::<Result<_>>()?
    } else if let Some(v) = pump {
        let dipole = dipole.ok_or_else(|| anyhow!("pump{k} needs dipole{k}"))?;
        v.values()?
            .into_iter()
            .map(|r| Ok(BathValue::Nbar(nbar_from_pump(r, dipole, gamma)?)))
            .collect::<Result<_>>()?
    } else {
        return Ok(None);
    };
    Ok(Some(axis))
}

impl RawConfig {
    /// Resolves against the mode implied by the subcommand. A `mode` key that
    /// disagrees with the subcommand is an error.
    pub fn resolve(&self, mode: Mode) -> Result<SweepConfig> {
        if let Some(m) = self.mode {
            if m != mode {
                bail!("config mode {m:?} does not match the {mode:?} subcommand");
            }
        }
        let gamma = [self.gamma1.unwrap_or(1.0), self.gamma2.unwrap_or(1.0)];
        for (k, g) in gamma.iter().enumerate() {
            if !(g.is_finite() && *g > 0.0) {
                bail!("gamma{} must be positive, got {g}", k + 1);
            }
        }
        let atoms = match &self.n {
            Some(v) => atoms_from(&v.values()?)?,
            None => Vec::new(),
        };
        let b1 = bath_axis(self, Transition::One, gamma[0])?.unwrap_or_default();
        let b2 = bath_axis(self, Transition::Two, gamma[1])?.unwrap_or_default();

        let mut series = Vec::new();
        for label in self.series.iter().flatten() {
            let pair = parse_series(label)?;
            if !series.contains(&pair) {
                series.push(pair);
            }
        }
        let tau = match (&self.tau, series.is_empty()) {
            (None, true) => None,
            (t, _) => {
                let t = t.clone().unwrap_or_default();
                let scale = t.scale.unwrap_or_default();
                let start = t.start.unwrap_or(match scale {
                    TauScale::Linear => 0.0,
                    TauScale::Log => 1e-3,
                });
                let spec = TauSpec {
                    start,
                    stop: t.stop.unwrap_or(10.0),
                    points: t.points.unwrap_or(51),
                    scale,
                };
                spec.grid()?;
                Some(spec)
            }
        };
        if tau.is_some() && series.is_empty() {
            series.push((Transition::One, Transition::One));
        }
        let snr_min = self.snr_min.unwrap_or(DEFAULT_SNR_MIN);
        if !snr_min.is_finite() {
            bail!("snr-min must be finite");
        }

        let cfg = SweepConfig {
            mode,
            atoms,
            bath: [b1, b2],
            gamma,
            tau,
            series,
            format: self.format.unwrap_or_default(),
            out: self.out.clone(),
            plot_dir: self.plot_dir.clone(),
            preset: self.preset,
            snr_min,
        };
        match mode {
            Mode::Single => {
                if cfg.atoms.len() != 1 || cfg.bath.iter().any(|b| b.len() != 1) {
                    bail!("a single point needs exactly one value of N and of each bath parameter");
                }
            }
            Mode::Grid => {
                if cfg.atoms.is_empty() {
                    bail!("no values of N given");
                }
                for (k, b) in cfg.bath.iter().enumerate() {
                    if b.is_empty() {
                        bail!("no bath values given for transition {}", k + 1);
                    }
                }
            }
            Mode::FigurePreset => {
                if cfg.preset.is_none() {
                    bail!("figure mode needs --preset");
                }
            }
        }
        Ok(cfg)
    }
}
