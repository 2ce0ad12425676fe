//! Plot-ready columnar text files, one per figure panel.
//!
//! Each file starts with `#` lines naming the preset, fixed parameters and
//! columns, followed by whitespace-separated data. Undefined values are
//! written as `NaN`, which common plotting tools treat as missing. Blocks
//! belonging to different curves are separated by a blank line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ladder_dicke_core::Transition;

use crate::config::PresetId;
use crate::output::fmt_g;
use crate::run::Row;

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".to_string(), fmt_g)
}

struct Panel {
    file: &'static str,
    header: Vec<String>,
    columns: &'static [&'static str],
    blocks: Vec<Vec<Vec<String>>>,
}

/// Groups consecutive rows with equal keys into blocks.
fn blocks_by<K: PartialEq>(rows: &[Row], key: impl Fn(&Row) -> K, line: impl Fn(&Row) -> Vec<String>) -> Vec<Vec<Vec<String>>> {
    let mut out: Vec<Vec<Vec<String>>> = Vec::new();
    let mut last: Option<K> = None;
    for row in rows {
        let k = key(row);
        if last.as_ref() != Some(&k) {
            out.push(Vec::new());
            last = Some(k);
        }
        out.last_mut().expect("block pushed").push(line(row));
    }
    out
}

fn panels(rows: &[Row], preset: PresetId) -> Vec<Panel> {
    use Transition::{One, Two};
    let eta = |r: &Row, k: usize| cell(r.eta[k]);
    match preset {
        PresetId::Fig2 => vec![Panel {
            file: "fig2_g2_11.dat",
            header: vec![format!("N = {}", rows[0].atoms), "surface over (eta1, eta2)".into()],
            columns: &["eta1", "eta2", "g2_11"],
            blocks: blocks_by(rows, |r| r.eta[0].map(f64::to_bits), |r| {
                vec![eta(r, 0), eta(r, 1), cell(r.g2(One, One))]
            }),
        }],
        PresetId::Fig3a => vec![Panel {
            file: "fig3a_g2_11_vs_N.dat",
            header: vec![
                "eta1 = eta2 = eta, one block per eta".into(),
                "marker: bunched or anti-bunched from the initial slope of g2_11(tau)".into(),
            ],
            columns: &["N", "g2_11", "marker", "eta"],
            blocks: blocks_by(rows, |r| r.eta[0].map(f64::to_bits), |r| {
                let marker = r.bunching[0].map_or("NaN", |b| {
                    if b.is_bunched() {
                        "bunched"
                    } else {
                        b.as_str()
                    }
                });
                vec![r.atoms.to_string(), cell(r.g2(One, One)), marker.into(), eta(r, 0)]
            }),
        }],
        PresetId::Fig3b => {
            let mut blocks = Vec::new();
            let mut header = Vec::new();
            for (k, r) in rows.iter().enumerate() {
                let label = ["i", "ii", "iii"].get(k).copied().unwrap_or("extra");
                header.push(format!(
                    "({label}) N = {}, eta1 = {}, eta2 = {}",
                    r.atoms,
                    eta(r, 0),
                    eta(r, 1)
                ));
                let taus = r.taus.clone().unwrap_or_default();
                let values = r.series.first().map(|s| s.values.clone()).unwrap_or_default();
                blocks.push(
                    taus.iter()
                        .zip(values)
                        .map(|(&t, g)| vec![fmt_g(t), cell(g), label.to_string()])
                        .collect(),
                );
            }
            vec![Panel {
                file: "fig3b_g2_11_tau.dat",
                header,
                columns: &["tau", "g2_11", "curve"],
                blocks,
            }]
        }
        PresetId::Fig4a => vec![Panel {
            file: "fig4a_g2_12.dat",
            header: vec!["eta1 = eta2 = eta, one block per N".into()],
            columns: &["eta", "g2_12", "N"],
            blocks: blocks_by(rows, |r| r.atoms, |r| {
                vec![eta(r, 0), cell(r.g2(One, Two)), r.atoms.to_string()]
            }),
        }],
        PresetId::Fig4b => vec![Panel {
            file: "fig4b_g2_12_snr_locus.dat",
            header: vec![
                "eta2 is the first value on a 0.001 grid with min(SNR1, SNR2) above the threshold".into(),
                "rows without such eta2 have NaN entries".into(),
            ],
            columns: &["eta1", "eta2", "g2_12", "N"],
            blocks: blocks_by(rows, |r| r.atoms, |r| {
                vec![eta(r, 0), eta(r, 1), cell(r.g2(One, Two)), r.atoms.to_string()]
            }),
        }],
        PresetId::Fig5 => vec![Panel {
            file: "fig5_chi1.dat",
            header: vec!["eta1 = eta2 = eta, one block per N".into()],
            columns: &["eta", "chi1", "N"],
            blocks: blocks_by(rows, |r| r.atoms, |r| {
                vec![eta(r, 0), cell(r.chi[0]), r.atoms.to_string()]
            }),
        }],
    }
}

fn render(panel: &Panel, preset: PresetId, extra: &[String]) -> String {
    let mut s = String::new();
    writeln!(s, "# preset {}", preset.as_str()).unwrap();
    for h in panel.header.iter().chain(extra) {
        writeln!(s, "# {h}").unwrap();
    }
    writeln!(s, "# columns: {}", panel.columns.join(" ")).unwrap();
    for (k, block) in panel.blocks.iter().enumerate() {
        if k > 0 {
            writeln!(s).unwrap();
        }
        for line in block {
            writeln!(s, "{}", line.join(" ")).unwrap();
        }
    }
    s
}

/// Writes the panel files for `preset` into `dir` and returns their paths.
/// An empty dataset writes nothing and logs a warning.
pub fn emit_plotdata(rows: &[Row], preset: PresetId, dir: &Path, extra_header: &[String]) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        log::warn!("empty dataset for {}, no plot data written", preset.as_str());
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for panel in panels(rows, preset) {
        let path = dir.join(panel.file);
        std::fs::write(&path, render(&panel, preset, extra_header))
            .with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::{evaluate, PointSpec, SeriesRequest};

    #[test]
    fn empty_dataset_is_a_no_op() {
        let dir = tempfile::tempdir().unwrap();
        let out = emit_plotdata(&[], PresetId::Fig2, dir.path(), &[]).unwrap();
        assert!(out.is_empty());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn surface_blocks_split_on_eta1() {
        let rows: Vec<Row> = [(0.2, 0.1), (0.2, 0.3), (0.4, 0.1), (0.4, 0.3)]
            .iter()
            .map(|&(a, b)| evaluate(&PointSpec::eta(3, a, b), &SeriesRequest::none()))
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_plotdata(&rows, PresetId::Fig2, dir.path(), &[]).unwrap();
        let text = std::fs::read_to_string(&files[0]).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 5);
        assert_eq!(data[2], "");
        assert_eq!(data[0].split_whitespace().count(), 3);
        assert!(text.starts_with("# preset fig2\n"));
    }
}
