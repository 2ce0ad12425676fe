//! CSV and JSON writers with fixed number formatting.
//!
//! Numbers are printed like C's `%.12g`, so identical inputs give identical
//! bytes. Undefined values are written as `null` in both formats; an infinite
//! SNR (empty bath) is written as `inf`, quoted in JSON.

use std::io::Write;

use anyhow::Result;
use ladder_dicke_core::Transition;

use crate::run::Row;

/// `%.12g` formatting, with `-0` printed as `0`.
pub fn fmt_g(x: f64) -> String {
    const PRECISION: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= PRECISION {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (PRECISION - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn pair_label((i, j): (Transition, Transition)) -> String {
    format!("{}{}", i.label(), j.label())
}

/// A single cell before format-specific rendering.
enum Cell {
    Null,
    Int(usize),
    Num(f64),
    Text(String),
    Nums(Vec<Option<f64>>),
}

fn num(x: Option<f64>) -> Cell {
    x.map_or(Cell::Null, Cell::Num)
}

/// Column names in output order. Series columns appear only when some row
/// carries a series.
pub fn columns(rows: &[Row]) -> Vec<String> {
    let mut cols: Vec<String> = [
        "N", "eta1", "eta2", "nbar1", "nbar2", "G1_1", "G1_2", "g2_11", "g2_22", "g2_12", "g2_21",
        "chi1", "chi2", "snr1", "snr2", "statistics_11", "statistics_22", "bunching_11",
        "bunching_22",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if let Some(row) = rows.iter().find(|r| r.taus.is_some()) {
        cols.push("tau".into());
        for s in &row.series {
            cols.push(format!("g2_{}_tau", pair_label(s.pair)));
        }
    }
    cols.push("error".into());
    cols
}

fn cells(row: &Row, with_series: Option<&Row>) -> Vec<Cell> {
    use Transition::{One, Two};
    let mut out = vec![
        Cell::Int(row.atoms),
        num(row.eta[0]),
        num(row.eta[1]),
        num(row.nbar[0]),
        num(row.nbar[1]),
        num(row.intensity[0]),
        num(row.intensity[1]),
        num(row.g2(One, One)),
        num(row.g2(Two, Two)),
        num(row.g2(One, Two)),
        num(row.g2(Two, One)),
        num(row.chi[0]),
        num(row.chi[1]),
        num(row.snr[0]),
        num(row.snr[1]),
    ];
    for s in row.statistics {
        out.push(s.map_or(Cell::Null, |s| Cell::Text(s.as_str().into())));
    }
    for b in row.bunching {
        out.push(b.map_or(Cell::Null, |b| Cell::Text(b.as_str().into())));
    }
    if let Some(template) = with_series {
        out.push(match &row.taus {
            Some(t) => Cell::Nums(t.iter().map(|&x| Some(x)).collect()),
            None => Cell::Null,
        });
        for col in &template.series {
            let found = row.series.iter().find(|s| s.pair == col.pair);
            out.push(found.map_or(Cell::Null, |s| Cell::Nums(s.values.clone())));
        }
    }
    out.push(row.error.clone().map_or(Cell::Null, Cell::Text));
    out
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn csv_cell(cell: &Cell) -> String {
    match cell {
        Cell::Null => "null".into(),
        Cell::Int(n) => n.to_string(),
        Cell::Num(x) => fmt_g(*x),
        Cell::Text(s) => csv_field(s),
        Cell::Nums(v) => v
            .iter()
            .map(|x| x.map_or("null".into(), fmt_g))
            .collect::<Vec<_>>()
            .join(";"),
    }
}

fn json_num(x: f64) -> String {
    if x.is_finite() {
        fmt_g(x)
    } else {
        format!("\"{}\"", fmt_g(x))
    }
}

fn json_cell(cell: &Cell) -> String {
    match cell {
        Cell::Null => "null".into(),
        Cell::Int(n) => n.to_string(),
        Cell::Num(x) => json_num(*x),
        Cell::Text(s) => serde_json::to_string(s).expect("strings serialize"),
        Cell::Nums(v) => format!(
            "[{}]",
            v.iter()
                .map(|x| x.map_or("null".into(), json_num))
                .collect::<Vec<_>>()
                .join(",")
        ),
    }
}

pub fn write_csv(rows: &[Row], w: &mut dyn Write) -> Result<()> {
    let cols = columns(rows);
    let template = rows.iter().find(|r| r.taus.is_some());
    writeln!(w, "{}", cols.join(","))?;
    for row in rows {
        let line: Vec<String> = cells(row, template).iter().map(csv_cell).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_json(rows: &[Row], w: &mut dyn Write) -> Result<()> {
    let cols = columns(rows);
    let template = rows.iter().find(|r| r.taus.is_some());
    writeln!(w, "[")?;
    for (k, row) in rows.iter().enumerate() {
        let fields: Vec<String> = cols
            .iter()
            .zip(cells(row, template))
            .map(|(name, cell)| format!("{}:{}", serde_json::to_string(name).expect("string"), json_cell(&cell)))
            .collect();
        let sep = if k + 1 < rows.len() { "," } else { "" };
        writeln!(w, "  {{{}}}{sep}", fields.join(","))?;
    }
    writeln!(w, "]")?;
    Ok(())
}
