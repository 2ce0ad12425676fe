//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p ladder-dicke-validation --test acceptance`.
//! Positional arguments filter criteria, e.g. `-- C05`.

use std::process::ExitCode;
use std::time::Instant;

use ladder_dicke::config::{BathValue, Mode, PresetId, RawConfig};
use ladder_dicke::oracle_check::{check_point, SERIES_TOL, STEADY_TOL, ZERO_DELAY_TOL};
use ladder_dicke::{presets, PointSpec};
use ladder_dicke_core::{
    build_generator, closed_form_distribution, csi_chi, g2_zero, intensity, jump_rates,
    regression_correlator, stationary_numeric, BathParams, EnsembleSpec, PopulationDistribution,
    RateGenerator, TimeGrid, Transition,
};
use ladder_dicke_validation::{rel_err, secs, Check, Suite};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ONE: Transition = Transition::One;
const TWO: Transition = Transition::Two;
const EXACT_TOL: f64 = 1e-9;
const SIZES: [usize; 4] = [2, 10, 50, 150];

fn saturated(atoms: usize) -> PopulationDistribution {
    closed_form_distribution(&EnsembleSpec::new(atoms).unwrap(), 1.0, 1.0).unwrap()
}

fn dist(atoms: usize, e1: f64, e2: f64) -> PopulationDistribution {
    closed_form_distribution(&EnsembleSpec::new(atoms).unwrap(), e1, e2).unwrap()
}

/// Compares `f(N)` with `want(N)` over `sizes` at relative `EXACT_TOL`.
fn formula_check(
    sizes: &[usize],
    f: impl Fn(usize) -> f64,
    want: impl Fn(f64) -> f64,
) -> Check {
    let mut c = Check::new();
    let mut worst = 0.0f64;
    for &n in sizes {
        let (got, exp) = (f(n), want(n as f64));
        let e = rel_err(got, exp);
        worst = worst.max(e);
        c.require(e <= EXACT_TOL, format!("N={n}: {got} vs {exp}"));
    }
    c.note(format!("max rel err {worst:.1e}"));
    c
}

fn c1() -> Check {
    let start = Instant::now();
    let mut c = formula_check(
        &SIZES,
        |n| g2_zero(ONE, ONE, &saturated(n)).unwrap(),
        |n| 8.0 * (n - 1.0) * (n + 4.0) / (5.0 * n * (n + 3.0)),
    );
    let t = start.elapsed();
    c.require(t.as_secs_f64() < 1.0, format!("took {}", secs(t)));
    c
}

fn c2() -> Check {
    formula_check(
        &SIZES,
        |n| g2_zero(ONE, TWO, &saturated(n)).unwrap(),
        |n| 4.0 * (n + 2.0) * (n + 4.0) / (5.0 * n * (n + 3.0)),
    )
}

fn c3() -> Check {
    let sizes: Vec<(Transition, usize)> = Transition::BOTH
        .into_iter()
        .flat_map(|t| SIZES.into_iter().map(move |n| (t, n)))
        .collect();
    let mut c = Check::new();
    let mut worst = 0.0f64;
    for (t, n) in sizes {
        let want = (n * (3 + n)) as f64 / 12.0;
        let got = intensity(t, &saturated(n));
        let e = rel_err(got, want);
        worst = worst.max(e);
        c.require(e <= EXACT_TOL, format!("G1_{} at N={n}: {got} vs {want}", t.label()));
    }
    c.note(format!("max rel err {worst:.1e}"));
    c
}

fn c4() -> Check {
    let mut c = formula_check(
        &[3, 4, 10, 150],
        |n| csi_chi(ONE, &saturated(n)).unwrap(),
        |n| 4.0 * ((n - 1.0) / (n + 2.0)).powi(2),
    );
    let etas: Vec<f64> = (1..=20).map(|k| k as f64 / 21.0).collect();
    let mut chi1_max = f64::NEG_INFINITY;
    let mut chi2_min = f64::INFINITY;
    for n in 1..=3 {
        for &e1 in &etas {
            for &e2 in &etas {
                let chi = csi_chi(ONE, &dist(n, e1, e2)).unwrap();
                chi1_max = chi1_max.max(chi);
                c.require(chi < 1.0, format!("chi1 = {chi} at N={n}, eta=({e1}, {e2})"));
            }
        }
    }
    for n in [2, 10, 150] {
        for &e1 in &etas {
            for &e2 in &etas {
                let chi = csi_chi(TWO, &dist(n, e1, e2)).unwrap();
                chi2_min = chi2_min.min(chi);
                c.require(chi > 1.0, format!("chi2 = {chi} at N={n}, eta=({e1}, {e2})"));
            }
        }
    }
    c.note(format!("max chi1 (N<=3) {chi1_max:.4}; min chi2 {chi2_min:.4}"));
    c
}

fn c5() -> Check {
    const ATOMS: usize = 150;
    const BAND: f64 = 0.02;
    let spec = EnsembleSpec::new(ATOMS).unwrap();
    let nbars: Vec<f64> = (0..=10).map(|k| 0.5 + 0.25 * k as f64).collect();
    let mut c = Check::new();
    // (deviation, nbar1, nbar2) of the worst point per transition.
    let mut worst = [(0.0f64, 0.0, 0.0); 2];
    let mut outside = [0usize; 2];
    for &a in &nbars {
        for &b in &nbars {
            let p = closed_form_distribution(&spec, a / (1.0 + a), b / (1.0 + b)).unwrap();
            let approx = [a * b / (1.0 + a / (1.0 + b)), b * ATOMS as f64];
            for t in Transition::BOTH {
                let k = t.slot();
                let dev = intensity(t, &p) / approx[k] - 1.0;
                if dev.abs() > worst[k].0.abs() {
                    worst[k] = (dev, a, b);
                }
                if dev.abs() > BAND {
                    outside[k] += 1;
                }
            }
        }
    }
    let total = nbars.len() * nbars.len();
    for t in Transition::BOTH {
        let k = t.slot();
        let (dev, a, b) = worst[k];
        c.note(format!(
            "G1_{}: worst {:+.2}% at nbar=({a}, {b}), {}/{total} outside 2%",
            t.label(),
            100.0 * dev,
            outside[k]
        ));
        c.require(outside[k] == 0, format!("G1_{} leaves the 2% band", t.label()));
    }
    c
}

fn random_points(seed: u64, count: usize) -> Vec<([f64; 2], [f64; 2])> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (
                [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)],
                [rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)],
            )
        })
        .collect()
}

fn c6() -> Check {
    let start = Instant::now();
    let mut c = Check::new();
    let mut dev = [0.0f64; 3];
    for atoms in 1..=3 {
        for (gamma, eta) in random_points(600 + atoms as u64, 5) {
            let point = PointSpec {
                atoms,
                bath: [BathValue::Eta(eta[0]), BathValue::Eta(eta[1])],
                gamma,
            };
            let row = check_point(&point, None);
            let label = format!("N={atoms} eta={eta:?} gamma={gamma:?}");
            c.require(row.error.is_none(), format!("{label}: {:?}", row.error));
            c.require(row.zero_delay_dev.is_some(), format!("{label}: no correlations compared"));
            for (k, d) in [row.steady_dev, row.zero_delay_dev, row.series_dev].into_iter().enumerate() {
                dev[k] = dev[k].max(d.unwrap_or(0.0));
            }
            c.require(row.passed(), format!("{label}: {row:?}"));
        }
    }
    c.note(format!(
        "steady {:.1e} (tol {STEADY_TOL:.0e}), g2(0) rel {:.1e} (tol {ZERO_DELAY_TOL:.0e}), series {:.1e} (tol {SERIES_TOL:.0e})",
        dev[0], dev[1], dev[2]
    ));
    let t = start.elapsed();
    c.require(t.as_secs_f64() < 60.0, format!("took {}", secs(t)));
    c
}

fn residual(gen: &RateGenerator, p: &PopulationDistribution) -> f64 {
    gen.apply(p.values()).iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Largest flux imbalance over lattice edges, relative to the largest flux.
fn balance_defect(p: &PopulationDistribution, bath: &BathParams) -> f64 {
    let spec = p.spec();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for (n, m) in spec.states() {
        let here = jump_rates(n as i64, m as i64, spec, bath).unwrap();
        if n > 0 {
            let below = jump_rates(n as i64 - 1, m as i64, spec, bath).unwrap();
            let (down, up) = (p.at(n, m) * here.down1, p.at(n - 1, m) * below.up1);
            worst = worst.max((down - up).abs());
            scale = scale.max(down);
        }
        if m > n {
            let below = jump_rates(n as i64, m as i64 - 1, spec, bath).unwrap();
            let (down, up) = (p.at(n, m) * here.down2, p.at(n, m - 1) * below.up2);
            worst = worst.max((down - up).abs());
            scale = scale.max(down);
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

fn c7() -> Check {
    const TOL: f64 = 1e-10;
    let mut c = Check::new();
    let (mut res, mut bal) = (0.0f64, 0.0f64);
    for atoms in [5, 50, 150] {
        let spec = EnsembleSpec::new(atoms).unwrap();
        for (gamma, eta) in random_points(700 + atoms as u64, 5) {
            let bath = BathParams::from_eta(gamma[0], gamma[1], eta[0], eta[1]).unwrap();
            let gen = build_generator(&spec, &bath);
            let exact = closed_form_distribution(&spec, eta[0], eta[1]).unwrap();
            let numeric = stationary_numeric(&gen).unwrap();
            for p in [&exact, &numeric] {
                let (r, b) = (residual(&gen, p), balance_defect(p, &bath));
                res = res.max(r);
                bal = bal.max(b);
                c.require(r <= TOL && b <= TOL, format!("N={atoms} eta={eta:?}: residual {r:.1e}, balance {b:.1e}"));
            }
        }
    }
    c.note(format!("max residual {res:.1e}, max balance defect {bal:.1e}"));
    c
}

fn c8() -> Check {
    let start = Instant::now();
    let mut c = Check::new();
    let spec = EnsembleSpec::new(15).unwrap();
    let bath = BathParams::unit_gamma(0.6, 0.6).unwrap();
    let p = closed_form_distribution(&spec, 0.6, 0.6).unwrap();
    let grid = TimeGrid::linear(0.0, 20.0, 41).unwrap();
    let s = regression_correlator(ONE, ONE, &p, &build_generator(&spec, &bath), &grid).unwrap();
    let (first, last) = (s.g2_values()[0], *s.g2_values().last().unwrap());
    c.require(first > 3.5 && first < 4.5, format!("g2(0) = {first}"));
    c.require((last - 1.0).abs() <= 1e-3, format!("g2(20) = {last}"));
    c.note(format!("g2(0) = {first:.4}, |g2(20) - 1| = {:.1e}", (last - 1.0).abs()));
    let t = start.elapsed();
    c.require(t.as_secs_f64() < 30.0, format!("took {}", secs(t)));
    c
}

fn c9() -> Check {
    let mut c = Check::new();
    let spec = EnsembleSpec::new(150).unwrap();
    let grid = TimeGrid::linear(0.0, 0.05, 51).unwrap();
    let mut seen = Vec::new();
    for (e2, want_bunched) in [(0.005, false), (0.05, true)] {
        let bath = BathParams::unit_gamma(0.5, e2).unwrap();
        let p = closed_form_distribution(&spec, 0.5, e2).unwrap();
        let s = regression_correlator(ONE, ONE, &p, &build_generator(&spec, &bath), &grid).unwrap();
        let label = s.classification().bunching;
        c.require(
            label.is_bunched() == want_bunched && label.as_str() != "unclassified",
            format!("eta2={e2}: {}", label.as_str()),
        );
        seen.push(format!("eta2={e2}: {}", label.as_str()));
    }
    c.note(seen.join(", "));
    c
}

fn c10() -> Check {
    let mut c = Check::new();
    let single = g2_zero(ONE, ONE, &dist(1, 0.5, 0.5)).unwrap();
    c.require(single == 0.0, format!("N=1 gives {single}"));
    let crossing = (1..=20).find(|&n| g2_zero(ONE, ONE, &dist(n, 0.5, 0.5)).unwrap() > 1.0);
    match crossing {
        Some(n) => {
            let below = g2_zero(ONE, ONE, &dist(n - 1, 0.5, 0.5)).unwrap();
            let above = g2_zero(ONE, ONE, &dist(n, 0.5, 0.5)).unwrap();
            c.note(format!("crosses 1 at N={n} ({below:.4} -> {above:.4})"));
        }
        None => {
            c.require(false, "no crossing for N <= 20");
        }
    }
    c
}

fn c11() -> Check {
    let mut c = Check::new();
    let cfg = RawConfig {
        preset: Some(PresetId::Fig2),
        ..RawConfig::default()
    }
    .resolve(Mode::FigurePreset)
    .unwrap();
    let start = Instant::now();
    let rows = presets::run_preset(PresetId::Fig2, &cfg).unwrap();
    let fig2 = start.elapsed();
    c.require(rows.len() == 2500, format!("fig2 produced {} rows", rows.len()));
    c.require(rows.iter().all(|r| r.error.is_none()), "fig2 rows with errors");
    c.require(fig2.as_secs_f64() < 300.0, format!("fig2 took {}", secs(fig2)));

    let spec = EnsembleSpec::new(150).unwrap();
    let bath = BathParams::unit_gamma(0.6, 0.6).unwrap();
    let grid = TimeGrid::linear(0.0, 5.0, 50).unwrap();
    let start = Instant::now();
    let p = closed_form_distribution(&spec, 0.6, 0.6).unwrap();
    let s = regression_correlator(ONE, ONE, &p, &build_generator(&spec, &bath), &grid).unwrap();
    let series = start.elapsed();
    c.require(s.g2_values().len() == 50, "series length");
    c.require(series.as_secs_f64() < 60.0, format!("series took {}", secs(series)));
    c.note(format!(
        "fig2 {} on {} thread(s), N=150 series {}",
        secs(fig2),
        std::thread::available_parallelism().map_or(1, |n| n.get()),
        secs(series)
    ));
    c
}

fn main() -> ExitCode {
    let mut suite = Suite::from_args();
    suite.run(1, "g2_11(0) at eta = 1 matches 8(N-1)(N+4)/[5N(N+3)]", c1);
    suite.run(2, "g2_12(0) at eta = 1 matches 4(N+2)(N+4)/[5N(N+3)]", c2);
    suite.run(3, "intensities at eta = 1 match N(3+N)/12", c3);
    suite.run(4, "chi1 limit, chi1 < 1 for N <= 3, chi2 > 1", c4);
    suite.run(5, "large-N intensity approximations within 2% at N = 150", c5);
    suite.run(6, "fast path agrees with the brute-force oracle", c6);
    suite.run(7, "stationarity and detailed balance", c7);
    suite.run(8, "g2_11(tau) at N = 15 starts near 4 and decays to 1", c8);
    suite.run(9, "anti-bunching threshold at N = 150, eta1 = 0.5", c9);
    suite.run(10, "single atom has g2_11(0) = 0; crossing of 1 at eta = 0.5", c10);
    suite.run(11, "fig2 preset and N = 150 series run time", c11);
    suite.finish()
}
