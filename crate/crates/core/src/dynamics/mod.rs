//! Rate-equation dynamics of the diagonal sector and two-time correlators.
//!
//! Starting from populations on `|N, n, m>`, the master equation never creates
//! coherences between lattice states, so it reduces to a continuous-time
//! Markov chain with at most four moves per state. Two-time correlators
//! follow by applying a jump to the stationary state, propagating the
//! unnormalized result and reading off the intensity of the second
//! transition.

mod dopri;
mod krylov;

use crate::banded::BandedLu;
use crate::collective_ops::{jump_rates_unchecked, Transition};
use crate::error::{Error, Result};
use crate::observables::{self, CorrelationSeries};
use crate::statespace::EnsembleSpec;
use crate::steadystate::{BathParams, PopulationDistribution};

pub use krylov::ShiftInvertExpm;

/// Sparse generator `dP/dt = Q P` in compressed-column form.
///
/// Column `j` holds the outflow from ordinal `j`: non-negative off-diagonal
/// rates into neighbouring states and minus their sum on the diagonal.
#[derive(Debug, Clone)]
pub struct RateGenerator {
    spec: EnsembleSpec,
    bath: BathParams,
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
    lower: usize,
    upper: usize,
}

pub fn build_generator(spec: &EnsembleSpec, bath: &BathParams) -> RateGenerator {
    let atoms = spec.atoms();
    let d = spec.dim();
    let mut col_ptr = Vec::with_capacity(d + 1);
    let mut rows = Vec::with_capacity(4 * d);
    let mut vals = Vec::with_capacity(4 * d);
    let mut diag = Vec::with_capacity(d);
    let (mut lower, mut upper) = (0, 0);
    col_ptr.push(0);
    for (j, (n, m)) in spec.states().enumerate() {
        let rates = jump_rates_unchecked(n, m, atoms, bath);
        let mut out = 0.0;
        for (rate, (tn, tm)) in rates.moves(n, m) {
            let i = spec.index_unchecked(tn, tm);
            rows.push(i);
            vals.push(rate);
            out += rate;
            if i > j {
                lower = lower.max(i - j);
            } else {
                upper = upper.max(j - i);
            }
        }
        diag.push(-out);
        col_ptr.push(rows.len());
    }
    RateGenerator {
        spec: *spec,
        bath: *bath,
        col_ptr,
        rows,
        vals,
        diag,
        lower,
        upper,
    }
}

impl RateGenerator {
    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn bath(&self) -> &BathParams {
        &self.bath
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Largest total outflow rate of any state.
    pub fn max_outflow(&self) -> f64 {
        self.diag.iter().fold(0.0f64, |a, d| a.max(-d))
    }

    pub fn nnz(&self) -> usize {
        self.rows.len() + self.diag.len()
    }

    /// Entry `Q[row][col]`.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        if row == col {
            return self.diag[col];
        }
        let span = self.col_ptr[col]..self.col_ptr[col + 1];
        self.rows[span.clone()]
            .iter()
            .zip(&self.vals[span])
            .filter(|(&r, _)| r == row)
            .map(|(_, &v)| v)
            .sum()
    }

    /// Off-diagonal entries of column `col` as `(row, rate)`.
    pub fn column(&self, col: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.col_ptr[col]..self.col_ptr[col + 1];
        self.rows[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (j, (&xj, &dj)) in x.iter().zip(&self.diag).enumerate() {
            y[j] = dj * xj;
        }
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.rows[k]] += self.vals[k] * xj;
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        y
    }

    /// Unfactorized banded matrix `scale * Q + diag_shift * I`.
    pub fn shifted_banded(&self, scale: f64, diag_shift: f64) -> BandedLu {
        let mut a = BandedLu::zeros(self.dim(), self.lower, self.upper);
        for j in 0..self.dim() {
            a.add(j, j, scale * self.diag[j] + diag_shift);
            for (i, v) in self.column(j) {
                a.add(i, j, scale * v);
            }
        }
        a
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }
}

/// Strictly increasing, non-negative delay times in units of `1 / gamma1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    taus: Vec<f64>,
}

impl TimeGrid {
    pub fn new(taus: Vec<f64>) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        if !taus.iter().all(|t| t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite time".into()));
        }
        if taus[0] < 0.0 {
            return Err(Error::InvalidGrid(format!("negative start {}", taus[0])));
        }
        if let Some(w) = taus.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(Self { taus })
    }

    /// `points` evenly spaced times from `start` to `stop` inclusive.
    pub fn linear(start: f64, stop: f64, points: usize) -> Result<Self> {
        match points {
            0 => Err(Error::InvalidGrid("zero points".into())),
            1 => Self::new(vec![start]),
            _ => {
                let step = (stop - start) / (points - 1) as f64;
                Self::new((0..points).map(|k| start + step * k as f64).collect())
            }
        }
    }

    /// `tau = 0` followed by `points - 1` geometrically spaced times in
    /// `[start, stop]`.
    pub fn logarithmic(start: f64, stop: f64, points: usize) -> Result<Self> {
        if !(start > 0.0 && stop > start) {
            return Err(Error::InvalidGrid(format!(
                "log grid needs 0 < start < stop, got {start}..{stop}"
            )));
        }
        if points < 2 {
            return Err(Error::InvalidGrid("log grid needs at least 2 points".into()));
        }
        let k = points - 1;
        let ratio = (stop / start).ln();
        let mut taus = vec![0.0];
        taus.extend((0..k).map(|i| {
            if k == 1 {
                start
            } else {
                start * (ratio * i as f64 / (k - 1) as f64).exp()
            }
        }));
        Self::new(taus)
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.taus.last().expect("grid is never empty")
    }
}

/// Time-integration scheme for the rate equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Pick by estimated cost.
    #[default]
    Auto,
    /// Adaptive Dormand–Prince 5(4).
    Explicit,
    /// Shift-and-invert Krylov action of the matrix exponential.
    Krylov,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    /// Relative 2-norm tolerance of the Krylov exponential action.
    pub krylov_tol: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            rtol: 1e-9,
            atol: 1e-12,
            krylov_tol: 1e-11,
        }
    }
}

impl PropagationOptions {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }
}

fn choose_method(gen: &RateGenerator, grid: &TimeGrid) -> Method {
    // Explicit steps are bounded by stability, roughly 3.3 / spectral radius,
    // and the radius is at most twice the largest outflow. The weights are
    // rough flop counts calibrated on N = 150, where a sparse product costs
    // several times a dense flop of the banded solves.
    let radius = 2.0 * gen.max_outflow();
    let d = gen.dim() as f64;
    let explicit_steps = (radius * grid.last() / 3.0).max(grid.len() as f64);
    let explicit_cost = explicit_steps * 7.0 * 6.0 * (gen.nnz() as f64 + d);
    let (lo, up) = gen.bandwidths();
    let solve = 2.0 * d * (lo + up + 1) as f64;
    let factors = 1.0 + (grid.last() / grid.taus().get(1).copied().unwrap_or(grid.last()))
        .log2()
        .max(0.0);
    let krylov_cost =
        grid.len() as f64 * 30.0 * (solve + 60.0 * d) + factors * 2.0 * d * (lo * up) as f64;
    if explicit_cost <= krylov_cost {
        Method::Explicit
    } else {
        Method::Krylov
    }
}

/// Propagates an arbitrary (not necessarily normalized) vector given at
/// `tau = 0` and returns it at every grid time.
pub fn propagate(
    gen: &RateGenerator,
    v0: &[f64],
    grid: &TimeGrid,
    opts: &PropagationOptions,
) -> Result<Vec<Vec<f64>>> {
    if v0.len() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: v0.len(),
        });
    }
    let method = match opts.method {
        Method::Auto => choose_method(gen, grid),
        m => m,
    };
    match method {
        Method::Explicit => dopri::integrate(gen, v0, grid.taus(), opts.rtol, opts.atol),
        _ => {
            let mut expm = ShiftInvertExpm::new(gen, opts.krylov_tol);
            let mut out = Vec::with_capacity(grid.len());
            let mut t = 0.0;
            let mut v = v0.to_vec();
            for &tau in grid.taus() {
                if tau > t {
                    v = expm.apply(&v, tau - t).map_err(|e| match e {
                        Error::NumericFailure { what, residual, .. } => Error::NumericFailure {
                            what,
                            residual,
                            at: tau,
                        },
                        other => other,
                    })?;
                    t = tau;
                }
                out.push(v.clone());
            }
            Ok(out)
        }
    }
}

/// Time evolution of a normalized distribution.
pub fn evolve(
    p0: &PopulationDistribution,
    gen: &RateGenerator,
    grid: &TimeGrid,
) -> Result<Vec<PopulationDistribution>> {
    evolve_with(p0, gen, grid, &PropagationOptions::default())
}

pub fn evolve_with(
    p0: &PopulationDistribution,
    gen: &RateGenerator,
    grid: &TimeGrid,
    opts: &PropagationOptions,
) -> Result<Vec<PopulationDistribution>> {
    if p0.spec() != gen.spec() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: p0.values().len(),
        });
    }
    let raw = propagate(gen, p0.values(), grid, opts)?;
    raw.into_iter()
        .zip(grid.taus())
        .map(|(mut v, &tau)| {
            let total: f64 = v.iter().sum();
            if (total - 1.0).abs() > 1e-8 {
                return Err(Error::NumericFailure {
                    what: "probability conservation",
                    residual: total - 1.0,
                    at: tau,
                });
            }
            for x in v.iter_mut() {
                if *x < -1e-10 {
                    return Err(Error::NumericFailure {
                        what: "population positivity",
                        residual: *x,
                        at: tau,
                    });
                }
                *x = x.max(0.0);
            }
            PopulationDistribution::new(p0.spec().to_owned(), v)
        })
        .collect()
}

/// `g2_ij(tau)` by quantum regression on the rate generator.
pub fn regression_correlator(
    i: Transition,
    j: Transition,
    pss: &PopulationDistribution,
    gen: &RateGenerator,
    grid: &TimeGrid,
) -> Result<CorrelationSeries> {
    regression_correlator_with(i, j, pss, gen, grid, &PropagationOptions::default())
}

pub fn regression_correlator_with(
    i: Transition,
    j: Transition,
    pss: &PopulationDistribution,
    gen: &RateGenerator,
    grid: &TimeGrid,
    opts: &PropagationOptions,
) -> Result<CorrelationSeries> {
    let g2_zero = observables::g2_zero(i, j, pss)?;
    let gi = observables::intensity(i, pss);
    let gj = observables::intensity(j, pss);
    let jumped = observables::jump_state(i, pss.spec(), pss.values());
    let states = propagate(gen, &jumped, grid, opts)?;
    let values = states
        .iter()
        .zip(grid.taus())
        .map(|(v, &tau)| {
            let g = if tau == 0.0 {
                g2_zero
            } else {
                observables::intensity_of(j, pss.spec(), v) / (gi * gj)
            };
            g.max(0.0)
        })
        .collect();
    Ok(CorrelationSeries::new(i, j, g2_zero, grid.clone(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steadystate::closed_form_distribution;

    fn spec(n: usize) -> EnsembleSpec {
        EnsembleSpec::new(n).unwrap()
    }

    #[test]
    fn single_atom_chain() {
        let bath = BathParams::from_nbar(1.0, 1.5, 0.3, 0.8).unwrap();
        let s = spec(1);
        let q = build_generator(&s, &bath);
        let (g00, g01, g11) = (0, 1, 2);
        assert!((q.entry(g00, g01) - 2.0 * 1.5 * 1.8).abs() < 1e-12);
        assert!((q.entry(g01, g00) - 2.0 * 1.5 * 0.8).abs() < 1e-12);
        assert!((q.entry(g11, g01) - 2.0 * 0.3).abs() < 1e-12);
        assert!((q.entry(g01, g11) - 2.0 * 1.3).abs() < 1e-12);
        assert_eq!(q.entry(g11, g00), 0.0);
        assert_eq!(q.entry(g00, g11), 0.0);
    }

    #[test]
    fn columns_conserve_probability() {
        let s = spec(10);
        let q = build_generator(&s, &BathParams::unit_gamma(0.5, 0.5).unwrap());
        for j in 0..s.dim() {
            let sum: f64 = q.column(j).map(|(_, v)| v).sum::<f64>() + q.entry(j, j);
            assert!(sum.abs() < 1e-12);
            assert!(q.column(j).count() <= 4);
            assert!(q.column(j).all(|(_, v)| v >= 0.0));
        }
    }

    #[test]
    fn closed_form_is_stationary_at_fifty_atoms() {
        let s = spec(50);
        let q = build_generator(&s, &BathParams::unit_gamma(0.3, 0.6).unwrap());
        let p = closed_form_distribution(&s, 0.3, 0.6).unwrap();
        let r = q.apply(p.values()).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(r < 1e-10, "residual {r}");
    }

    #[test]
    fn shifted_banded_reproduces_generator() {
        let s = spec(6);
        let q = build_generator(&s, &BathParams::unit_gamma(0.4, 0.7).unwrap());
        let a = q.shifted_banded(-0.3, 1.0).factorize().unwrap();
        let x: Vec<f64> = (0..s.dim()).map(|k| 1.0 + (k as f64).cos()).collect();
        // (I - 0.3 Q) y = x
        let mut y = x.clone();
        a.solve_in_place(&mut y);
        let qy = q.apply(&y);
        for k in 0..s.dim() {
            assert!((y[k] - 0.3 * qy[k] - x[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![-1.0, 0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::linear(0.0, 1.0, 0).is_err());
        let g = TimeGrid::linear(0.0, 2.0, 5).unwrap();
        assert_eq!(g.taus(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        let l = TimeGrid::logarithmic(0.01, 10.0, 5).unwrap();
        assert_eq!(l.taus()[0], 0.0);
        assert!((l.taus()[1] - 0.01).abs() < 1e-15);
        assert!((l.last() - 10.0).abs() < 1e-12);
        assert!(TimeGrid::logarithmic(0.0, 1.0, 4).is_err());
    }

    #[test]
    fn stationary_state_is_a_fixed_point() {
        let s = spec(4);
        let bath = BathParams::unit_gamma(0.45, 0.65).unwrap();
        let q = build_generator(&s, &bath);
        let p = closed_form_distribution(&s, 0.45, 0.65).unwrap();
        let grid = TimeGrid::linear(0.0, 3.0, 7).unwrap();
        for method in [Method::Explicit, Method::Krylov] {
            let out = evolve_with(&p, &q, &grid, &PropagationOptions::with_method(method)).unwrap();
            for d in out {
                assert!(d.max_abs_diff(&p) < 1e-8);
            }
        }
    }

    #[test]
    fn single_atom_decay_cascade() {
        // With an empty bath the upper level decays as exp(-2 gamma1 t).
        let s = spec(1);
        let q = build_generator(&s, &BathParams::from_nbar(1.0, 1.0, 0.0, 0.0).unwrap());
        let p0 = PopulationDistribution::point_mass(s, 1, 1).unwrap();
        let grid = TimeGrid::linear(0.0, 4.0, 21).unwrap();
        for method in [Method::Explicit, Method::Krylov] {
            let out = evolve_with(&p0, &q, &grid, &PropagationOptions::with_method(method)).unwrap();
            for (d, &t) in out.iter().zip(grid.taus()) {
                let upper = (-2.0 * t).exp();
                // Middle level for equal rates: 2 t exp(-2 t).
                let middle = 2.0 * t * (-2.0 * t).exp();
                assert!((d.at(1, 1) - upper).abs() < 1e-8, "{method:?} t={t}");
                assert!((d.at(0, 1) - middle).abs() < 1e-8, "{method:?} t={t}");
            }
        }
    }

    #[test]
    fn relaxes_to_stationary() {
        let s = spec(5);
        let bath = BathParams::unit_gamma(0.6, 0.3).unwrap();
        let q = build_generator(&s, &bath);
        let p0 = PopulationDistribution::point_mass(s, 5, 5).unwrap();
        let grid = TimeGrid::new(vec![0.0, 40.0]).unwrap();
        let out = evolve(&p0, &q, &grid).unwrap();
        let p = closed_form_distribution(&s, 0.6, 0.3).unwrap();
        assert!(out[1].max_abs_diff(&p) < 1e-8);
    }

    #[test]
    fn explicit_and_krylov_agree_on_stiff_problem() {
        let s = spec(30);
        let bath = BathParams::unit_gamma(0.8, 0.7).unwrap();
        let q = build_generator(&s, &bath);
        let p0 = PopulationDistribution::point_mass(s, 0, 0).unwrap();
        let grid = TimeGrid::linear(0.0, 0.2, 11).unwrap();
        let a = evolve_with(&p0, &q, &grid, &PropagationOptions::with_method(Method::Explicit)).unwrap();
        let b = evolve_with(&p0, &q, &grid, &PropagationOptions::with_method(Method::Krylov)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.max_abs_diff(y) < 1e-7, "{}", x.max_abs_diff(y));
        }
    }

    #[test]
    fn correlator_starts_at_static_value() {
        let s = spec(6);
        let bath = BathParams::unit_gamma(0.8, 0.05).unwrap();
        let p = closed_form_distribution(&s, 0.8, 0.05).unwrap();
        let q = build_generator(&s, &bath);
        let grid = TimeGrid::linear(0.0, 2.0, 9).unwrap();
        for i in Transition::BOTH {
            for j in Transition::BOTH {
                let series = regression_correlator(i, j, &p, &q, &grid).unwrap();
                let direct = observables::g2_zero(i, j, &p).unwrap();
                assert_eq!(series.g2_values()[0], direct);
                assert!((series.g2_zero() - direct).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn correlator_needs_light() {
        let s = spec(3);
        let bath = BathParams::unit_gamma(0.5, 0.0).unwrap();
        let p = closed_form_distribution(&s, 0.5, 0.0).unwrap();
        let q = build_generator(&s, &bath);
        let grid = TimeGrid::linear(0.0, 1.0, 3).unwrap();
        assert!(matches!(
            regression_correlator(Transition::One, Transition::One, &p, &q, &grid),
            Err(Error::UndefinedCorrelation { .. })
        ));
    }
}
