//! Brute-force reference for small ensembles (`N <= 4`).
//!
//! Builds the full `3^N`-dimensional Hilbert space, the collective operators
//! as sums of single-atom operators, the symmetrized basis `|N, n, m>`, and
//! the master equation in its commutator form
//!
//! ```text
//! d rho / dt = - c_1d [S12, S21 rho] - c_2d [S23, S32 rho]
//!              - c_1u [S21, S12 rho] - c_2u [S32, S23 rho] + h.c.
//! ```
//!
//! with `c_id = gamma_i (1 + nbar_i)` and `c_iu = gamma_i nbar_i`. Nothing in
//! here uses the closed-form matrix elements or the rate generator, so it can
//! check both.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::collective_ops::{CollectiveOpId, Transition};
use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};
use crate::observables::CorrelationSeries;
use crate::statespace::EnsembleSpec;
use crate::steadystate::BathParams;

pub type CMatrix = DMatrix<Complex64>;
type CVector = nalgebra::DVector<Complex64>;

pub const MAX_ATOMS: usize = 4;
/// Largest ensemble for which the full `9^N`-dimensional superoperator is built.
pub const MAX_FULL_SUPEROPERATOR_ATOMS: usize = 3;

const LEAKAGE_TOL: f64 = 1e-12;

fn check_size(atoms: usize, max: usize) -> Result<()> {
    if atoms == 0 {
        return Err(Error::InvalidEnsemble { atoms: 0 });
    }
    if atoms > max {
        return Err(Error::SizeLimit { atoms, max });
    }
    Ok(())
}

#[inline]
fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Level (0, 1, 2 for |1>, |2>, |3>) of atom `site` in product state `state`.
#[inline]
fn level(state: usize, site: usize) -> usize {
    (state / 3usize.pow(site as u32)) % 3
}

/// `S_ij = sum_k |i>_k <j|` on the full product space.
pub fn full_collective_operator(op: CollectiveOpId, atoms: usize) -> Result<CMatrix> {
    check_size(atoms, MAX_ATOMS)?;
    let dim = 3usize.pow(atoms as u32);
    let (to, from) = op.levels();
    let (to, from) = (to - 1, from - 1);
    let mut out = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        for site in 0..atoms {
            if level(s, site) == from {
                let stride = 3usize.pow(site as u32);
                let target = s - from * stride + to * stride;
                out[(target, s)] += c(1.0);
            }
        }
    }
    Ok(out)
}

/// Orthonormal symmetrized states, one column per lattice ordinal.
#[derive(Debug, Clone)]
pub struct SymmetricBasis {
    spec: EnsembleSpec,
    vectors: DMatrix<f64>,
}

impl SymmetricBasis {
    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    /// `3^N x D` matrix of basis columns.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn complex_vectors(&self) -> CMatrix {
        self.vectors.map(c)
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.vectors.transpose() * &self.vectors;
        let d = gram.nrows();
        (gram - DMatrix::<f64>::identity(d, d)).amax()
    }
}

/// Equal-weight superpositions of all product states with occupations
/// `(n, m - n, N - m)`.
pub fn build_symmetric_basis(atoms: usize) -> Result<SymmetricBasis> {
    check_size(atoms, MAX_ATOMS)?;
    let spec = EnsembleSpec::new(atoms)?;
    let full = 3usize.pow(atoms as u32);
    let mut vectors = DMatrix::<f64>::zeros(full, spec.dim());
    for (col, (n, m)) in spec.states().enumerate() {
        let want = [n, m - n, atoms - m];
        let members: Vec<usize> = (0..full)
            .filter(|&s| {
                let mut counts = [0usize; 3];
                (0..atoms).for_each(|k| counts[level(s, k)] += 1);
                counts == want
            })
            .collect();
        let amp = 1.0 / (members.len() as f64).sqrt();
        for s in members {
            vectors[(s, col)] = amp;
        }
    }
    Ok(SymmetricBasis { spec, vectors })
}

/// `S_op` restricted to the symmetric subspace, `D x D`.
///
/// Fails if the full operator maps any symmetric state outside the subspace.
pub fn oracle_collective_matrix(op: CollectiveOpId, atoms: usize) -> Result<DMatrix<f64>> {
    let basis = build_symmetric_basis(atoms)?;
    let full = full_collective_operator(op, atoms)?.map(|z| z.re);
    restrict(&full, &basis, &format!("{op:?}"))
}

fn restrict(full: &DMatrix<f64>, basis: &SymmetricBasis, what: &str) -> Result<DMatrix<f64>> {
    let b = basis.vectors();
    let image = full * b;
    let block = b.transpose() * &image;
    let leakage = (image - b * &block).amax();
    if leakage > LEAKAGE_TOL {
        return Err(Error::InternalConsistency {
            what: format!("symmetric-subspace leakage of {what}"),
            defect: leakage,
        });
    }
    Ok(block)
}

/// Jump terms `(A, B, c)` of the commutator form `-c [A, B rho] + h.c.`.
struct Terms {
    ops: Vec<(CMatrix, CMatrix, f64)>,
}

impl Terms {
    fn full(atoms: usize, bath: &BathParams) -> Result<Self> {
        use CollectiveOpId::*;
        let op = |o| full_collective_operator(o, atoms);
        let half = |r: f64| 0.5 * r;
        Ok(Self {
            ops: vec![
                (op(S12)?, op(S21)?, half(bath.down_rate(Transition::One))),
                (op(S23)?, op(S32)?, half(bath.down_rate(Transition::Two))),
                (op(S21)?, op(S12)?, half(bath.up_rate(Transition::One))),
                (op(S32)?, op(S23)?, half(bath.up_rate(Transition::Two))),
            ],
        })
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        for (a, b, coeff) in &self.ops {
            if *coeff == 0.0 {
                continue;
            }
            // Linear in rho, so it also acts correctly on non-Hermitian basis elements.
            let b_rho = b * rho;
            let rho_bd = rho * b.adjoint();
            let ad = a.adjoint();
            out += (a * &b_rho - &b_rho * a + &rho_bd * &ad - &ad * &rho_bd) * c(-coeff);
        }
        out
    }
}

impl Terms {
    /// Image of the rank-one matrix `u w^H` as a list of pairs `(x, y)` with
    /// `L(u w^H) = sum x y^H`.
    fn apply_outer(&self, u: &CVector, w: &CVector) -> Vec<(CVector, CVector)> {
        let mut out = Vec::with_capacity(4 * self.ops.len());
        for (a, b, coeff) in &self.ops {
            if *coeff == 0.0 {
                continue;
            }
            let k = c(-coeff);
            let ad = a.adjoint();
            let bu = b * u;
            let bw = b * w;
            out.push((a * &bu * k, w.clone()));
            out.push((bu * -k, &ad * w));
            out.push((u * k, a * &bw));
            out.push((&ad * u * -k, bw));
        }
        out
    }
}

/// The master equation acting on full `3^N x 3^N` density matrices.
pub struct FullLindblad {
    atoms: usize,
    terms: Terms,
}

impl FullLindblad {
    pub fn new(atoms: usize, bath: &BathParams) -> Result<Self> {
        check_size(atoms, MAX_ATOMS)?;
        Ok(Self {
            atoms,
            terms: Terms::full(atoms, bath)?,
        })
    }

    pub fn hilbert_dim(&self) -> usize {
        3usize.pow(self.atoms as u32)
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.terms.apply(rho)
    }

    /// Dense superoperator on column-major vectorized density matrices.
    pub fn superoperator(&self) -> Result<CMatrix> {
        check_size(self.atoms, MAX_FULL_SUPEROPERATOR_ATOMS)?;
        let d = self.hilbert_dim();
        let mut out = CMatrix::zeros(d * d, d * d);
        let mut unit = CMatrix::zeros(d, d);
        for b in 0..d {
            for a in 0..d {
                unit[(a, b)] = c(1.0);
                let image = self.apply(&unit);
                unit[(a, b)] = c(0.0);
                out.column_mut(a + d * b).copy_from_slice(image.as_slice());
            }
        }
        Ok(out)
    }
}

/// Density matrix on the full product space.
#[derive(Debug, Clone)]
pub struct FullDensityMatrix {
    atoms: usize,
    matrix: CMatrix,
}

impl FullDensityMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).map(|z| z.norm()).max()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * c(0.5);
        herm.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// `<N, n, m| rho |N, n', m'>` in the symmetric basis.
    pub fn symmetric_block(&self, basis: &SymmetricBasis) -> CMatrix {
        let b = basis.complex_vectors();
        b.transpose() * &self.matrix * b
    }

    /// Weight outside the symmetric subspace, `1 - Tr[P rho]`.
    pub fn external_weight(&self, basis: &SymmetricBasis) -> f64 {
        (self.trace() - self.symmetric_block(basis).trace()).norm()
    }
}

/// The master equation restricted to operators on the symmetric subspace,
/// with coherences kept.
pub struct Oracle {
    spec: EnsembleSpec,
    basis: SymmetricBasis,
    lowering: [CMatrix; 2],
    superop: CMatrix,
}

impl Oracle {
    pub fn new(atoms: usize, bath: &BathParams) -> Result<Self> {
        check_size(atoms, MAX_ATOMS)?;
        let basis = build_symmetric_basis(atoms)?;
        let spec = *basis.spec();
        let full = FullLindblad::new(atoms, bath)?;
        let b = basis.complex_vectors();
        let bt = b.transpose();
        let d = spec.dim();
        let columns: Vec<CVector> = (0..d).map(|k| b.column(k).into_owned()).collect();
        let mut superop = CMatrix::zeros(d * d, d * d);
        for col_b in 0..d {
            for col_a in 0..d {
                let pieces = full.terms.apply_outer(&columns[col_a], &columns[col_b]);
                // The symmetric basis is real, so its projector is `b b^T`.
                let mut block = CMatrix::zeros(d, d);
                let mut leakage = CMatrix::zeros(b.nrows(), b.nrows());
                let mut scale: f64 = 0.0;
                for (x, y) in &pieces {
                    let px = &bt * x;
                    let py = &bt * y;
                    block += &px * py.adjoint();
                    leakage += x * y.adjoint() - (&b * &px) * (&b * &py).adjoint();
                    scale = scale.max(x.norm() * y.norm());
                }
                let leakage = leakage.map(|z| z.norm()).max();
                if leakage > 1e3 * LEAKAGE_TOL * (1.0 + scale) {
                    return Err(Error::InternalConsistency {
                        what: "master equation leaves the symmetric subspace".into(),
                        defect: leakage,
                    });
                }
                superop
                    .column_mut(col_a + d * col_b)
                    .copy_from_slice(block.as_slice());
            }
        }
        let lower = |t: Transition| -> Result<CMatrix> {
            Ok(oracle_collective_matrix(t.lowering(), atoms)?.map(c))
        };
        Ok(Self {
            spec,
            lowering: [lower(Transition::One)?, lower(Transition::Two)?],
            basis,
            superop,
        })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn basis(&self) -> &SymmetricBasis {
        &self.basis
    }

    /// `D^2 x D^2` superoperator on vectorized symmetric-block matrices.
    pub fn superoperator(&self) -> &CMatrix {
        &self.superop
    }

    fn lowering(&self, t: Transition) -> &CMatrix {
        &self.lowering[t.slot()]
    }

    fn vectorize(m: &CMatrix) -> CMatrix {
        CMatrix::from_column_slice(m.len(), 1, m.as_slice())
    }

    fn unvectorize(&self, v: &CMatrix) -> CMatrix {
        let d = self.spec.dim();
        CMatrix::from_column_slice(d, d, v.as_slice())
    }

    /// Stationary symmetric block from the null space of the superoperator.
    pub fn steady_state_block(&self) -> Result<CMatrix> {
        let svd = self.superop.clone().svd(false, true);
        let v_t = svd.v_t.as_ref().expect("requested V^H");
        let sigma = &svd.singular_values;
        let top = sigma.max().max(1e-300);
        let mut order: Vec<usize> = (0..sigma.len()).collect();
        order.sort_by(|&a, &b| sigma[a].total_cmp(&sigma[b]));
        let null_dim = order.iter().filter(|&&k| sigma[k] <= 1e-9 * top).count();
        if null_dim != 1 {
            return Err(Error::Reducible {
                null_dim,
                singular_values: order.iter().take(null_dim.max(2)).map(|&k| sigma[k]).collect(),
            });
        }
        let row: Vec<Complex64> = v_t.row(order[0]).iter().map(|z| z.conj()).collect();
        let d = self.spec.dim();
        let rho = CMatrix::from_column_slice(d, d, &row);
        let tr = rho.trace();
        let rho = rho / tr;
        Ok((&rho + rho.adjoint()) * c(0.5))
    }

    pub fn steady_state(&self) -> Result<FullDensityMatrix> {
        let block = self.steady_state_block()?;
        let b = self.basis.complex_vectors();
        Ok(FullDensityMatrix {
            atoms: self.spec.atoms(),
            matrix: &b * block * b.transpose(),
        })
    }

    /// `exp(L tau)` applied to a symmetric block.
    pub fn propagate(&self, block: &CMatrix, tau: f64) -> CMatrix {
        let step = (&self.superop * c(tau)).exp();
        self.unvectorize(&(step * Self::vectorize(block)))
    }

    /// The block at every grid time. Consecutive grid steps share one
    /// exponential when they have the same length.
    pub fn propagate_series(&self, block: &CMatrix, grid: &TimeGrid) -> Vec<CMatrix> {
        let mut steps: Vec<(u64, CMatrix)> = Vec::new();
        let mut v = Self::vectorize(block);
        let mut t = 0.0;
        let mut out = Vec::with_capacity(grid.len());
        for &tau in grid.taus() {
            let dt = tau - t;
            if dt > 0.0 {
                let key = dt.to_bits();
                let pos = match steps.iter().position(|(k, _)| *k == key) {
                    Some(pos) => pos,
                    None => {
                        steps.push((key, (&self.superop * c(dt)).exp()));
                        steps.len() - 1
                    }
                };
                v = &steps[pos].1 * v;
                t = tau;
            }
            out.push(self.unvectorize(&v));
        }
        out
    }

    /// Diagonal populations of a diagonal initial block at each grid time.
    pub fn propagate_populations(&self, p0: &[f64], grid: &TimeGrid) -> Vec<Vec<f64>> {
        let block = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            p0.len(),
            p0.iter().map(|&x| c(x)),
        ));
        self.propagate_series(&block, grid)
            .iter()
            .map(|out| (0..p0.len()).map(|k| out[(k, k)].re).collect())
            .collect()
    }

    fn intensity(&self, t: Transition, block: &CMatrix) -> f64 {
        let j = self.lowering(t);
        (j.adjoint() * j * block).trace().re
    }

    /// `g2_ij(tau)` by quantum regression on the symmetric block, coherences
    /// included.
    pub fn g2(&self, i: Transition, j: Transition, grid: &TimeGrid) -> Result<CorrelationSeries> {
        let rho = self.steady_state_block()?;
        let gi = self.intensity(i, &rho);
        let gj = self.intensity(j, &rho);
        for (g, t) in [(gi, i), (gj, j)] {
            if g <= 1e-14 {
                return Err(Error::UndefinedCorrelation {
                    i: i.label(),
                    j: j.label(),
                    zero: t.label(),
                });
            }
        }
        let ji = self.lowering(i);
        let jumped = ji * &rho * ji.adjoint();
        let values: Vec<f64> = self
            .propagate_series(&jumped, grid)
            .iter()
            .map(|block| self.intensity(j, block) / (gi * gj))
            .collect();
        let g0 = self.intensity(j, &jumped) / (gi * gj);
        Ok(CorrelationSeries::new(i, j, g0, grid.clone(), values))
    }
}
