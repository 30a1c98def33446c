use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DensityMatrix, Liouvillian, Sector};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Clone, Debug)]
pub struct SteadyStateOptions {
    /// Required `||L(rho)||_F <= tol * ||L||` for the trace-normalized result.
    pub tol: f64,
    /// Vectorized dimensions up to this size use a dense SVD null-space solve.
    pub dense_threshold: usize,
    /// Relative singular-value (dense) or Rayleigh-residual (sparse) threshold
    /// below which a second null vector counts as degenerate.
    pub degeneracy_gap: f64,
    /// Fail with [`Error::Degenerate`] if more than one steady state is found.
    pub expect_unique: bool,
    /// Restrict to the number-diagonal sector when the generator conserves
    /// photon number weakly. Degeneracy detection then only sees that sector.
    pub use_symmetry: bool,
    /// Relative shift `sigma / ||L||` used by the sparse inverse iteration.
    pub shift: f64,
    pub max_iterations: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            dense_threshold: 1024,
            degeneracy_gap: 1e-8,
            expect_unique: true,
            use_symmetry: true,
            shift: 1e-13,
            max_iterations: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteadyStateMethod {
    DenseNullSpace,
    ShiftedInverse,
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `||L(rho)||_F / ||L||`.
    pub residual: f64,
    pub method: SteadyStateMethod,
    /// Number of unknowns actually solved for.
    pub solved_dim: usize,
}

/// Null space of the generator. `basis` holds trace-normalized density
/// matrices when the trace is non-zero, otherwise raw null vectors.
#[derive(Clone, Debug)]
pub struct SteadyManifold {
    pub basis: Vec<Mat<C64>>,
    pub degenerate: bool,
    pub method: SteadyStateMethod,
    /// Relative size of the smallest non-null direction that was probed.
    pub gap: f64,
}

/// Unique steady state of `liouvillian`.
pub fn steady_state(liouvillian: &Liouvillian, opts: &SteadyStateOptions) -> Result<SteadyState> {
    let manifold = steady_state_manifold(liouvillian, opts)?;
    if manifold.degenerate && opts.expect_unique {
        return Err(Error::Degenerate {
            dimension: manifold.basis.len(),
            gap: opts.degeneracy_gap,
        });
    }
    let rho = DensityMatrix::from_matrix(liouvillian.space(), manifold.basis[0].clone())?;
    let residual = relative_residual(liouvillian, rho.matrix());
    if !(residual <= opts.tol) {
        return Err(Error::NoConvergence { residual });
    }
    let solved_dim = solved_dim(liouvillian, opts);
    Ok(SteadyState {
        rho,
        residual,
        method: manifold.method,
        solved_dim,
    })
}

fn solved_dim(liouvillian: &Liouvillian, opts: &SteadyStateOptions) -> usize {
    choose_sector(liouvillian, opts).len()
}

fn choose_sector(liouvillian: &Liouvillian, opts: &SteadyStateOptions) -> Sector {
    let d = liouvillian.space().total_dim();
    if opts.use_symmetry {
        if let Some(s) = liouvillian.number_sector() {
            return s;
        }
    }
    Sector::full(d)
}

pub(crate) fn relative_residual(liouvillian: &Liouvillian, rho: &Mat<C64>) -> f64 {
    let r = liouvillian.apply(rho);
    let num = frob(&r);
    num / (liouvillian.norm_bound().max(f64::MIN_POSITIVE) * frob(rho).max(f64::MIN_POSITIVE))
}

fn frob(m: &Mat<C64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

/// Null space (one vector, or a basis when degenerate) of the generator.
pub fn steady_state_manifold(liouvillian: &Liouvillian, opts: &SteadyStateOptions) -> Result<SteadyManifold> {
    let sector = choose_sector(liouvillian, opts);
    let superop = liouvillian.restricted_superop(&sector);
    let (vectors, degenerate, gap, method) = if sector.len() <= opts.dense_threshold {
        let (v, gap) = dense_null_space(&superop, opts.degeneracy_gap)?;
        let deg = v.len() > 1;
        (v, deg, gap, SteadyStateMethod::DenseNullSpace)
    } else {
        let (v, deg, gap) = sparse_null_space(&superop, &sector, opts)?;
        (v, deg, gap, SteadyStateMethod::ShiftedInverse)
    };
    let basis = vectors
        .iter()
        .map(|v| to_density(v, &sector))
        .collect::<Vec<_>>();
    Ok(SteadyManifold {
        basis,
        degenerate,
        method,
        gap,
    })
}

fn to_density(v: &[C64], sector: &Sector) -> Mat<C64> {
    let d = sector.hilbert_dim();
    let mut m = Mat::<C64>::zeros(d, d);
    for (p, &(i, j)) in sector.basis().iter().enumerate() {
        m[(i, j)] = v[p];
    }
    let tr: C64 = (0..d).map(|i| m[(i, i)]).sum();
    if tr.norm() > 1e-12 * frob(&m) {
        let inv = 1.0 / tr;
        Mat::from_fn(d, d, |i, j| 0.5 * (m[(i, j)] * inv + (m[(j, i)] * inv).conj()))
    } else {
        m
    }
}

/// Returns the right singular vectors whose singular values fall below
/// `gap * sigma_max`, always including the smallest one.
fn dense_null_space(superop: &CsrMatrix, gap: f64) -> Result<(Vec<Vec<C64>>, f64)> {
    let n = superop.nrows();
    let dense = superop.to_dense();
    let svd = dense.svd().map_err(|e| Error::Linalg(format!("svd: {e:?}")))?;
    let s = svd.S().column_vector();
    let v = svd.V();
    let smax = s[0].re.max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    for k in (0..n).rev() {
        if out.is_empty() || s[k].re <= gap * smax {
            out.push((0..n).map(|i| v[(i, k)]).collect());
        } else {
            break;
        }
    }
    let next = n.checked_sub(out.len() + 1).map_or(0.0, |k| s[k].re / smax);
    Ok((out, next))
}

/// Real coordinates of the Hermitian matrices in a sector: `ρ_ii`, and
/// `Re ρ_ij`, `Im ρ_ij` for `i < j`. A Lindblad generator preserves
/// Hermiticity, so its null space is spanned by Hermitian matrices and the
/// real form loses nothing while halving the storage of the factorization.
struct HermitianCoords {
    /// Real index of `Re ρ_ij` (or `ρ_ii`) for each sector position with `i <= j`.
    index: Vec<usize>,
}

impl HermitianCoords {
    fn new(sector: &Sector) -> Self {
        let mut index = vec![usize::MAX; sector.len()];
        let mut next = 0;
        for (p, &(i, j)) in sector.basis().iter().enumerate() {
            if i <= j {
                index[p] = next;
                next += if i == j { 1 } else { 2 };
            }
        }
        Self { index }
    }

    /// `(real index, coefficient)` pairs with `ρ_ij = Σ c x_k`.
    fn input(&self, sector: &Sector, p: usize) -> [(usize, C64); 2] {
        let (i, j) = sector.basis()[p];
        let zero = (usize::MAX, C64::new(0.0, 0.0));
        if i == j {
            [(self.index[p], C64::new(1.0, 0.0)), zero]
        } else {
            let (k, sign) = if i < j { (self.index[p], 1.0) } else { (self.index[sector.position(j, i).expect("sector is transpose-closed")], -1.0) };
            [(k, C64::new(1.0, 0.0)), (k + 1, C64::new(0.0, sign))]
        }
    }

    fn real_superop(&self, superop: &CsrMatrix, sector: &Sector) -> faer::sparse::SparseColMat<usize, f64> {
        use faer::sparse::{SparseColMat, Triplet};
        let mut triplets = Vec::with_capacity(2 * superop.nnz());
        for (row, col, s) in superop.triplets() {
            let (k, l) = sector.basis()[row];
            if k > l {
                continue;
            }
            let r = self.index[row];
            for (c, coef) in self.input(sector, col) {
                if c == usize::MAX {
                    continue;
                }
                let v = s * coef;
                triplets.push(Triplet::new(r, c, v.re));
                if k < l {
                    triplets.push(Triplet::new(r + 1, c, v.im));
                }
            }
        }
        let n = sector.len();
        SparseColMat::try_new_from_triplets(n, n, &triplets).expect("real coordinates are in range")
    }

    fn to_complex(&self, sector: &Sector, x: &[f64]) -> Vec<C64> {
        (0..sector.len())
            .map(|p| self.input(sector, p).iter().filter(|(k, _)| *k != usize::MAX).map(|(k, c)| c * x[*k]).sum())
            .collect()
    }
}

fn sparse_null_space(
    superop: &CsrMatrix,
    sector: &Sector,
    opts: &SteadyStateOptions,
) -> Result<(Vec<Vec<C64>>, bool, f64)> {
    let n = superop.nrows();
    let norm = superop.norm_one().max(f64::MIN_POSITIVE);
    let coords = HermitianCoords::new(sector);
    let real = coords.real_superop(superop, sector);
    let shift = faer::sparse::SparseColMat::<usize, f64>::try_new_from_triplets(
        n,
        n,
        &(0..n).map(|i| faer::sparse::Triplet::new(i, i, -opts.shift * norm)).collect::<Vec<_>>(),
    )
    .expect("diagonal is in range");
    let lu = (&real + &shift)
        .sp_lu()
        .map_err(|e| Error::Linalg(format!("sparse LU: {e:?}")))?;
    drop(real);
    let solve = |x: &[f64]| -> Vec<f64> {
        let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| x[i]);
        lu.solve_in_place(rhs.as_mut());
        (0..n).map(|i| rhs[(i, 0)]).collect()
    };
    let rel_residual = |x: &[f64]| -> f64 {
        let v = coords.to_complex(sector, x);
        let y = superop.matvec(&v);
        norm2(&y) / (norm * norm2(&v))
    };

    // Start from the identity: its overlap with the left null vector (the
    // identity itself) is non-zero, so the iteration cannot miss the steady state.
    let mut x = vec![0.0; n];
    for p in sector.diagonal_positions() {
        x[coords.index[p]] = 1.0;
    }
    normalize(&mut x);
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        x = solve(&x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NoConvergence { residual });
        }
        normalize(&mut x);
        residual = rel_residual(&x);
        if residual <= opts.tol * 1e-2 {
            break;
        }
    }
    if !(residual <= opts.tol) {
        return Err(Error::NoConvergence { residual });
    }

    // Probe for a second null vector by deflated inverse iteration.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let mut probe = f64::INFINITY;
    for _ in 0..8 {
        project_out(&mut y, &x);
        normalize(&mut y);
        y = solve(&y);
        project_out(&mut y, &x);
        normalize(&mut y);
        probe = rel_residual(&y);
        if probe <= opts.degeneracy_gap * 1e-3 {
            break;
        }
    }
    let first = coords.to_complex(sector, &x);
    if probe <= opts.degeneracy_gap {
        Ok((vec![first, coords.to_complex(sector, &y)], true, probe))
    } else {
        Ok((vec![first], false, probe))
    }
}

fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

fn project_out(y: &mut [f64], x: &[f64]) {
    let dot: f64 = x.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
    y.iter_mut().zip(x).for_each(|(b, a)| *b -= dot * a);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, number, FockSpace, SparseOperator};
    use crate::lindblad::{build_liouvillian, expectation};

    #[test]
    fn pure_loss_empties_the_mode() {
        let s = FockSpace::uniform(1, 3).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let l = build_liouvillian(&SparseOperator::zero(&s), &[a.scale_re(1.0)]).unwrap();
        let ss = steady_state(&l, &SteadyStateOptions::default()).unwrap();
        assert!((ss.rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(ss.residual < 1e-12);
    }

    #[test]
    fn thermal_state_from_gain_and_loss() {
        let eta2: f64 = 0.3;
        let s = FockSpace::uniform(1, 40).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let l = build_liouvillian(
            &SparseOperator::zero(&s),
            &[a.clone(), a.dag().scale_re(eta2.sqrt())],
        )
        .unwrap();
        let ss = steady_state(&l, &SteadyStateOptions::default()).unwrap();
        let n = expectation(&ss.rho, &number(&s, 0).unwrap()).unwrap();
        assert!((n.re - eta2 / (1.0 - eta2)).abs() < 1e-10);
    }

    #[test]
    fn sparse_and_dense_paths_agree() {
        let s = FockSpace::new(vec![4, 4]).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let b = annihilation(&s, 1).unwrap();
        let h = a.dag().mul(&b).unwrap().add(&b.dag().mul(&a).unwrap()).unwrap();
        let l = build_liouvillian(&h, &[a.scale_re(1.5), b.dag().scale_re(0.5), b.scale_re(0.8)]).unwrap();
        let dense = steady_state(&l, &SteadyStateOptions { use_symmetry: false, ..Default::default() }).unwrap();
        let sparse = steady_state(
            &l,
            &SteadyStateOptions { dense_threshold: 0, ..Default::default() },
        )
        .unwrap();
        assert_eq!(dense.method, SteadyStateMethod::DenseNullSpace);
        assert_eq!(sparse.method, SteadyStateMethod::ShiftedInverse);
        assert!(dense.rho.trace_distance(&sparse.rho).unwrap() < 1e-9);
    }

    #[test]
    fn decoupled_lossy_modes_are_degenerate_when_one_is_lossless() {
        // Mode 1 has no dissipation at all, so every number state of it is stationary.
        let s = FockSpace::new(vec![2, 2]).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let l = build_liouvillian(&SparseOperator::zero(&s), &[a]).unwrap();
        for dense_threshold in [4096, 0] {
            let opts = SteadyStateOptions { dense_threshold, ..Default::default() };
            let m = steady_state_manifold(&l, &opts).unwrap();
            assert!(m.degenerate);
            assert!(matches!(steady_state(&l, &opts), Err(Error::Degenerate { .. })));
        }
    }
}
