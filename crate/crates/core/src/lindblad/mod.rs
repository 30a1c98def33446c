//! Vectorized Lindblad master equations.
//!
//! A density matrix `rho` is vectorized row-major, `vec(rho)[i*d + j] =
//! rho[i, j]`, so `vec(A rho B) = (A ⊗ B^T) vec(rho)`. With that convention
//! the generator reads
//!
//! ```text
//! L = -i (H ⊗ 1 - 1 ⊗ H^T) + sum_k [ L_k ⊗ L_k^* - ½ L_k^dag L_k ⊗ 1 - ½ 1 ⊗ (L_k^dag L_k)^T ]
//! ```
//!
//! Internally the generator is stored as `K rho + rho K^dag + sum_k L_k rho L_k^dag`
//! with the non-Hermitian `K = -i H - ½ sum_k L_k^dag L_k`.

mod density;
mod evolve;
mod sector;
mod steady;

pub use density::DensityMatrix;
pub use evolve::{evolve, EvolveOptions};
pub use sector::Sector;
pub use steady::{
    steady_state, steady_state_manifold, SteadyManifold, SteadyState, SteadyStateMethod,
    SteadyStateOptions,
};

use std::sync::OnceLock;

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{FockSpace, SparseOperator};
use crate::sparse::{dense_sparse, sparse_dense, CsrMatrix};

/// Largest vectorized dimension for which the full superoperator is materialized.
pub const FULL_SUPEROP_MAX_DIM: usize = 1 << 22;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug)]
pub struct Liouvillian {
    space: FockSpace,
    hamiltonian: SparseOperator,
    jumps: Vec<SparseOperator>,
    effective: CsrMatrix,
    superop: OnceLock<CsrMatrix>,
}

/// Assembles the Lindblad generator for `hamiltonian` and the jump operators.
pub fn build_liouvillian(hamiltonian: &SparseOperator, jumps: &[SparseOperator]) -> Result<Liouvillian> {
    let scale = hamiltonian.matrix().max_abs().max(1.0);
    let dev = hamiltonian.hermiticity_error();
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    for j in jumps {
        hamiltonian.same_space(j)?;
    }
    let mut effective = hamiltonian.matrix().scale(C64::new(0.0, -1.0));
    for j in jumps {
        let ldl = j.matrix().adjoint().matmul(j.matrix());
        effective = effective.add_scaled(&ldl, C64::new(-0.5, 0.0));
    }
    Ok(Liouvillian {
        space: hamiltonian.space().clone(),
        hamiltonian: hamiltonian.clone(),
        jumps: jumps.to_vec(),
        effective,
        superop: OnceLock::new(),
    })
}

impl Liouvillian {
    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn hamiltonian(&self) -> &SparseOperator {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[SparseOperator] {
        &self.jumps
    }

    pub fn vectorized_dim(&self) -> usize {
        self.space.total_dim() * self.space.total_dim()
    }

    /// Full `d² × d²` superoperator in the row-major vectorization.
    ///
    /// # Panics
    /// If `d²` exceeds [`FULL_SUPEROP_MAX_DIM`]; use [`Liouvillian::try_superop`]
    /// to get an error instead.
    pub fn superop(&self) -> &CsrMatrix {
        self.try_superop().expect("superoperator exceeds memory guard")
    }

    pub fn try_superop(&self) -> Result<&CsrMatrix> {
        if let Some(s) = self.superop.get() {
            return Ok(s);
        }
        let n = self.vectorized_dim();
        if n > FULL_SUPEROP_MAX_DIM {
            return Err(Error::MemoryGuard(format!(
                "full superoperator of dimension {n} exceeds {FULL_SUPEROP_MAX_DIM}"
            )));
        }
        let s = self.restricted_superop(&Sector::full(self.space.total_dim()));
        Ok(self.superop.get_or_init(|| s))
    }

    /// The generator restricted to the matrix elements listed in `sector`.
    /// Entries that leave the sector are dropped, so this is exact only for
    /// invariant sectors (see [`Liouvillian::number_sector`]).
    pub fn restricted_superop(&self, sector: &Sector) -> CsrMatrix {
        let kt = self.effective.transpose();
        let jumps_t: Vec<CsrMatrix> = self.jumps.iter().map(|j| j.matrix().transpose()).collect();
        let mut triplets = Vec::new();
        for (col, &(i, j)) in sector.basis().iter().enumerate() {
            // K |i><j|
            for (k, v) in kt.row(i) {
                if let Some(p) = sector.position(k, j) {
                    triplets.push((p, col, v));
                }
            }
            // |i><j| K^dag
            for (l, v) in kt.row(j) {
                if let Some(p) = sector.position(i, l) {
                    triplets.push((p, col, v.conj()));
                }
            }
            // L |i><j| L^dag
            for lt in &jumps_t {
                for (k, v) in lt.row(i) {
                    for (l, w) in lt.row(j) {
                        if let Some(p) = sector.position(k, l) {
                            triplets.push((p, col, v * w.conj()));
                        }
                    }
                }
            }
        }
        CsrMatrix::from_triplets(sector.len(), sector.len(), triplets)
    }

    /// The number-diagonal sector `{|i><j| : N_i = N_j}` when the generator has
    /// a weak U(1) symmetry generated by the total photon number, i.e. the
    /// Hamiltonian conserves `N` and every jump shifts it by a fixed amount.
    pub fn number_sector(&self) -> Option<Sector> {
        if self.hamiltonian.number_change() != Some(0) {
            return None;
        }
        if self.jumps.iter().any(|j| j.number_change().is_none()) {
            return None;
        }
        let charges: Vec<usize> = (0..self.space.total_dim())
            .map(|i| self.space.total_number(i))
            .collect();
        Some(Sector::by_charge(&charges))
    }

    /// `L(rho)` in matrix form.
    pub fn apply(&self, rho: &Mat<C64>) -> Mat<C64> {
        let mut out = sparse_dense(&self.effective, rho);
        let right = dense_sparse(rho, &self.effective.adjoint());
        out += &right;
        for j in &self.jumps {
            let lr = sparse_dense(j.matrix(), rho);
            out += &dense_sparse(&lr, &j.matrix().adjoint());
        }
        out
    }

    /// Heisenberg-picture generator `L^dag(O) = i[H, O] + sum_k (L_k^dag O L_k - ½{L_k^dag L_k, O})`.
    pub fn apply_adjoint(&self, op: &SparseOperator) -> Result<SparseOperator> {
        self.hamiltonian.same_space(op)?;
        let k = &self.effective;
        let o = op.matrix();
        let mut out = k.adjoint().matmul(o).add(&o.matmul(k));
        for j in &self.jumps {
            let l = j.matrix();
            out = out.add(&l.adjoint().matmul(o).matmul(l));
        }
        SparseOperator::from_matrix(&self.space, out)
    }

    /// Cheap upper bound on the induced 1-norm of the generator.
    pub fn norm_bound(&self) -> f64 {
        let k = self.effective.norm_one().max(self.effective.norm_inf());
        let j: f64 = self
            .jumps
            .iter()
            .map(|j| j.matrix().norm_one() * j.matrix().norm_inf())
            .sum();
        2.0 * k + j
    }
}

/// `Tr(rho O)`.
pub fn expectation(rho: &DensityMatrix, op: &SparseOperator) -> Result<C64> {
    if rho.space() != op.space() {
        return Err(Error::SpaceMismatch);
    }
    let m = rho.matrix();
    Ok(op
        .matrix()
        .triplets()
        .map(|(r, c, v)| v * m[(c, r)])
        .sum())
}

/// `d<O>/dt` evaluated on `rho` through the adjoint generator.
pub fn moment_rhs(rho: &DensityMatrix, liouvillian: &Liouvillian, op: &SparseOperator) -> Result<C64> {
    if rho.space() != liouvillian.space() {
        return Err(Error::SpaceMismatch);
    }
    expectation(rho, &liouvillian.apply_adjoint(op)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, identity, number};

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn rejects_non_hermitian_hamiltonian() {
        let s = FockSpace::uniform(1, 3).unwrap();
        let a = annihilation(&s, 0).unwrap();
        assert!(matches!(build_liouvillian(&a, &[]), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn rejects_mismatched_jumps() {
        let s = FockSpace::uniform(1, 3).unwrap();
        let t = FockSpace::uniform(1, 4).unwrap();
        let h = number(&s, 0).unwrap();
        let l = annihilation(&t, 0).unwrap();
        assert!(matches!(build_liouvillian(&h, &[l]), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn superop_matches_explicit_kron_formula() {
        let s = FockSpace::new(vec![2, 3]).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let b = annihilation(&s, 1).unwrap();
        let h = a.dag().mul(&b).unwrap().add(&b.dag().mul(&a).unwrap()).unwrap()
            .add(&number(&s, 0).unwrap().scale_re(0.3)).unwrap();
        let jumps = vec![a.scale_re(0.7), b.dag().scale_re(0.4)];
        let l = build_liouvillian(&h, &jumps).unwrap();
        let d = s.total_dim();
        let id = CsrMatrix::identity(d);
        let hm = h.matrix();
        let mut expect = hm.kron(&id).add_scaled(&id.kron(&hm.transpose()), re(-1.0)).scale(C64::new(0.0, -1.0));
        for j in &jumps {
            let lm = j.matrix();
            let ldl = lm.adjoint().matmul(lm);
            expect = expect
                .add(&lm.kron(&lm.conj()))
                .add_scaled(&ldl.kron(&id), re(-0.5))
                .add_scaled(&id.kron(&ldl.transpose()), re(-0.5));
        }
        let diff = l.superop().add_scaled(&expect, re(-1.0));
        assert!(diff.max_abs() < 1e-14, "{}", diff.max_abs());
    }

    #[test]
    fn adjoint_of_identity_vanishes() {
        let s = FockSpace::new(vec![3, 3]).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let b = annihilation(&s, 1).unwrap();
        let h = a.dag().mul(&b).unwrap().add(&b.dag().mul(&a).unwrap()).unwrap();
        let l = build_liouvillian(&h, &[a.scale_re(2.0), b.dag()]).unwrap();
        let out = l.apply_adjoint(&identity(&s)).unwrap();
        assert!(out.matrix().max_abs() < 1e-12);
    }

    #[test]
    fn apply_matches_superop() {
        let s = FockSpace::new(vec![3, 2]).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let b = annihilation(&s, 1).unwrap();
        let h = a.dag().mul(&b).unwrap().add(&b.dag().mul(&a).unwrap()).unwrap();
        let l = build_liouvillian(&h, &[a.clone(), b.dag().scale_re(0.5)]).unwrap();
        let d = s.total_dim();
        let rho = Mat::<C64>::from_fn(d, d, |i, j| C64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
        let m = l.apply(&rho);
        let v: Vec<C64> = (0..d * d).map(|k| rho[(k / d, k % d)]).collect();
        let w = l.superop().matvec(&v);
        for k in 0..d * d {
            assert!((w[k] - m[(k / d, k % d)]).norm() < 1e-13);
        }
    }
}
