//! Truncated multi-mode Fock spaces and sparse bosonic operators.
//!
//! Basis ordering: a basis state `|n_0, n_1, ..., n_{M-1}>` has linear index
//! `sum_k n_k * stride_k` with `stride_k = prod_{j>k} d_j`, so mode 0 is the
//! slowest index. Every operator, density matrix and superoperator in this
//! crate uses this ordering.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockSpace {
    mode_dims: Vec<usize>,
    strides: Vec<usize>,
    total_dim: usize,
}

impl FockSpace {
    pub fn new(mode_dims: Vec<usize>) -> Result<Self> {
        if mode_dims.is_empty() {
            return Err(Error::InvalidSpace("at least one mode is required".into()));
        }
        if let Some(d) = mode_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidSpace(format!("mode dimension {d} < 2")));
        }
        let total_dim = mode_dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidSpace("total dimension overflows usize".into()))?;
        let mut strides = vec![1; mode_dims.len()];
        for k in (0..mode_dims.len() - 1).rev() {
            strides[k] = strides[k + 1] * mode_dims[k + 1];
        }
        Ok(Self {
            mode_dims,
            strides,
            total_dim,
        })
    }

    /// `n_modes` modes that all share truncation `dim`.
    pub fn uniform(n_modes: usize, dim: usize) -> Result<Self> {
        Self::new(vec![dim; n_modes])
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn n_modes(&self) -> usize {
        self.mode_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.mode_dims[mode]
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.n_modes()).map(|k| self.occupation(index, k)).collect()
    }

    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.n_modes() {
            return Err(Error::LengthMismatch {
                expected: self.n_modes(),
                got: occupations.len(),
            });
        }
        let mut idx = 0;
        for (k, &n) in occupations.iter().enumerate() {
            if n >= self.mode_dims[k] {
                return Err(Error::InvalidParameter(format!(
                    "occupation {n} exceeds truncation of mode {k}"
                )));
            }
            idx += n * self.strides[k];
        }
        Ok(idx)
    }

    /// Total photon number of a basis state.
    pub fn total_number(&self, index: usize) -> usize {
        (0..self.n_modes()).map(|k| self.occupation(index, k)).sum()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            Err(Error::ModeOutOfRange {
                mode,
                n_modes: self.n_modes(),
            })
        } else {
            Ok(())
        }
    }

    /// Builds an operator that acts on a single mode via `f(n) -> [(n', value)]`,
    /// i.e. `<n'|op|n> = value`, with identities on every other mode.
    fn single_mode_operator<F>(&self, mode: usize, f: F) -> Result<SparseOperator>
    where
        F: Fn(usize) -> Vec<(usize, C64)>,
    {
        self.check_mode(mode)?;
        let d = self.mode_dims[mode];
        let stride = self.strides[mode];
        let mut triplets = Vec::with_capacity(self.total_dim);
        for col in 0..self.total_dim {
            let n = self.occupation(col, mode);
            for (m, v) in f(n) {
                if m < d {
                    let row = col - n * stride + m * stride;
                    triplets.push((row, col, v));
                }
            }
        }
        Ok(SparseOperator {
            space: self.clone(),
            matrix: CsrMatrix::from_triplets(self.total_dim, self.total_dim, triplets),
        })
    }
}

/// A sparse matrix bound to the Fock space it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    space: FockSpace,
    matrix: CsrMatrix,
}

/// `<n-1|a|n> = sqrt(n)` on `mode`, identity elsewhere.
pub fn annihilation(space: &FockSpace, mode: usize) -> Result<SparseOperator> {
    space.single_mode_operator(mode, |n| {
        if n == 0 {
            vec![]
        } else {
            vec![(n - 1, C64::new((n as f64).sqrt(), 0.0))]
        }
    })
}

pub fn creation(space: &FockSpace, mode: usize) -> Result<SparseOperator> {
    space.single_mode_operator(mode, |n| vec![(n + 1, C64::new(((n + 1) as f64).sqrt(), 0.0))])
}

/// `a^dag a` on `mode`.
pub fn number(space: &FockSpace, mode: usize) -> Result<SparseOperator> {
    space.single_mode_operator(mode, |n| vec![(n, C64::new(n as f64, 0.0))])
}

/// Sum of the number operators of every mode.
pub fn total_number(space: &FockSpace) -> SparseOperator {
    let diag: Vec<C64> = (0..space.total_dim())
        .map(|i| C64::new(space.total_number(i) as f64, 0.0))
        .collect();
    SparseOperator {
        space: space.clone(),
        matrix: CsrMatrix::diagonal(&diag),
    }
}

pub fn identity(space: &FockSpace) -> SparseOperator {
    SparseOperator {
        space: space.clone(),
        matrix: CsrMatrix::identity(space.total_dim()),
    }
}

/// Linear combination `sum_k coefficients[k] * ops[k]`.
pub fn compose(ops: &[&SparseOperator], coefficients: &[C64]) -> Result<SparseOperator> {
    if ops.len() != coefficients.len() {
        return Err(Error::LengthMismatch {
            expected: ops.len(),
            got: coefficients.len(),
        });
    }
    let first = ops
        .first()
        .ok_or_else(|| Error::InvalidParameter("compose needs at least one operator".into()))?;
    let space = first.space.clone();
    let n = space.total_dim();
    let mut triplets = Vec::new();
    for (op, &c) in ops.iter().zip(coefficients) {
        if op.space != space {
            return Err(Error::SpaceMismatch);
        }
        triplets.extend(op.matrix.triplets().map(|(r, col, v)| (r, col, c * v)));
    }
    Ok(SparseOperator {
        space,
        matrix: CsrMatrix::from_triplets(n, n, triplets),
    })
}

/// Ordered product `ops[0] * ops[1] * ... * ops[k-1]`.
pub fn product(ops: &[&SparseOperator]) -> Result<SparseOperator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("product needs at least one operator".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, op| acc.mul(op))
}

impl SparseOperator {
    /// Wraps a raw matrix; the shape must match the space.
    pub fn from_matrix(space: &FockSpace, matrix: CsrMatrix) -> Result<Self> {
        let n = space.total_dim();
        if matrix.shape() != (n, n) {
            return Err(Error::LengthMismatch {
                expected: n,
                got: matrix.nrows(),
            });
        }
        Ok(Self {
            space: space.clone(),
            matrix,
        })
    }

    pub fn zero(space: &FockSpace) -> Self {
        let n = space.total_dim();
        Self {
            space: space.clone(),
            matrix: CsrMatrix::zeros(n, n),
        }
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dag(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.scale(c),
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    pub fn add_scaled(&self, other: &Self, alpha: C64) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.add_scaled(&other.matrix, alpha),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.matmul(&other.matrix),
        })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn apply(&self, state: &[C64]) -> Result<Vec<C64>> {
        if state.len() != self.space.total_dim() {
            return Err(Error::LengthMismatch {
                expected: self.space.total_dim(),
                got: state.len(),
            });
        }
        Ok(self.matrix.matvec(state))
    }

    /// Frobenius norm of `A - A^dag`.
    pub fn hermiticity_error(&self) -> f64 {
        self.matrix.add_scaled(&self.matrix.adjoint(), C64::new(-1.0, 0.0)).frobenius_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() < tol
    }

    pub fn same_space(&self, other: &Self) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// If every stored entry changes the total photon number by the same
    /// amount, returns that amount.
    pub fn number_change(&self) -> Option<i64> {
        let mut change = None;
        for (r, c, _) in self.matrix.triplets() {
            let dq = self.space.total_number(r) as i64 - self.space.total_number(c) as i64;
            match change {
                None => change = Some(dq),
                Some(q) if q != dq => return None,
                _ => {}
            }
        }
        Some(change.unwrap_or(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn annihilation_matrix_elements() {
        let s = FockSpace::uniform(1, 3).unwrap();
        let a = annihilation(&s, 0).unwrap();
        assert_eq!(a.matrix().nnz(), 2);
        assert_eq!(a.matrix().get(0, 1), re(1.0));
        assert!((a.matrix().get(1, 2) - re(2f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn vacuum_is_annihilated() {
        let s = FockSpace::new(vec![3, 4]).unwrap();
        let mut vac = vec![re(0.0); s.total_dim()];
        vac[0] = re(1.0);
        for m in 0..2 {
            let out = annihilation(&s, m).unwrap().apply(&vac).unwrap();
            assert!(out.iter().all(|v| *v == re(0.0)));
        }
    }

    #[test]
    fn mode_zero_is_slowest_index() {
        let s = FockSpace::new(vec![2, 2]).unwrap();
        let a0 = annihilation(&s, 0).unwrap();
        // |1,0> has index 2 and maps to |0,0>
        assert_eq!(a0.matrix().get(0, 2), re(1.0));
        assert_eq!(a0.matrix().get(1, 3), re(1.0));
        assert_eq!(a0.matrix().nnz(), 2);
        let a1 = annihilation(&s, 1).unwrap();
        assert_eq!(a1.matrix().get(0, 1), re(1.0));
        assert_eq!(a1.matrix().get(2, 3), re(1.0));
    }

    #[test]
    fn number_operator_diagonal() {
        let s = FockSpace::uniform(1, 4).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let n = a.dag().mul(&a).unwrap();
        for k in 0..4 {
            assert!((n.matrix().get(k, k) - re(k as f64)).norm() < 1e-14);
        }
        let diff = n.sub(&number(&s, 0).unwrap()).unwrap();
        assert!(diff.matrix().max_abs() < 1e-14);
    }

    #[test]
    fn compose_and_product_examples() {
        let s = FockSpace::uniform(1, 3).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let ad = a.dag();
        let x = compose(&[&a, &ad], &[re(1.0), re(1.0)]).unwrap();
        assert_eq!(x.matrix().get(0, 1), re(1.0));
        assert_eq!(x.matrix().get(1, 0), re(1.0));
        assert!((x.matrix().get(2, 1) - re(2f64.sqrt())).norm() < 1e-15);
        assert_eq!(x.matrix().nnz(), 4);

        let z = compose(&[&a], &[re(0.0)]).unwrap();
        assert_eq!(z.matrix().nnz(), 0);

        let s4 = FockSpace::uniform(1, 4).unwrap();
        let a4 = annihilation(&s4, 0).unwrap();
        let ad4 = a4.dag();
        let p = product(&[&ad4, &ad4, &a4, &a4]).unwrap();
        let expect = [0.0, 0.0, 2.0, 6.0];
        for (k, e) in expect.iter().enumerate() {
            assert!((p.matrix().get(k, k) - re(*e)).norm() < 1e-12);
        }
        assert_eq!(p.matrix().nnz(), 2);
    }

    #[test]
    fn truncated_commutator() {
        let d = 5;
        let s = FockSpace::uniform(1, d).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let c = a.commutator(&a.dag()).unwrap();
        for k in 0..d - 1 {
            assert!((c.matrix().get(k, k) - re(1.0)).norm() < 1e-14);
        }
        assert!((c.matrix().get(d - 1, d - 1) - re(-(d as f64 - 1.0))).norm() < 1e-12);
    }

    #[test]
    fn errors() {
        let s = FockSpace::uniform(2, 3).unwrap();
        assert!(matches!(annihilation(&s, 2), Err(Error::ModeOutOfRange { .. })));
        assert!(FockSpace::new(vec![3, 1]).is_err());
        let other = FockSpace::uniform(2, 4).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let b = annihilation(&other, 0).unwrap();
        assert!(matches!(compose(&[&a, &b], &[re(1.0), re(1.0)]), Err(Error::SpaceMismatch)));
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn number_change_detects_charge() {
        let s = FockSpace::uniform(2, 3).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let b = annihilation(&s, 1).unwrap();
        assert_eq!(a.number_change(), Some(-1));
        assert_eq!(a.dag().mul(&b).unwrap().number_change(), Some(0));
        assert_eq!(a.add(&a.dag()).unwrap().number_change(), None);
    }
}
