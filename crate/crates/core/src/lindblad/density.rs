use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::FockSpace;

/// A density matrix on a truncated Fock space.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: FockSpace,
    matrix: Mat<C64>,
}

impl DensityMatrix {
    /// Wraps a matrix without checking the density-matrix invariants; call
    /// [`DensityMatrix::validate`] when the source is untrusted.
    pub fn from_matrix(space: &FockSpace, matrix: Mat<C64>) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                got: matrix.nrows(),
            });
        }
        Ok(Self {
            space: space.clone(),
            matrix,
        })
    }

    /// `|psi><psi|` for a normalized copy of `psi`.
    pub fn pure(space: &FockSpace, psi: &[C64]) -> Result<Self> {
        let d = space.total_dim();
        if psi.len() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                got: psi.len(),
            });
        }
        let norm = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let m = Mat::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Self::from_matrix(space, m)
    }

    /// `|n><n|` for basis index `index`.
    pub fn basis_state(space: &FockSpace, index: usize) -> Result<Self> {
        let mut psi = vec![C64::new(0.0, 0.0); space.total_dim()];
        *psi.get_mut(index)
            .ok_or_else(|| Error::InvalidParameter(format!("basis index {index} out of range")))? =
            C64::new(1.0, 0.0);
        Self::pure(space, &psi)
    }

    pub fn vacuum(space: &FockSpace) -> Self {
        Self::basis_state(space, 0).expect("vacuum index is always valid")
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat<C64> {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)]).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.matrix.nrows();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let h = hermitian_part(&self.matrix);
        h.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// Checks trace, Hermiticity (both within `tol`) and positivity within `neg_tol`.
    pub fn validate(&self, tol: f64, neg_tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidParameter(format!("trace {tr} differs from 1")));
        }
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(Error::InvalidParameter(format!("hermiticity error {herm:e}")));
        }
        let min = self.min_eigenvalue()?;
        if min < -neg_tol {
            return Err(Error::InvalidParameter(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// `<i|rho|i>` for every basis state.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// `<psi|rho|psi>`.
    pub fn overlap(&self, psi: &[C64]) -> C64 {
        let d = self.matrix.nrows();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            if psi[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                acc += psi[i].conj() * self.matrix[(i, j)] * psi[j];
            }
        }
        acc
    }

    /// Trace distance `½ ||rho - sigma||_1`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let diff = &self.matrix - &other.matrix;
        let ev = hermitian_part(&diff)
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        Ok(0.5 * ev.iter().map(|x| x.abs()).sum::<f64>())
    }

    /// Probability distribution of the total photon number.
    pub fn number_distribution(&self) -> Vec<f64> {
        let max_n: usize = self.space.mode_dims().iter().map(|d| d - 1).sum();
        let mut p = vec![0.0; max_n + 1];
        for i in 0..self.space.total_dim() {
            p[self.space.total_number(i)] += self.matrix[(i, i)].re;
        }
        p
    }

    /// Largest population carried by basis states in which some mode sits at
    /// its truncation edge.
    pub fn truncation_edge_population(&self) -> f64 {
        let dims = self.space.mode_dims();
        (0..self.space.total_dim())
            .filter(|&i| {
                (0..dims.len()).any(|k| self.space.occupation(i, k) == dims[k] - 1)
            })
            .map(|i| self.matrix[(i, i)].re)
            .sum()
    }
}

pub(crate) fn hermitian_part(m: &Mat<C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()))
}
