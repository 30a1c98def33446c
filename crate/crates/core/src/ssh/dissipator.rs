//! Mode-basis form of the sublattice gain and loss.
//!
//! With `d_α = Σ_i ψ_α[i] c_i` and the chiral image `U d_α U^dag = Σ_i s_i ψ_α[i] c_i`
//! (`s_i = ±1` on `A`/`B`), the site-basis dissipator
//! `η²κ Σ_A D[c_i^dag] + κ Σ_B D[c_i]` equals
//! `Σ_α η²κ/4 D[d_α^dag + U d_α^dag U^dag] + κ/4 D[d_α - U d_α U^dag]`.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64 as C64;

use super::{chiral_diagonal, mode_decomposition, SSHParams};
use crate::error::{Error, Result};
use crate::fock::{annihilation, compose, creation, FockSpace, SparseOperator};
use crate::lindblad::build_liouvillian;
use crate::sparse::CsrMatrix;

/// Vectorized dimension above which the identity check refuses to run.
const IDENTITY_MAX_VEC_DIM: usize = 1 << 16;

/// Frobenius norm of `L_site - L_mode` for the SSH chain of `p`.
pub fn dissipator_mode_identity_check(p: &SSHParams, dims: usize) -> Result<f64> {
    p.validate()?;
    let h = super::ssh_hopping_matrix(p.n_sites, p.j, p.delta);
    dissipator_identity_for(&h, p.kappa, p.eta, dims)
}

/// Same check for any chiral-symmetric hopping matrix `h`. Both generators
/// carry the Hamiltonian, written in the site basis and in the mode basis
/// `Σ ε_α d_α^dag d_α`, so the comparison covers the unitary change of
/// variables as well as the dissipators.
pub fn dissipator_identity_for(h: &Mat<f64>, kappa: f64, eta: f64, dims: usize) -> Result<f64> {
    let n = h.nrows();
    let d = (dims as f64).powi(n as i32);
    if d * d > IDENTITY_MAX_VEC_DIM as f64 {
        return Err(Error::MemoryGuard(format!(
            "{n} sites with {dims} levels give a {d}-dimensional space"
        )));
    }
    let chiral = chiral_diagonal(n);
    let modes = mode_decomposition(h, &chiral)?;
    let space = FockSpace::uniform(n, dims)?;
    let a: Vec<SparseOperator> = (0..n).map(|i| annihilation(&space, i)).collect::<Result<_>>()?;
    let ad: Vec<SparseOperator> = (0..n).map(|i| creation(&space, i)).collect::<Result<_>>()?;
    let refs_a: Vec<&SparseOperator> = a.iter().collect();
    let refs_ad: Vec<&SparseOperator> = ad.iter().collect();
    let re = |v: &[f64]| v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>();

    let mut h_site = SparseOperator::zero(&space);
    for i in 0..n {
        for k in 0..n {
            if h[(i, k)] != 0.0 {
                h_site = h_site.add(&ad[i].mul(&a[k])?.scale_re(h[(i, k)]))?;
            }
        }
    }
    let gain = eta * eta * kappa;
    let mut site_jumps = Vec::new();
    for i in 0..n {
        if chiral[i] > 0.0 {
            site_jumps.push(ad[i].scale_re(gain.sqrt()));
        } else {
            site_jumps.push(a[i].scale_re(kappa.sqrt()));
        }
    }

    let mut h_mode = SparseOperator::zero(&space);
    let mut mode_jumps = Vec::new();
    for alpha in 0..n {
        let psi = modes.mode(alpha);
        let d_op = compose(&refs_a, &re(&psi))?;
        let dd_op = compose(&refs_ad, &re(&psi))?;
        h_mode = h_mode.add(&dd_op.mul(&d_op)?.scale_re(modes.energies[alpha]))?;
        // ½(d^dag + U d^dag U^dag) and ½(d - U d U^dag) keep the A and B parts.
        let a_part: Vec<f64> = psi.iter().zip(&chiral).map(|(x, s)| 0.5 * x * (1.0 + s)).collect();
        let b_part: Vec<f64> = psi.iter().zip(&chiral).map(|(x, s)| 0.5 * x * (1.0 - s)).collect();
        mode_jumps.push(compose(&refs_ad, &re(&a_part))?.scale_re(gain.sqrt()));
        mode_jumps.push(compose(&refs_a, &re(&b_part))?.scale_re(kappa.sqrt()));
    }

    let l_site = build_liouvillian(&h_site, &site_jumps)?;
    let l_mode = build_liouvillian(&h_mode, &mode_jumps)?;
    let diff: CsrMatrix = l_site.try_superop()?.add_scaled(l_mode.try_superop()?, C64::new(-1.0, 0.0));
    Ok(diff.frobenius_norm())
}

/// Stationary `G_ij = <c_i^dag c_j>` of the quadratic chain with hopping `h`,
/// gain rates `gain[i]` and loss rates `loss[i]`:
/// `M^* G + G M^T + diag(gain) = 0` with `M = -i h + diag(gain - loss)/2`.
///
/// # Errors
/// [`Error::Unstable`] if some normal mode grows.
pub fn gaussian_correlations(h: &Mat<f64>, gain: &[f64], loss: &[f64]) -> Result<Mat<C64>> {
    let n = h.nrows();
    for v in [gain, loss] {
        if v.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: v.len() });
        }
    }
    let m = Mat::<C64>::from_fn(n, n, |i, k| {
        let diag = if i == k { 0.5 * (gain[i] - loss[i]) } else { 0.0 };
        C64::new(diag, -h[(i, k)])
    });
    let growth = m
        .eigenvalues()
        .map_err(|e| Error::Linalg(format!("{e:?}")))?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if growth >= 0.0 {
        return Err(Error::Unstable(format!("normal mode with growth rate {growth:e}")));
    }
    // Row-major vec: vec(A G B) = (A ⊗ B^T) vec(G).
    let nn = n * n;
    let sys = Mat::<C64>::from_fn(nn, nn, |r, c| {
        let (i, j) = (r / n, r % n);
        let (k, l) = (c / n, c % n);
        let mut v = C64::new(0.0, 0.0);
        if j == l {
            v += m[(i, k)].conj();
        }
        if i == k {
            v += m[(j, l)];
        }
        v
    });
    let rhs = Mat::<C64>::from_fn(nn, 1, |r, _| {
        let (i, j) = (r / n, r % n);
        if i == j { C64::new(-gain[i], 0.0) } else { C64::new(0.0, 0.0) }
    });
    let x = sys.partial_piv_lu().solve(&rhs);
    Ok(Mat::from_fn(n, n, |i, j| x[(i * n + j, 0)]))
}

/// `<d_α^dag d_α>` for every eigenmode of a chiral chain with gain `η²κ` on `A`
/// and loss `κ` on `B`, sorted by mode energy. When the bulk gap is large
/// against `κ` each mode is thermal with `<n> = η²/(1 - η²)`.
pub fn thermal_mode_occupations(h: &Mat<f64>, kappa: f64, eta: f64) -> Result<Vec<f64>> {
    let n = h.nrows();
    let chiral = chiral_diagonal(n);
    let gain: Vec<f64> = chiral.iter().map(|&s| if s > 0.0 { eta * eta * kappa } else { 0.0 }).collect();
    let loss: Vec<f64> = chiral.iter().map(|&s| if s < 0.0 { kappa } else { 0.0 }).collect();
    let g = gaussian_correlations(h, &gain, &loss)?;
    let modes = mode_decomposition(h, &chiral)?;
    Ok((0..n)
        .map(|alpha| {
            let psi = modes.mode(alpha);
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                for k in 0..n {
                    acc += psi[i] * g[(i, k)] * psi[k];
                }
            }
            acc.re
        })
        .collect())
}
