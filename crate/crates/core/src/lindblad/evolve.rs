use faer::Mat;
use num_complex::Complex64 as C64;

use super::{DensityMatrix, Liouvillian};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    /// Taylor series is truncated once a term drops below `tol` relative to the sum.
    pub tol: f64,
    /// Substep length satisfies `h * ||L|| <= theta`.
    pub theta: f64,
    /// Total substep budget; exceeding it is reported as step underflow.
    pub max_substeps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-15,
            theta: 1.0,
            max_substeps: 2_000_000,
        }
    }
}

/// Propagates `rho0` with `exp(L t)` and returns the state at every time in
/// `t_grid`. Each substep applies a truncated Taylor series of the generator;
/// every term is traceless, so the trace is conserved to rounding.
pub fn evolve(
    liouvillian: &Liouvillian,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<DensityMatrix>> {
    if rho0.space() != liouvillian.space() {
        return Err(Error::SpaceMismatch);
    }
    if let Some(&t0) = t_grid.first() {
        if t0 < 0.0 {
            return Err(Error::InvalidParameter("time grid must start at t >= 0".into()));
        }
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("time grid must be strictly increasing".into()));
    }
    let norm = liouvillian.norm_bound().max(f64::MIN_POSITIVE);
    let mut rho = rho0.matrix().clone();
    let mut t = 0.0;
    let mut used = 0usize;
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        let span = target - t;
        if span > 0.0 {
            let steps = ((span * norm / opts.theta).ceil() as usize).max(1);
            used += steps;
            if used > opts.max_substeps {
                return Err(Error::StepUnderflow { t });
            }
            let h = span / steps as f64;
            for _ in 0..steps {
                rho = taylor_step(liouvillian, &rho, h, opts.tol);
            }
            t = target;
        }
        out.push(DensityMatrix::from_matrix(liouvillian.space(), rho.clone())?);
    }
    Ok(out)
}

fn taylor_step(liouvillian: &Liouvillian, rho: &Mat<C64>, h: f64, tol: f64) -> Mat<C64> {
    let mut acc = rho.clone();
    let mut term = rho.clone();
    let acc_norm = frob(rho).max(f64::MIN_POSITIVE);
    for k in 1..80 {
        term = liouvillian.apply(&term);
        let f = C64::new(h / k as f64, 0.0);
        for j in 0..term.ncols() {
            for i in 0..term.nrows() {
                term[(i, j)] *= f;
            }
        }
        acc += &term;
        if frob(&term) <= tol * acc_norm {
            break;
        }
    }
    acc
}

fn frob(m: &Mat<C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, number, FockSpace};
    use crate::lindblad::build_liouvillian;

    #[test]
    fn zero_time_returns_initial_state() {
        let s = FockSpace::uniform(1, 3).unwrap();
        let h = number(&s, 0).unwrap();
        let l = build_liouvillian(&h, &[annihilation(&s, 0).unwrap()]).unwrap();
        let rho0 = DensityMatrix::basis_state(&s, 2).unwrap();
        let out = evolve(&l, &rho0, &[0.0], &EvolveOptions::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].trace_distance(&rho0).unwrap() < 1e-15);
    }

    #[test]
    fn bad_grids_rejected() {
        let s = FockSpace::uniform(1, 3).unwrap();
        let l = build_liouvillian(&number(&s, 0).unwrap(), &[]).unwrap();
        let rho0 = DensityMatrix::vacuum(&s);
        assert!(evolve(&l, &rho0, &[1.0, 0.5], &EvolveOptions::default()).is_err());
        assert!(evolve(&l, &rho0, &[-1.0], &EvolveOptions::default()).is_err());
        let tight = EvolveOptions { max_substeps: 3, ..Default::default() };
        assert!(matches!(evolve(&l, &rho0, &[100.0], &tight), Err(Error::StepUnderflow { .. })));
    }

    #[test]
    fn pure_loss_decays_exponentially() {
        let s = FockSpace::uniform(1, 4).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let kappa: f64 = 0.7;
        let l = build_liouvillian(&number(&s, 0).unwrap(), &[a.scale_re(kappa.sqrt())]).unwrap();
        let rho0 = DensityMatrix::basis_state(&s, 1).unwrap();
        let out = evolve(&l, &rho0, &[0.5, 2.0], &EvolveOptions::default()).unwrap();
        for (rho, t) in out.iter().zip([0.5, 2.0]) {
            assert!((rho.matrix()[(1, 1)].re - (-kappa * t).exp()).abs() < 1e-13);
        }
    }
}
