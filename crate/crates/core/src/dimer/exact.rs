//! Exact Lindblad model of the dimer and its comparison with mean field.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::{mean_field_steady_state, semiclassical_density, DimerParams};
use crate::error::{Error, Result};
use crate::fock::{annihilation, identity, number, total_number, FockSpace, SparseOperator};
use crate::lindblad::{build_liouvillian, expectation, steady_state, DensityMatrix, Liouvillian, SteadyStateOptions};

/// Operators of the truncated dimer. Mode 0 is `a` (loss), mode 1 is `b` (gain).
#[derive(Clone, Debug)]
pub struct DimerModel {
    pub space: FockSpace,
    pub hamiltonian: SparseOperator,
    pub jumps: Vec<SparseOperator>,
    pub a: SparseOperator,
    pub b: SparseOperator,
}

impl DimerModel {
    pub fn liouvillian(&self) -> Result<Liouvillian> {
        build_liouvillian(&self.hamiltonian, &self.jumps)
    }
}

/// `H = J (1 + n/(2n*)) (a^dag b + b^dag a) + δ (a^dag a - b^dag b)` with jumps
/// `√κ_a a` and `√κ_b b^dag`. The total number commutes with the hopping, so
/// the product is Hermitian as written.
pub fn build_dimer_model(p: &DimerParams, dims: [usize; 2]) -> Result<DimerModel> {
    p.validate()?;
    let space = FockSpace::new(dims.to_vec())?;
    let a = annihilation(&space, 0)?;
    let b = annihilation(&space, 1)?;
    let hop = a.dag().mul(&b)?.add(&b.dag().mul(&a)?)?;
    let factor = identity(&space).add(&total_number(&space).scale_re(p.half_inv_n_star()))?;
    let mut h = factor.mul(&hop)?.scale_re(p.j);
    if p.delta != 0.0 {
        h = h.add(&number(&space, 0)?.sub(&number(&space, 1)?)?.scale_re(p.delta))?;
    }
    let jumps = vec![a.scale_re(p.kappa_a.sqrt()), b.dag().scale_re(p.kappa_b.sqrt())];
    Ok(DimerModel { space, hamiltonian: h, jumps, a, b })
}

/// `c = i (a^dag b - b^dag a)`.
pub fn current_operator(model: &DimerModel) -> Result<SparseOperator> {
    let ab = model.a.dag().mul(&model.b)?;
    let ba = model.b.dag().mul(&model.a)?;
    Ok(ab.sub(&ba)?.scale(C64::new(0.0, 1.0)))
}

/// Exact equations of motion for `(n_a, n_b, c)` before any closure,
/// evaluated on `rho`:
///
/// ```text
/// dn_a/dt = -J <f c> - κ_a <n_a>
/// dn_b/dt = +J <f c> + κ_b <n_b> + κ_b
/// dc/dt   = 2J <f (n_a - n_b)> - (κ_a - κ_b)/2 <c> - 2δ <a^dag b + b^dag a>
/// ```
///
/// with `f = 1 + n/(2n*)`. On a truncated space these hold for states with no
/// weight on the top level of either mode.
pub fn closure_free_rhs(rho: &DensityMatrix, model: &DimerModel, p: &DimerParams) -> Result<[f64; 3]> {
    let s = &model.space;
    let f = identity(s).add(&total_number(s).scale_re(p.half_inv_n_star()))?;
    let c = current_operator(model)?;
    let na = number(s, 0)?;
    let nb = number(s, 1)?;
    let ex = |op: &SparseOperator| expectation(rho, op).map(|z| z.re);
    let fc = ex(&f.mul(&c)?)?;
    let fdn = ex(&f.mul(&na.sub(&nb)?)?)?;
    let hop = model.a.dag().mul(&model.b)?.add(&model.b.dag().mul(&model.a)?)?;
    Ok([
        -p.j * fc - p.kappa_a * ex(&na)?,
        p.j * fc + p.kappa_b * ex(&nb)? + p.kappa_b,
        2.0 * p.j * fdn - 0.5 * (p.kappa_a - p.kappa_b) * ex(&c)? - 2.0 * p.delta * ex(&hop)?,
    ])
}

/// Per-mode truncation `ceil(3 n_mode + 10)` from the amplitude-equation
/// split `n_a : n_b = κ_b : κ_a` of the expected density.
pub fn default_dims(p: &DimerParams, factor: f64, offset: usize) -> [usize; 2] {
    let n = semiclassical_density(p).max(1.0);
    let tot = (p.kappa_a + p.kappa_b).max(f64::MIN_POSITIVE);
    let na = n * p.kappa_b / tot;
    let nb = n * p.kappa_a / tot;
    [(factor * na).ceil() as usize + offset, (factor * nb).ceil() as usize + offset]
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    /// Starting truncation is `ceil(dims_factor * n_mode) + dims_offset` per mode.
    pub dims_factor: f64,
    pub dims_offset: usize,
    /// Both modes grow by this many levels per convergence round.
    pub check_step: usize,
    /// Largest accepted change of `<n>` (in photons) between two rounds.
    pub check_tol: f64,
    pub max_rounds: usize,
    pub steady: SteadyStateOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            dims_factor: 3.0,
            dims_offset: 10,
            check_step: 4,
            check_tol: 2e-3,
            max_rounds: 12,
            steady: SteadyStateOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanPoint {
    pub params: DimerParams,
    /// Truncation of the reported exact value.
    pub dims: [usize; 2],
    pub n_exact: f64,
    /// Lasing density of the amplitude equations.
    pub n_semiclassical: f64,
    /// Total density at the stationary point of the closed moment equations.
    pub n_closure: Option<f64>,
    pub error: f64,
    pub closure_error: Option<f64>,
    /// Change of `<n>` in the last truncation round.
    pub truncation_change: f64,
    pub converged: bool,
}

/// Exact steady-state photon number next to the mean-field predictions for
/// every parameter set.
///
/// The photon-number distribution of the lossy mode has a long tail, so the
/// starting truncation is grown by `check_step` levels per mode until `<n>`
/// moves by less than `check_tol`. Points that never settle are kept but
/// flagged with `converged = false`.
pub fn mf_vs_exact_scan(points: &[DimerParams], opts: &ScanOptions) -> Result<Vec<ScanPoint>> {
    points
        .par_iter()
        .map(|p| {
            let mut dims = default_dims(p, opts.dims_factor, opts.dims_offset);
            let mut n_exact = exact_density(p, dims, &opts.steady)?;
            let mut change = f64::INFINITY;
            for _ in 0..opts.max_rounds {
                let bigger = [dims[0] + opts.check_step, dims[1] + opts.check_step];
                let n_big = exact_density(p, bigger, &opts.steady)?;
                change = (n_big - n_exact).abs();
                dims = bigger;
                n_exact = n_big;
                if change <= opts.check_tol {
                    break;
                }
            }
            let mf = mean_field_steady_state(p)?;
            let n_closure = mf.state.map(|s| s.total());
            Ok(ScanPoint {
                params: *p,
                dims,
                n_exact,
                n_semiclassical: mf.density,
                n_closure,
                error: (n_exact - mf.density).abs(),
                closure_error: n_closure.map(|n| (n_exact - n).abs()),
                truncation_change: change,
                converged: change <= opts.check_tol,
            })
        })
        .collect()
}

/// Steady-state `<a^dag a + b^dag b>` of the exact model.
pub fn exact_density(p: &DimerParams, dims: [usize; 2], opts: &SteadyStateOptions) -> Result<f64> {
    let model = build_dimer_model(p, dims)?;
    let l = model.liouvillian()?;
    let ss = steady_state(&l, opts)?;
    let n = expectation(&ss.rho, &total_number(&model.space))?.re;
    if !n.is_finite() {
        return Err(Error::NoConvergence { residual: ss.residual });
    }
    Ok(n)
}
