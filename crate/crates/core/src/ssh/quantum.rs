//! Exact steady states of the interacting chain and the Fock-state diagnostics.

use std::sync::atomic::{AtomicUsize, Ordering};

use argmin::core::{CostFunction, Executor, State, TerminationReason};
use argmin::solver::neldermead::NelderMead;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{build_ssh, is_a_site, mode_decomposition, ModeDecomposition, SSHParams};
use crate::error::{Error, Result};
use crate::fock::{annihilation, identity, number, FockSpace, SparseOperator};
use crate::lindblad::{build_liouvillian, expectation, steady_state, DensityMatrix, SteadyStateOptions};
use crate::stats::{log_log_fit, LinearFit};

/// Largest Hilbert-space dimension accepted by [`quantum_steady_state`].
const MAX_HILBERT_DIM: usize = 2187;

#[derive(Clone, Debug)]
pub struct SshModel {
    pub space: FockSpace,
    pub hamiltonian: SparseOperator,
    pub jumps: Vec<SparseOperator>,
    pub modes: ModeDecomposition,
}

/// `H = Σ h_ik c_i^dag c_k + U/2 Σ n_i(n_i - 1)` with jumps `√(η²κ) c^dag` and
/// `√γ c` on `A`, `√κ c` on `B`. Zero-rate jumps are left out.
pub fn build_ssh_model(p: &SSHParams, dims: usize) -> Result<SshModel> {
    let ham = build_ssh(p)?;
    let n = p.n_sites;
    let space = FockSpace::uniform(n, dims)?;
    let a: Vec<SparseOperator> = (0..n).map(|i| annihilation(&space, i)).collect::<Result<_>>()?;
    let mut h = SparseOperator::zero(&space);
    for i in 0..n {
        for k in 0..n {
            if ham.matrix[(i, k)] != 0.0 {
                h = h.add(&a[i].dag().mul(&a[k])?.scale_re(ham.matrix[(i, k)]))?;
            }
        }
        if p.kerr(i) != 0.0 {
            let ni = number(&space, i)?;
            h = h.add(&ni.mul(&ni.sub(&identity(&space))?)?.scale_re(0.5 * p.kerr(i)))?;
        }
    }
    let mut jumps = Vec::new();
    for (i, ai) in a.iter().enumerate() {
        if is_a_site(i) {
            if p.gain() > 0.0 {
                jumps.push(ai.dag().scale_re(p.gain().sqrt()));
            }
            if p.gamma > 0.0 {
                jumps.push(ai.scale_re(p.gamma.sqrt()));
            }
        } else if p.kappa > 0.0 {
            jumps.push(ai.scale_re(p.kappa.sqrt()));
        }
    }
    let modes = mode_decomposition(&ham.matrix, &ham.chiral)?;
    Ok(SshModel { space, hamiltonian: h, jumps, modes })
}

#[derive(Clone, Debug)]
pub struct SshSteadyOptions {
    pub steady: SteadyStateOptions,
    /// Largest population allowed on states with some site at its top level.
    pub edge_tol: f64,
    /// Also solve with one more level per site and compare.
    pub certify: bool,
    /// Largest accepted change of the fidelity and of `<n>` when certifying.
    pub certify_tol: f64,
}

impl Default for SshSteadyOptions {
    fn default() -> Self {
        Self {
            // Vacuum and the one-photon edge state are nearly degenerate at small η.
            steady: SteadyStateOptions { degeneracy_gap: 1e-13, ..SteadyStateOptions::default() },
            edge_tol: 0.25,
            certify: false,
            certify_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SshSteadyState {
    pub rho: DensityMatrix,
    pub site_densities: Vec<f64>,
    pub total: f64,
    /// Overlap with the one-photon edge state.
    pub fidelity: f64,
    pub edge_population: f64,
    pub residual: f64,
    /// Change of the fidelity under one more level per site, when certified.
    pub truncation_change: Option<f64>,
}

fn solve_once(p: &SSHParams, dims: usize, opts: &SshSteadyOptions) -> Result<SshSteadyState> {
    let model = build_ssh_model(p, dims)?;
    let l = build_liouvillian(&model.hamiltonian, &model.jumps)?;
    let ss = steady_state(&l, &opts.steady)?;
    let site_densities: Vec<f64> = (0..p.n_sites)
        .map(|i| Ok(expectation(&ss.rho, &number(&model.space, i)?)?.re))
        .collect::<Result<_>>()?;
    let total = site_densities.iter().sum();
    let fidelity = fock_fidelity(&ss.rho, p)?;
    let edge_population = ss.rho.truncation_edge_population();
    Ok(SshSteadyState {
        rho: ss.rho,
        site_densities,
        total,
        fidelity,
        edge_population,
        residual: ss.residual,
        truncation_change: None,
    })
}

/// Steady state of the interacting chain with `dims` levels per site.
///
/// # Errors
/// [`Error::Truncation`] when the top levels carry more than `edge_tol`, or
/// when certification moves the fidelity or `<n>` by more than
/// `certify_tol`; [`Error::MemoryGuard`] above 2187 Hilbert-space states.
pub fn quantum_steady_state(p: &SSHParams, dims: usize, opts: &SshSteadyOptions) -> Result<SshSteadyState> {
    p.validate()?;
    let d = (dims as f64).powi(p.n_sites as i32);
    if d > MAX_HILBERT_DIM as f64 {
        return Err(Error::MemoryGuard(format!("{} sites with {dims} levels give {d} states", p.n_sites)));
    }
    let mut out = solve_once(p, dims, opts)?;
    if out.edge_population > opts.edge_tol {
        return Err(Error::Truncation(format!(
            "{:.3} of the population sits at the top level",
            out.edge_population
        )));
    }
    if opts.certify {
        let plus = solve_once(p, dims + 1, opts)?;
        let change = (plus.fidelity - out.fidelity).abs().max((plus.total - out.total).abs());
        out.truncation_change = Some(change);
        if change > opts.certify_tol {
            return Err(Error::Truncation(format!("one more level changes the result by {change:e}")));
        }
    }
    Ok(out)
}

/// `<ψ_1|ρ|ψ_1>` with `|ψ_1> = d_0^dag |0>`.
pub fn fock_fidelity(rho: &DensityMatrix, p: &SSHParams) -> Result<f64> {
    let ham = build_ssh(p)?;
    let zero = mode_decomposition(&ham.matrix, &ham.chiral)?
        .zero_mode()
        .ok_or_else(|| Error::NoSolution("chain has no zero mode".into()))?;
    let space = rho.space();
    if space.n_modes() != p.n_sites {
        return Err(Error::LengthMismatch { expected: p.n_sites, got: space.n_modes() });
    }
    let mut psi = vec![C64::new(0.0, 0.0); space.total_dim()];
    let mut occ = vec![0usize; p.n_sites];
    for (i, &amp) in zero.iter().enumerate() {
        if amp != 0.0 {
            occ[i] = 1;
            psi[space.index_of(&occ)?] = C64::new(amp, 0.0);
            occ[i] = 0;
        }
    }
    Ok(rho.overlap(&psi).re)
}

/// Stationary solution `(ρ_0, ρ_1, ρ_2)` of the three-level rate equations
/// with rates `ξ⁴` (pump `0 → 1`, `1 → 2`, decay `2 → 0`) and `ξ²` (`2 → 1`).
pub fn rate_equation_prediction(xi: f64) -> Result<[f64; 3]> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidParameter(format!("xi must lie in (0, 1), got {xi}")));
    }
    let x2 = xi * xi;
    let side = x2 / (1.0 + 3.0 * x2);
    Ok([side, 1.0 - 2.0 * side, side])
}

/// `2U Σ_i ψ_α[i] ψ_0[i]³`, the matrix element
/// `<0| d_α d_0 H_int d_0^dag d_0^dag |0>`, summed in absolute value over `α ≠ 0`.
pub fn mode_overlap_sum(p: &SSHParams) -> Result<f64> {
    let ham = build_ssh(p)?;
    let modes = mode_decomposition(&ham.matrix, &ham.chiral)?;
    let z0 = modes.zero_mode_index.ok_or_else(|| Error::NoSolution("chain has no zero mode".into()))?;
    let psi0 = modes.mode(z0);
    Ok((0..p.n_sites)
        .filter(|&a| a != z0)
        .map(|a| {
            let psi = modes.mode(a);
            (2.0 * p.u * psi.iter().zip(&psi0).map(|(x, z)| x * z * z * z).sum::<f64>()).abs()
        })
        .sum())
}

/// [`mode_overlap_sum`] over a set of `ξ` values (other parameters from
/// `base`) and the log-log fit of the sum against `ξ`.
pub fn mode_overlap_scaling(base: &SSHParams, xis: &[f64]) -> Result<(Vec<f64>, LinearFit)> {
    let values: Vec<f64> = xis
        .iter()
        .map(|&xi| {
            let p = SSHParams::from_xi(base.n_sites, base.j, xi, base.u, base.kappa, base.eta)?;
            mode_overlap_sum(&p)
        })
        .collect::<Result<_>>()?;
    let fit = log_log_fit(xis, &values)?;
    Ok((values, fit))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SingleModeParams {
    pub kappa_g: f64,
    pub kappa_l: f64,
    pub gamma: f64,
    pub delta: f64,
    pub u: f64,
}

/// Steady state of `-i[Δn + U/2 n², ρ] + κ_g D[a^dag] + κ_l D[a] + γ D[a²]`.
pub fn single_mode_steady_state(m: &SingleModeParams, dims: usize, opts: &SteadyStateOptions) -> Result<DensityMatrix> {
    for (name, v) in [("kappa_g", m.kappa_g), ("kappa_l", m.kappa_l), ("gamma", m.gamma)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    let space = FockSpace::uniform(1, dims)?;
    let a = annihilation(&space, 0)?;
    let n = number(&space, 0)?;
    let h = n.scale_re(m.delta).add(&n.mul(&n)?.scale_re(0.5 * m.u))?;
    let mut jumps = Vec::new();
    if m.kappa_g > 0.0 {
        jumps.push(a.dag().scale_re(m.kappa_g.sqrt()));
    }
    if m.kappa_l > 0.0 {
        jumps.push(a.scale_re(m.kappa_l.sqrt()));
    }
    if m.gamma > 0.0 {
        jumps.push(a.mul(&a)?.scale_re(m.gamma.sqrt()));
    }
    let l = build_liouvillian(&h, &jumps)?;
    Ok(steady_state(&l, opts)?.rho)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NoGoPoint {
    pub gamma_ratio: f64,
    pub loss_ratio: f64,
    /// `<1|ρ|1>`.
    pub fidelity: f64,
    /// `√<1|ρ|1>`.
    pub root_fidelity: f64,
    pub edge_population: f64,
    /// Change of the fidelity when four more levels are kept.
    pub truncation_change: f64,
    /// Unconverged in the truncation or without a steady state.
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoGoScan {
    pub points: Vec<NoGoPoint>,
    /// Unflagged point with the largest fidelity.
    pub best: NoGoPoint,
    /// Largest entry of `ρ(Δ, U) - ρ(0, 0)` at the best point, over a few `(Δ, U)`.
    pub hamiltonian_dependence: f64,
}

/// Single-photon fidelity of the single-mode model over `γ/κ_g` and `κ_l/κ_g`.
pub fn single_mode_no_go_scan(gamma_ratios: &[f64], loss_ratios: &[f64], dims: usize) -> Result<NoGoScan> {
    if dims < 8 {
        return Err(Error::InvalidParameter(format!("single-mode scan needs dims >= 8, got {dims}")));
    }
    let opts = SteadyStateOptions::default();
    let mut points = Vec::new();
    for &lr in loss_ratios {
        for &gr in gamma_ratios {
            let m = SingleModeParams { kappa_g: 1.0, kappa_l: lr, gamma: gr, delta: 0.0, u: 0.0 };
            let solve = |d: usize| -> Result<(f64, f64)> {
                let rho = single_mode_steady_state(&m, d, &opts)?;
                Ok((rho.matrix()[(1, 1)].re, rho.truncation_edge_population()))
            };
            let point = match (solve(dims), solve(dims + 4)) {
                (Ok((f, edge)), Ok((f_big, _))) => {
                    let change = (f_big - f).abs();
                    NoGoPoint {
                        gamma_ratio: gr,
                        loss_ratio: lr,
                        fidelity: f,
                        root_fidelity: f.max(0.0).sqrt(),
                        edge_population: edge,
                        truncation_change: change,
                        flagged: edge > 1e-6 || change > 1e-6,
                    }
                }
                _ => NoGoPoint {
                    gamma_ratio: gr,
                    loss_ratio: lr,
                    fidelity: f64::NAN,
                    root_fidelity: f64::NAN,
                    edge_population: f64::NAN,
                    truncation_change: f64::NAN,
                    flagged: true,
                },
            };
            points.push(point);
        }
    }
    let best = *points
        .iter()
        .filter(|p| !p.flagged)
        .max_by(|a, b| a.fidelity.total_cmp(&b.fidelity))
        .ok_or_else(|| Error::NoSolution("every grid point is flagged".into()))?;
    let base = SingleModeParams { kappa_g: 1.0, kappa_l: best.loss_ratio, gamma: best.gamma_ratio, delta: 0.0, u: 0.0 };
    let reference = single_mode_steady_state(&base, dims, &opts)?;
    let mut hamiltonian_dependence = 0.0f64;
    for (delta, u) in [(0.7, 2.3), (-1.5, 0.4), (10.0, 10.0)] {
        let rho = single_mode_steady_state(&SingleModeParams { delta, u, ..base }, dims, &opts)?;
        let (x, y) = (rho.matrix(), reference.matrix());
        for i in 0..dims {
            for j in 0..dims {
                hamiltonian_dependence = hamiltonian_dependence.max((x[(i, j)] - y[(i, j)]).norm());
            }
        }
    }
    Ok(NoGoScan { points, best, hamiltonian_dependence })
}

#[derive(Clone, Debug)]
pub struct AddedLossOptions {
    pub dims: usize,
    /// Nelder-Mead iterations per optimization; 0 keeps `base` as is.
    pub budget: u64,
    /// Re-optimize at every `γ` (warm-started from the previous optimum).
    pub reoptimize: bool,
    pub steady: SshSteadyOptions,
}

impl Default for AddedLossOptions {
    fn default() -> Self {
        Self { dims: 3, budget: 30, reoptimize: false, steady: SshSteadyOptions::default() }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AddedLossPoint {
    pub gamma: f64,
    /// `1 - F` at the parameters optimized for the first positive `γ` of the grid.
    pub infidelity_fixed: f64,
    /// `1 - F` after re-optimizing at this `γ`.
    pub infidelity_optimized: Option<f64>,
    pub kappa: f64,
    pub eta: f64,
    pub xi: f64,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

/// Search box in knob space: `ln κ`, `ln η`, `logit ξ`. Outside it the rates
/// span enough decades that the steady-state solve loses its accuracy, and
/// the optimum at small `γ` sits on a knife edge (`η → 0`) that any extra loss
/// destroys.
fn knob_box() -> [(f64, f64); 3] {
    let logit = |x: f64| (x / (1.0 - x)).ln();
    [(1e-2f64.ln(), 1e2f64.ln()), (1e-3f64.ln(), 0.0), (logit(1e-3), logit(0.9))]
}

fn outside_box(x: &[f64]) -> f64 {
    x.iter().zip(knob_box()).map(|(v, (lo, hi))| (lo - v).max(0.0) + (v - hi).max(0.0)).sum()
}

fn with_knobs(base: &SSHParams, x: &[f64], gamma: f64) -> Result<SSHParams> {
    let xi = 1.0 / (1.0 + (-x[2]).exp());
    SSHParams::from_xi(base.n_sites, base.j, xi.clamp(1e-6, 1.0 - 1e-6), base.u, x[0].exp(), x[1].exp())?
        .with_gamma(gamma)
}

fn knobs(p: &SSHParams) -> Vec<f64> {
    let xi = p.xi();
    vec![p.kappa.ln(), p.eta.ln(), (xi / (1.0 - xi)).ln()]
}

fn infidelity(p: &SSHParams, opts: &AddedLossOptions) -> f64 {
    match quantum_steady_state(p, opts.dims, &opts.steady) {
        Ok(s) => 1.0 - s.fidelity,
        Err(_) => 1.0,
    }
}

struct Objective<'a> {
    base: SSHParams,
    gamma: f64,
    opts: &'a AddedLossOptions,
    evaluations: AtomicUsize,
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let excess = outside_box(x);
        if excess > 0.0 {
            return Ok(1.0 + excess);
        }
        Ok(match with_knobs(&self.base, x, self.gamma) {
            Ok(p) => infidelity(&p, self.opts),
            Err(_) => 1.0,
        })
    }
}

/// Best `(κ, η, ξ)` for one `γ` from `start`; returns the parameters, the
/// infidelity, the evaluation count and whether the budget ran out.
fn optimize(start: &SSHParams, gamma: f64, opts: &AddedLossOptions) -> Result<(SSHParams, f64, usize, bool)> {
    let x0: Vec<f64> = knobs(start).iter().zip(knob_box()).map(|(v, (lo, hi))| v.clamp(lo, hi)).collect();
    let mut simplex = vec![x0.clone()];
    for k in 0..3 {
        let mut v = x0.clone();
        v[k] += 0.5;
        simplex.push(v);
    }
    let problem = Objective { base: *start, gamma, opts, evaluations: AtomicUsize::new(0) };
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-6)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let res = Executor::new(problem, solver)
        .configure(|s| s.max_iters(opts.budget))
        .run()
        .map_err(|e| Error::Linalg(e.to_string()))?;
    let state = res.state();
    let best = state.get_best_param().cloned().unwrap_or(x0);
    let exhausted = matches!(state.get_termination_reason(), Some(TerminationReason::MaxItersReached));
    let evaluations = res.problem.problem.as_ref().map_or(0, |p| p.evaluations.load(Ordering::Relaxed));
    let p = with_knobs(start, &best, gamma)?;
    Ok((p, state.get_best_cost(), evaluations, exhausted))
}

/// Edge-mode infidelity against extra loss `γ` on the pumped sublattice.
///
/// The chain parameters `(κ, η, ξ)` are optimized once, at the first positive
/// grid value, and then held fixed for `infidelity_fixed`; with `reoptimize`
/// each point is optimized again for `infidelity_optimized`.
pub fn added_loss_scan(base: &SSHParams, gammas: &[f64], opts: &AddedLossOptions) -> Result<Vec<AddedLossPoint>> {
    base.validate()?;
    if gammas.is_empty() {
        return Ok(Vec::new());
    }
    let (fixed, mut evaluations, mut exhausted) = if opts.budget > 0 {
        let reference = gammas.iter().copied().find(|g| *g > 0.0).unwrap_or(gammas[0]);
        let (p, _, e, x) = optimize(base, reference, opts)?;
        (p, e, x)
    } else {
        (*base, 0, false)
    };
    let mut current = fixed;
    let mut out = Vec::with_capacity(gammas.len());
    for (k, &g) in gammas.iter().enumerate() {
        let infidelity_fixed = infidelity(&fixed.with_gamma(g)?, opts);
        let mut infidelity_optimized = None;
        if opts.reoptimize && opts.budget > 0 {
            if k > 0 {
                let (p, _, e, x) = optimize(&current, g, opts)?;
                current = p;
                evaluations = e;
                exhausted = x;
            }
            infidelity_optimized = Some(infidelity(&current.with_gamma(g)?, opts));
        }
        let shown = if opts.reoptimize { current } else { fixed };
        out.push(AddedLossPoint {
            gamma: g,
            infidelity_fixed,
            infidelity_optimized,
            kappa: shown.kappa,
            eta: shown.eta,
            xi: shown.xi(),
            evaluations,
            budget_exhausted: exhausted,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::creation;

    #[test]
    fn rate_equations() {
        let r = rate_equation_prediction(0.1).unwrap();
        assert!((r[1] - 0.980_582_524_271_844_7).abs() < 1e-12);
        assert!((r[0] - 0.009_708_737_864_077_67).abs() < 1e-12);
        assert_eq!(r[0], r[2]);
        assert!((r.iter().sum::<f64>() - 1.0).abs() <= f64::EPSILON);
        assert!(rate_equation_prediction(1.0).is_err());
    }

    #[test]
    fn fidelity_of_reference_states() {
        let p = SSHParams::from_xi(3, 1.0, 0.3, 1.0, 1.0, 0.09).unwrap();
        let space = FockSpace::uniform(3, 3).unwrap();
        assert_eq!(fock_fidelity(&DensityMatrix::vacuum(&space), &p).unwrap(), 0.0);
        let zero = edge_state(&p, &space);
        let rho = DensityMatrix::pure(&space, &zero).unwrap();
        assert!((fock_fidelity(&rho, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    fn edge_state(p: &SSHParams, space: &FockSpace) -> Vec<C64> {
        let z = super::super::edge_wavefunction(p).unwrap();
        let mut psi = vec![C64::new(0.0, 0.0); space.total_dim()];
        for (i, &amp) in z.iter().enumerate() {
            let mut occ = vec![0; p.n_sites];
            occ[i] = 1;
            psi[space.index_of(&occ).unwrap()] += amp;
        }
        psi
    }

    #[test]
    fn overlap_sum_matches_fock_matrix_element() {
        let p = SSHParams::from_xi(5, 1.0, 0.3, 0.8, 1.0, 0.0).unwrap();
        let model = build_ssh_model(&p, 3).unwrap();
        let space = &model.space;
        let a: Vec<SparseOperator> = (0..5).map(|i| annihilation(space, i).unwrap()).collect();
        let ad: Vec<SparseOperator> = (0..5).map(|i| creation(space, i).unwrap()).collect();
        let mode_op = |psi: &[f64], ops: &[SparseOperator]| {
            let refs: Vec<&SparseOperator> = ops.iter().collect();
            let c: Vec<C64> = psi.iter().map(|&x| C64::new(x, 0.0)).collect();
            crate::fock::compose(&refs, &c).unwrap()
        };
        let z0 = model.modes.zero_mode_index.unwrap();
        let psi0 = model.modes.mode(z0);
        let mut hint = SparseOperator::zero(space);
        for i in 0..5 {
            let n = number(space, i).unwrap();
            hint = hint.add(&n.mul(&n.sub(&identity(space)).unwrap()).unwrap().scale_re(0.4)).unwrap();
        }
        let d0 = mode_op(&psi0, &a);
        let d0d = mode_op(&psi0, &ad);
        let mut vac = vec![C64::new(0.0, 0.0); space.total_dim()];
        vac[0] = C64::new(1.0, 0.0);
        let ket = hint.apply(&d0d.apply(&d0d.apply(&vac).unwrap()).unwrap()).unwrap();
        let mut total = 0.0;
        for alpha in (0..5).filter(|&k| k != z0) {
            let da = mode_op(&model.modes.mode(alpha), &a);
            let out = da.apply(&d0.apply(&ket).unwrap()).unwrap();
            total += out[0].norm();
        }
        assert!((total - mode_overlap_sum(&p).unwrap()).abs() < 1e-12, "{total}");
    }

    #[test]
    fn overlap_sum_is_linear_in_xi_and_u() {
        let base = SSHParams::from_xi(11, 1.0, 0.1, 1.0, 1.0, 0.0).unwrap();
        let (_, fit) = mode_overlap_scaling(&base, &[0.02, 0.04, 0.08]).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.1, "{}", fit.slope);
        let doubled = SSHParams { u: 2.0, ..base };
        let ratio = mode_overlap_sum(&doubled).unwrap() / mode_overlap_sum(&base).unwrap();
        assert!((ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_mode_hamiltonian_is_irrelevant() {
        let scan = single_mode_no_go_scan(&[0.3, 1.0, 3.0], &[0.0, 0.3], 10).unwrap();
        assert!(scan.hamiltonian_dependence < 1e-10);
        assert!(scan.best.fidelity > 0.2 && scan.best.fidelity < 0.5);
    }

    #[test]
    fn pure_gain_single_mode_is_flagged() {
        let scan = single_mode_no_go_scan(&[0.0, 1.0], &[0.0], 12).unwrap();
        assert!(scan.points[0].flagged);
        assert!(!scan.points[1].flagged);
    }

    #[test]
    fn three_site_fock_state() {
        let p = SSHParams::from_xi(3, 1.0, 0.1, 1.0, 1.0, 0.01).unwrap();
        let s = quantum_steady_state(&p, 3, &SshSteadyOptions::default()).unwrap();
        assert!(s.fidelity > 0.5, "{}", s.fidelity);
        assert!(s.site_densities[0] > s.site_densities[2]);
    }

    #[test]
    fn linear_chain_runs_into_truncation() {
        let p = SSHParams::from_xi(3, 1.0, 0.3, 0.0, 1.0, 0.3).unwrap();
        let r = quantum_steady_state(&p, 3, &SshSteadyOptions::default());
        assert!(matches!(r, Err(Error::Truncation(_))), "{r:?}");
    }
}
