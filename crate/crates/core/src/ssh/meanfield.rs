//! Self-consistent mean-field edge mode.
//!
//! Interactions dress the chain with on-site energies `Δ_i = s |ψ_i|²`, where
//! `ψ` is the edge eigenvector of `H + diag(Δ)` and `s = U |d_0|²`. The dressed
//! mode leaks onto `B`; lasing settles where that leakage balances the pump,
//! `Σ_B |ψ_i|² = η²`. The balance assumes `κ` small against the gap, so the
//! edge mode is an eigenvector of the dressed Hamiltonian.

use faer::{Mat, Side};
use serde::Serialize;

use super::{build_ssh, is_a_site, SSHParams};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct MeanFieldOptions {
    pub mixing: f64,
    pub inner_tol: f64,
    pub max_inner: usize,
    /// Bisection stops once `|overlap - target| <= overlap_tol`.
    pub overlap_tol: f64,
    /// Upper end of the `s` search interval. The scan stops early where the
    /// on-site iteration stops converging, which happens once the dressed edge
    /// level runs into the bulk band.
    pub s_max: f64,
    /// Samples of the overlap curve on `[0, s_max]`.
    pub curve_points: usize,
    /// Overlap to match; `η²` when `None`.
    pub target: Option<f64>,
}

impl Default for MeanFieldOptions {
    fn default() -> Self {
        Self {
            mixing: 0.5,
            inner_tol: 1e-10,
            max_inner: 10_000,
            overlap_tol: 1e-8,
            s_max: 2.0,
            curve_points: 81,
            target: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanFieldEdge {
    /// `U |d_0|²`.
    pub s: f64,
    /// `|d_0|²`, infinite when `U = 0`.
    pub photons: f64,
    pub onsite: Vec<f64>,
    pub psi: Vec<f64>,
    /// Eigenvalue of the edge mode of `H + diag(Δ)`.
    pub energy: f64,
    pub b_overlap: f64,
    /// `(s, B-overlap)` on the sampling grid.
    pub curve: Vec<(f64, f64)>,
}

struct Dressed {
    psi: Vec<f64>,
    onsite: Vec<f64>,
    energy: f64,
}

fn b_overlap(psi: &[f64]) -> f64 {
    psi.iter().enumerate().filter(|(i, _)| !is_a_site(*i)).map(|(_, x)| x * x).sum()
}

/// Eigenvector of `h + diag(onsite)` closest to `guess`, with `ψ[0] > 0`.
fn edge_eigenvector(h: &Mat<f64>, onsite: &[f64], guess: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = h.nrows();
    let m = Mat::from_fn(n, n, |i, k| h[(i, k)] + if i == k { onsite[i] } else { 0.0 });
    let eig = m.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let (u, s) = (eig.U(), eig.S());
    let best = (0..n)
        .max_by(|&a, &b| {
            let oa: f64 = (0..n).map(|i| u[(i, a)] * guess[i]).sum::<f64>().abs();
            let ob: f64 = (0..n).map(|i| u[(i, b)] * guess[i]).sum::<f64>().abs();
            oa.total_cmp(&ob)
        })
        .unwrap_or(0);
    let sign = if u[(0, best)] < 0.0 { -1.0 } else { 1.0 };
    Ok(((0..n).map(|i| sign * u[(i, best)]).collect(), s[best]))
}

fn dress(h: &Mat<f64>, w: &[f64], s: f64, guess: &[f64], opts: &MeanFieldOptions) -> Result<Dressed> {
    let mut onsite: Vec<f64> = guess.iter().zip(w).map(|(x, w)| w * s * x * x).collect();
    let mut psi = guess.to_vec();
    let mut err = f64::INFINITY;
    for _ in 0..opts.max_inner {
        let (next, energy) = edge_eigenvector(h, &onsite, &psi)?;
        err = next
            .iter()
            .zip(&onsite)
            .zip(w)
            .map(|((x, d), w)| (w * s * x * x - d).abs())
            .fold(0.0, f64::max);
        psi = next;
        if err <= opts.inner_tol {
            return Ok(Dressed { psi, onsite, energy });
        }
        for ((d, x), w) in onsite.iter_mut().zip(&psi).zip(w) {
            *d = (1.0 - opts.mixing) * *d + opts.mixing * w * s * x * x;
        }
    }
    Err(Error::IterationLimit { what: "mean-field on-site iteration", iterations: opts.max_inner, residual: err })
}

/// Dressed edge mode whose `B`-sublattice weight matches the pump ratio.
///
/// # Errors
/// [`Error::NoSolution`] if the overlap stays below the target on
/// `[0, s_max]`; the message carries the attained range.
pub fn mean_field_self_consistent(p: &SSHParams, opts: &MeanFieldOptions) -> Result<MeanFieldEdge> {
    let ham = build_ssh(p)?;
    let h = &ham.matrix;
    // Relative Kerr weight per site: 1, or 0 on B for the A-only variant.
    let w: Vec<f64> = (0..p.n_sites).map(|i| if p.kerr(i) == p.u { 1.0 } else { 0.0 }).collect();
    let target = opts.target.unwrap_or(p.eta * p.eta);
    let zero = super::mode_decomposition(h, &ham.chiral)?
        .zero_mode()
        .ok_or_else(|| Error::NoSolution("chain has no zero mode".into()))?;

    let points = opts.curve_points.max(2);
    let mut curve = Vec::with_capacity(points);
    let mut guess = zero.clone();
    let mut bracket = None;
    let mut prev: Option<(f64, Vec<f64>)> = None;
    for k in 0..points {
        let s = opts.s_max * k as f64 / (points - 1) as f64;
        let Ok(d) = dress(h, &w, s, &guess, opts) else {
            break;
        };
        let ov = b_overlap(&d.psi);
        curve.push((s, ov));
        if bracket.is_none() && ov >= target {
            bracket = Some((prev.clone(), (s, d.psi.clone())));
        }
        prev = Some((s, d.psi.clone()));
        guess = d.psi;
    }
    let Some((lower, (mut s_hi, psi_hi))) = bracket else {
        let lo = curve.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let hi = curve.iter().map(|c| c.1).fold(0.0, f64::max);
        return Err(Error::NoSolution(format!(
            "B-overlap spans [{lo:e}, {hi:e}] on s in [0, {}], target {target:e}",
            curve.last().map_or(0.0, |c| c.0)
        )));
    };
    let (mut s_lo, mut psi_lo) = lower.unwrap_or((0.0, zero));
    let mut best = dress(h, &w, s_hi, &psi_hi, opts)?;
    let mut best_s = s_hi;
    for _ in 0..200 {
        if (b_overlap(&best.psi) - target).abs() <= opts.overlap_tol || s_hi - s_lo <= 1e-15 * s_hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (s_lo + s_hi);
        let d = dress(h, &w, mid, &psi_lo, opts)?;
        if b_overlap(&d.psi) < target {
            s_lo = mid;
            psi_lo = d.psi.clone();
        } else {
            s_hi = mid;
        }
        best = d;
        best_s = mid;
    }
    Ok(MeanFieldEdge {
        s: best_s,
        photons: if p.u > 0.0 { best_s / p.u } else { f64::INFINITY },
        b_overlap: b_overlap(&best.psi),
        onsite: best.onsite,
        psi: best.psi,
        energy: best.energy,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2(eta: f64) -> SSHParams {
        SSHParams::new(21, 1.0, -0.4, 1.0, 1.0, eta).unwrap()
    }

    #[test]
    fn undressed_edge_has_no_b_weight() {
        let r = mean_field_self_consistent(&fig2(0.05), &MeanFieldOptions::default()).unwrap();
        assert_eq!(r.curve[0].0, 0.0);
        assert!(r.curve[0].1 < 1e-28);
        assert!(r.curve[1].1 > r.curve[0].1 && r.curve[2].1 > r.curve[1].1);
    }

    #[test]
    fn bisection_hits_target() {
        for eta2 in [1e-4f64, 1e-3, 1e-2] {
            let r = mean_field_self_consistent(&fig2(eta2.sqrt()), &MeanFieldOptions::default()).unwrap();
            assert!((r.b_overlap - eta2).abs() <= 1e-8, "{eta2}: {}", r.b_overlap);
            let resid = r.psi.iter().zip(&r.onsite).map(|(x, d)| (r.s * x * x - d).abs()).fold(0.0, f64::max);
            assert!(resid < 1e-9);
        }
    }

    #[test]
    fn unreachable_target() {
        let opts = MeanFieldOptions { s_max: 1e-3, curve_points: 5, ..Default::default() };
        assert!(matches!(mean_field_self_consistent(&fig2(0.5), &opts), Err(Error::NoSolution(_))));
    }
}
