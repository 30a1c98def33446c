//! Driven-dissipative SSH chain with on-site Kerr interactions.
//!
//! Sites are indexed from 0. Even sites form the `A` sublattice and odd sites
//! the `B` sublattice, so a chain of odd length starts and ends on `A`. The
//! single-particle Hamiltonian is
//!
//! ```text
//! H = -J sum_k [(1 + δ) a_k^dag b_k + (1 - δ) b_k^dag a_{k+1}] + h.c.
//! ```
//!
//! `A` sites are pumped at rate `η²κ` and `B` sites are damped at rate `κ`.
//! The chain is topological for `δ < 0`: the zero mode then lives on the `A`
//! sublattice at the left edge and decays by `ξ = (1 + δ)/(1 - δ)` per unit
//! cell. A mirrored labeling of the bonds (first bond `1 - δ`) describes the
//! same chain with `δ → -δ`; [`SSHParams::from_xi`] avoids the ambiguity.

mod dissipator;
mod meanfield;
mod quantum;
mod semiclassical;

pub use dissipator::{
    dissipator_identity_for, dissipator_mode_identity_check, gaussian_correlations,
    thermal_mode_occupations,
};
pub use meanfield::{mean_field_self_consistent, MeanFieldEdge, MeanFieldOptions};
pub use quantum::{
    added_loss_scan, build_ssh_model, fock_fidelity, mode_overlap_scaling, mode_overlap_sum,
    quantum_steady_state, rate_equation_prediction, single_mode_no_go_scan, single_mode_steady_state,
    AddedLossOptions, AddedLossPoint, NoGoPoint, NoGoScan, SingleModeParams, SshModel, SshSteadyOptions,
    SshSteadyState,
};
pub use semiclassical::{
    dynamical_matrix, fft_frequency, integrate_ssh, integration_estimate, limit_cycle_solve,
    monodromy_multipliers, semiclassical_rhs, weak_zero_mode, IntegrationEstimate, LimitCycle,
    LimitCycleMethod, LimitCycleOptions,
};

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SSHParams {
    /// Number of sites, odd.
    pub n_sites: usize,
    pub j: f64,
    /// Dimerization in `(-1, 1)`; negative is topological.
    pub delta: f64,
    /// Kerr strength of `U/2 n(n-1)` on every site, or on `A` sites only
    /// when `kerr_a_only` is set.
    pub u: f64,
    /// Loss rate on `B`.
    pub kappa: f64,
    /// Gain rate on `A` is `η²κ`.
    pub eta: f64,
    /// Extra loss on the pumped sublattice `A`.
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub kerr_a_only: bool,
}

impl SSHParams {
    pub fn new(n_sites: usize, j: f64, delta: f64, u: f64, kappa: f64, eta: f64) -> Result<Self> {
        let p = Self { n_sites, j, delta, u, kappa, eta, gamma: 0.0, kerr_a_only: false };
        p.validate()?;
        Ok(p)
    }

    /// Topological chain with localization ratio `0 < ξ < 1`.
    pub fn from_xi(n_sites: usize, j: f64, xi: f64, u: f64, kappa: f64, eta: f64) -> Result<Self> {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(Error::InvalidParameter(format!("xi must lie in (0, 1), got {xi}")));
        }
        Self::new(n_sites, j, -(1.0 - xi) / (1.0 + xi), u, kappa, eta)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_kerr_a_only(mut self, on: bool) -> Self {
        self.kerr_a_only = on;
        self
    }

    /// Kerr strength on site `i`.
    pub fn kerr(&self, i: usize) -> f64 {
        if self.kerr_a_only && !is_a_site(i) {
            0.0
        } else {
            self.u
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 3 || self.n_sites % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "n_sites must be odd and >= 3, got {}",
                self.n_sites
            )));
        }
        if !(self.delta.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!("|delta| must be < 1, got {}", self.delta)));
        }
        for (name, v) in [
            ("J", self.j),
            ("U", self.u),
            ("kappa", self.kappa),
            ("eta", self.eta),
            ("gamma", self.gamma),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Amplitude ratio of the zero mode between neighbouring `A` sites.
    pub fn xi(&self) -> f64 {
        (1.0 + self.delta) / (1.0 - self.delta)
    }

    /// `η / ξ²`.
    pub fn eta_prime(&self) -> f64 {
        self.eta / (self.xi() * self.xi())
    }

    pub fn is_topological(&self) -> bool {
        self.delta < 0.0
    }

    pub fn gain(&self) -> f64 {
        self.eta * self.eta * self.kappa
    }
}

pub fn is_a_site(i: usize) -> bool {
    i % 2 == 0
}

/// Real symmetric SSH hopping matrix for any chain length `n >= 2`.
pub fn ssh_hopping_matrix(n: usize, j: f64, delta: f64) -> Mat<f64> {
    let mut h = Mat::<f64>::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        let t = if is_a_site(i) { -j * (1.0 + delta) } else { -j * (1.0 - delta) };
        h[(i, i + 1)] = t;
        h[(i + 1, i)] = t;
    }
    h
}

/// `+1` on `A`, `-1` on `B`.
pub fn chiral_diagonal(n: usize) -> Vec<f64> {
    (0..n).map(|i| if is_a_site(i) { 1.0 } else { -1.0 }).collect()
}

#[derive(Clone, Debug)]
pub struct SshHamiltonian {
    pub matrix: Mat<f64>,
    pub chiral: Vec<f64>,
}

/// Single-particle Hamiltonian and chiral operator. Fails if `S H S != -H`.
pub fn build_ssh(p: &SSHParams) -> Result<SshHamiltonian> {
    p.validate()?;
    let matrix = ssh_hopping_matrix(p.n_sites, p.j, p.delta);
    let chiral = chiral_diagonal(p.n_sites);
    let dev = chiral_violation(&matrix, &chiral);
    if dev != 0.0 {
        return Err(Error::Linalg(format!("chiral symmetry violated by {dev:e}")));
    }
    Ok(SshHamiltonian { matrix, chiral })
}

/// `max |S H S + H|`.
pub fn chiral_violation(h: &Mat<f64>, chiral: &[f64]) -> f64 {
    let n = h.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for k in 0..n {
            dev = dev.max((chiral[i] * h[(i, k)] * chiral[k] + h[(i, k)]).abs());
        }
    }
    dev
}

/// Eigenmodes of a chiral-symmetric Hamiltonian, sorted by energy.
///
/// Column `α` of `wavefunctions` holds `ψ_α[i]`, so `d_α = Σ_i ψ_α[i] c_i`.
/// Negative-energy modes are built as `S ψ` from their positive partners, so
/// the pairing is exact rather than up to eigensolver noise. The Hamiltonian
/// is real, so the wavefunctions are too.
#[derive(Clone, Debug)]
pub struct ModeDecomposition {
    pub energies: Vec<f64>,
    pub wavefunctions: Mat<f64>,
    /// `partner[α]` is the mode with energy `-ε_α`; the zero mode is its own partner.
    pub partner: Vec<usize>,
    pub zero_mode_index: Option<usize>,
}

impl ModeDecomposition {
    pub fn mode(&self, alpha: usize) -> Vec<f64> {
        (0..self.wavefunctions.nrows()).map(|i| self.wavefunctions[(i, alpha)]).collect()
    }

    pub fn zero_mode(&self) -> Option<Vec<f64>> {
        self.zero_mode_index.map(|k| self.mode(k))
    }

    /// `max |Ψ^T Ψ - 1|`.
    pub fn unitarity_error(&self) -> f64 {
        let w = &self.wavefunctions;
        let n = w.ncols();
        let mut dev = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..w.nrows()).map(|i| w[(i, a)] * w[(i, b)]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                dev = dev.max((dot - target).abs());
            }
        }
        dev
    }
}

/// Chiral-paired eigenmodes of `h`. At most one zero mode is supported; it is
/// projected onto the sublattice it lives on and given a positive first
/// nonzero entry.
pub fn mode_decomposition(h: &Mat<f64>, chiral: &[f64]) -> Result<ModeDecomposition> {
    let n = h.nrows();
    if chiral.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: chiral.len() });
    }
    let eig = h.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let (u, s) = (eig.U(), eig.S());
    let scale = (0..n).map(|i| s[i].abs()).fold(0.0, f64::max).max(1e-300);
    let zero_tol = 1e-9 * scale;
    let mut modes: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
    let mut zeros = Vec::new();
    for k in 0..n {
        let e = s[k];
        let v: Vec<f64> = (0..n).map(|i| u[(i, k)]).collect();
        if e.abs() <= zero_tol {
            zeros.push(v);
        } else if e > 0.0 {
            let partner: Vec<f64> = v.iter().zip(chiral).map(|(x, c)| x * c).collect();
            modes.push((-e, partner));
            modes.push((e, v));
        }
    }
    let zero_mode = match zeros.len() {
        0 => None,
        1 => {
            let v = &zeros[0];
            let weight_a: f64 = v.iter().zip(chiral).filter(|(_, &c)| c > 0.0).map(|(x, _)| x * x).sum();
            let side = if weight_a >= 0.5 { 1.0 } else { -1.0 };
            let mut z: Vec<f64> = v.iter().zip(chiral).map(|(&x, &c)| if c == side { x } else { 0.0 }).collect();
            let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
            let sign = z.iter().find(|x| x.abs() > 1e-14 * norm).map_or(1.0, |x| x.signum());
            z.iter_mut().for_each(|x| *x *= sign / norm);
            Some(z)
        }
        k => return Err(Error::Linalg(format!("{k} degenerate zero modes are not supported"))),
    };
    if let Some(z) = zero_mode {
        modes.push((0.0, z));
    }
    if modes.len() != n {
        return Err(Error::Linalg("spectrum is not chiral-paired".into()));
    }
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let energies: Vec<f64> = modes.iter().map(|m| m.0).collect();
    let wavefunctions = Mat::from_fn(n, n, |i, a| modes[a].1[i]);
    let zero_mode_index = energies.iter().position(|&e| e == 0.0);
    let partner = (0..n).map(|a| n - 1 - a).collect();
    Ok(ModeDecomposition { energies, wavefunctions, partner, zero_mode_index })
}

pub fn ssh_modes(p: &SSHParams) -> Result<ModeDecomposition> {
    let h = build_ssh(p)?;
    mode_decomposition(&h.matrix, &h.chiral)
}

/// Closed-form zero mode, `ψ_0[i] ∝ √(1 - ξ²) sin(π i/2) ξ^((i-1)/2)` in
/// 1-based site labels, normalized on the finite chain.
pub fn edge_wavefunction(p: &SSHParams) -> Result<Vec<f64>> {
    p.validate()?;
    if !p.is_topological() {
        return Err(Error::InvalidParameter(format!(
            "edge_wavefunction needs the topological phase (delta < 0), got delta = {}",
            p.delta
        )));
    }
    let xi = p.xi();
    let mut psi: Vec<f64> = (0..p.n_sites)
        .map(|i| {
            if is_a_site(i) {
                let k = (i / 2) as i32;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * (1.0 - xi * xi).sqrt() * xi.powi(k)
            } else {
                0.0
            }
        })
        .collect();
    let norm = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|x| *x /= norm);
    Ok(psi)
}

/// Random hoppings between the two sublattices of an `n`-site chain, each
/// drawn uniformly from `[-1, 1]`.
pub fn random_chiral_hamiltonian(n: usize, seed: u64) -> Mat<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for k in (i + 1)..n {
            if is_a_site(i) != is_a_site(k) {
                let t = rng.gen_range(-1.0..1.0);
                h[(i, k)] = t;
                h[(k, i)] = t;
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn topo(n: usize, xi: f64) -> SSHParams {
        SSHParams::from_xi(n, 1.0, xi, 1.0, 1.0, 0.1).unwrap()
    }

    #[test]
    fn even_chain_rejected() {
        assert!(SSHParams::new(4, 1.0, -0.5, 1.0, 1.0, 0.1).is_err());
        assert!(SSHParams::new(5, 1.0, 1.0, 1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn xi_round_trip() {
        let p = topo(5, 0.2);
        assert!((p.xi() - 0.2).abs() < 1e-15);
        assert!((p.eta_prime() - 0.1 / 0.04).abs() < 1e-12);
    }

    #[test]
    fn three_site_spectrum() {
        let p = SSHParams::new(3, 1.0, -0.5, 0.0, 1.0, 0.0).unwrap();
        let m = ssh_modes(&p).unwrap();
        assert_eq!(m.zero_mode_index, Some(1));
        assert!((m.energies[0] + m.energies[2]).abs() < 1e-14);
        let expect = (0.25f64 + 2.25).sqrt();
        assert!((m.energies[2] - expect).abs() < 1e-12);
    }

    #[test]
    fn zero_mode_lives_on_a() {
        let m = ssh_modes(&topo(9, 0.3)).unwrap();
        let z = m.zero_mode().unwrap();
        for (i, x) in z.iter().enumerate() {
            if !is_a_site(i) {
                assert_eq!(*x, 0.0);
            }
        }
        assert!(m.unitarity_error() < 1e-12);
    }

    #[test]
    fn decoupled_dimer_limit() {
        let p = SSHParams::new(7, 1.0, -1.0 + 1e-12, 0.0, 1.0, 0.0).unwrap();
        let z = ssh_modes(&p).unwrap().zero_mode().unwrap();
        assert!((z[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn closed_form_edge_matches_diagonalization() {
        let p = topo(21, 0.1);
        let psi = edge_wavefunction(&p).unwrap();
        let z = ssh_modes(&p).unwrap().zero_mode().unwrap();
        let overlap: f64 = psi.iter().zip(&z).map(|(a, b)| a * b).sum();
        assert!(overlap > 1.0 - 1e-6, "{overlap}");
        assert!((psi.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-10);
        assert_eq!(psi[1], 0.0);
        assert!((psi[0] - (1.0f64 - 0.01).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn trivial_phase_has_no_edge_formula() {
        let p = SSHParams::new(5, 1.0, 0.3, 1.0, 1.0, 0.1).unwrap();
        assert!(edge_wavefunction(&p).is_err());
    }

    #[test]
    fn random_chiral_is_paired() {
        for seed in 0..5 {
            let h = random_chiral_hamiltonian(7, seed);
            let c = chiral_diagonal(7);
            assert_eq!(chiral_violation(&h, &c), 0.0);
            let m = mode_decomposition(&h, &c).unwrap();
            for a in 0..7 {
                assert!((m.energies[a] + m.energies[m.partner[a]]).abs() < 1e-12);
            }
            assert!(m.unitarity_error() < 1e-12);
        }
    }
}
