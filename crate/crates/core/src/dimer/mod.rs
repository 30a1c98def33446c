//! Gain/loss dimer with density-dependent hopping.
//!
//! Mode `a` is damped at rate `kappa_a`, mode `b` is pumped incoherently at
//! rate `kappa_b`, and the two hop with amplitude `J (1 + n/(2 n*))` where
//! `n` is the total photon number. The module covers the exact Lindblad
//! model, the Gaussian-closure moment equations, the semiclassical amplitude
//! equations (with and without detuning, and the gain-saturation comparison
//! model), Langevin phase diffusion, and the exact-versus-mean-field scan.

mod exact;
mod langevin;
mod meanfield;
mod semiclassical;

pub use exact::{
    build_dimer_model, closure_free_rhs, current_operator, default_dims, exact_density, mf_vs_exact_scan,
    DimerModel, ScanOptions, ScanPoint,
};
pub use langevin::{
    langevin_ensemble, langevin_simulate, phase_diffusion_estimate, predicted_phase_diffusion,
    LangevinOptions, NoiseScheme, PhaseDiffusion, Trajectory,
};
pub use meanfield::{
    effective_hopping, integrate_mean_field, mean_field_rhs, mean_field_steady_state,
    semiclassical_density, Branch, MeanFieldState, MeanFieldSteadyState,
};
pub use semiclassical::{
    density_block_closed_form, density_block_spectrum, detuned_hop_eigenvalues,
    detuned_linear_matrix, gain_saturation_fixed_point, instability_certificate,
    integrate_semiclassical, jacobian_spectrum, lasing_fixed_point, semiclassical_rhs,
    InstabilityCertificate, SemiclassicalModel, SemiclassicalState,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimerParams {
    pub j: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    /// Nonlinearity scale; `f64::INFINITY` gives the linear dimer.
    pub n_star: f64,
    #[serde(default)]
    pub delta: f64,
}

impl DimerParams {
    pub fn new(j: f64, kappa_a: f64, kappa_b: f64, n_star: f64) -> Result<Self> {
        let p = Self { j, kappa_a, kappa_b, n_star, delta: 0.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        self.delta = delta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("J", self.j), ("kappa_a", self.kappa_a), ("kappa_b", self.kappa_b)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.n_star > 0.0) {
            return Err(Error::InvalidParameter(format!("n_star must be > 0, got {}", self.n_star)));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be finite".into()));
        }
        Ok(())
    }

    /// `1 / (2 n*)`, zero in the linear limit.
    pub(crate) fn half_inv_n_star(&self) -> f64 {
        if self.n_star.is_finite() { 0.5 / self.n_star } else { 0.0 }
    }

    /// `√(κ_a κ_b)`, the hopping scale that sets the lasing threshold `2J = √(κ_a κ_b)`.
    pub fn threshold_scale(&self) -> f64 {
        (self.kappa_a * self.kappa_b).sqrt()
    }

    pub fn is_lasing(&self) -> bool {
        self.n_star.is_finite() && self.kappa_b > 0.0 && 2.0 * self.j < self.threshold_scale()
    }
}
