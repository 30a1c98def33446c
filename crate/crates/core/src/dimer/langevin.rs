//! Stochastic amplitude equations and phase diffusion of the lasing dimer.
//!
//! Noise convention: `ξ_a`, `ξ_b` are independent complex white noises with
//! `<ξ(t) ξ*(t')> = δ(t - t')`, i.e. real and imaginary parts each carry
//! variance ½ per unit time. Over a step `dt` the increment added to `a` is
//! `√κ_a (X + iY) √(dt/2)` with `X, Y` standard normal.
//!
//! Seeding: trajectory `k` of an ensemble with seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` on stream `k`, so results do not depend on
//! thread scheduling.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::{lasing_fixed_point, semiclassical_rhs, DimerParams, SemiclassicalModel, SemiclassicalState};
use crate::error::{Error, Result};
use crate::stats::{bootstrap_stderr, linear_fit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NoiseScheme {
    EulerMaruyama,
    /// Stochastic Heun; strong order one for additive noise.
    Heun,
}

#[derive(Clone, Debug)]
pub struct LangevinOptions {
    /// Integration time discarded before recording starts.
    pub t_burn: f64,
    /// Length of the recorded window.
    pub t_window: f64,
    pub dt: f64,
    /// Record every `sample_every`-th step.
    pub sample_every: usize,
    /// Multiplies both noise amplitudes; 0 gives the deterministic flow.
    pub noise_scale: f64,
    pub scheme: NoiseScheme,
    /// Amplitude beyond which a run counts as dynamically unstable.
    pub overflow_guard: f64,
}

impl Default for LangevinOptions {
    fn default() -> Self {
        Self {
            t_burn: 100.0,
            t_window: 1000.0,
            dt: 0.01,
            sample_every: 100,
            noise_scale: 1.0,
            scheme: NoiseScheme::Heun,
            overflow_guard: 1e6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    /// Times measured from the start of the recorded window.
    pub times: Vec<f64>,
    pub states: Vec<SemiclassicalState>,
}

impl Trajectory {
    /// Continuous phase of mode `a`.
    pub fn unwrapped_phase(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.states.len());
        let mut prev = 0.0;
        let mut acc = 0.0;
        for (k, s) in self.states.iter().enumerate() {
            let phi = s.a.arg();
            if k == 0 {
                acc = phi;
            } else {
                let mut d = phi - prev;
                d -= (d / std::f64::consts::TAU).round() * std::f64::consts::TAU;
                acc += d;
            }
            prev = phi;
            out.push(acc);
        }
        out
    }
}

/// One trajectory of the nonlinear-hop Langevin equations started at `s0`.
///
/// # Errors
/// Outside the lasing regime, when `dt` does not resolve the fastest rate by
/// a factor of 20, or when an amplitude exceeds the overflow guard.
pub fn langevin_simulate(
    p: &DimerParams,
    s0: &SemiclassicalState,
    opts: &LangevinOptions,
    seed: u64,
    stream: u64,
) -> Result<Trajectory> {
    check_options(p, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let sa = opts.noise_scale * p.kappa_a.sqrt();
    let sb = opts.noise_scale * p.kappa_b.sqrt();
    let amp = (0.5 * opts.dt).sqrt();
    let burn = (opts.t_burn / opts.dt).round() as usize;
    let steps = (opts.t_window / opts.dt).round() as usize;
    let every = opts.sample_every.max(1);
    let model = SemiclassicalModel::NonlinearHop;

    let mut s = *s0;
    let mut out = Trajectory { times: Vec::new(), states: Vec::new() };
    for k in 0..burn + steps + 1 {
        if k >= burn && (k - burn) % every == 0 {
            out.times.push((k - burn) as f64 * opts.dt);
            out.states.push(s);
        }
        if k == burn + steps {
            break;
        }
        let mut draw = || C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * amp;
        let (wa, wb) = (draw() * sa, draw() * sb);
        let f0 = semiclassical_rhs(&s, p, model);
        let pred = SemiclassicalState { a: s.a + f0.a * opts.dt + wa, b: s.b + f0.b * opts.dt + wb };
        s = match opts.scheme {
            NoiseScheme::EulerMaruyama => pred,
            NoiseScheme::Heun => {
                let f1 = semiclassical_rhs(&pred, p, model);
                SemiclassicalState {
                    a: s.a + (f0.a + f1.a) * (0.5 * opts.dt) + wa,
                    b: s.b + (f0.b + f1.b) * (0.5 * opts.dt) + wb,
                }
            }
        };
        let big = s.a.norm().max(s.b.norm());
        if !(big <= opts.overflow_guard) {
            return Err(Error::Unstable(format!(
                "amplitude {big:e} exceeded guard at t = {}",
                k as f64 * opts.dt
            )));
        }
    }
    Ok(out)
}

fn check_options(p: &DimerParams, opts: &LangevinOptions) -> Result<()> {
    p.validate()?;
    if !p.is_lasing() {
        return Err(Error::InvalidParameter("Langevin runs need the lasing regime".into()));
    }
    if !(opts.dt > 0.0 && opts.t_window > 0.0 && opts.t_burn >= 0.0) {
        return Err(Error::InvalidParameter("dt and window must be positive".into()));
    }
    // At the lasing point the renormalized hopping equals √(κ_aκ_b)/2.
    let fastest = p.kappa_a.max(p.kappa_b).max(0.5 * p.threshold_scale());
    if opts.dt * fastest * 20.0 > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "dt = {} does not resolve rate {fastest} by a factor of 20",
            opts.dt
        )));
    }
    Ok(())
}

/// `count` independent trajectories started at the lasing fixed point.
pub fn langevin_ensemble(p: &DimerParams, opts: &LangevinOptions, seed: u64, count: usize) -> Result<Vec<Trajectory>> {
    let s0 = lasing_fixed_point(p)
        .ok_or_else(|| Error::InvalidParameter("no lasing fixed point for these parameters".into()))?;
    (0..count as u64)
        .into_par_iter()
        .map(|k| langevin_simulate(p, &s0, opts, seed, k))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseDiffusion {
    /// Slope of `<(φ(t) - φ(0))²>` against `t`.
    pub coefficient: f64,
    pub stderr: f64,
    pub times: Vec<f64>,
    pub mean_square_phase: Vec<f64>,
    pub trajectories: usize,
}

/// Linear fit of the ensemble mean-square phase over the final half of the
/// recorded window, with a bootstrap error over trajectories.
///
/// # Errors
/// Fewer than 100 trajectories, ragged sampling, or mean densities in the two
/// halves of the window differing by more than 5%.
pub fn phase_diffusion_estimate(trajectories: &[Trajectory]) -> Result<PhaseDiffusion> {
    if trajectories.len() < 100 {
        return Err(Error::InvalidParameter(format!(
            "phase diffusion needs >= 100 trajectories, got {}",
            trajectories.len()
        )));
    }
    let times = trajectories[0].times.clone();
    let m = times.len();
    if m < 4 || trajectories.iter().any(|t| t.times.len() != m) {
        return Err(Error::InvalidParameter("trajectories must share a sampling grid of >= 4 points".into()));
    }
    let half = m / 2;
    let mean_density = |range: std::ops::Range<usize>| {
        let len = range.len() as f64 * trajectories.len() as f64;
        trajectories
            .iter()
            .map(|t| t.states[range.clone()].iter().map(|s| s.density()).sum::<f64>())
            .sum::<f64>()
            / len
    };
    let (d1, d2) = (mean_density(0..half), mean_density(half..m));
    if (d1 - d2).abs() > 0.05 * d1.max(d2) {
        return Err(Error::InvalidParameter(format!(
            "densities not stationary: {d1} in the first half, {d2} in the second"
        )));
    }
    let sq: Vec<Vec<f64>> = trajectories
        .iter()
        .map(|t| {
            let phi = t.unwrapped_phase();
            phi.iter().map(|v| (v - phi[0]).powi(2)).collect()
        })
        .collect();
    let slope_of = |set: &[Vec<f64>]| {
        let msd: Vec<f64> = (0..m).map(|k| set.iter().map(|r| r[k]).sum::<f64>() / set.len() as f64).collect();
        linear_fit(&times[half..], &msd[half..]).map(|f| f.slope).unwrap_or(f64::NAN)
    };
    let msd: Vec<f64> = (0..m).map(|k| sq.iter().map(|r| r[k]).sum::<f64>() / sq.len() as f64).collect();
    let coefficient = linear_fit(&times[half..], &msd[half..])?.slope;
    let stderr = bootstrap_stderr(&sq, 200, 0x5eed, |s| slope_of(s));
    Ok(PhaseDiffusion { coefficient, stderr, times, mean_square_phase: msd, trajectories: trajectories.len() })
}

/// Linearized prediction for the phase-diffusion slope in the noise
/// convention above: `κ_a r² / ((1 - r)² ρ_a²)` with `r = κ_b/κ_a`.
pub fn predicted_phase_diffusion(p: &DimerParams) -> Option<f64> {
    let s = lasing_fixed_point(p)?;
    let r = p.kappa_b / p.kappa_a;
    Some(p.kappa_a * r * r / ((1.0 - r).powi(2) * s.a.norm_sqr()))
}
