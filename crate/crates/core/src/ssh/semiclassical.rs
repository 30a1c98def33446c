//! Semiclassical amplitude equations of the chain and their limit cycle.
//!
//! The amplitude equations are written with hopping `+J`:
//!
//! ```text
//! da_k/dt = -iJ(1+δ) b_k - iJ(1-δ) b_{k-1} - iU|a_k|² a_k + (η²κ - γ)/2 a_k
//! db_k/dt = -iJ(1+δ) a_k - iJ(1-δ) a_{k+1} - iU|b_k|² b_k - κ/2 b_k
//! ```
//!
//! This is the quantum chain after the chiral gauge `b → -b`, which flips the
//! sign of every hop and leaves `λ` and all site amplitudes `|v_i|` unchanged.
//! Writing the right-hand side as `D(v) v`, the matrix `D` depends on `v` only
//! through `|v_i|²`, so a solution of `D(d_0) d_0 = iλ d_0` with real `λ`
//! gives the periodic orbit `v(t) = e^{iλt} d_0`.

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::{build_ssh, chiral_diagonal, is_a_site, mean_field_self_consistent, MeanFieldOptions, SSHParams};
use crate::error::{Error, Result};
use crate::ode::{integrate, pack, unpack, OdeOptions};

/// Hopping matrix of the amplitude equations (`+J` convention).
fn hopping(p: &SSHParams) -> Result<Mat<f64>> {
    let h = build_ssh(p)?.matrix;
    Ok(Mat::from_fn(h.nrows(), h.ncols(), |i, k| -h[(i, k)]))
}

/// Linear on-site rate: `(η²κ - γ)/2` on `A`, `-κ/2` on `B`.
fn onsite_rate(p: &SSHParams, i: usize) -> f64 {
    if is_a_site(i) {
        0.5 * (p.gain() - p.gamma)
    } else {
        -0.5 * p.kappa
    }
}

/// `D(v)`: `-i h` off the diagonal, `-iU|v_i|² + g_i` on it.
pub fn dynamical_matrix(v: &[C64], p: &SSHParams) -> Result<Mat<C64>> {
    let h = hopping(p)?;
    let n = h.nrows();
    if v.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: v.len() });
    }
    Ok(Mat::from_fn(n, n, |i, k| {
        let mut z = C64::new(0.0, -h[(i, k)]);
        if i == k {
            z += C64::new(onsite_rate(p, i), -p.kerr(i) * v[i].norm_sqr());
        }
        z
    }))
}

pub fn semiclassical_rhs(v: &[C64], p: &SSHParams) -> Vec<C64> {
    let n = v.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    rhs_into(v, p, &mut out);
    out
}

fn rhs_into(v: &[C64], p: &SSHParams, out: &mut [C64]) {
    let n = v.len();
    let i_unit = C64::new(0.0, 1.0);
    let strong = p.j * (1.0 + p.delta);
    let weak = p.j * (1.0 - p.delta);
    for i in 0..n {
        // Bond to the right of an A site is (1+δ), to the right of a B site (1-δ).
        let mut hop = C64::new(0.0, 0.0);
        if i + 1 < n {
            hop += v[i + 1] * if is_a_site(i) { strong } else { weak };
        }
        if i > 0 {
            hop += v[i - 1] * if is_a_site(i - 1) { strong } else { weak };
        }
        out[i] = -i_unit * (hop + p.kerr(i) * v[i].norm_sqr() * v[i]) + onsite_rate(p, i) * v[i];
    }
}

/// States of the amplitude equations at the times `t_out`, starting from `v0` at `t = 0`.
pub fn integrate_ssh(p: &SSHParams, v0: &[C64], t_out: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<C64>>> {
    p.validate()?;
    if v0.len() != p.n_sites {
        return Err(Error::LengthMismatch { expected: p.n_sites, got: v0.len() });
    }
    let n = p.n_sites;
    let mut buf_v = vec![C64::new(0.0, 0.0); n];
    let mut buf_d = vec![C64::new(0.0, 0.0); n];
    let out = integrate(
        |_, y, dy| {
            for i in 0..n {
                buf_v[i] = C64::new(y[2 * i], y[2 * i + 1]);
            }
            rhs_into(&buf_v, p, &mut buf_d);
            for i in 0..n {
                dy[2 * i] = buf_d[i].re;
                dy[2 * i + 1] = buf_d[i].im;
            }
        },
        0.0,
        &pack(v0),
        t_out,
        opts,
    )?;
    Ok(out.iter().map(|y| unpack(y)).collect())
}

/// Real Jacobian of `F(v) = D(v) v - iλ v` in the interleaved `(Re, Im)` layout.
fn real_jacobian(p: &SSHParams, h: &Mat<f64>, v: &[C64], lambda: f64) -> Mat<f64> {
    let n = v.len();
    let i_unit = C64::new(0.0, 1.0);
    let mut jac = Mat::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for k in 0..n {
            let mut lin = C64::new(0.0, -h[(i, k)]);
            if i == k {
                lin += onsite_rate(p, i);
            }
            let (mut dx, mut dy) = (lin, i_unit * lin);
            if i == k {
                let (x, y, a2) = (v[i].re, v[i].im, v[i].norm_sqr());
                dx += -i_unit * p.kerr(i) * (2.0 * x * v[i] + a2) - i_unit * lambda;
                dy += -i_unit * p.kerr(i) * (2.0 * y * v[i] + i_unit * a2) + lambda;
            }
            jac[(2 * i, 2 * k)] = dx.re;
            jac[(2 * i + 1, 2 * k)] = dx.im;
            jac[(2 * i, 2 * k + 1)] = dy.re;
            jac[(2 * i + 1, 2 * k + 1)] = dy.im;
        }
    }
    jac
}

fn cycle_residual(p: &SSHParams, d: &[C64], lambda: f64) -> f64 {
    let f = semiclassical_rhs(d, p);
    f.iter()
        .zip(d)
        .map(|(fi, di)| (fi - C64::new(0.0, lambda) * di).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Rotates `d` so that its first non-negligible entry is real and positive.
fn fix_gauge(d: &mut [C64]) {
    let scale = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(z) = d.iter().find(|z| z.norm() > 1e-12 * scale).copied() {
        let phase = z.conj() / z.norm();
        d.iter_mut().for_each(|x| *x *= phase);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LimitCycleMethod {
    /// Newton from the mean-field or user seed.
    Newton,
    /// Newton polish of a long-time integration.
    IntegrationNewton,
    /// Long-time integration alone.
    Integration,
}

#[derive(Clone, Debug)]
pub struct LimitCycleOptions {
    pub tol: f64,
    pub max_newton: usize,
    pub mean_field: MeanFieldOptions,
    pub ode: OdeOptions,
    /// Integration time before the frequency window.
    pub settle_time: f64,
    pub window: f64,
    pub sample_dt: f64,
    /// `Σ|v_i|²` above this counts as divergence.
    pub amplitude_guard: f64,
    /// Largest residual accepted from integration alone.
    pub integration_tol: f64,
}

impl Default for LimitCycleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_newton: 200,
            mean_field: MeanFieldOptions::default(),
            ode: OdeOptions { rtol: 1e-10, atol: 1e-10, ..OdeOptions::default() },
            settle_time: 3000.0,
            window: 2000.0,
            sample_dt: 0.25,
            amplitude_guard: 1e12,
            integration_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitCycle {
    pub d0: Vec<C64>,
    pub lambda: f64,
    pub residual: f64,
    pub method: LimitCycleMethod,
    /// Eigenvalues of the rotating-frame linearization, largest real part first.
    /// The first one is the neutral phase direction.
    pub floquet_exponents: Vec<C64>,
    /// Linearly stable apart from the neutral phase direction.
    pub stable: bool,
}

impl LimitCycle {
    pub fn photons(&self) -> f64 {
        self.d0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.lambda.abs()
    }

    /// `exp(μ T)` for every Floquet exponent.
    pub fn multipliers(&self) -> Vec<C64> {
        let t = self.period();
        self.floquet_exponents.iter().map(|mu| (mu * t).exp()).collect()
    }
}

/// Damped Newton on `(Re d, Im d, λ)` with the gauge `Im d[g] = 0`, where `g`
/// is the largest entry of the seed.
fn newton(p: &SSHParams, h: &Mat<f64>, d_seed: &[C64], lambda_seed: f64, opts: &LimitCycleOptions) -> Result<(Vec<C64>, f64, f64)> {
    let n = d_seed.len();
    let mut d = d_seed.to_vec();
    fix_gauge(&mut d);
    let g = (0..n).max_by(|&a, &b| d[a].norm().total_cmp(&d[b].norm())).unwrap_or(0);
    let phase = d[g].conj() / d[g].norm().max(f64::MIN_POSITIVE);
    d.iter_mut().for_each(|x| *x *= phase);
    let seed_norm = d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut lambda = lambda_seed;

    let system = |d: &[C64], lambda: f64| -> Vec<f64> {
        let f = semiclassical_rhs(d, p);
        let mut out = Vec::with_capacity(2 * n + 1);
        for i in 0..n {
            let r = f[i] - C64::new(0.0, lambda) * d[i];
            out.push(r.re);
            out.push(r.im);
        }
        out.push(d[g].im);
        out
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut f = system(&d, lambda);
    let mut best = norm(&f);
    for _ in 0..opts.max_newton {
        if best <= opts.tol {
            break;
        }
        let core = real_jacobian(p, h, &d, lambda);
        let jac = Mat::<f64>::from_fn(2 * n + 1, 2 * n + 1, |r, c| {
            if r < 2 * n && c < 2 * n {
                core[(r, c)]
            } else if r < 2 * n {
                // dF/dλ = -i d
                if r % 2 == 0 { d[r / 2].im } else { -d[r / 2].re }
            } else if c == 2 * g + 1 {
                1.0
            } else {
                0.0
            }
        });
        let rhs = Mat::<f64>::from_fn(2 * n + 1, 1, |r, _| -f[r]);
        let step = jac.partial_piv_lu().solve(&rhs);
        if (0..2 * n + 1).any(|r| !step[(r, 0)].is_finite()) {
            break;
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<C64> = (0..n)
                .map(|i| d[i] + alpha * C64::new(step[(2 * i, 0)], step[(2 * i + 1, 0)]))
                .collect();
            let trial_lambda = lambda + alpha * step[(2 * n, 0)];
            let ft = system(&trial, trial_lambda);
            let nt = norm(&ft);
            if nt.is_finite() && nt < (1.0 - 1e-4 * alpha) * best {
                d = trial;
                lambda = trial_lambda;
                f = ft;
                best = nt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let amp = d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if best <= opts.tol && amp > 1e-6 * seed_norm.max(1e-300) {
        fix_gauge(&mut d);
        let res = cycle_residual(p, &d, lambda);
        Ok((d, lambda, res))
    } else {
        Err(Error::IterationLimit { what: "limit-cycle Newton", iterations: opts.max_newton, residual: best })
    }
}

/// Mean-field seed: the dressed edge mode scaled to `|d_0|² = s/U`, taken to
/// the `+J` gauge, with `λ = -E`.
fn mean_field_seed(p: &SSHParams, opts: &LimitCycleOptions) -> Option<(Vec<C64>, f64)> {
    if p.u <= 0.0 {
        return None;
    }
    let mf = mean_field_self_consistent(p, &opts.mean_field).ok()?;
    let amp = (mf.s / p.u).sqrt();
    let chiral = chiral_diagonal(p.n_sites);
    let d = mf.psi.iter().zip(&chiral).map(|(x, c)| C64::new(amp * x * c, 0.0)).collect();
    Some((d, -mf.energy))
}

/// Long-time integration result.
#[derive(Clone, Debug, Serialize)]
pub struct IntegrationEstimate {
    /// Frequency of the FFT peak of `v_0(t)` over the window.
    pub lambda: f64,
    /// State at the end of the window, gauge-fixed.
    pub d0: Vec<C64>,
    pub residual: f64,
    /// Largest change of any `|v_i|` across the window.
    pub amplitude_drift: f64,
}

/// Integrates for `settle_time + window` and reads the frequency off the FFT
/// of the first site over the window.
///
/// # Errors
/// [`Error::Unstable`] when `Σ|v|²` passes `amplitude_guard`.
pub fn integration_estimate(p: &SSHParams, v0: &[C64], opts: &LimitCycleOptions) -> Result<IntegrationEstimate> {
    let chunk = 50.0f64;
    let mut v = v0.to_vec();
    let mut t = 0.0;
    let guard = |v: &[C64], t: f64| -> Result<()> {
        let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if !(n2 <= opts.amplitude_guard) {
            return Err(Error::Unstable(format!("amplitude diverges: |v|^2 = {n2:e} at t = {t}")));
        }
        Ok(())
    };
    while t < opts.settle_time {
        let dt = chunk.min(opts.settle_time - t);
        v = integrate_ssh(p, &v, &[dt], &opts.ode)?.pop().unwrap_or(v);
        t += dt;
        guard(&v, t)?;
    }
    let m = (opts.window / opts.sample_dt).round().max(8.0) as usize;
    let times: Vec<f64> = (0..m).map(|k| k as f64 * opts.sample_dt).collect();
    let samples = integrate_ssh(p, &v, &times, &opts.ode)?;
    let last = samples.last().cloned().unwrap_or(v);
    guard(&last, t + opts.window)?;
    let signal: Vec<C64> = samples.iter().map(|s| s[0]).collect();
    let lambda = fft_frequency(&signal, opts.sample_dt);
    let amplitude_drift = samples
        .iter()
        .flat_map(|s| s.iter().zip(&last).map(|(a, b)| (a.norm() - b.norm()).abs()))
        .fold(0.0, f64::max);
    let mut d0 = last;
    fix_gauge(&mut d0);
    let residual = cycle_residual(p, &d0, lambda);
    Ok(IntegrationEstimate { lambda, d0, residual, amplitude_drift })
}

/// Angular frequency of the largest peak of a uniformly sampled complex
/// signal. A Hann window and fourfold zero padding are applied and the peak
/// is refined by a parabola through the log magnitudes of its neighbours.
pub fn fft_frequency(signal: &[C64], dt: f64) -> f64 {
    let m = signal.len();
    if m < 3 {
        return 0.0;
    }
    let len = (4 * m).next_power_of_two();
    let mut buf = vec![C64::new(0.0, 0.0); len];
    for (k, s) in signal.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * k as f64 / (m - 1) as f64).cos();
        buf[k] = s * w;
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf.iter().map(|z| z.norm().max(1e-300).ln()).collect();
    let k = (0..len).max_by(|&a, &b| mag[a].total_cmp(&mag[b])).unwrap_or(0);
    let (l, r) = (mag[(k + len - 1) % len], mag[(k + 1) % len]);
    let denom = l - 2.0 * mag[k] + r;
    let shift = if denom.abs() > 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
    let mut bin = k as f64 + shift;
    if bin > len as f64 / 2.0 {
        bin -= len as f64;
    }
    2.0 * PI * bin / (len as f64 * dt)
}

fn floquet(p: &SSHParams, h: &Mat<f64>, d0: &[C64], lambda: f64) -> Result<(Vec<C64>, bool)> {
    let jac = real_jacobian(p, h, d0, lambda);
    let mut ev = jac.eigenvalues().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    ev.sort_by(|a, b| b.re.total_cmp(&a.re));
    let scale = ev.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let neutral_ok = ev.first().is_some_and(|z| z.norm() < 1e-6 * scale);
    let stable = neutral_ok && ev.iter().skip(1).all(|z| z.re < 0.0);
    Ok((ev, stable))
}

/// Periodic orbit of the amplitude equations.
///
/// Newton starts from `init` (`(d0, λ)`) or from the dressed mean-field edge
/// mode. When that fails, the equations are integrated from the seed (or
/// from a weak zero mode) and the result is polished by Newton; if the polish
/// also fails, the integrated orbit is returned on its own provided its
/// residual is below `integration_tol`.
///
/// # Errors
/// [`Error::Unstable`] when the amplitudes diverge, [`Error::IterationLimit`]
/// with the best residual when nothing converges.
pub fn limit_cycle_solve(p: &SSHParams, init: Option<(&[C64], f64)>, opts: &LimitCycleOptions) -> Result<LimitCycle> {
    p.validate()?;
    let h = hopping(p)?;
    let seed = match init {
        Some((d, l)) => {
            if d.len() != p.n_sites {
                return Err(Error::LengthMismatch { expected: p.n_sites, got: d.len() });
            }
            Some((d.to_vec(), l))
        }
        None => mean_field_seed(p, opts),
    };
    let finish = |d0: Vec<C64>, lambda: f64, residual: f64, method| -> Result<LimitCycle> {
        let (floquet_exponents, stable) = floquet(p, &h, &d0, lambda)?;
        Ok(LimitCycle { d0, lambda, residual, method, floquet_exponents, stable })
    };
    if let Some((d, l)) = &seed {
        if let Ok((d0, lambda, res)) = newton(p, &h, d, *l, opts) {
            return finish(d0, lambda, res, LimitCycleMethod::Newton);
        }
    }
    let start = match &seed {
        Some((d, _)) => d.clone(),
        None => weak_zero_mode(p, 1e-3)?,
    };
    let est = integration_estimate(p, &start, opts)?;
    if let Ok((d0, lambda, res)) = newton(p, &h, &est.d0, est.lambda, opts) {
        return finish(d0, lambda, res, LimitCycleMethod::IntegrationNewton);
    }
    if est.residual <= opts.integration_tol {
        return finish(est.d0, est.lambda, est.residual, LimitCycleMethod::Integration);
    }
    Err(Error::IterationLimit { what: "limit cycle", iterations: opts.max_newton, residual: est.residual })
}

/// Linear zero mode in the `+J` gauge with `|v|² = amp²`.
pub fn weak_zero_mode(p: &SSHParams, amp: f64) -> Result<Vec<C64>> {
    let h = build_ssh(p)?;
    let z = super::mode_decomposition(&h.matrix, &h.chiral)?
        .zero_mode()
        .ok_or_else(|| Error::NoSolution("chain has no zero mode".into()))?;
    Ok(z.iter().zip(&h.chiral).map(|(x, c)| C64::new(amp * x * c, 0.0)).collect())
}

/// Eigenvalues of the monodromy matrix over one period, from the variational
/// equations integrated in the lab frame along `e^{iλt} d_0`.
pub fn monodromy_multipliers(p: &SSHParams, cycle: &LimitCycle, opts: &OdeOptions) -> Result<Vec<C64>> {
    let h = hopping(p)?;
    let n = p.n_sites;
    let dim = 2 * n;
    if cycle.lambda == 0.0 {
        return Err(Error::InvalidParameter("a stationary orbit has no period".into()));
    }
    let period = cycle.period();
    let mut y0 = pack(&cycle.d0);
    for r in 0..dim {
        for c in 0..dim {
            y0.push(if r == c { 1.0 } else { 0.0 });
        }
    }
    let mut v = vec![C64::new(0.0, 0.0); n];
    let mut dv = vec![C64::new(0.0, 0.0); n];
    let out = integrate(
        |_, y, dy| {
            for i in 0..n {
                v[i] = C64::new(y[2 * i], y[2 * i + 1]);
            }
            rhs_into(&v, p, &mut dv);
            for i in 0..n {
                dy[2 * i] = dv[i].re;
                dy[2 * i + 1] = dv[i].im;
            }
            let jac = real_jacobian(p, &h, &v, 0.0);
            let phi = &y[dim..];
            let dphi = &mut dy[dim..];
            for r in 0..dim {
                for c in 0..dim {
                    let mut acc = 0.0;
                    for k in 0..dim {
                        acc += jac[(r, k)] * phi[k * dim + c];
                    }
                    dphi[r * dim + c] = acc;
                }
            }
        },
        0.0,
        &y0,
        &[period],
        opts,
    )?;
    let y = &out[0];
    let m = Mat::<f64>::from_fn(dim, dim, |r, c| y[dim + r * dim + c]);
    let mut ev = m.eigenvalues().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s4() -> SSHParams {
        SSHParams::new(21, 1.0, -0.65, 0.001, 1.0, 0.2).unwrap()
    }

    #[test]
    fn zero_is_fixed_point_and_gauge_covariant() {
        let p = s4();
        let zero = vec![C64::new(0.0, 0.0); 21];
        assert!(semiclassical_rhs(&zero, &p).iter().all(|z| z.norm() == 0.0));
        let v: Vec<C64> = (0..21).map(|i| C64::new(0.1 * i as f64, 0.3 - 0.02 * i as f64)).collect();
        let phase = C64::from_polar(1.0, 0.7);
        let rotated: Vec<C64> = v.iter().map(|z| z * phase).collect();
        let a = semiclassical_rhs(&v, &p);
        let b = semiclassical_rhs(&rotated, &p);
        for (x, y) in a.iter().zip(&b) {
            assert!((x * phase - y).norm() < 1e-14);
        }
    }

    #[test]
    fn rhs_matches_dynamical_matrix() {
        let p = s4().with_gamma(0.05).unwrap();
        let v: Vec<C64> = (0..21).map(|i| C64::new((i as f64).sin(), (2.0 * i as f64).cos())).collect();
        let d = dynamical_matrix(&v, &p).unwrap();
        let f = semiclassical_rhs(&v, &p);
        for i in 0..21 {
            let dv: C64 = (0..21).map(|k| d[(i, k)] * v[k]).sum();
            assert!((dv - f[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn lossy_linear_chain_decays() {
        let p = SSHParams::new(5, 1.0, -0.3, 0.0, 1.0, 0.0).unwrap();
        let v0: Vec<C64> = (0..5).map(|i| C64::new(1.0, 0.1 * i as f64)).collect();
        let times: Vec<f64> = (1..40).map(|k| 0.25 * k as f64).collect();
        let out = integrate_ssh(&p, &v0, &times, &OdeOptions::default()).unwrap();
        let energies: Vec<f64> = out.iter().map(|v| v.iter().map(|z| z.norm_sqr()).sum()).collect();
        assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = SSHParams::new(5, 1.0, -0.3, 0.7, 1.0, 0.4).unwrap();
        let h = hopping(&p).unwrap();
        let v: Vec<C64> = (0..5).map(|i| C64::new(0.3 + 0.1 * i as f64, 0.2 - 0.05 * i as f64)).collect();
        let lambda = 0.37;
        let jac = real_jacobian(&p, &h, &v, lambda);
        let f = |v: &[C64]| {
            let r = semiclassical_rhs(v, &p);
            pack(&r.iter().zip(v).map(|(a, b)| a - C64::new(0.0, lambda) * b).collect::<Vec<_>>())
        };
        let eps = 1e-6;
        for c in 0..10 {
            let mut vp = pack(&v);
            let mut vm = pack(&v);
            vp[c] += eps;
            vm[c] -= eps;
            let (fp, fm) = (f(&unpack(&vp)), f(&unpack(&vm)));
            for r in 0..10 {
                let fd = (fp[r] - fm[r]) / (2.0 * eps);
                assert!((fd - jac[(r, c)]).abs() < 1e-8, "({r},{c}) {fd} vs {}", jac[(r, c)]);
            }
        }
    }

    #[test]
    fn fft_recovers_frequency() {
        let dt = 0.1;
        let w = -0.3217;
        let s: Vec<C64> = (0..5000).map(|k| C64::from_polar(2.0, w * k as f64 * dt)).collect();
        assert!((fft_frequency(&s, dt) - w).abs() < 1e-4);
    }

    #[test]
    fn newton_cycle_small_chain() {
        let p = SSHParams::new(7, 1.0, -0.5, 0.1, 0.5, 0.2).unwrap();
        let c = limit_cycle_solve(&p, None, &LimitCycleOptions::default()).unwrap();
        assert!(c.residual < 1e-8);
        assert!(c.d0[0].im.abs() < 1e-12 && c.d0[0].re > 0.0);
        assert!(c.stable, "{:?}", c.floquet_exponents);
        // The orbit e^{iλt} d0 solves the equations.
        let t = 1.3;
        let out = integrate_ssh(&p, &c.d0, &[t], &OdeOptions::default()).unwrap();
        let rot = C64::from_polar(1.0, c.lambda * t);
        for (x, d) in out[0].iter().zip(&c.d0) {
            assert!((x - d * rot).norm() < 1e-7);
        }
    }

    #[test]
    fn linear_chain_diverges() {
        let p = SSHParams::new(7, 1.0, -0.5, 0.0, 1.0, 0.5).unwrap();
        let r = limit_cycle_solve(&p, None, &LimitCycleOptions::default());
        assert!(matches!(r, Err(Error::Unstable(_))), "{r:?}");
    }
}
