//! Adaptive Dormand–Prince 5(4) integration of real ODE systems.
//!
//! Complex state vectors are packed as interleaved `[re0, im0, re1, im1, ...]`
//! by the callers; see [`pack`] and [`unpack`].

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; `None` picks one from the first derivative.
    pub h0: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h0: None,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Differences between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` and returns the state at every time in
/// `t_out` (which must be non-decreasing and start at or after `t0`).
///
/// Steps are clipped to land exactly on the output times. A non-finite state
/// is reported as [`Error::Unstable`].
pub fn integrate<F>(mut f: F, t0: f64, y0: &[f64], t_out: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if t_out.first().is_some_and(|&t| t < t0) || t_out.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("output times must be non-decreasing from t0".into()));
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    f(t, &y, &mut k[0]);
    let mut h = opts.h0.unwrap_or_else(|| {
        let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
        let rate = k[0].iter().map(|v| v.abs()).fold(0.0, f64::max);
        if rate > 0.0 { 0.01 * scale / rate } else { 1e-2 }
    });
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(t_out.len());

    for &target in t_out {
        while t < target {
            if steps >= opts.max_steps {
                return Err(Error::IterationLimit { what: "ode steps", iterations: steps, residual: target - t });
            }
            h = h.min(opts.h_max);
            let last = t + h >= target;
            let hs = if last { target - t } else { h };

            stage(&y, hs, &[(A21, &k[0])], &mut tmp);
            f(t + C2 * hs, &tmp, &mut k[1]);
            stage(&y, hs, &[(A31, &k[0]), (A32, &k[1])], &mut tmp);
            f(t + C3 * hs, &tmp, &mut k[2]);
            stage(&y, hs, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])], &mut tmp);
            f(t + C4 * hs, &tmp, &mut k[3]);
            stage(&y, hs, &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])], &mut tmp);
            f(t + C5 * hs, &tmp, &mut k[4]);
            stage(&y, hs, &[(A61, &k[0]), (A62, &k[1]), (A63, &k[2]), (A64, &k[3]), (A65, &k[4])], &mut tmp);
            f(t + hs, &tmp, &mut k[5]);
            stage(&y, hs, &[(B1, &k[0]), (B3, &k[2]), (B4, &k[3]), (B5, &k[4]), (B6, &k[5])], &mut y5);
            f(t + hs, &y5, &mut k[6]);

            let mut err = 0.0;
            for i in 0..n {
                let e = hs
                    * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
                let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / n.max(1) as f64).sqrt();
            if !err.is_finite() {
                if hs <= opts.h_min {
                    return Err(Error::Unstable(format!("non-finite state near t = {t}")));
                }
                h = hs * 0.1;
                continue;
            }
            steps += 1;
            if err <= 1.0 {
                t = if last { target } else { t + hs };
                std::mem::swap(&mut y, &mut y5);
                k.swap(0, 6);
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Unstable(format!("non-finite state at t = {t}")));
                }
            } else if hs <= opts.h_min {
                return Err(Error::StepUnderflow { t });
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // A clipped final step says nothing about the natural step size.
            if !(last && err <= 1.0) {
                h = (hs * factor).max(opts.h_min);
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn stage(y: &[f64], h: f64, terms: &[(f64, &Vec<f64>)], out: &mut [f64]) {
    for i in 0..y.len() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

/// Interleaves real and imaginary parts.
pub fn pack(z: &[C64]) -> Vec<f64> {
    z.iter().flat_map(|v| [v.re, v.im]).collect()
}

pub fn unpack(y: &[f64]) -> Vec<C64> {
    y.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect()
}
