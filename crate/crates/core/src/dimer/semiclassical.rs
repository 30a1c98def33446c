//! Complex-amplitude equations of the dimer and their linear stability.

use std::fmt;
use std::str::FromStr;

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::DimerParams;
use crate::error::{Error, Result};
use crate::ode::{integrate, pack, unpack, OdeOptions};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SemiclassicalState {
    pub a: C64,
    pub b: C64,
}

impl SemiclassicalState {
    pub fn new(a: C64, b: C64) -> Self {
        Self { a, b }
    }

    pub fn density(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }

    pub fn rotate(&self, theta: f64) -> Self {
        let u = C64::from_polar(1.0, theta);
        Self { a: u * self.a, b: u * self.b }
    }

    fn to_real(self) -> [f64; 4] {
        [self.a.re, self.a.im, self.b.re, self.b.im]
    }

    fn from_real(y: &[f64]) -> Self {
        Self { a: C64::new(y[0], y[1]), b: C64::new(y[2], y[3]) }
    }
}

/// Which amplitude equations to use.
///
/// The hopping factor differs between the models on purpose: the plain
/// nonlinear-hop models use `1 + (|a|²+|b|²)/(2n*)`, while the detuned hop
/// model uses `1 + (|a|²+|b|²)/n*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SemiclassicalModel {
    /// Density-dependent hopping without the `(a*b + b*a)` cross term.
    NonlinearHop,
    /// Density-dependent hopping keeping the cross term from differentiating
    /// the classical Hamiltonian.
    NonlinearHopCross,
    /// Linear hopping with saturable gain `κ_b / (1 + |b|²/n*)`.
    GainSaturation,
    /// Nonlinear hopping `1 + n/n*` plus detuning `δ (|a|² - |b|²)`.
    DetunedHop,
    /// Saturable gain plus detuning.
    DetunedGainSaturation,
}

impl SemiclassicalModel {
    pub const ALL: [Self; 5] = [
        Self::NonlinearHop,
        Self::NonlinearHopCross,
        Self::GainSaturation,
        Self::DetunedHop,
        Self::DetunedGainSaturation,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Self::NonlinearHop => "nonlinear-hop",
            Self::NonlinearHopCross => "nonlinear-hop-cross",
            Self::GainSaturation => "gain-sat",
            Self::DetunedHop => "detuned-hop",
            Self::DetunedGainSaturation => "detuned-gain-sat",
        }
    }
}

impl fmt::Display for SemiclassicalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SemiclassicalModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown semiclassical model '{s}'")))
    }
}

pub fn semiclassical_rhs(s: &SemiclassicalState, p: &DimerParams, model: SemiclassicalModel) -> SemiclassicalState {
    let (a, b) = (s.a, s.b);
    let h = p.half_inv_n_star();
    let n = s.density();
    let ka = 0.5 * p.kappa_a;
    let kb = 0.5 * p.kappa_b;
    match model {
        SemiclassicalModel::NonlinearHop => {
            let jx = p.j * (1.0 + h * n);
            SemiclassicalState { a: -I * jx * b - ka * a, b: -I * jx * a + kb * b }
        }
        SemiclassicalModel::NonlinearHopCross => {
            let jx = p.j * (1.0 + h * n);
            let cross = p.j * h * (a.conj() * b + b.conj() * a);
            SemiclassicalState {
                a: -I * (jx * b + cross * a) - ka * a,
                b: -I * (jx * a + cross * b) + kb * b,
            }
        }
        SemiclassicalModel::DetunedHop => {
            let jx = p.j * (1.0 + 2.0 * h * n);
            SemiclassicalState {
                a: -I * (jx * b + p.delta * a) - ka * a,
                b: -I * (jx * a - p.delta * b) + kb * b,
            }
        }
        SemiclassicalModel::GainSaturation | SemiclassicalModel::DetunedGainSaturation => {
            let delta = if model == SemiclassicalModel::GainSaturation { 0.0 } else { p.delta };
            let sat = 1.0 / (1.0 + 2.0 * h * b.norm_sqr());
            SemiclassicalState {
                a: -I * (p.j * b + delta * a) - ka * a,
                b: -I * (p.j * a - delta * b) + kb * sat * b,
            }
        }
    }
}

pub fn integrate_semiclassical(
    p: &DimerParams,
    model: SemiclassicalModel,
    s0: &SemiclassicalState,
    t_out: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<SemiclassicalState>> {
    let y0 = pack(&[s0.a, s0.b]);
    let out = integrate(
        |_, y, dy| {
            let z = unpack(y);
            let d = semiclassical_rhs(&SemiclassicalState::new(z[0], z[1]), p, model);
            dy.copy_from_slice(&d.to_real());
        },
        0.0,
        &y0,
        t_out,
        opts,
    )?;
    Ok(out.iter().map(|y| SemiclassicalState::from_real(y)).collect())
}

/// Lasing fixed point of [`SemiclassicalModel::NonlinearHop`] with zero
/// global phase: `a = ρ_a`, `b = i ρ_b`, where
/// `ρ_a² = 2n* κ_b/(κ_a+κ_b) (√(κ_aκ_b)/(2J) - 1)` and `ρ_b²` has `κ_a` in
/// place of `κ_b`.
pub fn lasing_fixed_point(p: &DimerParams) -> Option<SemiclassicalState> {
    if !p.is_lasing() || p.j == 0.0 {
        return None;
    }
    let g = 2.0 * p.n_star * (p.threshold_scale() / (2.0 * p.j) - 1.0) / (p.kappa_a + p.kappa_b);
    Some(SemiclassicalState {
        a: C64::new((g * p.kappa_b).sqrt(), 0.0),
        b: C64::new(0.0, (g * p.kappa_a).sqrt()),
    })
}

/// Nonzero fixed point of [`SemiclassicalModel::GainSaturation`]:
/// `|a|²/n* = (κ_aκ_b - 4J²)/κ_a²`, `|b|²/n* = (κ_aκ_b - 4J²)/(4J²)`,
/// `b = i κ_a a / (2J)`.
pub fn gain_saturation_fixed_point(p: &DimerParams) -> Option<SemiclassicalState> {
    let excess = p.kappa_a * p.kappa_b - 4.0 * p.j * p.j;
    if !(excess > 0.0) || !p.n_star.is_finite() || p.j == 0.0 || p.kappa_a == 0.0 {
        return None;
    }
    let a = (p.n_star * excess).sqrt() / p.kappa_a;
    Some(SemiclassicalState { a: C64::new(a, 0.0), b: C64::new(0.0, p.kappa_a * a / (2.0 * p.j)) })
}

/// Real 4×4 Jacobian in `(Re a, Im a, Re b, Im b)` by Richardson-extrapolated
/// central differences (exact for the cubic models up to rounding).
fn real_jacobian(s: &SemiclassicalState, p: &DimerParams, model: SemiclassicalModel) -> Mat<f64> {
    let y = s.to_real();
    let scale = y.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let f = |y: &[f64; 4]| semiclassical_rhs(&SemiclassicalState::from_real(y), p, model).to_real();
    let diff = |k: usize, h: f64| {
        let mut yp = y;
        let mut ym = y;
        yp[k] += h;
        ym[k] -= h;
        let (fp, fm) = (f(&yp), f(&ym));
        std::array::from_fn::<f64, 4, _>(|i| (fp[i] - fm[i]) / (2.0 * h))
    };
    let h = 1e-3 * scale;
    let mut jac = Mat::zeros(4, 4);
    for k in 0..4 {
        let d1 = diff(k, h);
        let d2 = diff(k, 0.5 * h);
        for i in 0..4 {
            jac[(i, k)] = (4.0 * d2[i] - d1[i]) / 3.0;
        }
    }
    jac
}

fn sort_by_real(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    v
}

/// Eigenvalues of the linearization at `s`, sorted by real part.
pub fn jacobian_spectrum(s: &SemiclassicalState, p: &DimerParams, model: SemiclassicalModel) -> Result<Vec<C64>> {
    let jac = real_jacobian(s, p, model);
    let ev = jac.eigenvalues().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    Ok(sort_by_real(ev))
}

/// Numeric spectrum of the amplitude-fluctuation block at the lasing fixed
/// point, obtained by projecting the Jacobian onto the radial directions of
/// `a` and `b`. Phase fluctuations do not feed back into amplitudes at
/// linear order, so these are also eigenvalues of the full Jacobian.
pub fn density_block_spectrum(p: &DimerParams) -> Result<[C64; 2]> {
    let s = lasing_fixed_point(p)
        .ok_or_else(|| Error::InvalidParameter("no lasing fixed point for these parameters".into()))?;
    let jac = real_jacobian(&s, p, SemiclassicalModel::NonlinearHop);
    let ua = [s.a.re / s.a.norm(), s.a.im / s.a.norm(), 0.0, 0.0];
    let ub = [0.0, 0.0, s.b.re / s.b.norm(), s.b.im / s.b.norm()];
    let dirs = [ua, ub];
    let block = Mat::<f64>::from_fn(2, 2, |i, k| {
        let mut acc = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                acc += dirs[i][r] * jac[(r, c)] * dirs[k][c];
            }
        }
        acc
    });
    let ev = sort_by_real(block.eigenvalues().map_err(|e| Error::Linalg(format!("{e:?}")))?);
    Ok([ev[0], ev[1]])
}

/// Closed form of the amplitude-block eigenvalues,
/// `-(κ_a-κ_b)/4 · (1 ± √(1 + 16√(κ_aκ_b)(2J - √(κ_aκ_b))/(κ_a-κ_b)²))`.
///
/// The trace of the block is `-(κ_a-κ_b)/2` and its determinant is
/// `√(κ_aκ_b)(√(κ_aκ_b) - 2J)`, so both eigenvalues have negative real part
/// exactly when `2J < √(κ_aκ_b)` and `κ_a > κ_b`.
///
/// Returns `None` when `κ_a = κ_b` (the form is singular there) or when no
/// lasing fixed point exists.
pub fn density_block_closed_form(p: &DimerParams) -> Option<[C64; 2]> {
    if p.kappa_a == p.kappa_b || !p.is_lasing() {
        return None;
    }
    let s = p.threshold_scale();
    let dk = p.kappa_a - p.kappa_b;
    let root = C64::new(1.0 + 16.0 * s * (2.0 * p.j - s) / (dk * dk), 0.0).sqrt();
    let pre = -dk / 4.0;
    let v = sort_by_real(vec![pre * (1.0 + root), pre * (1.0 - root)]);
    Some([v[0], v[1]])
}

/// Linear dynamical matrix of the detuned models. For
/// [`SemiclassicalModel::DetunedHop`] `x` is the total density `n`; for
/// [`SemiclassicalModel::DetunedGainSaturation`] it is `|b|²`.
pub fn detuned_linear_matrix(p: &DimerParams, x: f64, model: SemiclassicalModel) -> Result<[[C64; 2]; 2]> {
    let h2 = 2.0 * p.half_inv_n_star();
    let (hop, gain) = match model {
        SemiclassicalModel::DetunedHop => (p.j * (1.0 + h2 * x), 0.5 * p.kappa_b),
        SemiclassicalModel::DetunedGainSaturation => (p.j, 0.5 * p.kappa_b / (1.0 + h2 * x)),
        other => return Err(Error::InvalidParameter(format!("{other} has no detuned linear matrix"))),
    };
    Ok([
        [-I * p.delta - 0.5 * p.kappa_a, -I * hop],
        [-I * hop, I * p.delta + gain],
    ])
}

fn eig2(m: &[[C64; 2]; 2]) -> Result<Vec<C64>> {
    let mat = Mat::<C64>::from_fn(2, 2, |i, j| m[i][j]);
    Ok(sort_by_real(mat.eigenvalues().map_err(|e| Error::Linalg(format!("{e:?}")))?))
}

/// Closed-form eigenvalues of the detuned hop matrix at density `n`,
/// `(κ_b-κ_a)/4 ± √((iδ + (κ_a+κ_b)/4)² - J²(1+n/n*)²)`, which for
/// `κ_a = κ_b = κ` is `±½√((κ + 2iδ)² - 4J²(1+n/n*)²)`.
pub fn detuned_hop_eigenvalues(p: &DimerParams, n: f64) -> [C64; 2] {
    let x = p.j * (1.0 + 2.0 * p.half_inv_n_star() * n);
    let c = I * p.delta + 0.25 * (p.kappa_a + p.kappa_b);
    let r = (c * c - x * x).sqrt();
    let m = C64::new(0.25 * (p.kappa_b - p.kappa_a), 0.0);
    let v = sort_by_real(vec![m - r, m + r]);
    [v[0], v[1]]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstabilityCertificate {
    /// Detuned hop model has an eigenvalue with positive real part at every sampled density.
    pub unstable_everywhere: bool,
    /// All sampled growth rates vanish to rounding (no loss or gain).
    pub marginal: bool,
    /// Density at which the largest growth rate is smallest.
    pub witness_n: f64,
    pub witness_growth: f64,
    /// A `|b|²` at which the detuned gain-saturation model is strictly stable.
    pub gain_sat_stabilizing_b2: Option<f64>,
    pub gain_sat_best_growth: f64,
    pub samples: usize,
}

/// Scans `max Re λ(n)` of the detuned hop model over `n ∈ [0, n_max]`
/// (zero plus a log grid) and checks whether saturable gain can stabilize
/// the same detuning.
pub fn instability_certificate(p: &DimerParams, n_max: f64, n_points: usize) -> Result<InstabilityCertificate> {
    if !(n_max > 0.0) {
        return Err(Error::InvalidParameter(format!("n_max must be > 0, got {n_max}")));
    }
    if p.delta == 0.0 || p.j == 0.0 {
        return Err(Error::InvalidParameter("certificate needs nonzero detuning and hopping".into()));
    }
    let grid = log_grid_with_zero(n_max, n_points.max(2));
    let tol = 1e-12 * (p.kappa_a + p.kappa_b + p.j + p.delta.abs());
    let mut witness = (f64::NAN, f64::INFINITY);
    let mut all_positive = true;
    let mut all_zero = true;
    for &n in &grid {
        let m = detuned_linear_matrix(p, n, SemiclassicalModel::DetunedHop)?;
        let growth = eig2(&m)?.last().map(|z| z.re).unwrap_or(f64::NAN);
        if growth < witness.1 {
            witness = (n, growth);
        }
        all_positive &= growth > tol;
        all_zero &= growth.abs() <= tol;
    }
    let mut best = (None, f64::INFINITY);
    if p.n_star.is_finite() {
        for &b2 in &log_grid_with_zero(1e6 * p.n_star, 400) {
            let m = detuned_linear_matrix(p, b2, SemiclassicalModel::DetunedGainSaturation)?;
            let growth = eig2(&m)?.last().map(|z| z.re).unwrap_or(f64::NAN);
            if growth < best.1 {
                best = (Some(b2), growth);
            }
        }
    }
    let stabilizing = if best.1 < -tol { best.0 } else { None };
    Ok(InstabilityCertificate {
        unstable_everywhere: all_positive,
        marginal: all_zero,
        witness_n: witness.0,
        witness_growth: witness.1,
        gain_sat_stabilizing_b2: stabilizing,
        gain_sat_best_growth: best.1,
        samples: grid.len(),
    })
}

fn log_grid_with_zero(max: f64, points: usize) -> Vec<f64> {
    let lo = (max * 1e-6).min(1e-3);
    let (l0, l1) = (lo.ln(), max.ln());
    std::iter::once(0.0)
        .chain((0..points - 1).map(|k| (l0 + (l1 - l0) * k as f64 / (points - 2).max(1) as f64).exp()))
        .collect()
}
