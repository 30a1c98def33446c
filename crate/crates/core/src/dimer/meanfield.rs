//! Gaussian-closure moment equations for `(n_a, n_b, c)`.
//!
//! The current is `c = i<a^dag b - b^dag a>`. With that sign the closed
//! equations read
//!
//! ```text
//! dn_a/dt = -J~ c - kappa_a n_a
//! dn_b/dt = +J~ c + kappa_b n_b + kappa_b
//! dc/dt   = 2 J~ (n_a - n_b) - (kappa_a - kappa_b)/2 c
//! ```
//!
//! with `J~ = J (1 + (n_a + n_b + 1/2) / n*)`. Detuning is not part of the
//! closure and is ignored here.

use serde::Serialize;

use super::DimerParams;
use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MeanFieldState {
    pub n_a: f64,
    pub n_b: f64,
    pub c: f64,
}

impl MeanFieldState {
    pub fn total(&self) -> f64 {
        self.n_a + self.n_b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    Lasing,
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanFieldSteadyState {
    pub branch: Branch,
    /// Total density of the amplitude-equation fixed point,
    /// `n = 2 n* (√(κ_a κ_b)/(2J) - 1)` on the lasing branch and 0 otherwise.
    pub density: f64,
    /// Stationary point of the closed moment equations, when one exists.
    /// Its total density exceeds `density` by the spontaneous-emission seed
    /// and by the Gaussian-closure correction.
    pub state: Option<MeanFieldState>,
    /// Linear stability of the selected branch of the amplitude equations.
    pub stable: bool,
}

/// `J~` evaluated at total density `n`.
pub fn effective_hopping(p: &DimerParams, n: f64) -> f64 {
    p.j * (1.0 + 2.0 * p.half_inv_n_star() * (n + 0.5))
}

pub fn mean_field_rhs(s: &MeanFieldState, p: &DimerParams) -> MeanFieldState {
    let jt = effective_hopping(p, s.total());
    MeanFieldState {
        n_a: -jt * s.c - p.kappa_a * s.n_a,
        n_b: jt * s.c + p.kappa_b * s.n_b + p.kappa_b,
        c: 2.0 * jt * (s.n_a - s.n_b) - 0.5 * (p.kappa_a - p.kappa_b) * s.c,
    }
}

/// Lasing-branch total density of the amplitude equations; 0 below threshold.
pub fn semiclassical_density(p: &DimerParams) -> f64 {
    if p.is_lasing() {
        2.0 * p.n_star * (p.threshold_scale() / (2.0 * p.j) - 1.0)
    } else {
        0.0
    }
}

pub fn integrate_mean_field(
    p: &DimerParams,
    s0: &MeanFieldState,
    t_out: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<MeanFieldState>> {
    let y0 = [s0.n_a, s0.n_b, s0.c];
    let out = integrate(
        |_, y, dy| {
            let d = mean_field_rhs(&MeanFieldState { n_a: y[0], n_b: y[1], c: y[2] }, p);
            dy[0] = d.n_a;
            dy[1] = d.n_b;
            dy[2] = d.c;
        },
        0.0,
        &y0,
        t_out,
        opts,
    )?;
    Ok(out.into_iter().map(|y| MeanFieldState { n_a: y[0], n_b: y[1], c: y[2] }).collect())
}

/// Branch selection plus the stationary point of the closed equations.
///
/// # Errors
/// [`Error::Unstable`] when gain is present but nothing bounds it: `J = 0`,
/// or the linear dimer (`n* = ∞`) below the hopping threshold.
pub fn mean_field_steady_state(p: &DimerParams) -> Result<MeanFieldSteadyState> {
    p.validate()?;
    let s = p.threshold_scale();
    if p.kappa_b > 0.0 && (p.j == 0.0 || (!p.n_star.is_finite() && 2.0 * p.j < s)) {
        return Err(Error::Unstable("gain is not bounded by any hopping nonlinearity".into()));
    }
    let (branch, stable) = if p.is_lasing() {
        (Branch::Lasing, p.kappa_a > p.kappa_b)
    } else {
        // Origin of the linear amplitude equations: trace (κ_b - κ_a)/2, determinant J² - κ_aκ_b/4.
        (Branch::Trivial, p.kappa_a > p.kappa_b && 4.0 * p.j * p.j > p.kappa_a * p.kappa_b)
    };
    Ok(MeanFieldSteadyState {
        branch,
        density: semiclassical_density(p),
        state: closure_fixed_point(p),
        stable,
    })
}

/// Stationarity of the closed equations reduces to one equation in the total
/// density `n`: with `K = J~(n)`,
/// `n_a = 4K²κ_b / ((κ_a - κ_b)(4K² - κ_aκ_b))` and `n = n_a(1 + κ_a/κ_b) - 1`.
/// The residual is strictly decreasing on the admissible interval, so the
/// root is unique and bisection finds it.
fn closure_fixed_point(p: &DimerParams) -> Option<MeanFieldState> {
    let (ka, kb) = (p.kappa_a, p.kappa_b);
    if kb == 0.0 {
        return Some(MeanFieldState::default());
    }
    if ka <= kb || p.j == 0.0 {
        return None;
    }
    let n_a_of = |n: f64| {
        let k = effective_hopping(p, n);
        let k2 = 4.0 * k * k;
        k2 * kb / ((ka - kb) * (k2 - ka * kb))
    };
    let residual = |n: f64| {
        let na = n_a_of(n);
        if na.is_finite() && na > 0.0 { na * (1.0 + ka / kb) - 1.0 - n } else { f64::INFINITY }
    };
    let h = p.half_inv_n_star();
    let n = if h == 0.0 {
        if 4.0 * p.j * p.j <= ka * kb {
            return None;
        }
        n_a_of(0.0) * (1.0 + ka / kb) - 1.0
    } else {
        // 4K² = κ_aκ_b at K = √(κ_aκ_b)/2.
        let n_pole = (p.threshold_scale() / (2.0 * p.j) - 1.0) / (2.0 * h) - 0.5;
        let mut lo = n_pole.max(0.0);
        let mut hi = lo.max(1.0);
        while residual(hi) > 0.0 {
            hi *= 2.0;
            if hi > 1e300 {
                return None;
            }
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if residual(mid) > 0.0 { lo = mid } else { hi = mid }
        }
        0.5 * (lo + hi)
    };
    let n_a = n_a_of(n);
    let n_b = ka * n_a / kb - 1.0;
    let c = -ka * n_a / effective_hopping(p, n);
    Some(MeanFieldState { n_a, n_b, c })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(j: f64, ka: f64, kb: f64, ns: f64) -> DimerParams {
        DimerParams::new(j, ka, kb, ns).unwrap()
    }

    #[test]
    fn seed_term_from_vacuum() {
        let d = mean_field_rhs(&MeanFieldState::default(), &p(1.0, 4.0, 1.5, 5.0));
        assert_eq!((d.n_a, d.n_b, d.c), (0.0, 1.5, 0.0));
    }

    #[test]
    fn analytic_density() {
        let ss = mean_field_steady_state(&p(1.0, 4.0, 1.5, 5.0)).unwrap();
        assert_eq!(ss.branch, Branch::Lasing);
        assert!((ss.density - 2.2474487139158905).abs() < 1e-12);
        assert!(ss.stable);
    }

    #[test]
    fn closure_root_is_stationary() {
        for params in [p(1.0, 4.0, 1.5, 5.0), p(2.0, 4.0, 1.5, 5.0), p(0.3, 2.0, 0.5, 50.0)] {
            let s = mean_field_steady_state(&params).unwrap().state.unwrap();
            let d = mean_field_rhs(&s, &params);
            let scale = 1.0 + s.total();
            assert!(d.n_a.abs().max(d.n_b.abs()).max(d.c.abs()) < 1e-12 * scale * 10.0, "{d:?}");
            assert!(s.n_a >= 0.0 && s.n_b >= 0.0);
        }
    }

    #[test]
    fn above_threshold_gives_trivial_branch() {
        let ss = mean_field_steady_state(&p(1.5, 4.0, 1.5, 5.0)).unwrap();
        assert_eq!(ss.branch, Branch::Trivial);
        assert_eq!(ss.density, 0.0);
        assert!(ss.stable);
        let far = mean_field_steady_state(&p(20.0, 4.0, 1.5, 5.0)).unwrap();
        assert!(far.state.unwrap().total() < 2.0);
    }

    #[test]
    fn no_pump_gives_vacuum() {
        let ss = mean_field_steady_state(&p(1.0, 4.0, 0.0, 5.0)).unwrap();
        assert_eq!(ss.state.unwrap(), MeanFieldState::default());
        assert_eq!(ss.density, 0.0);
    }

    #[test]
    fn unbounded_gain_is_an_error() {
        assert!(mean_field_steady_state(&p(0.0, 4.0, 1.5, 5.0)).is_err());
        assert!(mean_field_steady_state(&p(0.5, 4.0, 1.5, f64::INFINITY)).is_err());
    }

    #[test]
    fn linear_limit_rhs() {
        let lin = p(0.7, 2.0, 1.0, f64::INFINITY);
        let s = MeanFieldState { n_a: 1.0, n_b: 2.0, c: 0.5 };
        let d = mean_field_rhs(&s, &lin);
        assert!((d.n_a - (-0.7 * 0.5 - 2.0)).abs() < 1e-15);
        assert!((d.c - (2.0 * 0.7 * -1.0 - 0.25)).abs() < 1e-15);
    }
}
