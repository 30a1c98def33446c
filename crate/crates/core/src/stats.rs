//! Small fitting helpers shared by the scans.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residuals (zero for two points).
    pub slope_stderr: f64,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), got: y.len() });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidParameter("a fit needs at least two points".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
        (ss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LinearFit { slope, intercept, slope_stderr })
}

/// Fit of `ln y` against `ln x`; every entry must be positive.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Bootstrap standard error of `statistic` over resamples of `samples`.
pub fn bootstrap_stderr<T, F>(samples: &[T], resamples: usize, seed: u64, statistic: F) -> f64
where
    T: Clone,
    F: Fn(&[T]) -> f64,
{
    if samples.is_empty() || resamples < 2 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = Vec::with_capacity(samples.len());
    let values: Vec<f64> = (0..resamples)
        .map(|_| {
            buf.clear();
            for _ in 0..samples.len() {
                buf.push(samples[rng.gen_range(0..samples.len())].clone());
            }
            statistic(&buf)
        })
        .collect();
    let m = values.iter().sum::<f64>() / resamples as f64;
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (resamples as f64 - 1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-14);
        assert!(f.slope_stderr < 1e-12);
    }

    #[test]
    fn power_law() {
        let x = [1.0, 10.0, 100.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
        assert!((log_log_fit(&x, &y).unwrap().slope + 1.5).abs() < 1e-12);
        assert!(log_log_fit(&[1.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn bootstrap_of_mean() {
        let s: Vec<f64> = (0..400).map(|i| (i % 2) as f64).collect();
        let se = bootstrap_stderr(&s, 200, 1, |v| v.iter().sum::<f64>() / v.len() as f64);
        assert!((se - 0.025).abs() < 0.008, "{se}");
    }
}
