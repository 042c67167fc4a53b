use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

const MAX_PERIODS: u32 = 20_000;

/// `∫_ℝ (sin x / x)^m dx` for even `m ≥ 2`.
///
/// Sums Gauss–Legendre over whole periods `[jπ, (j+1)π]` and closes with the
/// mean-value tail `mean(sin^m) L^{1−m}/(m−1)`; the oscillatory remainder is
/// `O(m L^{−m−1})` and `L` is chosen to push it below 1e-14 relative.
pub fn sinc_power_integral(m: u32) -> Result<f64> {
    if m < 2 || m % 2 == 1 {
        return Err(Error::InvalidParameter(format!("sinc power must be even and >= 2, got {m}")));
    }
    let mf = f64::from(m);
    let mean = (0..m / 2).fold(1.0, |acc, i| acc * f64::from(m - i) / f64::from(i + 1)) / 2f64.powi(m as i32);
    // the integral is at least 1 for every m >= 2
    let mut periods = 1;
    while periods < MAX_PERIODS && mf * (f64::from(periods) * PI).powf(-mf - 1.0) > 1e-14 {
        periods = (periods * 2).min(MAX_PERIODS);
    }
    let gl = GaussLegendre::thirty_two();
    let f = |x: f64| {
        if x.abs() < 1e-8 {
            1.0
        } else {
            (x.sin() / x).powi(m as i32)
        }
    };
    let pieces: Vec<f64> = (0..periods)
        .map(|j| gl.integrate(f64::from(j) * PI, f64::from(j + 1) * PI, f))
        .collect();
    // smallest contributions first
    let half: f64 = pieces.iter().rev().sum();
    let length = f64::from(periods) * PI;
    let tail = mean * length.powf(1.0 - mf) / (mf - 1.0);
    Ok(2.0 * (half + tail))
}

/// `C_{α,n}` making the Jackson kernel `sinc^{2n}(v / (2αn))` integrate to one in `v`.
pub fn jackson_normalization(alpha: f64, n: u32) -> Result<f64> {
    if !(alpha >= 1.0) || n < 1 {
        return Err(Error::InvalidParameter(format!(
            "Jackson kernel needs alpha >= 1 and n >= 1, got ({alpha}, {n})"
        )));
    }
    let scale = 2.0 * alpha * f64::from(n);
    Ok(1.0 / (scale * sinc_power_integral(2 * n)?))
}
