//! Kernel families, the averaged-kernel construction and kernel Mellin derivatives.
//!
//! Kernels are evaluated in the log-coordinate: `eval_log(v)` is `χ(e^v)` and
//! `theta_log(v)` is `(θχ)(e^v) = d/dv χ(e^v)`.

mod descriptor;
mod jackson;
mod moments;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mellin::{log_derivative_fd, LogDomain, LogFn, PositiveReal};
use crate::quadrature::GaussLegendre;

pub use descriptor::KernelDescriptor;
pub use jackson::{jackson_normalization, sinc_power_integral};
pub(crate) use moments::index_range;
pub use moments::{
    absolute_moment, certify_kernel, chi4_tail, moment, AbsoluteMoment, CertifyOptions, MomentReport,
    ABS_MOMENT_RADIUS_CAP,
};

/// Default tail tolerance for series over decaying kernels.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

/// Upper bound on retained series terms per evaluation.
pub const DEFAULT_MAX_TERMS: u64 = 10_000_000;

/// Series truncation policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Finite sum over the compact log-support.
    ExactCompact,
    /// Drop terms whose rigorous envelope tail is below ε.
    TailTolerance(f64),
}

/// Algebraic decay envelope `|χ(e^v)| ≤ amplitude · (|v| − offset)^{−exponent}`,
/// valid for `|v| − offset ≥ min_radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decay {
    pub amplitude: f64,
    pub exponent: f64,
    pub offset: f64,
    pub min_radius: f64,
}

impl Decay {
    fn effective(&self, weight: f64) -> Result<(f64, f64)> {
        let q = self.exponent - weight;
        if !(q > 1.0) {
            return Err(Error::ConditionViolation(format!(
                "series with weight |k − log u|^{weight} is not summable for decay exponent {}",
                self.exponent
            )));
        }
        // (y + offset)^weight ≤ (2y)^weight once y ≥ offset
        let amplitude = if self.offset > 0.0 && weight > 0.0 {
            self.amplitude * 2f64.powf(weight)
        } else {
            self.amplitude
        };
        Ok((amplitude, q))
    }

    /// Radius beyond which the two-sided weighted tail is below `eps`.
    pub fn radius(&self, eps: f64, weight: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("tail tolerance must be positive, got {eps}")));
        }
        let (a, q) = self.effective(weight)?;
        let r_terms = (4.0 * a / eps).powf(1.0 / q);
        let r_integral = (4.0 * a / ((q - 1.0) * eps)).powf(1.0 / (q - 1.0));
        let r = r_terms.max(r_integral).max(self.min_radius).max(self.offset);
        Ok(r + self.offset)
    }

    /// Upper bound of `Σ_{|c−k| > radius} |χ(e^{c−k})| |c − k|^weight`, uniformly in `c`.
    pub fn tail_bound(&self, radius: f64, weight: f64) -> Result<f64> {
        let (a, q) = self.effective(weight)?;
        let y = radius - self.offset;
        if !(y > 0.0) || y < self.min_radius || (self.offset > 0.0 && weight > 0.0 && y < self.offset) {
            return Ok(f64::INFINITY);
        }
        Ok(2.0 * a * (y.powf(-q) + y.powf(1.0 - q) / (q - 1.0)))
    }
}

/// A user-supplied kernel in log-coordinate form.
#[derive(Clone)]
pub struct CustomKernel {
    pub name: String,
    eval: LogFn,
    theta: Option<LogFn>,
}

/// Kernel family with its parameters.
#[derive(Clone)]
pub enum KernelFamily {
    BSpline { order: u32 },
    Jackson { alpha: f64, n: u32 },
    Averaged(Box<KernelSpec>),
    Custom(CustomKernel),
}

/// A kernel instance with support/decay metadata and precomputed constants.
#[derive(Clone)]
pub struct KernelSpec {
    family: KernelFamily,
    log_support: Option<f64>,
    decay: Option<Decay>,
    theta_decay: Option<Decay>,
    normalization: Option<f64>,
    knots: Vec<f64>,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("family", &self.to_string())
            .field("log_support", &self.log_support)
            .field("decay", &self.decay)
            .field("normalization", &self.normalization)
            .finish()
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            KernelFamily::BSpline { order } => write!(f, "BSpline({order})"),
            KernelFamily::Jackson { alpha, n } => write!(f, "Jackson({alpha}, {n})"),
            KernelFamily::Averaged(inner) => write!(f, "Averaged({inner})"),
            KernelFamily::Custom(c) => write!(f, "Custom({})", c.name),
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * f64::from(i))
}

/// `(x)_+^p` with the right-continuous convention `(x)_+^0 = [x ≥ 0]`.
fn truncated_power(x: f64, p: u32) -> f64 {
    if x < 0.0 {
        0.0
    } else if p == 0 {
        1.0
    } else {
        x.powi(p as i32)
    }
}

fn bspline_value(order: u32, v: f64) -> f64 {
    let half = f64::from(order) / 2.0;
    if order == 1 {
        return truncated_power(v + 0.5, 0) - truncated_power(v - 0.5, 0);
    }
    // continuous and even: evaluate at −|v| so only the leading truncated powers survive
    let x = -v.abs();
    if x <= -half {
        return 0.0;
    }
    let mut sum = 0.0;
    for j in 0..=order {
        let arg = half + x - f64::from(j);
        if arg <= 0.0 {
            break;
        }
        let term = binomial(order, j) * arg.powi(order as i32 - 1);
        sum += if j % 2 == 0 { term } else { -term };
    }
    sum / factorial(order - 1)
}

fn bspline_theta(order: u32, v: f64) -> f64 {
    if order == 1 {
        return 0.0;
    }
    let half = f64::from(order) / 2.0;
    if v >= half || v < -half {
        return 0.0;
    }
    let mut sum = 0.0;
    for j in 0..=order {
        let term = binomial(order, j) * truncated_power(half + v - f64::from(j), order - 2);
        sum += if j % 2 == 0 { term } else { -term };
    }
    sum / factorial(order - 2)
}

/// `sin(x)/x` and its derivative, with series near zero.
fn sinc_unnormalized(x: f64) -> (f64, f64) {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        (1.0 - x2 / 6.0 + x2 * x2 / 120.0, -x / 3.0 + x * x2 / 30.0)
    } else {
        let (s, c) = x.sin_cos();
        (s / x, (x * c - s) / (x * x))
    }
}

fn jackson_rate(alpha: f64, n: u32) -> f64 {
    1.0 / (2.0 * alpha * f64::from(n))
}

impl KernelSpec {
    /// Mellin B-spline of order `n ≥ 1`, log-support `n/2`.
    pub fn bspline(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("B-spline order must be >= 1".into()));
        }
        let half = f64::from(order) / 2.0;
        Ok(Self {
            family: KernelFamily::BSpline { order },
            log_support: Some(half),
            decay: None,
            theta_decay: None,
            normalization: None,
            knots: (0..=order).map(|j| f64::from(j) - half).collect(),
        })
    }

    /// Mellin–Jackson kernel `C_{α,n} sinc^{2n}(log x / (2αnπ))` at `c = 0`.
    pub fn jackson(alpha: f64, n: u32) -> Result<Self> {
        if !(alpha >= 1.0) || !alpha.is_finite() || n < 1 {
            return Err(Error::InvalidParameter(format!(
                "Jackson kernel needs alpha >= 1 and n >= 1, got ({alpha}, {n})"
            )));
        }
        let c = jackson_normalization(alpha, n)?;
        let scale = 2.0 * alpha * f64::from(n);
        let p = 2.0 * f64::from(n);
        let min_radius = scale * std::f64::consts::PI;
        Ok(Self {
            family: KernelFamily::Jackson { alpha, n },
            log_support: None,
            decay: Some(Decay {
                amplitude: c * scale.powf(p),
                exponent: p,
                offset: 0.0,
                min_radius,
            }),
            // |θJ| ≤ C·2n·scale^{2n−1}(1 + scale/|v|)|v|^{−2n} ≤ 2·C·2n·scale^{2n−1}|v|^{−2n} for |v| ≥ scale
            theta_decay: Some(Decay {
                amplitude: 2.0 * c * p * scale.powf(p - 1.0),
                exponent: p,
                offset: 0.0,
                min_radius,
            }),
            normalization: Some(c),
            knots: Vec::new(),
        })
    }

    /// The averaged kernel `χ̄(t) = ∫_{−1/2}^{1/2} χ(t e^p) dp`.
    pub fn averaged(inner: KernelSpec) -> Self {
        let mut knots: Vec<f64> = inner.knots.iter().flat_map(|&k| [k - 0.5, k + 0.5]).collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let shift = |d: Option<Decay>, factor: f64| {
            d.map(|d| Decay {
                amplitude: d.amplitude * factor,
                offset: d.offset + 0.5,
                ..d
            })
        };
        Self {
            log_support: inner.log_support.map(|s| s + 0.5),
            decay: shift(inner.decay, 1.0),
            theta_decay: shift(inner.decay, 2.0),
            normalization: inner.normalization,
            knots,
            family: KernelFamily::Averaged(Box::new(inner)),
        }
    }

    /// A custom kernel from its log-coordinate form.
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        log_support: Option<f64>,
        decay: Option<Decay>,
    ) -> Self {
        Self {
            family: KernelFamily::Custom(CustomKernel {
                name: name.into(),
                eval: Arc::new(eval),
                theta: None,
            }),
            log_support,
            decay,
            theta_decay: None,
            normalization: None,
            knots: Vec::new(),
        }
    }

    /// Attaches an analytic θ to a custom kernel.
    pub fn with_theta(
        mut self,
        theta: impl Fn(f64) -> f64 + Send + Sync + 'static,
        theta_decay: Option<Decay>,
    ) -> Self {
        if let KernelFamily::Custom(c) = &mut self.family {
            c.theta = Some(Arc::new(theta));
            self.theta_decay = theta_decay;
        }
        self
    }

    pub fn with_knots(mut self, knots: Vec<f64>) -> Self {
        self.knots = knots;
        self
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn log_support(&self) -> Option<f64> {
        self.log_support
    }

    pub fn decay(&self) -> Option<Decay> {
        self.decay
    }

    pub fn decay_exponent(&self) -> Option<f64> {
        self.decay.map(|d| d.exponent)
    }

    pub fn normalization(&self) -> Option<f64> {
        self.normalization
    }

    /// Log-coordinates where the kernel is not smooth.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn is_compact(&self) -> bool {
        self.log_support.is_some()
    }

    /// `χ(t)`.
    pub fn eval(&self, t: PositiveReal) -> f64 {
        self.eval_log(t.ln())
    }

    /// `χ(e^v)`.
    pub fn eval_log(&self, v: f64) -> f64 {
        match &self.family {
            KernelFamily::BSpline { order } => bspline_value(*order, v),
            KernelFamily::Jackson { alpha, n } => {
                let c = self.normalization.unwrap_or(1.0);
                let (s, _) = sinc_unnormalized(jackson_rate(*alpha, *n) * v);
                c * s.powi(2 * *n as i32)
            }
            KernelFamily::Averaged(inner) => averaged_value(inner, v),
            KernelFamily::Custom(c) => (c.eval)(v),
        }
    }

    /// `(θχ)(t) = t χ'(t)`.
    pub fn theta(&self, t: PositiveReal) -> f64 {
        self.theta_log(t.ln())
    }

    /// `(θχ)(e^v)`; right limits at B-spline knots.
    pub fn theta_log(&self, v: f64) -> f64 {
        match &self.family {
            KernelFamily::BSpline { order } => bspline_theta(*order, v),
            KernelFamily::Jackson { alpha, n } => {
                let c = self.normalization.unwrap_or(1.0);
                let rho = jackson_rate(*alpha, *n);
                let (s, ds) = sinc_unnormalized(rho * v);
                let two_n = 2 * *n as i32;
                c * f64::from(two_n) * s.powi(two_n - 1) * ds * rho
            }
            KernelFamily::Averaged(inner) => theta_averaged(inner, v),
            KernelFamily::Custom(c) => match &c.theta {
                Some(theta) => theta(v),
                None => log_derivative_fd(|x| Ok((c.eval)(x)), v, 1).unwrap_or(f64::NAN),
            },
        }
    }

    /// θχ as a kernel in its own right (for moments of θχ).
    pub fn theta_kernel(&self) -> KernelSpec {
        let source = self.clone();
        Self {
            family: KernelFamily::Custom(CustomKernel {
                name: format!("theta[{self}]"),
                eval: Arc::new(move |v| source.theta_log(v)),
                theta: None,
            }),
            log_support: self.log_support,
            decay: self.theta_decay,
            theta_decay: None,
            normalization: None,
            knots: self.knots.clone(),
        }
    }

    /// Series radius (in index units) for the given policy and sample growth weight.
    pub fn truncation_radius(&self, truncation: Truncation, weight: f64) -> Result<f64> {
        radius_for(self.log_support, self.decay, truncation, weight, &self.to_string())
    }

    /// Series radius for sums over θχ.
    pub fn theta_truncation_radius(&self, truncation: Truncation, weight: f64) -> Result<f64> {
        radius_for(self.log_support, self.theta_decay, truncation, weight, &self.to_string())
    }

    /// Averaged-kernel identity `θχ̄(t) = χ(t e^{1/2}) − χ(t e^{−1/2})` for this kernel as inner.
    pub fn theta_averaged(&self, t: PositiveReal) -> f64 {
        theta_averaged(self, t.ln())
    }
}

fn radius_for(
    support: Option<f64>,
    decay: Option<Decay>,
    truncation: Truncation,
    weight: f64,
    name: &str,
) -> Result<f64> {
    if let Some(s) = support {
        return Ok(s);
    }
    let decay = decay.ok_or_else(|| {
        Error::InvalidParameter(format!("{name} has neither compact support nor a decay envelope"))
    })?;
    match truncation {
        Truncation::TailTolerance(eps) => decay.radius(eps, weight),
        Truncation::ExactCompact => Err(Error::InvalidParameter(format!(
            "{name} is not compactly supported; use a tail-tolerance truncation"
        ))),
    }
}

fn averaged_value(inner: &KernelSpec, v: f64) -> f64 {
    if let Some(s) = inner.log_support {
        if v.abs() >= s + 0.5 {
            return 0.0;
        }
    }
    let mut breaks: Vec<f64> = inner
        .knots
        .iter()
        .map(|k| k - v)
        .filter(|&p| p > -0.5 && p < 0.5)
        .collect();
    breaks.sort_by(f64::total_cmp);
    GaussLegendre::thirty_two().integrate_pieces(-0.5, 0.5, &breaks, |p| inner.eval_log(v + p))
}

fn theta_averaged(inner: &KernelSpec, v: f64) -> f64 {
    inner.eval_log(v + 0.5) - inner.eval_log(v - 0.5)
}

impl LogDomain for KernelSpec {
    fn value_at_log(&self, v: f64) -> f64 {
        self.eval_log(v)
    }

    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.knots.iter().copied().filter(|&k| k > lo && k < hi).collect()
    }
}

/// Convenience: `KernelSpec::averaged(k.clone())`.
pub fn averaged_kernel(k: &KernelSpec) -> KernelSpec {
    KernelSpec::averaged(k.clone())
}

/// `θχ̄` via the exact two-point identity.
pub fn theta_averaged_kernel(inner: &KernelSpec, t: PositiveReal) -> f64 {
    inner.theta_averaged(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: u32) -> KernelSpec {
        KernelSpec::bspline(n).unwrap()
    }

    /// Independent oracle: B_n by repeated convolution of the unit box, evaluated
    /// through the de Boor-style recursion B_n(x) = ((n/2 + x) B_{n−1}(x + 1/2) + (n/2 − x) B_{n−1}(x − 1/2)) / (n − 1).
    fn bspline_recursive(n: u32, x: f64) -> f64 {
        if n == 1 {
            return if (-0.5..0.5).contains(&x) { 1.0 } else { 0.0 };
        }
        let h = f64::from(n) / 2.0;
        ((h + x) * bspline_recursive(n - 1, x + 0.5) + (h - x) * bspline_recursive(n - 1, x - 0.5))
            / f64::from(n - 1)
    }

    #[test]
    fn bspline_examples() {
        let k = b(3);
        assert_eq!(k.eval(PositiveReal::one()), 0.75);
        assert_eq!(k.eval_log(1.5), 0.0);
        assert!((k.eval_log(0.5) - 0.5).abs() < 1e-15);
        assert!((k.eval_log(1.0) - 0.125).abs() < 1e-15);
        assert!((k.eval_log(-0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bspline_matches_recursive_oracle() {
        for n in 1..=6 {
            for i in 0..=700 {
                let x = -3.5 + 0.01 * i as f64 + 1e-9;
                let got = b(n).eval_log(x);
                let want = bspline_recursive(n, x);
                assert!((got - want).abs() < 1e-13, "n={n} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn bspline_outer_pieces_are_nonnegative() {
        // the outer pieces are +½(3/2 ∓ log x)², not −½(…)²
        let k = b(3);
        for i in 0..100 {
            let v = 0.5 + i as f64 / 100.0;
            let want = 0.5 * (1.5 - v) * (1.5 - v);
            assert!((k.eval_log(v) - want).abs() < 1e-15);
            assert!((k.eval_log(-v) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn bspline_theta_examples() {
        let k = b(3);
        assert_eq!(k.theta(PositiveReal::one()), 0.0);
        assert!((k.theta_log(-1.0) - 0.5).abs() < 1e-15);
        assert!((k.theta_log(1.0) + 0.5).abs() < 1e-15);
        assert!((b(2).theta_log(0.5) + 1.0).abs() < 1e-15);
        // right limits at the hat's knots
        assert_eq!(b(2).theta_log(0.0), -1.0);
        assert_eq!(b(2).theta_log(-1.0), 1.0);
        assert_eq!(b(2).theta_log(1.0), 0.0);
    }

    #[test]
    fn bspline_theta_matches_finite_differences() {
        for n in 2..=5 {
            let k = b(n);
            for i in 0..200 {
                let v = -3.0 + 0.0301 * i as f64;
                if k.knots().iter().any(|kn| (kn - v).abs() < 1e-3) {
                    continue;
                }
                let fd = log_derivative_fd(|x| Ok(k.eval_log(x)), v, 1).unwrap();
                assert!((fd - k.theta_log(v)).abs() < 1e-8, "n={n} v={v}");
            }
        }
    }

    #[test]
    fn bspline_rejects_order_zero() {
        assert!(KernelSpec::bspline(0).is_err());
    }

    #[test]
    fn jackson_examples() {
        let j = KernelSpec::jackson(1.0, 2).unwrap();
        let c = j.normalization().unwrap();
        assert_eq!(j.eval(PositiveReal::one()), c);
        assert_eq!(j.decay_exponent(), Some(4.0));
        assert!(KernelSpec::jackson(0.5, 2).is_err());
        assert!(KernelSpec::jackson(1.0, 0).is_err());
    }

    #[test]
    fn jackson_theta_matches_finite_differences_and_closed_display() {
        for (alpha, n) in [(1.0, 1), (1.0, 2), (2.0, 3)] {
            let j = KernelSpec::jackson(alpha, n).unwrap();
            let c = j.normalization().unwrap();
            let rho = 1.0 / (2.0 * alpha * f64::from(n));
            for i in 0..400 {
                let v = -40.0 + 0.2003 * i as f64;
                let fd = log_derivative_fd(|x| Ok(j.eval_log(x)), v, 1).unwrap();
                let got = j.theta_log(v);
                assert!((fd - got).abs() < 1e-9, "({alpha},{n}) v={v}: {fd} vs {got}");
                // C/v^{2n}·[2n/ρ^{2n−1} sin^{2n−1}(ρv)(cos(ρv) − sin(ρv)/(ρv))]
                let two_n = 2 * n as i32;
                let (s, co) = (rho * v).sin_cos();
                let display = c / v.powi(two_n)
                    * (f64::from(two_n) / rho.powi(two_n - 1) * s.powi(two_n - 1) * (co - s / (rho * v)));
                assert!((display - got).abs() < 1e-12 * (1.0 + got.abs()), "display mismatch at {v}");
            }
        }
    }

    #[test]
    fn averaged_bspline_is_next_order() {
        for n in 1..=3 {
            let avg = KernelSpec::averaged(b(n));
            let next = b(n + 1);
            assert_eq!(avg.log_support(), next.log_support());
            for i in 0..500 {
                let v = -2.6 + 5.2 * i as f64 / 499.0;
                assert!((avg.eval_log(v) - next.eval_log(v)).abs() < 1e-13, "n={n} v={v}");
            }
        }
        let avg = KernelSpec::averaged(b(3));
        assert!((avg.eval(PositiveReal::one()) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn theta_averaged_examples() {
        let k = b(3);
        assert_eq!(theta_averaged_kernel(&k, PositiveReal::one()), 0.0);
        let got = theta_averaged_kernel(&k, PositiveReal::from_log(0.5));
        assert!((got + 0.625).abs() < 1e-15);
        let avg = averaged_kernel(&k);
        for i in 0..300 {
            let v = -2.0 + 4.0 * i as f64 / 299.0 + 1e-3;
            if avg.knots().iter().any(|kn| (kn - v).abs() < 1e-3) {
                continue;
            }
            let fd = log_derivative_fd(|x| Ok(avg.eval_log(x)), v, 1).unwrap();
            assert!((fd - avg.theta_log(v)).abs() < 1e-6);
        }
    }

    #[test]
    fn truncation_policy_errors() {
        let j = KernelSpec::jackson(1.0, 2).unwrap();
        assert!(j.truncation_radius(Truncation::ExactCompact, 0.0).is_err());
        assert!(matches!(
            j.truncation_radius(Truncation::TailTolerance(1e-10), 3.0),
            Err(Error::ConditionViolation(_))
        ));
        let r = j.truncation_radius(Truncation::TailTolerance(1e-10), 0.0).unwrap();
        let tail = j.decay().unwrap().tail_bound(r, 0.0).unwrap();
        assert!(tail <= 1e-10, "{tail}");
        assert_eq!(b(3).truncation_radius(Truncation::TailTolerance(1e-3), 0.0).unwrap(), 1.5);
    }
}
