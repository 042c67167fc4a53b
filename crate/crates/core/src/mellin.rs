//! Mellin-calculus primitives in the logarithmic coordinate `v = log x`.
//!
//! Every function on ℝ⁺ is stored and evaluated through its log-coordinate
//! representation `v ↦ f(e^v)`. In that coordinate the Mellin derivative
//! `θf(x) = x f'(x)` is the ordinary derivative, the Mellin anti-derivative
//! `∫ f(t) dt/t` is an ordinary integral and the Mellin transform at `s = i·σ`
//! is a Fourier integral.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{finite, Error, Result};
use crate::grid::GridSpec;
use crate::quadrature::{adaptive_pieces_try, QuadratureOptions};

/// Step of the central finite-difference stencils, in log-coordinate.
pub const FD_STEP: f64 = 1e-5;

/// Default log-domain truncation radius of the Mellin transform.
pub const DEFAULT_TRANSFORM_RADIUS: f64 = 40.0;

/// A function of the log-coordinate.
pub type LogFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A strictly positive real together with its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositiveReal {
    value: f64,
    log_value: f64,
}

impl PositiveReal {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(Self {
                value,
                log_value: value.ln(),
            })
        } else {
            Err(Error::InvalidParameter(format!("{value} is not a finite positive real")))
        }
    }

    /// Builds `e^v`, keeping `v` exactly as the cached logarithm.
    pub fn from_log(log_value: f64) -> Self {
        Self {
            value: log_value.exp(),
            log_value,
        }
    }

    pub fn one() -> Self {
        Self::from_log(0.0)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn ln(&self) -> f64 {
        self.log_value
    }
}

/// Anything evaluable on ℝ⁺ through its log-coordinate.
pub trait LogDomain {
    fn value_at_log(&self, v: f64) -> f64;

    /// Points in `(lo, hi)` where the function is not smooth; quadrature splits there.
    fn breakpoints(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }
}

/// Locations (log-coordinate) where a test function loses smoothness.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Kinks {
    #[default]
    None,
    At(Vec<f64>),
    /// `offset + j·period` for every integer `j`.
    Periodic { offset: f64, period: f64 },
}

impl Kinks {
    pub fn within(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            Kinks::None => Vec::new(),
            Kinks::At(points) => points.iter().copied().filter(|&p| p > lo && p < hi).collect(),
            Kinks::Periodic { offset, period } => {
                let first = ((lo - offset) / period).floor() as i64;
                let last = ((hi - offset) / period).ceil() as i64;
                (first..=last)
                    .map(|j| offset + j as f64 * period)
                    .filter(|&p| p > lo && p < hi)
                    .collect()
            }
        }
    }
}

/// `|f(x) − f(y)| ≤ constant · |log x − log y|^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogHolder {
    pub alpha: f64,
    pub constant: f64,
}

impl fmt::Display for LogHolder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "log_holder({}, {})", self.alpha, self.constant)
    }
}

/// Function-class membership flags of a registered test function.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassFlags {
    pub bounded: bool,
    pub log_uniformly_continuous: bool,
    pub constant: bool,
    pub log_holder: Option<LogHolder>,
}

impl fmt::Display for ClassFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.constant {
            parts.push("constant".to_string());
        }
        if self.bounded {
            parts.push("bounded".to_string());
        }
        if self.log_uniformly_continuous {
            parts.push("log_uniformly_continuous".to_string());
        }
        if let Some(h) = self.log_holder {
            parts.push(h.to_string());
        }
        write!(f, "{}", parts.join(", "))
    }
}

/// A target function on ℝ⁺ with optional analytic Mellin derivatives.
#[derive(Clone)]
pub struct TestFunction {
    id: String,
    eval: LogFn,
    theta: Option<LogFn>,
    theta2: Option<LogFn>,
    base: PositiveReal,
    flags: ClassFlags,
    kinks: Kinks,
    log_support: Option<(f64, f64)>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("id", &self.id)
            .field("theta", &self.theta.is_some())
            .field("theta2", &self.theta2.is_some())
            .field("base", &self.base)
            .field("flags", &self.flags)
            .field("kinks", &self.kinks)
            .field("log_support", &self.log_support)
            .finish()
    }
}

impl TestFunction {
    /// A function given by its log-coordinate form `v ↦ f(e^v)`.
    pub fn new(id: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            id: id.into(),
            eval: Arc::new(eval),
            theta: None,
            theta2: None,
            base: PositiveReal::one(),
            flags: ClassFlags::default(),
            kinks: Kinks::None,
            log_support: None,
        }
    }

    pub fn with_theta(mut self, theta: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.theta = Some(Arc::new(theta));
        self
    }

    pub fn with_theta2(mut self, theta2: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.theta2 = Some(Arc::new(theta2));
        self
    }

    pub fn with_flags(mut self, flags: ClassFlags) -> Self {
        self.flags = flags;
        self
    }

    pub fn with_kinks(mut self, kinks: Kinks) -> Self {
        self.kinks = kinks;
        self
    }

    pub fn with_base(mut self, base: PositiveReal) -> Self {
        self.base = base;
        self
    }

    /// Declares that the function vanishes outside `[lo, hi]` (log-coordinate).
    pub fn with_log_support(mut self, lo: f64, hi: f64) -> Self {
        self.log_support = Some((lo, hi));
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn flags(&self) -> &ClassFlags {
        &self.flags
    }

    pub fn kinks(&self) -> &Kinks {
        &self.kinks
    }

    pub fn base(&self) -> PositiveReal {
        self.base
    }

    pub fn log_support(&self) -> Option<(f64, f64)> {
        self.log_support
    }

    /// Whether an analytic second Mellin derivative is registered (the function is C² in log x).
    pub fn has_theta2(&self) -> bool {
        self.theta2.is_some()
    }

    pub fn has_theta(&self) -> bool {
        self.theta.is_some()
    }

    pub fn eval(&self, x: PositiveReal) -> f64 {
        (self.eval)(x.ln())
    }

    pub fn eval_log(&self, v: f64) -> f64 {
        (self.eval)(v)
    }

    /// Analytic first Mellin derivative at log-coordinate `v`, if registered.
    pub fn theta_log(&self, v: f64) -> Option<f64> {
        self.theta.as_ref().map(|t| t(v))
    }

    pub fn theta2_log(&self, v: f64) -> Option<f64> {
        self.theta2.as_ref().map(|t| t(v))
    }

    /// The Mellin anti-derivative `F(x) = ∫_a^x f(t) dt/t` as a test function;
    /// its analytic θ is `f` itself. Evaluation failures surface as NaN.
    pub fn antiderivative(&self) -> TestFunction {
        let inner = self.clone();
        let theta = self.eval.clone();
        TestFunction::new(format!("F[{}]", self.id), move |v| {
            mellin_antiderivative(&inner, PositiveReal::from_log(v)).unwrap_or(f64::NAN)
        })
        .with_theta(move |v| theta(v))
        .with_flags(ClassFlags {
            bounded: false,
            log_uniformly_continuous: false,
            constant: false,
            log_holder: None,
        })
    }
}

impl LogDomain for TestFunction {
    fn value_at_log(&self, v: f64) -> f64 {
        (self.eval)(v)
    }

    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = self.kinks.within(lo, hi);
        if let Some((a, b)) = self.log_support {
            pts.extend([a, b].into_iter().filter(|&p| p > lo && p < hi));
        }
        pts
    }
}

/// Central-difference derivative of a log-coordinate function.
///
/// Order 2 nests the first-order stencil: `(g(v+2h) − 2g(v) + g(v−2h)) / 4h²`.
pub fn log_derivative_fd<G>(mut g: G, v: f64, order: u32) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    let h = FD_STEP;
    match order {
        1 => {
            let up = g(v + h)?;
            let down = g(v - h)?;
            finite((up - down) / (2.0 * h), v)
        }
        2 => {
            let up = g(v + 2.0 * h)?;
            let mid = g(v)?;
            let down = g(v - 2.0 * h)?;
            finite((up - 2.0 * mid + down) / (4.0 * h * h), v)
        }
        other => Err(Error::UnsupportedOrder(other)),
    }
}

/// Finite-difference θ^order f(x), ignoring any analytic closure.
pub fn mellin_derivative_fd(f: &TestFunction, x: PositiveReal, order: u32) -> Result<f64> {
    log_derivative_fd(|v| finite(f.eval_log(v), v), x.ln(), order)
}

/// θ^order f(x) for order ∈ {1, 2}; analytic when registered, finite differences otherwise.
pub fn mellin_derivative(f: &TestFunction, x: PositiveReal, order: u32) -> Result<f64> {
    let v = x.ln();
    let analytic = match order {
        1 => f.theta_log(v),
        2 => f.theta2_log(v),
        other => return Err(Error::UnsupportedOrder(other)),
    };
    match analytic {
        Some(value) => finite(value, v),
        None => mellin_derivative_fd(f, x, order),
    }
}

/// `F(x) = ∫_{log a}^{log x} f(e^v) dv` with the function's registered base point `a`.
///
/// Negative when `x < a`.
pub fn mellin_antiderivative(f: &TestFunction, x: PositiveReal) -> Result<f64> {
    mellin_antiderivative_from(f, f.base(), x, &QuadratureOptions::default())
}

/// Mellin anti-derivative from an explicit base point.
pub fn mellin_antiderivative_from(
    f: &TestFunction,
    base: PositiveReal,
    x: PositiveReal,
    opts: &QuadratureOptions,
) -> Result<f64> {
    let (a, b) = (base.ln(), x.ln());
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let breaks = f.breakpoints(lo, hi);
    let q = adaptive_pieces_try(|v| finite(f.eval_log(v), v), a, b, &breaks, opts)?;
    Ok(q.value)
}

/// A Mellin transform request along `s = c + i·s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinTransformQuery {
    pub c: f64,
    pub s: f64,
    pub truncation_radius: f64,
    pub quadrature_tolerance: f64,
}

impl MellinTransformQuery {
    /// Query on the imaginary axis with the default radius and tolerance.
    pub fn imaginary(s: f64) -> Self {
        Self {
            c: 0.0,
            s,
            truncation_radius: DEFAULT_TRANSFORM_RADIUS,
            quadrature_tolerance: crate::quadrature::DEFAULT_TOLERANCE,
        }
    }

    pub fn with_radius(self, truncation_radius: f64) -> Self {
        Self {
            truncation_radius,
            ..self
        }
    }

    pub fn with_tolerance(self, quadrature_tolerance: f64) -> Self {
        Self {
            quadrature_tolerance,
            ..self
        }
    }
}

/// Value of a truncated Mellin transform with its soundness metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinTransform {
    pub value: Complex64,
    pub error_estimate: f64,
    /// False when the integrand is still above tolerance at `±R`.
    pub truncation_sound: bool,
}

/// `∫_{−R}^{R} f(e^v) e^{i s v} dv`, the Mellin transform at `c + i s` with `c = 0`.
pub fn mellin_transform<F: LogDomain + ?Sized>(f: &F, q: &MellinTransformQuery) -> Result<MellinTransform> {
    if q.c != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "only c = 0 is supported, got c = {}",
            q.c
        )));
    }
    if !(q.truncation_radius > 0.0) || !(q.quadrature_tolerance > 0.0) {
        return Err(Error::InvalidParameter(
            "truncation radius and tolerance must be positive".into(),
        ));
    }
    let r = q.truncation_radius;
    let breaks = f.breakpoints(-r, r);
    let opts = QuadratureOptions::with_tolerance(q.quadrature_tolerance);
    let re = adaptive_pieces_try(|v| finite(f.value_at_log(v) * (q.s * v).cos(), v), -r, r, &breaks, &opts)?;
    let im = adaptive_pieces_try(|v| finite(f.value_at_log(v) * (q.s * v).sin(), v), -r, r, &breaks, &opts)?;
    let edge = f.value_at_log(r).abs().max(f.value_at_log(-r).abs());
    Ok(MellinTransform {
        value: Complex64::new(re.value, im.value),
        error_estimate: re.error_estimate + im.error_estimate,
        truncation_sound: edge <= q.quadrature_tolerance,
    })
}

/// Grid estimate of `ω(f, δ) = sup{|f(u) − f(v)| : |log u − log v| ≤ δ}`.
///
/// Only pairs of grid points are compared, so this is a lower estimate of the
/// true supremum over ℝ⁺. Pair distances are compared with a relative slack of
/// 1e-12 so grid spacings that divide δ are not lost to rounding.
pub fn log_modulus_of_continuity(f: &TestFunction, delta: f64, grid: &GridSpec) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let points = grid.points()?;
    let values: Vec<f64> = points
        .iter()
        .map(|&v| finite(f.eval_log(v), v))
        .collect::<Result<_>>()?;
    let reach = delta * (1.0 + 1e-12);
    let mut best: Option<f64> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[j] - points[i] > reach {
                break;
            }
            let d = (values[j] - values[i]).abs();
            best = Some(best.map_or(d, |b: f64| b.max(d)));
        }
    }
    best.ok_or_else(|| Error::InvalidGrid(format!("no grid pair lies within delta = {delta}")))
}

/// Degree-n Mellin Taylor polynomial of f about x, evaluated at `t·x`.
pub fn mellin_taylor_eval(f: &TestFunction, x: PositiveReal, t: PositiveReal, n: u32) -> Result<f64> {
    if !(1..=2).contains(&n) {
        return Err(Error::UnsupportedOrder(n));
    }
    let v = x.ln();
    let lt = t.ln();
    let missing = |order| Error::MissingAnalyticDerivative {
        id: f.id().to_string(),
        order,
    };
    let d1 = f.theta_log(v).ok_or_else(|| missing(1))?;
    let mut value = f.eval_log(v) + d1 * lt;
    if n == 2 {
        let d2 = f.theta2_log(v).ok_or_else(|| missing(2))?;
        value += 0.5 * d2 * lt * lt;
    }
    finite(value, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn log_fn() -> TestFunction {
        TestFunction::new("log", |v| v)
    }

    fn sin_log() -> TestFunction {
        TestFunction::new("sin_log", f64::sin)
            .with_theta(f64::cos)
            .with_theta2(|v| -v.sin())
    }

    #[test]
    fn positive_real_rejects_nonpositive() {
        assert!(PositiveReal::new(0.0).is_err());
        assert!(PositiveReal::new(-1.0).is_err());
        assert!(PositiveReal::new(f64::INFINITY).is_err());
        let x = PositiveReal::new(E).unwrap();
        assert!((x.ln() - 1.0).abs() < 1e-16);
    }

    #[test]
    fn derivative_examples() {
        let x = PositiveReal::new(E).unwrap();
        assert!((mellin_derivative(&log_fn(), x, 1).unwrap() - 1.0).abs() < 1e-9);
        let f = sin_log();
        assert_eq!(mellin_derivative(&f, PositiveReal::one(), 1).unwrap(), 1.0);
        let x = PositiveReal::from_log(0.3);
        let analytic = mellin_derivative(&f, x, 2).unwrap();
        assert!((analytic + 0.3f64.sin()).abs() < 1e-15);
        let fd = mellin_derivative_fd(&f, x, 2).unwrap();
        assert!((fd - analytic).abs() < 1e-5, "fd {fd} vs {analytic}");
        assert!((fd + 0.295_520_206_661_339_6).abs() < 1e-5);
    }

    #[test]
    fn derivative_rejects_order_three() {
        let err = mellin_derivative(&sin_log(), PositiveReal::one(), 3).unwrap_err();
        assert_eq!(err, Error::UnsupportedOrder(3));
    }

    #[test]
    fn derivative_reports_non_finite_samples() {
        let f = TestFunction::new("pole", |v| 1.0 / v);
        let err = mellin_derivative(&f, PositiveReal::from_log(0.0), 2).unwrap_err();
        assert!(matches!(err, Error::NumericDomain { .. }));
    }

    #[test]
    fn antiderivative_examples() {
        let one = TestFunction::new("one", |_| 1.0);
        let x = PositiveReal::from_log(2.0);
        assert!((mellin_antiderivative(&one, x).unwrap() - 2.0).abs() < 1e-14);
        let x = PositiveReal::from_log(PI);
        let got = mellin_antiderivative(&sin_log(), x).unwrap();
        // fixed 32-point Gauss-Legendre cross-check
        let fixed = crate::quadrature::GaussLegendre::thirty_two().integrate(0.0, PI, f64::sin);
        assert!((got - 2.0).abs() < 1e-12);
        assert!((got - fixed).abs() < 1e-12);
        let got = mellin_antiderivative(&log_fn(), PositiveReal::from_log(1.0)).unwrap();
        assert!((got - 0.5).abs() < 1e-14);
        let below = mellin_antiderivative(&one, PositiveReal::from_log(-0.5)).unwrap();
        assert!((below + 0.5).abs() < 1e-14);
    }

    #[test]
    fn transform_rejects_nonzero_c() {
        let q = MellinTransformQuery {
            c: 0.5,
            ..MellinTransformQuery::imaginary(1.0)
        };
        assert!(matches!(mellin_transform(&sin_log(), &q), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn transform_flags_unsound_truncation() {
        let gauss = TestFunction::new("gauss", |v| (-v * v).exp());
        let t = mellin_transform(&gauss, &MellinTransformQuery::imaginary(0.0)).unwrap();
        assert!(t.truncation_sound);
        assert!((t.value.re - PI.sqrt()).abs() < 1e-10);
        let t = mellin_transform(&gauss, &MellinTransformQuery::imaginary(0.0).with_radius(1.0)).unwrap();
        assert!(!t.truncation_sound);
    }

    #[test]
    fn modulus_examples() {
        let grid = GridSpec::new(-2.0, 2.0, 4001).unwrap();
        let c = TestFunction::new("c", |_| 3.0);
        assert_eq!(log_modulus_of_continuity(&c, 0.5, &grid).unwrap(), 0.0);
        let w = log_modulus_of_continuity(&log_fn(), 0.1, &grid).unwrap();
        assert!((w - 0.1).abs() < 1e-12, "{w}");
        let half = TestFunction::new("h", |v: f64| v.abs().sqrt().min(1.0));
        let w = log_modulus_of_continuity(&half, 0.01, &grid).unwrap();
        assert!((w - 0.1).abs() < 1e-9, "{w}");
        let err = log_modulus_of_continuity(&log_fn(), 1e-5, &grid).unwrap_err();
        assert!(matches!(err, Error::InvalidGrid(_)));
    }

    #[test]
    fn taylor_examples() {
        let log_with_theta = log_fn().with_theta(|_| 1.0).with_theta2(|_| 0.0);
        let got = mellin_taylor_eval(&log_with_theta, PositiveReal::one(), PositiveReal::from_log(1.0), 1).unwrap();
        assert!((got - 1.0).abs() < 1e-15);
        let f = sin_log();
        let t = PositiveReal::from_log(0.1);
        let got = mellin_taylor_eval(&f, PositiveReal::one(), t, 1).unwrap();
        assert!((got - 0.1).abs() < 1e-15);
        let residual = 0.1f64.sin() - got;
        assert!((residual + 1.665_833_531_718_508e-4).abs() < 1e-12);
        let x = PositiveReal::from_log(0.7);
        assert_eq!(mellin_taylor_eval(&f, x, PositiveReal::one(), 2).unwrap(), f.eval(x));
        let bare = TestFunction::new("bare", f64::sin);
        assert!(matches!(
            mellin_taylor_eval(&bare, x, t, 1),
            Err(Error::MissingAnalyticDerivative { order: 1, .. })
        ));
        assert_eq!(mellin_taylor_eval(&f, x, t, 3).unwrap_err(), Error::UnsupportedOrder(3));
    }
}
