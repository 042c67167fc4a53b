//! Gauss–Legendre rules and a globally adaptive Gauss–Kronrod (7/15) integrator.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Default absolute tolerance for adaptive integration.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Default cap on the number of subintervals (2^16).
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 1 << 16;

/// Options for [`adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub tolerance: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
        }
    }
}

impl QuadratureOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

/// An n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes nodes by Newton iteration on P_n from the Chebyshev initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared 16-point rule.
    pub fn sixteen() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    /// Shared 32-point rule.
    pub fn thirty_two() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(32))
    }

    /// Returns a shared rule for the common orders, building others on demand.
    pub fn cached(n: usize) -> std::borrow::Cow<'static, GaussLegendre> {
        match n {
            16 => std::borrow::Cow::Borrowed(Self::sixteen()),
            32 => std::borrow::Cow::Borrowed(Self::thirty_two()),
            _ => std::borrow::Cow::Owned(Self::new(n)),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }

    pub fn try_integrate<F: FnMut(f64) -> Result<f64>>(&self, a: f64, b: f64, mut f: F) -> Result<f64> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x)?;
        }
        Ok(sum * half)
    }

    /// Integrates over [a, b] split at the given interior breakpoints.
    pub fn integrate_pieces<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, breaks: &[f64], mut f: F) -> f64 {
        let mut total = 0.0;
        let mut lo = a;
        for &p in breaks.iter().filter(|&&p| p > a && p < b) {
            total += self.integrate(lo, p, &mut f);
            lo = p;
        }
        total + self.integrate(lo, b, &mut f)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Kronrod-15 panel: (K15 value, |K15 - G7|, K15 of |f|).
fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(mid - dx)?;
        let f2 = f(mid + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs(), abs * half.abs()))
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive bisection on [a, b] with a fallible integrand.
///
/// Stops once the summed |K15 - G7| estimate drops below `max(tol, 1e-14 ∫|f|)`;
/// the relative floor keeps unreachable absolute targets from exhausting the budget.
pub fn adaptive_try<F>(mut f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 1,
        });
    }
    let (value, error, abs) = gk15(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        value,
        error,
        abs,
    });
    let mut total_error = error;
    let mut total_abs = abs;
    let mut panels = 1usize;
    loop {
        let target = opts.tolerance.max(1e-14 * total_abs);
        if total_error <= target {
            break;
        }
        if panels >= opts.max_subdivisions {
            return Err(Error::ToleranceNotMet {
                tolerance: opts.tolerance,
                estimate: total_error,
                subdivisions: panels,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine resolution
            return Err(Error::ToleranceNotMet {
                tolerance: opts.tolerance,
                estimate: total_error,
                subdivisions: panels,
            });
        }
        let (v1, e1, a1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2, a2) = gk15(&mut f, mid, worst.b)?;
        total_error += e1 + e2 - worst.error;
        total_abs += a1 + a2 - worst.abs;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            abs: a1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            abs: a2,
        });
        panels += 1;
    }
    // resum to shed drift from the running updates
    let value = heap.iter().map(|p| p.value).sum::<f64>();
    Ok(Quadrature {
        value,
        error_estimate: total_error.max(0.0),
        subdivisions: panels,
    })
}

/// Infallible-integrand convenience wrapper around [`adaptive_try`].
pub fn adaptive<F>(mut f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<Quadrature>
where
    F: FnMut(f64) -> f64,
{
    adaptive_try(
        |x| {
            let y = f(x);
            if y.is_finite() {
                Ok(y)
            } else {
                Err(Error::NumericDomain { log_x: x })
            }
        },
        a,
        b,
        opts,
    )
}

/// Adaptive integration over [a, b] split at interior breakpoints, each piece
/// integrated to the full tolerance.
pub fn adaptive_pieces_try<F>(mut f: F, a: f64, b: f64, breaks: &[f64], opts: &QuadratureOptions) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut points: Vec<f64> = breaks.iter().copied().filter(|&p| p > lo && p < hi).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut subdivisions = 0;
    let mut start = lo;
    for end in points.into_iter().chain(std::iter::once(hi)) {
        let q = adaptive_try(&mut f, start, end, opts)?;
        value += q.value;
        error += q.error_estimate;
        subdivisions += q.subdivisions;
        start = end;
    }
    Ok(Quadrature {
        value: sign * value,
        error_estimate: error,
        subdivisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 16, 32, 33] {
            let rule = GaussLegendre::new(n);
            let s: f64 = rule.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n = {n}: {s}");
        }
    }

    #[test]
    fn gauss_legendre_exact_to_degree_2n_minus_1() {
        let rule = GaussLegendre::sixteen();
        for p in 0..32 {
            let got = rule.integrate(0.0, 1.0, |x| x.powi(p));
            let want = 1.0 / (p as f64 + 1.0);
            assert!((got - want).abs() < 1e-15, "degree {p}");
        }
    }

    #[test]
    fn adaptive_handles_smooth_and_kinked_integrands() {
        let opts = QuadratureOptions::default();
        let q = adaptive(f64::sin, 0.0, PI, &opts).unwrap();
        assert!((q.value - 2.0).abs() < 1e-13);
        let q = adaptive(|x: f64| x.abs().sqrt(), -1.0, 1.0, &opts).unwrap();
        assert!((q.value - 4.0 / 3.0).abs() < 1e-9);
        let q = adaptive_pieces_try(|x: f64| Ok(x.abs()), -1.0, 2.0, &[0.0], &opts).unwrap();
        assert!((q.value - 2.5).abs() < 1e-14);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let opts = QuadratureOptions::default();
        let q = adaptive_pieces_try(|x: f64| Ok(x.cos()), 1.0, 0.0, &[], &opts).unwrap();
        assert!((q.value + 1f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn budget_exhaustion_reports_tolerance_not_met() {
        let opts = QuadratureOptions {
            tolerance: 1e-14,
            max_subdivisions: 4,
        };
        let err = adaptive(|x: f64| (1.0 / x).sin(), 1e-3, 1.0, &opts).unwrap_err();
        assert!(matches!(err, Error::ToleranceNotMet { .. }));
    }
}
