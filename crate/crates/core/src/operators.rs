//! Generalized and Kantorovich exponential sampling series and their Mellin derivatives.
//!
//! Both series share the shape `Σ_k χ(e^{wv − k}) s_k` with `v = log x`; they differ
//! only in the sample `s_k`: a point value `f(e^{k/w})` or a cell average
//! `w ∫_{k/w}^{(k+1)/w} f(e^u) du`. [`SampledSeries`] caches the samples over a
//! window so many evaluation points can share them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::kernels::{index_range, KernelSpec, Truncation, DEFAULT_MAX_TERMS, DEFAULT_TAIL_TOLERANCE};
use crate::mellin::{log_derivative_fd, mellin_antiderivative_from, LogDomain, PositiveReal, TestFunction};
use crate::quadrature::{adaptive_pieces_try, GaussLegendre, QuadratureOptions};

/// Gauss–Legendre nodes per Kantorovich cell.
pub const DEFAULT_INNER_NODES: usize = 16;

/// Sampling rate and truncation policy shared by every series evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub w: f64,
    pub truncation: Truncation,
    #[serde(default = "default_nodes")]
    pub inner_quadrature_nodes: usize,
    #[serde(default = "default_max_terms")]
    pub max_terms: u64,
}

fn default_nodes() -> usize {
    DEFAULT_INNER_NODES
}

fn default_max_terms() -> u64 {
    DEFAULT_MAX_TERMS
}

impl SamplingConfig {
    pub fn new(w: f64, truncation: Truncation) -> Result<Self> {
        let cfg = Self {
            w,
            truncation,
            inner_quadrature_nodes: DEFAULT_INNER_NODES,
            max_terms: DEFAULT_MAX_TERMS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Exact finite sums for compact kernels, tail tolerance 1e-10 otherwise.
    pub fn for_kernel(k: &KernelSpec, w: f64) -> Self {
        let truncation = if k.is_compact() {
            Truncation::ExactCompact
        } else {
            Truncation::TailTolerance(DEFAULT_TAIL_TOLERANCE)
        };
        Self {
            w,
            truncation,
            inner_quadrature_nodes: DEFAULT_INNER_NODES,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }

    pub fn with_w(self, w: f64) -> Self {
        Self { w, ..self }
    }

    pub fn with_truncation(self, truncation: Truncation) -> Self {
        Self { truncation, ..self }
    }

    pub fn with_inner_nodes(self, inner_quadrature_nodes: usize) -> Self {
        Self {
            inner_quadrature_nodes,
            ..self
        }
    }

    pub fn with_max_terms(self, max_terms: u64) -> Self {
        Self { max_terms, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w > 0.0 && self.w.is_finite()) {
            return Err(Error::InvalidParameter(format!("sampling rate w must be positive, got {}", self.w)));
        }
        if let Truncation::TailTolerance(eps) = self.truncation {
            if !(eps > 0.0) {
                return Err(Error::InvalidParameter(format!("tail tolerance must be positive, got {eps}")));
            }
        }
        if self.inner_quadrature_nodes < 4 {
            return Err(Error::InvalidParameter(format!(
                "inner quadrature needs >= 4 nodes, got {}",
                self.inner_quadrature_nodes
            )));
        }
        Ok(())
    }
}

/// Which sampling series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeriesKind {
    /// `S_w`: point samples.
    #[serde(rename = "S")]
    Generalized,
    /// `I_w`: cell averages.
    #[serde(rename = "I")]
    Kantorovich,
}

/// Window shrink keeping compact-kernel sums exact at every evaluation point.
pub fn evaluation_margin(k: &KernelSpec, w: f64) -> f64 {
    (k.log_support().unwrap_or(0.0) + 1.0) / w
}

/// Envelope weight of the samples: bounded functions need none, the others grow
/// at most linearly in `log x` across the registry.
fn sample_weights(f: &TestFunction) -> &'static [f64] {
    if f.flags().bounded {
        &[0.0]
    } else {
        &[0.0, 1.0]
    }
}

fn radius_over(weights: &[f64], mut radius: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    weights.iter().try_fold(0.0f64, |acc, &wt| Ok(acc.max(radius(wt)?)))
}

/// `w ∫_{k/w}^{(k+1)/w} f(e^u) du`: Gauss–Legendre on smooth cells, adaptive on
/// cells touching a kink of `f`.
fn cell_average(f: &TestFunction, k: i64, w: f64, gl: &GaussLegendre) -> Result<f64> {
    let a = k as f64 / w;
    let b = (k + 1) as f64 / w;
    let pad = 1e-12 * (b - a);
    let touching = f.breakpoints(a - pad, b + pad);
    let integral = if touching.is_empty() {
        gl.try_integrate(a, b, |u| finite(f.eval_log(u), u))?
    } else {
        let opts = QuadratureOptions::with_tolerance(1e-15 * (b - a));
        adaptive_pieces_try(|u| finite(f.eval_log(u), u), a, b, &touching, &opts)?.value
    };
    finite(w * integral, a)
}

/// Samples of one series cached over a log-window.
pub struct SampledSeries<'k> {
    kernel: &'k KernelSpec,
    kind: SeriesKind,
    w: f64,
    window: (f64, f64),
    first: i64,
    samples: Vec<f64>,
    radius: f64,
    theta_radius: Option<f64>,
}

impl<'k> SampledSeries<'k> {
    /// Precomputes every sample needed for `v ∈ [log_lo, log_hi]`, for both the
    /// series and (when the kernel's θ admits a truncation) its Mellin derivative.
    pub fn new(
        f: &TestFunction,
        kernel: &'k KernelSpec,
        cfg: &SamplingConfig,
        kind: SeriesKind,
        log_lo: f64,
        log_hi: f64,
    ) -> Result<Self> {
        cfg.validate()?;
        if !(log_lo <= log_hi) {
            return Err(Error::InvalidGrid(format!("empty window [{log_lo}, {log_hi}]")));
        }
        let weights = sample_weights(f);
        let radius = radius_over(weights, |wt| kernel.truncation_radius(cfg.truncation, wt))?;
        let theta_radius = radius_over(weights, |wt| kernel.theta_truncation_radius(cfg.truncation, wt)).ok();
        let reach = radius.max(theta_radius.unwrap_or(0.0));
        let w = cfg.w;
        let (first, _) = index_range(w * log_lo, reach, cfg.max_terms)?;
        let (_, last) = index_range(w * log_hi, reach, cfg.max_terms)?;
        let count = (last - first + 1).max(0) as u64;
        if count > cfg.max_terms {
            return Err(Error::TruncationBudget {
                needed: count,
                budget: cfg.max_terms,
            });
        }
        let gl = GaussLegendre::cached(cfg.inner_quadrature_nodes);
        let samples = (first..=last)
            .into_par_iter()
            .map(|k| match kind {
                SeriesKind::Generalized => {
                    let v = k as f64 / w;
                    finite(f.eval_log(v), v)
                }
                SeriesKind::Kantorovich => cell_average(f, k, w, &gl),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kernel,
            kind,
            w,
            window: (log_lo, log_hi),
            first,
            samples,
            radius,
            theta_radius,
        })
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    /// Cached sample `s_k`, if inside the window's reach.
    pub fn sample(&self, k: i64) -> Option<f64> {
        let i = k.checked_sub(self.first)?;
        usize::try_from(i).ok().and_then(|i| self.samples.get(i).copied())
    }

    fn check(&self, v: f64) -> Result<()> {
        let (lo, hi) = self.window;
        if v < lo || v > hi || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("log x = {v} outside cached window [{lo}, {hi}]")));
        }
        Ok(())
    }

    fn sum(&self, v: f64, radius: f64, kernel: impl Fn(f64) -> f64) -> Result<f64> {
        self.check(v)?;
        let c = self.w * v;
        let (lo, hi) = index_range(c, radius, u64::MAX)?;
        let start = (lo - self.first) as usize;
        let mut acc = 0.0;
        for (i, s) in self.samples[start..=(hi - self.first) as usize].iter().enumerate() {
            let k = lo + i as i64;
            acc += kernel(c - k as f64) * s;
        }
        finite(acc, v)
    }

    /// Series value at `log x = v`.
    pub fn value(&self, v: f64) -> Result<f64> {
        self.sum(v, self.radius, |t| self.kernel.eval_log(t))
    }

    /// Mellin derivative `w Σ_k (θχ)(e^{wv − k}) s_k`.
    pub fn theta(&self, v: f64) -> Result<f64> {
        let radius = self.theta_radius.ok_or_else(|| {
            Error::InvalidParameter(format!("{} has no decay envelope for its Mellin derivative", self.kernel))
        })?;
        Ok(self.w * self.sum(v, radius, |t| self.kernel.theta_log(t))?)
    }

    /// Values at many points, in parallel.
    pub fn values(&self, points: &[f64]) -> Result<Vec<f64>> {
        points.par_iter().map(|&v| self.value(v)).collect()
    }

    pub fn thetas(&self, points: &[f64]) -> Result<Vec<f64>> {
        points.par_iter().map(|&v| self.theta(v)).collect()
    }
}

/// `(S_w f)(x) = Σ_k χ(e^{−k} x^w) f(e^{k/w})`.
pub fn generalized_series(f: &TestFunction, k: &KernelSpec, cfg: &SamplingConfig, x: PositiveReal) -> Result<f64> {
    let v = x.ln();
    SampledSeries::new(f, k, cfg, SeriesKind::Generalized, v, v)?.value(v)
}

/// `(I_w f)(x) = Σ_k χ(e^{−k} x^w) w ∫_{k/w}^{(k+1)/w} f(e^u) du`.
pub fn kantorovich_series(f: &TestFunction, k: &KernelSpec, cfg: &SamplingConfig, x: PositiveReal) -> Result<f64> {
    let v = x.ln();
    SampledSeries::new(f, k, cfg, SeriesKind::Kantorovich, v, v)?.value(v)
}

/// `θ(S_w F)(y) = Σ_k F(e^{k/w}) w (θχ)(e^{−k} y^w)`.
pub fn theta_generalized(f: &TestFunction, k: &KernelSpec, cfg: &SamplingConfig, y: PositiveReal) -> Result<f64> {
    let v = y.ln();
    SampledSeries::new(f, k, cfg, SeriesKind::Generalized, v, v)?.theta(v)
}

/// `θ(I_w f)(x) = Σ_k (θχ)(e^{−k} x^w) w² ∫_{k/w}^{(k+1)/w} f(e^u) du`.
pub fn theta_kantorovich(f: &TestFunction, k: &KernelSpec, cfg: &SamplingConfig, x: PositiveReal) -> Result<f64> {
    let v = x.ln();
    SampledSeries::new(f, k, cfg, SeriesKind::Kantorovich, v, v)?.theta(v)
}

/// Finite-difference θ of a cached series, for cross-checking [`SampledSeries::theta`].
pub fn theta_series_fd(series: &SampledSeries<'_>, v: f64) -> Result<f64> {
    log_derivative_fd(|t| series.value(t), v, 1)
}

/// Both sides of `I_w f(x) = θ(S_w^{χ̄} F)(x e^{1/(2w)})` over a log-window.
///
/// `F(x) = ∫_0^{log x} f(e^u) du` is tabulated at the nodes `k/w` by adaptive
/// quadrature, cell by cell from an anchor, independently of the Gauss–Legendre
/// cell averages used on the Kantorovich side.
pub struct AveragedKernelBridge<'k> {
    kantorovich: SampledSeries<'k>,
    inner: &'k KernelSpec,
    w: f64,
    first: i64,
    antiderivative: Vec<f64>,
    radius: f64,
}

impl<'k> AveragedKernelBridge<'k> {
    pub fn new(f: &TestFunction, k: &'k KernelSpec, cfg: &SamplingConfig, log_lo: f64, log_hi: f64) -> Result<Self> {
        let kantorovich = SampledSeries::new(f, k, cfg, SeriesKind::Kantorovich, log_lo, log_hi)?;
        let w = cfg.w;
        let averaged = KernelSpec::averaged(k.clone());
        // F grows linearly even when f is bounded
        let radius = radius_over(&[0.0, 1.0], |wt| averaged.theta_truncation_radius(cfg.truncation, wt))?;
        let (first, _) = index_range(w * log_lo + 0.5, radius, cfg.max_terms)?;
        let (_, last) = index_range(w * log_hi + 0.5, radius, cfg.max_terms)?;
        let opts = QuadratureOptions::with_tolerance(1e-14);
        let anchor = mellin_antiderivative_from(f, PositiveReal::one(), PositiveReal::from_log(first as f64 / w), &opts)?;
        let cells = (first..last)
            .into_par_iter()
            .map(|j| {
                let (a, b) = (j as f64 / w, (j + 1) as f64 / w);
                let cell_opts = QuadratureOptions::with_tolerance(1e-15 * (b - a));
                Ok(adaptive_pieces_try(|u| finite(f.eval_log(u), u), a, b, &f.breakpoints(a, b), &cell_opts)?.value)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut antiderivative = Vec::with_capacity(cells.len() + 1);
        antiderivative.push(anchor);
        let mut running = anchor;
        for c in cells {
            running += c;
            antiderivative.push(running);
        }
        Ok(Self {
            kantorovich,
            inner: k,
            w,
            first,
            antiderivative,
            radius,
        })
    }

    /// `(I_w f)(x)` at `log x = v`.
    pub fn kantorovich(&self, v: f64) -> Result<f64> {
        self.kantorovich.value(v)
    }

    /// `θ(S_w^{χ̄} F)(x e^{1/(2w)})` at `log x = v`, through `θχ̄(t) = χ(t e^{1/2}) − χ(t e^{−1/2})`.
    pub fn theta_averaged(&self, v: f64) -> Result<f64> {
        let c = self.w * v + 0.5;
        let (lo, hi) = index_range(c, self.radius, u64::MAX)?;
        let mut acc = 0.0;
        for k in lo..=hi {
            let big_f = usize::try_from(k - self.first)
                .ok()
                .and_then(|i| self.antiderivative.get(i))
                .ok_or_else(|| Error::InvalidParameter(format!("log x = {v} outside the tabulated window")))?;
            let t = c - k as f64;
            acc += big_f * (self.inner.eval_log(t + 0.5) - self.inner.eval_log(t - 0.5));
        }
        finite(self.w * acc, v)
    }

    /// `|I_w f(x) − θ(S_w^{χ̄} F)(x e^{1/(2w)})|`.
    pub fn residual(&self, v: f64) -> Result<f64> {
        Ok((self.kantorovich(v)? - self.theta_averaged(v)?).abs())
    }
}

/// Pointwise residual of the averaged-kernel bridge.
pub fn lemma31_residual(f: &TestFunction, k: &KernelSpec, cfg: &SamplingConfig, x: PositiveReal) -> Result<f64> {
    let v = x.ln();
    AveragedKernelBridge::new(f, k, cfg, v, v)?.residual(v)
}

fn support_of(phi: &TestFunction) -> Result<(f64, f64)> {
    phi.log_support()
        .ok_or_else(|| Error::InvalidParameter(format!("test function `{}` has no compact log-support", phi.id())))
}

/// Points in `[a, b]` where the series `Σ χ(e^{wv − k}) s_k` has a kink in `v`.
fn series_breaks(k: &KernelSpec, w: f64, a: f64, b: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for &kn in k.knots() {
        let first = (w * a - kn).ceil() as i64;
        let last = (w * b - kn).floor() as i64;
        out.extend((first..=last).map(|j| (j as f64 + kn) / w));
    }
    out
}

/// `G_f(φ) = w ∫ ((I_w f)(x) − f(x)) φ(x) dx/x` over the log-support of `φ`.
pub fn saturation_functional(f: &TestFunction, phi: &TestFunction, k: &KernelSpec, cfg: &SamplingConfig) -> Result<f64> {
    let (a, b) = support_of(phi)?;
    let series = SampledSeries::new(f, k, cfg, SeriesKind::Kantorovich, a, b)?;
    let mut breaks = series_breaks(k, cfg.w, a, b);
    breaks.extend(f.breakpoints(a, b));
    let opts = QuadratureOptions::with_tolerance(1e-12);
    let q = adaptive_pieces_try(
        |v| Ok((series.value(v)? - f.eval_log(v)) * phi.eval_log(v)),
        a,
        b,
        &breaks,
        &opts,
    )?;
    Ok(cfg.w * q.value)
}

/// `−(m₁ + ½) ∫ (θφ)(x) f(x) dx/x`, the large-`w` limit of [`saturation_functional`].
pub fn saturation_limit(f: &TestFunction, phi: &TestFunction, m1: f64) -> Result<f64> {
    let (a, b) = support_of(phi)?;
    let opts = QuadratureOptions::with_tolerance(1e-13);
    let q = adaptive_pieces_try(
        |v| {
            let dphi = match phi.theta_log(v) {
                Some(d) => d,
                None => log_derivative_fd(|t| Ok(phi.eval_log(t)), v, 1)?,
            };
            finite(dphi * f.eval_log(v), v)
        },
        a,
        b,
        &f.breakpoints(a, b),
        &opts,
    )?;
    Ok(-(m1 + 0.5) * q.value)
}
