//! Algebraic moments, absolute moments and kernel certification.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::{Decay, KernelFamily, KernelSpec, Truncation, DEFAULT_MAX_TERMS};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::mellin::PositiveReal;

/// Radius cap for sup-sums of decaying kernels; the remainder is bounded by the envelope.
pub const ABS_MOMENT_RADIUS_CAP: f64 = 4_000.0;

/// Tail level targeted before the cap kicks in.
const SUP_SUM_TAIL: f64 = 1e-12;

/// Inclusive index range `{k : |center − k| ≤ radius}`.
pub(crate) fn index_range(center: f64, radius: f64, max_terms: u64) -> Result<(i64, i64)> {
    let lo = (center - radius).ceil();
    let hi = (center + radius).floor();
    let needed = if hi >= lo { (hi - lo) as u64 + 1 } else { 0 };
    if needed > max_terms || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::TruncationBudget {
            needed,
            budget: max_terms,
        });
    }
    Ok((lo as i64, hi as i64))
}

/// `m_ν(χ, u) = Σ_k χ(e^{−k} u) (k − log u)^ν` for `ν ∈ {0, 1}`.
pub fn moment(k: &KernelSpec, nu: u32, u: PositiveReal, truncation: Truncation) -> Result<f64> {
    if nu > 1 {
        return Err(Error::InvalidParameter(format!("algebraic moments are defined for nu in {{0, 1}}, got {nu}")));
    }
    let c = u.ln();
    let radius = k.truncation_radius(truncation, f64::from(nu))?;
    let (lo, hi) = index_range(c, radius, DEFAULT_MAX_TERMS)?;
    let mut sum = 0.0;
    for j in lo..=hi {
        let d = j as f64 - c;
        let chi = k.eval_log(-d);
        sum += if nu == 0 { chi } else { chi * d };
    }
    Ok(sum)
}

/// `M_β(χ) = sup_u Σ_k |χ(e^{−k} u)| |k − log u|^β` over a grid of `log u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbsoluteMoment {
    pub beta: f64,
    /// Largest truncated sum found on the grid.
    pub sup: f64,
    /// Rigorous bound on the dropped tail; zero for compact kernels.
    pub tail_bound: f64,
    pub argmax_log_u: f64,
}

impl AbsoluteMoment {
    /// Upper estimate `sup + tail_bound`.
    pub fn value(&self) -> f64 {
        self.sup + self.tail_bound
    }
}

/// Grid points plus, for kernels with knots, every point where a knot crosses a
/// sample node, so piecewise sums are sampled at their corners.
fn refined_points(k: &KernelSpec, grid: &GridSpec) -> Result<Vec<f64>> {
    let mut points = grid.points()?;
    let (lo, hi) = grid.window()?;
    let mut corners: Vec<f64> = k.knots().to_vec();
    corners.push(0.0);
    for kn in corners {
        let frac = kn - kn.floor();
        let mut c = frac + lo.floor() - 1.0;
        while c <= hi {
            if c >= lo {
                points.push(c);
            }
            c += 1.0;
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    Ok(points)
}

fn sup_radius(k: &KernelSpec, weight: f64) -> Result<(f64, f64)> {
    if let Some(s) = k.log_support() {
        return Ok((s, 0.0));
    }
    let decay = k.decay().ok_or_else(|| {
        Error::InvalidParameter(format!("{k} has neither compact support nor a decay envelope"))
    })?;
    let full = decay.radius(SUP_SUM_TAIL, weight)?;
    let radius = full.min(ABS_MOMENT_RADIUS_CAP.max(decay.min_radius + decay.offset));
    Ok((radius, decay.tail_bound(radius, weight)?))
}

fn sup_over<F>(points: &[f64], f: F) -> (f64, f64)
where
    F: Fn(f64) -> f64 + Sync,
{
    points
        .par_iter()
        .map(|&c| (f(c), c))
        .reduce(|| (f64::NEG_INFINITY, f64::NAN), |a, b| if b.0 > a.0 { b } else { a })
}

pub fn absolute_moment(k: &KernelSpec, beta: f64, grid: &GridSpec) -> Result<AbsoluteMoment> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
    }
    let (radius, tail_bound) = sup_radius(k, beta)?;
    let points = refined_points(k, grid)?;
    let (sup, argmax) = sup_over(&points, |c| {
        let (lo, hi) = index_range(c, radius, DEFAULT_MAX_TERMS).unwrap_or((0, -1));
        (lo..=hi)
            .map(|j| {
                let d = j as f64 - c;
                let chi = k.eval_log(-d).abs();
                if beta == 0.0 {
                    chi
                } else {
                    chi * d.abs().powf(beta)
                }
            })
            .sum()
    });
    Ok(AbsoluteMoment {
        beta,
        sup,
        tail_bound,
        argmax_log_u: argmax,
    })
}

/// `sup_u Σ_{|k − w log u| > wγ} |χ(e^{−k} u^w)|` with `log u^w` ranging over `grid`.
pub fn chi4_tail(k: &KernelSpec, w: f64, gamma: f64, grid: &GridSpec) -> Result<f64> {
    if !(w > 0.0) || !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("w and gamma must be positive, got ({w}, {gamma})")));
    }
    let cut = w * gamma;
    if let Some(s) = k.log_support() {
        if cut >= s {
            return Ok(0.0);
        }
    }
    let (radius, tail) = sup_radius(k, 0.0)?;
    if radius <= cut {
        let decay: Decay = k.decay().expect("non-compact kernels carry a decay envelope");
        return decay.tail_bound(cut, 0.0);
    }
    let points = refined_points(k, grid)?;
    let (sup, _) = sup_over(&points, |c| {
        let (lo, hi) = index_range(c, radius, DEFAULT_MAX_TERMS).unwrap_or((0, -1));
        (lo..=hi)
            .filter(|&j| (j as f64 - c).abs() > cut)
            .map(|j| k.eval_log(c - j as f64).abs())
            .sum()
    });
    Ok(sup + tail)
}

/// Certification sweep parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    /// Grid of `log u`; moments are 1-periodic so `[0, 1]` suffices.
    pub grid: GridSpec,
    pub w_list: Vec<f64>,
    pub gamma: f64,
    pub betas: Vec<f64>,
    /// Tail tolerance for algebraic moments of decaying kernels.
    pub tail_tolerance: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            grid: GridSpec::fundamental(257),
            w_list: vec![10.0, 40.0, 160.0],
            gamma: 1.0,
            betas: vec![0.0, 1.0, 2.0],
            tail_tolerance: 1e-7,
        }
    }
}

/// Outcome of [`certify_kernel`].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub kernel: String,
    pub family: String,
    pub params: Value,
    pub m0_sup_deviation: f64,
    /// Mean of `m_1` over the grid.
    pub m1: f64,
    pub m1_spread: f64,
    pub m1_tolerance: f64,
    pub m1_is_constant: bool,
    /// `(β, sup + tail bound)`.
    pub m_beta: Vec<(f64, f64)>,
    /// Requested orders where `M_β` diverges for this kernel.
    pub skipped_betas: Vec<f64>,
    /// `(w, γ, tail)`.
    pub chi4: Vec<(f64, f64, f64)>,
}

impl MomentReport {
    pub fn m_beta(&self, beta: f64) -> Option<f64> {
        self.m_beta.iter().find(|(b, _)| *b == beta).map(|(_, v)| *v)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kernel": self.kernel,
            "family": self.family,
            "params": self.params,
            "m0_sup_deviation": self.m0_sup_deviation,
            "m1": self.m1,
            "m1_spread": self.m1_spread,
            "m1_tolerance": self.m1_tolerance,
            "m1_is_constant": self.m1_is_constant,
            "M_beta": self.m_beta.iter().map(|(b, v)| json!([b, v])).collect::<Vec<_>>(),
            "skipped_betas": self.skipped_betas,
            "chi4": self.chi4.iter().map(|(w, g, t)| json!([w, g, t])).collect::<Vec<_>>(),
        })
    }
}

fn family_params(k: &KernelSpec) -> (String, Value) {
    match k.family() {
        KernelFamily::BSpline { order } => ("bspline".into(), json!({ "order": order })),
        KernelFamily::Jackson { alpha, n } => ("jackson".into(), json!({ "alpha": alpha, "n": n })),
        KernelFamily::Averaged(inner) => {
            let (family, params) = family_params(inner);
            ("averaged".into(), json!({ "inner": { "family": family, "params": params } }))
        }
        KernelFamily::Custom(c) => ("custom".into(), json!({ "name": c.name })),
    }
}

/// Moment diagnostics: `m_0 ≡ 1`, constancy of `m_1`, `M_β`, and χ4 tails.
pub fn certify_kernel(k: &KernelSpec, opts: &CertifyOptions) -> Result<MomentReport> {
    let (truncation, m1_tolerance) = if k.is_compact() {
        (Truncation::ExactCompact, 1e-9)
    } else {
        let eps = opts.tail_tolerance;
        (Truncation::TailTolerance(eps), (10.0 * eps).max(1e-9))
    };
    let points = refined_points(k, &opts.grid)?;
    let sums: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&c| {
            let u = PositiveReal::from_log(c);
            Ok((moment(k, 0, u, truncation)?, moment(k, 1, u, truncation)?))
        })
        .collect::<Result<_>>()?;
    let m0_sup_deviation = sums.iter().map(|(m0, _)| (m0 - 1.0).abs()).fold(0.0, f64::max);
    let (lo, hi) = sums
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, m1)| (lo.min(*m1), hi.max(*m1)));
    let m1 = sums.iter().map(|(_, m1)| m1).sum::<f64>() / sums.len() as f64;
    let m1_spread = hi - lo;

    let mut m_beta = Vec::new();
    let mut skipped_betas = Vec::new();
    for &beta in &opts.betas {
        match absolute_moment(k, beta, &opts.grid) {
            Ok(m) => m_beta.push((beta, m.value())),
            Err(Error::ConditionViolation(_)) => skipped_betas.push(beta),
            Err(e) => return Err(e),
        }
    }
    let chi4 = opts
        .w_list
        .iter()
        .map(|&w| Ok((w, opts.gamma, chi4_tail(k, w, opts.gamma, &opts.grid)?)))
        .collect::<Result<_>>()?;
    let (family, params) = family_params(k);
    Ok(MomentReport {
        kernel: k.to_string(),
        family,
        params,
        m0_sup_deviation,
        m1,
        m1_spread,
        m1_tolerance,
        m1_is_constant: m1_spread <= m1_tolerance,
        m_beta,
        skipped_betas,
        chi4,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::fundamental(200)
    }

    #[test]
    fn bspline_partition_of_unity_and_zero_first_moment() {
        for n in 1..=5 {
            let k = KernelSpec::bspline(n).unwrap();
            for c in grid().points().unwrap() {
                let u = PositiveReal::from_log(c);
                assert!((moment(&k, 0, u, Truncation::ExactCompact).unwrap() - 1.0).abs() < 1e-14);
                if n > 1 {
                    assert!(moment(&k, 1, u, Truncation::ExactCompact).unwrap().abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn bspline_m0_of_order_three_is_exact_at_one() {
        let k = KernelSpec::bspline(3).unwrap();
        assert!((moment(&k, 0, PositiveReal::one(), Truncation::ExactCompact).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn moments_reject_higher_orders() {
        let k = KernelSpec::bspline(3).unwrap();
        assert!(moment(&k, 2, PositiveReal::one(), Truncation::ExactCompact).is_err());
    }

    #[test]
    fn absolute_moments_of_the_cubic() {
        let k = KernelSpec::bspline(3).unwrap();
        assert!((absolute_moment(&k, 0.0, &grid()).unwrap().value() - 1.0).abs() < 1e-14);
        // at log u = 1/2: 2 · B3(1/2) · (1/2)^{3/2}
        let m = absolute_moment(&k, 1.5, &grid()).unwrap();
        let want = 2.0 * 0.5 * 0.5f64.powf(1.5);
        assert!((m.value() - want).abs() < 1e-12, "{}", m.value());
        // at log u = 0: 2 · B3(1)
        let m2 = absolute_moment(&k, 2.0, &grid()).unwrap();
        assert!((m2.value() - 0.25).abs() < 1e-12, "{}", m2.value());
    }

    #[test]
    fn jackson_moment_condition() {
        let j = KernelSpec::jackson(1.0, 2).unwrap();
        assert!(matches!(absolute_moment(&j, 3.0, &grid()), Err(Error::ConditionViolation(_))));
        let m = absolute_moment(&j, 1.0, &GridSpec::fundamental(20)).unwrap();
        assert!(m.value().is_finite() && m.tail_bound < 0.05);
    }

    #[test]
    fn chi4_vanishes_beyond_compact_support() {
        let k = KernelSpec::bspline(3).unwrap();
        assert_eq!(chi4_tail(&k, 10.0, 0.2, &grid()).unwrap(), 0.0);
        assert!(chi4_tail(&k, 1.0, 0.6, &grid()).unwrap() > 0.0);
    }

    #[test]
    fn chi4_of_jackson_decays() {
        let j = KernelSpec::jackson(1.0, 2).unwrap();
        let g = GridSpec::fundamental(20);
        let a = chi4_tail(&j, 10.0, 1.0, &g).unwrap();
        let b = chi4_tail(&j, 160.0, 1.0, &g).unwrap();
        assert!(b < a && b < 1e-3, "{a} {b}");
    }

    #[test]
    fn certify_cubic() {
        let k = KernelSpec::bspline(3).unwrap();
        let report = certify_kernel(&k, &CertifyOptions::default()).unwrap();
        assert!(report.m0_sup_deviation < 1e-12);
        assert!(report.m1_is_constant && report.m1_spread < 1e-12);
        assert!((report.m_beta(0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(report.chi4.iter().all(|&(_, _, t)| t == 0.0));
        let v = report.to_json();
        assert_eq!(v["family"], "bspline");
        assert_eq!(v["params"]["order"], 3);
    }

    #[test]
    fn index_range_budget() {
        assert_eq!(index_range(0.25, 1.5, 10).unwrap(), (-1, 1));
        assert!(matches!(index_range(0.0, 1e9, 10), Err(Error::TruncationBudget { .. })));
    }
}
