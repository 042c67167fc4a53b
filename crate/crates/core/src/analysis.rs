//! Sup-norm error tables, rate fits and the asymptotic probes built on them.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernels::{absolute_moment, moment, KernelSpec, Truncation};
use crate::mellin::{log_modulus_of_continuity, PositiveReal, TestFunction};
use crate::report::csv_float;
use crate::operators::{
    evaluation_margin, saturation_functional, saturation_limit, SampledSeries, SamplingConfig, SeriesKind,
};

/// Errors at or below this are treated as roundoff.
pub const NUMERIC_FLOOR: f64 = 1e-13;

/// Rows must exceed this to enter a rate fit.
pub const FIT_THRESHOLD: f64 = 10.0 * NUMERIC_FLOOR;

/// Errors at or below this count as exact reproduction.
pub const EXACT_THRESHOLD: f64 = 1e-12;

/// Absolute slack granted to bound comparisons for roundoff.
pub const BOUND_SLACK: f64 = 1e-12;

/// Sup norms are estimated on `[e^{-2}, e^{2}]`.
pub fn default_window(count: usize) -> GridSpec {
    GridSpec {
        log_lo: -2.0,
        log_hi: 2.0,
        count,
        margin: 0.0,
    }
}

/// Error level a series reaches on constants: roundoff, or the truncation tolerance
/// for decaying kernels.
pub fn reproduction_floor(cfg: &SamplingConfig) -> f64 {
    match cfg.truncation {
        Truncation::TailTolerance(eps) => EXACT_THRESHOLD.max(eps),
        Truncation::ExactCompact => EXACT_THRESHOLD,
    }
}

/// `grid` shrunk by at least the kernel's evaluation margin at rate `w`.
pub fn safe_grid(grid: &GridSpec, k: &KernelSpec, w: f64) -> GridSpec {
    grid.with_margin(grid.margin.max(evaluation_margin(k, w)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRow {
    pub w: f64,
    pub sup_error: f64,
    pub theory_bound: Option<f64>,
}

/// Sup errors along increasing `w`, with the fitted decay exponent when available.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
    pub fitted_rate: Option<f64>,
    pub fit_r2: Option<f64>,
}

impl ErrorTable {
    /// Sorts rows by `w` and fits the rate when enough rows clear the floor.
    pub fn new(mut rows: Vec<ErrorRow>) -> Self {
        rows.sort_by(|a, b| a.w.total_cmp(&b.w));
        let mut table = Self {
            rows,
            fitted_rate: None,
            fit_r2: None,
        };
        if let Ok((rate, r2)) = rate_fit(&table) {
            table.fitted_rate = Some(rate);
            table.fit_r2 = Some(r2);
        }
        table
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.sup_error).collect()
    }

    /// CSV with header `w,sup_error,theory_bound,w_times_error`; missing bounds are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("w,sup_error,theory_bound,w_times_error\n");
        for r in &self.rows {
            let bound = r.theory_bound.map(csv_float).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                csv_float(r.w),
                csv_float(r.sup_error),
                bound,
                csv_float(r.w * r.sup_error)
            );
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rows": self.rows.iter().map(|r| json!({
                "w": r.w,
                "sup_error": r.sup_error,
                "theory_bound": r.theory_bound,
                "w_times_error": r.w * r.sup_error,
            })).collect::<Vec<_>>(),
            "fitted_rate": self.fitted_rate,
            "fit_r2": self.fit_r2,
        })
    }
}

/// `max_{v ∈ grid} |op f(e^v) − f(e^v)|`.
pub fn sup_error(f: &TestFunction, k: &KernelSpec, cfg: &SamplingConfig, grid: &GridSpec, kind: SeriesKind) -> Result<f64> {
    let points = grid.points()?;
    let (lo, hi) = grid.window()?;
    let series = SampledSeries::new(f, k, cfg, kind, lo, hi)?;
    let errors = points
        .par_iter()
        .map(|&v| Ok((series.value(v)? - f.eval_log(v)).abs()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(errors.into_iter().fold(0.0, f64::max))
}

fn check_w_list(w_list: &[f64]) -> Result<()> {
    if w_list.is_empty() {
        return Err(Error::InvalidParameter("w_list is empty".into()));
    }
    if w_list.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidParameter("w values must be positive".into()));
    }
    Ok(())
}

/// Sup errors of one series over `w_list`, each on the margin-shrunk grid.
pub fn error_table(
    f: &TestFunction,
    k: &KernelSpec,
    cfg: &SamplingConfig,
    grid: &GridSpec,
    kind: SeriesKind,
    w_list: &[f64],
) -> Result<ErrorTable> {
    check_w_list(w_list)?;
    let rows = w_list
        .iter()
        .map(|&w| {
            let sup_error = sup_error(f, k, &cfg.with_w(w), &safe_grid(grid, k, w), kind)?;
            Ok(ErrorRow {
                w,
                sup_error,
                theory_bound: None,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ErrorTable::new(rows))
}

/// Least-squares slope of `log error` against `log w`, negated, with its r².
pub fn rate_fit(table: &ErrorTable) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.sup_error > FIT_THRESHOLD)
        .map(|r| (r.w.ln(), r.sup_error.ln()))
        .collect();
    if pts.is_empty() && !table.rows.is_empty() {
        return Err(Error::AtNumericFloor { floor: FIT_THRESHOLD });
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} of {} rows above the numeric floor; need 3",
            pts.len(),
            table.rows.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all rows share one w".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    Ok((-slope, r2))
}

/// `m₁` of the kernel, checked constant on a grid of `log u`.
pub fn certified_m1(k: &KernelSpec) -> Result<f64> {
    let (truncation, tolerance) = if k.is_compact() {
        (Truncation::ExactCompact, 1e-9)
    } else {
        (Truncation::TailTolerance(1e-7), 1e-6)
    };
    let values = GridSpec::fundamental(64)
        .points()?
        .par_iter()
        .map(|&c| moment(k, 1, PositiveReal::from_log(c), truncation))
        .collect::<Result<Vec<f64>>>()?;
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &m| (lo.min(m), hi.max(m)));
    if hi - lo > tolerance {
        return Err(Error::ConditionViolation(format!(
            "first moment of {k} is not constant (spread {})",
            hi - lo
        )));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VoronovskayaRow {
    pub w: f64,
    /// `|w(S_w f(x) − f(x)) − m₁ θf(x)|`.
    pub theorem_deviation: f64,
    /// `|w(S_w f(x e^{1/(2w)}) − f(x)) − (2m₁ + 1) θf(x)/2|`.
    pub corollary_deviation: f64,
}

pub fn voronovskaya_probe(f: &TestFunction, k: &KernelSpec, x: PositiveReal, w_list: &[f64]) -> Result<Vec<VoronovskayaRow>> {
    check_w_list(w_list)?;
    let v = x.ln();
    let dtheta = f.theta_log(v).ok_or_else(|| Error::MissingAnalyticDerivative {
        id: f.id().to_string(),
        order: 1,
    })?;
    let m1 = certified_m1(k)?;
    let fx = f.eval_log(v);
    w_list
        .iter()
        .map(|&w| {
            let cfg = SamplingConfig::for_kernel(k, w);
            let shifted = v + 0.5 / w;
            let series = SampledSeries::new(f, k, &cfg, SeriesKind::Generalized, v, shifted)?;
            Ok(VoronovskayaRow {
                w,
                theorem_deviation: (w * (series.value(v)? - fx) - m1 * dtheta).abs(),
                corollary_deviation: (w * (series.value(shifted)? - fx) - (2.0 * m1 + 1.0) * dtheta / 2.0).abs(),
            })
        })
        .collect()
}

/// `K w^{−α}/(α+1) ((2^α − 1) M_{α+1} + M₀)`.
pub fn direct_bound(alpha: f64, constant: f64, w: f64, m_alpha_plus_one: f64, m0: f64) -> f64 {
    constant * w.powf(-alpha) / (alpha + 1.0) * ((2f64.powf(alpha) - 1.0) * m_alpha_plus_one + m0)
}

/// Kantorovich error table whose rows carry the direct-theorem bound.
pub fn direct_bound_table(
    f: &TestFunction,
    k: &KernelSpec,
    cfg: &SamplingConfig,
    grid: &GridSpec,
    w_list: &[f64],
) -> Result<ErrorTable> {
    let holder = f.flags().log_holder.ok_or_else(|| {
        Error::ConditionViolation(format!("`{}` carries no log-Hölder flags", f.id()))
    })?;
    let moment_grid = GridSpec::fundamental(257);
    let m_next = absolute_moment(k, holder.alpha + 1.0, &moment_grid)?.value();
    let m0 = absolute_moment(k, 0.0, &moment_grid)?.value();
    let mut table = error_table(f, k, cfg, grid, SeriesKind::Kantorovich, w_list)?;
    for row in &mut table.rows {
        row.theory_bound = Some(direct_bound(holder.alpha, holder.constant, row.w, m_next, m0));
    }
    Ok(table)
}

/// First row whose error exceeds its bound by more than `slack`.
pub fn first_bound_violation(table: &ErrorTable, slack: f64) -> Option<ErrorRow> {
    table
        .rows
        .iter()
        .find(|r| r.theory_bound.is_some_and(|b| r.sup_error > b + slack))
        .copied()
}

/// [`direct_bound_table`] that fails with `BoundViolated` on the first exceeded bound.
pub fn direct_bound_check(
    f: &TestFunction,
    k: &KernelSpec,
    cfg: &SamplingConfig,
    grid: &GridSpec,
    w_list: &[f64],
) -> Result<ErrorTable> {
    let table = direct_bound_table(f, k, cfg, grid, w_list)?;
    match first_bound_violation(&table, BOUND_SLACK.max(reproduction_floor(cfg))) {
        Some(r) => Err(Error::BoundViolated {
            w: r.w,
            error: r.sup_error,
            bound: r.theory_bound.unwrap_or(f64::NAN),
        }),
        None => Ok(table),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SaturationVerdict {
    SuperconvergentConstant,
    SaturatedAtInverseW,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationReport {
    pub verdict: SaturationVerdict,
    pub table: ErrorTable,
    pub m1: f64,
}

impl SaturationReport {
    /// `w · error` at the largest `w`.
    pub fn final_w_times_error(&self) -> Option<f64> {
        self.table.rows.last().map(|r| r.w * r.sup_error)
    }

    /// A verdict the saturation theorem forbids: a constant missing the floor, or a
    /// nonconstant function beating `1/w` by more than the fit slack.
    pub fn contradicts_saturation(&self, constant: bool) -> bool {
        if constant {
            self.verdict != SaturationVerdict::SuperconvergentConstant
        } else {
            self.verdict == SaturationVerdict::SuperconvergentConstant
                || self.table.fitted_rate.is_some_and(|r| r > 1.1)
        }
    }
}

pub fn saturation_probe(
    f: &TestFunction,
    k: &KernelSpec,
    cfg: &SamplingConfig,
    grid: &GridSpec,
    w_list: &[f64],
) -> Result<SaturationReport> {
    let m1 = certified_m1(k)?;
    if (m1 + 0.5).abs() < 1e-9 {
        return Err(Error::ConditionViolation("saturation needs m1 != -1/2".into()));
    }
    let table = error_table(f, k, cfg, grid, SeriesKind::Kantorovich, w_list)?;
    let floor = reproduction_floor(cfg);
    let verdict = if table.rows.iter().all(|r| r.sup_error <= floor) {
        SaturationVerdict::SuperconvergentConstant
    } else {
        let scaled: Vec<f64> = table.rows.iter().map(|r| r.w * r.sup_error).collect();
        let stable = scaled.len() >= 2 && {
            let (prev, last) = (scaled[scaled.len() - 2], scaled[scaled.len() - 1]);
            last > 0.0 && (last / prev - 1.0).abs() <= 0.1
        };
        match table.fitted_rate {
            Some(rate) if (0.9..=1.1).contains(&rate) && stable => SaturationVerdict::SaturatedAtInverseW,
            _ => SaturationVerdict::Inconclusive,
        }
    };
    Ok(SaturationReport { verdict, table, m1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InverseVerdict {
    /// The rate reaches `α` and the grid Hölder quotient respects the cap.
    Consistent,
    /// The measured rate is below `α`; the inverse statement makes no claim.
    RateBelowAlpha,
    /// The rate reaches `α` but the quotient exceeds the cap.
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseReport {
    pub verdict: InverseVerdict,
    pub alpha: f64,
    /// `None` when every error sits at the numeric floor.
    pub fitted_rate: Option<f64>,
    /// `sup |f(x) − f(y)| / |log x − log y|^α` over grid pairs.
    pub quotient: f64,
    /// Quotient ceiling implied by the function's registered Hölder flags on the grid window.
    pub cap: Option<f64>,
    /// `M₁(θχ)`.
    pub theta_first_moment: f64,
    pub table: ErrorTable,
}

/// `sup_{x ≠ y} |f(x) − f(y)| / |log x − log y|^α` over pairs of grid points.
pub fn holder_quotient(f: &TestFunction, alpha: f64, grid: &GridSpec) -> Result<f64> {
    let points = grid.points()?;
    let values: Vec<f64> = points.iter().map(|&v| f.eval_log(v)).collect();
    Ok((0..points.len())
        .into_par_iter()
        .map(|i| {
            (i + 1..points.len())
                .map(|j| (values[i] - values[j]).abs() / (points[j] - points[i]).abs().powf(alpha))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

pub fn inverse_probe(
    f: &TestFunction,
    k: &KernelSpec,
    cfg: &SamplingConfig,
    grid: &GridSpec,
    w_list: &[f64],
    alpha: f64,
) -> Result<InverseReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let theta_first_moment = absolute_moment(&k.theta_kernel(), 1.0, &GridSpec::fundamental(200))?.value();
    if !theta_first_moment.is_finite() {
        return Err(Error::ConditionViolation(format!("M1 of the Mellin derivative of {k} is not finite")));
    }
    let table = error_table(f, k, cfg, grid, SeriesKind::Kantorovich, w_list)?;
    let fitted_rate = match rate_fit(&table) {
        Ok((rate, _)) => Some(rate),
        Err(Error::AtNumericFloor { .. }) => None,
        Err(e) => return Err(e),
    };
    let quotient = holder_quotient(f, alpha, grid)?;
    let (lo, hi) = grid.window()?;
    let cap = f.flags().log_holder.and_then(|h| {
        (h.alpha >= alpha).then(|| h.constant * (hi - lo).powf(h.alpha - alpha))
    });
    let reaches = fitted_rate.map_or(true, |r| r >= alpha - 0.05);
    let verdict = if !reaches {
        InverseVerdict::RateBelowAlpha
    } else if cap.is_some_and(|c| quotient > c * (1.0 + 1e-9) + BOUND_SLACK) {
        InverseVerdict::Inconsistent
    } else {
        InverseVerdict::Consistent
    };
    Ok(InverseReport {
        verdict,
        alpha,
        fitted_rate,
        quotient,
        cap,
        theta_first_moment,
        table,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GFunctionalRow {
    pub w: f64,
    pub value: f64,
    pub target: f64,
    pub gap: f64,
}

/// `G_f(φ)` over `w_list` against its limit `−(m₁ + ½) ∫ θφ · f`.
pub fn g_functional_probe(f: &TestFunction, phi: &TestFunction, k: &KernelSpec, w_list: &[f64]) -> Result<Vec<GFunctionalRow>> {
    check_w_list(w_list)?;
    let m1 = certified_m1(k)?;
    let target = saturation_limit(f, phi, m1)?;
    w_list
        .iter()
        .map(|&w| {
            let value = saturation_functional(f, phi, k, &SamplingConfig::for_kernel(k, w))?;
            Ok(GFunctionalRow {
                w,
                value,
                target,
                gap: (value - target).abs(),
            })
        })
        .collect()
}

/// Logarithmic modulus of continuity at `ν/w` for each `w`, the scale of the pointwise error.
pub fn modulus_profile(f: &TestFunction, grid: &GridSpec, nu: f64, w_list: &[f64]) -> Result<Vec<(f64, f64)>> {
    w_list
        .iter()
        .map(|&w| Ok((w, log_modulus_of_continuity(f, nu / w, grid)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry;

    fn b3() -> KernelSpec {
        KernelSpec::bspline(3).unwrap()
    }

    fn cfg(k: &KernelSpec) -> SamplingConfig {
        SamplingConfig::for_kernel(k, 8.0)
    }

    #[test]
    fn rate_fit_on_synthetic_power_laws() {
        for p in [0.5, 1.0, 2.0] {
            let rows = [8.0, 16.0, 32.0, 64.0]
                .iter()
                .map(|&w: &f64| ErrorRow {
                    w,
                    sup_error: 3.0 * w.powf(-p),
                    theory_bound: None,
                })
                .collect();
            let t = ErrorTable::new(rows);
            let (rate, r2) = rate_fit(&t).unwrap();
            assert!((rate - p).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rate_fit_errors() {
        let row = |w, e| ErrorRow {
            w,
            sup_error: e,
            theory_bound: None,
        };
        let floor = ErrorTable::new(vec![row(8.0, 1e-16), row(16.0, 0.0), row(32.0, 1e-15)]);
        assert!(matches!(rate_fit(&floor), Err(Error::AtNumericFloor { .. })));
        let short = ErrorTable::new(vec![row(8.0, 0.1), row(16.0, 0.05)]);
        assert!(matches!(rate_fit(&short), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn sup_error_examples() {
        let k = b3();
        let grid = safe_grid(&default_window(200), &k, 8.0);
        let e = sup_error(&registry::const1(), &k, &cfg(&k), &grid, SeriesKind::Kantorovich).unwrap();
        assert!(e <= 1e-12);
        let e = sup_error(&registry::log_windowed(), &k, &cfg(&k), &grid, SeriesKind::Kantorovich).unwrap();
        assert!((e - 1.0 / 16.0).abs() < 1e-10);
        let f = registry::sin_log();
        let e10 = sup_error(&f, &k, &cfg(&k).with_w(10.0), &grid, SeriesKind::Kantorovich).unwrap();
        let e40 = sup_error(&f, &k, &cfg(&k).with_w(40.0), &grid, SeriesKind::Kantorovich).unwrap();
        assert!(e40 < e10);
    }

    #[test]
    fn log_rate_is_exactly_one() {
        let k = b3();
        let t = error_table(
            &registry::log_windowed(),
            &k,
            &cfg(&k),
            &default_window(101),
            SeriesKind::Kantorovich,
            &[8.0, 16.0, 32.0, 64.0],
        )
        .unwrap();
        assert!((t.fitted_rate.unwrap() - 1.0).abs() < 1e-6);
        let csv = t.to_csv();
        assert!(csv.starts_with("w,sup_error,theory_bound,w_times_error\n8,"));
    }

    #[test]
    fn voronovskaya_examples() {
        let k = b3();
        let rows = voronovskaya_probe(&registry::const1(), &k, PositiveReal::one(), &[10.0, 20.0]).unwrap();
        assert!(rows.iter().all(|r| r.theorem_deviation < 1e-12 && r.corollary_deviation < 1e-12));
        let rows = voronovskaya_probe(&registry::sin_log(), &k, PositiveReal::one(), &[10.0, 80.0]).unwrap();
        assert!(rows[1].corollary_deviation < rows[0].corollary_deviation);
        assert!(rows[1].corollary_deviation <= 0.05);
        let rows = voronovskaya_probe(&registry::log_windowed(), &k, PositiveReal::from_log(0.4), &[10.0, 40.0]).unwrap();
        assert!(rows.iter().all(|r| r.theorem_deviation <= 1e-9));
        assert!(voronovskaya_probe(&registry::holder_half(), &k, PositiveReal::one(), &[10.0]).is_err());
    }

    #[test]
    fn direct_bound_examples() {
        let k = b3();
        let grid = default_window(201);
        let t = direct_bound_check(&registry::const1(), &k, &cfg(&k), &grid, &[8.0, 16.0]).unwrap();
        assert!(t.rows.iter().all(|r| r.theory_bound == Some(0.0)));
        let t = direct_bound_check(&registry::holder_half(), &k, &cfg(&k), &grid, &[16.0]).unwrap();
        let m = absolute_moment(&k, 1.5, &GridSpec::fundamental(1000)).unwrap().value();
        let want = 16f64.powf(-0.5) / 1.5 * ((2f64.sqrt() - 1.0) * m + 1.0);
        assert!((t.rows[0].theory_bound.unwrap() - want).abs() < 1e-14);
        let t = direct_bound_check(&registry::abs_sin_log(), &k, &cfg(&k), &grid, &[32.0]).unwrap();
        let m2 = absolute_moment(&k, 2.0, &GridSpec::fundamental(1000)).unwrap().value();
        assert!((t.rows[0].theory_bound.unwrap() - (m2 + 1.0) / 64.0).abs() < 1e-14);
    }

    #[test]
    fn saturation_verdicts() {
        let k = b3();
        let grid = default_window(201);
        let ws = [8.0, 16.0, 32.0, 64.0];
        let c = saturation_probe(&registry::const1(), &k, &cfg(&k), &grid, &ws).unwrap();
        assert_eq!(c.verdict, SaturationVerdict::SuperconvergentConstant);
        assert!(!c.contradicts_saturation(true));
        let l = saturation_probe(&registry::log_windowed(), &k, &cfg(&k), &grid, &ws).unwrap();
        assert_eq!(l.verdict, SaturationVerdict::SaturatedAtInverseW);
        assert!((l.final_w_times_error().unwrap() - 0.5).abs() < 1e-9);
        let s = saturation_probe(&registry::sin_log(), &k, &cfg(&k), &grid, &ws).unwrap();
        assert_eq!(s.verdict, SaturationVerdict::SaturatedAtInverseW);
    }

    #[test]
    fn inverse_examples() {
        let k = b3();
        let grid = default_window(201);
        let ws = [8.0, 16.0, 32.0, 64.0, 128.0];
        let h = inverse_probe(&registry::holder_half(), &k, &cfg(&k), &grid, &ws, 0.5).unwrap();
        assert!(h.quotient <= 1.0 + 1e-12);
        assert_eq!(h.verdict, InverseVerdict::Consistent);
        let c = inverse_probe(&registry::const1(), &k, &cfg(&k), &grid, &ws, 0.7).unwrap();
        assert_eq!(c.quotient, 0.0);
        let s = inverse_probe(&registry::sin_log(), &k, &cfg(&k), &grid, &ws, 1.0).unwrap();
        assert!(s.quotient <= 1.0);
        assert_eq!(s.verdict, InverseVerdict::Consistent);
    }

    #[test]
    fn g_functional_approaches_its_limit() {
        let k = b3();
        let rows = g_functional_probe(&registry::sin_log(), &registry::bump(), &k, &[20.0, 40.0, 80.0]).unwrap();
        assert!(rows[1].gap < rows[0].gap && rows[2].gap < rows[1].gap);
        assert!(rows[2].gap <= 0.02 * rows[2].target.abs() + 1e-3);
    }
}
