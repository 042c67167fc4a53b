//! Declarative experiment runner: config in, CSV/JSON artifacts and a summary out.

mod config;

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

pub use config::{ExperimentConfig, KernelField, Probe, Tolerances, SCHEMA_VERSION};

use crate::analysis::{
    direct_bound_table, error_table, first_bound_violation, g_functional_probe, inverse_probe, reproduction_floor,
    saturation_probe, voronovskaya_probe, InverseVerdict, BOUND_SLACK,
};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernels::{certify_kernel, CertifyOptions, KernelSpec, Truncation};
use crate::mellin::{PositiveReal, TestFunction};
use crate::operators::{AveragedKernelBridge, SamplingConfig, SeriesKind};
use crate::registry;

/// Environment variable overriding the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "MELLIN_SAMPLING_OUTPUT_DIR";

/// One failed contract.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub probe: Probe,
    pub function: Option<String>,
    pub assertion: String,
    pub measured: Option<f64>,
    pub required: Option<f64>,
}

/// A probe/function cell that was not applicable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub probe: Probe,
    pub function: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub schema: u32,
    pub kernel: String,
    pub passed: bool,
    pub probes: Vec<Probe>,
    pub violations: Vec<Violation>,
    pub skipped: Vec<Skipped>,
    pub files: Vec<String>,
}

/// A named output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Summary plus every artifact of a run, not yet written.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub summary: RunSummary,
    pub artifacts: Vec<Artifact>,
}

impl Report {
    /// Writes the artifacts and `summary.json` into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            std::fs::write(dir.join(&a.name), &a.contents)?;
        }
        std::fs::write(dir.join("summary.json"), pretty(&serde_json::to_value(&self.summary)?))
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    kernel: KernelSpec,
    functions: Vec<TestFunction>,
    violations: Vec<Violation>,
    skipped: Vec<Skipped>,
    artifacts: Vec<Artifact>,
}

impl Run<'_> {
    fn sampling(&self, w: f64) -> SamplingConfig {
        let base = SamplingConfig::for_kernel(&self.kernel, w);
        if self.kernel.is_compact() {
            base
        } else {
            base.with_truncation(Truncation::TailTolerance(self.cfg.tolerances.series_tail))
        }
    }

    fn violate(&mut self, probe: Probe, function: Option<&str>, assertion: String, measured: f64, required: f64) {
        self.violations.push(Violation {
            probe,
            function: function.map(str::to_string),
            assertion,
            measured: Some(measured),
            required: Some(required),
        });
    }

    fn failed(&mut self, probe: Probe, function: Option<&str>, err: &Error) {
        self.violations.push(Violation {
            probe,
            function: function.map(str::to_string),
            assertion: format!("probe failed: {err}"),
            measured: None,
            required: None,
        });
    }

    fn skip(&mut self, probe: Probe, function: &str, reason: impl Into<String>) {
        self.skipped.push(Skipped {
            probe,
            function: function.to_string(),
            reason: reason.into(),
        });
    }

    fn emit(&mut self, name: String, contents: String) {
        self.artifacts.push(Artifact { name, contents });
    }

    /// Non-increasing up to a relative margin and an absolute floor.
    fn check_monotone(&mut self, probe: Probe, function: &str, label: &str, ws: &[f64], values: &[f64]) {
        let tol = self.cfg.tolerances;
        for i in 1..values.len() {
            let allowed = values[i - 1] * (1.0 + tol.monotone_margin) + tol.monotone_floor;
            if values[i] > allowed {
                self.violate(
                    probe,
                    Some(function),
                    format!("{label} at w={} must not exceed the value at w={} (with margin)", ws[i], ws[i - 1]),
                    values[i],
                    allowed,
                );
            }
        }
    }

    fn certify(&mut self) {
        let tol = self.cfg.tolerances;
        let opts = CertifyOptions {
            w_list: self.cfg.w_list.clone(),
            tail_tolerance: tol.certify_tail,
            ..CertifyOptions::default()
        };
        let report = match certify_kernel(&self.kernel, &opts) {
            Ok(r) => r,
            Err(e) => return self.failed(Probe::Certify, None, &e),
        };
        let m0_required = if self.kernel.is_compact() {
            tol.compact_m0
        } else {
            10.0 * tol.certify_tail
        };
        if report.m0_sup_deviation > m0_required {
            self.violate(
                Probe::Certify,
                None,
                "partition of unity: sup |m0 - 1|".into(),
                report.m0_sup_deviation,
                m0_required,
            );
        }
        if !report.m1_is_constant {
            self.violate(Probe::Certify, None, "first moment constant: spread of m1".into(), report.m1_spread, report.m1_tolerance);
        }
        for &(beta, value) in &report.m_beta {
            if !value.is_finite() {
                self.violate(Probe::Certify, None, format!("M_{beta} finite"), value, f64::MAX);
            }
        }
        if let Some(s) = self.kernel.log_support() {
            for &(w, gamma, tail) in &report.chi4 {
                if w * gamma > s && tail != 0.0 {
                    self.violate(Probe::Certify, None, format!("tail vanishes beyond support at w={w}"), tail, 0.0);
                }
            }
        }
        self.emit("certificate.json".into(), pretty(&report.to_json()));
    }

    fn approximate(&mut self) {
        let mut csv = String::from("function,operator,w,sup_error,w_times_error\n");
        let functions = self.functions.clone();
        for f in &functions {
            for (kind, label) in [(SeriesKind::Generalized, "S"), (SeriesKind::Kantorovich, "I")] {
                let table = match error_table(f, &self.kernel, &self.sampling(1.0), &self.cfg.grid, kind, &self.cfg.w_list) {
                    Ok(t) => t,
                    Err(e) => {
                        self.failed(Probe::Approximate, Some(f.id()), &e);
                        continue;
                    }
                };
                let floor = self.cfg.tolerances.exact.max(reproduction_floor(&self.sampling(1.0)));
                for r in &table.rows {
                    let _ = writeln!(
                        csv,
                        "{},{label},{},{},{}",
                        f.id(),
                        csv_float(r.w),
                        csv_float(r.sup_error),
                        csv_float(r.w * r.sup_error)
                    );
                    if f.flags().constant && r.sup_error > floor {
                        self.violate(
                            Probe::Approximate,
                            Some(f.id()),
                            format!("constant reproduced by {label} at w={}", r.w),
                            r.sup_error,
                            floor,
                        );
                    }
                }
            }
        }
        self.emit("approximate.csv".into(), csv);
    }

    fn rates(&mut self) {
        let functions = self.functions.clone();
        for f in &functions {
            let sampling = self.sampling(1.0);
            let table = if f.flags().log_holder.is_some() {
                direct_bound_table(f, &self.kernel, &sampling, &self.cfg.grid, &self.cfg.w_list)
            } else {
                error_table(f, &self.kernel, &sampling, &self.cfg.grid, SeriesKind::Kantorovich, &self.cfg.w_list)
            };
            let table = match table {
                Ok(t) => t,
                Err(e) => {
                    self.failed(Probe::Rates, Some(f.id()), &e);
                    continue;
                }
            };
            if let Some(r) = first_bound_violation(&table, BOUND_SLACK.max(reproduction_floor(&sampling))) {
                self.violate(
                    Probe::Rates,
                    Some(f.id()),
                    format!("direct bound at w={}", r.w),
                    r.sup_error,
                    r.theory_bound.unwrap_or(f64::NAN),
                );
            }
            self.emit(format!("rates_{}.csv", f.id()), table.to_csv());
            let mut value = table.to_json();
            value["function"] = json!(f.id());
            value["kernel"] = json!(self.kernel.to_string());
            value["log_holder"] = json!(f.flags().log_holder.map(|h| json!({"alpha": h.alpha, "constant": h.constant})));
            self.emit(format!("rates_{}.json", f.id()), pretty(&value));
        }
    }

    fn voronovskaya(&mut self) {
        let x = PositiveReal::from_log(self.cfg.log_x);
        let functions = self.functions.clone();
        for f in &functions {
            if !f.has_theta() {
                self.skip(Probe::Voronovskaya, f.id(), "no analytic Mellin derivative");
                continue;
            }
            let rows = match voronovskaya_probe(f, &self.kernel, x, &self.cfg.w_list) {
                Ok(r) => r,
                Err(e) => {
                    self.failed(Probe::Voronovskaya, Some(f.id()), &e);
                    continue;
                }
            };
            let mut csv = String::from("w,theorem_deviation,corollary_deviation\n");
            for r in &rows {
                let _ = writeln!(
                    csv,
                    "{},{},{}",
                    csv_float(r.w),
                    csv_float(r.theorem_deviation),
                    csv_float(r.corollary_deviation)
                );
            }
            let ws: Vec<f64> = rows.iter().map(|r| r.w).collect();
            let dev: Vec<f64> = rows.iter().map(|r| r.corollary_deviation).collect();
            self.check_monotone(Probe::Voronovskaya, f.id(), "corollary deviation", &ws, &dev);
            if let Some(&last) = dev.last() {
                let required = self.cfg.tolerances.voronovskaya_final;
                if last > required {
                    self.violate(Probe::Voronovskaya, Some(f.id()), "final corollary deviation".into(), last, required);
                }
            }
            self.emit(format!("voronovskaya_{}.csv", f.id()), csv);
        }
    }

    fn lemma31(&mut self) {
        let grid = GridSpec {
            count: self.cfg.lemma31_points,
            ..self.cfg.grid
        };
        let mut csv = String::from("function,w,max_residual\n");
        let functions = self.functions.clone();
        for f in &functions {
            for &w in &self.cfg.w_list {
                let result = grid.window().and_then(|(lo, hi)| {
                    let bridge = AveragedKernelBridge::new(f, &self.kernel, &self.sampling(w), lo, hi)?;
                    grid.points()?
                        .iter()
                        .try_fold(0.0f64, |acc, &v| Ok(acc.max(bridge.residual(v)?)))
                });
                match result {
                    Ok(r) => {
                        let _ = writeln!(csv, "{},{},{}", f.id(), csv_float(w), csv_float(r));
                        let required = self.cfg.tolerances.lemma31;
                        if r > required {
                            self.violate(Probe::Lemma31, Some(f.id()), format!("bridge residual at w={w}"), r, required);
                        }
                    }
                    Err(e) => self.failed(Probe::Lemma31, Some(f.id()), &e),
                }
            }
        }
        self.emit("lemma31.csv".into(), csv);
    }

    fn saturation(&mut self) {
        let mut entries = Vec::new();
        let functions = self.functions.clone();
        for f in &functions {
            match saturation_probe(f, &self.kernel, &self.sampling(1.0), &self.cfg.grid, &self.cfg.w_list) {
                Ok(r) => {
                    if r.contradicts_saturation(f.flags().constant) {
                        self.violate(
                            Probe::Saturation,
                            Some(f.id()),
                            format!("saturation class (verdict {:?})", r.verdict),
                            r.table.fitted_rate.unwrap_or(f64::NAN),
                            1.1,
                        );
                    }
                    entries.push(json!({
                        "function": f.id(),
                        "verdict": r.verdict,
                        "m1": r.m1,
                        "fitted_rate": r.table.fitted_rate,
                        "fit_r2": r.table.fit_r2,
                        "w_times_error": r.table.rows.iter().map(|row| json!([row.w, row.w * row.sup_error])).collect::<Vec<_>>(),
                    }));
                }
                Err(e) => self.failed(Probe::Saturation, Some(f.id()), &e),
            }
        }
        self.emit("saturation.json".into(), pretty(&json!({ "kernel": self.kernel.to_string(), "results": entries })));
    }

    fn inverse(&mut self) {
        let mut entries = Vec::new();
        let functions = self.functions.clone();
        for f in &functions {
            let Some(holder) = f.flags().log_holder else {
                self.skip(Probe::Inverse, f.id(), "no log-Hölder exponent registered");
                continue;
            };
            match inverse_probe(f, &self.kernel, &self.sampling(1.0), &self.cfg.grid, &self.cfg.w_list, holder.alpha) {
                Ok(r) => {
                    if r.verdict == InverseVerdict::Inconsistent {
                        self.violate(
                            Probe::Inverse,
                            Some(f.id()),
                            "grid Hölder quotient within the registered constant".into(),
                            r.quotient,
                            r.cap.unwrap_or(f64::NAN),
                        );
                    }
                    entries.push(json!({
                        "function": f.id(),
                        "verdict": r.verdict,
                        "alpha": r.alpha,
                        "fitted_rate": r.fitted_rate,
                        "quotient": r.quotient,
                        "cap": r.cap,
                        "theta_first_moment": r.theta_first_moment,
                    }));
                }
                Err(e) => self.failed(Probe::Inverse, Some(f.id()), &e),
            }
        }
        self.emit("inverse.json".into(), pretty(&json!({ "kernel": self.kernel.to_string(), "results": entries })));
    }

    fn g_functional(&mut self) {
        let phi = registry::bump();
        let tol = self.cfg.tolerances;
        let mut csv = String::from("function,w,value,target,gap\n");
        let functions = self.functions.clone();
        for f in &functions {
            let rows = match g_functional_probe(f, &phi, &self.kernel, &self.cfg.w_list) {
                Ok(r) => r,
                Err(e) => {
                    self.failed(Probe::GFunctional, Some(f.id()), &e);
                    continue;
                }
            };
            for r in &rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    f.id(),
                    csv_float(r.w),
                    csv_float(r.value),
                    csv_float(r.target),
                    csv_float(r.gap)
                );
            }
            let ws: Vec<f64> = rows.iter().map(|r| r.w).collect();
            let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
            self.check_monotone(Probe::GFunctional, f.id(), "gap to the limit", &ws, &gaps);
            // the fixed final threshold presumes an O(1/w²)-or-better remainder, which needs C² data
            if let Some(last) = rows.last().filter(|_| f.has_theta2()) {
                let required = tol.g_functional_relative * last.target.abs() + tol.g_functional_absolute;
                if last.gap > required {
                    self.violate(Probe::GFunctional, Some(f.id()), "final gap to the limit".into(), last.gap, required);
                }
            }
        }
        self.emit("g_functional.csv".into(), csv);
    }
}

/// Runs every selected probe; numerical failures become violations, config problems errors.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let descriptor = cfg.kernel.descriptor()?;
    let kernel = descriptor.build()?;
    let functions = cfg
        .functions
        .iter()
        .map(|id| registry::lookup(id).ok_or_else(|| Error::InvalidParameter(format!("unknown test function `{id}`"))))
        .collect::<Result<Vec<_>>>()?;
    let mut probes = cfg.probes.clone();
    probes.sort();
    probes.dedup();
    let mut run = Run {
        cfg,
        kernel,
        functions,
        violations: Vec::new(),
        skipped: Vec::new(),
        artifacts: Vec::new(),
    };
    for probe in &probes {
        match probe {
            Probe::Certify => run.certify(),
            Probe::Approximate => run.approximate(),
            Probe::Rates => run.rates(),
            Probe::Voronovskaya => run.voronovskaya(),
            Probe::Lemma31 => run.lemma31(),
            Probe::Saturation => run.saturation(),
            Probe::Inverse => run.inverse(),
            Probe::GFunctional => run.g_functional(),
        }
    }
    let mut files: Vec<String> = run.artifacts.iter().map(|a| a.name.clone()).collect();
    files.push("summary.json".into());
    Ok(Report {
        summary: RunSummary {
            schema: SCHEMA_VERSION,
            kernel: descriptor.to_string(),
            passed: run.violations.is_empty(),
            probes,
            violations: run.violations,
            skipped: run.skipped,
            files,
        },
        artifacts: run.artifacts,
    })
}

/// Shortest round-trip decimal; exponent form outside `[1e-5, 1e16)`.
pub fn csv_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Kernel families and registered test functions with their class flags.
pub fn list_registry() -> String {
    let mut out = String::from("kernel families:\n");
    for (name, schema, note) in [
        ("BSpline(n)", r#"{"family": "bspline", "order": n}"#, "n >= 1; compact log-support n/2"),
        ("Jackson(alpha, n)", r#"{"family": "jackson", "alpha": a, "n": n}"#, "alpha >= 1, n >= 1; decays like |log x|^(-2n)"),
        ("Averaged(inner)", r#"{"family": "averaged", "inner": {...}}"#, "any family; log-support grows by 1/2"),
    ] {
        let _ = writeln!(out, "  {name:<18} {schema:<44} {note}");
    }
    out.push_str("test functions:\n");
    for f in registry::all() {
        let _ = writeln!(out, "  {:<12} {}", f.id(), f.flags());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn constants_pass_the_approximation_probe() {
        let cfg = config(r#"{"schema": 1, "kernel": "bspline(3)", "functions": ["const1"], "w_list": [8, 16], "probes": ["approximate"]}"#);
        let report = run_experiment(&cfg).unwrap();
        assert!(report.summary.passed, "{:?}", report.summary.violations);
        assert_eq!(report.artifacts[0].name, "approximate.csv");
        assert!(report.artifacts[0].contents.starts_with("function,operator,w,sup_error,w_times_error\n"));
    }

    #[test]
    fn log_rates_scale_like_one_half() {
        let cfg = config(
            r#"{"schema": 1, "kernel": "bspline(3)", "functions": ["log_windowed"], "w_list": [8, 16, 32], "probes": ["rates"]}"#,
        );
        let report = run_experiment(&cfg).unwrap();
        assert!(report.summary.passed);
        let csv = &report.artifacts.iter().find(|a| a.name == "rates_log_windowed.csv").unwrap().contents;
        for line in csv.lines().skip(1) {
            let last: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!((last - 0.5).abs() < 1e-9, "{line}");
        }
    }

    #[test]
    fn registry_listing() {
        let s = list_registry();
        for needle in ["BSpline(n)", "Jackson(alpha, n)", "Averaged(inner)", "const1", "bump", "log_holder(0.5, 1)"] {
            assert!(s.contains(needle), "{needle}");
        }
    }

    #[test]
    fn csv_floats_round_trip() {
        for x in [0.0, 1.0, 0.5, 1e-16, 5.421092828495615e-16, 123.25, -3.5e-9, 1e20, 8.0] {
            let s = csv_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(csv_float(8.0), "8");
        assert_eq!(csv_float(1e-16), "1e-16");
    }
}
