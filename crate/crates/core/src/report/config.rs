use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernels::KernelDescriptor;
use crate::registry;

/// The only config schema version this build understands.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Probe {
    Certify,
    Approximate,
    Rates,
    Voronovskaya,
    Lemma31,
    Saturation,
    Inverse,
    GFunctional,
}

impl Probe {
    pub const ALL: [Probe; 8] = [
        Probe::Certify,
        Probe::Approximate,
        Probe::Rates,
        Probe::Voronovskaya,
        Probe::Lemma31,
        Probe::Saturation,
        Probe::Inverse,
        Probe::GFunctional,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Probe::Certify => "certify",
            Probe::Approximate => "approximate",
            Probe::Rates => "rates",
            Probe::Voronovskaya => "voronovskaya",
            Probe::Lemma31 => "lemma31",
            Probe::Saturation => "saturation",
            Probe::Inverse => "inverse",
            Probe::GFunctional => "g-functional",
        }
    }
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Kernel given either as an object or in compact text form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelField {
    Text(String),
    Object(KernelDescriptor),
}

impl KernelField {
    pub fn descriptor(&self) -> Result<KernelDescriptor> {
        match self {
            KernelField::Text(s) => s.parse(),
            KernelField::Object(d) => Ok(d.clone()),
        }
    }
}

/// Contract thresholds; every field may be overridden individually.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Series tail tolerance for decaying kernels.
    pub series_tail: f64,
    /// Tail tolerance for certifying decaying kernels.
    pub certify_tail: f64,
    /// `m₀` deviation allowed for compact kernels.
    pub compact_m0: f64,
    /// Error treated as exact reproduction of constants.
    pub exact: f64,
    pub lemma31: f64,
    pub voronovskaya_final: f64,
    /// Relative growth tolerated between consecutive deviations.
    pub monotone_margin: f64,
    /// Differences below this never count against monotonicity.
    pub monotone_floor: f64,
    pub g_functional_relative: f64,
    pub g_functional_absolute: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            series_tail: 1e-10,
            certify_tail: 1e-7,
            compact_m0: 1e-12,
            exact: 1e-12,
            lemma31: 1e-8,
            voronovskaya_final: 0.05,
            monotone_margin: 0.05,
            monotone_floor: 1e-9,
            g_functional_relative: 0.02,
            g_functional_absolute: 1e-3,
        }
    }
}

fn default_grid() -> GridSpec {
    GridSpec {
        log_lo: -2.0,
        log_hi: 2.0,
        count: 201,
        margin: 0.0,
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_lemma31_points() -> usize {
    50
}

/// A declarative experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub kernel: KernelField,
    #[serde(default)]
    pub functions: Vec<String>,
    pub w_list: Vec<f64>,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    pub probes: Vec<Probe>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// `log x` where pointwise probes evaluate.
    #[serde(default)]
    pub log_x: f64,
    /// Grid points per window for the averaged-kernel bridge.
    #[serde(default = "default_lemma31_points")]
    pub lemma31_points: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        self.kernel.descriptor()?.build()?;
        if self.w_list.is_empty() {
            return Err(Error::InvalidParameter("w_list is empty".into()));
        }
        if self.w_list.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("w_list entries must be positive".into()));
        }
        if self.w_list.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidParameter("w_list must be strictly ascending".into()));
        }
        if self.probes.is_empty() {
            return Err(Error::InvalidParameter("no probes selected".into()));
        }
        if let Some(id) = self.functions.iter().find(|id| registry::lookup(id).is_none()) {
            return Err(Error::InvalidParameter(format!("unknown test function `{id}`")));
        }
        let needs_functions = self.probes.iter().any(|p| *p != Probe::Certify);
        if needs_functions && self.functions.is_empty() {
            return Err(Error::InvalidParameter("selected probes need at least one function".into()));
        }
        if self.lemma31_points < 2 {
            return Err(Error::InvalidParameter("lemma31_points must be >= 2".into()));
        }
        self.grid.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": 1,
        "kernel": "bspline(3)",
        "functions": ["const1"],
        "w_list": [8, 16],
        "probes": ["approximate"]
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.grid.count, 201);
        assert_eq!(cfg.tolerances.lemma31, 1e-8);
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn object_kernel_and_probe_names() {
        let text = MINIMAL
            .replace("\"bspline(3)\"", r#"{"family": "jackson", "alpha": 1, "n": 2}"#)
            .replace("[\"approximate\"]", "[\"certify\", \"g-functional\"]");
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(cfg.kernel.descriptor().unwrap().to_string(), "jackson(1,2)");
        assert_eq!(cfg.probes, vec![Probe::Certify, Probe::GFunctional]);
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            MINIMAL.replace("\"schema\": 1", "\"schema\": 2"),
            MINIMAL.replace("[8, 16]", "[16, 8]"),
            MINIMAL.replace("[8, 16]", "[]"),
            MINIMAL.replace("\"const1\"", "\"nope\""),
            MINIMAL.replace("[\"approximate\"]", "[]"),
            MINIMAL.replace("[\"approximate\"]", "[\"plot\"]"),
            MINIMAL.replace("\"schema\": 1", "\"schema\": 1, \"extra\": true"),
            MINIMAL.replace("bspline(3)", "bspline(0)"),
        ];
        for text in cases {
            assert!(ExperimentConfig::from_json(&text).is_err(), "{text}");
        }
    }
}
