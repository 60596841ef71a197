//! Scenario files: flat TOML with one section per module.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{catalog_entry, ModelSpec};
use crate::radial::ComparisonKind;

pub const SUITES: [&str; 6] = ["curvature", "radial", "functional", "pde", "convergence", "all"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(default)]
    pub name: String,
    /// Catalog names or keys of `[model.<key>]` tables.
    pub models: Vec<String>,
    /// Named suites or comparison kinds.
    pub suites: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    /// Replaces the default certificate tolerance when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// Parameter ladders. An empty `lambda`, `K` or `alpha` list keeps each
/// model's own value; `R` is the list of radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ladders {
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default, rename = "K")]
    pub k: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default = "default_radii", rename = "R")]
    pub r: Vec<f64>,
}

fn default_radii() -> Vec<f64> {
    vec![0.25, 0.5, 1.0]
}

impl Default for Ladders {
    fn default() -> Self {
        Ladders { lambda: Vec::new(), k: Vec::new(), alpha: Vec::new(), r: default_radii() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_json")]
    pub json: String,
    #[serde(default = "default_csv")]
    pub csv: String,
}

fn default_dir() -> String {
    "modricci-out".into()
}
fn default_json() -> String {
    "report.json".into()
}
fn default_csv() -> String {
    "margins.csv".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: default_dir(), json: default_json(), csv: default_csv() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurvatureSection {
    /// Finite-difference step of the reconstruction check.
    pub fd_step: f64,
    pub fd_tolerance: f64,
    /// Distances from `O` of the reconstruction points.
    pub fd_radii: Vec<f64>,
    /// Runs the N-Bakry-Emery check when set.
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub big_n: Option<f64>,
}

impl Default for CurvatureSection {
    fn default() -> Self {
        CurvatureSection { fd_step: 1e-3, fd_tolerance: 1e-6, fd_radii: vec![0.5, 0.75, 1.0], big_n: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FunctionalSection {
    /// Exponent of the averaged field norm; defaults to `min(2, n / (2 alpha))`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    pub gamma: f64,
    /// Test functions by name: `bump1`, `bump2`, `bump3`, `gaussian`, `zero`.
    pub tests: Vec<String>,
}

impl Default for FunctionalSection {
    fn default() -> Self {
        FunctionalSection { q: None, gamma: 1.0, tests: vec!["bump1".into(), "bump2".into(), "bump3".into(), "gaussian".into()] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdeSection {
    pub t_max: f64,
    pub nr: usize,
    pub dtau: f64,
    /// Radius of the elliptic and Green checks.
    pub radius: f64,
    /// Exponent of the elliptic estimates.
    pub q: f64,
    /// Whether the cut-off construction runs (on two-dimensional space forms).
    pub cutoff: bool,
    /// Radial and angular samples of the cut-off checks.
    pub cutoff_radial: usize,
    pub cutoff_angular: usize,
}

impl Default for PdeSection {
    fn default() -> Self {
        PdeSection {
            t_max: 1.0,
            nr: 600,
            dtau: 0.01,
            radius: 1.0,
            q: 2.0,
            cutoff: true,
            cutoff_radial: 16,
            cutoff_angular: 96,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSection {
    pub pairs: usize,
    /// Radii of the splitting balls, independent of the `R` ladder.
    pub splitting_radii: Vec<f64>,
    /// Target epsilon of the splitting rows.
    pub epsilon: f64,
    pub delta_probe: f64,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        ConvergenceSection { pairs: 20_000, splitting_radii: vec![0.125, 0.25, 0.5], epsilon: 0.5, delta_probe: 0.2 }
    }
}

/// A parsed scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub ladders: Ladders,
    #[serde(default)]
    pub model: BTreeMap<String, ModelSpec>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub curvature: CurvatureSection,
    #[serde(default)]
    pub functional: FunctionalSection,
    #[serde(default)]
    pub pde: PdeSection,
    #[serde(default)]
    pub convergence: ConvergenceSection,
}

/// 1-based line of the first line mentioning `key` as an assignment or table.
fn line_of(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let t = l.trim_start();
            t.starts_with(&format!("{key} ")) || t.starts_with(&format!("{key}=")) || t.contains(&format!("[{key}"))
        })
        .map_or(0, |i| i + 1)
}

fn config_error(text: &str, field: &str, msg: impl Into<String>) -> Error {
    Error::ConfigParse { line: line_of(text, field), field: field.into(), msg: msg.into() }
}

/// The field named in a deserialization message, if any.
fn field_in_message(msg: &str) -> String {
    for marker in ["field `", "key `"] {
        if let Some(i) = msg.find(marker) {
            let rest = &msg[i + marker.len()..];
            if let Some(j) = rest.find('`') {
                return rest[..j].to_string();
            }
        }
    }
    String::new()
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        let sc: Scenario = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            let msg = e.message().to_string();
            Error::ConfigParse { line, field: field_in_message(&msg), msg }
        })?;
        sc.validate(text)?;
        Ok(sc)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Scenario> {
        Scenario::parse(&std::fs::read_to_string(path)?)
    }

    fn validate(&self, text: &str) -> Result<()> {
        if self.scenario.models.is_empty() {
            return Err(config_error(text, "models", "at least one model is required"));
        }
        if self.scenario.suites.is_empty() {
            return Err(config_error(text, "suites", "at least one suite is required"));
        }
        for s in &self.scenario.suites {
            if !SUITES.contains(&s.as_str()) && comparison_kind(s).is_none() {
                return Err(config_error(text, "suites", format!("unknown suite `{s}`")));
            }
        }
        for name in &self.scenario.models {
            if !self.model.contains_key(name) {
                catalog_entry(name)?;
            }
        }
        let l = &self.ladders;
        if l.r.is_empty() {
            return Err(config_error(text, "R", "the radius ladder is empty"));
        }
        if let Some(r) = l.r.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
            return Err(config_error(text, "R", format!("radius {r} is not in (0, 1]")));
        }
        if let Some(v) = l.lambda.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(config_error(text, "lambda", format!("{v} is not a finite nonnegative number")));
        }
        if let Some(v) = l.k.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(config_error(text, "K", format!("{v} is not a finite nonnegative number")));
        }
        if let Some(v) = l.alpha.iter().find(|v| !(**v >= 0.0 && **v < 1.0)) {
            return Err(config_error(text, "alpha", format!("{v} is not in [0, 1)")));
        }
        if let Some(t) = self.scenario.tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(config_error(text, "tolerance", format!("{t} is not a finite nonnegative number")));
            }
        }
        for name in &self.functional.tests {
            crate::functional::TestFunction::from_name(name)
                .map_err(|_| config_error(text, "tests", format!("unknown test function `{name}`")))?;
        }
        Ok(())
    }

    /// Every model variant: each named model crossed with the ladders.
    pub fn model_specs(&self) -> Result<Vec<ModelSpec>> {
        let mut out = Vec::new();
        for name in &self.scenario.models {
            let base = match self.model.get(name) {
                Some(spec) => {
                    let mut spec = spec.clone();
                    if spec.name.is_empty() {
                        spec.name = name.clone();
                    }
                    spec
                }
                None => catalog_entry(name)?,
            };
            let pick = |ladder: &[f64], own: f64| if ladder.is_empty() { vec![own] } else { ladder.to_vec() };
            for lambda in pick(&self.ladders.lambda, base.lambda) {
                for k in pick(&self.ladders.k, base.k) {
                    for alpha in pick(&self.ladders.alpha, base.alpha) {
                        let mut spec = base.clone();
                        let changed = lambda != base.lambda || k != base.k || alpha != base.alpha;
                        spec.lambda = lambda;
                        spec.k = k;
                        spec.alpha = alpha;
                        if changed {
                            spec.name = format!("{}[lambda={lambda},K={k},alpha={alpha}]", base.name);
                        }
                        out.push(spec);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// The comparison kind with this name.
pub fn comparison_kind(name: &str) -> Option<ComparisonKind> {
    ComparisonKind::ALL.into_iter().find(|k| k.name() == name)
}
