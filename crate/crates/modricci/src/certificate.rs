//! Uniform verdict container shared by every check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Default pass tolerance on margins.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// One verified inequality instance over a sample set.
///
/// `margin = rhs - lhs` per sample; the certificate passes iff
/// `min_margin >= -tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: String,
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub samples: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub min_margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Measured constants (fitted C's, measured Psi's, smallest sufficient constants).
    pub constants: BTreeMap<String, f64>,
}

/// One exported row `{kind, model, params, s, lhs, rhs, margin}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub kind: String,
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl Certificate {
    pub fn new(kind: impl Into<String>, model: impl Into<String>) -> Self {
        Certificate {
            kind: kind.into(),
            model: model.into(),
            params: BTreeMap::new(),
            samples: Vec::new(),
            lhs: Vec::new(),
            rhs: Vec::new(),
            min_margin: 0.0,
            tolerance: DEFAULT_TOLERANCE,
            pass: true,
            constants: BTreeMap::new(),
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn set_param(&mut self, key: &str, value: f64) {
        self.params.insert(key.to_string(), value);
    }

    /// Records a measured constant; non-finite values are skipped.
    pub fn constant(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.constants.insert(key.to_string(), value);
        }
    }

    /// Adds one sample `lhs <= rhs` at parameter `s`.
    pub fn push(&mut self, s: f64, lhs: f64, rhs: f64) {
        self.samples.push(s);
        self.lhs.push(lhs);
        self.rhs.push(rhs);
    }

    /// Computes `min_margin` and `pass`.
    pub fn finish(mut self) -> Self {
        let mut m = f64::INFINITY;
        for (l, r) in self.lhs.iter().zip(&self.rhs) {
            let d = r - l;
            // NaN margins fail the certificate
            m = if d.is_nan() { f64::NEG_INFINITY } else { m.min(d) };
        }
        if self.lhs.is_empty() {
            m = 0.0;
        }
        self.min_margin = m;
        self.pass = m >= -self.tolerance;
        self
    }

    pub fn margins(&self) -> Vec<f64> {
        self.lhs.iter().zip(&self.rhs).map(|(l, r)| r - l).collect()
    }

    pub fn rows(&self) -> Vec<Row> {
        self.samples
            .iter()
            .zip(self.lhs.iter().zip(&self.rhs))
            .map(|(&s, (&lhs, &rhs))| Row {
                kind: self.kind.clone(),
                model: self.model.clone(),
                params: self.params.clone(),
                s,
                lhs,
                rhs,
                margin: rhs - lhs,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_margin_above_negative_tolerance() {
        let mut c = Certificate::new("k", "m").with_tolerance(1e-3);
        c.push(0.0, 1.0, 1.0005);
        c.push(1.0, 1.0, 0.9995);
        let c = c.finish();
        assert!((c.min_margin + 0.0005).abs() < 1e-12);
        assert!(c.pass);

        let mut c = Certificate::new("k", "m").with_tolerance(1e-4);
        c.push(0.0, 1.0, 0.9995);
        assert!(!c.finish().pass);
    }

    #[test]
    fn nan_fails() {
        let mut c = Certificate::new("k", "m");
        c.push(0.0, f64::NAN, 1.0);
        assert!(!c.finish().pass);
    }
}
