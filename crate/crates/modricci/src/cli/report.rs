//! Report assembly and the CSV views of a report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use super::suites::{CellError, CellOutput, Skipped};
use crate::certificate::{Certificate, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub index: usize,
    pub kind: String,
    pub model: String,
    pub params: BTreeMap<String, f64>,
    /// The sample parameter (radius, time or distance).
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub kind: String,
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub min_margin: f64,
    pub pass: bool,
    pub first_row: usize,
    pub rows: usize,
}

/// One entry of the empirical constants table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConstant {
    pub kind: String,
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub certificates: usize,
    pub failed_certificates: usize,
    pub rows: usize,
    pub passed_rows: usize,
    pub failed_rows: usize,
    pub skipped: usize,
    pub errors: usize,
    pub worst_margin: Option<f64>,
    pub worst_row: Option<usize>,
    pub constants: Vec<EmpiricalConstant>,
}

/// Everything a run produced. The wall time is kept out of the JSON so that
/// reruns are byte-identical; it is written to a separate timing file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub scenario: Scenario,
    pub certificates: Vec<CertificateEntry>,
    pub rows: Vec<ReportRow>,
    pub skipped: Vec<Skipped>,
    pub errors: Vec<CellError>,
    pub summary: Summary,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl Report {
    pub fn assemble(scenario: Scenario, cells: Vec<CellOutput>, wall_time_s: f64) -> Report {
        let mut certificates = Vec::new();
        let mut rows = Vec::new();
        let mut skipped = Vec::new();
        let mut errors = Vec::new();
        let mut constants = Vec::new();
        for cell in cells {
            for cert in cell.certificates {
                let cert = match scenario.scenario.tolerance {
                    Some(t) if cert.tolerance == DEFAULT_TOLERANCE => cert.with_tolerance(t).finish(),
                    _ => cert,
                };
                push_certificate(&cert, &mut certificates, &mut rows, &mut constants);
            }
            skipped.extend(cell.skipped);
            errors.extend(cell.errors);
        }
        let worst = rows
            .iter()
            .map(|r| (r.index, if r.margin.is_nan() { f64::NEG_INFINITY } else { r.margin }))
            .fold(None, |acc: Option<(usize, f64)>, (i, m)| match acc {
                Some((_, w)) if w <= m => acc,
                _ => Some((i, m)),
            });
        let passed_rows = rows.iter().filter(|r| r.pass).count();
        let summary = Summary {
            certificates: certificates.len(),
            failed_certificates: certificates.iter().filter(|c| !c.pass).count(),
            rows: rows.len(),
            passed_rows,
            failed_rows: rows.len() - passed_rows,
            skipped: skipped.len(),
            errors: errors.len(),
            worst_margin: worst.map(|w| w.1),
            worst_row: worst.map(|w| w.0),
            constants,
        };
        Report { schema: SCHEMA, scenario, certificates, rows, skipped, errors, summary, wall_time_s }
    }

    pub fn all_pass(&self) -> bool {
        self.errors.is_empty() && self.summary.failed_certificates == 0
    }

    /// `0` all pass, `1` a failing row, `2` a check rejected its input, `3` a
    /// numeric failure.
    pub fn exit_code(&self) -> i32 {
        if self.errors.iter().any(|e| !e.numeric) {
            2
        } else if !self.errors.is_empty() {
            3
        } else if self.summary.failed_certificates > 0 {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(|e| Error::ConfigParse { line: e.line(), field: String::new(), msg: e.to_string() })
    }

    /// The margin table: one line per row.
    pub fn margins_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "kind", "model", "params", "s", "lhs", "rhs", "margin", "pass"]).map_err(csv_err)?;
        for r in &self.rows {
            let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            w.write_record([
                r.index.to_string(),
                r.kind.clone(),
                r.model.clone(),
                params.join(";"),
                r.s.to_string(),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.margin.to_string(),
                r.pass.to_string(),
            ])
            .map_err(csv_err)?;
        }
        finish_csv(w)
    }

    /// `parameter,lhs,rhs,margin` for every row of `kind`, in report order.
    pub fn plot_data(&self, kind: &str) -> Result<String> {
        let rows: Vec<&ReportRow> = self.rows.iter().filter(|r| r.kind == kind).collect();
        if rows.is_empty() {
            return Err(Error::UnknownKind(kind.to_string()));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["parameter", "lhs", "rhs", "margin"]).map_err(csv_err)?;
        for r in rows {
            w.write_record([r.s.to_string(), r.lhs.to_string(), r.rhs.to_string(), r.margin.to_string()])
                .map_err(csv_err)?;
        }
        finish_csv(w)
    }
}

fn push_certificate(
    cert: &Certificate,
    certificates: &mut Vec<CertificateEntry>,
    rows: &mut Vec<ReportRow>,
    constants: &mut Vec<EmpiricalConstant>,
) {
    let first_row = rows.len();
    for row in cert.rows() {
        rows.push(ReportRow {
            index: rows.len(),
            pass: row.margin >= -cert.tolerance,
            kind: row.kind,
            model: row.model,
            params: row.params,
            s: row.s,
            lhs: row.lhs,
            rhs: row.rhs,
            margin: row.margin,
        });
    }
    for (name, &value) in &cert.constants {
        constants.push(EmpiricalConstant {
            kind: cert.kind.clone(),
            model: cert.model.clone(),
            params: cert.params.clone(),
            name: name.clone(),
            value,
        });
    }
    certificates.push(CertificateEntry {
        kind: cert.kind.clone(),
        model: cert.model.clone(),
        params: cert.params.clone(),
        tolerance: cert.tolerance,
        min_margin: cert.min_margin,
        pass: cert.pass,
        first_row,
        rows: rows.len() - first_row,
    });
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}
