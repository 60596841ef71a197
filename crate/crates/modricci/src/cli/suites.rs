//! The checks each named suite runs on one model.

use serde::{Deserialize, Serialize};

use super::scenario::{comparison_kind, Scenario};
use crate::certificate::Certificate;
use crate::constants::CAlphaPolicy;
use crate::convergence::splitting::{Component, Coordinate};
use crate::convergence::{
    cone_rigidity_suite, excess_suite, harmonic_approximation, segment_inequality_mc, splitting_report, RadialRegion,
};
use crate::curvature::{finite_difference_check, verify_lower_bound, verify_n_bakry_emery};
use crate::error::Result;
use crate::functional::{
    half_volume_threshold, verify_distance_power, verify_half_volume, verify_hypersurface_bound, verify_lq_vector_bound,
    verify_sobolev, TestFunction,
};
use crate::models::Model;
use crate::pde::{
    heat_kernel_radial, solve_poisson_radial, verify_cutoff, verify_gradient_estimate, verify_green_bound,
    verify_heat_kernel_bounds, verify_max_principle, verify_parabolic_estimate, CutoffSampling, HeatGridSpec,
    RadialFunction,
};
use crate::radial::{verify_comparison, verify_volume_ratio_monotone, ComparisonKind};

/// A check that did not apply to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub model: String,
    pub suite: String,
    pub check: String,
    pub reason: String,
}

/// A check that raised an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub model: String,
    pub suite: String,
    pub check: String,
    pub error: String,
    pub numeric: bool,
}

#[derive(Debug, Clone, Default)]
pub struct CellOutput {
    pub certificates: Vec<Certificate>,
    pub skipped: Vec<Skipped>,
    pub errors: Vec<CellError>,
}

struct Cell<'a> {
    model: &'a Model,
    suite: &'a str,
    out: CellOutput,
}

impl Cell<'_> {
    fn run(&mut self, check: &str, f: impl FnOnce() -> Result<Vec<Certificate>>) {
        match f() {
            Ok(certs) => self.out.certificates.extend(certs),
            Err(e) => self.out.errors.push(CellError {
                model: self.model.name().into(),
                suite: self.suite.into(),
                check: check.into(),
                error: e.to_string(),
                numeric: e.is_numeric(),
            }),
        }
    }

    fn one(&mut self, check: &str, f: impl FnOnce() -> Result<Certificate>) {
        self.run(check, || f().map(|c| vec![c]));
    }

    fn skip(&mut self, check: &str, reason: impl Into<String>) {
        self.out.skipped.push(Skipped {
            model: self.model.name().into(),
            suite: self.suite.into(),
            check: check.into(),
            reason: reason.into(),
        });
    }
}

/// Runs `suite` (a named suite other than `all`, or a comparison kind).
pub fn run_suite(model: &Model, suite: &str, sc: &Scenario) -> CellOutput {
    let mut cell = Cell { model, suite, out: CellOutput::default() };
    match suite {
        "curvature" => curvature(&mut cell, sc),
        "radial" => radial(&mut cell, sc, &ComparisonKind::ALL),
        "functional" => functional(&mut cell, sc),
        "pde" => pde(&mut cell, sc),
        "convergence" => convergence(&mut cell, sc),
        kind => radial(&mut cell, sc, &[comparison_kind(kind).expect("validated suite name")]),
    }
    cell.out
}

fn origin(model: &Model) -> Vec<f64> {
    vec![0.0; model.n()]
}

fn at_distance(n: usize, s: f64, diagonal: bool) -> Vec<f64> {
    if diagonal {
        vec![s / (n as f64).sqrt(); n]
    } else {
        let mut y = vec![0.0; n];
        y[0] = s;
        y
    }
}

fn curvature(cell: &mut Cell, sc: &Scenario) {
    let m = cell.model;
    let n = m.n();
    let radii: Vec<f64> = sc.ladders.r.iter().copied().filter(|&s| s < m.cut_radius()).collect();
    let points: Vec<Vec<f64>> =
        radii.iter().flat_map(|&s| [at_distance(n, s, false), at_distance(n, s, true)]).collect();
    cell.one("RicciLowerBound", || verify_lower_bound(m, &points));
    let p = &sc.curvature;
    cell.one("CurvatureFiniteDifference", || {
        let mut cert = Certificate::new("CurvatureFiniteDifference", m.name()).param("h", p.fd_step);
        for &s in p.fd_radii.iter().filter(|&&s| s < m.cut_radius()) {
            cert.push(s, finite_difference_check(m, &at_distance(n, s, true), p.fd_step)?, p.fd_tolerance);
        }
        Ok(cert.finish())
    });
    if let Some(big_n) = p.big_n {
        cell.one("NBakryEmery", || verify_n_bakry_emery(m, &points, big_n));
    }
}

fn radial(cell: &mut Cell, sc: &Scenario, kinds: &[ComparisonKind]) {
    let m = cell.model;
    let o = origin(m);
    for &kind in kinds {
        if !kind.applies_to(m) {
            cell.skip(kind.name(), "hypotheses do not hold on this model");
            continue;
        }
        let radii: Vec<f64> = match kind {
            ComparisonKind::BELaplacian | ComparisonKind::BEVolumeRatio => {
                sc.ladders.r.iter().copied().filter(|&s| s < 1.0).collect()
            }
            _ => sc.ladders.r.clone(),
        };
        if radii.is_empty() {
            cell.skip(kind.name(), "no radius below 1");
            continue;
        }
        cell.one(kind.name(), || verify_comparison(m, kind, &o, &radii, CAlphaPolicy::Default));
    }
    if kinds.len() > 1 && m.lambda() == 0.0 && m.k() == 0.0 {
        cell.one("VolumeRatioMonotone", || verify_volume_ratio_monotone(m, &o, &sc.ladders.r));
    }
}

fn functional(cell: &mut Cell, sc: &Scenario) {
    let m = cell.model;
    let o = origin(m);
    let p = &sc.functional;
    let radii = &sc.ladders.r;
    let nf = m.n() as f64;
    let q = p.q.unwrap_or(if m.alpha() > 0.0 { (0.5 * nf / m.alpha()).min(2.0) } else { 2.0 });
    cell.one("LqVectorBound", || verify_lq_vector_bound(m, &[o.clone()], radii, q));
    cell.one("DistancePowerIntegral", || verify_distance_power(m, radii, p.gamma));
    cell.one("HypersurfaceBound", || verify_hypersurface_bound(m, &o, radii));
    let r0 = half_volume_threshold(m);
    let small: Vec<f64> = radii.iter().copied().filter(|&r| r <= r0).collect();
    if small.is_empty() {
        cell.skip("HalfVolume", format!("no radius below r0 = {r0}"));
        cell.skip("Sobolev", format!("no radius below r0 = {r0}"));
        return;
    }
    cell.one("HalfVolume", || verify_half_volume(m, &[o.clone()], &small));
    let tests: Vec<TestFunction> = p.tests.iter().filter_map(|t| TestFunction::from_name(t).ok()).collect();
    cell.run("Sobolev", || small.iter().map(|&r| verify_sobolev(m, &o, r, &tests)).collect());
}

fn pde(cell: &mut Cell, sc: &Scenario) {
    let m = cell.model;
    let o = origin(m);
    let p = &sc.pde;
    let spec = HeatGridSpec { nr: p.nr, dtau: p.dtau, ..HeatGridSpec::default() };
    let compact = m.cut_radius().is_finite();
    if compact {
        cell.skip("HeatKernel", "the far-field truncation needs a noncompact model");
    } else {
        cell.run("HeatKernel", || {
            let grid = heat_kernel_radial(m, &o, p.t_max, &spec)?;
            let r = 0.5 * p.t_max.sqrt();
            Ok(vec![verify_heat_kernel_bounds(&grid, m)?, verify_parabolic_estimate(&grid, m, p.t_max, r)?])
        });
    }
    let radius = p.radius.min(0.5 * m.cut_radius());
    cell.run("Elliptic", || {
        let u = solve_poisson_radial(m, &o, radius, |_| 1.0, 0.0, 400)?;
        let f = RadialFunction::from_fn(radius, 400, |_| (1.0, 0.0));
        Ok(vec![verify_gradient_estimate(m, &u, &f, radius, p.q)?, verify_max_principle(m, &u, &f, radius, p.q)?])
    });
    if compact {
        cell.skip("GreenBound", "the far-field truncation needs a noncompact model");
    } else if m.n() >= 3 {
        cell.one("GreenBound", || verify_green_bound(m, &o, radius.min(1.0), &spec));
    } else {
        cell.skip("GreenBound", "needs n >= 3");
    }
    if !p.cutoff {
        cell.skip("CutoffProperties", "disabled in the scenario");
    } else if m.n() != 2 || m.space_form().is_none() {
        cell.skip("CutoffProperties", "runs on two-dimensional space forms");
    } else {
        let sampling = CutoffSampling { radial: p.cutoff_radial, angular: p.cutoff_angular };
        cell.one("CutoffProperties", || verify_cutoff(m, &o, 1.0, &spec, &sampling));
    }
}

fn convergence(cell: &mut Cell, sc: &Scenario) {
    let m = cell.model;
    let n = m.n();
    let o = origin(m);
    let p = &sc.convergence;
    let radii = &sc.ladders.r;
    let coords = Coordinate::all(n, 1.0);
    let h: Vec<Component> = coords.iter().map(|c| c as Component).collect();
    cell.run("Splitting", || {
        p.splitting_radii
            .iter()
            .filter(|&&r| r < m.cut_radius())
            .map(|&r| Ok(splitting_report(m, &o, r, &h)?.certificate(m, p.epsilon)))
            .collect()
    });
    cell.run("ConeRigidity", || radii.iter().map(|&r| cone_rigidity_suite(m, &o, r, p.delta_probe)).collect());
    if m.space_form().is_none() {
        for check in ["SegmentInequality", "Excess", "HarmonicApproximation"] {
            cell.skip(check, "needs closed-form geodesics");
        }
        return;
    }
    cell.run("SegmentInequality", || {
        radii
            .iter()
            .filter(|&&r| 3.0 * r < m.cut_radius())
            .map(|&r| {
                let ball = RadialRegion::ball(r);
                Ok(segment_inequality_mc(m, &o, r, |_: &[f64]| 1.0, ball, ball, p.pairs, sc.scenario.seed)?
                    .certificate(m, r))
            })
            .collect()
    });
    // endpoints inside the admissible distance lambda^{-1/2}
    let d = if m.lambda() > 0.0 { (0.9 / m.lambda().sqrt()).min(1.0) } else { 1.0 }.min(0.3 * m.cut_radius());
    let qp = at_distance(n, d, false);
    let qm: Vec<f64> = qp.iter().map(|v| -v).collect();
    let r = 0.4 * d;
    cell.one("Excess", || excess_suite(m, &o, &qp, &qm, r));
    if n == 2 {
        cell.one("HarmonicApproximation", || harmonic_approximation(m, &o, r, &qp, &qm));
    } else {
        cell.skip("HarmonicApproximation", "runs in dimension 2");
    }
}
