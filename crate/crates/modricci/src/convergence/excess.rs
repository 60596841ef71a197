//! Excess of a pair of points and harmonic replacements of distance functions.

use serde::{Deserialize, Serialize};

use super::ball::{annulus_rule, place};
use super::metric::{embed, require_space_form};
use crate::certificate::Certificate;
use crate::constants::{c_alpha, volume_exponent, EXCESS_DISTANCE_FACTOR};
use crate::error::{Error, Result};
use crate::geometry::SpaceForm;
use crate::models::Model;
use crate::numerics::quad::gauss_legendre_nodes;
use crate::numerics::KahanSum;

const EXCESS_PANELS: usize = 4;
const EXCESS_DIRECTIONS: usize = 64;
const SEGMENT_PROBES: usize = 33;
/// Slack of the trend rows: the measured ratio must halve up to 10%.
const HALVING: f64 = 0.55;
const FOURIER_SAMPLES: usize = 256;
const DISK_PANELS: usize = 6;
const DISK_ANGLES: usize = 128;
/// Ladder of radii for the harmonic trend; `R -> R/sqrt(10)` rescales to `lambda -> lambda/10`.
const HARMONIC_LADDER: [f64; 3] = [1.0, 0.316_227_766_016_837_94, 0.1];

/// Samples of the excess `e = d(., q+) + d(., q-) - d(q+, q-)` and of
/// `b(+-) = d(., q+-) - d(x, q+-)` on `B(x, R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessData {
    pub x: Vec<f64>,
    pub q_plus: Vec<f64>,
    pub q_minus: Vec<f64>,
    pub radius: f64,
    /// Sample points in normal coordinates at `O`.
    pub points: Vec<Vec<f64>>,
    /// Quadrature weights of the points for the Riemannian measure.
    pub weights: Vec<f64>,
    pub e: Vec<f64>,
    pub b_plus: Vec<f64>,
    pub b_minus: Vec<f64>,
}

impl ExcessData {
    pub fn sample(model: &Model, x: &[f64], q_plus: &[f64], q_minus: &[f64], radius: f64) -> Result<Self> {
        let sf = require_space_form(model, "excess")?;
        let (c, qp, qm) = (embed(&sf, x), embed(&sf, q_plus), embed(&sf, q_minus));
        let basis = sf.tangent_basis(&c);
        let (dp, dm, dpm) = (sf.dist(&c, &qp), sf.dist(&c, &qm), sf.dist(&qp, &qm));
        let mut data = ExcessData {
            x: x.to_vec(),
            q_plus: q_plus.to_vec(),
            q_minus: q_minus.to_vec(),
            radius,
            points: Vec::new(),
            weights: Vec::new(),
            e: Vec::new(),
            b_plus: Vec::new(),
            b_minus: Vec::new(),
        };
        for node in annulus_rule(model, 0.0, radius, EXCESS_PANELS, EXCESS_DIRECTIONS) {
            let p = place(&sf, &c, &basis, &node);
            let (a, b) = (sf.dist(&p, &qp), sf.dist(&p, &qm));
            data.points.push(super::segment::coords(&sf, &p));
            data.weights.push(node.w);
            data.e.push(a + b - dpm);
            data.b_plus.push(a - dp);
            data.b_minus.push(b - dm);
        }
        Ok(data)
    }

    pub fn mean_excess(&self) -> f64 {
        let (mut num, mut den) = (KahanSum::default(), KahanSum::default());
        for (e, w) in self.e.iter().zip(&self.weights) {
            num.add(e * w);
            den.add(*w);
        }
        num.value() / den.value()
    }

    pub fn sup_excess(&self) -> f64 {
        self.e.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    pub fn min_excess(&self) -> f64 {
        self.e.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }
}

fn excess_at(sf: &SpaceForm, p: &[f64], qp: &[f64], qm: &[f64]) -> f64 {
    sf.dist(p, qp) + sf.dist(p, qm) - sf.dist(qp, qm)
}

/// Excess certificate on `B(x, R)`: nonnegativity, vanishing on the
/// `q+ q-` segment, the averaged bound
/// `avg e <= C (e(x) + 2(n-1) R^2/(D - R) + lambda R^2 (D' + R) + K R^2/(D - R)^alpha + K R^{2-alpha})`
/// with `D`, `D'` the smaller and larger of `d(x, q+-)` and
/// `C = e^{C(alpha) K R^{1-alpha} + lambda R^2}`, its pointwise consequence
/// `sup e <= 3 Psi1^{1/(n+1)} R` with `Psi1 = C (...)/R`, and the trend of
/// `(sup e - e(x))/R` over the radii `R, R/2, R/4`.
pub fn excess_suite(model: &Model, x: &[f64], q_plus: &[f64], q_minus: &[f64], radius: f64) -> Result<Certificate> {
    excess_suite_with(model, x, q_plus, q_minus, radius, EXCESS_DISTANCE_FACTOR)
}

/// [`excess_suite`] with the constant `c` of the endpoint condition `d(x, q+-) <= c lambda^{-1/2}`.
pub fn excess_suite_with(
    model: &Model,
    x: &[f64],
    q_plus: &[f64],
    q_minus: &[f64],
    radius: f64,
    distance_factor: f64,
) -> Result<Certificate> {
    let sf = require_space_form(model, "excess")?;
    let n = model.n();
    for (field, p) in [("x", x), ("q_plus", q_plus), ("q_minus", q_minus)] {
        if p.len() != n {
            return Err(Error::InvalidSpec { field, reason: format!("expected {n} coordinates") });
        }
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidSpec { field: "radius", reason: format!("{radius} is not positive") });
    }
    let (c, qp, qm) = (embed(&sf, x), embed(&sf, q_plus), embed(&sf, q_minus));
    let (dp, dm) = (sf.dist(&c, &qp), sf.dist(&c, &qm));
    let (near, far) = (dp.min(dm), dp.max(dm));
    if near <= radius {
        return Err(Error::EndpointsTooClose(near));
    }
    sf.check_unique(&qp, &qm)?;
    let (lambda, k, alpha) = (model.lambda(), model.k(), model.alpha());
    if lambda > 0.0 && far > distance_factor / lambda.sqrt() {
        return Err(Error::InvalidSpec {
            field: "q",
            reason: format!("d(x, q) = {far} exceeds {distance_factor} lambda^(-1/2) = {}", distance_factor / lambda.sqrt()),
        });
    }

    let data = ExcessData::sample(model, x, q_plus, q_minus, radius)?;
    let e_x = excess_at(&sf, &c, &qp, &qm);
    let bracket = e_x
        + 2.0 * (n as f64 - 1.0) * radius * radius / (near - radius)
        + lambda * radius * radius * (far + radius)
        + k * radius * radius / (near - radius).powf(alpha)
        + k * radius.powf(2.0 - alpha);
    let c_mv = volume_exponent(c_alpha(alpha), k, alpha, lambda, radius).exp();
    let psi1 = c_mv * bracket / radius;
    let psi2 = psi1.powf(1.0 / (n as f64 + 1.0));

    let mut cert = Certificate::new("Excess", model.name()).with_tolerance(1e-9).param("R", radius);
    cert.constant("e_x", e_x);
    cert.constant("mean_e", data.mean_excess());
    cert.constant("sup_e", data.sup_excess());
    cert.constant("C_mean_value", c_mv);
    cert.constant("bracket", bracket);
    cert.constant("Psi1", psi1);
    cert.constant("Psi2", psi2);
    cert.push(radius, -data.min_excess(), 0.0);
    let on_segment = (0..SEGMENT_PROBES)
        .map(|i| {
            let p = sf.geodesic_point(&qp, &qm, i as f64 / (SEGMENT_PROBES - 1) as f64);
            excess_at(&sf, &p, &qp, &qm).abs()
        })
        .fold(0.0f64, f64::max);
    cert.constant("segment_excess", on_segment);
    cert.push(radius, on_segment, 0.0);
    cert.push(radius, data.mean_excess(), c_mv * bracket);
    cert.push(radius, data.sup_excess(), 3.0 * psi2 * radius);

    let mut prev = (data.sup_excess() - e_x) / radius;
    cert.constant("growth_0", prev);
    for j in 1..3 {
        let r = radius / 2f64.powi(j);
        let next = (ExcessData::sample(model, x, q_plus, q_minus, r)?.sup_excess() - e_x) / r;
        cert.constant(&format!("growth_{j}"), next);
        cert.push(r, next, HALVING * prev);
        prev = next;
    }
    Ok(cert.finish())
}

/// Conformal radius `rho(s) = s exp(int_0^s (1/f - 1/t) dt)` of the polar
/// metric `ds^2 + f(s)^2 dtheta^2`, so that `rho'/rho = 1/f`.
fn conformal_radius(model: &Model, s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let i: f64 = gauss_legendre_nodes(0.0, s, 4)
        .into_iter()
        .map(|(t, w)| {
            let f = model.warp_at(t)[0];
            w * (t - f) / (f * t)
        })
        .sum();
    s * i.exp()
}

/// Harmonic extension of boundary data on a geodesic disk of a surface whose
/// metric around the center is `ds^2 + f(s)^2 dtheta^2`.
///
/// Each Fourier mode `e^{i k theta}` extends as `(rho(s)/rho(R))^{|k|}`.
#[derive(Debug, Clone)]
pub struct HarmonicDisk {
    model: Model,
    radius: f64,
    rho_r: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

/// Value, first and second derivatives in the orthonormal polar frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskJet {
    pub value: f64,
    /// `(d/ds, (1/f) d/dtheta)`.
    pub grad: [f64; 2],
    /// Hessian in the frame `(d/ds, (1/f) d/dtheta)`.
    pub hess: [[f64; 2]; 2],
}

impl HarmonicDisk {
    /// Solves the Dirichlet problem with data `b(theta)` on the circle of radius `radius`.
    pub fn solve<B: Fn(f64) -> f64>(model: &Model, radius: f64, b: B) -> Result<Self> {
        if model.n() != 2 {
            return Err(Error::UnsupportedDimension { n: model.n(), reason: "harmonic replacement needs n = 2" });
        }
        if !(radius > 0.0 && radius < model.cut_radius()) {
            return Err(Error::InvalidSpec { field: "radius", reason: format!("{radius} is not in (0, cut radius)") });
        }
        let m = FOURIER_SAMPLES;
        let samples: Vec<f64> = (0..m).map(|j| b(2.0 * std::f64::consts::PI * j as f64 / m as f64)).collect();
        let modes = m / 2;
        let mut cos = vec![0.0; modes];
        let mut sin = vec![0.0; modes];
        for k in 0..modes {
            let (mut a, mut c) = (KahanSum::default(), KahanSum::default());
            for (j, v) in samples.iter().enumerate() {
                let t = 2.0 * std::f64::consts::PI * (k * j % m) as f64 / m as f64;
                a.add(v * t.cos());
                c.add(v * t.sin());
            }
            let scale = if k == 0 { 1.0 } else { 2.0 } / m as f64;
            cos[k] = a.value() * scale;
            sin[k] = c.value() * scale;
        }
        let disk = HarmonicDisk { model: model.clone(), radius, rho_r: conformal_radius(model, radius), cos, sin };
        let scale = samples.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let residual = (0..m)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                (disk.eval(radius, t).value - b(t)).abs()
            })
            .fold(0.0f64, f64::max);
        if !(residual <= 1e-8 * scale) {
            return Err(Error::SolverFailure(format!("boundary data not resolved by {m} modes: residual {residual:e}")));
        }
        Ok(disk)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eval(&self, s: f64, theta: f64) -> DiskJet {
        if s == 0.0 {
            // only the first mode has a gradient at the center, where rho ~ s
            let (sn, cs) = theta.sin_cos();
            let g = [
                (self.cos[1] * cs + self.sin[1] * sn) / self.rho_r,
                (-self.cos[1] * sn + self.sin[1] * cs) / self.rho_r,
            ];
            return DiskJet { value: self.cos[0], grad: g, hess: [[0.0; 2]; 2] };
        }
        let [f, fp, _] = self.model.warp_at(s);
        let p = conformal_radius(&self.model, s) / self.rho_r;
        let (mut h, mut hs, mut ht, mut hss, mut hst, mut htt) = (self.cos[0], 0.0, 0.0, 0.0, 0.0, 0.0);
        let mut pk = 1.0;
        for k in 1..self.cos.len() {
            pk *= p;
            if pk == 0.0 {
                break;
            }
            let kf = k as f64;
            let (sn, cs) = (kf * theta).sin_cos();
            let even = self.cos[k] * cs + self.sin[k] * sn;
            let odd = -self.cos[k] * sn + self.sin[k] * cs;
            h += pk * even;
            ht += kf * pk * odd;
            htt -= kf * kf * pk * even;
            hs += kf * pk / f * even;
            hss += kf * pk * (kf - fp) / (f * f) * even;
            hst += kf * kf * pk / f * odd;
        }
        let h12 = (hst - fp / f * ht) / f;
        let h22 = (htt + f * fp * hs) / (f * f);
        DiskJet { value: h, grad: [hs, ht / f], hess: [[hss, h12], [h12, h22]] }
    }
}

/// The three measured quantities of a harmonic replacement `h` of `b` on `B(x, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMeasures {
    /// `sup |h - b| / R`.
    pub sup_deviation: f64,
    /// `avg_{B(x,R)} |grad b - grad h|^2`.
    pub gradient_deviation: f64,
    /// `R^2 avg_{B(x,R/2)} |Hess h|^2`.
    pub hessian: f64,
}

/// Measures a harmonic replacement of `b`, given as a function of the polar
/// coordinates `(s, theta)` around the disk center returning the value and the
/// gradient in the frame `(d/ds, (1/f) d/dtheta)`.
pub fn harmonic_measures<B: Fn(f64, f64) -> (f64, [f64; 2])>(disk: &HarmonicDisk, b: B) -> HarmonicMeasures {
    let model = &disk.model;
    let radius = disk.radius;
    let angles: Vec<f64> =
        (0..DISK_ANGLES).map(|j| 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / DISK_ANGLES as f64).collect();
    let dth = 2.0 * std::f64::consts::PI / DISK_ANGLES as f64;
    let (mut sup, mut g_num, mut g_den, mut h_num, mut h_den) =
        (0.0f64, KahanSum::default(), KahanSum::default(), KahanSum::default(), KahanSum::default());
    for (s, ws) in gauss_legendre_nodes(0.0, radius, DISK_PANELS) {
        let w = ws * dth * model.warp_at(s)[0];
        for &t in &angles {
            let jet = disk.eval(s, t);
            let (bv, bg) = b(s, t);
            sup = sup.max((jet.value - bv).abs());
            g_num.add(w * ((bg[0] - jet.grad[0]).powi(2) + (bg[1] - jet.grad[1]).powi(2)));
            g_den.add(w);
        }
    }
    for (s, ws) in gauss_legendre_nodes(0.0, 0.5 * radius, DISK_PANELS) {
        let w = ws * dth * model.warp_at(s)[0];
        for &t in &angles {
            let hh = disk.eval(s, t).hess;
            h_num.add(w * (hh[0][0].powi(2) + 2.0 * hh[0][1].powi(2) + hh[1][1].powi(2)));
            h_den.add(w);
        }
    }
    HarmonicMeasures {
        sup_deviation: sup / radius,
        gradient_deviation: g_num.value() / g_den.value(),
        hessian: radius * radius * h_num.value() / h_den.value(),
    }
}

/// `b = d(., q) - d(x, q)` with its frame gradient, in polar coordinates at `x`.
fn distance_data<'a>(sf: &'a SpaceForm, c: &'a [f64], basis: &'a [Vec<f64>], q: &'a [f64]) -> impl Fn(f64, f64) -> (f64, [f64; 2]) + 'a {
    let d0 = sf.dist(c, q);
    move |s: f64, t: f64| {
        let (sn, cs) = t.sin_cos();
        let dir: Vec<f64> = basis[0].iter().zip(&basis[1]).map(|(a, b)| cs * a + sn * b).collect();
        let perp: Vec<f64> = basis[0].iter().zip(&basis[1]).map(|(a, b)| -sn * a + cs * b).collect();
        let (p, v) = sf.exp(c, &dir, s);
        // perp is parallel along the radial geodesic in every space form
        let away: Vec<f64> = sf.log_dir(&p, q).into_iter().map(|x| -x).collect();
        let grad = if s == 0.0 {
            [sf.inner(&away, &dir), sf.inner(&away, &perp)]
        } else {
            [sf.inner(&away, &v), sf.inner(&away, &perp)]
        };
        (sf.dist(&p, q) - d0, grad)
    }
}

/// Harmonic replacements of `b(+-)` on `B(x, R)` in a surface of constant
/// curvature, with the measured triple on the radii `R, R/sqrt(10), R/10`
/// (the rescaling of `lambda -> lambda/10 -> lambda/100` at fixed radius).
/// Trend rows require each quantity to shrink along the ladder.
pub fn harmonic_approximation(model: &Model, x: &[f64], radius: f64, q_plus: &[f64], q_minus: &[f64]) -> Result<Certificate> {
    let sf = require_space_form(model, "harmonic approximation")?;
    if model.n() != 2 {
        return Err(Error::UnsupportedDimension { n: model.n(), reason: "harmonic replacement needs n = 2" });
    }
    let c = embed(&sf, x);
    let basis = sf.tangent_basis(&c);
    let mut cert = Certificate::new("HarmonicApproximation", model.name()).with_tolerance(1e-12).param("R", radius);
    for (tag, q) in [("plus", q_plus), ("minus", q_minus)] {
        let qe = embed(&sf, q);
        if sf.dist(&c, &qe) <= radius {
            return Err(Error::EndpointsTooClose(sf.dist(&c, &qe)));
        }
        let b = distance_data(&sf, &c, &basis, &qe);
        let mut prev: Option<HarmonicMeasures> = None;
        for (j, f) in HARMONIC_LADDER.iter().enumerate() {
            let r = radius * f;
            let disk = HarmonicDisk::solve(model, r, |t| b(r, t).0)?;
            let m = harmonic_measures(&disk, &b);
            cert.constant(&format!("Psi_{tag}_{j}"), m.sup_deviation);
            cert.constant(&format!("grad_{tag}_{j}"), m.gradient_deviation);
            cert.constant(&format!("hess_{tag}_{j}"), m.hessian);
            if let Some(p) = prev {
                cert.push(r, m.sup_deviation, p.sup_deviation);
                cert.push(r, m.gradient_deviation, p.gradient_deviation);
                cert.push(r, m.hessian, p.hessian);
            }
            prev = Some(m);
        }
    }
    Ok(cert.finish())
}
