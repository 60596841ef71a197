//! Diagnostics of candidate splitting maps `h = (h_1, ..., h_k)` on a ball.

use serde::{Deserialize, Serialize};

use super::ball::{annulus_rule, place};
use super::metric::{embed, require_space_form};
use super::segment::coords;
use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::models::Model;
use crate::numerics::eigen::symmetric_eigenvalues;
use crate::numerics::{invert, KahanSum};

const PANELS: usize = 4;
const DIRECTIONS: usize = 64;
const STEP_GRAD: f64 = 1e-5;
const STEP_HESS: f64 = 1e-3;

/// A component of a candidate map on normal coordinates at `O`. Closures get
/// finite-difference derivatives; implementors may supply exact ones.
pub trait MapComponent: Sync {
    fn value(&self, y: &[f64]) -> f64;

    /// Coordinate gradient `dh/dy_a`.
    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        (0..y.len())
            .map(|a| (self.value(&shifted(y, a, STEP_GRAD)) - self.value(&shifted(y, a, -STEP_GRAD))) / (2.0 * STEP_GRAD))
            .collect()
    }

    /// Coordinate second derivatives `d^2 h / dy_a dy_b`.
    fn second_derivatives(&self, y: &[f64]) -> Vec<Vec<f64>> {
        let n = y.len();
        let e = STEP_HESS;
        let h = |z: &[f64]| self.value(z);
        let h0 = h(y);
        let mut out = vec![vec![0.0; n]; n];
        for a in 0..n {
            out[a][a] = (h(&shifted(y, a, e)) - 2.0 * h0 + h(&shifted(y, a, -e))) / (e * e);
            for b in 0..a {
                let pp = h(&shifted(&shifted(y, a, e), b, e));
                let pm = h(&shifted(&shifted(y, a, e), b, -e));
                let mp = h(&shifted(&shifted(y, a, -e), b, e));
                let mm = h(&shifted(&shifted(y, a, -e), b, -e));
                out[a][b] = (pp - pm - mp + mm) / (4.0 * e * e);
                out[b][a] = out[a][b];
            }
        }
        out
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> MapComponent for F {
    fn value(&self, y: &[f64]) -> f64 {
        self(y)
    }
}

/// `scale * y_index`, with exact derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coordinate {
    pub index: usize,
    pub scale: f64,
}

impl Coordinate {
    /// The first `n` normal coordinates, scaled.
    pub fn all(n: usize, scale: f64) -> Vec<Coordinate> {
        (0..n).map(|index| Coordinate { index, scale }).collect()
    }
}

impl MapComponent for Coordinate {
    fn value(&self, y: &[f64]) -> f64 {
        self.scale * y[self.index]
    }

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; y.len()];
        g[self.index] = self.scale;
        g
    }

    fn second_derivatives(&self, y: &[f64]) -> Vec<Vec<f64>> {
        vec![vec![0.0; y.len()]; y.len()]
    }
}

pub type Component<'a> = &'a dyn MapComponent;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingReport {
    pub components: usize,
    pub radius: f64,
    /// `r sup |Delta h_i|`, the scale-free harmonicity defect.
    pub harmonic_residual: f64,
    /// `sup |dh|` (operator norm).
    pub sup_gradient: f64,
    /// `max_{ij} avg |<grad h_i, grad h_j> - delta_ij|^2`.
    pub gram_deviation: f64,
    /// `max_i r^2 avg |Hess h_i|`.
    pub hessian: f64,
    /// Smallest epsilon meeting each condition: the residual, `sup|dh| - 1`,
    /// and the square roots of the two averages.
    pub epsilons: [f64; 4],
    pub epsilon_achieved: f64,
    /// Which condition (1-4) sets `epsilon_achieved`.
    pub binding: usize,
}

impl SplittingReport {
    /// Rows for the four conditions at the target `epsilon`.
    pub fn certificate(&self, model: &Model, epsilon: f64) -> Certificate {
        let mut cert = Certificate::new("Splitting", model.name()).param("r", self.radius).param("epsilon", epsilon);
        cert.constant("epsilon_achieved", self.epsilon_achieved);
        cert.constant("binding_condition", self.binding as f64);
        cert.push(self.radius, self.harmonic_residual, epsilon);
        cert.push(self.radius, self.sup_gradient, 1.0 + epsilon);
        cert.push(self.radius, self.gram_deviation, epsilon * epsilon);
        cert.push(self.radius, self.hessian, epsilon * epsilon);
        cert.finish()
    }
}

fn shifted(y: &[f64], a: usize, t: f64) -> Vec<f64> {
    let mut z = y.to_vec();
    z[a] += t;
    z
}

/// `d_l g_ij` of `g = phi^2 delta + (1 - phi^2) u u^T`, `phi = f(s)/s`, `u = y/s`.
fn metric_derivative(model: &Model, y: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let n = y.len();
    let s = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut dg = vec![vec![vec![0.0; n]; n]; n];
    if s == 0.0 {
        return dg;
    }
    let [f, f1, _] = model.warp_at(s);
    let phi = f / s;
    let dphi = (f1 * s - f) / (s * s);
    let u: Vec<f64> = y.iter().map(|v| v / s).collect();
    let du = |i: usize, l: usize| (f64::from(u8::from(i == l)) - u[i] * u[l]) / s;
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                let delta = f64::from(u8::from(i == j));
                dg[l][i][j] =
                    2.0 * phi * dphi * u[l] * (delta - u[i] * u[j]) + (1.0 - phi * phi) * (du(i, l) * u[j] + u[i] * du(j, l));
            }
        }
    }
    dg
}

/// `Gamma^c_{ab}` of the coordinate metric at `y`.
fn christoffel(model: &Model, y: &[f64], ginv: &[Vec<f64>]) -> Vec<Vec<Vec<f64>>> {
    let n = y.len();
    let dg = metric_derivative(model, y);
    (0..n)
        .map(|c| {
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| (0..n).map(|l| 0.5 * ginv[c][l] * (dg[a][b][l] + dg[b][a][l] - dg[l][a][b])).sum())
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Measures the conditions of an epsilon-splitting map for `h` on `B(x, r)`
/// with one quadrature rule for every average. Balls around `O` work on
/// every model; other centers need a space form.
pub fn splitting_report(model: &Model, x: &[f64], r: f64, h: &[Component]) -> Result<SplittingReport> {
    let n = model.n();
    if x.len() != n {
        return Err(Error::InvalidSpec { field: "x", reason: format!("expected {n} coordinates") });
    }
    if h.is_empty() {
        return Err(Error::InvalidSpec { field: "h", reason: "the map needs at least one component".into() });
    }
    if !(r > 0.0 && r < model.cut_radius()) {
        return Err(Error::InvalidSpec { field: "r", reason: format!("{r} is not in (0, cut radius)") });
    }
    let nodes = annulus_rule(model, 0.0, r, PANELS, DIRECTIONS);
    let points: Vec<(Vec<f64>, f64)> = if x.iter().all(|&v| v == 0.0) {
        nodes.iter().map(|nd| (nd.u.iter().map(|u| u * nd.s).collect(), nd.w)).collect()
    } else {
        let sf = require_space_form(model, "splitting off the base point")?;
        let c = embed(&sf, x);
        let basis = sf.tangent_basis(&c);
        nodes.iter().map(|nd| (coords(&sf, &place(&sf, &c, &basis, nd)), nd.w)).collect()
    };
    let k = h.len();
    let mut residual = 0.0f64;
    let mut sup_grad = 0.0f64;
    let mut gram = vec![vec![KahanSum::default(); k]; k];
    let mut hess = vec![KahanSum::default(); k];
    let mut vol = KahanSum::default();
    for (y, w) in &points {
        let g = model.metric(y);
        let gi = invert(&g)?;
        let gam = christoffel(model, y, &gi);
        let grads: Vec<Vec<f64>> = h.iter().map(|hi| hi.gradient(y)).collect();
        let mut gm = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..=i {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        s += grads[i][a] * gi[a][b] * grads[j][b];
                    }
                }
                gm[i][j] = s;
                gm[j][i] = s;
            }
        }
        sup_grad = sup_grad.max(symmetric_eigenvalues(&gm).into_iter().fold(0.0f64, f64::max).sqrt());
        for i in 0..k {
            for j in 0..k {
                let delta = if i == j { 1.0 } else { 0.0 };
                gram[i][j].add(w * (gm[i][j] - delta).powi(2));
            }
            let d2 = h[i].second_derivatives(y);
            let cov: Vec<Vec<f64>> = (0..n)
                .map(|a| (0..n).map(|b| d2[a][b] - (0..n).map(|c| gam[c][a][b] * grads[i][c]).sum::<f64>()).collect())
                .collect();
            let mut lap = 0.0;
            let mut norm2 = 0.0;
            for a in 0..n {
                for b in 0..n {
                    lap += gi[a][b] * cov[a][b];
                    for c in 0..n {
                        for d in 0..n {
                            norm2 += gi[a][c] * gi[b][d] * cov[a][b] * cov[c][d];
                        }
                    }
                }
            }
            residual = residual.max(r * lap.abs());
            hess[i].add(w * norm2.max(0.0).sqrt());
        }
        vol.add(*w);
    }
    let v = vol.value();
    let gram_dev = gram.iter().flatten().map(|s| s.value() / v).fold(0.0f64, f64::max);
    let hessian = hess.iter().map(|s| r * r * s.value() / v).fold(0.0f64, f64::max);
    let epsilons = [residual, (sup_grad - 1.0).max(0.0), gram_dev.sqrt(), hessian.sqrt()];
    let (binding, eps) = epsilons
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, &e)| if e > acc.1 { (i, e) } else { acc });
    Ok(SplittingReport {
        components: k,
        radius: r,
        harmonic_residual: residual,
        sup_gradient: sup_grad,
        gram_deviation: gram_dev,
        hessian,
        epsilons,
        epsilon_achieved: eps,
        binding: binding + 1,
    })
}
