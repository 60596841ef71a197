//! Radial Poisson problems and the interior estimates checked on them.

use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::constants::moser_constant;
use crate::error::{Error, Result};
use crate::models::Model;
use crate::numerics::quad::{gauss_legendre, simpson};
use crate::radial::{ball_volume, radial_integral};

use super::heat::{check_symmetric, HeatKernelGrid};

/// Largest divergence-form residual accepted from the solver.
pub const POISSON_TOL: f64 = 1e-8;
/// Largest residual of `Delta u = f` accepted by the estimate checks.
pub const EQUATION_TOL: f64 = 1e-6;

/// A radial function about the centre, sampled with its derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFunction {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

impl RadialFunction {
    /// Samples `g(s) = (u, u')` on `n_grid` uniform intervals of `[0, radius]`.
    pub fn from_fn(radius: f64, n_grid: usize, g: impl Fn(f64) -> (f64, f64)) -> Self {
        let r: Vec<f64> = (0..=n_grid).map(|i| radius * i as f64 / n_grid as f64).collect();
        let (u, du) = r.iter().map(|&s| g(s)).unzip();
        RadialFunction { r, u, du }
    }

    pub fn radius(&self) -> f64 {
        *self.r.last().unwrap_or(&0.0)
    }

    /// `(u, u')` at `s` by cubic Hermite interpolation.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        let m = self.r.len() - 1;
        let i = self.r.partition_point(|&x| x <= s).clamp(1, m) - 1;
        let h = self.r[i + 1] - self.r[i];
        let t = ((s - self.r[i]) / h).clamp(0.0, 1.0);
        let (p0, p1, m0, m1) = (self.u[i], self.u[i + 1], h * self.du[i], h * self.du[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let u = (2.0 * t3 - 3.0 * t2 + 1.0) * p0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * p1 + (t3 - t2) * m1;
        let du = ((6.0 * t2 - 6.0 * t) * p0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * p1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (u, du)
    }
}

/// `int_0^{s_i} g w ds` at every node, one 8-point panel per interval.
fn cumulative_flux(model: &Model, s: &[f64], g: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let mut acc = vec![0.0; s.len()];
    for i in 1..s.len() {
        acc[i] = acc[i - 1] + gauss_legendre(|x| g(x) * model.volume_element(x), s[i - 1], s[i], 1);
    }
    acc
}

/// Residual `max |u' - (1/w) int_0^s f w|` of `Delta u = f` in divergence form.
pub fn equation_residual(model: &Model, u: &RadialFunction, f: &RadialFunction) -> f64 {
    let flux = cumulative_flux(model, &u.r, &|x| f.eval(x).0);
    u.r.iter()
        .zip(&u.du)
        .zip(&flux)
        .skip(1)
        .map(|((&s, &du), &q)| (du - q / model.volume_element(s)).abs())
        .fold(0.0, f64::max)
}

/// Solves `Delta f = rhs` on `B(center, radius)` with `f = boundary` on the
/// sphere and `f'(0) = 0`, by `f'(s) = (1/w) int_0^s rhs w`.
pub fn solve_poisson_radial(
    model: &Model,
    center: &[f64],
    radius: f64,
    rhs: impl Fn(f64) -> f64,
    boundary: f64,
    n_grid: usize,
) -> Result<RadialFunction> {
    check_symmetric(model, center)?;
    let cut = model.cut_radius();
    if radius >= cut {
        return Err(Error::CutLocusReached { radius, cut });
    }
    let s: Vec<f64> = (0..=n_grid).map(|i| radius * i as f64 / n_grid as f64).collect();
    let flux = cumulative_flux(model, &s, &rhs);
    let slope = |i: usize, x: f64| {
        if x == 0.0 {
            return 0.0;
        }
        let q = flux[i] + gauss_legendre(|y| rhs(y) * model.volume_element(y), s[i], x, 1);
        q / model.volume_element(x)
    };
    let du: Vec<f64> = (0..=n_grid).map(|i| if i == 0 { 0.0 } else { flux[i] / model.volume_element(s[i]) }).collect();
    let mut u = vec![boundary; n_grid + 1];
    for i in (0..n_grid).rev() {
        u[i] = u[i + 1] - gauss_legendre(|x| slope(i, x), s[i], s[i + 1], 1);
    }
    // independent check of the flux at a subset of nodes
    let stride = (n_grid / 40).max(1);
    let mut residual: f64 = 0.0;
    for i in (stride..=n_grid).step_by(stride) {
        let q = simpson(|x| rhs(x) * model.volume_element(x), 0.0, s[i], 1e-14)?;
        residual = residual.max((du[i] - q / model.volume_element(s[i])).abs());
    }
    if residual > POISSON_TOL || !residual.is_finite() {
        return Err(Error::SolverFailure(format!("Poisson residual {residual:e}")));
    }
    Ok(RadialFunction { r: s, u, du })
}

/// Average `avg_{B(O, r)} g`.
fn ball_average(model: &Model, r: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    let o = vec![0.0; model.n()];
    Ok(radial_integral(model, &o, r, g)? / ball_volume(model, &o, r)?)
}

fn check_inputs(model: &Model, u: &RadialFunction, f: &RadialFunction, r: f64, q: f64) -> Result<f64> {
    let n = model.n() as f64;
    if q <= 0.5 * n {
        return Err(Error::InvalidSpec { field: "q", reason: format!("{q} must exceed n/2 = {}", 0.5 * n) });
    }
    if !(r > 0.0 && r <= u.radius() * (1.0 + 1e-12) && r <= f.radius() * (1.0 + 1e-12)) {
        return Err(Error::InvalidSpec { field: "r", reason: format!("{r} outside the sampled range") });
    }
    let residual = equation_residual(model, u, f);
    if residual > EQUATION_TOL || !residual.is_finite() {
        return Err(Error::EquationResidualTooLarge { residual, tol: EQUATION_TOL });
    }
    Ok(residual)
}

fn sup_on(r: f64, g: impl Fn(f64) -> f64) -> f64 {
    (0..=2000).map(|i| g(r * i as f64 / 2000.0)).fold(f64::NEG_INFINITY, f64::max)
}

/// Interior estimates for `Delta u = f` on `B(O, r)`:
///
/// `sup_{B(r/2)} |grad u|^2 <= C r^{-2} [(||u||*_2)^2 + (r^2 ||f||*_{2q})^2]` and
/// `sup_{B(r/2)} u^2 <= C [(||u||*_2)^2 + (r^2 ||f||*_q)^2]`,
///
/// with `C = 4 C_Moser` and `C_Moser` respectively; the smallest sufficient
/// constants are recorded as `C_grad_empirical` and `C_sup_empirical`.
pub fn verify_gradient_estimate(
    model: &Model,
    u: &RadialFunction,
    f: &RadialFunction,
    r: f64,
    q: f64,
) -> Result<Certificate> {
    let residual = check_inputs(model, u, f, r, q)?;
    let n = model.n();
    let u2 = ball_average(model, r, |s| u.eval(s).0.powi(2))?;
    let f2q = ball_average(model, r, |s| f.eval(s).0.abs().powf(2.0 * q))?.powf(0.5 / q);
    let fq = ball_average(model, r, |s| f.eval(s).0.abs().powf(q))?.powf(1.0 / q);
    let grad_lhs = sup_on(0.5 * r, |s| u.eval(s).1.powi(2));
    let sup_lhs = sup_on(0.5 * r, |s| u.eval(s).0.powi(2));
    let b1 = (u2 + (r * r * f2q).powi(2)) / (r * r);
    let b0 = u2 + (r * r * fq).powi(2);
    let cm = moser_constant(n);
    let mut cert = Certificate::new("GradientEstimate", model.name()).param("r", r).param("q", q);
    cert.push(r, grad_lhs, 4.0 * cm * b1);
    cert.push(0.5 * r, sup_lhs, cm * b0);
    let ratio = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a / b };
    cert.constant("C_grad_empirical", ratio(grad_lhs, b1));
    cert.constant("C_sup_empirical", ratio(sup_lhs, b0));
    cert.constant("C_moser", cm);
    cert.constant("u_L2_avg", u2.sqrt());
    cert.constant("f_L2q_avg", f2q);
    cert.constant("equation_residual", residual);
    Ok(cert.finish())
}

/// `sup_{B(O, r)} u <= sup_{dB} u + C(n) r^2 ||f||*_q` for `Delta u = f`, with
/// `C(n) = C_Moser`; records the smallest sufficient `C`.
pub fn verify_max_principle(
    model: &Model,
    u: &RadialFunction,
    f: &RadialFunction,
    r: f64,
    q: f64,
) -> Result<Certificate> {
    let residual = check_inputs(model, u, f, r, q)?;
    let fq = ball_average(model, r, |s| f.eval(s).0.abs().powf(q))?.powf(1.0 / q);
    let sup_in = sup_on(r, |s| u.eval(s).0);
    let sup_bd = u.eval(r).0;
    let cn = moser_constant(model.n());
    let mut cert = Certificate::new("MaxPrinciple", model.name()).param("r", r).param("q", q);
    cert.push(r, sup_in, sup_bd + cn * r * r * fq);
    let excess = (sup_in - sup_bd).max(0.0);
    cert.constant("C_empirical", if excess == 0.0 { 0.0 } else { excess / (r * r * fq) });
    cert.constant("C_n", cn);
    cert.constant("equation_residual", residual);
    Ok(cert.finish())
}

/// Parabolic form on `Q = B(O, r) x [t - r^2, t]` for `u = G`, `f = 0`:
/// `sup_{Q(r/2)} |grad G|^2 <= C r^{-2} (||G||*_{2,Q})^2` and
/// `sup_{Q(r/2)} G^2 <= C (||G||*_{2,Q})^2`.
pub fn verify_parabolic_estimate(grid: &HeatKernelGrid, model: &Model, t: f64, r: f64) -> Result<Certificate> {
    let t_lo = t - r * r;
    if t_lo < 10.0 * grid.t_grid[0] || t > *grid.t_grid.last().unwrap_or(&0.0) * (1.0 + 1e-12) {
        return Err(Error::InvalidSpec { field: "t", reason: format!("slab [{t_lo}, {t}] outside the grid") });
    }
    let ks: Vec<usize> = (0..grid.t_grid.len()).filter(|&k| grid.t_grid[k] >= t_lo && grid.t_grid[k] <= t).collect();
    if ks.len() < 2 {
        return Err(Error::InvalidSpec { field: "t", reason: "slab shorter than two time steps".into() });
    }
    let area = crate::numerics::unit_sphere_area(model.n());
    let ri = &grid.r_grid;
    let inside = ri.partition_point(|&s| s <= r);
    let space = |row: &[f64]| -> f64 {
        (1..inside)
            .map(|i| {
                let a = 0.5 * (row[i - 1] * model.volume_element(ri[i - 1]) + row[i] * model.volume_element(ri[i]));
                a * (ri[i] - ri[i - 1])
            })
            .sum::<f64>()
            * area
    };
    let mut total = 0.0;
    for pair in ks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let ga: Vec<f64> = grid.g[a].iter().map(|x| x * x).collect();
        let gb: Vec<f64> = grid.g[b].iter().map(|x| x * x).collect();
        total += 0.5 * (space(&ga) + space(&gb)) * (grid.t_grid[b] - grid.t_grid[a]);
    }
    let span = grid.t_grid[*ks.last().unwrap_or(&0)] - grid.t_grid[ks[0]];
    let vol = space(&vec![1.0; ri.len()]);
    let avg = total / (vol * span);
    let half = ri.partition_point(|&s| s <= 0.5 * r);
    let (mut grad_lhs, mut sup_lhs): (f64, f64) = (0.0, 0.0);
    for &k in ks.iter().filter(|&&k| grid.t_grid[k] >= t - 0.25 * r * r) {
        for i in 0..half {
            grad_lhs = grad_lhs.max(grid.dg_dr[k][i].powi(2));
            sup_lhs = sup_lhs.max(grid.g[k][i].powi(2));
        }
    }
    let cm = moser_constant(model.n());
    let mut cert = Certificate::new("ParabolicEstimate", model.name()).param("r", r).param("t", t);
    cert.push(r, grad_lhs, 4.0 * cm * avg / (r * r));
    cert.push(0.5 * r, sup_lhs, cm * avg);
    cert.constant("C_grad_empirical", grad_lhs * r * r / avg);
    cert.constant("C_sup_empirical", sup_lhs / avg);
    Ok(cert.finish())
}
