//! Dirichlet Green's function of a ball by time integration of the heat kernel.

use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::constants::{c_alpha, volume_exponent};
use crate::error::{Error, Result};
use crate::models::Model;
use crate::numerics::quad::simpson;
use crate::numerics::unit_sphere_area;

use super::elliptic::solve_poisson_radial;
use super::heat::{
    check_symmetric, euclidean_kernel, fit_heat_constants, heat_kernel_radial, sinh_grid, solve_factored,
    HeatGridSpec,
};

/// `Gamma(x)` for `x` a positive multiple of `1/2`.
pub(crate) fn gamma_half(x: f64) -> f64 {
    let mut g = if (x - x.round()).abs() < 1e-12 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut y = if (x - x.round()).abs() < 1e-12 { 1.0 } else { 0.5 };
    while y < x - 1e-12 {
        g *= y;
        y += 1.0;
    }
    g
}

/// `int_0^{t0} (4 pi t)^{-n/2} e^{-s^2/4t} dt`, via `u = s^2/4t = v^2`.
fn early_time_integral(n: usize, s: f64, t0: f64) -> Result<f64> {
    let a = 0.5 * n as f64 - 1.0;
    let v0 = s / (2.0 * t0.sqrt());
    let upper = simpson(|v| 2.0 * v.powf(2.0 * a - 1.0) * (-v * v).exp(), v0, v0 + 12.0, 1e-16)?;
    Ok(s.powf(-2.0 * a) / (4.0 * std::f64::consts::PI.powf(0.5 * n as f64)) * upper)
}

/// Radial Dirichlet Green's function `Gamma_{B(x,R)}(x, y)` as a function of `d(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenProfile {
    pub radius: f64,
    pub r: Vec<f64>,
    pub gamma: Vec<f64>,
    /// `int_1^infinity` of the Dirichlet kernel per node.
    pub late: Vec<f64>,
    /// Fitted decay rate of the Dirichlet kernel for large times.
    pub decay_rate: f64,
    /// Quadrature weights of `|S^{n-1}| int . w dr` on `r`.
    pub weights: Vec<f64>,
}

/// `Gamma = int_0^{t0} E + int_{t0}^T G_D + G_D(T)/mu` with `T = 1.5 R^2` and
/// `mu` the decay rate of `G_D(0, t)` fitted on `[T/1.2, T]`.
pub fn dirichlet_green(model: &Model, radius: f64, spec: &HeatGridSpec) -> Result<GreenProfile> {
    let n = model.n();
    let (r, weights) = sinh_grid(model, radius, spec.nr, spec.stretch);
    let t_end = 1.5 * radius * radius;
    let t0 = spec.t0;
    let (ts, vs, _) = solve_factored(model, &r, t0, t_end, spec.dtau)?;
    let g: Vec<Vec<f64>> = ts
        .iter()
        .zip(&vs)
        .map(|(&t, v)| r.iter().zip(v).map(|(&s, &vi)| euclidean_kernel(n, s, t) * vi).collect())
        .collect();
    let m = ts.len() - 1;
    let ka = ts.iter().position(|&t| t >= t_end / 1.2).unwrap_or(m - 1).min(m - 1);
    let mu = -(g[m][0] / g[ka][0]).ln() / (ts[m] - ts[ka]);
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::SolverFailure(format!("Dirichlet kernel does not decay (rate {mu})")));
    }
    let k1 = ts.partition_point(|&t| t < 1.0);
    let mut gamma = vec![f64::INFINITY; r.len()];
    let mut late = vec![0.0; r.len()];
    for i in 1..r.len() {
        // trapezoid in tau with dt = t dtau
        let mut mid = 0.0;
        let mut after_one = 0.0;
        for k in 1..=m {
            let piece = 0.5 * (g[k - 1][i] * ts[k - 1] + g[k][i] * ts[k]) * (ts[k].ln() - ts[k - 1].ln());
            mid += piece;
            if k > k1 {
                after_one += piece;
            }
        }
        let tail = g[m][i] / mu;
        gamma[i] = early_time_integral(n, r[i], t0)? + mid + tail;
        // exponential tail restricted to t >= 1 when the solve ends earlier
        late[i] = after_one + tail * (-mu * (1.0 - t_end).max(0.0)).exp();
    }
    Ok(GreenProfile { radius, r, gamma, late, decay_rate: mu, weights })
}

/// Certifies `Gamma_{B(x,R)}(x, y) <= C5 d(x,y)^{-(n-2)}` (rows normalised by
/// `C5 d^{2-n}`, relative tolerance `1e-3` as for the heat-kernel fit) with
/// `C5 = C3 C4^{n/2-1} Gamma(n/2-1) + R^{n-2} sup int_1^inf G_D`, and the lower
/// bounds of the solution of `Delta f = 1`, `f = R^2/2n` on the sphere:
///
/// `f(x) >= R^2/2n - C5 int_B d^{2-n}` and
/// `f(x) >= R^2/2n - C5 |S^{n-1}|/2 e^{C(alpha) K R^{1-alpha} + 4 lambda R^2} R^2`.
pub fn verify_green_bound(model: &Model, x: &[f64], radius: f64, spec: &HeatGridSpec) -> Result<Certificate> {
    let n = model.n();
    if n < 3 {
        return Err(Error::DimensionTooLow { n });
    }
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::InvalidSpec { field: "R", reason: format!("{radius} not in (0, 1]") });
    }
    check_symmetric(model, x)?;
    let nf = n as f64;
    let free = heat_kernel_radial(model, &vec![0.0; n], 1.0, spec)?;
    let hc = fit_heat_constants(&free);
    let green = dirichlet_green(model, radius, spec)?;
    let late_sup = green.late.iter().copied().fold(0.0, f64::max);
    let c5_heat = hc.c3 * hc.c4.powf(0.5 * nf - 1.0) * gamma_half(0.5 * nf - 1.0);
    let c5 = c5_heat + late_sup * radius.powf(nf - 2.0);
    let mut cert =
        Certificate::new("GreenBound", model.name()).with_tolerance(1e-3).param("R", radius).param("n", nf);
    let stride = (green.r.len() / 150).max(1);
    let mut c5_fit: f64 = 0.0;
    for i in 1..green.r.len() - 1 {
        let s = green.r[i];
        c5_fit = c5_fit.max(green.gamma[i] * s.powf(nf - 2.0));
        if i % stride == 0 {
            cert.push(s, green.gamma[i] * s.powf(nf - 2.0) / c5, 1.0);
        }
    }
    let mass: f64 = green.weights.iter().zip(&green.gamma).skip(1).map(|(w, g)| w * g).sum();
    let kernel_mass: f64 = green
        .weights
        .iter()
        .zip(&green.r)
        .skip(1)
        .map(|(w, &s)| w * s.powf(2.0 - nf))
        .sum();
    let f = solve_poisson_radial(model, x, radius, |_| 1.0, radius * radius / (2.0 * nf), 400)?;
    let f0 = f.u[0];
    let top = radius * radius / (2.0 * nf);
    cert.push(0.0, 1.0 - c5 * kernel_mass / top, f0 / top);
    let (k, alpha, lambda) = (model.k(), model.alpha(), model.lambda());
    let growth = (volume_exponent(c_alpha(alpha), k, alpha, 0.0, radius) + 4.0 * lambda * radius * radius).exp();
    cert.push(0.0, 1.0 - c5 * unit_sphere_area(n) / 2.0 * growth * radius * radius / top, f0 / top);
    cert.constant("C5", c5);
    cert.constant("C5_heat", c5_heat);
    cert.constant("C5_fit", c5_fit);
    cert.constant("C3", hc.c3);
    cert.constant("C4", hc.c4);
    cert.constant("decay_rate", green.decay_rate);
    cert.constant("late_sup", late_sup);
    cert.constant("representation_error", ((top - f0) - mass).abs() / (top - f0).abs().max(1e-300));
    Ok(cert.finish())
}
