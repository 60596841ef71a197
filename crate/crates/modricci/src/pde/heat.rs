//! Radial heat kernel by a Gaussian-factored Crank-Nicolson solve.
//!
//! The kernel is written `G = E v` with the Euclidean kernel
//! `E = (4 pi t)^{-n/2} e^{-r^2/4t}`. In `tau = ln t` the factor satisfies
//!
//! `v_tau = t v_rr + (a t - r) v_r + (n - 1 - a r)/2 v`, `a = Delta r`,
//!
//! which is smooth in `r` at every time, vanishes identically in its last
//! coefficient on flat space, and is seeded with `v = 1` at `t0`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::constants::{HEAT_T0, TOL_MASS};
use crate::error::{Error, Result};
use crate::models::Model;
use crate::numerics::unit_sphere_area;

/// Discretisation of the radial solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatGridSpec {
    /// Radial intervals (rounded up to even).
    pub nr: usize,
    /// Target step in `ln t`.
    pub dtau: f64,
    /// Strength of the sinh refinement toward `r = 0`.
    pub stretch: f64,
    /// Seed time.
    pub t0: f64,
    /// Decay constant used in the truncation radius `6 sqrt(t_max) c4`.
    pub c4: f64,
}

impl Default for HeatGridSpec {
    fn default() -> Self {
        HeatGridSpec { nr: 600, dtau: 0.01, stretch: 4.0, t0: HEAT_T0, c4: 4.0 }
    }
}

impl HeatGridSpec {
    /// The same spec with twice the resolution in space and time.
    pub fn refined(&self) -> Self {
        HeatGridSpec { nr: 2 * self.nr, dtau: 0.5 * self.dtau, ..*self }
    }
}

/// One time slice in factored form, for evaluation off the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSlice {
    pub n: usize,
    pub t: f64,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub v_r: Vec<f64>,
    pub v_rr: Vec<f64>,
}

impl KernelSlice {
    /// `(G, G_r, G_rr)` at radius `s`; zero beyond the grid.
    pub fn eval(&self, s: f64) -> [f64; 3] {
        let last = *self.r.last().unwrap_or(&0.0);
        if s >= last {
            return [0.0; 3];
        }
        let i = match self.r.binary_search_by(|x| x.total_cmp(&s)) {
            Ok(i) => i.min(self.r.len() - 2),
            Err(i) => i.saturating_sub(1),
        };
        let (r0, r1) = (self.r[i], self.r[i + 1]);
        let h = r1 - r0;
        let u = (s - r0) / h;
        // cubic Hermite for v, linear for the derivatives
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u),
            u * (1.0 - u) * (1.0 - u),
            u * u * (3.0 - 2.0 * u),
            u * u * (u - 1.0),
        );
        let v = h00 * self.v[i] + h10 * h * self.v_r[i] + h01 * self.v[i + 1] + h11 * h * self.v_r[i + 1];
        let vr = (1.0 - u) * self.v_r[i] + u * self.v_r[i + 1];
        let vrr = (1.0 - u) * self.v_rr[i] + u * self.v_rr[i + 1];
        let t = self.t;
        let e = euclidean_kernel(self.n, s, t);
        let g = e * v;
        let gr = e * (vr - s * v / (2.0 * t));
        let grr = e * (vrr - s / t * vr + v * (s * s / (4.0 * t * t) - 1.0 / (2.0 * t)));
        [g, gr, grr]
    }
}

/// Radial heat kernel `G(x, t; x0, 0)` on a space-time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelGrid {
    pub model: String,
    pub n: usize,
    pub center: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    /// `g[k][i] = G(r_i, t_k)`.
    pub g: Vec<Vec<f64>>,
    pub dg_dr: Vec<Vec<f64>>,
    pub dg_dt: Vec<Vec<f64>>,
    /// `|S^{n-1}| int G w dr` per time.
    pub mass: Vec<f64>,
    pub r_trunc: f64,
    pub spec: HeatGridSpec,
    /// Last time slice in factored form.
    pub last: KernelSlice,
    /// Quadrature weights of `|S^{n-1}| int . w dr` on `r_grid`.
    pub weights: Vec<f64>,
}

impl HeatKernelGrid {
    /// Relative defect of `G(0, t1 + t2) = int G(., t1) G(., t2)` at sampled pairs.
    pub fn semigroup_defect(&self) -> f64 {
        let m = self.t_grid.len();
        let mut worst: f64 = 0.0;
        for k in (m / 4..m).step_by((m / 16).max(1)) {
            let t = self.t_grid[k];
            for frac in [0.5, 0.3] {
                let t1 = frac * t;
                let t2 = t - t1;
                if t1 < 10.0 * self.t_grid[0] {
                    continue;
                }
                let (Some(a), Some(b)) = (self.slice_at(t1), self.slice_at(t2)) else { continue };
                let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
                let conv = self.space_integral(&prod);
                worst = worst.max((conv / self.g[k][0] - 1.0).abs());
            }
        }
        worst
    }

    /// `G(., t)` interpolated in `ln t` between stored slices.
    pub fn slice_at(&self, t: f64) -> Option<Vec<f64>> {
        let k = self.t_grid.iter().position(|&x| x >= t)?;
        if self.t_grid[k] == t || k == 0 {
            return (k > 0 || self.t_grid[0] == t).then(|| self.g[k].clone());
        }
        let (ta, tb) = (self.t_grid[k - 1].ln(), self.t_grid[k].ln());
        let u = (t.ln() - ta) / (tb - ta);
        Some(
            self.g[k - 1]
                .iter()
                .zip(&self.g[k])
                .map(|(&a, &b)| if a > 0.0 && b > 0.0 { (a.ln() * (1.0 - u) + b.ln() * u).exp() } else { 0.0 })
                .collect(),
        )
    }

    /// `|S^{n-1}| int_0^{r_trunc} h w dr` for grid values `h`.
    pub fn space_integral(&self, h: &[f64]) -> f64 {
        self.weights.iter().zip(h).map(|(a, b)| a * b).sum()
    }

    /// Writes `r,t,G` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "t", "G"]).map_err(|e| Error::Io(e.to_string()))?;
        for (k, &t) in self.t_grid.iter().enumerate() {
            for (i, &r) in self.r_grid.iter().enumerate() {
                w.write_record([format!("{r:.10e}"), format!("{t:.10e}"), format!("{:.10e}", self.g[k][i])])
                    .map_err(|e| Error::Io(e.to_string()))?;
            }
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

/// `(4 pi t)^{-n/2} e^{-r^2/4t}`.
pub fn euclidean_kernel(n: usize, r: f64, t: f64) -> f64 {
    (4.0 * std::f64::consts::PI * t).powf(-0.5 * n as f64) * (-r * r / (4.0 * t)).exp()
}

/// Nodes `r_i = R sinh(beta i/N)/sinh(beta)` and Simpson weights of
/// `|S^{n-1}| int . w dr` on them.
pub(crate) fn sinh_grid(model: &Model, r_max: f64, nr: usize, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let nr = nr + nr % 2;
    let sb = beta.sinh();
    let area = unit_sphere_area(model.n());
    let mut r = Vec::with_capacity(nr + 1);
    let mut q = Vec::with_capacity(nr + 1);
    for i in 0..=nr {
        let xi = i as f64 / nr as f64;
        let ri = r_max * (beta * xi).sinh() / sb;
        let jac = r_max * beta * (beta * xi).cosh() / sb;
        let simp = if i == 0 || i == nr {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        r.push(ri);
        q.push(area * simp / (3.0 * nr as f64) * jac * model.volume_element(ri));
    }
    (r, q)
}

/// Tridiagonal coefficients of the operator `L(t)` acting on `v`, rows `0..N`.
fn operator(model: &Model, r: &[f64], t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = r.len() - 1;
    let nf = model.n() as f64;
    let (mut lo, mut di, mut up) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let h0 = r[1] - r[0];
    // at r = 0, a v_r -> (n - 1) v_rr and the zeroth-order term vanishes
    di[0] = -2.0 * nf * t / (h0 * h0);
    up[0] = 2.0 * nf * t / (h0 * h0);
    for i in 1..m {
        let (hm, hp) = (r[i] - r[i - 1], r[i + 1] - r[i]);
        let s = hm + hp;
        let b = model.laplacian_of_distance(r[i]) * t - r[i];
        let c = -0.5 * r[i] * model.laplacian_excess(r[i]);
        let (l2, d2, u2) = (2.0 / (hm * s), -2.0 / (hm * hp), 2.0 / (hp * s));
        let peclet = b.abs() * hm.max(hp) / t;
        let (l1, d1, u1) = if peclet <= 2.0 {
            (-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s))
        } else if b < 0.0 {
            (-1.0 / hm, 1.0 / hm, 0.0)
        } else {
            (0.0, -1.0 / hp, 1.0 / hp)
        };
        lo[i] = t * l2 + b * l1;
        di[i] = t * d2 + b * d1 + c;
        up[i] = t * u2 + b * u1;
    }
    (lo, di, up)
}

fn apply(op: &(Vec<f64>, Vec<f64>, Vec<f64>), v: &[f64]) -> Vec<f64> {
    let (lo, di, up) = op;
    let m = di.len();
    (0..m)
        .map(|i| {
            let mut x = di[i] * v[i] + up[i] * v[i + 1];
            if i > 0 {
                x += lo[i] * v[i - 1];
            }
            x
        })
        .collect()
}

/// Solves `(I - k L) x = rhs` on rows `0..N`, with `x_N = 0`.
fn implicit_solve(op: &(Vec<f64>, Vec<f64>, Vec<f64>), k: f64, rhs: &[f64]) -> Vec<f64> {
    let (lo, di, up) = op;
    let m = di.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    for i in 0..m {
        let a = -k * lo[i];
        let b = 1.0 - k * di[i];
        let cu = -k * up[i];
        let denom = if i == 0 { b } else { b - a * c[i - 1] };
        c[i] = if i + 1 < m { cu / denom } else { 0.0 };
        d[i] = if i == 0 { rhs[i] / denom } else { (rhs[i] - a * d[i - 1]) / denom };
    }
    let mut x = vec![0.0; m + 1];
    for i in (0..m).rev() {
        x[i] = d[i] - if i + 1 < m { c[i] * x[i + 1] } else { 0.0 };
    }
    x
}

/// Time levels and `(v, v_tau)` per level of the factored solve from `t0` to `t_end`.
pub(crate) fn solve_factored(
    model: &Model,
    r: &[f64],
    t0: f64,
    t_end: f64,
    dtau: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let span = (t_end / t0).ln();
    let steps = ((span / dtau).ceil() as usize).max(2);
    let k = span / steps as f64;
    let m = r.len() - 1;
    let mut v = vec![1.0; m + 1];
    v[m] = 0.0;
    let mut ts = vec![t0];
    let mut op = operator(model, r, t0);
    let mut vt = vec![apply(&op, &v)];
    vt[0].push(0.0);
    let mut vs = vec![v.clone()];
    let tau0 = t0.ln();
    for step in 1..=steps {
        let tau = tau0 + step as f64 * k;
        let next = operator(model, r, tau.exp());
        if step == 1 {
            // two implicit Euler half steps damp the seed mismatch
            let mid = operator(model, r, (tau - 0.5 * k).exp());
            let half = implicit_solve(&mid, 0.5 * k, &v[..m]);
            v = implicit_solve(&next, 0.5 * k, &half[..m]);
        } else {
            let lv = apply(&op, &v);
            let rhs: Vec<f64> = (0..m).map(|i| v[i] + 0.5 * k * lv[i]).collect();
            v = implicit_solve(&next, 0.5 * k, &rhs);
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::StabilityFailure(format!("non-finite values at t = {:e}", tau.exp())));
        }
        op = next;
        let mut lv = apply(&op, &v);
        lv.push(0.0);
        ts.push(tau.exp());
        vs.push(v.clone());
        vt.push(lv);
    }
    Ok((ts, vs, vt))
}

/// `(v_r, v_rr)` by second-order differences on the nonuniform grid.
pub(crate) fn derivatives(r: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = r.len() - 1;
    let mut d1 = vec![0.0; m + 1];
    let mut d2 = vec![0.0; m + 1];
    let h0 = r[1] - r[0];
    d2[0] = 2.0 * (v[1] - v[0]) / (h0 * h0);
    for i in 1..m {
        let (hm, hp) = (r[i] - r[i - 1], r[i + 1] - r[i]);
        let s = hm + hp;
        d1[i] = -hp / (hm * s) * v[i - 1] + (hp - hm) / (hm * hp) * v[i] + hm / (hp * s) * v[i + 1];
        d2[i] = 2.0 * (v[i - 1] / (hm * s) - v[i] / (hm * hp) + v[i + 1] / (hp * s));
    }
    let (hm, hp) = (r[m - 1] - r[m - 2], r[m] - r[m - 1]);
    let s = hm + hp;
    d1[m] = hp / (hm * s) * v[m - 2] - s / (hm * hp) * v[m - 1] + (2.0 * hp + hm) / (hp * s) * v[m];
    d2[m] = d2[m - 1];
    (d1, d2)
}

/// Whether the kernel centred at `x0` is radial.
pub(crate) fn check_symmetric(model: &Model, x0: &[f64]) -> Result<()> {
    if x0.iter().all(|&x| x == 0.0) || model.space_form().is_some() {
        Ok(())
    } else {
        Err(Error::UnsupportedKind(format!(
            "heat kernel of `{}` off the symmetry centre is not radial",
            model.name()
        )))
    }
}

/// Heat kernel `G(x, t; x0, 0)` for `t <= t_max <= 1` as a radial grid.
pub fn heat_kernel_radial(model: &Model, x0: &[f64], t_max: f64, spec: &HeatGridSpec) -> Result<HeatKernelGrid> {
    if !(t_max > 0.0 && t_max <= 1.0) {
        return Err(Error::InvalidSpec { field: "t_max", reason: format!("{t_max} not in (0, 1]") });
    }
    check_symmetric(model, x0)?;
    let n = model.n();
    let t0 = spec.t0.min(t_max / 100.0);
    let mut r_trunc = 6.0 * t_max.sqrt() * spec.c4;
    let cut = model.cut_radius();
    if r_trunc > 0.98 * cut {
        r_trunc = 0.98 * cut;
    }
    let (r, weights) = sinh_grid(model, r_trunc, spec.nr, spec.stretch);
    let (ts, vs, vts) = solve_factored(model, &r, t0, t_max, spec.dtau)?;
    let nf = n as f64;
    let mut g = Vec::with_capacity(ts.len());
    let mut gr = Vec::with_capacity(ts.len());
    let mut gt = Vec::with_capacity(ts.len());
    let mut mass = Vec::with_capacity(ts.len());
    for ((&t, v), vt) in ts.iter().zip(&vs).zip(&vts) {
        let (v_r, _) = derivatives(&r, v);
        let mut row = Vec::with_capacity(r.len());
        let mut row_r = Vec::with_capacity(r.len());
        let mut row_t = Vec::with_capacity(r.len());
        for (i, &s) in r.iter().enumerate() {
            let e = euclidean_kernel(n, s, t);
            row.push(e * v[i]);
            row_r.push(e * (v_r[i] - s * v[i] / (2.0 * t)));
            row_t.push(e * (vt[i] / t + v[i] * (-nf / (2.0 * t) + s * s / (4.0 * t * t))));
        }
        mass.push(weights.iter().zip(&row).map(|(a, b)| a * b).sum());
        g.push(row);
        gr.push(row_r);
        gt.push(row_t);
    }
    let inner = r.partition_point(|&s| s <= 0.5 * r_trunc);
    if g.iter().any(|row| row[..inner].iter().any(|&x| x < -1e-12 * row[0].abs())) {
        return Err(Error::StabilityFailure("negative kernel values inside the truncation".into()));
    }
    let leak = 1.0 - mass.last().copied().unwrap_or(0.0);
    if leak > TOL_MASS {
        return Err(Error::TruncationTooTight { leak, tol: TOL_MASS });
    }
    let v_last = vs.last().cloned().unwrap_or_default();
    let (v_r, v_rr) = derivatives(&r, &v_last);
    let last = KernelSlice { n, t: *ts.last().unwrap_or(&t_max), r: r.clone(), v: v_last, v_r, v_rr };
    Ok(HeatKernelGrid {
        model: model.name().to_string(),
        n,
        center: x0.to_vec(),
        t_grid: ts,
        r_grid: r,
        g,
        dg_dr: gr,
        dg_dt: gt,
        mass,
        r_trunc,
        spec: *spec,
        last,
        weights,
    })
}

/// Constants of `C1 t^{-n/2} e^{-C2 d^2/t} <= G <= C3 t^{-n/2} e^{-d^2/(C4 t)}` and
/// of the derivative bounds `|grad G| <= C3_grad t^{-(n+1)/2} e^{-d^2/(C4' t)}`,
/// `|G_t| <= C3_dt t^{-n/2-1} e^{-d^2/(C4' t)}` with `C4' = 2 C4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c3_grad: f64,
    pub c3_dt: f64,
    pub c4_deriv: f64,
}

/// Smallest `x = d^2/t` used to fit the exponential rates; below it the rate
/// is dominated by round-off in `ln(C/G)`.
const RATE_FIT_MIN_X: f64 = 1.0;
/// Kernel values below this are excluded from fits.
const FIT_FLOOR: f64 = 1e-250;

/// Grid points `(k, i)` entering the fit: `t >= 10 t0`, `r <= r_trunc/2`.
fn fit_points(grid: &HeatKernelGrid) -> Vec<(usize, usize)> {
    let t_min = 10.0 * grid.t_grid[0];
    let r_end = grid.r_grid.partition_point(|&r| r <= 0.5 * grid.r_trunc);
    let mut pts = Vec::new();
    for (k, &t) in grid.t_grid.iter().enumerate() {
        if t < t_min {
            continue;
        }
        for i in 0..r_end {
            if grid.g[k][i] > FIT_FLOOR {
                pts.push((k, i));
            }
        }
    }
    pts
}

/// Fits the heat-kernel constants over the grid.
pub fn fit_heat_constants(grid: &HeatKernelGrid) -> HeatConstants {
    let nf = grid.n as f64;
    let pts = fit_points(grid);
    let scaled = |k: usize, i: usize| grid.g[k][i] * grid.t_grid[k].powf(0.5 * nf);
    let x_of = |k: usize, i: usize| grid.r_grid[i].powi(2) / grid.t_grid[k];
    let c3 = pts.iter().map(|&(k, i)| scaled(k, i)).fold(0.0, f64::max);
    let c1 = pts.iter().filter(|&&(_, i)| i == 0).map(|&(k, i)| scaled(k, i)).fold(f64::INFINITY, f64::min);
    let (mut c4, mut c2): (f64, f64) = (0.0, 0.0);
    for &(k, i) in &pts {
        let x = x_of(k, i);
        if x < RATE_FIT_MIN_X {
            continue;
        }
        let g = scaled(k, i);
        let up = (c3 / g).ln();
        c4 = c4.max(if up > 0.0 { x / up } else { f64::INFINITY });
        c2 = c2.max((c1 / g).ln() / x);
    }
    let c4_deriv = 2.0 * c4;
    let (mut c3_grad, mut c3_dt): (f64, f64) = (0.0, 0.0);
    for &(k, i) in &pts {
        let t = grid.t_grid[k];
        let decay = (x_of(k, i) / c4_deriv).exp();
        c3_grad = c3_grad.max(grid.dg_dr[k][i].abs() * t.powf(0.5 * (nf + 1.0)) * decay);
        c3_dt = c3_dt.max(grid.dg_dt[k][i].abs() * t.powf(0.5 * nf + 1.0) * decay);
    }
    HeatConstants { c1, c2, c3, c4, c3_grad, c3_dt, c4_deriv }
}

/// Certifies the Gaussian upper and lower bounds of `G` and the upper bounds of
/// `|grad G|` and `|G_t|` with fitted constants.
///
/// Rows are in log form, `ln(lhs) <= ln(rhs)` per grid point, with `s = d^2/t`;
/// the tolerance `1e-3` is a relative one.
pub fn verify_heat_kernel_bounds(grid: &HeatKernelGrid, model: &Model) -> Result<Certificate> {
    let nf = grid.n as f64;
    let c = fit_heat_constants(grid);
    let mut cert = Certificate::new("HeatKernelBounds", model.name())
        .with_tolerance(1e-3)
        .param("n", nf)
        .param("t_max", *grid.t_grid.last().unwrap_or(&0.0))
        .param("r_trunc", grid.r_trunc);
    let finite = [c.c1, c.c2, c.c3, c.c4, c.c3_grad, c.c3_dt].iter().all(|x| x.is_finite() && *x >= 0.0)
        && c.c1 > 0.0
        && c.c3 > 0.0;
    let pts = fit_points(grid);
    let t_stride = (grid.t_grid.len() / 48).max(1);
    let r_stride = (grid.r_grid.len() / 64).max(1);
    for &(k, i) in pts.iter().filter(|(k, i)| k % t_stride == 0 && i % r_stride == 0) {
        let t = grid.t_grid[k];
        let x = grid.r_grid[i].powi(2) / t;
        let lg = (grid.g[k][i] * t.powf(0.5 * nf)).ln();
        cert.push(x, lg + x / c.c4, c.c3.ln());
        cert.push(x, c.c1.ln() - c.c2 * x, lg);
        let gr = grid.dg_dr[k][i].abs();
        if gr > 0.0 {
            cert.push(x, (gr * t.powf(0.5 * (nf + 1.0))).ln() + x / c.c4_deriv, c.c3_grad.ln());
        }
        let gt = grid.dg_dt[k][i].abs();
        if gt > 0.0 {
            cert.push(x, (gt * t.powf(0.5 * nf + 1.0)).ln() + x / c.c4_deriv, c.c3_dt.ln());
        }
    }
    for (key, v) in [
        ("C1", c.c1),
        ("C2", c.c2),
        ("C3", c.c3),
        ("C4", c.c4),
        ("C3_grad", c.c3_grad),
        ("C3_dt", c.c3_dt),
        ("C4_deriv", c.c4_deriv),
        ("C3_common", c.c3.max(c.c3_grad).max(c.c3_dt)),
        ("mass_defect", grid.mass.iter().map(|m| (1.0 - m).abs()).fold(0.0, f64::max)),
        ("semigroup_defect", grid.semigroup_defect()),
    ] {
        cert.constant(key, v);
    }
    let mut cert = cert.finish();
    if !finite {
        cert.pass = false;
    }
    Ok(cert)
}
