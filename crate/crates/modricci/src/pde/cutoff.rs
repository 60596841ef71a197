//! Cut-off functions assembled from heat kernels.
//!
//! A single bump is a cubed, truncated and normalised heat kernel at time
//! `A r^2`. Bumps at scale `eps r0` centred on a cubic lattice covering
//! `B(x0, 1.1 r0)` are summed, scaled by `1/delta` and passed through a
//! quintic clamp.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::constants::{CUTOFF_EPS, CUTOFF_PLATEAU, CUTOFF_SUPPORT};
use crate::error::{Error, Result};
use crate::geometry::{Point, SpaceForm};
use crate::models::Model;
use crate::numerics::bisect;
use crate::radial::ball_volume;

use super::heat::{fit_heat_constants, heat_kernel_radial, HeatConstants, HeatGridSpec, KernelSlice};

/// Quintic clamp: `0` for `s <= 0`, `1` for `s >= 1`, `C^2` in between.
/// Returns `(eta, eta', eta'')`.
pub fn smooth_clamp(s: f64) -> [f64; 3] {
    if s <= 0.0 {
        [0.0, 0.0, 0.0]
    } else if s >= 1.0 {
        [1.0, 0.0, 0.0]
    } else {
        let s2 = s * s;
        [
            s2 * s * (10.0 - 15.0 * s + 6.0 * s2),
            30.0 * s2 * (1.0 - s) * (1.0 - s),
            60.0 * s * (1.0 - s) * (1.0 - 2.0 * s),
        ]
    }
}

/// Constants entering the bump: `A = 1/(C4 ln(2 C3/C1))` and
/// `delta_hat = 0.4 C1/((1 + A^{-1/2} + A^{-1}) C3)`.
pub fn bump_constants(c: &HeatConstants) -> (f64, f64) {
    let a = 1.0 / (c.c4 * (2.0 * c.c3 / c.c1).ln());
    let dh = 0.4 * c.c1 / ((1.0 + a.powf(-0.5) + 1.0 / a) * c.c3);
    (a, dh)
}

/// Radial bump `psi = psi_tilde^3` at one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub scale: f64,
    pub time: f64,
    /// `(A r^2)^{n/2} / ((1 + A^{-1}) C3)`.
    pub norm: f64,
    /// `0.6 C1 (A r^2)^{-n/2}`.
    pub threshold: f64,
    /// Radius beyond which `psi = 0`.
    pub support: f64,
    kernel: KernelSlice,
}

impl Bump {
    /// Step one of the construction at scale `r`.
    pub fn new(model: &Model, c: &HeatConstants, r: f64, spec: &HeatGridSpec) -> Result<Self> {
        let (a, _) = bump_constants(c);
        let time = a * r * r;
        let grid = heat_kernel_radial(model, &vec![0.0; model.n()], time, spec)?;
        let kernel = grid.last;
        let nh = 0.5 * model.n() as f64;
        let norm = time.powf(nh) / ((1.0 + 1.0 / a) * c.c3);
        let threshold = 0.6 * c.c1 * time.powf(-nh);
        let end = *kernel.r.last().unwrap_or(&0.0);
        let support = if kernel.eval(0.0)[0] <= threshold {
            0.0
        } else {
            bisect(|s| kernel.eval(s)[0] - threshold, 0.0, end, 1e-14 * end)?
        };
        Ok(Bump { scale: r, time, norm, threshold, support, kernel })
    }

    /// `(psi, psi', psi'')` at distance `d`.
    pub fn eval(&self, d: f64) -> [f64; 3] {
        if d >= self.support {
            return [0.0; 3];
        }
        let [g, g1, g2] = self.kernel.eval(d);
        let pt = self.norm * (g - self.threshold);
        if pt <= 0.0 {
            return [0.0; 3];
        }
        let (p1, p2) = (self.norm * g1, self.norm * g2);
        [pt * pt * pt, 3.0 * pt * pt * p1, 6.0 * pt * p1 * p1 + 3.0 * pt * pt * p2]
    }
}

/// The assembled cut-off `phi = eta(sum psi_i / delta)` around `x0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffFunction {
    pub model: String,
    pub n: usize,
    pub center: Vec<f64>,
    pub r0: f64,
    pub constants: HeatConstants,
    pub a: f64,
    pub delta_hat: f64,
    /// Threshold `delta = delta_hat^3` of the bump on `B(p, delta_hat eps r0)`.
    pub delta: f64,
    pub eps: f64,
    /// Covering radius `eps delta_hat r0` and the lattice spacing achieving it.
    pub cover_radius: f64,
    pub lattice_spacing: f64,
    pub cover_count: usize,
    pub plateau_radius: f64,
    /// Distance from `x0` beyond which `phi` vanishes by construction.
    pub support_radius: f64,
    pub bump: Bump,
    /// Samples `(d, phi)` along the first coordinate axis.
    pub profile: Vec<[f64; 2]>,
    /// `r0 sup |grad phi|` and `r0^2 sup |Delta phi|` on the sampled slice.
    pub sup_grad: f64,
    pub sup_laplacian: f64,
    #[serde(skip)]
    sf: Option<SpaceForm>,
    #[serde(skip)]
    basis: Vec<Vec<f64>>,
    /// Largest ratio `d/|c|` between geodesic and coordinate distances.
    #[serde(skip)]
    shrink: f64,
    #[serde(skip)]
    cover_coord_radius: f64,
}

/// Sample counts on the evaluation slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSampling {
    /// Radial samples across the transition annulus.
    pub radial: usize,
    /// Angular samples on the sector `[0, pi/4]`.
    pub angular: usize,
}

impl Default for CutoffSampling {
    fn default() -> Self {
        CutoffSampling { radial: 64, angular: 768 }
    }
}

impl CutoffSampling {
    pub fn refined(&self) -> Self {
        CutoffSampling { radial: 2 * self.radial, angular: 2 * self.angular }
    }
}

/// Number of lattice points `h j`, `j in Z^n`, with `|h j| <= radius`.
fn lattice_count(n: usize, h: f64, radius: f64) -> usize {
    fn rec(dims: usize, rem2: f64, h: f64) -> usize {
        let m = (rem2.max(0.0).sqrt() / h + 1e-12).floor() as i64;
        if dims == 1 {
            return (2 * m + 1) as usize;
        }
        (-m..=m).map(|j| rec(dims - 1, rem2 - (j as f64 * h).powi(2), h)).sum()
    }
    rec(n, radius * radius, h)
}

impl CutoffFunction {
    fn point(&self, coords: &[f64]) -> Point {
        let sf = self.sf.expect("space form");
        sf.from_normal_coords(&sf.origin(), &self.basis, coords)
    }

    /// `(phi, |grad phi|, Delta phi)` at the point with normal coordinates `coords` at `x0`.
    pub fn eval(&self, model: &Model, coords: &[f64]) -> [f64; 3] {
        let sf = self.sf.expect("space form");
        let flat = sf.kappa == 0.0;
        let n = self.n;
        let h = self.lattice_spacing;
        let y = if flat { coords.to_vec() } else { self.point(coords) };
        let w = self.bump.support * self.shrink;
        let lo: Vec<i64> = coords.iter().map(|&c| ((c - w) / h).ceil() as i64).collect();
        let hi: Vec<i64> = coords.iter().map(|&c| ((c + w) / h).floor() as i64).collect();
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return [0.0; 3];
        }
        let mut idx = lo.clone();
        let mut c = vec![0.0; n];
        let mut sum = 0.0;
        let mut lap = 0.0;
        let mut grad = vec![0.0; sf.embed_dim()];
        let r2 = self.cover_coord_radius * self.cover_coord_radius * (1.0 + 1e-12);
        let w2 = w * w;
        loop {
            c.iter_mut().zip(&idx).for_each(|(x, &j)| *x = j as f64 * h);
            let in_cover = c.iter().map(|x| x * x).sum::<f64>() <= r2;
            let near = c.iter().zip(coords).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= w2;
            if in_cover && near {
                let (d, p) = if flat {
                    (c.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(), None)
                } else {
                    let p = self.point(&c);
                    (sf.dist(&y, &p), Some(p))
                };
                if d < self.bump.support {
                    let [psi, d1, d2] = self.bump.eval(d);
                    sum += psi;
                    if d > 1e-12 * self.r0 {
                        // grad d points away from the lattice point
                        match &p {
                            None => grad.iter_mut().zip(c.iter().zip(&y)).for_each(|(g, (a, b))| *g += d1 * (b - a) / d),
                            Some(p) => {
                                let u = sf.log_dir(&y, p);
                                grad.iter_mut().zip(&u).for_each(|(g, ui)| *g -= d1 * ui);
                            }
                        }
                        lap += d2 + d1 * model.laplacian_of_distance(d);
                    } else {
                        lap += n as f64 * d2;
                    }
                }
            }
            let mut k = 0;
            loop {
                if k == n {
                    let s = sum / self.delta;
                    let [e0, e1, e2] = smooth_clamp(s);
                    let g2 = sf.inner(&grad, &grad).max(0.0) / (self.delta * self.delta);
                    return [e0, e1 * g2.sqrt(), e2 * g2 + e1 * lap / self.delta];
                }
                idx[k] += 1;
                if idx[k] <= hi[k] {
                    break;
                }
                idx[k] = lo[k];
                k += 1;
            }
        }
    }

    /// Radii bracketing `0 < phi < 1` on the slice, from a scan of the
    /// sector edges widened by a fifth of the band on each side.
    pub fn transition_band(&self, model: &Model) -> (f64, f64) {
        let (a, b) = (self.plateau_radius - self.cover_radius, self.support_radius);
        let m = 400;
        let mut lo = b;
        let mut hi = a;
        for th in [0.0, std::f64::consts::FRAC_PI_8, std::f64::consts::FRAC_PI_4] {
            for i in 0..=m {
                let rho = a + (b - a) * i as f64 / m as f64;
                let phi = self.eval(model, &self.slice_coords(rho, th))[0];
                if phi < 1.0 {
                    lo = lo.min(rho - (b - a) / m as f64);
                }
                if phi > 0.0 {
                    hi = hi.max(rho + (b - a) / m as f64);
                }
            }
        }
        let pad = 0.2 * (hi - lo).max(0.0);
        ((lo - pad).max(0.0), hi + pad)
    }

    /// Normal coordinates of the slice point at radius `rho`, angle `theta`.
    pub fn slice_coords(&self, rho: f64, theta: f64) -> Vec<f64> {
        let mut c = vec![0.0; self.n];
        c[0] = rho * theta.cos();
        c[1] = rho * theta.sin();
        c
    }

    /// `(r0 sup |grad phi|, r0^2 sup |Delta phi|)` over the transition annulus.
    pub fn measure_sups(&self, model: &Model, sampling: &CutoffSampling) -> (f64, f64) {
        let (r_in, r_out) = self.transition_band(model);
        let pts: Vec<(f64, f64)> = (0..=sampling.radial)
            .flat_map(|i| {
                let rho = r_in + (r_out - r_in) * i as f64 / sampling.radial as f64;
                (0..=sampling.angular)
                    .map(move |j| (rho, std::f64::consts::FRAC_PI_4 * j as f64 / sampling.angular as f64))
            })
            .collect();
        let vals: Vec<[f64; 3]> = pts.par_iter().map(|&(rho, th)| self.eval(model, &self.slice_coords(rho, th))).collect();
        let g = vals.iter().map(|v| v[1]).fold(0.0, f64::max);
        let l = vals.iter().map(|v| v[2].abs()).fold(0.0, f64::max);
        (g * self.r0, l * self.r0 * self.r0)
    }
}

/// Builds the cut-off around `x0` at scale `r0 <= 5` on a space form.
pub fn build_cutoff(
    model: &Model,
    x0: &[f64],
    r0: f64,
    spec: &HeatGridSpec,
    sampling: &CutoffSampling,
) -> Result<CutoffFunction> {
    if !(r0 > 0.0 && r0 <= 5.0) {
        return Err(Error::InvalidSpec { field: "r0", reason: format!("{r0} not in (0, 5]") });
    }
    let Some(sf) = model.space_form() else {
        return Err(Error::UnsupportedKind(format!("cut-off bumps need a homogeneous model, got `{}`", model.name())));
    };
    let n = model.n();
    let origin = vec![0.0; n];
    let unit = heat_kernel_radial(model, &origin, 1.0, spec)?;
    let constants = fit_heat_constants(&unit);
    let (a, delta_hat) = bump_constants(&constants);
    let eps = CUTOFF_EPS;
    let bump = Bump::new(model, &constants, eps * r0, spec)?;
    let cover_radius = eps * delta_hat * r0;
    let plateau_radius = CUTOFF_PLATEAU * r0;
    // metric distortion of normal coordinates on the region touched by the bumps
    let reach = plateau_radius + 2.0 * eps * r0;
    let (mut stretch, mut shrink): (f64, f64) = (1.0, 1.0);
    for i in 1..=64 {
        let s = reach * i as f64 / 64.0;
        let q = model.warp_at(s)[0] / s;
        stretch = stretch.max(q);
        shrink = shrink.max(1.0 / q);
    }
    let nf = n as f64;
    let h = 2.0 * cover_radius / (nf.sqrt() * stretch);
    let cover_coord_radius = plateau_radius + h * nf.sqrt();
    let cover_count = lattice_count(n, h, cover_coord_radius);
    let packing = ball_volume(model, &origin, plateau_radius + cover_radius)?
        / ball_volume(model, &origin, 0.5 * cover_radius)?;
    if cover_count as f64 > packing {
        return Err(Error::CoverTooLarge { n: cover_count, bound: packing as usize });
    }
    let support_radius = cover_coord_radius * stretch + bump.support;
    if support_radius > CUTOFF_SUPPORT * r0 {
        return Err(Error::SolverFailure(format!(
            "bump support reaches {support_radius}, beyond {}",
            CUTOFF_SUPPORT * r0
        )));
    }
    let basis = sf.tangent_basis(&sf.origin());
    let mut cut = CutoffFunction {
        model: model.name().to_string(),
        n,
        center: x0.to_vec(),
        r0,
        constants,
        a,
        delta_hat,
        delta: delta_hat.powi(3),
        eps,
        cover_radius,
        lattice_spacing: h,
        cover_count,
        plateau_radius,
        support_radius,
        bump,
        profile: Vec::new(),
        sup_grad: 0.0,
        sup_laplacian: 0.0,
        sf: Some(sf),
        basis,
        shrink,
        cover_coord_radius,
    };
    let m = 4 * sampling.radial;
    let end = 2.0 * r0;
    cut.profile = (0..=m)
        .into_par_iter()
        .map(|i| {
            let d = end * i as f64 / m as f64;
            [d, cut.eval(model, &cut.slice_coords(d, 0.0))[0]]
        })
        .collect();
    let (g, l) = cut.measure_sups(model, sampling);
    cut.sup_grad = g;
    cut.sup_laplacian = l;
    Ok(cut)
}

/// Certifies range, support, plateau and the scaled derivative bounds of the
/// cut-off, the last by comparing sups between `sampling` and its refinement
/// (with a refined heat grid).
///
/// Rows: `phi <= 1`, `-phi <= 0`, `|1 - phi| <= 1e-6` on `B(x0, 1.1 r0)`,
/// `|phi| <= 1e-6` on `[1.9 r0, 2.1 r0]`, and relative sup changes `<= 0.05`.
pub fn verify_cutoff(
    model: &Model,
    x0: &[f64],
    r0: f64,
    spec: &HeatGridSpec,
    sampling: &CutoffSampling,
) -> Result<Certificate> {
    let cut = build_cutoff(model, x0, r0, spec, sampling)?;
    let fine = build_cutoff(model, x0, r0, &spec.refined(), &sampling.refined())?;
    let mut cert = Certificate::new("CutoffProperties", model.name())
        .with_tolerance(0.0)
        .param("n", cut.n as f64)
        .param("r0", r0)
        .param("eps", cut.eps);
    let sample = |rho_max: f64, rho_min: f64| -> Vec<(f64, [f64; 3])> {
        let pts: Vec<(f64, f64)> = (0..=sampling.radial)
            .flat_map(|i| {
                let rho = rho_min + (rho_max - rho_min) * i as f64 / sampling.radial as f64;
                (0..=sampling.angular)
                    .map(move |j| (rho, std::f64::consts::FRAC_PI_4 * j as f64 / sampling.angular as f64))
            })
            .collect();
        pts.par_iter().map(|&(rho, th)| (rho, cut.eval(model, &cut.slice_coords(rho, th)))).collect()
    };
    let plateau = sample(cut.plateau_radius, 0.0);
    let transition = sample(cut.support_radius, cut.plateau_radius);
    let outside = sample(2.1 * r0, CUTOFF_SUPPORT * r0);
    for (rho, v) in plateau.iter().chain(&transition).chain(&outside) {
        cert.push(*rho, v[0], 1.0);
        cert.push(*rho, -v[0], 0.0);
    }
    for (rho, v) in &plateau {
        cert.push(*rho, (1.0 - v[0]).abs(), 1e-6);
    }
    for (rho, v) in &outside {
        cert.push(*rho, v[0].abs(), 1e-6);
    }
    let change = |a: f64, b: f64| if a == b { 0.0 } else { (b / a - 1.0).abs() };
    cert.push(0.0, change(cut.sup_grad, fine.sup_grad), 0.05);
    cert.push(0.0, change(cut.sup_laplacian, fine.sup_laplacian), 0.05);
    let c = &cut.constants;
    for (k, v) in [
        ("C1", c.c1),
        ("C2", c.c2),
        ("C3", c.c3),
        ("C4", c.c4),
        ("A", cut.a),
        ("delta_hat", cut.delta_hat),
        ("delta", cut.delta),
        ("cover_count", cut.cover_count as f64),
        ("lattice_spacing", cut.lattice_spacing),
        ("bump_support", cut.bump.support),
        ("support_radius", cut.support_radius),
        ("C_grad", cut.sup_grad),
        ("C_laplacian", cut.sup_laplacian),
        ("C_grad_refined", fine.sup_grad),
        ("C_laplacian_refined", fine.sup_laplacian),
    ] {
        cert.constant(k, v);
    }
    Ok(cert.finish())
}
