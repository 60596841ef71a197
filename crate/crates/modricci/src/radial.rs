//! Geodesic polar coordinates: volume element, `Delta s`, ball volumes and
//! the comparison certificates built on them.
//!
//! Any 2-plane through `O` of a rotationally symmetric model is totally
//! geodesic with metric `dr^2 + f(r)^2 dtheta^2`, so a geodesic from a
//! center `x` is integrated in that plane. Off-center volume elements are
//! available when the model is a space form (homogeneous, `w = f^{n-1}`) or
//! `n = 2` (Jacobi field along the geodesic).

use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::constants::{volume_exponent, volume_ratio_constant, CAlphaPolicy};
use crate::error::{Error, Result};
use crate::models::Model;
use crate::numerics::ode::Rk5;
use crate::numerics::quad::{simpson, ATOL};
use crate::numerics::unit_sphere_area;

/// Tolerance on `w(s)/s^{n-1} -> 1` at the smallest grid radius.
pub const SMALL_RADIUS_TOL: f64 = 1e-4;

/// Number of directions in the angular rule of off-center 2D volumes.
const ANGLES: usize = 64;

/// Sampled volume element along a geodesic ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub center: Vec<f64>,
    /// `None` when the profile does not depend on the direction.
    pub direction: Option<Vec<f64>>,
    pub s_grid: Vec<f64>,
    pub w: Vec<f64>,
    pub delta_s: Vec<f64>,
    pub cut_radius: f64,
}

impl RadialProfile {
    /// `psi = (Delta s - (n-1)/s)_+` on the grid.
    pub fn psi(&self, n: usize) -> Vec<f64> {
        self.s_grid
            .iter()
            .zip(&self.delta_s)
            .map(|(s, d)| (d - (n - 1) as f64 / s).max(0.0))
            .collect()
    }
}

/// State along a geodesic in the plane through `O`: distance `r` to `O`, `r'`,
/// Jacobi field `J`, `J'`.
#[derive(Debug, Clone, Copy)]
pub struct RayState {
    pub r: f64,
    pub dr: f64,
    pub j: f64,
    pub dj: f64,
}

/// Geodesic from `center` with direction `dir` (components in the
/// orthonormal frame `{d/dr, tangential}` at `center`), sampled at `outputs`.
///
/// `J'' + K J = 0` with `K = -f''/f` is the Gaussian curvature of the plane.
pub fn integrate_ray(model: &Model, center: &[f64], dir: &[f64], outputs: &[f64]) -> Result<Vec<RayState>> {
    let d0 = model.dist_to_origin(center);
    let warp = model.warp().clone();
    if d0 == 0.0 {
        // radial ray from O
        let res = Rk5::default().solve(
            |s, y: &[f64; 2]| [y[1], -warp.radial_curvature(s) * y[0]],
            0.0,
            [0.0, 1.0],
            outputs,
        )?;
        return Ok(outputs
            .iter()
            .zip(res)
            .map(|(&s, y)| RayState { r: s, dr: 1.0, j: y[0], dj: y[1] })
            .collect());
    }
    let nrm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (cos_psi, sin_psi) = (dir[0] / nrm, (1.0 - (dir[0] / nrm).powi(2)).max(0.0).sqrt());
    if sin_psi < 1e-12 && cos_psi < 0.0 {
        return Err(Error::SingularEvaluation { distance: 0.0, eps_min: model.eps_min() });
    }
    // angular momentum f^2 theta' is conserved
    let c = warp.eval(d0)[0] * sin_psi;
    let res = Rk5::default().solve(
        |_, y: &[f64; 4]| {
            let [f, fp, fpp] = warp.eval(y[0]);
            [y[1], c * c * fp / (f * f * f), y[3], fpp / f * y[2]]
        },
        0.0,
        [d0, cos_psi, 0.0, 1.0],
        outputs,
    )?;
    Ok(res.into_iter().map(|y| RayState { r: y[0], dr: y[1], j: y[2], dj: y[3] }).collect())
}

fn is_origin(y: &[f64]) -> bool {
    y.iter().all(|&c| c == 0.0)
}

/// Whether the volume element at `center` is `f^{n-1}` in every direction.
fn symmetric_at(model: &Model, center: &[f64]) -> bool {
    is_origin(center) || model.space_form().is_some()
}

/// Volume element and `Delta s` along a ray.
///
/// Closed form `w = f^{n-1}` at `O` and on space forms, Jacobi ODE for
/// off-center rays in dimension 2.
pub fn radial_profile(
    model: &Model,
    center: &[f64],
    direction: Option<&[f64]>,
    s_max: f64,
    n_grid: usize,
) -> Result<RadialProfile> {
    if !(s_max > 0.0) || n_grid < 2 {
        return Err(Error::InvalidSpec { field: "s_max", reason: "need s_max > 0 and n_grid >= 2".into() });
    }
    let n = model.n();
    let s_grid: Vec<f64> = (1..=n_grid).map(|i| s_max * i as f64 / n_grid as f64).collect();
    if symmetric_at(model, center) {
        let cut = model.cut_radius();
        if s_max >= cut {
            return Err(Error::CutLocusReached { radius: s_max, cut });
        }
        let w = s_grid.iter().map(|&s| model.volume_element(s)).collect();
        let delta_s = s_grid.iter().map(|&s| model.laplacian_of_distance(s)).collect();
        return Ok(RadialProfile {
            center: center.to_vec(),
            direction: None,
            s_grid,
            w,
            delta_s,
            cut_radius: cut,
        });
    }
    if n != 2 {
        return Err(Error::UnsupportedDimension {
            n,
            reason: "off-center profiles need a space form or n = 2",
        });
    }
    let dir = direction.ok_or(Error::InvalidSpec { field: "direction", reason: "required off-center".into() })?;
    let rays = integrate_ray(model, center, dir, &s_grid)?;
    if let Some(i) = rays.iter().position(|r| r.j <= 0.0) {
        return Err(Error::CutLocusReached { radius: s_max, cut: s_grid[i] });
    }
    Ok(RadialProfile {
        center: center.to_vec(),
        direction: Some(dir.to_vec()),
        w: rays.iter().map(|r| r.j).collect(),
        delta_s: rays.iter().map(|r| r.dj / r.j).collect(),
        s_grid,
        cut_radius: f64::INFINITY,
    })
}

/// Volume element along radial rays from `O` by the Jacobi equation
/// `J'' = (f''/f) J`, `w = J^{n-1}`; an oracle for the closed form.
pub fn jacobi_profile(model: &Model, s_grid: &[f64]) -> Result<Vec<f64>> {
    let rays = integrate_ray(model, &vec![0.0; model.n()], &[1.0, 0.0], s_grid)?;
    Ok(rays.iter().map(|r| r.j.powi(model.n() as i32 - 1)).collect())
}

/// `int_{B(center, r)} g(d(center, .)) dvol`.
///
/// Symmetric centers use `|S| r^n int_0^1 g(ru) (f(ru)/(ru))^{n-1} u^{n-1} du`,
/// which keeps relative accuracy at small `r`.
pub fn radial_integral<G: Fn(f64) -> f64>(model: &Model, center: &[f64], r: f64, g: G) -> Result<f64> {
    let n = model.n();
    if r == 0.0 {
        return Ok(0.0);
    }
    if symmetric_at(model, center) {
        let cut = model.cut_radius();
        if r > cut * (1.0 + 1e-12) {
            return Err(Error::CutLocusReached { radius: r, cut });
        }
        let i = simpson(
            |u| {
                if u == 0.0 {
                    return 0.0;
                }
                let s = (r * u).min(cut);
                g(s) * (model.warp_at(s)[0] / s).powi(n as i32 - 1) * u.powi(n as i32 - 1)
            },
            0.0,
            1.0,
            ATOL * 1e-3,
        )?;
        return Ok(unit_sphere_area(n) * r.powi(n as i32) * i);
    }
    off_center_2d(model, center, r, |s, j| g(s) * j)
}

/// `vol B(center, r)`.
pub fn ball_volume(model: &Model, center: &[f64], r: f64) -> Result<f64> {
    radial_integral(model, center, r, |_| 1.0)
}

/// `vol dB(center, r)`.
pub fn sphere_area(model: &Model, center: &[f64], r: f64) -> Result<f64> {
    let n = model.n();
    if symmetric_at(model, center) {
        let cut = model.cut_radius();
        if r > cut * (1.0 + 1e-12) {
            return Err(Error::CutLocusReached { radius: r, cut });
        }
        return Ok(unit_sphere_area(n) * model.volume_element(r));
    }
    if model.n() != 2 {
        return Err(Error::UnsupportedDimension { n: model.n(), reason: "off-center areas need n = 2" });
    }
    let mut acc = 0.0;
    for k in 0..ANGLES {
        let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / ANGLES as f64;
        acc += integrate_ray(model, center, &[a.cos(), a.sin()], &[r])?[0].j.max(0.0);
    }
    Ok(acc * 2.0 * std::f64::consts::PI / ANGLES as f64)
}

/// `int_0^{2 pi} int_0^r h(s, J(s, theta)) ds dtheta` for `n = 2`.
fn off_center_2d<H: Fn(f64, f64) -> f64>(model: &Model, center: &[f64], r: f64, h: H) -> Result<f64> {
    if model.n() != 2 {
        return Err(Error::UnsupportedDimension { n: model.n(), reason: "off-center volumes need n = 2" });
    }
    const M: usize = 128;
    let grid: Vec<f64> = (1..=M).map(|i| r * i as f64 / M as f64).collect();
    let step = r / M as f64;
    // trapezoid in the angle is spectrally accurate for periodic integrands;
    // offset by half a step so no ray heads straight into O
    let mut acc = 0.0;
    for k in 0..ANGLES {
        let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / ANGLES as f64;
        let rays = integrate_ray(model, center, &[a.cos(), a.sin()], &grid)?;
        // Simpson on the sampled integrand, which vanishes at s = 0 with J
        let mut sum = h(grid[M - 1], rays[M - 1].j.max(0.0));
        for i in 0..M - 1 {
            let v = h(grid[i], rays[i].j.max(0.0));
            sum += if i % 2 == 0 { 4.0 * v } else { 2.0 * v };
        }
        acc += sum * step / 3.0;
    }
    Ok(acc * 2.0 * std::f64::consts::PI / ANGLES as f64)
}

/// One certified inequality of the comparison family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComparisonKind {
    /// `Delta s - (n-1)/s <= lambda s/3 + <V, grad s> + C(alpha) K s^{-alpha}`.
    LaplacianComparison,
    /// `w(s2)/s2^{n-1} <= e^{C(alpha) K s2^{1-alpha} + lambda s2^2} w(s1)/s1^{n-1}`.
    VolumeElementRatio,
    /// `w(s) <= e^{C(alpha) K s^{1-alpha} + lambda s^2} s^{n-1}`.
    VolumeElementAbs,
    /// `vol B(r) <= e^{C(alpha) K r^{1-alpha} + lambda r^2} |S^{n-1}|/n r^n`.
    VolumeNoninflation,
    /// `Q(r2) <= e^{C [lambda (r2^2 - r1^2) + K (r2 - r1)^{1-alpha}]} Q(r1)`, `Q = vol B(r)/r^n`.
    VolumeRatioBound,
    /// `Delta s - (n-1)/s <= lambda s/3 + 2K` for `|V| <= K`.
    BoundedVLaplacian,
    /// `Q(r2) <= e^{lambda (r2^2 - r1^2) + 2K (r2 - r1)} Q(r1)` for `|V| <= K`.
    BoundedVRatio,
    /// `Delta s - (n-1)/s <= lambda s/3 + 4 K1 s^{a-1} + <grad L, grad s>`, `s < 1`.
    BELaplacian,
    /// `Q(r2) <= e^{lambda (r2^2 - r1^2) + K2/(1-beta) (r2-r1)^{1-beta} + 4 K1/a (r2-r1)^a} Q(r1)`.
    BEVolumeRatio,
    /// `Delta s - (n-1)/s <= |lambda| s/3 + 2 Lambda` on solitons.
    SolitonLaplacian,
    /// `Q(r2) <= e^{|lambda| (r2^2 - r1^2) + 2 Lambda (r2 - r1)} Q(r1)` on solitons.
    SolitonRatio,
    /// `s^{1-alpha} + (d0 - s)^{1-alpha} >= d0^{1-alpha}`, `s <= d0`.
    Jensen,
}

impl ComparisonKind {
    pub const ALL: [ComparisonKind; 12] = [
        ComparisonKind::LaplacianComparison,
        ComparisonKind::VolumeElementRatio,
        ComparisonKind::VolumeElementAbs,
        ComparisonKind::VolumeNoninflation,
        ComparisonKind::VolumeRatioBound,
        ComparisonKind::BoundedVLaplacian,
        ComparisonKind::BoundedVRatio,
        ComparisonKind::BELaplacian,
        ComparisonKind::BEVolumeRatio,
        ComparisonKind::SolitonLaplacian,
        ComparisonKind::SolitonRatio,
        ComparisonKind::Jensen,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ComparisonKind::LaplacianComparison => "LaplacianComparison",
            ComparisonKind::VolumeElementRatio => "VolumeElementRatio",
            ComparisonKind::VolumeElementAbs => "VolumeElementAbs",
            ComparisonKind::VolumeNoninflation => "VolumeNoninflation",
            ComparisonKind::VolumeRatioBound => "VolumeRatioBound",
            ComparisonKind::BoundedVLaplacian => "BoundedVLaplacian",
            ComparisonKind::BoundedVRatio => "BoundedVRatio",
            ComparisonKind::BELaplacian => "BELaplacian",
            ComparisonKind::BEVolumeRatio => "BEVolumeRatio",
            ComparisonKind::SolitonLaplacian => "SolitonLaplacian",
            ComparisonKind::SolitonRatio => "SolitonRatio",
            ComparisonKind::Jensen => "Jensen",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnknownKind(name.to_string()))
    }

    /// Whether `model` carries the data the kind needs.
    pub fn applies_to(&self, model: &Model) -> bool {
        match self {
            ComparisonKind::BoundedVLaplacian | ComparisonKind::BoundedVRatio => model.alpha() == 0.0,
            ComparisonKind::BELaplacian | ComparisonKind::BEVolumeRatio => model.bakry_emery_condition().is_some(),
            ComparisonKind::SolitonLaplacian | ComparisonKind::SolitonRatio => model.soliton().is_some(),
            _ => true,
        }
    }
}

/// Directions used at `center`: one at `O`; away from `O`, tangential and
/// 45 degrees inward otherwise (a ray straight into `O` would hit the
/// singularity of `V`).
fn directions(center: &[f64]) -> Vec<Vec<f64>> {
    if is_origin(center) {
        return vec![vec![1.0, 0.0]];
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-h, h]]
}

/// `Delta s - (n-1)/s` and `<V, grad s>` along one ray.
fn laplacian_terms(model: &Model, center: &[f64], dir: &[f64], radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n1 = (model.n() - 1) as f64;
    let rays = integrate_ray(model, center, dir, radii)?;
    let sym = symmetric_at(model, center);
    radii
        .iter()
        .zip(rays)
        .map(|(&s, ray)| {
            let excess = if sym {
                model.laplacian_excess(s)
            } else {
                if ray.j <= 0.0 {
                    return Err(Error::CutLocusReached { radius: s, cut: s });
                }
                ray.dj / ray.j - n1 / s
            };
            if model.field_profile().is_singular() && ray.r < model.eps_min() {
                return Err(Error::SingularEvaluation { distance: ray.r, eps_min: model.eps_min() });
            }
            let (v, _) = model.field_at(ray.r);
            Ok((excess, v * ray.dr))
        })
        .collect()
}

/// `Q(r) = vol B(center, r)/r^n`.
fn ratio_q(model: &Model, center: &[f64], r: f64) -> Result<f64> {
    Ok(ball_volume(model, center, r)? / r.powi(model.n() as i32))
}

/// Soliton gradient bound `Lambda` for centers and radii inside `B(O, delta)`.
fn soliton_lambda(model: &Model, center: &[f64], radii: &[f64]) -> Result<f64> {
    let sol = model.soliton().ok_or_else(|| Error::UnsupportedKind(format!("{} is not a soliton", model.name())))?;
    let r_max = radii.iter().cloned().fold(0.0, f64::max);
    let delta = model.dist_to_origin(center) + r_max;
    let k_l = model.potential_sup(2.0 * delta).unwrap_or(0.0);
    sol.gradient_bound(k_l, model.spec().c1)
}

/// Evaluates `kind` at `center` on the radii grid.
///
/// The four `Q`-ratio kinds are certified in logarithmic form,
/// `ln Q(r2) <= exponent + ln Q(r1)`.
pub fn verify_comparison(
    model: &Model,
    kind: ComparisonKind,
    center: &[f64],
    radii: &[f64],
    policy: CAlphaPolicy,
) -> Result<Certificate> {
    if !kind.applies_to(model) {
        return Err(Error::UnsupportedKind(format!("{} on {}", kind.name(), model.name())));
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpec { field: "radii", reason: "need increasing positive radii".into() });
    }
    let (n, lam, k, alpha) = (model.n(), model.lambda(), model.k(), model.alpha());
    let c = policy.value(alpha);
    let d0 = model.dist_to_origin(center);
    let mut cert = Certificate::new(kind.name(), model.name())
        .param("n", n as f64)
        .param("lambda", lam)
        .param("K", k)
        .param("alpha", alpha)
        .param("d0", d0)
        .param("C_alpha", c);
    let pairs = |f: &mut dyn FnMut(f64, f64) -> Result<()>| -> Result<()> {
        for w in radii.windows(2) {
            f(w[0], w[1])?;
        }
        Ok(())
    };
    match kind {
        ComparisonKind::LaplacianComparison
        | ComparisonKind::BoundedVLaplacian
        | ComparisonKind::BELaplacian
        | ComparisonKind::SolitonLaplacian => {
            let extra = match kind {
                ComparisonKind::BELaplacian => {
                    if radii.iter().any(|&r| r >= 1.0) {
                        return Err(Error::InvalidSpec { field: "radii", reason: "need s < 1".into() });
                    }
                    let be = model.bakry_emery_condition().expect("checked by applies_to");
                    cert.set_param("K1", be.k1);
                    cert.set_param("a", be.a);
                    Some((be.k1, be.a))
                }
                _ => None,
            };
            let lam_sol = match kind {
                ComparisonKind::SolitonLaplacian => {
                    let l = soliton_lambda(model, center, radii)?;
                    cert.set_param("Lambda", l);
                    Some(l)
                }
                _ => None,
            };
            let mut c_star: f64 = 0.0;
            for dir in directions(center) {
                for (&s, (lhs, vds)) in radii.iter().zip(laplacian_terms(model, center, &dir, radii)?) {
                    let rhs = match kind {
                        ComparisonKind::LaplacianComparison => {
                            if k > 0.0 {
                                c_star = c_star.max((lhs - lam * s / 3.0 - vds) * s.powf(alpha) / k);
                            }
                            lam * s / 3.0 + vds + c * k * s.powf(-alpha)
                        }
                        ComparisonKind::BoundedVLaplacian => lam * s / 3.0 + 2.0 * k,
                        ComparisonKind::BELaplacian => {
                            let (k1, a) = extra.unwrap();
                            lam * s / 3.0 + 4.0 * k1 * s.powf(a - 1.0) + vds
                        }
                        _ => {
                            let sl = model.soliton().unwrap().soliton_lambda.abs();
                            sl * s / 3.0 + 2.0 * lam_sol.unwrap()
                        }
                    };
                    cert.push(s, lhs, rhs);
                }
            }
            if kind == ComparisonKind::LaplacianComparison {
                cert.constant("C_alpha_empirical", c_star);
            }
        }
        ComparisonKind::VolumeElementRatio | ComparisonKind::VolumeElementAbs => {
            for dir in directions(center) {
                let sym = symmetric_at(model, center);
                let w = |s: f64| -> Result<f64> {
                    if sym {
                        return Ok(model.volume_element(s));
                    }
                    let j = integrate_ray(model, center, &dir, &[s])?[0].j;
                    if j <= 0.0 {
                        return Err(Error::CutLocusReached { radius: s, cut: s });
                    }
                    Ok(j.powi(n as i32 - 1))
                };
                if kind == ComparisonKind::VolumeElementAbs {
                    for &s in radii {
                        let e = volume_exponent(c, k, alpha, lam, s);
                        cert.push(s, w(s)?, e.exp() * s.powi(n as i32 - 1));
                    }
                } else {
                    pairs(&mut |s1, s2| {
                        let e = volume_exponent(c, k, alpha, lam, s2);
                        cert.push(s2, w(s2)? / s2.powi(n as i32 - 1), e.exp() * w(s1)? / s1.powi(n as i32 - 1));
                        Ok(())
                    })?;
                }
            }
        }
        ComparisonKind::VolumeNoninflation => {
            for &r in radii {
                let e = volume_exponent(c, k, alpha, lam, r);
                let flat = unit_sphere_area(n) / n as f64 * r.powi(n as i32);
                cert.push(r, ball_volume(model, center, r)?, e.exp() * flat);
            }
        }
        ComparisonKind::VolumeRatioBound
        | ComparisonKind::BoundedVRatio
        | ComparisonKind::BEVolumeRatio
        | ComparisonKind::SolitonRatio => {
            if radii.iter().any(|&r| r > 1.0) {
                return Err(Error::InvalidSpec { field: "radii", reason: "ratio bounds need r <= 1".into() });
            }
            let chain = match policy {
                CAlphaPolicy::Default => volume_ratio_constant(n, lam, k, alpha, model.rho()),
                CAlphaPolicy::Fixed(v) => v,
            };
            let be = model.bakry_emery_condition();
            let lam_sol = match kind {
                ComparisonKind::SolitonRatio => Some(soliton_lambda(model, center, radii)?),
                _ => None,
            };
            if kind == ComparisonKind::VolumeRatioBound {
                cert.set_param("C_chain", chain);
            }
            let mut c_star: f64 = 0.0;
            let mut q_prev = ratio_q(model, center, radii[0])?;
            pairs(&mut |r1, r2| {
                let q2 = ratio_q(model, center, r2)?;
                let dr2 = r2 * r2 - r1 * r1;
                let dr = r2 - r1;
                let expo = match kind {
                    ComparisonKind::VolumeRatioBound => {
                        let base = lam * dr2 + k * dr.powf(1.0 - alpha);
                        if base > 0.0 {
                            c_star = c_star.max((q2 / q_prev).ln() / base);
                        }
                        chain * base
                    }
                    ComparisonKind::BoundedVRatio => lam * dr2 + 2.0 * k * dr,
                    ComparisonKind::BEVolumeRatio => {
                        let b = be.unwrap();
                        lam * dr2 + b.k2 / (1.0 - b.beta) * dr.powf(1.0 - b.beta) + 4.0 * b.k1 / b.a * dr.powf(b.a)
                    }
                    _ => {
                        let sl = model.soliton().unwrap().soliton_lambda.abs();
                        sl * dr2 + 2.0 * lam_sol.unwrap() * dr
                    }
                };
                // log form: exp(chain * base) overflows for large chain constants
                cert.push(r2, q2.ln(), expo + q_prev.ln());
                q_prev = q2;
                Ok(())
            })?;
            if kind == ComparisonKind::VolumeRatioBound {
                cert.constant("C_empirical", c_star);
            }
        }
        ComparisonKind::Jensen => {
            let d = if d0 > 0.0 { d0 } else { *radii.last().unwrap() };
            let e = 1.0 - alpha;
            for &s in radii.iter().filter(|&&s| s <= d) {
                cert.push(s, d.powf(e), s.powf(e) + (d - s).powf(e));
            }
        }
    }
    Ok(cert.finish())
}

/// `Q(r) = vol B(r)/r^n` against the volume-ratio bound on consecutive
/// pairs, plus exact monotonicity `Q(r2) <= Q(r1)` when `lambda = K = 0`.
pub fn verify_volume_ratio_monotone(model: &Model, center: &[f64], r_grid: &[f64]) -> Result<Certificate> {
    let mut cert = verify_comparison(model, ComparisonKind::VolumeRatioBound, center, r_grid, CAlphaPolicy::Default)?;
    cert.kind = "VolumeRatioMonotone".into();
    if model.lambda() == 0.0 && model.k() == 0.0 {
        let q: Vec<f64> = r_grid.iter().map(|&r| ratio_q(model, center, r)).collect::<Result<_>>()?;
        for (i, w) in q.windows(2).enumerate() {
            cert.push(r_grid[i + 1], w[1].ln(), w[0].ln());
        }
    }
    Ok(cert.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, catalog_entry};

    fn model(name: &str) -> Model {
        build_model(&catalog_entry(name).unwrap()).unwrap()
    }

    #[test]
    fn hyperbolic_laplacian_margin() {
        let m = model("hyperbolic");
        let c = verify_comparison(&m, ComparisonKind::LaplacianComparison, &[0.0; 3], &[1.0], CAlphaPolicy::Default)
            .unwrap();
        let exact = 2.0 / 3.0 - (2.0 / 1f64.tanh() - 2.0);
        assert!((c.min_margin - exact).abs() < 1e-12);
        assert!((c.min_margin - 0.040_596_1).abs() < 1e-7);
    }

    #[test]
    fn flat_ball_volume() {
        let m = model("euclidean");
        let v = ball_volume(&m, &[0.0; 3], 1.0).unwrap();
        assert!((v - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-9);
    }

    #[test]
    fn kind_names_roundtrip() {
        for k in ComparisonKind::ALL {
            assert_eq!(ComparisonKind::from_name(k.name()).unwrap(), k);
        }
    }
}
