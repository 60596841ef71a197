//! Integral estimates: scaled `L^q` norms of `V`, distance-power integrals,
//! the half-volume property, isoperimetric ratios and Sobolev inequalities
//! on radial test functions.

use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::constants::{
    c_alpha, distance_power_constant, half_volume_delta, half_volume_r0, isoperimetric_slack, lq_constant,
    volume_exponent,
};
use crate::error::{Error, Result};
use crate::models::Model;
use crate::numerics::quad::{gauss_legendre, simpson_power_left, ATOL};
use crate::numerics::unit_sphere_area;
use crate::radial::{ball_volume, radial_integral, sphere_area};

/// `(avg_{B(center, radius)} |V|^q)^{1/q}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedNorm {
    pub center: Vec<f64>,
    pub radius: f64,
    pub q: f64,
    pub value: f64,
}

/// Distance to `O` of the point at distance `s` from `x` (with `d(x, O) = d0`)
/// in a direction making angle `psi` with the outward radial direction.
fn law_of_cosines(kappa: f64, d0: f64, s: f64, psi: f64) -> f64 {
    if kappa == 0.0 {
        (d0 * d0 + s * s + 2.0 * d0 * s * psi.cos()).max(0.0).sqrt()
    } else if kappa > 0.0 {
        let k = kappa.sqrt();
        let c = (d0 * k).cos() * (s * k).cos() - (d0 * k).sin() * (s * k).sin() * psi.cos();
        c.clamp(-1.0, 1.0).acos() / k
    } else {
        let k = (-kappa).sqrt();
        let c = (d0 * k).cosh() * (s * k).cosh() + (d0 * k).sinh() * (s * k).sinh() * psi.cos();
        c.max(1.0).acosh() / k
    }
}

/// `int_{B(center, r)} |V|^q`.
fn field_power_integral(model: &Model, center: &[f64], r: f64, q: f64) -> Result<f64> {
    let n = model.n();
    let d0 = model.dist_to_origin(center);
    let vq = |rho: f64| model.field_at(rho).0.abs().powf(q);
    if d0 == 0.0 {
        // |v|^q w ~ s^{n-1-alpha q} near O
        let beta = n as f64 - 1.0 - model.alpha() * q;
        let i = simpson_power_left(|s| vq(s) * model.volume_element(s), 0.0, r, beta, ATOL * 1e-3)?;
        return Ok(unit_sphere_area(n) * i);
    }
    let sf = model.space_form().ok_or_else(|| {
        Error::UnsupportedKind(format!("off-center field integrals need a space form, got {}", model.name()))
    })?;
    // polar coordinates at x: the angle psi to the outward radial direction carries
    // the measure |S^{n-2}| sin^{n-2} psi dpsi
    let sn2 = unit_sphere_area(n - 1);
    let inner = |psi: f64| {
        gauss_legendre(
            |s| {
                let rho = law_of_cosines(sf.kappa, d0, s, psi);
                if rho < model.eps_min() {
                    0.0
                } else {
                    vq(rho) * model.volume_element(s)
                }
            },
            0.0,
            r,
            24,
        )
    };
    Ok(sn2 * gauss_legendre(|psi| psi.sin().powi(n as i32 - 2) * inner(psi), 0.0, std::f64::consts::PI, 24))
}

/// `(avg_{B(center, r)} |V|^q)^{1/q}`.
pub fn averaged_field_norm(model: &Model, center: &[f64], r: f64, q: f64) -> Result<AveragedNorm> {
    let value = (field_power_integral(model, center, r, q)? / ball_volume(model, center, r)?).powf(1.0 / q);
    Ok(AveragedNorm { center: center.to_vec(), radius: r, q, value })
}

/// Certifies `r^alpha ||V||*_{q, B(x, r)} <= C_L(q) K` for `r <= 1`.
pub fn verify_lq_vector_bound(model: &Model, centers: &[Vec<f64>], radii: &[f64], q: f64) -> Result<Certificate> {
    let (n, alpha) = (model.n() as f64, model.alpha());
    let limit = if alpha > 0.0 { n / alpha } else { f64::INFINITY };
    if !(q > 0.0 && q < limit) {
        return Err(Error::ExponentOutOfRange { q, limit });
    }
    if radii.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::InvalidSpec { field: "radii", reason: "need 0 < r <= 1".into() });
    }
    let origin = vec![0.0; model.n()];
    let v1 = ball_volume(model, &origin, 1.0f64.min(model.cut_radius()))?;
    if v1 < model.rho() {
        return Err(Error::InvalidSpec { field: "rho", reason: format!("vol B(O, 1) = {v1} < rho") });
    }
    let bound = lq_constant(model.n(), model.lambda(), model.k(), alpha, model.rho(), q) * model.k();
    let mut cert = Certificate::new("LqVectorBound", model.name())
        .param("q", q)
        .param("K", model.k())
        .param("alpha", alpha);
    cert.constant("C_L", lq_constant(model.n(), model.lambda(), model.k(), alpha, model.rho(), q));
    let mut worst: f64 = 0.0;
    for c in centers {
        for &r in radii {
            let lhs = r.powf(alpha) * averaged_field_norm(model, c, r, q)?.value;
            if model.k() > 0.0 {
                worst = worst.max(lhs / model.k());
            }
            cert.push(r, lhs, bound);
        }
    }
    cert.constant("C_L_empirical", worst);
    Ok(cert.finish())
}

/// `int_{B(O, r)} d(y, O)^{-gamma} dvol(y)`.
pub fn distance_power_integral(model: &Model, r: f64, gamma: f64) -> Result<f64> {
    let n = model.n();
    if gamma >= n as f64 {
        return Err(Error::GammaTooLarge { gamma, n });
    }
    let beta = n as f64 - 1.0 - gamma;
    let i = simpson_power_left(|s| s.powf(-gamma) * model.volume_element(s), 0.0, r, beta, ATOL * 1e-3)?;
    Ok(unit_sphere_area(n) * i)
}

/// `int_{B(O, r)} d^{-gamma} <= C(n, gamma) e^{C(alpha) K r^{1-alpha} + lambda r^2} r^{n - gamma}`.
pub fn verify_distance_power(model: &Model, radii: &[f64], gamma: f64) -> Result<Certificate> {
    let n = model.n();
    let mut cert = Certificate::new("DistancePowerIntegral", model.name()).param("gamma", gamma);
    let cng = distance_power_constant(n, gamma);
    cert.constant("C_n_gamma", cng);
    for &r in radii {
        let e = volume_exponent(c_alpha(model.alpha()), model.k(), model.alpha(), model.lambda(), r);
        cert.push(r, distance_power_integral(model, r, gamma)?, cng * e.exp() * r.powf(n as f64 - gamma));
    }
    Ok(cert.finish())
}

/// Radius threshold of the half-volume property for `model`.
pub fn half_volume_threshold(model: &Model) -> f64 {
    half_volume_r0(model.n(), model.lambda(), model.k(), model.alpha(), model.rho())
}

/// `vol B(x, delta r)/vol B(x, r) <= 1/2` with `delta = delta(n)`.
pub fn verify_half_volume(model: &Model, centers: &[Vec<f64>], radii: &[f64]) -> Result<Certificate> {
    let r0 = half_volume_threshold(model);
    if let Some(&r) = radii.iter().find(|&&r| r > r0) {
        return Err(Error::RadiusAboveThreshold { r, r0 });
    }
    verify_half_volume_with(model, centers, radii, half_volume_delta(model.n()))
}

/// Half-volume ratio with an explicit `delta` (no threshold check).
pub fn verify_half_volume_with(model: &Model, centers: &[Vec<f64>], radii: &[f64], delta: f64) -> Result<Certificate> {
    let mut cert = Certificate::new("HalfVolume", model.name()).param("delta", delta);
    cert.constant("r0", half_volume_threshold(model));
    for c in centers {
        for &r in radii {
            let ratio = ball_volume(model, c, delta * r)? / ball_volume(model, c, r)?;
            cert.push(r, ratio, 0.5);
        }
    }
    Ok(cert.finish())
}

/// Geodesic-sphere case of the hypersurface bound: `H = dB(x, rho)` halving
/// `B(x, r)` satisfies `vol B(x, r) <= 2^{n+3} r vol(H)`.
pub fn verify_hypersurface_bound(model: &Model, center: &[f64], radii: &[f64]) -> Result<Certificate> {
    let n = model.n();
    let mut cert = Certificate::new("HypersurfaceBound", model.name());
    for &r in radii {
        let half = ball_volume(model, center, r)? / 2.0;
        let rho = crate::numerics::bisect(
            |t| ball_volume(model, center, t).unwrap_or(f64::NAN) - half,
            0.0,
            r,
            1e-13 * r,
        )?;
        let area = sphere_area(model, center, rho)?;
        cert.push(r, 2.0 * half, 2f64.powi(n as i32 + 3) * r * area);
    }
    Ok(cert.finish())
}

/// Compactly supported radial test functions `f = phi(d(x, .)/r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum TestFunction {
    /// `(1 - u)_+^p`.
    Bump { p: u32 },
    /// `(e^{-a u^2} - e^{-a})_+`.
    TruncatedGaussian { a: f64 },
    Zero,
}

impl TestFunction {
    /// The default family: bumps with `p = 1, 2, 3` and a truncated Gaussian.
    pub fn family() -> Vec<TestFunction> {
        vec![
            TestFunction::Bump { p: 1 },
            TestFunction::Bump { p: 2 },
            TestFunction::Bump { p: 3 },
            TestFunction::TruncatedGaussian { a: 4.0 },
        ]
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "bump1" => Ok(TestFunction::Bump { p: 1 }),
            "bump2" => Ok(TestFunction::Bump { p: 2 }),
            "bump3" => Ok(TestFunction::Bump { p: 3 }),
            "gaussian" => Ok(TestFunction::TruncatedGaussian { a: 4.0 }),
            "zero" => Ok(TestFunction::Zero),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }

    /// `(phi(u), phi'(u))` on `u in [0, 1]`.
    pub fn eval(&self, u: f64) -> (f64, f64) {
        if u >= 1.0 {
            return (0.0, 0.0);
        }
        match *self {
            TestFunction::Bump { p } => {
                let b = 1.0 - u;
                (b.powi(p as i32), -(p as f64) * b.powi(p as i32 - 1))
            }
            TestFunction::TruncatedGaussian { a } => {
                let e = (-a * u * u).exp();
                (e - (-a).exp(), -2.0 * a * u * e)
            }
            TestFunction::Zero => (0.0, 0.0),
        }
    }
}

/// Both sides of the `L^1` Sobolev inequality without constant:
/// `((avg |f|^{n/(n-1)})^{(n-1)/n}, r avg |grad f|)`.
pub fn sobolev_l1_sides(model: &Model, center: &[f64], r: f64, f: TestFunction) -> Result<(f64, f64)> {
    let n = model.n() as f64;
    let vol = ball_volume(model, center, r)?;
    let p = n / (n - 1.0);
    let a = radial_integral(model, center, r, |s| f.eval(s / r).0.abs().powf(p))? / vol;
    let g = radial_integral(model, center, r, |s| f.eval(s / r).1.abs() / r)? / vol;
    Ok((a.powf(1.0 / p), r * g))
}

/// Both sides of the `L^2` Sobolev inequality without constant:
/// `((avg |f|^{2n/(n-2)})^{(n-2)/n}, r^2 avg |grad f|^2)`.
pub fn sobolev_l2_sides(model: &Model, center: &[f64], r: f64, f: TestFunction) -> Result<(f64, f64)> {
    let n = model.n();
    if n < 3 {
        return Err(Error::UnsupportedDimension { n, reason: "the L^2 Sobolev exponent needs n >= 3" });
    }
    let nf = n as f64;
    let vol = ball_volume(model, center, r)?;
    let p = 2.0 * nf / (nf - 2.0);
    let a = radial_integral(model, center, r, |s| f.eval(s / r).0.abs().powf(p))? / vol;
    let g = radial_integral(model, center, r, |s| (f.eval(s / r).1 / r).powi(2))? / vol;
    Ok((a.powf(2.0 / p), r * r * g))
}

/// Constants `(C_iso, C_1, C_2)` of the isoperimetric and Sobolev inequalities.
///
/// `C_iso = 10^{2n+5} (3/(4 delta^n))^{1/n}`; the `L^1` form has the same
/// constant; the `L^2` form applies it to `|f|^{2(n-1)/(n-2)}` and Hoelder,
/// giving `(2(n-1)/(n-2) C_iso)^2`.
pub fn sobolev_constants(n: usize) -> (f64, f64, f64) {
    let c = isoperimetric_slack(n);
    let c2 = if n >= 3 {
        let nf = n as f64;
        (2.0 * (nf - 1.0) / (nf - 2.0) * c).powi(2)
    } else {
        f64::NAN
    };
    (c, c, c2)
}

/// Isoperimetric ratios on `Omega = B(x, a r)`, the `L^1` Sobolev form and,
/// for `n >= 3`, the `L^2` form, against the worst-case constants.
pub fn verify_sobolev(model: &Model, center: &[f64], r: f64, tests: &[TestFunction]) -> Result<Certificate> {
    let r0 = half_volume_threshold(model);
    if r > r0 {
        return Err(Error::RadiusAboveThreshold { r, r0 });
    }
    let n = model.n();
    let nf = n as f64;
    let (c_iso, c1, c2) = sobolev_constants(n);
    let mut cert = Certificate::new("Sobolev", model.name()).param("r", r).param("n", nf);
    cert.constant("C_iso", c_iso);
    cert.constant("C_L1", c1);
    cert.constant("C_L2", c2);
    let vol = ball_volume(model, center, r)?;
    let (mut e_iso, mut e1, mut e2) = (0.0f64, 0.0f64, 0.0f64);
    for a in [0.25, 0.5, 0.75, 0.9] {
        let ratio = vol.powf(1.0 / nf) * ball_volume(model, center, a * r)?.powf((nf - 1.0) / nf)
            / sphere_area(model, center, a * r)?;
        e_iso = e_iso.max(ratio / r);
        cert.push(a, ratio, c_iso * r);
    }
    for &f in tests {
        let (l, g) = sobolev_l1_sides(model, center, r, f)?;
        if g > 0.0 {
            e1 = e1.max(l / g);
        }
        cert.push(r, l, c1 * g);
        if n >= 3 {
            let (l, g) = sobolev_l2_sides(model, center, r, f)?;
            if g > 0.0 {
                e2 = e2.max(l / g);
            }
            cert.push(r, l, c2 * g);
        }
    }
    cert.constant("C_iso_empirical", e_iso);
    cert.constant("C_L1_empirical", e1);
    if n >= 3 {
        cert.constant("C_L2_empirical", e2);
    }
    Ok(cert.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, ModelKind, ModelSpec};

    fn singular(k: f64) -> Model {
        let spec = ModelSpec::new(ModelKind::SingularField { base_curvature: 0.0, inward: true }, 3).field(k, 0.5);
        build_model(&spec).unwrap()
    }

    #[test]
    fn lq_closed_form() {
        let m = singular(1.0);
        for r in [0.1f64, 0.5, 1.0] {
            let v = r.sqrt() * averaged_field_norm(&m, &[0.0; 3], r, 2.0).unwrap().value;
            assert!((v - 1.5f64.sqrt()).abs() < 1e-9, "{v}");
        }
        let e = verify_lq_vector_bound(&m, &[vec![0.0; 3]], &[0.5], 7.0).unwrap_err();
        assert!(matches!(e, Error::ExponentOutOfRange { .. }));
    }

    #[test]
    fn sobolev_beta_oracle() {
        let m = build_model(&ModelSpec::new(ModelKind::Euclidean, 3)).unwrap();
        let (l, g) = sobolev_l2_sides(&m, &[0.0; 3], 1.0, TestFunction::Bump { p: 1 }).unwrap();
        let beta: f64 = 2.0 * 720.0 / 362_880.0;
        assert!((l - (3.0 * beta).powf(1.0 / 3.0)).abs() < 1e-8, "{l} {}", (3.0 * beta).powf(1.0 / 3.0));
        assert!((g - 1.0).abs() < 1e-10);
    }
}
