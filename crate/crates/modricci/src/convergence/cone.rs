//! Volume-cone rigidity: the measured defect in `(1 - delta) vol B <= (R/n) vol dB`,
//! the annulus comparisons, and the distance from a ball to the metric cone over
//! its rescaled distance sphere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::metric::{cone_space, embed, gh_distance, gh_lower_bound, FiniteMetricSpace, GhBounds};
use crate::certificate::Certificate;
use crate::constants::{c_alpha, volume_exponent};
use crate::error::{Error, Result};
use crate::geometry::random_unit;
use crate::models::Model;
use crate::numerics::unit_ball_volume;
use crate::radial::{ball_volume, sphere_area};

const CROSS_SECTION: usize = 24;
const RADIAL_GRID: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
const ETAS: [f64; 3] = [0.5, 0.25, 0.125];
const SEED: u64 = 0x636f6e65;

/// Ball and sphere ratios against Euclidean space at radius `r`.
struct Ratios {
    volume: f64,
    area: f64,
}

fn ratios(model: &Model, x: &[f64], r: f64) -> Result<Ratios> {
    let n = model.n();
    let vf = unit_ball_volume(n) * r.powi(n as i32);
    Ok(Ratios { volume: ball_volume(model, x, r)? / vf, area: sphere_area(model, x, r)? / (n as f64 * vf / r) })
}

/// `1 - (R/n) vol dB(x, R) / vol B(x, R)`; zero on flat balls.
pub fn measured_delta(model: &Model, x: &[f64], r: f64) -> Result<f64> {
    let q = ratios(model, x, r)?;
    Ok(1.0 - q.area / q.volume)
}

/// The ball sample and the cone over its rescaled distance sphere, on the
/// grid `RADIAL_GRID * R` of radii and `CROSS_SECTION` directions, with the
/// half-distortion of the natural correspondence.
pub fn cone_comparison(model: &Model, x: &[f64], r: f64) -> Result<(FiniteMetricSpace, FiniteMetricSpace, f64)> {
    let sf = model
        .space_form()
        .ok_or_else(|| Error::UnsupportedKind(format!("cone comparison needs closed-form distances, got {}", model.name())))?;
    let n = model.n();
    let c = embed(&sf, x);
    let basis = sf.tangent_basis(&c);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let dirs: Vec<Vec<f64>> = (0..CROSS_SECTION).map(|_| random_unit(n, &mut rng)).collect();
    // intrinsic distance on dB(x, R/2), rescaled by 2/R
    let scale = model.warp_at(0.5 * r)[0] / (0.5 * r);
    let m = dirs.len();
    let mut dz = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..i {
            let cosang: f64 = dirs[i].iter().zip(&dirs[j]).map(|(a, b)| a * b).sum();
            let v = scale * cosang.clamp(-1.0, 1.0).acos();
            dz[i][j] = v;
            dz[j][i] = v;
        }
    }
    let z = FiniteMetricSpace::new((0..m).map(|i| format!("z{i}")).collect(), dz)?;
    let grid: Vec<f64> = RADIAL_GRID.iter().map(|t| t * r).collect();
    let cone = cone_space(&z, &grid)?;
    let pts: Vec<Vec<f64>> = grid
        .iter()
        .flat_map(|&s| dirs.iter().map(move |u| (s, u)))
        .map(|(s, u)| sf.from_normal_coords(&c, &basis, &u.iter().map(|v| v * s).collect::<Vec<_>>()))
        .collect();
    let k = pts.len();
    let mut d = vec![vec![0.0; k]; k];
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..i {
            let v = sf.dist(&pts[i], &pts[j]);
            d[i][j] = v;
            d[j][i] = v;
            worst = worst.max((v - cone.d[i][j]).abs());
        }
    }
    let ball = FiniteMetricSpace::new(cone.labels.clone(), d)?;
    Ok((ball, cone, 0.5 * worst))
}

/// Cone-rigidity certificate on `B(x, R)`, `0 < R <= 1`.
///
/// Rows: the volume-cone condition at `delta_probe`; the annulus comparisons
/// at `eta = 1/2, 1/4` with `1 + Psi = e^{C(alpha) K R^{1-alpha} + lambda R^2}`;
/// the conclusion `(1 - Psi_L) V((1-eta)R) <= A((1-eta)R)` (both as ratios to
/// Euclidean) at `eta = 1/2, 1/4, 1/8`, with `Psi_L` assembled from the measured
/// half-ball defect; and, on space forms, the trend of `|delta|` and of the
/// distance to the cone over the radii `R, R/2, R/4`.
pub fn cone_rigidity_suite(model: &Model, x: &[f64], r: f64, delta_probe: f64) -> Result<Certificate> {
    let n = model.n();
    if x.len() != n {
        return Err(Error::InvalidSpec { field: "x", reason: format!("expected {n} coordinates") });
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidSpec { field: "R", reason: format!("{r} is not in (0, 1]") });
    }
    if !(0.0..1.0).contains(&delta_probe) {
        return Err(Error::InvalidSpec { field: "delta_probe", reason: format!("{delta_probe} is not in [0, 1)") });
    }
    let nf = n as f64;
    let mut cert =
        Certificate::new("ConeRigidity", model.name()).with_tolerance(1e-9).param("R", r).param("delta_probe", delta_probe);

    let full = ratios(model, x, r)?;
    let delta = 1.0 - full.area / full.volume;
    cert.constant("delta", delta);
    let vol = ball_volume(model, x, r)?;
    cert.push(r, (1.0 - delta_probe) * vol, r / nf * sphere_area(model, x, r)?);

    let psi = volume_exponent(c_alpha(model.alpha()), model.k(), model.alpha(), model.lambda(), r).exp() - 1.0;
    cert.constant("Psi_volume_element", psi);
    let annulus_ratio = |inner: f64| -> Result<f64> {
        let flat = unit_ball_volume(n) * (r.powi(n as i32) - inner.powi(n as i32));
        Ok((ball_volume(model, x, r)? - ball_volume(model, x, inner)?) / flat)
    };
    for eta in [0.5, 0.25] {
        let ann = annulus_ratio(eta * r)?;
        cert.push(r, full.area, (1.0 + psi) * ann);
        cert.push(eta * r, ann, (1.0 + psi) * ratios(model, x, eta * r)?.area);
    }

    let half = ratios(model, x, 0.5 * r)?;
    let delta_half = (1.0 - full.volume / half.volume).max(0.0);
    cert.constant("delta_half_ball", delta_half);
    for eta in ETAS {
        let t = (1.0 - eta).powi(n as i32);
        let rho = t / (1.0 - t);
        let one_minus = ((1.0 - delta_half) - (2f64.powi(n as i32) * psi * (1.0 + psi) + delta_half) * rho) / (1.0 + psi);
        let q = ratios(model, x, (1.0 - eta) * r)?;
        cert.constant(&format!("Psi_L_eta_{eta}"), 1.0 - one_minus);
        cert.push((1.0 - eta) * r, one_minus * q.volume, q.area);
    }

    if model.space_form().is_some() {
        let mut prev: Option<(f64, f64)> = None;
        for j in 0..3 {
            let rj = r / 2f64.powi(j);
            let dj = measured_delta(model, x, rj)?.abs();
            let (ball, cone, natural) = cone_comparison(model, x, rj)?;
            // the search cannot beat the invariant lower bound
            let gh = if natural <= gh_lower_bound(&ball, &cone) + 1e-15 {
                GhBounds { lower: gh_lower_bound(&ball, &cone), upper: natural }
            } else {
                gh_distance(&ball, &cone)
            };
            let upper = gh.upper.min(natural);
            cert.constant(&format!("delta_{j}"), dj);
            cert.constant(&format!("gh_lower_{j}"), gh.lower);
            cert.constant(&format!("gh_upper_{j}"), upper);
            if let Some((pd, pg)) = prev {
                cert.push(rj, dj, pd);
                cert.push(rj, upper, pg);
            }
            prev = Some((dj, upper));
        }
    }
    Ok(cert.finish())
}
