//! Ricci tensor, `1/2 L_V g` and `Hess L` of the catalog models, the
//! pointwise lower-bound verdict, and a finite-difference oracle.

use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::models::Model;
use crate::numerics::eigen::symmetric_eigenvalues;
use crate::numerics::invert;

/// Smallest admissible finite-difference step.
pub const MIN_FD_STEP: f64 = 1e-6;
/// Discrepancies below this are treated as exact by [`convergence_order`].
pub const FD_NOISE_FLOOR: f64 = 1e-9;

/// Frame in which tensor components are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// `g`-orthonormal frame `{d/ds, tangential unit vectors}` written in the
    /// Euclidean basis of normal coordinates.
    Orthonormal,
    /// Coordinate components in normal coordinates at `O`.
    Coordinate,
}

/// Symmetric 2-tensor at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor2 {
    pub components: Vec<Vec<f64>>,
    pub frame: Frame,
}

impl SymTensor2 {
    pub fn eigenvalues(&self) -> Vec<f64> {
        symmetric_eigenvalues(&self.components)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Max-norm asymmetry `max |T_ij - T_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.components.len();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                m = m.max((self.components[i][j] - self.components[j][i]).abs());
            }
        }
        m
    }
}

fn unit_direction(y: &[f64]) -> Option<Vec<f64>> {
    let s = y.iter().map(|x| x * x).sum::<f64>().sqrt();
    (s > 0.0).then(|| y.iter().map(|x| x / s).collect())
}

/// `a theta theta^T + b (I - theta theta^T)`.
fn split_tensor(theta: Option<&[f64]>, n: usize, a: f64, b: f64) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let tt = theta.map_or(0.0, |th| th[i] * th[j]);
            let d = if i == j { 1.0 } else { 0.0 };
            t[i][j] = a * tt + b * (d - tt);
        }
    }
    t
}

fn guard(model: &Model, y: &[f64]) -> Result<f64> {
    let s = model.dist_to_origin(y);
    if model.field_profile().is_singular() && s < model.eps_min() {
        return Err(Error::SingularEvaluation { distance: s, eps_min: model.eps_min() });
    }
    Ok(s)
}

/// Ricci tensor at `y` in the orthonormal frame.
pub fn ricci(model: &Model, y: &[f64]) -> SymTensor2 {
    let s = model.dist_to_origin(y);
    let (a, b) = model.ricci_eigen(s);
    let th = unit_direction(y);
    SymTensor2 { components: split_tensor(th.as_deref(), y.len(), a, b), frame: Frame::Orthonormal }
}

/// `1/2 L_V g` at `y` in the orthonormal frame.
pub fn lie_half(model: &Model, y: &[f64]) -> Result<SymTensor2> {
    let s = guard(model, y)?;
    let (a, b) = model.lie_half_eigen(s);
    let th = unit_direction(y);
    Ok(SymTensor2 { components: split_tensor(th.as_deref(), y.len(), a, b), frame: Frame::Orthonormal })
}

/// `Ric + 1/2 L_V g` at `y` in the orthonormal frame; equals `Ric + Hess L`
/// for gradient fields.
pub fn modified_ricci(model: &Model, y: &[f64]) -> Result<SymTensor2> {
    let s = guard(model, y)?;
    let (ra, rb) = model.ricci_eigen(s);
    let (la, lb) = model.lie_half_eigen(s);
    let th = unit_direction(y);
    Ok(SymTensor2 {
        components: split_tensor(th.as_deref(), y.len(), ra + la, rb + lb),
        frame: Frame::Orthonormal,
    })
}

/// `Hess L` in the orthonormal frame, `(L'', L' f'/f)`, for models with a potential.
pub fn hessian_potential(model: &Model, y: &[f64]) -> Result<SymTensor2> {
    if !model.has_potential() {
        return Err(Error::UnsupportedKind(format!("{} has no potential", model.name())));
    }
    let s = guard(model, y)?;
    let (d1, d2) = model.field_profile().eval(s);
    let tang = if s == 0.0 {
        d2
    } else {
        let [f, fp, _] = model.warp_at(s);
        d1 * fp / f
    };
    let th = unit_direction(y);
    Ok(SymTensor2 { components: split_tensor(th.as_deref(), y.len(), d2, tang), frame: Frame::Orthonormal })
}

/// `1/2 L_V g` assembled from coordinate derivatives of `g` and `V`
/// (`(L_V g)_ij = V^k d_k g_ij + g_kj d_i V^k + g_ik d_j V^k`), then
/// rotated into the orthonormal frame.
pub fn lie_half_coordinate_path(model: &Model, y: &[f64]) -> Result<SymTensor2> {
    let s = guard(model, y)?;
    if s == 0.0 {
        return lie_half(model, y);
    }
    let n = y.len();
    let th: Vec<f64> = y.iter().map(|x| x / s).collect();
    let [f, fp, _] = model.warp_at(s);
    let phi = f / s;
    let dphi = (fp * s - f) / (s * s);
    let (v, dv) = model.field_at(s);
    let g = model.metric(y);
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    // d_k g_ij
    let dg = |k: usize, i: usize, j: usize| {
        let dtt = (d(i, k) * th[j] + th[i] * d(j, k) - 2.0 * th[i] * th[j] * th[k]) / s;
        (1.0 - phi * phi) * dtt + 2.0 * phi * dphi * th[k] * (d(i, j) - th[i] * th[j])
    };
    // d_j V^i
    let dvv = |i: usize, j: usize| dv * th[j] * th[i] + v * (d(i, j) - th[i] * th[j]) / s;
    let vk: Vec<f64> = th.iter().map(|t| v * t).collect();
    let mut lie = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += vk[k] * dg(k, i, j) + g[k][j] * dvv(k, i) + g[i][k] * dvv(k, j);
            }
            lie[i][j] = 0.5 * acc;
        }
    }
    Ok(SymTensor2 { components: to_orthonormal(&lie, &th, phi), frame: Frame::Orthonormal })
}

/// Coordinate tensor `T` to `E^T T E` with `E = [theta, t_a / phi]` and
/// the result rotated back so the frame matches [`split_tensor`].
fn to_orthonormal(t: &[Vec<f64>], th: &[f64], phi: f64) -> Vec<Vec<f64>> {
    let n = th.len();
    // scale map P = theta theta^T + (I - theta theta^T)/phi sends Euclidean
    // orthonormal vectors to g-orthonormal ones
    let p = split_tensor(Some(th), n, 1.0, 1.0 / phi);
    let mut tmp = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            tmp[i][j] = (0..n).map(|k| t[i][k] * p[k][j]).sum();
        }
    }
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = (0..n).map(|k| p[k][i] * tmp[k][j]).sum();
        }
    }
    out
}

/// Certifies `Ric + 1/2 L_V g >= -lambda g` by the smallest eigenvalue at each point.
pub fn verify_lower_bound(model: &Model, points: &[Vec<f64>]) -> Result<Certificate> {
    if points.is_empty() {
        return Err(Error::UnsupportedKind("verify_lower_bound needs at least one point".into()));
    }
    let mut cert = Certificate::new("RicciLowerBound", model.name())
        .param("lambda", model.lambda())
        .with_tolerance(DEFAULT_TOLERANCE);
    for y in points {
        let t = modified_ricci(model, y)?;
        cert.push(model.dist_to_origin(y), -model.lambda(), t.min_eigenvalue());
    }
    Ok(cert.finish())
}

/// Optional verdict for `Ric + 1/2 L_V g - (N - n)^{-1} V (x) V >= -lambda g`.
pub fn verify_n_bakry_emery(model: &Model, points: &[Vec<f64>], big_n: f64) -> Result<Certificate> {
    let n = model.n() as f64;
    if big_n <= n {
        return Err(Error::InvalidSpec { field: "N", reason: format!("N = {big_n} must exceed n = {n}") });
    }
    let mut cert = Certificate::new("NBakryEmery", model.name())
        .param("lambda", model.lambda())
        .param("N", big_n);
    for y in points {
        let s = guard(model, y)?;
        let (ra, rb) = model.ricci_eigen(s);
        let (la, lb) = model.lie_half_eigen(s);
        let (v, _) = model.field_at(s);
        let radial = ra + la - v * v / (big_n - n);
        cert.push(s, -model.lambda(), radial.min(rb + lb));
    }
    Ok(cert.finish())
}

/// Max-norm discrepancy between the analytic tensors and their
/// central-difference reconstruction at `y` with step `h`.
///
/// Compares `Ric + 1/2 L_V g` in coordinates (Christoffels and Ricci by
/// nested central differences of `g`, `L_V g` from differences of `g` and
/// `V`), plus `Hess L` when a potential exists.
pub fn finite_difference_check(model: &Model, y: &[f64], h: f64) -> Result<f64> {
    if h < MIN_FD_STEP {
        return Err(Error::StepTooSmall { h, min: MIN_FD_STEP });
    }
    let s = guard(model, y)?;
    if s <= 2.0 * h {
        return Err(Error::UnsupportedKind("finite differences need d(y, O) > 2h".into()));
    }
    let n = y.len();
    let shift = |p: &[f64], k: usize, d: f64| {
        let mut q = p.to_vec();
        q[k] += d;
        q
    };
    let metric = |p: &[f64]| model.metric(p);
    // d_k g_ij by central differences
    let dmetric = |p: &[f64]| -> Vec<Vec<Vec<f64>>> {
        (0..n)
            .map(|k| {
                let gp = metric(&shift(p, k, h));
                let gm = metric(&shift(p, k, -h));
                (0..n)
                    .map(|i| (0..n).map(|j| (gp[i][j] - gm[i][j]) / (2.0 * h)).collect())
                    .collect()
            })
            .collect()
    };
    // Gamma^k_ij
    let christoffel = |p: &[f64]| -> Result<Vec<Vec<Vec<f64>>>> {
        let gi = invert(&metric(p))?;
        let dg = dmetric(p);
        let mut gam = vec![vec![vec![0.0; n]; n]; n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0.0;
                    for l in 0..n {
                        acc += gi[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                    }
                    gam[k][i][j] = 0.5 * acc;
                }
            }
        }
        Ok(gam)
    };
    let gam = christoffel(y)?;
    let dgam: Vec<Vec<Vec<Vec<f64>>>> = (0..n)
        .map(|m| {
            let gp = christoffel(&shift(y, m, h))?;
            let gm = christoffel(&shift(y, m, -h))?;
            Ok((0..n)
                .map(|k| {
                    (0..n)
                        .map(|i| (0..n).map(|j| (gp[k][i][j] - gm[k][i][j]) / (2.0 * h)).collect())
                        .collect()
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut ric = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += dgam[k][k][i][j] - dgam[j][k][i][k];
                for l in 0..n {
                    acc += gam[k][k][l] * gam[l][i][j] - gam[k][j][l] * gam[l][i][k];
                }
            }
            ric[i][j] = acc;
        }
    }
    // 1/2 L_V g with differenced g and V
    let g = metric(y);
    let dg = dmetric(y);
    let vf = |p: &[f64]| model.vector_field(p);
    let v0 = vf(y)?;
    let dv: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let vp = vf(&shift(y, i, h))?;
            let vm = vf(&shift(y, i, -h))?;
            Ok((0..n).map(|k| (vp[k] - vm[k]) / (2.0 * h)).collect())
        })
        .collect::<Result<_>>()?;
    let mut numeric = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += v0[k] * dg[k][i][j] + g[k][j] * dv[i][k] + g[i][k] * dv[j][k];
            }
            numeric[i][j] = ric[i][j] + 0.5 * acc;
        }
    }
    // analytic, in coordinates: a theta theta^T + b phi^2 (I - theta theta^T)
    let th: Vec<f64> = y.iter().map(|x| x / s).collect();
    let phi2 = (model.warp_at(s)[0] / s).powi(2);
    let (ra, rb) = model.ricci_eigen(s);
    let (la, lb) = model.lie_half_eigen(s);
    let analytic = split_tensor(Some(&th), n, ra + la, phi2 * (rb + lb));
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            err = err.max((numeric[i][j] - analytic[i][j]).abs());
        }
    }
    if model.has_potential() {
        let lfun = |p: &[f64]| model.potential_at(model.dist_to_origin(p)).unwrap_or(0.0);
        let l0 = lfun(y);
        let grad: Vec<f64> =
            (0..n).map(|k| (lfun(&shift(y, k, h)) - lfun(&shift(y, k, -h))) / (2.0 * h)).collect();
        for i in 0..n {
            for j in 0..n {
                let d2 = if i == j {
                    (lfun(&shift(y, i, h)) - 2.0 * l0 + lfun(&shift(y, i, -h))) / (h * h)
                } else {
                    let pp = shift(&shift(y, i, h), j, h);
                    let pm = shift(&shift(y, i, h), j, -h);
                    let mp = shift(&shift(y, i, -h), j, h);
                    let mm = shift(&shift(y, i, -h), j, -h);
                    (lfun(&pp) - lfun(&pm) - lfun(&mp) + lfun(&mm)) / (4.0 * h * h)
                };
                let hess = d2 - (0..n).map(|k| gam[k][i][j] * grad[k]).sum::<f64>();
                let exact = split_tensor(Some(&th), n, la, phi2 * lb)[i][j];
                err = err.max((hess - exact).abs());
            }
        }
    }
    Ok(err)
}

/// Discrepancies at `h` and `h/2` and the empirical order `log2(e(h)/e(h/2))`.
///
/// Returns `None` for the order when both errors are below [`FD_NOISE_FLOOR`].
pub fn convergence_order(model: &Model, y: &[f64], h: f64) -> Result<(f64, f64, Option<f64>)> {
    let e1 = finite_difference_check(model, y, h)?;
    let e2 = finite_difference_check(model, y, h / 2.0)?;
    let order = (e1.max(e2) > FD_NOISE_FLOOR).then(|| (e1 / e2).log2());
    Ok((e1, e2, order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, catalog_entry, ModelKind, ModelSpec, Warp};

    fn model(name: &str) -> Model {
        build_model(&catalog_entry(name).unwrap()).unwrap()
    }

    #[test]
    fn euclidean_zero() {
        let t = modified_ricci(&model("euclidean"), &[0.3, 0.1, -0.2]).unwrap();
        assert!(t.components.iter().flatten().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn gaussian_identity() {
        let t = modified_ricci(&model("gaussian_soliton"), &[0.7, -0.4]).unwrap();
        let ev = t.eigenvalues();
        assert!(ev.iter().all(|e| (e - 1.0).abs() < 1e-12));
    }

    #[test]
    fn hyperbolic_minus_two() {
        let t = modified_ricci(&model("hyperbolic"), &[0.2, 0.5, 0.1]).unwrap();
        assert!(t.eigenvalues().iter().all(|e| (e + 2.0).abs() < 1e-12));
    }

    #[test]
    fn lower_bound_examples() {
        let pts = vec![vec![0.3, 0.2, 0.1], vec![0.9, 0.0, 0.0]];
        let c = verify_lower_bound(&model("sphere"), &pts).unwrap();
        assert!(c.pass && (c.min_margin - 2.0).abs() < 1e-12);
        let h = model("hyperbolic");
        let c = verify_lower_bound(&h, &pts).unwrap();
        assert!(c.pass && c.min_margin.abs() < 1e-12);
        let mut spec = h.spec().clone();
        spec.lambda = 1.0;
        let c = verify_lower_bound(&build_model(&spec).unwrap(), &pts).unwrap();
        assert!(!c.pass && (c.min_margin + 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_guard() {
        let e = finite_difference_check(&model("euclidean"), &[0.5, 0.1, 0.0], 1e-7).unwrap_err();
        assert!(matches!(e, Error::StepTooSmall { .. }));
    }

    #[test]
    fn warped_sinh_matches_hyperbolic() {
        let spec = ModelSpec::new(ModelKind::WarpedCustom { warp: Warp::Sinh { c: 1.0 } }, 3);
        let m = build_model(&spec).unwrap();
        let t = ricci(&m, &[0.4, 0.3, 0.0]);
        assert!(t.eigenvalues().iter().all(|e| (e + 2.0).abs() < 1e-12));
        let err = finite_difference_check(&m, &[0.4, 0.3, 0.0], 1e-3).unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn lie_paths_agree() {
        for name in ["gaussian_soliton", "cigar_soliton", "singular_field", "hyperbolic"] {
            let m = model(name);
            let y: Vec<f64> = (0..m.n()).map(|i| 0.3 + 0.1 * i as f64).collect();
            let a = lie_half(&m, &y).unwrap();
            let b = lie_half_coordinate_path(&m, &y).unwrap();
            for i in 0..m.n() {
                for j in 0..m.n() {
                    assert!((a.components[i][j] - b.components[i][j]).abs() < 1e-10, "{name}");
                }
            }
        }
    }
}
