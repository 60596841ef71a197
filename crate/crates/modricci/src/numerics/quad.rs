//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Default absolute tolerance for one-dimensional integrals.
pub const ATOL: f64 = 1e-9;

const MAX_DEPTH: u32 = 40;

/// Integrates `f` over `[a, b]` to absolute tolerance `atol`.
///
/// ```
/// use modricci::numerics::quad::simpson;
/// let v = simpson(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-10).unwrap();
/// assert!((v - 2.0).abs() < 1e-10);
/// ```
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, atol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::IntegrationFailure(format!("non-finite bounds [{a}, {b}]")));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    // Split into a few panels first so narrow features are not skipped.
    const PANELS: usize = 8;
    let h = (hi - lo) / PANELS as f64;
    let mut total = 0.0;
    for k in 0..PANELS {
        let x0 = lo + k as f64 * h;
        let x1 = if k + 1 == PANELS { hi } else { x0 + h };
        let fa = f(x0);
        let fb = f(x1);
        let m = 0.5 * (x0 + x1);
        let fm = f(m);
        let whole = (x1 - x0) / 6.0 * (fa + 4.0 * fm + fb);
        total += recurse(&f, x0, x1, fa, fm, fb, whole, atol / PANELS as f64, MAX_DEPTH);
    }
    if !total.is_finite() {
        return Err(Error::IntegrationFailure(format!(
            "non-finite integral on [{lo}, {hi}]"
        )));
    }
    Ok(sign * total)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // below round-off of the panel value further halving only chases noise
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) || !delta.is_finite() {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrates `f` over `[a, b]` where `f(s)` may behave like `(s - a)^beta`
/// near `a`, with `beta > -1`.
///
/// The substitution `s = a + (b - a) u^m` with `m(beta + 1) >= 2` removes the
/// endpoint singularity before handing over to [`simpson`].
pub fn simpson_power_left<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    beta: f64,
    atol: f64,
) -> Result<f64> {
    if beta <= -1.0 {
        return Err(Error::IntegrationFailure(format!(
            "endpoint exponent {beta} is not integrable"
        )));
    }
    let m = (2.0 / (beta + 1.0)).max(1.0).ceil();
    let len = b - a;
    simpson(
        |u| {
            if u <= 0.0 {
                return 0.0;
            }
            let s = a + len * u.powf(m);
            f(s) * len * m * u.powf(m - 1.0)
        },
        0.0,
        1.0,
        atol,
    )
}

const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Nodes and weights of the composite 8-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let half = 0.5 * h;
    let mut out = Vec::with_capacity(8 * panels);
    for k in 0..panels {
        let c = a + (k as f64 + 0.5) * h;
        for i in 0..4 {
            out.push((c - half * GL_X[i], half * GL_W[i]));
            out.push((c + half * GL_X[i], half * GL_W[i]));
        }
    }
    out
}

/// Composite Gauss-Legendre rule with `panels` panels of 8 nodes each.
///
/// Used inside nested integrals where an adaptive inner rule would be too
/// slow; the integrands there are smooth after substitution.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let half = 0.5 * h;
    let mut total = 0.0;
    for k in 0..panels {
        let c = a + (k as f64 + 0.5) * h;
        let mut s = 0.0;
        for i in 0..4 {
            s += GL_W[i] * (f(c - half * GL_X[i]) + f(c + half * GL_X[i]));
        }
        total += half * s;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = simpson(|x| x * x * x - 2.0 * x, -1.0, 3.0, 1e-12).unwrap();
        assert!((v - (81.0 / 4.0 - 9.0 - (0.25 - 1.0))).abs() < 1e-10);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let v = simpson(|x| x.exp(), 1.0, 0.0, 1e-12).unwrap();
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn singular_left_endpoint() {
        // int_0^1 s^{-1/2} ds = 2
        let v = simpson_power_left(|s| s.powf(-0.5), 0.0, 1.0, -0.5, 1e-11).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
        // int_0^1 s^{-0.9} ds = 10
        let v = simpson_power_left(|s| s.powf(-0.9), 0.0, 1.0, -0.9, 1e-11).unwrap();
        assert!((v - 10.0).abs() < 1e-7, "{v}");
    }

    #[test]
    fn gauss_legendre_degree() {
        let v = gauss_legendre(|x| x.powi(15), 0.0, 1.0, 1);
        assert!((v - 1.0 / 16.0).abs() < 1e-14);
        let v = gauss_legendre(|x| x.cos(), 0.0, 2.0, 4);
        assert!((v - 2f64.sin()).abs() < 1e-13);
    }
}
