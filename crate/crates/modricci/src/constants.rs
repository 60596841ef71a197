//! Explicit constants used by the certificates.
//!
//! Each constant that the underlying estimates leave implicit is given a
//! concrete value here, with a one-line derivation, so reports are
//! reproducible.

use serde::{Deserialize, Serialize};

use crate::numerics::{bisect, unit_sphere_area};

/// Covering radius factor of the cut-off construction (must be < 0.1).
pub const CUTOFF_EPS: f64 = 0.05;
/// Plateau radius factor of the cut-off.
pub const CUTOFF_PLATEAU: f64 = 1.1;
/// Support radius factor of the cut-off.
pub const CUTOFF_SUPPORT: f64 = 1.9;
/// Probe scale replacing `lambda^{-1}` when `lambda = 0`.
pub const FLAT_PROBE_SCALE: f64 = 10.0;
/// Constant `c` in the endpoint condition `d(x, q) <= c lambda^{-1/2}`.
pub const EXCESS_DISTANCE_FACTOR: f64 = 1.0;
/// Mass-leak tolerance of the heat solver.
pub const TOL_MASS: f64 = 1e-3;
/// Seed time of the heat solver.
pub const HEAT_T0: f64 = 1e-4;

/// How `C(alpha)` in the Laplacian and volume comparisons is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "policy", content = "value")]
pub enum CAlphaPolicy {
    /// `C(alpha) = 4/(1 - alpha)`.
    #[default]
    Default,
    Fixed(f64),
}

impl CAlphaPolicy {
    pub fn value(&self, alpha: f64) -> f64 {
        match *self {
            CAlphaPolicy::Default => c_alpha(alpha),
            CAlphaPolicy::Fixed(c) => c,
        }
    }
}

/// `C(alpha) = 4/(1 - alpha)`: each branch of the radial correction is at most
/// `2/(1 - alpha) s^{-alpha}`, doubled for the branch crossing `d(x, O)`.
pub fn c_alpha(alpha: f64) -> f64 {
    4.0 / (1.0 - alpha)
}

/// Exponent `C(alpha) K s^{1-alpha} + lambda s^2` of the volume-element bounds.
pub fn volume_exponent(c: f64, k: f64, alpha: f64, lambda: f64, s: f64) -> f64 {
    c * k * s.powf(1.0 - alpha) + lambda * s * s
}

/// `C(n, gamma) = 2^gamma n/(n - gamma) |S^{n-1}|`, from summing dyadic shells
/// `B(r 2^{-k}) \ B(r 2^{-k-1})` against the ball-volume bound.
pub fn distance_power_constant(n: usize, gamma: f64) -> f64 {
    let nf = n as f64;
    2f64.powf(gamma) * nf / (nf - gamma) * unit_sphere_area(n)
}

/// Lower bound `vol B(x, r) >= rho e^{-(C(alpha) K + lambda)} r^n`, `r <= 1`,
/// from the volume-element ratio between `r` and `1`.
pub fn noncollapsed_lower_factor(rho: f64, c: f64, k: f64, lambda: f64) -> f64 {
    rho * (-(c * k + lambda)).exp()
}

/// Scaled `L^q` constant: `r^alpha ||V||*_{q,B(x,r)} <= C_L K` for `r <= 1`.
///
/// Far case `d(x,O) > 2r` gives 1. Near case: `B(x,r) in B(O,3r)`, bound the
/// integral of `d^{-alpha q}` by [`distance_power_constant`] and divide by the
/// noncollapsed lower volume bound.
pub fn lq_constant(n: usize, lambda: f64, k: f64, alpha: f64, rho: f64, q: f64) -> f64 {
    let c = c_alpha(alpha);
    let g = alpha * q;
    let nf = n as f64;
    let near = distance_power_constant(n, g)
        * 3f64.powf(nf - g)
        * (volume_exponent(c, k, alpha, lambda, 3.0) + c * k + lambda).exp()
        / rho;
    near.powf(1.0 / q).max(1.0)
}

/// Constant of the volume-ratio bound
/// `Q(r2) <= e^{C [lambda (r2^2 - r1^2) + K (r2 - r1)^{1-alpha}]} Q(r1)`.
///
/// `Q' <= [lambda r/3 + (C(alpha) + C_L) K r^{-alpha}] Q` integrates to
/// `lambda (r2^2 - r1^2)/6 + (C(alpha) + C_L)/(1 - alpha) K (r2^{1-alpha} - r1^{1-alpha})`,
/// and `r2^{1-alpha} - r1^{1-alpha} <= (r2 - r1)^{1-alpha}`. With `K = 0` this is `1/6`;
/// with `alpha = 0` the bounded-field ratio gives `2`.
pub fn volume_ratio_constant(n: usize, lambda: f64, k: f64, alpha: f64, rho: f64) -> f64 {
    if k == 0.0 {
        // the field term vanishes; only the lambda r/3 part remains
        return 1.0 / 6.0;
    }
    if alpha == 0.0 {
        // bounded field: e^{lambda (r2^2 - r1^2) + 2K (r2 - r1)} without the L^q step
        return 2.0;
    }
    let cl = lq_constant(n, lambda, k, alpha, rho, 1.0);
    ((c_alpha(alpha) + cl) / (1.0 - alpha)).max(1.0 / 6.0)
}

/// Largest `delta` with `((1 - 3 delta)/(1 + delta))^n >= 3/4`, to 1e-12.
pub fn half_volume_delta(n: usize) -> f64 {
    let g = |d: f64| ((1.0 - 3.0 * d) / (1.0 + d)).powi(n as i32) - 0.75;
    bisect(g, 0.0, 1.0 / 3.0, 1e-14).expect("sign change on [0, 1/3]")
}

/// Radius threshold `r0 < = 1` with `e^{C (lambda r0^2 + K r0^{1-alpha})} <= 3/2`.
pub fn half_volume_r0(n: usize, lambda: f64, k: f64, alpha: f64, rho: f64) -> f64 {
    let c = volume_ratio_constant(n, lambda, k, alpha, rho);
    let h = |r: f64| c * (lambda * r * r + k * r.powf(1.0 - alpha)) - 1.5f64.ln();
    if h(1.0) <= 0.0 {
        return 1.0;
    }
    bisect(h, 0.0, 1.0, 1e-14).unwrap_or(0.0)
}

/// Worst-case isoperimetric/Sobolev constant `10^{2n+5} (3/(4 delta^n))^{1/n}`
/// times `(r^n / vol B)^{1/n}` folded in by the caller.
pub fn isoperimetric_slack(n: usize) -> f64 {
    let d = half_volume_delta(n);
    let nf = n as f64;
    10f64.powi(2 * n as i32 + 5) * (3.0 / (4.0 * d.powi(n as i32))).powf(1.0 / nf)
}

/// Segment-inequality constant `3^n 2 e^{C(alpha) K (2r)^{1-alpha} + lambda (2r)^2}`.
pub fn segment_constant(n: usize, lambda: f64, k: f64, alpha: f64, r: f64) -> f64 {
    3f64.powi(n as i32) * 2.0 * volume_exponent(c_alpha(alpha), k, alpha, lambda, 2.0 * r).exp()
}

/// Exponent ladder of the Moser iteration: `mu = n/(n-2)`, `p_i = mu^i / 2`.
pub fn moser_ladder(n: usize, steps: usize) -> Vec<f64> {
    assert!(n >= 3, "the ladder needs n >= 3");
    let mu = n as f64 / (n as f64 - 2.0);
    (0..steps).map(|i| mu.powi(i as i32) / 2.0).collect()
}

/// Constant of the Moser iteration bounding `sup u^2` by an `L^2` average.
///
/// Step `i` of the ladder costs `(16 C_S mu^{2i})^{mu^{-i}}`; the product is
/// `(16 C_S)^{mu/(mu-1)} mu^{2 mu/(mu-1)^2}` with `C_S` the `L^2` Sobolev
/// constant `(2(n-1)/(n-2) C_iso)^2`. For `n = 2` the ladder uses `mu = 2` and
/// `C_S = (2 C_iso)^2`.
pub fn moser_constant(n: usize) -> f64 {
    let nf = n as f64;
    let iso = isoperimetric_slack(n);
    let (mu, cs) = if n >= 3 {
        (nf / (nf - 2.0), (2.0 * (nf - 1.0) / (nf - 2.0) * iso).powi(2))
    } else {
        (2.0, (2.0 * iso).powi(2))
    };
    (16.0 * cs).powf(mu / (mu - 1.0)) * mu.powf(2.0 * mu / ((mu - 1.0) * (mu - 1.0)))
}

/// One row of the constant table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEntry {
    pub name: String,
    pub value: f64,
    pub derivation: String,
}

/// The full constant chain for one parameter set.
pub fn constant_table(n: usize, lambda: f64, k: f64, alpha: f64, rho: f64) -> Vec<ConstantEntry> {
    let e = |name: &str, value: f64, derivation: &str| ConstantEntry {
        name: name.into(),
        value,
        derivation: derivation.into(),
    };
    vec![
        e("C_alpha", c_alpha(alpha), "4/(1-alpha)"),
        e("C_L_q1", lq_constant(n, lambda, k, alpha, rho, 1.0), "near/far split of B(x,r), q=1"),
        e(
            "C_volume_ratio",
            volume_ratio_constant(n, lambda, k, alpha, rho),
            "max(1/6, (C_alpha + C_L)/(1-alpha)); 1/6 if K = 0; 2 if alpha = 0",
        ),
        e("delta_n", half_volume_delta(n), "root of ((1-3d)/(1+d))^n = 3/4"),
        e("r0", half_volume_r0(n, lambda, k, alpha, rho), "exp(C (lambda r0^2 + K r0^(1-alpha))) = 3/2"),
        e("isoperimetric_slack", isoperimetric_slack(n), "10^(2n+5) (3/(4 delta^n))^(1/n)"),
        e("cutoff_eps", CUTOFF_EPS, "covering radius factor, below 0.1"),
        e("moser", moser_constant(n), "(16 C_S)^(mu/(mu-1)) mu^(2 mu/(mu-1)^2)"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_solves_defining_equation() {
        for n in 2..=6 {
            let d = half_volume_delta(n);
            let v = ((1.0 - 3.0 * d) / (1.0 + d)).powi(n as i32);
            assert!((v - 0.75).abs() < 1e-12, "n={n}");
            assert!(d > 0.0 && d < 1.0 / 3.0);
        }
    }

    #[test]
    fn r0_is_one_without_curvature_or_field() {
        assert_eq!(half_volume_r0(3, 0.0, 0.0, 0.0, 1.0), 1.0);
        let r0 = half_volume_r0(3, 4.0, 0.0, 0.0, 1.0);
        assert!((r0 - (1.5f64.ln() * 6.0 / 4.0).sqrt()).abs() < 1e-12);
        let r0 = half_volume_r0(3, 1.0, 0.1, 0.5, 1.0);
        let c = volume_ratio_constant(3, 1.0, 0.1, 0.5, 1.0);
        let e = c * (r0 * r0 + 0.1 * r0.sqrt());
        assert!((e - 1.5f64.ln()).abs() < 1e-8 * c);
    }

    #[test]
    fn moser_ladder_n3() {
        let l = moser_ladder(3, 4);
        assert_eq!(l, vec![0.5, 1.5, 4.5, 13.5]);
    }

    #[test]
    fn distance_constant_dominates_flat_value() {
        // flat: int_{B(O,r)} d^{-gamma} = |S^{n-1}| r^{n-gamma}/(n-gamma)
        for n in 2..=5 {
            for g in [0.0, 0.5, 1.0, 1.9] {
                let exact = unit_sphere_area(n) / (n as f64 - g);
                assert!(distance_power_constant(n, g) >= exact);
            }
        }
    }
}
