use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Warping function `f` of a rotationally symmetric metric `ds^2 + f(s)^2 g_{S^{n-1}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "warp", rename_all = "snake_case")]
pub enum Warp {
    /// `f(s) = s`.
    Linear,
    /// `f(s) = sin(sqrt(k) s)/sqrt(k)`, constant curvature `k > 0`.
    Sin { k: f64 },
    /// `f(s) = sinh(sqrt(c) s)/sqrt(c)`, constant curvature `-c < 0`.
    Sinh { c: f64 },
    /// `f(s) = a tanh(s/a)`.
    Tanh { a: f64 },
    /// `f(s) = sum_k coeffs[k] s^k`.
    Poly { coeffs: Vec<f64> },
}

impl Warp {
    /// `(f, f', f'')` at `s`.
    pub fn eval(&self, s: f64) -> [f64; 3] {
        match self {
            Warp::Linear => [s, 1.0, 0.0],
            Warp::Sin { k } => {
                let q = k.sqrt();
                let (sn, cs) = (q * s).sin_cos();
                [sn / q, cs, -q * sn]
            }
            Warp::Sinh { c } => {
                let q = c.sqrt();
                let (sh, ch) = ((q * s).sinh(), (q * s).cosh());
                [sh / q, ch, q * sh]
            }
            Warp::Tanh { a } => {
                let t = (s / a).tanh();
                let sech2 = 1.0 - t * t;
                [a * t, sech2, -2.0 * sech2 * t / a]
            }
            Warp::Poly { coeffs } => {
                let f = coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c);
                let mut d1 = 0.0;
                let mut d2 = 0.0;
                for (k, &c) in coeffs.iter().enumerate() {
                    let kf = k as f64;
                    if k >= 1 {
                        d1 += kf * c * s.powi(k as i32 - 1);
                    }
                    if k >= 2 {
                        d2 += kf * (kf - 1.0) * c * s.powi(k as i32 - 2);
                    }
                }
                [f, d1, d2]
            }
        }
    }

    /// Radial sectional curvature `-f''/f`.
    pub fn radial_curvature(&self, s: f64) -> f64 {
        match self {
            Warp::Linear => 0.0,
            Warp::Sin { k } => *k,
            Warp::Sinh { c } => -c,
            Warp::Tanh { a } => {
                let ch = (s / a).cosh();
                2.0 / (a * a * ch * ch)
            }
            Warp::Poly { coeffs } => {
                if s == 0.0 {
                    // f ~ s, f'' ~ 6 c3 s
                    return -6.0 * coeffs.get(3).copied().unwrap_or(0.0);
                }
                let [f, _, d2] = self.eval(s);
                -d2 / f
            }
        }
    }

    /// Tangential sectional curvature `(1 - f'^2)/f^2`.
    pub fn tangential_curvature(&self, s: f64) -> f64 {
        match self {
            Warp::Linear => 0.0,
            Warp::Sin { k } => *k,
            Warp::Sinh { c } => -c,
            Warp::Tanh { a } => {
                let ch = (s / a).cosh();
                (1.0 + 1.0 / (ch * ch)) / (a * a)
            }
            Warp::Poly { coeffs } => {
                if s == 0.0 {
                    return -6.0 * coeffs.get(3).copied().unwrap_or(0.0);
                }
                let [f, d1, _] = self.eval(s);
                (1.0 - d1 * d1) / (f * f)
            }
        }
    }

    /// `f'(s)/f(s) - 1/s`, evaluated without cancellation where possible.
    pub fn log_derivative_excess(&self, s: f64) -> f64 {
        match self {
            Warp::Linear => 0.0,
            _ => {
                let [f, d1, _] = self.eval(s);
                if s < 1e-4 {
                    // f'/f - 1/s = -(K_r/3) s + O(s^3) with K_r the curvature at 0
                    return -self.radial_curvature(0.0) * s / 3.0;
                }
                d1 / f - 1.0 / s
            }
        }
    }

    /// Constant sectional curvature when the warp is a space form.
    pub fn constant_curvature(&self) -> Option<f64> {
        match self {
            Warp::Linear => Some(0.0),
            Warp::Sin { k } => Some(*k),
            Warp::Sinh { c } => Some(-c),
            Warp::Poly { coeffs } if coeffs.iter().skip(2).all(|&c| c == 0.0) => Some(0.0),
            _ => None,
        }
    }

    /// First positive zero of `f`, or `+inf`.
    pub fn cut_radius(&self) -> f64 {
        match self {
            Warp::Linear | Warp::Sinh { .. } | Warp::Tanh { .. } => f64::INFINITY,
            Warp::Sin { k } => std::f64::consts::PI / k.sqrt(),
            Warp::Poly { .. } => {
                let h = 1e-3;
                let mut s = h;
                while s < 100.0 {
                    if self.eval(s)[0] <= 0.0 {
                        return crate::numerics::bisect(|x| self.eval(x)[0], s - h, s, 1e-13)
                            .unwrap_or(s);
                    }
                    s += h;
                }
                f64::INFINITY
            }
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidSpec { field: "warp", reason });
        match self {
            Warp::Sin { k } if !(*k > 0.0 && k.is_finite()) => bad(format!("k = {k} must be > 0")),
            Warp::Sinh { c } if !(*c > 0.0 && c.is_finite()) => bad(format!("c = {c} must be > 0")),
            Warp::Tanh { a } if !(*a > 0.0 && a.is_finite()) => bad(format!("a = {a} must be > 0")),
            Warp::Poly { coeffs } => {
                let c0 = coeffs.first().copied().unwrap_or(0.0);
                let c1 = coeffs.get(1).copied().unwrap_or(0.0);
                if c0 != 0.0 {
                    return bad(format!("f(0) = {c0}, expected 0"));
                }
                if c1 != 1.0 {
                    return bad(format!("f'(0) = {c1}, expected 1"));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return bad("non-finite coefficient".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_derivatives() {
        let w = Warp::Poly { coeffs: vec![0.0, 1.0, 0.0, 0.5, 0.0, 0.1] };
        let s: f64 = 0.7;
        let [f, d1, d2] = w.eval(s);
        assert!((f - (s + 0.5 * s.powi(3) + 0.1 * s.powi(5))).abs() < 1e-15);
        assert!((d1 - (1.0 + 1.5 * s * s + 0.5 * s.powi(4))).abs() < 1e-14);
        assert!((d2 - (3.0 * s + 2.0 * s.powi(3))).abs() < 1e-14);
    }

    #[test]
    fn curvature_closed_forms_match_generic() {
        for w in [Warp::Sin { k: 2.0 }, Warp::Sinh { c: 0.5 }, Warp::Tanh { a: 2.0 }] {
            for s in [0.1, 0.5, 1.0] {
                let [f, d1, d2] = w.eval(s);
                assert!((w.radial_curvature(s) + d2 / f).abs() < 1e-12);
                assert!((w.tangential_curvature(s) - (1.0 - d1 * d1) / (f * f)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn poly_cut_radius() {
        // f = s - s^3 vanishes at s = 1
        let w = Warp::Poly { coeffs: vec![0.0, 1.0, 0.0, -1.0] };
        assert!((w.cut_radius() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn invalid_poly_rejected() {
        assert!(Warp::Poly { coeffs: vec![0.0, 2.0] }.validate().is_err());
        assert!(Warp::Poly { coeffs: vec![0.1, 1.0] }.validate().is_err());
    }
}
