//! Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};

/// Default relative tolerance for ray integration.
pub const RTOL: f64 = 1e-10;

/// Step-control settings.
#[derive(Debug, Clone, Copy)]
pub struct Rk5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Rk5 {
    fn default() -> Self {
        Rk5 { rtol: RTOL, atol: 1e-13, max_steps: 200_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl Rk5 {
    /// Integrates `y' = f(t, y)` from `t0` to each time in `outputs`
    /// (increasing, all `>= t0`) and returns the states there.
    pub fn solve<const N: usize, F>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; N],
        outputs: &[f64],
    ) -> Result<Vec<[f64; N]>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut res = Vec::with_capacity(outputs.len());
        let mut t = t0;
        let mut y = y0;
        let span = outputs.last().map_or(0.0, |&e| e - t0).abs().max(1e-12);
        let mut h = span * 1e-3;
        let mut steps = 0usize;
        let mut k1 = f(t, &y);
        for &target in outputs {
            if target < t {
                return Err(Error::IntegrationFailure("output times must increase".into()));
            }
            while t < target {
                steps += 1;
                if steps > self.max_steps {
                    return Err(Error::IntegrationFailure(format!(
                        "step budget exhausted at t = {t}"
                    )));
                }
                let last = t + h >= target;
                let hh = if last { target - t } else { h };
                let k2 = f(t + C2 * hh, &axpy(&y, &[(A21, &k1)], hh));
                let k3 = f(t + C3 * hh, &axpy(&y, &[(A31, &k1), (A32, &k2)], hh));
                let k4 = f(t + C4 * hh, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hh));
                let k5 = f(
                    t + C5 * hh,
                    &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hh),
                );
                let k6 = f(
                    t + hh,
                    &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], hh),
                );
                let y_new =
                    axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], hh);
                let k7 = f(t + hh, &y_new);
                let mut err = 0.0f64;
                for i in 0..N {
                    let e = hh
                        * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                            + E7 * k7[i]);
                    let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                    err = err.max((e / sc).abs());
                }
                if !err.is_finite() {
                    return Err(Error::IntegrationFailure(format!("non-finite state at t = {t}")));
                }
                if err <= 1.0 {
                    t = if last { target } else { t + hh };
                    y = y_new;
                    k1 = k7;
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || err > 1.0 {
                    h = hh * factor;
                }
                if h < 1e-14 * span {
                    return Err(Error::IntegrationFailure(format!("step size underflow at t = {t}")));
                }
            }
            res.push(y);
        }
        Ok(res)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let ts: Vec<f64> = (1..=10).map(|k| k as f64 * 0.5).collect();
        let ys = Rk5::default()
            .solve(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], &ts)
            .unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] - t.sin()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn exponential_growth_relative() {
        let ys = Rk5::default().solve(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], &[10.0]).unwrap();
        assert!((ys[0][0] / 10f64.exp() - 1.0).abs() < 1e-8);
    }
}
