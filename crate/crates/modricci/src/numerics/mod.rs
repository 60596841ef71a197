//! Numerical building blocks: quadrature, ODE integration, eigenvalues,
//! root finding and summary statistics.

pub mod eigen;
pub mod ode;
pub mod quad;

use crate::error::{Error, Result};

/// Bisection on a sign change of `f` in `[a, b]` to absolute tolerance `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::SolverFailure(format!("no sign change on [{a}, {b}]")));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Kahan-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Mean and 95% normal-approximation half-width of a sample.
pub fn mean_ci95(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::INFINITY);
    }
    let mut s = KahanSum::default();
    xs.iter().for_each(|&x| s.add(x));
    let mean = s.value() / n;
    let mut v = KahanSum::default();
    xs.iter().for_each(|&x| v.add((x - mean) * (x - mean)));
    let var = if xs.len() > 1 { v.value() / (n - 1.0) } else { 0.0 };
    (mean, 1.959_963_984_540_054 * (var / n).sqrt())
}

/// Surface area of the unit sphere `S^{n-1}` in `R^n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2), via the recursion |S^{n+1}| = 2 pi / n |S^{n-1}|.
    let mut a = if n % 2 == 0 { 2.0 * std::f64::consts::PI } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 1 };
    while k < n {
        a *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    a
}

/// Volume of the Euclidean unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    unit_sphere_area(n) / n as f64
}

/// Inverse of a small nonsingular matrix by Gauss-Jordan elimination.
pub fn invert(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap_or(c);
        if m[p][c].abs() < 1e-300 {
            return Err(Error::SolverFailure("singular matrix".into()));
        }
        m.swap(c, p);
        let piv = m[c][c];
        m[c].iter_mut().for_each(|x| *x /= piv);
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    let pivot_row = m[c].clone();
                    m[r].iter_mut().zip(&pivot_row).for_each(|(x, y)| *x -= f * y);
                }
            }
        }
    }
    Ok(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn ci_of_constant_sample_is_zero() {
        let (m, h) = mean_ci95(&[3.0; 10]);
        assert_eq!(m, 3.0);
        assert_eq!(h, 0.0);
    }
}
