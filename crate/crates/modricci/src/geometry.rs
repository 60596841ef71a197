//! Simply connected space forms in embedded coordinates.
//!
//! Flat space is `R^n`. Curvature `k > 0` uses the round sphere of radius
//! `1/sqrt(k)` in `R^{n+1}`, and `k < 0` the hyperboloid `<p,p>_L = 1/k` with
//! the Minkowski product `-a_0 b_0 + sum a_i b_i`. The base point `O` is the
//! origin (flat) or `(R, 0, ..., 0)`.

use rand::Rng;

use crate::error::{Error, Result};

pub type Point = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceForm {
    pub n: usize,
    pub kappa: f64,
}

impl SpaceForm {
    pub fn new(n: usize, kappa: f64) -> Self {
        SpaceForm { n, kappa }
    }

    fn radius(&self) -> f64 {
        1.0 / self.kappa.abs().sqrt()
    }

    fn flat(&self) -> bool {
        self.kappa == 0.0
    }

    pub fn embed_dim(&self) -> usize {
        if self.flat() {
            self.n
        } else {
            self.n + 1
        }
    }

    /// Ambient inner product (Minkowski on the hyperboloid).
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let e: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        if self.kappa < 0.0 {
            e - 2.0 * a[0] * b[0]
        } else {
            e
        }
    }

    pub fn origin(&self) -> Point {
        let mut p = vec![0.0; self.embed_dim()];
        if !self.flat() {
            p[0] = self.radius();
        }
        p
    }

    /// The point at distance `s` from `O` in the unit direction `theta in R^n`.
    pub fn from_polar(&self, s: f64, theta: &[f64]) -> Point {
        let o = self.origin();
        let mut u = vec![0.0; self.embed_dim()];
        let off = self.embed_dim() - self.n;
        u[off..].copy_from_slice(theta);
        self.exp(&o, &u, s).0
    }

    /// Distance from `O` and the unit direction at `O` (zero vector at `O`).
    pub fn to_polar(&self, p: &[f64]) -> (f64, Vec<f64>) {
        let o = self.origin();
        let s = self.dist(&o, p);
        let off = self.embed_dim() - self.n;
        if s == 0.0 {
            return (0.0, vec![0.0; self.n]);
        }
        let u = self.log_dir(&o, p);
        (s, u[off..].to_vec())
    }

    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        if self.flat() {
            return a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        }
        let r = self.radius();
        if self.kappa > 0.0 {
            // the chord form stays accurate at small separations
            let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            2.0 * r * (0.5 * diff / r).min(1.0).asin()
        } else {
            // <a-b, a-b>_L = 2 r^2 (cosh(d/r) - 1) = 4 r^2 sinh^2(d/2r)
            let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            let q = self.inner(&diff, &diff).max(0.0);
            2.0 * r * (0.5 * q.sqrt() / r).asinh()
        }
    }

    /// Geodesic from `p` with unit initial velocity `u`, evaluated at arclength `s`.
    /// Returns the point and its velocity.
    pub fn exp(&self, p: &[f64], u: &[f64], s: f64) -> (Point, Vec<f64>) {
        if self.flat() {
            let q = p.iter().zip(u).map(|(a, b)| a + s * b).collect();
            return (q, u.to_vec());
        }
        let r = self.radius();
        let t = s / r;
        let (c, sn, sign) = if self.kappa > 0.0 {
            (t.cos(), t.sin(), -1.0)
        } else {
            (t.cosh(), t.sinh(), 1.0)
        };
        let q = p.iter().zip(u).map(|(a, b)| c * a + r * sn * b).collect();
        let v = p.iter().zip(u).map(|(a, b)| sign * sn / r * a + c * b).collect();
        (q, v)
    }

    /// Unit tangent at `p` pointing toward `q` along the minimal geodesic.
    pub fn log_dir(&self, p: &[f64], q: &[f64]) -> Vec<f64> {
        let mut v: Vec<f64> = if self.flat() {
            q.iter().zip(p).map(|(a, b)| a - b).collect()
        } else {
            let r2 = 1.0 / self.kappa.abs();
            let pq = self.inner(p, q);
            let sign = if self.kappa > 0.0 { -1.0 } else { 1.0 };
            q.iter().zip(p).map(|(a, b)| a + sign * pq / r2 * b).collect()
        };
        let norm = self.inner(&v, &v).max(0.0).sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }

    /// Point at fraction `t in [0,1]` along the minimal geodesic from `p` to `q`.
    pub fn geodesic_point(&self, p: &[f64], q: &[f64], t: f64) -> Point {
        let d = self.dist(p, q);
        if d == 0.0 {
            return p.to_vec();
        }
        let u = self.log_dir(p, q);
        self.exp(p, &u, t * d).0
    }

    /// Whether the minimal geodesic from `p` to `q` is unique.
    pub fn check_unique(&self, p: &[f64], q: &[f64]) -> Result<()> {
        if self.kappa > 0.0 {
            let d = self.dist(p, q);
            if d > std::f64::consts::PI * self.radius() * (1.0 - 1e-9) {
                return Err(Error::GeodesicAmbiguous);
            }
        }
        Ok(())
    }

    /// Orthonormal basis of the tangent space at `p`.
    pub fn tangent_basis(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let m = self.embed_dim();
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(self.n);
        let normal: Option<Vec<f64>> = if self.flat() {
            None
        } else {
            let r = self.radius();
            Some(p.iter().map(|x| x / r).collect())
        };
        for k in 0..m {
            if basis.len() == self.n {
                break;
            }
            let mut v = vec![0.0; m];
            v[k] = 1.0;
            if let Some(nv) = &normal {
                // remove the normal component; nv has <nv,nv> = +-1
                let nn = self.inner(nv, nv);
                let c = self.inner(&v, nv) / nn;
                v.iter_mut().zip(nv).for_each(|(a, b)| *a -= c * b);
            }
            for b in &basis {
                let c = self.inner(&v, b);
                v.iter_mut().zip(b).for_each(|(a, bb)| *a -= c * bb);
            }
            let norm2 = self.inner(&v, &v);
            if norm2 > 1e-8 {
                let nrm = norm2.sqrt();
                v.iter_mut().for_each(|a| *a /= nrm);
                basis.push(v);
            }
        }
        basis
    }

    /// Normal coordinates of `q` around `p` in the frame `basis`.
    pub fn normal_coords(&self, p: &[f64], basis: &[Vec<f64>], q: &[f64]) -> Vec<f64> {
        let d = self.dist(p, q);
        if d == 0.0 {
            return vec![0.0; self.n];
        }
        let u = self.log_dir(p, q);
        basis.iter().map(|b| d * self.inner(&u, b)).collect()
    }

    /// Inverse of [`SpaceForm::normal_coords`].
    pub fn from_normal_coords(&self, p: &[f64], basis: &[Vec<f64>], c: &[f64]) -> Point {
        let s = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if s == 0.0 {
            return p.to_vec();
        }
        let mut u = vec![0.0; self.embed_dim()];
        for (ci, b) in c.iter().zip(basis) {
            u.iter_mut().zip(b).for_each(|(a, bb)| *a += ci / s * bb);
        }
        self.exp(p, &u, s).0
    }

    /// Uniform random unit tangent vector at `p`.
    pub fn random_direction<R: Rng>(&self, p: &[f64], rng: &mut R) -> Vec<f64> {
        let basis = self.tangent_basis(p);
        let c = random_unit(self.n, rng);
        let mut u = vec![0.0; self.embed_dim()];
        for (ci, b) in c.iter().zip(&basis) {
            u.iter_mut().zip(b).for_each(|(a, bb)| *a += ci * bb);
        }
        u
    }
}

/// Uniform random point on `S^{n-1}` in `R^n`.
pub fn random_unit<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-12 && r2 <= 1.0 {
            let r = r2.sqrt();
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}
