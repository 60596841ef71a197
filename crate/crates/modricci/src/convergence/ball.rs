//! Product quadrature on geodesic balls and annuli in polar coordinates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{random_unit, SpaceForm};
use crate::models::Model;
use crate::numerics::quad::gauss_legendre_nodes;
use crate::numerics::unit_sphere_area;

/// Unit directions in `R^n` with weights summing to `|S^{n-1}|`. Circles use
/// the midpoint rule, `S^2` Gauss-Legendre in height times a uniform azimuth,
/// and higher spheres a fixed random sample.
pub(crate) fn direction_rule(n: usize, m: usize) -> Vec<(Vec<f64>, f64)> {
    use std::f64::consts::PI;
    match n {
        2 => (0..m)
            .map(|k| {
                let a = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                (vec![a.cos(), a.sin()], 2.0 * PI / m as f64)
            })
            .collect(),
        3 => {
            let heights = gauss_legendre_nodes(-1.0, 1.0, m.div_ceil(16).max(1));
            let az = 2 * heights.len();
            let mut out = Vec::with_capacity(heights.len() * az);
            for &(z, wz) in &heights {
                let rho = (1.0 - z * z).max(0.0).sqrt();
                for k in 0..az {
                    let a = 2.0 * PI * (k as f64 + 0.5) / az as f64;
                    out.push((vec![rho * a.cos(), rho * a.sin(), z], wz * 2.0 * PI / az as f64));
                }
            }
            out
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let w = unit_sphere_area(n) / m as f64;
            (0..m).map(|_| (random_unit(n, &mut rng), w)).collect()
        }
    }
}

/// A quadrature node: distance from the center, unit direction, weight.
#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub s: f64,
    pub u: Vec<f64>,
    pub w: f64,
}

/// Nodes for the annulus `inner <= s <= outer` around a point of a
/// homogeneous model, weighted by the Riemannian volume element.
pub(crate) fn annulus_rule(model: &Model, inner: f64, outer: f64, panels: usize, m: usize) -> Vec<Node> {
    let dirs = direction_rule(model.n(), m);
    let mut out = Vec::new();
    for (s, ws) in gauss_legendre_nodes(inner, outer, panels) {
        let jac = model.volume_element(s);
        for (u, wu) in &dirs {
            out.push(Node { s, u: u.clone(), w: ws * wu * jac });
        }
    }
    out
}

/// Embedded location of a node relative to the center `c` with frame `basis`.
pub(crate) fn place(sf: &SpaceForm, c: &[f64], basis: &[Vec<f64>], node: &Node) -> Vec<f64> {
    let v: Vec<f64> = node.u.iter().map(|x| x * node.s).collect();
    sf.from_normal_coords(c, basis, &v)
}
