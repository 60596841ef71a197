//! Finite metric spaces, metric cones over them, samples of model balls and
//! Gromov-Hausdorff bounds.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{random_unit, SpaceForm};
use crate::models::Model;

/// Absolute slack of the triangle-inequality check, scaled by `max(1, diam)`.
pub const TRIANGLE_TOL: f64 = 1e-9;
const EXHAUSTIVE_LIMIT: usize = 200;
const SAMPLED_TRIPLES: usize = 2_000_000;
const GH_RESTARTS: usize = 200;
const GH_SWEEPS: usize = 20;
const GH_SEED: u64 = 0x6768;

/// A finite set with a symmetric distance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    pub labels: Vec<String>,
    pub d: Vec<Vec<f64>>,
}

impl FiniteMetricSpace {
    /// Validates symmetry, the zero diagonal, nonnegativity and the triangle
    /// inequality (every triple up to 200 points, a fixed random sample beyond).
    pub fn new(labels: Vec<String>, d: Vec<Vec<f64>>) -> Result<Self> {
        let n = d.len();
        if labels.len() != n || d.iter().any(|r| r.len() != n) {
            return Err(Error::MetricViolation(format!("{} labels for a matrix with {} rows", labels.len(), n)));
        }
        let diam = d.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        let tol = TRIANGLE_TOL * diam.max(1.0);
        for i in 0..n {
            if d[i][i] != 0.0 {
                return Err(Error::MetricViolation(format!("d({i},{i}) = {}", d[i][i])));
            }
            for j in 0..n {
                let x = d[i][j];
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::MetricViolation(format!("d({i},{j}) = {x}")));
                }
                if (x - d[j][i]).abs() > tol {
                    return Err(Error::MetricViolation(format!("d({i},{j}) != d({j},{i})")));
                }
            }
        }
        let check = |i: usize, j: usize, k: usize| -> Result<()> {
            if d[i][k] > d[i][j] + d[j][k] + tol {
                return Err(Error::MetricViolation(format!(
                    "d({i},{k}) = {} > d({i},{j}) + d({j},{k}) = {}",
                    d[i][k],
                    d[i][j] + d[j][k]
                )));
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_LIMIT {
            for i in 0..n {
                for j in 0..n {
                    for k in i + 1..n {
                        check(i, j, k)?;
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            for _ in 0..SAMPLED_TRIPLES {
                check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))?;
            }
        }
        Ok(FiniteMetricSpace { labels, d })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().flatten().fold(0.0f64, |a, &b| a.max(b))
    }

    /// Plain-text form: the point count, then the strict lower triangle row by row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.len());
        for i in 1..self.len() {
            let row: Vec<String> = self.d[i][..i].iter().map(|x| format!("{x:e}")).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    /// Inverse of [`FiniteMetricSpace::to_text`]; labels become `p0, p1, ...`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .enumerate()
            .flat_map(|(l, line)| line.split_whitespace().map(move |t| (l + 1, t)));
        let err = |line: usize, field: String, msg: String| Error::ConfigParse { line, field, msg };
        let (l0, t0) = tokens.next().ok_or_else(|| err(1, "count".into(), "empty metric file".into()))?;
        let n: usize = t0.parse().map_err(|e| err(l0, "count".into(), format!("{e}")))?;
        let mut d = vec![vec![0.0; n]; n];
        for i in 1..n {
            for j in 0..i {
                let field = format!("d[{i}][{j}]");
                let (l, t) = tokens.next().ok_or_else(|| err(i + 1, field.clone(), "missing entry".into()))?;
                let x: f64 = t.parse().map_err(|e| err(l, field, format!("{e}")))?;
                d[i][j] = x;
                d[j][i] = x;
            }
        }
        if let Some((l, _)) = tokens.next() {
            return Err(err(l, "trailing".into(), "entries after the lower triangle".into()));
        }
        FiniteMetricSpace::new((0..n).map(|i| format!("p{i}")).collect(), d)
    }
}

/// Where [`sample_space`] draws its points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    Ball { center: Vec<f64>, radius: f64 },
    Sphere { center: Vec<f64>, radius: f64 },
}

/// The space form of `model`, or `UnsupportedKind`.
pub(crate) fn require_space_form(model: &Model, what: &str) -> Result<SpaceForm> {
    model
        .space_form()
        .ok_or_else(|| Error::UnsupportedKind(format!("{what} needs closed-form geodesics, got {}", model.name())))
}

/// Embedded point of the normal coordinates `y` at `O`.
pub(crate) fn embed(sf: &SpaceForm, y: &[f64]) -> Vec<f64> {
    let s = y.iter().map(|x| x * x).sum::<f64>().sqrt();
    if s == 0.0 {
        return sf.origin();
    }
    let theta: Vec<f64> = y.iter().map(|x| x / s).collect();
    sf.from_polar(s, &theta)
}

/// Polar sample of `B(center, radius)` (or its boundary sphere) with respect to
/// the Riemannian measure: `(s, unit direction in R^n, embedded point)`.
pub(crate) fn polar_sample<R: Rng>(
    model: &Model,
    sf: &SpaceForm,
    center: &[f64],
    radius: f64,
    on_sphere: bool,
    count: usize,
    rng: &mut R,
) -> Vec<(f64, Vec<f64>, Vec<f64>)> {
    let n = model.n();
    let c = embed(sf, center);
    let basis = sf.tangent_basis(&c);
    let jac = |s: f64| model.volume_element(s);
    let top = (0..=256).map(|k| jac(radius * k as f64 / 256.0)).fold(0.0f64, f64::max) * 1.01;
    (0..count)
        .map(|_| {
            let s = if on_sphere {
                radius
            } else {
                loop {
                    let s = radius * rng.gen::<f64>();
                    if rng.gen::<f64>() * top <= jac(s) {
                        break s;
                    }
                }
            };
            let u = random_unit(n, rng);
            let p = sf.from_normal_coords(&c, &basis, &u.iter().map(|x| x * s).collect::<Vec<_>>());
            (s, u, p)
        })
        .collect()
}

fn distance_matrix(sf: &SpaceForm, pts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = pts.len();
    let mut d = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..i {
            let x = sf.dist(&pts[i], &pts[j]);
            d[i][j] = x;
            d[j][i] = x;
        }
    }
    d
}

/// `n_points` samples of a ball or sphere in a space-form model, uniform for
/// the Riemannian measure, with their geodesic distances.
pub fn sample_space(model: &Model, region: &Region, n_points: usize, seed: u64) -> Result<FiniteMetricSpace> {
    let sf = require_space_form(model, "sample_space")?;
    let (center, radius, on_sphere) = match region {
        Region::Ball { center, radius } => (center, *radius, false),
        Region::Sphere { center, radius } => (center, *radius, true),
    };
    if center.len() != model.n() {
        return Err(Error::InvalidSpec { field: "center", reason: format!("expected {} coordinates", model.n()) });
    }
    if !(radius > 0.0) || radius >= model.cut_radius() {
        return Err(Error::InvalidSpec { field: "radius", reason: format!("{radius} is not in (0, cut radius)") });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<f64>> =
        polar_sample(model, &sf, center, radius, on_sphere, n_points, &mut rng).into_iter().map(|p| p.2).collect();
    FiniteMetricSpace::new((0..n_points).map(|i| format!("p{i}")).collect(), distance_matrix(&sf, &pts))
}

/// Cone distance between `(r1, z1)` and `(r2, z2)` with `d(z1, z2) = d`.
pub fn cone_distance(r1: f64, r2: f64, d: f64) -> f64 {
    if d <= std::f64::consts::PI {
        (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * d.cos()).max(0.0).sqrt()
    } else {
        r1 + r2
    }
}

/// The metric cone over `z` restricted to the radii in `radial_grid`.
pub fn cone_space(z: &FiniteMetricSpace, radial_grid: &[f64]) -> Result<FiniteMetricSpace> {
    if radial_grid.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidSpec { field: "radial_grid", reason: "radii must be positive and finite".into() });
    }
    let pts: Vec<(f64, usize)> = radial_grid.iter().flat_map(|&r| (0..z.len()).map(move |j| (r, j))).collect();
    let m = pts.len();
    let mut d = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in 0..a {
            let (r1, i) = pts[a];
            let (r2, j) = pts[b];
            let x = cone_distance(r1, r2, z.d[i][j]);
            d[a][b] = x;
            d[b][a] = x;
        }
    }
    let labels = pts.iter().map(|&(r, j)| format!("{r}:{}", z.labels[j])).collect();
    FiniteMetricSpace::new(labels, d)
}

/// Bounds `lower <= d_GH(A, B) <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhBounds {
    pub lower: f64,
    pub upper: f64,
}

fn eccentricities(a: &FiniteMetricSpace) -> Vec<f64> {
    a.d.iter().map(|r| r.iter().fold(0.0f64, |x, &y| x.max(y))).collect()
}

fn hausdorff_1d(x: &[f64], y: &[f64]) -> f64 {
    let one = |p: &[f64], q: &[f64]| {
        p.iter().map(|a| q.iter().map(|b| (a - b).abs()).fold(f64::INFINITY, f64::min)).fold(0.0f64, f64::max)
    };
    one(x, y).max(one(y, x))
}

/// Distortion of the relation given by the pairs `(a_k, b_k)`.
pub fn distortion(a: &FiniteMetricSpace, b: &FiniteMetricSpace, pairs: &[(usize, usize)]) -> f64 {
    let mut worst = 0.0f64;
    for (k, &(a1, b1)) in pairs.iter().enumerate() {
        for &(a2, b2) in &pairs[..k] {
            worst = worst.max((a.d[a1][a2] - b.d[b1][b2]).abs());
        }
    }
    worst
}

fn exhaustive(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> f64 {
    let (na, nb) = (a.len(), b.len());
    let all: Vec<(usize, usize)> = (0..na).flat_map(|i| (0..nb).map(move |j| (i, j))).collect();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1u32 << all.len()) {
        let pairs: Vec<(usize, usize)> = all.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, p)| *p).collect();
        let covers_a = (0..na).all(|i| pairs.iter().any(|p| p.0 == i));
        let covers_b = (0..nb).all(|j| pairs.iter().any(|p| p.1 == j));
        if covers_a && covers_b {
            best = best.min(distortion(a, b, &pairs));
        }
    }
    best
}

/// Largest distortion contributed by pair `k` against every other pair.
fn row_cost(a: &FiniteMetricSpace, b: &FiniteMetricSpace, pairs: &[(usize, usize)], k: usize, cand: (usize, usize)) -> f64 {
    pairs
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, &(a2, b2))| (a.d[cand.0][a2] - b.d[cand.1][b2]).abs())
        .fold(0.0f64, f64::max)
}

fn worst_pair(a: &FiniteMetricSpace, b: &FiniteMetricSpace, pairs: &[(usize, usize)]) -> (f64, usize, usize) {
    let mut worst = (0.0f64, 0, 0);
    for (k, &(a1, b1)) in pairs.iter().enumerate() {
        for (j, &(a2, b2)) in pairs[..k].iter().enumerate() {
            let x = (a.d[a1][a2] - b.d[b1][b2]).abs();
            if x > worst.0 {
                worst = (x, k, j);
            }
        }
    }
    worst
}

/// Greedy correspondence in a random order, then local moves on the pairs
/// that realise the distortion.
fn greedy_swap(a: &FiniteMetricSpace, b: &FiniteMetricSpace, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (na, nb) = (a.len(), b.len());
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(na + nb);
    let mut order: Vec<(bool, usize)> = (0..na).map(|i| (true, i)).chain((0..nb).map(|j| (false, j))).collect();
    order.shuffle(&mut rng);
    for (from_a, i) in order {
        let options = if from_a { nb } else { na };
        let mut best = (f64::INFINITY, 0);
        for c in 0..options {
            let cand = if from_a { (i, c) } else { (c, i) };
            let cost = pairs.iter().map(|&(a2, b2)| (a.d[cand.0][a2] - b.d[cand.1][b2]).abs()).fold(0.0f64, f64::max);
            if cost < best.0 || (cost == best.0 && rng.gen::<bool>()) {
                best = (cost, c);
            }
        }
        pairs.push(if from_a { (i, best.1) } else { (best.1, i) });
    }
    let (mut current, mut k1, mut k2) = worst_pair(a, b, &pairs);
    for _ in 0..GH_SWEEPS {
        if current == 0.0 || !improve(a, b, &mut pairs, [k1, k2], current) {
            break;
        }
        (current, k1, k2) = worst_pair(a, b, &pairs);
    }
    current
}

/// One improving move on a worst pair: a new partner on either side (when the
/// old one stays covered) or an exchange of partners with another pair.
fn improve(a: &FiniteMetricSpace, b: &FiniteMetricSpace, pairs: &mut [(usize, usize)], worst: [usize; 2], current: f64) -> bool {
    let count = |pairs: &[(usize, usize)], side_a: bool, v: usize| {
        pairs.iter().filter(|p| if side_a { p.0 == v } else { p.1 == v }).count()
    };
    for k in worst {
        let old = pairs[k];
        if count(pairs, false, old.1) > 1 {
            for c in (0..b.len()).filter(|&c| c != old.1) {
                if row_cost(a, b, pairs, k, (old.0, c)) < current {
                    pairs[k] = (old.0, c);
                    return true;
                }
            }
        }
        if count(pairs, true, old.0) > 1 {
            for c in (0..a.len()).filter(|&c| c != old.0) {
                if row_cost(a, b, pairs, k, (c, old.1)) < current {
                    pairs[k] = (c, old.1);
                    return true;
                }
            }
        }
        for j in 0..pairs.len() {
            if j == k {
                continue;
            }
            // exchanging partners keeps both projections onto
            let (ck, cj) = ((pairs[k].0, pairs[j].1), (pairs[j].0, pairs[k].1));
            let prev = (pairs[k], pairs[j]);
            pairs[k] = ck;
            pairs[j] = cj;
            if row_cost(a, b, pairs, k, ck) < current && row_cost(a, b, pairs, j, cj) < current {
                return true;
            }
            pairs[k] = prev.0;
            pairs[j] = prev.1;
        }
    }
    false
}

/// Best half-distortion over all `2^(|A| |B|)` relations.
pub fn gh_upper_exhaustive(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> f64 {
    0.5 * exhaustive(a, b)
}

/// Best half-distortion found by 200 seeded greedy-and-improve restarts.
pub fn gh_upper_search(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> f64 {
    0.5 * (0..GH_RESTARTS as u64)
        .into_par_iter()
        .map(|k| greedy_swap(a, b, GH_SEED.wrapping_add(k)))
        .reduce(|| f64::INFINITY, f64::min)
}

/// `max(|diam A - diam B|, d_H(ecc A, ecc B)) / 2`, a lower bound on `d_GH`.
pub fn gh_lower_bound(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> f64 {
    0.5 * (a.diameter() - b.diameter()).abs().max(hausdorff_1d(&eccentricities(a), &eccentricities(b)))
}

/// Lower bound from the diameters and the eccentricity values; upper bound
/// from the best correspondence found (every relation when `|A| + |B| <= 8`).
pub fn gh_distance(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> GhBounds {
    if a.is_empty() || b.is_empty() {
        return GhBounds { lower: 0.0, upper: 0.0 };
    }
    let lower = gh_lower_bound(a, b);
    let upper = if a.len() + b.len() <= 8 { gh_upper_exhaustive(a, b) } else { gh_upper_search(a, b) };
    GhBounds { lower, upper: upper.max(lower) }
}
