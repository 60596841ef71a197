//! Monte Carlo estimate of the segment inequality on space-form models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ball::{annulus_rule, place};
use super::metric::{embed, require_space_form};
use crate::certificate::Certificate;
use crate::constants::segment_constant;
use crate::error::{Error, Result};
use crate::geometry::{random_unit, SpaceForm};
use crate::models::Model;
use crate::numerics::quad::gauss_legendre_nodes;
use crate::numerics::{unit_sphere_area, KahanSum};

const CHUNKS: u64 = 64;
const LINE_PANELS: usize = 2;
const BALL_PANELS: usize = 8;
const BALL_DIRECTIONS: usize = 128;

/// The annulus `inner <= d(x, .) <= outer` around the base point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialRegion {
    #[serde(default)]
    pub inner: f64,
    pub outer: f64,
}

impl RadialRegion {
    pub fn ball(radius: f64) -> Self {
        RadialRegion { inner: 0.0, outer: radius }
    }

    fn volume(&self, model: &Model) -> f64 {
        let n = model.n();
        let i: f64 = gauss_legendre_nodes(self.inner, self.outer, BALL_PANELS)
            .into_iter()
            .map(|(s, w)| w * model.volume_element(s))
            .sum();
        unit_sphere_area(n) * i
    }
}

/// Estimate of `int_{A1 x A2} F_f` against the right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub lhs_estimate: f64,
    /// Half-width of the 95% confidence interval of `lhs_estimate`.
    pub ci: f64,
    pub rhs_value: f64,
    pub ratio: f64,
    pub constant: f64,
    pub n_pairs: usize,
    /// Pairs redrawn because their minimal geodesic was not unique.
    pub ambiguous: usize,
}

impl SegmentReport {
    /// Certificate row at the upper end of the confidence interval.
    pub fn certificate(&self, model: &Model, r: f64) -> Certificate {
        let mut cert = Certificate::new("SegmentInequality", model.name())
            .param("r", r)
            .param("n_pairs", self.n_pairs as f64);
        cert.constant("C_segment", self.constant);
        cert.constant("lhs_estimate", self.lhs_estimate);
        cert.constant("ci_half_width", self.ci);
        cert.constant("ratio", self.ratio);
        cert.constant("ambiguous_pairs", self.ambiguous as f64);
        cert.push(r, self.lhs_estimate + self.ci, self.rhs_value);
        cert.finish()
    }
}

fn sample_region<R: Rng>(model: &Model, region: &RadialRegion, top: f64, rng: &mut R) -> (f64, Vec<f64>) {
    loop {
        let s = region.inner + (region.outer - region.inner) * rng.gen::<f64>();
        if rng.gen::<f64>() * top <= model.volume_element(s) {
            return (s, random_unit(model.n(), rng));
        }
    }
}

/// Normal coordinates at `O` of an embedded point.
pub(crate) fn coords(sf: &SpaceForm, p: &[f64]) -> Vec<f64> {
    let (s, th) = sf.to_polar(p);
    th.into_iter().map(|t| t * s).collect()
}

/// `int_0^{d} f(gamma(t)) dt` along the minimal geodesic from `a` to `b`.
fn line_integral<F: Fn(&[f64]) -> f64>(sf: &SpaceForm, a: &[f64], b: &[f64], f: &F) -> f64 {
    let d = sf.dist(a, b);
    if d == 0.0 {
        return 0.0;
    }
    let u = sf.log_dir(a, b);
    gauss_legendre_nodes(0.0, d, LINE_PANELS)
        .into_iter()
        .map(|(t, w)| w * f(&coords(sf, &sf.exp(a, &u, t).0)))
        .sum()
}

/// Monte Carlo estimate of `int_{A1 x A2} F_f` with `F_f(y1, y2)` the integral
/// of `f` along the minimal geodesic, against
/// `C (vol A1 + vol A2) r int_{B(x, 3r)} f`, `C = 3^n 2 e^{C(alpha) K (2r)^{1-alpha} + lambda (2r)^2}`.
///
/// `f` takes normal coordinates at `O`. Each of 64 chunks draws from its own
/// ChaCha stream of `seed`, so the result does not depend on the thread count.
#[allow(clippy::too_many_arguments)]
pub fn segment_inequality_mc<F>(
    model: &Model,
    x: &[f64],
    r: f64,
    f: F,
    a1: RadialRegion,
    a2: RadialRegion,
    n_pairs: usize,
    seed: u64,
) -> Result<SegmentReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let sf = require_space_form(model, "segment inequality")?;
    let n = model.n();
    if x.len() != n {
        return Err(Error::InvalidSpec { field: "x", reason: format!("expected {n} coordinates") });
    }
    for (field, a) in [("A1", &a1), ("A2", &a2)] {
        if !(a.inner >= 0.0 && a.inner < a.outer && a.outer <= r) {
            return Err(Error::InvalidSpec { field, reason: format!("[{}, {}] is not a sub-annulus of B(x, {r})", a.inner, a.outer) });
        }
    }
    if 3.0 * r >= model.cut_radius() {
        return Err(Error::CutLocusReached { radius: 3.0 * r, cut: model.cut_radius() });
    }
    if n_pairs < 2 {
        return Err(Error::InvalidSpec { field: "n_pairs", reason: "need at least two pairs".into() });
    }
    let c = embed(&sf, x);
    let basis = sf.tangent_basis(&c);
    let top = |a: &RadialRegion| {
        (0..=256).map(|k| model.volume_element(a.inner + (a.outer - a.inner) * k as f64 / 256.0)).fold(0.0, f64::max) * 1.01
    };
    let (top1, top2) = (top(&a1), top(&a2));
    let point = |(s, u): (f64, Vec<f64>)| sf.from_normal_coords(&c, &basis, &u.iter().map(|v| v * s).collect::<Vec<_>>());

    let per_chunk = |k: u64| {
        let count = n_pairs / CHUNKS as usize + usize::from((k as usize) < n_pairs % CHUNKS as usize);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k);
        let (mut sum, mut sq, mut amb) = (KahanSum::default(), KahanSum::default(), 0usize);
        let mut done = 0;
        while done < count {
            let p = point(sample_region(model, &a1, top1, &mut rng));
            let q = point(sample_region(model, &a2, top2, &mut rng));
            if sf.check_unique(&p, &q).is_err() {
                amb += 1;
                continue;
            }
            let v = line_integral(&sf, &p, &q, &f);
            sum.add(v);
            sq.add(v * v);
            done += 1;
        }
        (sum.value(), sq.value(), amb)
    };
    let parts: Vec<(f64, f64, usize)> = (0..CHUNKS).into_par_iter().map(per_chunk).collect();
    let (mut sum, mut sq, mut ambiguous) = (KahanSum::default(), KahanSum::default(), 0);
    for (s, q, a) in parts {
        sum.add(s);
        sq.add(q);
        ambiguous += a;
    }
    let m = n_pairs as f64;
    let mean = sum.value() / m;
    let var = ((sq.value() - m * mean * mean) / (m - 1.0)).max(0.0);
    let (v1, v2) = (a1.volume(model), a2.volume(model));
    let lhs = v1 * v2 * mean;
    let ci = v1 * v2 * 1.959_963_984_540_054 * (var / m).sqrt();

    let mut fint = KahanSum::default();
    for node in annulus_rule(model, 0.0, 3.0 * r, BALL_PANELS, BALL_DIRECTIONS) {
        fint.add(node.w * f(&coords(&sf, &place(&sf, &c, &basis, &node))));
    }
    let constant = segment_constant(n, model.lambda(), model.k(), model.alpha(), r);
    let rhs = constant * (v1 + v2) * r * fint.value();
    Ok(SegmentReport {
        lhs_estimate: lhs,
        ci,
        rhs_value: rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY },
        constant,
        n_pairs,
        ambiguous,
    })
}
