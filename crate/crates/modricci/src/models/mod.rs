//! Catalog of rotationally symmetric model manifolds with a radial vector
//! field `V = v(s) d/ds`, where `s = d(., O)`.
//!
//! Points are given in normal coordinates at the base point `O`: a vector
//! `y in R^n` with `|y| = d(y, O)`.

mod warp;

use serde::{Deserialize, Serialize};

pub use warp::Warp;

use crate::error::{Error, Result};
use crate::geometry::SpaceForm;

/// Default guard radius around the singular point of `V`.
pub const EPS_MIN: f64 = 1e-10;

/// Which explicit manifold a spec describes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelKind {
    Euclidean,
    Sphere { curvature: f64 },
    Hyperbolic { curvature: f64 },
    /// Flat metric with potential `L = lambda_s |x|^2 / 2`.
    GaussianSoliton { soliton_lambda: f64 },
    /// Hamilton's cigar, rescaled so that `R + |grad L|^2 = 1`.
    CigarSoliton,
    WarpedCustom { warp: Warp },
    /// Space-form base with `V = +-K d^{-alpha} d/ds`.
    SingularField {
        #[serde(default)]
        base_curvature: f64,
        #[serde(default = "default_true")]
        inward: bool,
    },
}

fn default_true() -> bool {
    true
}

fn default_rho() -> f64 {
    1.0
}

fn default_eps() -> f64 {
    EPS_MIN
}

/// Serializable description of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(default)]
    pub name: String,
    #[serde(flatten)]
    pub kind: ModelKind,
    pub n: usize,
    /// Lower-bound parameter in `Ric + 1/2 L_V g >= -lambda g`.
    #[serde(default)]
    pub lambda: f64,
    #[serde(default, rename = "K")]
    pub k: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Lower scalar-curvature constant for expanding solitons. User supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default = "default_eps")]
    pub eps_min: f64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, n: usize) -> Self {
        ModelSpec {
            name: String::new(),
            kind,
            n,
            lambda: 0.0,
            k: 0.0,
            alpha: 0.0,
            rho: 1.0,
            c1: None,
            eps_min: EPS_MIN,
        }
    }

    pub fn lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn field(mut self, k: f64, alpha: f64) -> Self {
        self.k = k;
        self.alpha = alpha;
        self
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn kind_tag(&self) -> &'static str {
        match self.kind {
            ModelKind::Euclidean => "euclidean",
            ModelKind::Sphere { .. } => "sphere",
            ModelKind::Hyperbolic { .. } => "hyperbolic",
            ModelKind::GaussianSoliton { .. } => "gaussian_soliton",
            ModelKind::CigarSoliton => "cigar_soliton",
            ModelKind::WarpedCustom { .. } => "warped_custom",
            ModelKind::SingularField { .. } => "singular_field",
        }
    }
}

/// Radial profile of `V = v(s) d/ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldProfile {
    Zero,
    /// `v = coef s^{-alpha}`.
    Power { coef: f64, alpha: f64 },
    /// `v = c s`, the gradient of `c s^2 / 2`.
    Linear { c: f64 },
    /// `v = -(2/a) tanh(s/a)`, the gradient of `L = -2 log cosh(s/a)`.
    Cigar { a: f64 },
}

impl FieldProfile {
    /// `(v, v')` at `s`.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        match *self {
            FieldProfile::Zero => (0.0, 0.0),
            FieldProfile::Power { coef, alpha } => {
                let p = s.powf(-alpha);
                (coef * p, -alpha * coef * p / s)
            }
            FieldProfile::Linear { c } => (c * s, c),
            FieldProfile::Cigar { a } => {
                let t = (s / a).tanh();
                (-2.0 / a * t, -2.0 / (a * a) * (1.0 - t * t))
            }
        }
    }

    /// Radial primitive `Phi` with `Phi' = v`, `Phi(0) = 0`.
    pub fn primitive(&self, s: f64) -> f64 {
        match *self {
            FieldProfile::Zero => 0.0,
            FieldProfile::Power { coef, alpha } => coef * s.powf(1.0 - alpha) / (1.0 - alpha),
            FieldProfile::Linear { c } => 0.5 * c * s * s,
            FieldProfile::Cigar { a } => -2.0 * log_cosh(s / a),
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, FieldProfile::Power { .. })
    }
}

fn log_cosh(x: f64) -> f64 {
    let ax = x.abs();
    ax + (-2.0 * ax).exp().ln_1p() - std::f64::consts::LN_2
}

/// Normalization modes for gradient Ricci solitons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// `R + |grad L|^2 - 2 lambda L = 0`.
    ShrinkExpand,
    /// `R + |grad L|^2 = 1`.
    Steady,
}

/// Soliton constant and normalization, with the gradient bound `Lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonNormalization {
    pub mode: NormalizationMode,
    pub soliton_lambda: f64,
}

impl SolitonNormalization {
    /// `Lambda(n, lambda, K)` for `|L| <= k_l`; `c1` is needed when expanding.
    pub fn gradient_bound(&self, k_l: f64, c1: Option<f64>) -> Result<f64> {
        let l = self.soliton_lambda;
        if l > 0.0 {
            Ok((2.0 * l * k_l).sqrt())
        } else if l == 0.0 {
            Ok(1.0)
        } else {
            let c1 = c1.ok_or(Error::InvalidSpec {
                field: "c1",
                reason: "expanding solitons need the user-supplied constant c1".into(),
            })?;
            Ok((-2.0 * l * k_l + c1).sqrt())
        }
    }
}

/// Hoelder/integral data `(K1, a, K2, beta, q)` of a potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BakryEmeryCondition {
    pub k1: f64,
    pub a: f64,
    pub k2: f64,
    pub beta: f64,
    pub q: f64,
}

impl BakryEmeryCondition {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| Err(Error::InvalidSpec { field, reason: reason.into() });
        if !(self.k1 >= 0.0 && self.k2 >= 0.0) {
            return bad("k1", "constants must be nonnegative");
        }
        if !(self.a > 0.0 && self.a < 1.0) {
            return bad("a", "Hoelder exponent must lie in (0,1)");
        }
        if !(0.0..1.0).contains(&self.beta) {
            return bad("beta", "must lie in [0,1)");
        }
        if self.q < 1.0 {
            return bad("q", "must be >= 1");
        }
        Ok(())
    }
}

/// |V| at a point, with a flag for violation of `|V| <= K/d^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldNorm {
    pub value: f64,
    pub bound_violated: bool,
}

/// An immutable model with analytic evaluators.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    warp: Warp,
    field: FieldProfile,
    has_potential: bool,
    soliton: Option<SolitonNormalization>,
}

impl Model {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn lambda(&self) -> f64 {
        self.spec.lambda
    }

    pub fn k(&self) -> f64 {
        self.spec.k
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha
    }

    pub fn rho(&self) -> f64 {
        self.spec.rho
    }

    pub fn eps_min(&self) -> f64 {
        self.spec.eps_min
    }

    pub fn warp(&self) -> &Warp {
        &self.warp
    }

    pub fn field_profile(&self) -> FieldProfile {
        self.field
    }

    pub fn soliton(&self) -> Option<SolitonNormalization> {
        self.soliton
    }

    /// Whether a potential `L` with `V = grad L` is declared.
    pub fn has_potential(&self) -> bool {
        self.has_potential
    }

    pub fn cut_radius(&self) -> f64 {
        self.warp.cut_radius()
    }

    /// Constant-curvature geometry, when the metric is a space form.
    pub fn space_form(&self) -> Option<SpaceForm> {
        self.warp.constant_curvature().map(|k| SpaceForm::new(self.spec.n, k))
    }

    /// `(f, f', f'')` at `s`.
    pub fn warp_at(&self, s: f64) -> [f64; 3] {
        self.warp.eval(s)
    }

    /// Volume element `w(s) = f(s)^{n-1}` of geodesic polar coordinates at `O`.
    pub fn volume_element(&self, s: f64) -> f64 {
        self.warp.eval(s)[0].powi(self.spec.n as i32 - 1)
    }

    /// `Delta s = (n-1) f'/f`.
    pub fn laplacian_of_distance(&self, s: f64) -> f64 {
        let [f, d1, _] = self.warp.eval(s);
        (self.spec.n - 1) as f64 * d1 / f
    }

    /// `Delta s - (n-1)/s`, computed without cancellation.
    pub fn laplacian_excess(&self, s: f64) -> f64 {
        (self.spec.n - 1) as f64 * self.warp.log_derivative_excess(s)
    }

    /// `(v, v')` of the radial field at distance `s` from `O`.
    pub fn field_at(&self, s: f64) -> (f64, f64) {
        self.field.eval(s)
    }

    /// Potential `L(s)`, if declared.
    pub fn potential_at(&self, s: f64) -> Option<f64> {
        self.has_potential.then(|| self.field.primitive(s))
    }

    pub fn dist_to_origin(&self, y: &[f64]) -> f64 {
        y.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn guard(&self, s: f64) -> Result<()> {
        if self.field.is_singular() && s < self.spec.eps_min {
            return Err(Error::SingularEvaluation { distance: s, eps_min: self.spec.eps_min });
        }
        Ok(())
    }

    /// Coordinate components of `V` at `y` (normal coordinates at `O`).
    pub fn vector_field(&self, y: &[f64]) -> Result<Vec<f64>> {
        let s = self.dist_to_origin(y);
        self.guard(s)?;
        if s == 0.0 {
            return Ok(vec![0.0; y.len()]);
        }
        let (v, _) = self.field.eval(s);
        Ok(y.iter().map(|x| v * x / s).collect())
    }

    /// `|V|(y)` and whether the catalog bound `K/d^alpha` is exceeded.
    pub fn vector_field_norm(&self, y: &[f64]) -> Result<FieldNorm> {
        let s = self.dist_to_origin(y);
        self.guard(s)?;
        let value = if s == 0.0 { 0.0 } else { self.field.eval(s).0.abs() };
        let scaled = if self.spec.alpha > 0.0 { value * s.powf(self.spec.alpha) } else { value };
        let k = self.spec.k;
        Ok(FieldNorm { value, bound_violated: scaled > k + 1e-9 * k.max(1.0) })
    }

    /// Coordinate metric `g_ij(y)` in normal coordinates at `O`.
    pub fn metric(&self, y: &[f64]) -> Vec<Vec<f64>> {
        let n = y.len();
        let s = self.dist_to_origin(y);
        let phi2 = if s == 0.0 {
            1.0
        } else {
            let f = self.warp.eval(s)[0];
            (f / s) * (f / s)
        };
        let mut g = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let tt = if s == 0.0 { 0.0 } else { y[i] * y[j] / (s * s) };
                let delta = if i == j { 1.0 } else { 0.0 };
                g[i][j] = tt + phi2 * (delta - tt);
            }
        }
        g
    }

    /// Ricci eigenvalues `(radial, tangential)` at distance `s`.
    pub fn ricci_eigen(&self, s: f64) -> (f64, f64) {
        let n = self.spec.n as f64;
        let kr = self.warp.radial_curvature(s);
        let kt = if s == 0.0 { kr } else { self.warp.tangential_curvature(s) };
        ((n - 1.0) * kr, kr + (n - 2.0) * kt)
    }

    /// Eigenvalues `(radial, tangential)` of `1/2 L_V g`, equal to `Hess Phi`
    /// for the radial primitive `Phi`.
    pub fn lie_half_eigen(&self, s: f64) -> (f64, f64) {
        let (v, dv) = self.field.eval(s);
        if s == 0.0 {
            return (dv, dv);
        }
        let [f, d1, _] = self.warp.eval(s);
        (dv, v * d1 / f)
    }

    /// Scalar curvature at distance `s`.
    pub fn scalar_curvature(&self, s: f64) -> f64 {
        let (r, t) = self.ricci_eigen(s);
        r + (self.spec.n - 1) as f64 * t
    }

    /// Sup of `|L|` over `B(O, radius)` for models with a potential.
    pub fn potential_sup(&self, radius: f64) -> Option<f64> {
        if !self.has_potential {
            return None;
        }
        let mut m: f64 = 0.0;
        for k in 0..=400 {
            let s = radius * k as f64 / 400.0;
            m = m.max(self.field.primitive(s).abs());
        }
        Some(m)
    }

    /// Bakry-Emery data implied by the field: `|V| <= K d^{-alpha}` gives
    /// Hoelder exponent `1 - alpha` (or any `a` when `alpha = 0`).
    pub fn bakry_emery_condition(&self) -> Option<BakryEmeryCondition> {
        if !self.has_potential && !self.field.is_singular() {
            return None;
        }
        let (k, alpha) = (self.spec.k, self.spec.alpha);
        // Hoelder data from integrating |grad L| <= K d^{-alpha} along a geodesic;
        // for alpha = 0, K d <= K d^{1/2} on d <= 1
        let (k1, a) = if alpha > 0.0 { (2.0 * k / (1.0 - alpha), 1.0 - alpha) } else { (k, 0.5) };
        let k2 = if alpha > 0.0 {
            crate::constants::lq_constant(self.spec.n, self.spec.lambda, k, alpha, self.spec.rho, 1.0) * k
        } else {
            k
        };
        Some(BakryEmeryCondition { k1, a, k2, beta: alpha, q: 1.0 })
    }
}

/// Validates a spec and builds the model.
pub fn build_model(spec: &ModelSpec) -> Result<Model> {
    let bad = |field: &'static str, reason: String| Err(Error::InvalidSpec { field, reason });
    if spec.n < 2 {
        return bad("n", format!("dimension {} must be >= 2", spec.n));
    }
    if !(spec.lambda >= 0.0 && spec.lambda.is_finite()) {
        return bad("lambda", format!("{} must be finite and >= 0", spec.lambda));
    }
    if !(spec.k >= 0.0 && spec.k.is_finite()) {
        return bad("K", format!("{} must be finite and >= 0", spec.k));
    }
    if !(0.0..1.0).contains(&spec.alpha) {
        return bad("alpha", format!("{} must lie in [0,1)", spec.alpha));
    }
    if !(spec.rho > 0.0) {
        return bad("rho", format!("{} must be > 0", spec.rho));
    }
    if !(spec.eps_min > 0.0) {
        return bad("eps_min", format!("{} must be > 0", spec.eps_min));
    }
    let (warp, field, has_potential, soliton) = match &spec.kind {
        ModelKind::Euclidean => (Warp::Linear, FieldProfile::Zero, false, None),
        ModelKind::Sphere { curvature } => {
            if !(*curvature > 0.0) {
                return bad("curvature", format!("sphere curvature {curvature} must be > 0"));
            }
            (Warp::Sin { k: *curvature }, FieldProfile::Zero, false, None)
        }
        ModelKind::Hyperbolic { curvature } => {
            if !(*curvature < 0.0) {
                return bad("curvature", format!("hyperbolic curvature {curvature} must be < 0"));
            }
            (Warp::Sinh { c: -curvature }, FieldProfile::Zero, false, None)
        }
        ModelKind::GaussianSoliton { soliton_lambda } => (
            Warp::Linear,
            FieldProfile::Linear { c: *soliton_lambda },
            true,
            Some(SolitonNormalization {
                mode: NormalizationMode::ShrinkExpand,
                soliton_lambda: *soliton_lambda,
            }),
        ),
        ModelKind::CigarSoliton => {
            if spec.n != 2 {
                return bad("n", "the cigar soliton is two-dimensional".into());
            }
            // Unscaled cigar: f = tanh(s), L = -2 log cosh(s), R + |grad L|^2 = 4.
            // Scaling g by c0 = 4 makes the sum 1 and lengths grow by sqrt(c0).
            let c0: f64 = 4.0;
            let a = c0.sqrt();
            (
                Warp::Tanh { a },
                FieldProfile::Cigar { a },
                true,
                Some(SolitonNormalization {
                    mode: NormalizationMode::Steady,
                    soliton_lambda: 0.0,
                }),
            )
        }
        ModelKind::WarpedCustom { warp } => {
            warp.validate()?;
            (warp.clone(), FieldProfile::Zero, false, None)
        }
        ModelKind::SingularField { base_curvature, inward } => {
            let warp = if *base_curvature > 0.0 {
                Warp::Sin { k: *base_curvature }
            } else if *base_curvature < 0.0 {
                Warp::Sinh { c: -base_curvature }
            } else {
                Warp::Linear
            };
            let sign = if *inward { -1.0 } else { 1.0 };
            (warp, FieldProfile::Power { coef: sign * spec.k, alpha: spec.alpha }, false, None)
        }
    };
    let mut spec = spec.clone();
    if spec.name.is_empty() {
        spec.name = spec.kind_tag().to_string();
    }
    let model = Model { spec, warp, field, has_potential, soliton };
    if has_potential {
        check_gradient_consistency(&model)?;
    }
    Ok(model)
}

/// Samples `V = grad L` along a ray to tolerance 1e-8.
fn check_gradient_consistency(model: &Model) -> Result<()> {
    let h = 1e-4;
    for k in 1..=20 {
        let s = 0.1 * k as f64;
        let fd = (model.field.primitive(s + h) - model.field.primitive(s - h)) / (2.0 * h);
        let (v, _) = model.field.eval(s);
        if (fd - v).abs() > 1e-8 * v.abs().max(1.0) {
            return Err(Error::InvalidSpec {
                field: "potential",
                reason: format!("V differs from grad L at s = {s}: {v} vs {fd}"),
            });
        }
    }
    Ok(())
}

/// The seven catalog entries with their default parameters.
pub fn catalog() -> Vec<ModelSpec> {
    vec![
        ModelSpec::new(ModelKind::Euclidean, 3).named("euclidean"),
        ModelSpec::new(ModelKind::Sphere { curvature: 1.0 }, 3).named("sphere"),
        ModelSpec::new(ModelKind::Hyperbolic { curvature: -1.0 }, 3).named("hyperbolic").lambda(2.0),
        ModelSpec::new(ModelKind::GaussianSoliton { soliton_lambda: 1.0 }, 2)
            .named("gaussian_soliton")
            .field(2.0, 0.0),
        ModelSpec::new(ModelKind::CigarSoliton, 2).named("cigar_soliton").field(1.0, 0.0),
        ModelSpec::new(
            ModelKind::WarpedCustom { warp: Warp::Poly { coeffs: vec![0.0, 1.0, 0.0, 0.1] } },
            3,
        )
        .named("warped_custom")
        .lambda(1.2),
        ModelSpec::new(ModelKind::SingularField { base_curvature: 0.0, inward: true }, 3)
            .named("singular_field")
            .field(0.1, 0.5),
    ]
}

/// Looks up a catalog entry by name.
pub fn catalog_entry(name: &str) -> Result<ModelSpec> {
    catalog()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::ModelUnknown(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_builds() {
        let c = catalog();
        assert_eq!(c.len(), 7);
        for spec in &c {
            build_model(spec).unwrap();
        }
    }

    #[test]
    fn euclidean_singular_field_norm() {
        let spec = ModelSpec::new(ModelKind::SingularField { base_curvature: 0.0, inward: true }, 3)
            .field(1.0, 0.5);
        let m = build_model(&spec).unwrap();
        let nv = m.vector_field_norm(&[0.0, 4.0, 0.0]).unwrap();
        assert!((nv.value - 0.5).abs() < 1e-15);
        assert!(!nv.bound_violated);
        assert!(matches!(
            m.vector_field_norm(&[1e-11, 0.0, 0.0]),
            Err(Error::SingularEvaluation { .. })
        ));
    }

    #[test]
    fn gaussian_gradient_norm() {
        let spec = ModelSpec::new(ModelKind::GaussianSoliton { soliton_lambda: 1.0 }, 2).field(2.0, 0.0);
        let m = build_model(&spec).unwrap();
        let nv = m.vector_field_norm(&[2.0, 0.0]).unwrap();
        assert!((nv.value - 2.0).abs() < 1e-15);
        assert!((m.potential_at(2.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cigar_steady_normalization() {
        let m = build_model(&catalog_entry("cigar_soliton").unwrap()).unwrap();
        for k in 0..50 {
            let s = 0.1 * k as f64;
            let (v, _) = m.field_at(s);
            let r = m.scalar_curvature(s);
            assert!((r + v * v - 1.0).abs() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn invalid_specs_name_the_field() {
        let e = build_model(&ModelSpec::new(ModelKind::Euclidean, 1)).unwrap_err();
        assert!(matches!(e, Error::InvalidSpec { field: "n", .. }));
        let e = build_model(&ModelSpec::new(ModelKind::Euclidean, 3).field(1.0, 1.0)).unwrap_err();
        assert!(matches!(e, Error::InvalidSpec { field: "alpha", .. }));
        let e = build_model(&ModelSpec::new(ModelKind::Sphere { curvature: -1.0 }, 3)).unwrap_err();
        assert!(matches!(e, Error::InvalidSpec { field: "curvature", .. }));
    }

    #[test]
    fn lambda_bound_cases() {
        let sh = SolitonNormalization { mode: NormalizationMode::ShrinkExpand, soliton_lambda: 0.5 };
        assert!((sh.gradient_bound(4.0, None).unwrap() - 2.0).abs() < 1e-15);
        let st = SolitonNormalization { mode: NormalizationMode::Steady, soliton_lambda: 0.0 };
        assert_eq!(st.gradient_bound(10.0, None).unwrap(), 1.0);
        let ex = SolitonNormalization { mode: NormalizationMode::ShrinkExpand, soliton_lambda: -1.0 };
        assert!(ex.gradient_bound(1.0, None).is_err());
        assert!((ex.gradient_bound(1.0, Some(2.0)).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn spec_roundtrip_json() {
        for spec in catalog() {
            let txt = serde_json::to_string(&spec).unwrap();
            let back: ModelSpec = serde_json::from_str(&txt).unwrap();
            assert_eq!(back, spec);
        }
    }
}
