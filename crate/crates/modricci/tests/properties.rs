use modricci::constants::CAlphaPolicy;
use modricci::convergence::{cone_space, gh_distance, gh_upper_exhaustive, FiniteMetricSpace};
use modricci::curvature::{hessian_potential, lie_half, modified_ricci};
use modricci::functional::averaged_field_norm;
use modricci::models::{build_model, catalog, catalog_entry, Model, ModelKind, ModelSpec};
use modricci::radial::{verify_comparison, ComparisonKind};
use proptest::prelude::*;

fn catalog_model(i: usize) -> Model {
    build_model(&catalog()[i]).unwrap()
}

/// A point of `R^n` at distance `s` in the direction of `v` (or `e_1`).
fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-6 {
        let mut e = vec![0.0; v.len()];
        e[0] = s;
        return e;
    }
    v.iter().map(|x| x * s / norm).collect()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn space(points: &[(f64, f64)]) -> FiniteMetricSpace {
    let d = points
        .iter()
        .map(|p| points.iter().map(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()).collect())
        .collect();
    FiniteMetricSpace::new((0..points.len()).map(|i| format!("p{i}")).collect(), d).unwrap()
}

fn small_space() -> impl Strategy<Value = FiniteMetricSpace> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..=4).prop_map(|p| space(&p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_norm_respects_k(i in 0usize..7, v in prop::collection::vec(-1.0..1.0f64, 3), s in 1e-3..1.0f64) {
        let m = catalog_model(i);
        let y = scaled(&v[..m.n()], s);
        let norm: f64 = m.vector_field(&y).unwrap().iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(norm * s.powf(m.alpha()) <= m.k() + 1e-9);
    }

    #[test]
    fn spec_round_trips(lambda in 0.0..5.0f64, k in 0.0..2.0f64, alpha in 0.0..0.99f64, n in 2usize..6, curv in -2.0..2.0f64) {
        for kind in [ModelKind::Sphere { curvature: curv.abs() + 0.1 }, ModelKind::Hyperbolic { curvature: -curv.abs() - 0.1 },
            ModelKind::SingularField { base_curvature: curv, inward: curv > 0.0 }] {
            let spec = ModelSpec::new(kind, n).lambda(lambda).field(k, alpha).named("p");
            let text = serde_json::to_string(&spec).unwrap();
            let back: ModelSpec = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(&back, &spec);
            let built = build_model(&back).unwrap();
            prop_assert_eq!(built.spec(), &spec);
        }
    }

    #[test]
    fn soliton_scalar_identity_is_constant(s1 in 0.01..3.0f64, s2 in 0.01..3.0f64) {
        for name in ["gaussian_soliton", "cigar_soliton"] {
            let m = build_model(&catalog_entry(name).unwrap()).unwrap();
            let lam = m.soliton().unwrap().soliton_lambda;
            let q = |s: f64| m.scalar_curvature(s) + m.field_at(s).0.powi(2) - 2.0 * lam * m.potential_at(s).unwrap();
            prop_assert!((q(s1) - q(s2)).abs() <= 1e-8 * q(s1).abs().max(1.0));
        }
    }

    #[test]
    fn modified_ricci_is_rotation_covariant(i in 0usize..7, v in prop::collection::vec(-1.0..1.0f64, 3),
        s in 0.05..1.0f64, theta in 0.0..6.3f64) {
        let m = catalog_model(i);
        let y = scaled(&v[..m.n()], s);
        let mut z = y.clone();
        let (c, si) = (theta.cos(), theta.sin());
        z[0] = c * y[0] - si * y[1];
        z[1] = si * y[0] + c * y[1];
        let a = modified_ricci(&m, &y).unwrap();
        let b = modified_ricci(&m, &z).unwrap();
        prop_assert!(a.asymmetry() < 1e-12);
        for (x, w) in sorted(a.eigenvalues()).iter().zip(sorted(b.eigenvalues())) {
            prop_assert!((x - w).abs() < 1e-10, "{} vs {}", x, w);
        }
    }

    #[test]
    fn lie_and_hessian_paths_agree(i in 0usize..7, v in prop::collection::vec(-1.0..1.0f64, 3), s in 0.05..1.0f64) {
        let m = catalog_model(i);
        prop_assume!(m.has_potential());
        let y = scaled(&v[..m.n()], s);
        let a = lie_half(&m, &y).unwrap();
        let b = hessian_potential(&m, &y).unwrap();
        for (ra, rb) in a.components.iter().zip(&b.components) {
            for (x, w) in ra.iter().zip(rb) {
                prop_assert!((x - w).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn jensen_holds(alpha in 0.0..0.99f64, d0 in 0.05..1.0f64, t in prop::collection::vec(0.0..1.0f64, 1..6)) {
        let spec = ModelSpec::new(ModelKind::SingularField { base_curvature: 0.0, inward: true }, 3).field(0.1, alpha);
        let m = build_model(&spec).unwrap();
        let mut radii: Vec<f64> = t.iter().map(|u| (u * d0).max(1e-3)).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        let cert = verify_comparison(&m, ComparisonKind::Jensen, &[d0, 0.0, 0.0], &radii, CAlphaPolicy::Default).unwrap();
        prop_assert!(cert.min_margin >= -1e-12);
    }

    #[test]
    fn averaged_norm_is_monotone_in_q(r in 0.05..1.0f64, q1 in 0.5..3.0f64, dq in 0.1..2.0f64) {
        let m = catalog_model(6);
        let q2 = (q1 + dq).min(5.9);
        let o = [0.0; 3];
        let a = averaged_field_norm(&m, &o, r, q1).unwrap().value;
        let b = averaged_field_norm(&m, &o, r, q2).unwrap().value;
        prop_assert!(a <= b * (1.0 + 1e-9));
    }

    #[test]
    fn bishop_ratio_nonincreasing(s1 in 0.01..3.0f64, ds in 0.0..0.1f64) {
        let m = catalog_model(1);
        let q = |s: f64| m.volume_element(s) / s.powi(m.n() as i32 - 1);
        prop_assert!(q(s1 + ds) <= q(s1) * (1.0 + 1e-12));
    }

    #[test]
    fn gh_symmetric_and_ordered(a in small_space(), b in small_space()) {
        let ab = gh_distance(&a, &b);
        let ba = gh_distance(&b, &a);
        prop_assert!(ab.lower <= ab.upper);
        prop_assert!((ab.lower - ba.lower).abs() < 1e-12);
        prop_assert!((ab.upper - ba.upper).abs() < 1e-12);
    }

    #[test]
    fn gh_zero_on_relabelings(p in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..=4), rot in 0usize..4) {
        let mut q = p.clone();
        q.rotate_left(rot % p.len());
        let g = gh_distance(&space(&p), &space(&q));
        prop_assert!(g.upper < 1e-12);
        prop_assert!(g.lower < 1e-12);
    }

    #[test]
    fn gh_upper_triangle(a in small_space(), b in small_space(), c in small_space()) {
        let ab = gh_upper_exhaustive(&a, &b);
        let bc = gh_upper_exhaustive(&b, &c);
        let ac = gh_upper_exhaustive(&a, &c);
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn cone_over_a_point_is_a_segment(grid in prop::collection::vec(1e-3..1.0f64, 1..8)) {
        let z = FiniteMetricSpace::new(vec!["z".into()], vec![vec![0.0]]).unwrap();
        let mut grid = grid;
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let c = cone_space(&z, &grid).unwrap();
        for (i, ri) in grid.iter().enumerate() {
            for (j, rj) in grid.iter().enumerate() {
                prop_assert!((c.d[i][j] - (ri - rj).abs()).abs() <= 1e-12);
            }
        }
    }
}
