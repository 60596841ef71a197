use modricci::models::{build_model, catalog_entry, ModelKind, ModelSpec};
use modricci::pde::{dirichlet_green, verify_green_bound, HeatGridSpec};
use modricci::Error;

#[test]
fn flat_ball_green_function() {
    let m = build_model(&ModelSpec::new(ModelKind::Euclidean, 3)).unwrap();
    let g = dirichlet_green(&m, 1.0, &HeatGridSpec::default()).unwrap();
    let mut worst: f64 = 0.0;
    for (s, v) in g.r.iter().zip(&g.gamma).skip(1) {
        if *s > 0.01 && *s < 0.9 {
            let exact = (1.0 / s - 1.0) / (4.0 * std::f64::consts::PI);
            worst = worst.max((v / exact - 1.0).abs());
        }
    }
    eprintln!("worst {worst:e} mu {}", g.decay_rate);
    assert!(worst < 1e-3);
    assert!((g.decay_rate - std::f64::consts::PI.powi(2)).abs() < 1e-2);
    assert!(g.gamma.last().unwrap().abs() < 1e-6);
}

#[test]
fn flat_certificate() {
    let m = build_model(&ModelSpec::new(ModelKind::Euclidean, 3)).unwrap();
    let c = verify_green_bound(&m, &[0.0; 3], 1.0, &HeatGridSpec::default()).unwrap();
    eprintln!("{:?}", c.constants);
    assert!(c.pass);
    assert!((c.constants["C5_heat"] * 4.0 * std::f64::consts::PI - 1.0).abs() < 1e-6);
    assert!(c.constants["representation_error"] < 1e-3);
}

#[test]
fn hyperbolic_half_ball() {
    let m = build_model(&catalog_entry("hyperbolic").unwrap()).unwrap();
    let c = verify_green_bound(&m, &[0.0; 3], 0.5, &HeatGridSpec::default()).unwrap();
    eprintln!("{:?}", c.constants);
    assert!(c.pass);
}

#[test]
fn plane_is_rejected() {
    let m = build_model(&ModelSpec::new(ModelKind::Euclidean, 2)).unwrap();
    assert_eq!(verify_green_bound(&m, &[0.0; 2], 1.0, &HeatGridSpec::default()), Err(Error::DimensionTooLow { n: 2 }));
}
