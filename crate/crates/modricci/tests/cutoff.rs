use modricci::models::{build_model, ModelKind, ModelSpec};
use modricci::pde::{build_cutoff, smooth_clamp, verify_cutoff, CutoffSampling, HeatGridSpec};

#[test]
fn clamp_is_c2_at_the_ends() {
    assert_eq!(smooth_clamp(0.0), [0.0; 3]);
    assert_eq!(smooth_clamp(1.0), [1.0, 0.0, 0.0]);
    let [e, d1, d2] = smooth_clamp(0.5);
    assert!((e - 0.5).abs() < 1e-15 && (d1 - 1.875).abs() < 1e-12 && d2.abs() < 1e-12);
}

#[test]
fn flat_plane_cutoff() {
    let m = build_model(&ModelSpec::new(ModelKind::Euclidean, 2)).unwrap();
    let t = std::time::Instant::now();
    let cert = verify_cutoff(&m, &[0.0, 0.0], 1.0, &HeatGridSpec::default(), &CutoffSampling::default()).unwrap();
    eprintln!("{:?} {:?}", cert.constants, t.elapsed());
    assert!(cert.pass, "{}", cert.min_margin);
    let a = cert.constants["A"];
    assert!((a - 1.0 / (4.0 * 2f64.ln())).abs() < 1e-6);
    assert!((cert.constants["delta_hat"] - 0.0736).abs() < 1e-3);
}

#[test]
fn plateau_and_support_points() {
    let m = build_model(&ModelSpec::new(ModelKind::Hyperbolic { curvature: -1.0 }, 2)).unwrap();
    let cut =
        build_cutoff(&m, &[0.0; 2], 0.5, &HeatGridSpec::default(), &CutoffSampling { radial: 8, angular: 8 }).unwrap();
    assert!((cut.eval(&m, &[0.0; 2])[0] - 1.0).abs() < 1e-12);
    assert!((cut.eval(&m, &[0.54, 0.0])[0] - 1.0).abs() < 1e-12);
    assert_eq!(cut.eval(&m, &[1.0, 0.0])[0], 0.0);
    assert!(cut.support_radius < 0.95);
}
