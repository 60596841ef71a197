use modricci::models::{build_model, catalog_entry, Model, ModelKind, ModelSpec};
use modricci::pde::{
    equation_residual, heat_kernel_radial, solve_poisson_radial, verify_gradient_estimate, verify_max_principle,
    verify_parabolic_estimate, HeatGridSpec, RadialFunction,
};

fn flat(n: usize) -> Model {
    build_model(&ModelSpec::new(ModelKind::Euclidean, n)).unwrap()
}

#[test]
fn flat_poisson_is_quadratic() {
    let m = flat(3);
    let f = solve_poisson_radial(&m, &[0.0; 3], 1.0, |_| 1.0, 1.0 / 6.0, 400).unwrap();
    for (s, u) in f.r.iter().zip(&f.u) {
        assert!((u - s * s / 6.0).abs() < 1e-12, "{s}");
    }
}

#[test]
fn hyperbolic_plane_poisson_matches_quadrature() {
    let m = build_model(&ModelSpec::new(ModelKind::Hyperbolic { curvature: -1.0 }, 2)).unwrap();
    let f = solve_poisson_radial(&m, &[0.0; 2], 1.5, |_| 1.0, 0.0, 600).unwrap();
    // f'(s) = (cosh s - 1)/sinh s = tanh(s/2), f = 2 ln cosh(s/2) + c
    let c = -2.0 * (0.75f64).cosh().ln();
    for ((s, u), du) in f.r.iter().zip(&f.u).zip(&f.du) {
        assert!((du - (0.5 * s).tanh()).abs() < 1e-8);
        assert!((u - 2.0 * (0.5 * s).cosh().ln() - c).abs() < 1e-8);
    }
}

#[test]
fn zero_source_gives_constant() {
    let m = build_model(&catalog_entry("warped_custom").unwrap()).unwrap();
    let f = solve_poisson_radial(&m, &[0.0; 3], 0.8, |_| 0.0, 2.5, 100).unwrap();
    assert!(f.u.iter().all(|&u| u == 2.5));
}

#[test]
fn flat_gradient_estimate_example() {
    let m = flat(3);
    let u = RadialFunction::from_fn(1.0, 400, |s| (s * s / 6.0, s / 3.0));
    let f = RadialFunction::from_fn(1.0, 400, |_| (1.0, 0.0));
    assert!(equation_residual(&m, &u, &f) < 1e-12);
    let cert = verify_gradient_estimate(&m, &u, &f, 1.0, 2.0).unwrap();
    assert!(cert.pass);
    assert!((cert.lhs[0] - 1.0 / 36.0).abs() < 1e-12);
    // ||u||*_2^2 = avg (s^4/36) = 3/(7 36); f averages are 1
    let b1 = 3.0 / (7.0 * 36.0) + 1.0;
    assert!((cert.constants["C_grad_empirical"] - (1.0 / 36.0) / b1).abs() < 1e-9);
}

#[test]
fn empirical_constant_is_scale_invariant() {
    let m = flat(3);
    let mut cs = Vec::new();
    for c in [0.5, 1.0, 2.0] {
        // u(s) = cos-type profile scaled by c: u_c(s) = u(s/c), f_c = c^{-2} f(s/c)
        let u = RadialFunction::from_fn(c, 800, |s| {
            let x = s / c;
            (x * x * x * x / 20.0 + x * x, (x * x * x / 5.0 + 2.0 * x) / c)
        });
        let f = RadialFunction::from_fn(c, 800, |s| {
            let x = s / c;
            ((x * x + 6.0) / (c * c), 2.0 * x / (c * c * c))
        });
        let cert = verify_gradient_estimate(&m, &u, &f, c, 2.0).unwrap();
        cs.push(cert.constants["C_grad_empirical"]);
    }
    assert!((cs[0] / cs[1] - 1.0).abs() < 0.1 && (cs[2] / cs[1] - 1.0).abs() < 0.1, "{cs:?}");
}

#[test]
fn residual_guard() {
    let m = flat(3);
    let u = RadialFunction::from_fn(1.0, 100, |s| (s * s, 2.0 * s));
    let f = RadialFunction::from_fn(1.0, 100, |_| (1.0, 0.0));
    assert!(verify_gradient_estimate(&m, &u, &f, 1.0, 2.0).is_err());
}

#[test]
fn max_principle_cases() {
    let m = flat(3);
    let c = RadialFunction::from_fn(1.0, 100, |_| (3.0, 0.0));
    let z = RadialFunction::from_fn(1.0, 100, |_| (0.0, 0.0));
    let cert = verify_max_principle(&m, &c, &z, 1.0, 2.0).unwrap();
    assert!(cert.pass && cert.min_margin.abs() < 1e-14);
    // subharmonic-type: sup attained on the boundary
    let u = RadialFunction::from_fn(1.0, 100, |s| (s * s / 6.0, s / 3.0));
    let one = RadialFunction::from_fn(1.0, 100, |_| (1.0, 0.0));
    let cert = verify_max_principle(&m, &u, &one, 1.0, 2.0).unwrap();
    assert!(cert.pass && cert.constants["C_empirical"] == 0.0);
    // superharmonic: interior maximum
    let u = RadialFunction::from_fn(1.0, 100, |s| (-s * s / 6.0, -s / 3.0));
    let minus = RadialFunction::from_fn(1.0, 100, |_| (-1.0, 0.0));
    let cert = verify_max_principle(&m, &u, &minus, 1.0, 2.0).unwrap();
    assert!(cert.pass && (cert.constants["C_empirical"] - 1.0 / 6.0).abs() < 1e-9, "{cert:?}");
}

#[test]
fn parabolic_estimate_on_heat_kernel() {
    let m = flat(3);
    let g = heat_kernel_radial(&m, &[0.0; 3], 1.0, &HeatGridSpec::default()).unwrap();
    let cert = verify_parabolic_estimate(&g, &m, 0.5, 0.5).unwrap();
    assert!(cert.pass);
    assert!(cert.constants["C_grad_empirical"] > 0.0);
}
