use modricci::models::{build_model, catalog_entry, Model};
use modricci::pde::{heat_kernel_radial, HeatGridSpec};

fn model(name: &str) -> Model {
    build_model(&catalog_entry(name).unwrap()).unwrap()
}

fn max_rel_error(name: &str, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let m = model(name);
    let grid = heat_kernel_radial(&m, &[0.0; 3], 1.0, &HeatGridSpec::default()).unwrap();
    let mut worst: f64 = 0.0;
    for (k, &t) in grid.t_grid.iter().enumerate() {
        if t < 0.01 {
            continue;
        }
        for (i, &r) in grid.r_grid.iter().enumerate() {
            if r > 2.0 {
                break;
            }
            let e = exact(r, t);
            worst = worst.max((grid.g[k][i] / e - 1.0).abs());
        }
    }
    worst
}

#[test]
fn flat_kernel_matches_gaussian() {
    let err = max_rel_error("euclidean", |r, t| {
        (4.0 * std::f64::consts::PI * t).powf(-1.5) * (-r * r / (4.0 * t)).exp()
    });
    assert!(err < 1e-6, "{err}");
}

#[test]
fn hyperbolic_kernel_matches_closed_form() {
    let err = max_rel_error("hyperbolic", |r, t| {
        let ratio = if r == 0.0 { 1.0 } else { r / r.sinh() };
        (4.0 * std::f64::consts::PI * t).powf(-1.5) * ratio * (-t - r * r / (4.0 * t)).exp()
    });
    assert!(err < 1e-2, "{err}");
    eprintln!("hyperbolic max relative error {err:e}");
}

#[test]
fn mass_and_semigroup() {
    let m = model("hyperbolic");
    let grid = heat_kernel_radial(&m, &[0.0; 3], 1.0, &HeatGridSpec::default()).unwrap();
    for &mass in &grid.mass {
        assert!((mass - 1.0).abs() < 1e-3, "{mass}");
    }
    let d = grid.semigroup_defect();
    assert!(d < 1e-3, "{d}");
}

#[test]
fn flat_constants_recovered() {
    use modricci::pde::verify_heat_kernel_bounds;
    let m = model("euclidean");
    let grid = heat_kernel_radial(&m, &[0.0; 3], 1.0, &HeatGridSpec::default()).unwrap();
    let cert = verify_heat_kernel_bounds(&grid, &m).unwrap();
    let c = &cert.constants;
    let c0 = (4.0 * std::f64::consts::PI).powf(-1.5);
    eprintln!("{c:?}");
    assert!(cert.pass);
    assert!((c["C1"] / c0 - 1.0).abs() < 1e-3 && (c["C3"] / c0 - 1.0).abs() < 1e-3);
    assert!((c["C2"] - 0.25).abs() < 0.0125 && (c["C4"] - 4.0).abs() < 0.2);
}

#[test]
fn hyperbolic_constants_finite() {
    use modricci::pde::verify_heat_kernel_bounds;
    let m = model("hyperbolic");
    let grid = heat_kernel_radial(&m, &[0.0; 3], 1.0, &HeatGridSpec::default()).unwrap();
    let cert = verify_heat_kernel_bounds(&grid, &m).unwrap();
    eprintln!("{:?} rows {}", cert.constants, cert.lhs.len());
    assert!(cert.pass, "{}", cert.min_margin);
}

#[test]
fn catalog_sweep() {
    use modricci::models::catalog;
    use modricci::pde::verify_heat_kernel_bounds;
    use modricci::Error;
    for spec in catalog() {
        let m = build_model(&spec).unwrap();
        let x0 = vec![0.0; m.n()];
        match heat_kernel_radial(&m, &x0, 1.0, &HeatGridSpec::default()) {
            Ok(grid) => {
                let cert = verify_heat_kernel_bounds(&grid, &m).unwrap();
                eprintln!("{} {} {:?}", m.name(), cert.pass, cert.constants);
                assert!(cert.pass, "{}", m.name());
            }
            Err(e) => {
                eprintln!("{} {e}", m.name());
                assert!(matches!(e, Error::TruncationTooTight { .. }), "{}: {e}", m.name());
            }
        }
    }
}
