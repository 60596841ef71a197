use std::f64::consts::PI;

use modricci::convergence::cone::{cone_comparison, measured_delta};
use modricci::convergence::excess::{harmonic_measures, ExcessData};
use modricci::convergence::splitting::{Component, Coordinate};
use modricci::convergence::*;
use modricci::models::{build_model, Model, ModelKind, ModelSpec};
use modricci::Error;

fn model(kind: ModelKind, n: usize) -> Model {
    build_model(&ModelSpec::new(kind, n)).unwrap()
}

fn flat(n: usize) -> Model {
    model(ModelKind::Euclidean, n)
}

fn sphere(n: usize) -> Model {
    model(ModelKind::Sphere { curvature: 1.0 }, n)
}

fn hyperbolic2() -> Model {
    build_model(&ModelSpec::new(ModelKind::Hyperbolic { curvature: -1.0 }, 2).lambda(1.0)).unwrap()
}

fn space(d: Vec<Vec<f64>>) -> FiniteMetricSpace {
    FiniteMetricSpace::new((0..d.len()).map(|i| i.to_string()).collect(), d).unwrap()
}

#[test]
fn flat_disk_mean_distance() {
    let rep = segment_inequality_mc(&flat(2), &[0.0, 0.0], 1.0, |_| 1.0, RadialRegion::ball(1.0), RadialRegion::ball(1.0), 200_000, 7)
        .unwrap();
    let mean = rep.lhs_estimate / (PI * PI);
    let oracle = 128.0 / (45.0 * PI);
    assert!((mean - oracle).abs() < rep.ci / (PI * PI) + 1e-3, "{mean} vs {oracle}");
    assert!(rep.ratio < 1.0);
    assert_eq!(rep.ambiguous, 0);
}

#[test]
fn zero_integrand_gives_zero() {
    let rep = segment_inequality_mc(&flat(3), &[0.0; 3], 0.5, |_| 0.0, RadialRegion::ball(0.5), RadialRegion::ball(0.25), 1000, 1)
        .unwrap();
    assert_eq!(rep.lhs_estimate, 0.0);
    assert_eq!(rep.ratio, 0.0);
    assert!(rep.certificate(&flat(3), 0.5).pass);
}

#[test]
fn sphere_segment_ci_below_one_percent() {
    let f = |y: &[f64]| y.iter().map(|v| v * v).sum::<f64>();
    let rep = segment_inequality_mc(&sphere(2), &[0.0, 0.0], 0.5, f, RadialRegion::ball(0.5), RadialRegion::ball(0.5), 1_000_000, 11)
        .unwrap();
    assert!(rep.ci / rep.lhs_estimate < 0.01);
    assert!(rep.certificate(&sphere(2), 0.5).pass);
}

#[test]
fn segment_ci_shrinks_like_root_two() {
    let run = |pairs| {
        segment_inequality_mc(&flat(2), &[0.0, 0.0], 1.0, |_| 1.0, RadialRegion::ball(1.0), RadialRegion::ball(1.0), pairs, 3)
            .unwrap()
            .ci
    };
    let q = run(40_000) / run(20_000);
    assert!((0.6..=0.8).contains(&q), "{q}");
}

#[test]
fn segment_is_thread_independent() {
    let run = || {
        segment_inequality_mc(&flat(2), &[0.0, 0.0], 1.0, |_| 1.0, RadialRegion::ball(1.0), RadialRegion::ball(0.5), 5000, 9)
            .unwrap()
            .lhs_estimate
    };
    let a = run();
    let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
    assert_eq!(a, b);
}

#[test]
fn flat_excess_closed_form() {
    let m = flat(3);
    let (qp, qm) = ([10.0, 0.0, 0.0], [-10.0, 0.0, 0.0]);
    let e_at = |y: [f64; 3]| {
        let d = |q: &[f64; 3]| ((y[0] - q[0]).powi(2) + (y[1] - q[1]).powi(2) + (y[2] - q[2]).powi(2)).sqrt();
        d(&qp) + d(&qm) - 20.0
    };
    assert!((e_at([0.0, 1.0, 0.0]) - 2.0 * (101f64.sqrt() - 10.0)).abs() < 1e-14);
    assert!((2.0 * (101f64.sqrt() - 10.0) - 0.099751).abs() < 1e-6);
    let data = ExcessData::sample(&m, &[0.0; 3], &qp, &qm, 1.0).unwrap();
    assert!(data.min_excess() >= 0.0);
    // the sample never leaves the unit ball, where e <= 2(sqrt(101) - 10)
    assert!(data.sup_excess() <= 2.0 * (101f64.sqrt() - 10.0) + 1e-12);
    let cert = excess_suite(&m, &[0.0; 3], &qp, &qm, 1.0).unwrap();
    assert!(cert.pass, "{:?}", cert.rows());
    assert_eq!(cert.constants["e_x"], 0.0);
    assert!(cert.constants["segment_excess"] < 1e-12);
}

#[test]
fn sphere_excess_passes() {
    let m = sphere(2);
    let cert = excess_suite(&m, &[0.0, 0.0], &[1.2, 0.0], &[-1.2, 0.0], 0.3).unwrap();
    assert!(cert.pass);
    // the first two rows are identities (e >= 0, e = 0 on the segment)
    assert!(cert.rows()[2..].iter().all(|r| r.margin > 0.0));
    // spherical law of cosines at a point on the perpendicular bisector
    let s: f64 = 0.3;
    let d = (1.2f64.cos() * s.cos()).acos();
    let e = 2.0 * d - 2.4;
    let data = ExcessData::sample(&m, &[0.0, 0.0], &[1.2, 0.0], &[-1.2, 0.0], s).unwrap();
    assert!(data.sup_excess() <= e + 1e-12);
    assert!(data.sup_excess() > 0.9 * e);
}

#[test]
fn excess_rejects_close_endpoints() {
    let r = excess_suite(&flat(2), &[0.0, 0.0], &[0.5, 0.0], &[-3.0, 0.0], 1.0);
    assert!(matches!(r, Err(Error::EndpointsTooClose(_))));
}

#[test]
fn excess_enforces_endpoint_distance() {
    let hyp = build_model(&ModelSpec::new(ModelKind::Hyperbolic { curvature: -1.0 }, 2).lambda(1.0)).unwrap();
    assert!(excess_suite(&hyp, &[0.0, 0.0], &[2.0, 0.0], &[-2.0, 0.0], 0.2).is_err());
    assert!(excess_suite(&hyp, &[0.0, 0.0], &[0.9, 0.0], &[-0.9, 0.0], 0.2).unwrap().pass);
}

#[test]
fn far_endpoint_is_nearly_affine() {
    let m = flat(2);
    let (r, d) = (0.1, 100.0);
    let cert = harmonic_approximation(&m, &[0.0, 0.0], r, &[d, 0.0], &[-d, 0.0]).unwrap();
    assert!(cert.pass);
    // quadratic part y2^2/(2D) extends to R^2/(4D) - (y1^2 - y2^2)/(4D)
    let psi = cert.constants["Psi_plus_0"];
    assert!((psi * r - r * r / (4.0 * d)).abs() < 1e-3 * r * r / (4.0 * d), "{psi}");
}

#[test]
fn constant_data_is_its_own_extension() {
    let m = hyperbolic2();
    let disk = HarmonicDisk::solve(&m, 0.3, |_| 2.5).unwrap();
    let meas = harmonic_measures(&disk, |_, _| (2.5, [0.0, 0.0]));
    assert!(meas.sup_deviation < 1e-14);
    assert!(meas.gradient_deviation < 1e-20);
    assert!(meas.hessian < 1e-20);
}

#[test]
fn hyperbolic_disk_mode_matches_tanh() {
    // Re (tanh(s/2) e^{i theta}) is harmonic on the hyperbolic plane
    let m = hyperbolic2();
    let r = 0.8;
    let disk = HarmonicDisk::solve(&m, r, |t| (r / 2.0f64).tanh() * t.cos()).unwrap();
    for s in [0.1, 0.4, 0.7] {
        let jet = disk.eval(s, 0.3);
        assert!((jet.value - (s / 2.0f64).tanh() * 0.3f64.cos()).abs() < 1e-12);
    }
}

#[test]
fn hyperbolic_harmonic_trend() {
    let cert = harmonic_approximation(&hyperbolic2(), &[0.0, 0.0], 0.1, &[0.9, 0.0], &[-0.9, 0.0]).unwrap();
    assert!(cert.pass);
    assert_eq!(cert.rows().len(), 12);
    assert!(cert.constants["Psi_plus_0"] > cert.constants["Psi_plus_2"]);
}

fn coordinates(n: usize, scale: f64) -> Vec<Coordinate> {
    Coordinate::all(n, scale)
}

fn refs(h: &[Coordinate]) -> Vec<Component<'_>> {
    h.iter().map(|c| c as Component).collect()
}

#[test]
fn flat_identity_splits() {
    let h = coordinates(3, 1.0);
    let rep = splitting_report(&flat(3), &[0.0; 3], 0.5, &refs(&h)).unwrap();
    assert!(rep.gram_deviation < 1e-8);
    assert!(rep.hessian < 1e-8);
    assert!(rep.harmonic_residual < 1e-8);
    assert!((rep.sup_gradient - 1.0).abs() < 1e-8);
    assert!(rep.epsilon_achieved <= 1e-8, "{}", rep.epsilon_achieved);
}

#[test]
fn closures_use_finite_differences() {
    let h: Vec<Box<dyn Fn(&[f64]) -> f64 + Sync>> = (0..3).map(|i| Box::new(move |y: &[f64]| y[i]) as Box<dyn Fn(&[f64]) -> f64 + Sync>).collect();
    let refs: Vec<Component> = h.iter().map(|b| b as Component).collect();
    let rep = splitting_report(&flat(3), &[0.0; 3], 0.5, &refs).unwrap();
    assert!((rep.sup_gradient - 1.0).abs() < 1e-8);
    assert!(rep.epsilon_achieved < 1e-3);
}

#[test]
fn doubled_coordinates_fail_gradient_bound() {
    let h = coordinates(3, 2.0);
    let rep = splitting_report(&flat(3), &[0.0; 3], 0.5, &refs(&h)).unwrap();
    assert!((rep.sup_gradient - 2.0).abs() < 1e-8);
    assert!(rep.epsilons[1] > 0.99);
    let cert = rep.certificate(&flat(3), 0.5);
    assert!(!cert.pass);
    assert!(cert.rows()[1].margin < 0.0);
}

#[test]
fn sphere_normal_coordinates_scale() {
    let h = coordinates(2, 1.0);
    let m = sphere(2);
    let a = splitting_report(&m, &[0.0, 0.0], 0.2, &refs(&h)).unwrap();
    let b = splitting_report(&m, &[0.0, 0.0], 0.1, &refs(&h)).unwrap();
    // the first three epsilons are O(r^2); the unsquared Hessian average gives r^{3/2}
    for k in 0..3 {
        let q = a.epsilons[k] / b.epsilons[k];
        assert!((3.0..=5.0).contains(&q), "condition {}: {q}", k + 1);
    }
    let q = a.epsilon_achieved / b.epsilon_achieved;
    assert!((q - 2f64.powf(1.5)).abs() < 0.1, "{q}");
    // |dh| = r/sin r on the boundary circle
    assert!((a.sup_gradient - 0.2 / 0.2f64.sin()).abs() < 1e-3);
}

#[test]
fn right_angle_cone() {
    let z = space(vec![vec![0.0, PI / 2.0], vec![PI / 2.0, 0.0]]);
    let c = cone_space(&z, &[1.0]).unwrap();
    assert!((c.d[0][1] - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn far_branch_adds_radii() {
    let z = space(vec![vec![0.0, 3.5], vec![3.5, 0.0]]);
    let c = cone_space(&z, &[0.5, 2.0]).unwrap();
    // points (0.5, z0) and (2.0, z1)
    assert_eq!(c.d[0][3], 2.5);
}

#[test]
fn one_point_cone_is_a_segment() {
    let z = space(vec![vec![0.0]]);
    let grid = [0.1, 0.35, 0.7, 1.0];
    let c = cone_space(&z, &grid).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert!((c.d[i][j] - (grid[i] - grid[j]).abs()).abs() < 1e-12);
        }
    }
}

#[test]
fn two_point_gh() {
    let a = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    let b = space(vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
    let g = gh_distance(&a, &b);
    assert_eq!((g.lower, g.upper), (0.5, 0.5));
    let same = gh_distance(&a, &a);
    assert_eq!((same.lower, same.upper), (0.0, 0.0));
}

#[test]
fn metric_violation_detected() {
    let bad = FiniteMetricSpace::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]],
    );
    assert!(matches!(bad, Err(Error::MetricViolation(_))));
}

#[test]
fn text_round_trip() {
    let s = sample_space(&sphere(2), &Region::Ball { center: vec![0.0, 0.0], radius: 0.8 }, 12, 5).unwrap();
    let back = FiniteMetricSpace::from_text(&s.to_text()).unwrap();
    for i in 0..12 {
        for j in 0..12 {
            assert!((back.d[i][j] - s.d[i][j]).abs() <= 1e-15 * s.d[i][j].max(1.0));
        }
    }
    assert!(matches!(FiniteMetricSpace::from_text("3\n1\n2"), Err(Error::ConfigParse { .. })));
}

/// Largest distance from a fine grid of the unit disk to the sample.
fn disk_mesh(points: &[[f64; 2]]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..=60 {
        for j in 0..=60 {
            let p = [-1.0 + i as f64 / 30.0, -1.0 + j as f64 / 30.0];
            if p[0] * p[0] + p[1] * p[1] > 1.0 {
                continue;
            }
            let d = points.iter().map(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    worst
}

#[test]
fn disk_sample_close_to_cone_over_circle() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let mut disk: Vec<[f64; 2]> = Vec::new();
    while disk.len() < 100 {
        let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if p[0] * p[0] + p[1] * p[1] <= 1.0 {
            disk.push(p);
        }
    }
    let dd: Vec<Vec<f64>> =
        disk.iter().map(|p| disk.iter().map(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()).collect()).collect();
    let a = space(dd);
    let angles: Vec<f64> = (0..10).map(|k| 2.0 * PI * k as f64 / 10.0).collect();
    let dz: Vec<Vec<f64>> = angles
        .iter()
        .map(|s| angles.iter().map(|t| { let d = (s - t).abs(); d.min(2.0 * PI - d) }).collect())
        .collect();
    let grid: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let b = cone_space(&space(dz), &grid).unwrap();
    let cone_pts: Vec<[f64; 2]> = grid.iter().flat_map(|&r| angles.iter().map(move |t| [r * t.cos(), r * t.sin()])).collect();
    let mesh = disk_mesh(&disk).max(disk_mesh(&cone_pts));
    let g = gh_distance(&a, &b);
    assert!(g.lower <= g.upper);
    assert!(g.upper < 2.0 * mesh, "{} vs mesh {mesh}", g.upper);
}

#[test]
fn flat_cone_rigidity() {
    let m = flat(3);
    let cert = cone_rigidity_suite(&m, &[0.0; 3], 0.5, 0.0).unwrap();
    assert!(cert.pass);
    assert!(cert.constants["delta"].abs() < 1e-12);
    assert!(cert.constants["gh_upper_0"] < 1e-12);
}

#[test]
fn sphere_delta_closed_form() {
    let m = sphere(2);
    let oracle = 1.0 - 0.5 * (2.0 * PI * 1f64.sin()) / (2.0 * PI * (1.0 - 1f64.cos()));
    let delta = measured_delta(&m, &[0.0, 0.0], 1.0).unwrap();
    assert!((delta - oracle).abs() < 1e-9, "{delta} vs {oracle}");
    assert!((oracle - 0.084756).abs() < 1e-6);
    let cert = cone_rigidity_suite(&m, &[0.0, 0.0], 1.0, 0.1).unwrap();
    assert!(cert.pass);
    let flat_gh = cone_comparison(&flat(2), &[0.0, 0.0], 1.0).unwrap().2;
    assert!(cert.constants["gh_upper_0"] > flat_gh + 1e-3);
}

#[test]
fn hyperbolic_ladder_decreases() {
    let m = hyperbolic2();
    let mut last = (f64::INFINITY, f64::INFINITY);
    for r in [0.4, 0.2, 0.1] {
        let d = measured_delta(&m, &[0.0, 0.0], r).unwrap().abs();
        let (_, _, gh) = cone_comparison(&m, &[0.0, 0.0], r).unwrap();
        assert!(d < last.0 && gh < last.1);
        last = (d, gh);
    }
    assert!(cone_rigidity_suite(&m, &[0.0, 0.0], 0.4, 0.0).unwrap().pass);
}
