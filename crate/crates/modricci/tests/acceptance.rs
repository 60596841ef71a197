//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported, not fatal; the process exits non-zero only
//! when a check cannot run at all.

use std::f64::consts::PI;
use std::time::Instant;

use modricci::cli::{run_scenario, Scenario};
use modricci::constants::CAlphaPolicy;
use modricci::convergence::cone::measured_delta;
use modricci::convergence::splitting::{Component, Coordinate};
use modricci::convergence::{
    cone_rigidity_suite, gh_upper_exhaustive, gh_upper_search, segment_inequality_mc, splitting_report,
    FiniteMetricSpace, RadialRegion,
};
use modricci::curvature::{convergence_order, modified_ricci};
use modricci::functional::{averaged_field_norm, half_volume_threshold, sobolev_l2_sides, verify_sobolev, TestFunction};
use modricci::models::{build_model, catalog, catalog_entry, Model, ModelKind, ModelSpec};
use modricci::pde::{heat_kernel_radial, verify_cutoff, verify_heat_kernel_bounds, CutoffSampling, HeatGridSpec};
use modricci::radial::{verify_comparison, verify_volume_ratio_monotone, ComparisonKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn named(name: &str) -> Model {
    build_model(&catalog_entry(name).unwrap()).unwrap()
}

fn spec(kind: ModelKind, n: usize) -> Model {
    build_model(&ModelSpec::new(kind, n)).unwrap()
}

fn diagonal(n: usize, s: f64) -> Vec<f64> {
    vec![s / (n as f64).sqrt(); n]
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn curvature() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut min_order = f64::INFINITY;
    let mut exact = 0;
    for s in catalog() {
        let m = build_model(&s).map_err(err)?;
        for d in [0.5, 0.75, 1.0].into_iter().filter(|&d| d < m.cut_radius()) {
            let (e1, _, order) = convergence_order(&m, &diagonal(m.n(), d), 1e-3).map_err(err)?;
            worst = worst.max(e1);
            match order {
                Some(p) => min_order = min_order.min(p),
                None => exact += 1,
            }
        }
    }
    let pass = worst <= 1e-6 && min_order >= 1.8;
    Ok((pass, format!("max error {worst:.2e}, min order {min_order:.3}, {exact} points at the round-off floor")))
}

fn laplacian() -> Outcome {
    let grid: Vec<f64> = (0..=60).map(|i| 1e-3 * 1000f64.powf(i as f64 / 60.0)).collect();
    let mut worst = f64::INFINITY;
    for name in ["euclidean", "sphere", "hyperbolic", "gaussian_soliton", "cigar_soliton", "singular_field"] {
        let m = named(name);
        let cert = verify_comparison(&m, ComparisonKind::LaplacianComparison, &vec![0.0; m.n()], &grid, CAlphaPolicy::Default)
            .map_err(err)?;
        worst = worst.min(cert.min_margin);
    }
    let hyp = named("hyperbolic");
    let at_one = verify_comparison(&hyp, ComparisonKind::LaplacianComparison, &[0.0; 3], &[1.0], CAlphaPolicy::Default)
        .map_err(err)?;
    let oracle = 2.0 / 3.0 - 2.0 * (1.0 / 1f64.tanh() - 1.0);
    let margin = at_one.min_margin;
    let control = build_model(&catalog_entry("hyperbolic").unwrap().lambda(1.0)).map_err(err)?;
    let negative = verify_comparison(&control, ComparisonKind::LaplacianComparison, &[0.0; 3], &grid, CAlphaPolicy::Default)
        .map_err(err)?;
    let pass = worst >= -1e-8 && (margin - oracle).abs() <= 1e-6 && !negative.pass;
    Ok((
        pass,
        format!(
            "worst margin {worst:.3e}; hyperbolic s=1 margin {margin:.7} vs coth oracle {oracle:.7} \
             (quoted 0.04065, offset {:.1e}); lambda=1 control fails: {}",
            margin - 0.04065,
            !negative.pass
        ),
    ))
}

fn volume() -> Outcome {
    let radii: Vec<f64> = (1..=20).map(|i| 0.05 * i as f64).collect();
    let kinds = [ComparisonKind::VolumeElementRatio, ComparisonKind::VolumeNoninflation, ComparisonKind::VolumeRatioBound];
    let mut all = true;
    let mut count = 0;
    for s in catalog() {
        let m = build_model(&s).map_err(err)?;
        let o = vec![0.0; m.n()];
        for kind in kinds.into_iter().filter(|k| k.applies_to(&m)) {
            let cert = verify_comparison(&m, kind, &o, &radii, CAlphaPolicy::Default).map_err(err)?;
            all &= cert.pass;
            count += 1;
        }
    }
    let flat = named("euclidean");
    let mut flat_dev: f64 = 0.0;
    for kind in [ComparisonKind::VolumeElementRatio, ComparisonKind::VolumeRatioBound] {
        let cert = verify_comparison(&flat, kind, &[0.0; 3], &radii, CAlphaPolicy::Default).map_err(err)?;
        flat_dev = cert.margins().iter().fold(flat_dev, |a, m| a.max(m.abs()));
    }
    let bishop = verify_volume_ratio_monotone(&named("sphere"), &[0.0; 3], &radii).map_err(err)?;
    let pass = all && flat_dev <= 1e-10 && bishop.pass;
    Ok((pass, format!("{count} certificates pass: {all}; flat |margin| {flat_dev:.1e}; sphere monotone: {}", bishop.pass)))
}

fn lemma_norm() -> Outcome {
    let m = build_model(&ModelSpec::new(ModelKind::SingularField { base_curvature: 0.0, inward: true }, 3).field(1.0, 0.5))
        .map_err(err)?;
    let mut dev: f64 = 0.0;
    for r in [0.1, 0.5, 1.0] {
        let v = averaged_field_norm(&m, &[0.0; 3], r, 2.0).map_err(err)?.value;
        dev = dev.max((r.sqrt() * v - 1.5f64.sqrt()).abs());
    }
    Ok((dev <= 1e-6, format!("max |r^alpha avg - sqrt(1.5)| = {dev:.1e}")))
}

fn solitons() -> Outcome {
    let g = named("gaussian_soliton");
    let lam = g.soliton().unwrap().soliton_lambda;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut eig: f64 = 0.0;
    for _ in 0..200 {
        let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
        for e in modified_ricci(&g, &y).map_err(err)?.eigenvalues() {
            eig = eig.max((e - lam).abs());
        }
    }
    let c = named("cigar_soliton");
    let mut res: f64 = 0.0;
    for i in 0..1000 {
        let s = 1e-3 + 5.0 * i as f64 / 999.0;
        res = res.max((c.scalar_curvature(s) + c.field_at(s).0.powi(2) - 1.0).abs());
    }
    Ok((eig <= 1e-10 && res < 1e-10, format!("Gaussian eigen-margin {eig:.1e}; cigar residual {res:.1e}")))
}

fn sobolev() -> Outcome {
    let flat = named("euclidean");
    let (lhs, _) = sobolev_l2_sides(&flat, &[0.0; 3], 1.0, TestFunction::Bump { p: 1 }).map_err(err)?;
    // 3 B(3, 7) = 3 * 2! 6! / 9!
    let oracle = (3.0 * 2.0 * 720.0 / 362_880.0f64).cbrt();
    let family = [TestFunction::Bump { p: 1 }, TestFunction::Bump { p: 2 }, TestFunction::Bump { p: 3 },
        TestFunction::TruncatedGaussian { a: 1.0 }];
    let mut all = true;
    let mut count = 0;
    for s in catalog() {
        let m = build_model(&s).map_err(err)?;
        let r0 = half_volume_threshold(&m);
        for r in [0.25, 0.5, 1.0].into_iter().filter(|&r| r <= r0) {
            all &= verify_sobolev(&m, &vec![0.0; m.n()], r, &family).map_err(err)?.pass;
            count += 1;
        }
    }
    let pass = (lhs - oracle).abs() <= 1e-8 && all;
    Ok((pass, format!("flat lhs {lhs:.10} vs Beta oracle {oracle:.10}; {count} family certificates pass: {all}")))
}

fn heat() -> Outcome {
    let grid_error = |m: &Model, exact: &dyn Fn(f64, f64) -> f64| -> Result<f64, String> {
        let grid = heat_kernel_radial(m, &[0.0; 3], 1.0, &HeatGridSpec::default()).map_err(err)?;
        let mut worst: f64 = 0.0;
        for (k, &t) in grid.t_grid.iter().enumerate().filter(|(_, &t)| t >= 0.01) {
            for (i, &r) in grid.r_grid.iter().enumerate().take_while(|(_, &r)| r <= 2.0) {
                worst = worst.max((grid.g[k][i] / exact(r, t) - 1.0).abs());
            }
        }
        Ok(worst)
    };
    let flat = named("euclidean");
    let e_flat = grid_error(&flat, &|r, t| (4.0 * PI * t).powf(-1.5) * (-r * r / (4.0 * t)).exp())?;
    let hyp = named("hyperbolic");
    let e_hyp = grid_error(&hyp, &|r, t| {
        let ratio = if r == 0.0 { 1.0 } else { r / r.sinh() };
        (4.0 * PI * t).powf(-1.5) * ratio * (-t - r * r / (4.0 * t)).exp()
    })?;
    let grid = heat_kernel_radial(&flat, &[0.0; 3], 1.0, &HeatGridSpec::default()).map_err(err)?;
    let cert = verify_heat_kernel_bounds(&grid, &flat).map_err(err)?;
    let (c2, c4) = (cert.constants["C2"], cert.constants["C4"]);
    let pass = e_flat <= 0.01 && e_hyp <= 0.01 && (c2 / 0.25 - 1.0).abs() <= 0.05 && (c4 / 4.0 - 1.0).abs() <= 0.05;
    Ok((pass, format!("flat rel error {e_flat:.1e}, hyperbolic {e_hyp:.1e}, C2 {c2:.4}, C4 {c4:.4}")))
}

fn cutoff() -> Outcome {
    let m = spec(ModelKind::Euclidean, 2);
    let cert = verify_cutoff(&m, &[0.0, 0.0], 1.0, &HeatGridSpec::default(), &CutoffSampling::default()).map_err(err)?;
    let c = &cert.constants;
    Ok((
        cert.pass,
        format!(
            "{} rows, min margin {:.1e}; |grad| {:.4} -> {:.4}, |lap| {:.4} -> {:.4} under refinement",
            cert.lhs.len(),
            cert.min_margin,
            c["C_grad"],
            c["C_grad_refined"],
            c["C_laplacian"],
            c["C_laplacian_refined"]
        ),
    ))
}

fn segment() -> Outcome {
    let m = spec(ModelKind::Euclidean, 2);
    let ball = RadialRegion::ball(1.0);
    let rep = segment_inequality_mc(&m, &[0.0, 0.0], 1.0, |_: &[f64]| 1.0, ball, ball, 1_000_000, 2024).map_err(err)?;
    let mean = rep.lhs_estimate / (PI * PI);
    let half = rep.ci / (PI * PI);
    let oracle = 128.0 / (45.0 * PI);
    let pass = (mean - oracle).abs() <= half && half / mean < 0.01 && rep.ratio <= 1.0;
    Ok((pass, format!("mean {mean:.5} +- {half:.5} vs {oracle:.5}; ratio {:.4}", rep.ratio)))
}

fn splitting() -> Outcome {
    let coords = Coordinate::all(3, 1.0);
    let h: Vec<Component> = coords.iter().map(|c| c as Component).collect();
    let flat = splitting_report(&spec(ModelKind::Euclidean, 3), &[0.0; 3], 0.5, &h).map_err(err)?;
    let sphere = spec(ModelKind::Sphere { curvature: 1.0 }, 2);
    let coords2 = Coordinate::all(2, 1.0);
    let h2: Vec<Component> = coords2.iter().map(|c| c as Component).collect();
    let a = splitting_report(&sphere, &[0.0, 0.0], 0.2, &h2).map_err(err)?;
    let b = splitting_report(&sphere, &[0.0, 0.0], 0.1, &h2).map_err(err)?;
    let ratio = a.epsilon_achieved / b.epsilon_achieved;
    let pass = flat.epsilon_achieved <= 1e-8 && (3.0..=5.0).contains(&ratio);
    Ok((pass, format!("flat epsilon {:.1e}; sphere epsilon(r)/epsilon(r/2) = {ratio:.3}", flat.epsilon_achieved)))
}

fn plane(points: &[(f64, f64)]) -> FiniteMetricSpace {
    let d = points
        .iter()
        .map(|p| points.iter().map(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()).collect())
        .collect();
    FiniteMetricSpace::new((0..points.len()).map(|i| format!("p{i}")).collect(), d).unwrap()
}

fn gh() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut mismatches = 0;
    for _ in 0..20 {
        let na = rng.gen_range(1..=5);
        let nb = rng.gen_range(1..=8 - na);
        let mut pts = |k: usize| -> Vec<(f64, f64)> { (0..k).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect() };
        let (a, b) = (plane(&pts(na)), plane(&pts(nb)));
        if (gh_upper_search(&a, &b) - gh_upper_exhaustive(&a, &b)).abs() > 1e-12 {
            mismatches += 1;
        }
    }
    // two samples of the unit disk, one a perturbation of the other
    let base: Vec<(f64, f64)> = (0..20)
        .map(|_| {
            let (r, t) = (rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI));
            (r * t.cos(), r * t.sin())
        })
        .collect();
    let moved: Vec<(f64, f64)> = base.iter().map(|p| (p.0 + rng.gen_range(-0.02..0.02), p.1 + rng.gen_range(-0.02..0.02))).collect();
    let dist = |p: &(f64, f64), q: &(f64, f64)| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
    let sup_inf = |x: &[(f64, f64)], y: &[(f64, f64)]| {
        x.iter().map(|p| y.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    let mesh = sup_inf(&base, &moved).max(sup_inf(&moved, &base));
    let upper = gh_upper_search(&plane(&base), &plane(&moved));
    let pass = mismatches == 0 && upper <= mesh;
    Ok((pass, format!("{mismatches}/20 search mismatches; sample GH upper {upper:.4} <= mesh {mesh:.4}")))
}

fn cone() -> Outcome {
    let flat = cone_rigidity_suite(&spec(ModelKind::Euclidean, 3), &[0.0; 3], 0.5, 0.0).map_err(err)?;
    let (fd, fg) = (flat.constants["delta"], flat.constants["gh_upper_0"]);
    let sphere = spec(ModelKind::Sphere { curvature: 1.0 }, 2);
    let sd = measured_delta(&sphere, &[0.0, 0.0], 1.0).map_err(err)?;
    let oracle = 1.0 - 1f64.sin() / (2.0 * (1.0 - 1f64.cos()));
    let hyp = cone_rigidity_suite(&named("hyperbolic"), &[0.0; 3], 0.4, 0.0).map_err(err)?;
    let seq = |key: &str| (0..3).map(|j| hyp.constants[&format!("{key}_{j}")]).collect::<Vec<f64>>();
    let (deltas, ghs) = (seq("delta"), seq("gh_upper"));
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let pass = fd.abs() <= 1e-10 && fg <= 1e-12 && (sd - oracle).abs() <= 1e-5 && decreasing(&deltas) && decreasing(&ghs);
    Ok((
        pass,
        format!(
            "flat delta {fd:.1e}, GH {fg:.1e}; sphere delta {sd:.6} vs closed form {oracle:.6} (quoted 0.08464); \
             hyperbolic delta {deltas:.4?}, GH {ghs:.4?}"
        ),
    ))
}

fn determinism() -> Outcome {
    let names: Vec<String> = catalog().into_iter().map(|s| format!("\"{}\"", s.name)).collect();
    let text = format!("[scenario]\nmodels = [{}]\nsuites = [\"all\"]\nseed = 42\n", names.join(", "));
    let sc = Scenario::parse(&text).map_err(err)?;
    let a = run_scenario(&sc, 0).map_err(err)?;
    let b = run_scenario(&sc, 0).map_err(err)?;
    let same = a.to_json().map_err(err)? == b.to_json().map_err(err)?;
    Ok((same, format!("{} rows, {:.1} s per run, identical: {same}", a.rows.len(), a.wall_time_s)))
}

fn main() {
    let criteria: [(&str, f64, fn() -> Outcome); 13] = [
        ("curvature finite-difference reconstruction", 5.0, curvature),
        ("Laplacian comparison", 10.0, laplacian),
        ("volume comparison", 10.0, volume),
        ("averaged field norm", 2.0, lemma_norm),
        ("soliton identities", 2.0, solitons),
        ("Sobolev inequality", 5.0, sobolev),
        ("heat kernel", 60.0, heat),
        ("cut-off function", 30.0, cutoff),
        ("segment inequality", 30.0, segment),
        ("epsilon-splitting", 10.0, splitting),
        ("Gromov-Hausdorff distance", 30.0, gh),
        ("cone rigidity", 120.0, cone),
        ("determinism", 600.0, determinism),
    ];
    let mut passed = 0;
    let mut broken = false;
    for (i, (title, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && secs < *budget, detail),
            Err(e) => {
                broken = true;
                (false, format!("error: {e}"))
            }
        };
        passed += ok as usize;
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {title} ({secs:.2} s, budget {budget} s): {detail}", i + 1);
    }
    println!("acceptance: {passed}/{} criteria pass", criteria.len());
    if broken {
        std::process::exit(1);
    }
}
