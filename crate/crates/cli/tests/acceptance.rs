//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one pass/fail line (visible with --nocapture). The bundled
//! scenarios double as the end-to-end fixtures.

use std::f64::consts::{E, PI};
use std::path::Path;

use nalgebra::{Point3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mcf_cli::config::ScenarioConfig;
use mcf_cli::runner::{self, Report};
use mcf_core::diagnostics::{self, SpacetimePoint};
use mcf_core::exact::{
    ExactSolution, PlaneSolution, SamplingMode, SelfShrinkerSample, ShrinkerKind,
    ShrinkingCylinder, ShrinkingSphere,
};
use mcf_core::flow::{
    detect_singularity, run_exact, DtPolicy, FlowTrack, StepSummary, StopCriterion, StopReason,
    FIT_WINDOW,
};
use mcf_core::geometry::{ExactSurface, SurfaceState};
use mcf_core::rescaling::{parabolic_dilate, shrinker_residual};

fn pass(n: u32, name: &str) {
    println!("ACCEPTANCE {n:2} {name}: PASS");
}

fn run_bundled(file: &str) -> (Report, tempfile::TempDir) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(file);
    let cfg = ScenarioConfig::from_json(&std::fs::read_to_string(path).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = runner::run_scenario(&cfg, dir.path()).unwrap();
    (report, dir)
}

fn diagnostic_value(report: &Report, op: &str, nth: usize) -> f64 {
    report
        .diagnostics
        .iter()
        .filter(|d| d.op == op)
        .nth(nth)
        .unwrap_or_else(|| panic!("missing diagnostic {op}"))
        .value
        .unwrap()
}

fn diagnostic_verdict(report: &Report, op: &str, nth: usize) -> String {
    report
        .diagnostics
        .iter()
        .filter(|d| d.op == op)
        .nth(nth)
        .and_then(|d| d.verdict.clone())
        .unwrap_or_else(|| panic!("missing verdict for {op}"))
}

fn sphere_solution() -> ExactSolution {
    ExactSolution::Sphere(ShrinkingSphere::new(Point3::origin(), 1.0, 2).unwrap())
}

fn cylinder_solution() -> ExactSolution {
    ExactSolution::Cylinder(
        ShrinkingCylinder::new(Point3::origin(), Unit::new_normalize(Vector3::x()), 1.0, 15.0)
            .unwrap(),
    )
}

fn plane_solution() -> ExactSolution {
    ExactSolution::Plane(PlaneSolution {
        point: Point3::origin(),
        normal: Unit::new_normalize(Vector3::z()),
    })
}

fn exact_track(sol: &ExactSolution, stop: StopCriterion) -> FlowTrack {
    run_exact(sol, 0.0, stop, &DtPolicy::default(), SamplingMode::Analytic).unwrap()
}

/// FlowTrack in rescaled coordinates (for norm invariance checks).
fn rescaled_as_flowtrack(
    track: &FlowTrack,
    sp: &SpacetimePoint,
    lambda: f64,
) -> FlowTrack {
    let rtrack = parabolic_dilate(track, sp, lambda).unwrap();
    let states: Vec<SurfaceState> = rtrack.states().to_vec();
    let summaries: Vec<StepSummary> = states
        .iter()
        .enumerate()
        .map(|(k, s)| StepSummary {
            step: k,
            time: s.time(),
            max_a2: s.max_second_form_sq().unwrap(),
            area: s.area().unwrap_or(0.0),
            min_radius: s.min_radius(),
            dt: 0.0,
        })
        .collect();
    FlowTrack::new(states, summaries, StopReason::TimeReached).unwrap()
}

/// Criterion 1: sphere Gaussian density, analytic within 1e-3 and the
/// simulated icosphere (subdiv 4, run to (T-t)/T = 0.1) within 1%.
#[test]
fn criterion_01_sphere_density() {
    let (report, _dir) = run_bundled("sphere_density.json");
    let analytic = diagnostic_value(&report, "gaussian_density", 0);
    assert!(
        (analytic - 4.0 / E).abs() < 1e-3,
        "analytic density {analytic}"
    );
    let limit = diagnostic_value(&report, "density_limit", 0);
    assert!((limit - 4.0 / E).abs() < 1e-3, "analytic limit {limit}");

    let (mesh_report, _dir2) = run_bundled("sphere_density_mesh.json");
    // run reached (T-t)/T = 0.1: stop threshold max|A|^2 = 20 = 1/(2*0.025)
    let discrete = diagnostic_value(&mesh_report, "gaussian_density", 0);
    assert!(
        (discrete - 4.0 / E).abs() / (4.0 / E) < 0.01,
        "discrete density {discrete}"
    );
    pass(1, "sphere Gaussian density (analytic 1e-3, discrete 1%)");
}

/// Criterion 2: truncated exact cylinder density within 1e-3.
#[test]
fn criterion_02_cylinder_density() {
    let anchor = (2.0 * PI / E).sqrt();
    // truncation exactly at L = 12 sqrt(T - t)
    for tau in [0.5f64, 0.1, 0.01] {
        let surf = ExactSurface::Cylinder {
            center: Point3::origin(),
            axis: Unit::new_normalize(Vector3::x()),
            radius: (2.0 * tau).sqrt(),
            half_length: 12.0 * tau.sqrt(),
        };
        let v = surf.kernel_integral(&Point3::origin(), tau).unwrap();
        assert!((v - anchor).abs() < 1e-3, "tau {tau}: {v}");
    }
    let (report, _dir) = run_bundled("cylinder_density.json");
    let v = diagnostic_value(&report, "gaussian_density", 0);
    assert!((v - anchor).abs() < 1e-3, "scenario density {v}");
    pass(2, "cylinder Gaussian density (1e-3)");
}

/// Criterion 3: plane density 1 within 1e-6; both verdicts regular with
/// the limit below 2 - 0.05.
#[test]
fn criterion_03_plane_density_and_verdicts() {
    let (plane, _d1) = run_bundled("plane_static.json");
    let v = diagnostic_value(&plane, "gaussian_density", 0);
    assert!((v - 1.0).abs() < 1e-6, "plane density {v}");
    let lim = diagnostic_value(&plane, "density_limit", 0);
    assert!((lim - 1.0).abs() < 1e-6);
    assert_eq!(diagnostic_verdict(&plane, "density_limit", 0), "regular_white");
    assert!(lim < 2.0 - 0.05);

    let (sphere, _d2) = run_bundled("sphere_density.json");
    let lim_s = diagnostic_value(&sphere, "density_limit", 0);
    assert_eq!(
        diagnostic_verdict(&sphere, "density_limit", 0),
        "regular_below2"
    );
    assert!(lim_s < 2.0 - 0.05);
    pass(3, "plane density 1 (1e-6) + below-2 verdicts");
}

/// Criterion 4: density non-increasing for 20 random spacetime points on
/// the exact tracks (1e-6) and on a simulated mesh sphere track (1e-3).
#[test]
fn criterion_04_monotonicity_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let tracks = [
        exact_track(&sphere_solution(), StopCriterion::MaxSecondFormSq(1e4)),
        exact_track(&cylinder_solution(), StopCriterion::MaxSecondFormSq(1e4)),
        exact_track(&plane_solution(), StopCriterion::TimeMax(0.5)),
    ];
    for track in &tracks {
        for _ in 0..20 {
            let y0 = Point3::new(
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
            );
            let tbar = track.last_time() + rng.gen_range(0.05..0.3);
            let sp = SpacetimePoint::new(y0, tbar);
            let rep = diagnostics::monotonicity_audit(track, &sp).unwrap();
            assert_eq!(rep.tolerance, 1e-6);
            assert!(
                rep.violations.is_empty(),
                "violations at {y0:?}, T = {tbar}: {:?}",
                rep.violations
            );
        }
    }

    // simulated mesh sphere with the discrete tolerance
    let mesh = mcf_core::geometry::mesh::icosphere(Point3::origin(), 1.0, 3, 0.0);
    let track = mcf_core::flow::run_until(
        &SurfaceState::from_mesh(mesh),
        StopCriterion::MaxSecondFormSq(500.0),
        &DtPolicy { c_stab: 0.05, c_mesh: None, ..DtPolicy::default() },
    )
    .unwrap();
    for _ in 0..20 {
        let y0 = Point3::new(
            rng.gen_range(-1.2..1.2),
            rng.gen_range(-1.2..1.2),
            rng.gen_range(-1.2..1.2),
        );
        let tbar = track.last_time() + rng.gen_range(0.05..0.3);
        let sp = SpacetimePoint::new(y0, tbar);
        let rep = diagnostics::monotonicity_audit(&track, &sp).unwrap();
        assert_eq!(rep.tolerance, 1e-3);
        assert!(
            rep.violations.is_empty(),
            "discrete violations at {y0:?}: {:?}",
            rep.violations
        );
    }
    pass(4, "monotonicity: 20 random centers, exact (1e-6) + mesh (1e-3)");
}

/// Criterion 5: type-I fit constants on exact sphere and cylinder tracks.
#[test]
fn criterion_05_type_one_fit() {
    for (sol, t_exact) in [(sphere_solution(), 0.25), (cylinder_solution(), 0.5)] {
        let track = exact_track(&sol, StopCriterion::MaxSecondFormSq(1e4));
        let est = detect_singularity(&track, FIT_WINDOW).unwrap();
        assert!(
            (est.t_est - t_exact).abs() / t_exact < 1e-3,
            "T_est {} vs {t_exact}",
            est.t_est
        );
        assert!(
            (est.c0_est - 0.5).abs() / 0.5 < 0.01,
            "C0_est {}",
            est.c0_est
        );
        assert!(est.fit_r2 >= 0.9999, "R^2 {}", est.fit_r2);
    }
    pass(5, "type-I fit: C0 = 0.5 (1%), T_est (0.1%), R^2 >= 0.9999");
}

/// Criterion 6: spacetime |H| integrals on the sphere: log-divergent at
/// alpha = n + 2 (constant increments per epsilon halving within 5%),
/// convergent at alpha = 2 (increment ratio <= 0.75).
#[test]
fn criterion_06_alpha_optimality() {
    let policy = DtPolicy {
        snapshot_ratio: 0.5f64.powf(0.25),
        ..DtPolicy::default()
    };
    let track = run_exact(
        &sphere_solution(),
        0.0,
        StopCriterion::MaxSecondFormSq(2e4),
        &policy,
        SamplingMode::Analytic,
    )
    .unwrap();
    let eps0 = 0.025;
    let mut prev4 = 0.0;
    let mut prev2 = 0.0;
    let mut inc4 = Vec::new();
    let mut inc2 = Vec::new();
    for j in 0..6 {
        let eps = eps0 * 0.5f64.powi(j);
        let v4 = diagnostics::spacetime_h_norm(&track, 4.0, 0.25 - eps)
            .unwrap()
            .powi(4);
        let v2 = diagnostics::spacetime_h_norm(&track, 2.0, 0.25 - eps)
            .unwrap()
            .powi(2);
        if j > 0 {
            inc4.push(v4 - prev4);
            inc2.push(v2 - prev2);
        }
        prev4 = v4;
        prev2 = v2;
    }
    let base = inc4[0];
    for inc in &inc4 {
        assert!(
            (inc - base).abs() / base < 0.05,
            "alpha=4 increments not constant: {inc4:?}"
        );
    }
    for w in inc2.windows(2) {
        assert!(w[1] / w[0] <= 0.75, "alpha=2 increments {inc2:?}");
    }
    pass(6, "alpha-optimality: log divergence at n+2, convergence at 2");
}

/// Criterion 7: scale invariance of the three norms under parabolic
/// dilation with lambda in {2, 10, 100}, to 1e-9 relative.
#[test]
fn criterion_07_scale_invariance() {
    let track = exact_track(&sphere_solution(), StopCriterion::MaxSecondFormSq(1e4));
    let sp = SpacetimePoint::new(Point3::origin(), 0.25);

    let t_end = track.last_time();
    let h_src = diagnostics::spacetime_h_norm(&track, 4.0, t_end).unwrap();
    let lpq_src = diagnostics::lpq_a_norm(&track, 4.0, 4.0, t_end).unwrap().value;
    let (x0, sigma, t0) = (Point3::new(1.0, 0.0, 0.0), 0.4, 0.2);
    let le_src = diagnostics::local_energy(&track, &x0, sigma, t0).unwrap();
    assert!(le_src > 0.0, "window must be non-trivial: {le_src}");

    for &lambda in &[2.0, 10.0, 100.0] {
        let resc = rescaled_as_flowtrack(&track, &sp, lambda);
        let s_end = lambda * lambda * (t_end - 0.25);
        let h = diagnostics::spacetime_h_norm(&resc, 4.0, s_end).unwrap();
        assert!(
            (h - h_src).abs() / h_src < 1e-9,
            "lambda {lambda}: H norm {h} vs {h_src}"
        );
        let lpq = diagnostics::lpq_a_norm(&resc, 4.0, 4.0, s_end).unwrap().value;
        assert!(
            (lpq - lpq_src).abs() / lpq_src < 1e-9,
            "lambda {lambda}: lpq {lpq} vs {lpq_src}"
        );
        // ball center transforms with the dilation about sp = (origin, T)
        let le = diagnostics::local_energy(
            &resc,
            &Point3::from(x0.coords * lambda),
            sigma * lambda,
            lambda * lambda * (t0 - 0.25),
        )
        .unwrap();
        assert!(
            (le - le_src).abs() / le_src < 1e-9,
            "lambda {lambda}: local energy {le} vs {le_src}"
        );
    }
    pass(7, "scale invariance: H norm, L^{p,q}, local energy (1e-9)");
}

/// Criterion 8: self-shrinker residuals vanish on the catalog; the
/// lambda-rescaled sphere residual vanishes for lambda in {1, 10, 100}.
#[test]
fn criterion_08_shrinker_residuals() {
    for kind in [ShrinkerKind::Plane, ShrinkerKind::Sphere, ShrinkerKind::Cylinder] {
        for s in [-1.0, -0.3, -4.0] {
            let sample = SelfShrinkerSample::canonical(kind, s, 2).unwrap();
            let r = sample.residual_exact().unwrap();
            assert!(r < 1e-12, "{kind} at s = {s}: residual {r}");
        }
    }

    // rescaled sphere about its own singular point; track from t = -2.5
    // so that lambda = 1 already covers the window
    let track = run_exact(
        &sphere_solution(),
        -2.5,
        StopCriterion::MaxSecondFormSq(1e6),
        &DtPolicy::default(),
        SamplingMode::Analytic,
    )
    .unwrap();
    let sp = SpacetimePoint::new(Point3::origin(), 0.25);
    for &lambda in &[1.0, 10.0, 100.0] {
        let rtrack = parabolic_dilate(&track, &sp, lambda).unwrap();
        let resid = shrinker_residual(&rtrack, (-2.0, -1.0)).unwrap();
        assert!(resid < 1e-10, "lambda {lambda}: residual {resid}");
    }
    pass(8, "shrinker residuals: catalog 1e-12, rescaled sphere 1e-10");
}

/// Criterion 9: dumbbell neckpinch end to end.
#[test]
fn criterion_09_neckpinch_end_to_end() {
    let (report, _dir) = run_bundled("dumbbell_neckpinch.json");
    assert_eq!(report.track.stop_reason, "curvature_threshold");
    let sing = report.singularity.as_ref().unwrap();
    assert_eq!(sing.source, "estimated");
    assert!(sing.y0[0].abs() < 0.05, "neck at {:?}", sing.y0);
    assert_eq!(sing.type_one, Some(true));

    // classification: cylinder at every requested lambda
    assert!(!report.rescalings.is_empty());
    for r in &report.rescalings {
        let label = r.classification.as_ref().unwrap()["label"].as_str().unwrap().to_string();
        assert_eq!(label, "cylinder", "lambda {}: {label}", r.lambda);
        assert!(r.residual < 1e-2);
    }

    // density at the neck within 5% of the cylinder anchor
    let anchor = (2.0 * PI / E).sqrt();
    let neck = diagnostic_value(&report, "density_limit", 0);
    assert!(
        (neck - anchor).abs() / anchor < 0.05,
        "neck density {neck} vs {anchor}"
    );

    // bulb-interior point: consistent with a regular verdict
    let bulb_verdict = diagnostic_verdict(&report, "density_limit", 1);
    let bulb = diagnostic_value(&report, "density_limit", 1);
    assert!(bulb < 2.0 - 0.05, "bulb density {bulb}");
    assert!(
        bulb_verdict == "regular_below2" || bulb_verdict == "regular_white",
        "bulb verdict {bulb_verdict}"
    );
    pass(9, "dumbbell neckpinch: cylinder label, neck density 5%");
}

/// Criterion 10: slice norm products constant in t on the sphere for
/// s in {4, 8}, with the s = 4 value (4 pi)^{1/4}.
#[test]
fn criterion_10_slice_products() {
    let track = exact_track(&sphere_solution(), StopCriterion::MaxSecondFormSq(1e6));
    for (s_exp, expect) in [(4.0, (4.0 * PI).powf(0.25)), (8.0, PI.powf(0.125))] {
        let series = diagnostics::slice_ls_product(&track, s_exp, 0.25).unwrap();
        for v in &series.values {
            assert!(
                (v - expect).abs() < 1e-6,
                "s={s_exp}: product {v} vs {expect}"
            );
        }
    }
    // running sup product: minimum equals the same constant
    let run = diagnostics::running_sup_ls(&track, 4.0, 0.25).unwrap();
    assert!((run.product_min - (4.0 * PI).powf(0.25)).abs() < 1e-6);
    pass(10, "slice L^s products constant, (4 pi)^{1/4} at s = 4");
}

/// Criterion 11: the |A|^2 evolution identity closes on the catalog.
#[test]
fn criterion_11_evolution_identity() {
    let sols = [sphere_solution(), cylinder_solution(), plane_solution()];
    let times: [&[f64]; 3] = [&[0.05, 0.12, 0.2], &[0.1, 0.25, 0.4], &[0.5, 1.0, 5.0]];
    for (sol, ts) in sols.iter().zip(times) {
        for &t in ts {
            let r = sol.evolution_identity_residual(t).unwrap();
            assert!(r < 1e-12, "residual {r} at t = {t}");
        }
    }
    pass(11, "evolution identity of |A|^2 closes (1e-12)");
}

/// Criterion 12: the distance estimate is an equality on the sphere and
/// never violated on any oracle track.
#[test]
fn criterion_12_distance_estimate() {
    let sphere = exact_track(&sphere_solution(), StopCriterion::MaxSecondFormSq(1e4));
    let audit = diagnostics::distance_bound_audit(
        &sphere,
        &SpacetimePoint::new(Point3::origin(), 0.25),
        1e-6,
    )
    .unwrap();
    for s in &audit.slack {
        assert!(s.abs() < 1e-6, "sphere slack {s}");
    }
    assert!(audit.flagged.is_empty());

    let cylinder = exact_track(&cylinder_solution(), StopCriterion::MaxSecondFormSq(1e4));
    let audit = diagnostics::distance_bound_audit(
        &cylinder,
        &SpacetimePoint::new(Point3::origin(), 0.5),
        1e-6,
    )
    .unwrap();
    assert!(audit.flagged.is_empty());
    for s in &audit.slack {
        assert!(*s >= -1e-6, "cylinder slack {s}");
    }

    let plane = exact_track(&plane_solution(), StopCriterion::TimeMax(0.2));
    let audit = diagnostics::distance_bound_audit(
        &plane,
        &SpacetimePoint::new(Point3::origin(), 0.25),
        1e-6,
    )
    .unwrap();
    assert!(audit.flagged.is_empty());
    pass(12, "distance estimate: sphere equality, no violations");
}
