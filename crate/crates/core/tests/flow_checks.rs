//! Flow-level invariants: area monotonicity, the distance estimate on
//! simulated tracks, and the axisymmetric/mesh cross-check.

use mcf_core::flow::{detect_singularity, run_until, DtPolicy, StopCriterion, FIT_WINDOW};
use mcf_core::geometry::axisym::uniform_grid;
use mcf_core::geometry::mesh::{capsule, icosphere};
use mcf_core::geometry::{AxisymProfile, BoundaryKind, SurfaceState};
use nalgebra::Point3;

#[test]
fn area_strictly_decreases_on_simulated_sphere() {
    let state = SurfaceState::from_mesh(icosphere(Point3::origin(), 1.0, 3, 0.0));
    let track = run_until(
        &state,
        StopCriterion::MaxSecondFormSq(100.0),
        &DtPolicy { c_mesh: None, ..DtPolicy::default() },
    )
    .unwrap();
    for w in track.summaries().windows(2) {
        assert!(
            w[1].area < w[0].area * (1.0 + 1e-3),
            "area rose: {} -> {}",
            w[0].area,
            w[1].area
        );
    }
}

#[test]
fn avoidance_of_future_on_simulated_sphere() {
    // dist(M_t, center) <= sqrt(2n (T_est - t)) + 1% once T_est stabilizes
    let state = SurfaceState::from_mesh(icosphere(Point3::origin(), 1.0, 3, 0.0));
    let track = run_until(
        &state,
        StopCriterion::MaxSecondFormSq(1e3),
        &DtPolicy { c_mesh: None, ..DtPolicy::default() },
    )
    .unwrap();
    let est = detect_singularity(&track, FIT_WINDOW).unwrap();
    for (s, st) in track.summaries().iter().zip(track.states()) {
        if s.time >= est.t_est {
            continue;
        }
        let bound = (4.0 * (est.t_est - s.time)).sqrt();
        let d = st.distance_to_point(&Point3::origin());
        assert!(
            d <= bound * 1.01,
            "t = {}: dist {d} exceeds bound {bound}",
            s.time
        );
    }
}

/// The same cylinder evolved as a profile and as a capsule mesh keeps the
/// mid-section radius histories within 1% while both stay valid.
#[test]
fn axisym_and_mesh_cylinder_agree() {
    let r0 = 1.0;
    let half_len = 3.0;
    let t_end = 0.3;

    // profile path
    let n = 257;
    let profile = AxisymProfile::new(
        uniform_grid(-half_len, half_len, n),
        vec![r0; n],
        BoundaryKind::Reflecting,
        0.0,
    )
    .unwrap();
    let ptrack = run_until(
        &SurfaceState::from_profile(profile),
        StopCriterion::TimeMax(t_end),
        &DtPolicy { c_stab: 0.02, c_mesh: None, ..DtPolicy::default() },
    )
    .unwrap();

    // capsule mesh path: hemispherical caps far from the middle
    let mesh = capsule(Point3::origin(), r0, half_len, 48, 96, 12, 0.0);
    let mtrack = run_until(
        &SurfaceState::from_mesh(mesh),
        StopCriterion::TimeMax(t_end),
        &DtPolicy { c_stab: 0.02, c_mesh: None, ..DtPolicy::default() },
    )
    .unwrap();

    // compare mid-section radii at the mesh snapshot times
    for (s, st) in mtrack.summaries().iter().zip(mtrack.states()) {
        let mesh = st.as_mesh().unwrap();
        // mid-section = vertices with |x| < 0.3
        let mut acc = 0.0;
        let mut cnt = 0usize;
        for v in mesh.vertices() {
            if v.x.abs() < 0.3 {
                acc += (v.y * v.y + v.z * v.z).sqrt();
                cnt += 1;
            }
        }
        let mesh_r = acc / cnt as f64;

        // profile radius at the nearest snapshot time
        let (k, k1, lam) = ptrack.bracket(s.time.min(ptrack.last_time())).unwrap();
        let pr_a = ptrack.states()[k].as_profile().unwrap();
        let pr_b = ptrack.states()[k1].as_profile().unwrap();
        let mid = pr_a.grid().len() / 2;
        let prof_r = pr_a.radii()[mid] * (1.0 - lam) + pr_b.radii()[mid] * lam;

        let rel = (mesh_r - prof_r).abs() / prof_r;
        assert!(
            rel < 0.01,
            "t = {}: mesh radius {mesh_r} vs profile {prof_r} ({rel:.4})",
            s.time
        );
    }
}

/// The optional refinement pass keeps an anisotropic mesh flowing: the
/// stretched sphere acquires long edges that the split/flip pass resolves,
/// and the track still reaches the curvature threshold as a manifold.
#[test]
fn remesh_pass_keeps_stretched_sphere_valid() {
    let m = icosphere(Point3::origin(), 1.0, 2, 0.0);
    let stretched: Vec<Point3<f64>> = m
        .vertices()
        .iter()
        .map(|p| Point3::new(p.x, p.y, 1.9 * p.z))
        .collect();
    let m = m.with_positions(stretched, 0.0).unwrap();
    let state = SurfaceState::from_mesh(m);
    let policy = DtPolicy {
        c_stab: 0.05,
        c_mesh: None,
        remesh_factor: Some(1.8),
        ..DtPolicy::default()
    };
    let track = run_until(&state, StopCriterion::MaxSecondFormSq(200.0), &policy).unwrap();
    assert!(matches!(
        track.stop_reason(),
        mcf_core::flow::StopReason::CurvatureThreshold
    ));
    for st in track.states() {
        let mesh = st.as_mesh().unwrap();
        assert!(mesh.is_closed());
    }
    // the pass actually fired: some snapshot gained vertices
    let first = track.states()[0].as_mesh().unwrap().vertices().len();
    let grew = track
        .states()
        .iter()
        .any(|s| s.as_mesh().unwrap().vertices().len() > first);
    assert!(grew, "refinement never triggered");
}

#[test]
fn flat_patch_track_is_static() {
    let patch = mcf_core::geometry::mesh::flat_patch(Point3::origin(), 1.0, 1.0, 6, 6, 0.0);
    let state = SurfaceState::from_mesh(patch);
    let track = run_until(
        &state,
        StopCriterion::TimeMax(1.0),
        &DtPolicy { c_mesh: None, ..DtPolicy::default() },
    )
    .unwrap();
    assert!(matches!(
        track.stop_reason(),
        mcf_core::flow::StopReason::TimeReached
    ));
    let first = track.states()[0].as_mesh().unwrap();
    let last = track.states().last().unwrap().as_mesh().unwrap();
    for (a, b) in first.vertices().iter().zip(last.vertices()) {
        assert!((a - b).norm() < 1e-9);
    }
}

#[test]
fn exact_run_rejects_times_past_extinction() {
    use mcf_core::exact::{ExactSolution, SamplingMode, ShrinkingSphere};
    let sol = ExactSolution::Sphere(ShrinkingSphere::new(Point3::origin(), 1.0, 2).unwrap());
    let err = mcf_core::flow::run_exact(
        &sol,
        0.0,
        StopCriterion::TimeMax(0.3),
        &DtPolicy::default(),
        SamplingMode::Analytic,
    )
    .unwrap_err();
    assert!(err.to_string().contains("extinction"), "{err}");
}

#[test]
fn norm_time_bounds_are_enforced() {
    use mcf_core::exact::{ExactSolution, SamplingMode, ShrinkingSphere};
    let sol = ExactSolution::Sphere(ShrinkingSphere::new(Point3::origin(), 1.0, 2).unwrap());
    let track = mcf_core::flow::run_exact(
        &sol,
        0.0,
        StopCriterion::TimeMax(0.2),
        &DtPolicy::default(),
        SamplingMode::Analytic,
    )
    .unwrap();
    assert!(mcf_core::diagnostics::spacetime_h_norm(&track, 4.0, 0.24).is_err());
    let state = &track.states()[0];
    assert!(state.restricted_area(&Point3::origin(), 0.0).is_err());
    assert!(state.restricted_area(&Point3::origin(), -1.0).is_err());
}
