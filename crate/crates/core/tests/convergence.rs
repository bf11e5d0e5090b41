//! Grid- and step-refinement behavior of the discrete operators.

use mcf_core::exact::{ExactSolution, SamplingMode, ShrinkingSphere};
use mcf_core::flow::step_semi_implicit;
use mcf_core::geometry::mesh::icosphere;
use mcf_core::geometry::SurfaceState;
use nalgebra::Point3;

/// Max relative error of H against n/r drops by >= 2x per subdivision.
#[test]
fn mean_curvature_order_on_icospheres() {
    let mut errors = Vec::new();
    for k in [3u32, 4, 5] {
        let mesh = icosphere(Point3::origin(), 1.0, k, 0.0);
        let geo = mesh.vertex_geometry().unwrap();
        let err = geo
            .mean_curvature
            .iter()
            .map(|h| (h - 2.0).abs() / 2.0)
            .fold(0.0f64, f64::max);
        errors.push(err);
    }
    for w in errors.windows(2) {
        assert!(
            w[0] / w[1] >= 2.0,
            "H error should drop by >= 2x per subdivision: {errors:?}"
        );
    }
}

/// Doubling mesh resolution shrinks the density quadrature error by >= 3x.
#[test]
fn density_quadrature_refinement() {
    let sol = ShrinkingSphere::new(Point3::origin(), 1.0, 2).unwrap();
    let t = 0.1;
    let tau = sol.extinction_time() - t;
    let exact = ExactSolution::Sphere(sol.clone())
        .sample_state(t, SamplingMode::Analytic)
        .unwrap()
        .kernel_integral(&Point3::origin(), tau)
        .unwrap();
    let mut errors = Vec::new();
    for k in [3u32, 4, 5] {
        let state = ExactSolution::Sphere(sol.clone())
            .sample_state(t, SamplingMode::Mesh(k))
            .unwrap();
        let v = state.kernel_integral(&Point3::origin(), tau).unwrap();
        errors.push((v - exact).abs());
    }
    for w in errors.windows(2) {
        assert!(
            w[0] / w[1] >= 3.0,
            "quadrature error should drop by >= 3x per refinement: {errors:?}"
        );
    }
}

/// First-order stepping: halving dt halves the radius-law error.
#[test]
fn dt_convergence_on_sphere() {
    let run = |dt: f64| -> f64 {
        let mut mesh = icosphere(Point3::origin(), 1.0, 3, 0.0);
        let t_end = 0.04;
        let steps = (t_end / dt).round() as usize;
        for _ in 0..steps {
            mesh = step_semi_implicit(&mesh, dt).unwrap().mesh;
        }
        let mean_r: f64 = mesh
            .vertices()
            .iter()
            .map(|p| p.coords.norm())
            .sum::<f64>()
            / mesh.vertices().len() as f64;
        mean_r
    };
    // compare against the finest run instead of the closed form so the
    // mesh-operator bias cancels and the dt error is isolated
    let reference = run(2.5e-4);
    let e1 = (run(4e-3) - reference).abs();
    let e2 = (run(2e-3) - reference).abs();
    let e3 = (run(1e-3) - reference).abs();
    assert!(e1 / e2 > 1.7 && e1 / e2 < 2.4, "ratios {} {}", e1 / e2, e2 / e3);
    assert!(e2 / e3 > 1.7 && e2 / e3 < 2.6, "ratios {} {}", e1 / e2, e2 / e3);
}

/// The |A|^2 >= H^2/2 pointwise bound holds with 3% discretization slack.
#[test]
fn cauchy_schwarz_bound_on_exact_meshes() {
    for (mesh, label) in [
        (icosphere(Point3::origin(), 1.0, 4, 0.0), "sphere"),
        (icosphere(Point3::new(0.4, -0.2, 0.7), 0.6, 3, 0.0), "small sphere"),
    ] {
        let geo = mesh.vertex_geometry().unwrap();
        for i in 0..mesh.vertices().len() {
            let h2 = geo.mean_curvature[i] * geo.mean_curvature[i];
            assert!(
                geo.second_form_sq[i] >= h2 / 2.0 * (1.0 - 0.03),
                "{label} vertex {i}: |A|^2 = {} < H^2/2 = {}",
                geo.second_form_sq[i],
                h2 / 2.0
            );
        }
    }
}

/// Integral additivity: a partition of the faces integrates to the whole.
#[test]
fn surface_integral_additivity() {
    let mesh = icosphere(Point3::origin(), 1.0, 3, 0.0);
    let f = |p: &Point3<f64>| 1.0 + p.x * p.x + 0.3 * p.y - 0.2 * p.z * p.x;
    let state = SurfaceState::from_mesh(mesh.clone());
    let whole = state.surface_integral(f).unwrap();

    // split the face list in two, rebuild meshes that share the vertex set
    let faces = mesh.faces();
    let half = faces.len() / 2;
    let mut acc = 0.0;
    for part in [&faces[..half], &faces[half..]] {
        // integrate the part directly with the same 3-point rule
        let geo = mesh.vertex_geometry().unwrap();
        let samples = mesh.quadrature_samples(&geo);
        // samples come in face order, three per face
        let range = if std::ptr::eq(part.as_ptr(), faces.as_ptr()) {
            0..half * 3
        } else {
            half * 3..faces.len() * 3
        };
        acc += samples[range]
            .iter()
            .map(|s| s.weight * f(&s.position))
            .sum::<f64>();
    }
    let rel = (acc - whole).abs() / whole.abs();
    assert!(rel < 1e-10, "partition sum differs: {rel:.3e}");
}
