//! Semi-implicit mesh stepping: backward Euler in the cotangent
//! Laplace-Beltrami operator.
//!
//! One step solves (Id + dt L_t) X_new = X_old with L_t = D^{-1} L_w the
//! area-normalized cotangent operator assembled on the current mesh. The
//! solve is done in the symmetric form (D + dt L_w) X_new = D X_old with
//! Jacobi-preconditioned conjugate gradients. Boundary vertices (open
//! patches) are held fixed.

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geometry::TriMesh;
use crate::linalg::{conjugate_gradient, CsrMatrix};

/// Solver tolerance; the contract demands relative residual < 1e-10.
const SOLVE_TOL: f64 = 1e-12;
const MAX_CG_ITERS: usize = 10_000;

/// Outcome of one semi-implicit step.
pub struct MeshStep {
    pub mesh: TriMesh,
    /// Relative residual of (Id + dt L) X_new = X_old, maxed over coordinates.
    pub residual: f64,
}

pub fn step_semi_implicit(mesh: &TriMesh, dt: f64) -> Result<MeshStep> {
    if dt <= 0.0 {
        return Err(Error::Argument(format!("dt must be positive, got {dt}")));
    }
    let (l_w, areas) = mesh.cotan_matrix();
    let n = mesh.vertices().len();

    // (D + dt L_w) with Dirichlet rows for boundary vertices
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(n * 8);
    let fixed: Vec<bool> = (0..n).map(|i| mesh.is_boundary_vertex(i)).collect();
    for i in 0..n {
        if fixed[i] {
            triplets.push((i, i, 1.0));
        } else {
            triplets.push((i, i, areas[i]));
        }
    }
    // add dt * L_w restricted to free rows; fixed columns move to the rhs
    let mut rhs_fix = vec![[0.0; 3]; n];
    for i in 0..n {
        if fixed[i] {
            continue;
        }
        for (j, v) in l_w.row_entries(i) {
            if fixed[j] {
                let p = mesh.vertices()[j];
                rhs_fix[i][0] -= dt * v * p.x;
                rhs_fix[i][1] -= dt * v * p.y;
                rhs_fix[i][2] -= dt * v * p.z;
            } else {
                triplets.push((i, j, dt * v));
            }
        }
    }
    let a = CsrMatrix::from_triplets(n, &triplets);

    let mut new_coords = vec![Point3::origin(); n];
    let mut residual: f64 = 0.0;
    for axis in 0..3 {
        let old: Vec<f64> = mesh
            .vertices()
            .iter()
            .map(|p| match axis {
                0 => p.x,
                1 => p.y,
                _ => p.z,
            })
            .collect();
        let b: Vec<f64> = (0..n)
            .map(|i| {
                if fixed[i] {
                    old[i]
                } else {
                    areas[i] * old[i] + rhs_fix[i][axis]
                }
            })
            .collect();

        // residual of the normalized system (Id + dt D^{-1} L_w) x = old;
        // small vertex areas amplify it, so tighten the solve if needed
        let normalized_residual = |x: &[f64]| {
            let mut ax = vec![0.0; n];
            a.mul_vec(x, &mut ax);
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..n {
                let scale = if fixed[i] { 1.0 } else { areas[i] };
                let r = (ax[i] - b[i]) / scale;
                num += r * r;
                den += old[i] * old[i];
            }
            (num / den.max(f64::MIN_POSITIVE)).sqrt()
        };
        let (mut x, _) = conjugate_gradient(&a, &b, &old, SOLVE_TOL, MAX_CG_ITERS)?;
        let mut res = normalized_residual(&x);
        if res > 1e-11 {
            let (xt, _) = conjugate_gradient(&a, &b, &x, SOLVE_TOL * 1e-3, MAX_CG_ITERS)?;
            x = xt;
            res = normalized_residual(&x);
        }
        residual = residual.max(res);

        for i in 0..n {
            match axis {
                0 => new_coords[i].x = x[i],
                1 => new_coords[i].y = x[i],
                _ => new_coords[i].z = x[i],
            }
        }
    }
    if residual > 1e-10 {
        return Err(Error::Step(format!(
            "linear solve residual {residual:.3e} exceeds 1e-10"
        )));
    }

    let mesh = mesh.with_positions(new_coords, mesh.time() + dt)?;
    Ok(MeshStep { mesh, residual })
}

/// Split edges longer than `factor` times the mean edge length at their
/// midpoint and flip edges violating the local Delaunay criterion.
/// Off by default; near-singular mesh degradation is an accepted stop.
pub fn refine_mesh(mesh: &TriMesh, factor: f64) -> Result<TriMesh> {
    if factor <= 1.0 {
        return Err(Error::Argument("refinement factor must exceed 1".into()));
    }
    let mut verts = mesh.vertices().to_vec();
    let mut faces = mesh.faces().to_vec();
    let mean = mesh.mean_edge_length();
    let threshold = factor * mean;

    // long-edge split: one pass
    let mut edge_mid: std::collections::HashMap<(usize, usize), usize> =
        std::collections::HashMap::new();
    let mut new_faces: Vec<[usize; 3]> = Vec::with_capacity(faces.len());
    for f in &faces {
        let mut mids = [None; 3];
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            if (verts[b] - verts[a]).norm() > threshold {
                let key = (a.min(b), a.max(b));
                let m = *edge_mid.entry(key).or_insert_with(|| {
                    verts.push(Point3::from((verts[a].coords + verts[b].coords) * 0.5));
                    verts.len() - 1
                });
                mids[k] = Some(m);
            }
        }
        subdivide_face(*f, mids, &mut new_faces);
    }
    faces = new_faces;

    // Delaunay flips: bounded sweeps
    for _ in 0..3 {
        let mut flipped = false;
        let mut edge_faces: std::collections::HashMap<(usize, usize), Vec<usize>> =
            std::collections::HashMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                edge_faces.entry((a.min(b), a.max(b))).or_default().push(fi);
            }
        }
        let mut dead = vec![false; faces.len()];
        let keys: Vec<_> = edge_faces.keys().cloned().collect();
        for key in keys {
            let fs = &edge_faces[&key];
            if fs.len() != 2 || dead[fs[0]] || dead[fs[1]] {
                continue;
            }
            let (f0, f1) = (faces[fs[0]], faces[fs[1]]);
            let (a, b) = key;
            let c = *f0.iter().find(|&&v| v != a && v != b).unwrap();
            let d = *f1.iter().find(|&&v| v != a && v != b).unwrap();
            if c == d || edge_faces.contains_key(&(c.min(d), c.max(d))) {
                continue;
            }
            let ang_c = opposite_angle(&verts, c, a, b);
            let ang_d = opposite_angle(&verts, d, a, b);
            if ang_c + ang_d > std::f64::consts::PI + 1e-9 {
                // flip ab -> cd, preserving orientation from f0
                let f0v = faces[fs[0]];
                let pos_a = f0v.iter().position(|&v| v == a).unwrap();
                let after_a = f0v[(pos_a + 1) % 3];
                let (na, nb) = if after_a == b { (a, b) } else { (b, a) };
                faces[fs[0]] = [na, d, c];
                faces[fs[1]] = [nb, c, d];
                dead[fs[0]] = true;
                dead[fs[1]] = true;
                flipped = true;
            }
        }
        if !flipped {
            break;
        }
    }

    TriMesh::new(verts, faces, mesh.time())
}

fn subdivide_face(f: [usize; 3], mids: [Option<usize>; 3], out: &mut Vec<[usize; 3]>) {
    let count = mids.iter().filter(|m| m.is_some()).count();
    match count {
        0 => out.push(f),
        1 => {
            let k = mids.iter().position(|m| m.is_some()).unwrap();
            let m = mids[k].unwrap();
            let (a, b, c) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
            out.push([a, m, c]);
            out.push([m, b, c]);
        }
        2 => {
            let k = mids.iter().position(|m| m.is_none()).unwrap();
            // edges k+1 and k+2 are split
            let (a, b, c) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
            let m_bc = mids[(k + 1) % 3].unwrap();
            let m_ca = mids[(k + 2) % 3].unwrap();
            out.push([a, b, m_bc]);
            out.push([a, m_bc, m_ca]);
            out.push([m_ca, m_bc, c]);
        }
        _ => {
            let m01 = mids[0].unwrap();
            let m12 = mids[1].unwrap();
            let m20 = mids[2].unwrap();
            out.push([f[0], m01, m20]);
            out.push([f[1], m12, m01]);
            out.push([f[2], m20, m12]);
            out.push([m01, m12, m20]);
        }
    }
}

fn opposite_angle(verts: &[Point3<f64>], apex: usize, a: usize, b: usize) -> f64 {
    let u = verts[a] - verts[apex];
    let v = verts[b] - verts[apex];
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (u.dot(&v) / (nu * nv)).clamp(-1.0, 1.0).acos()
}
