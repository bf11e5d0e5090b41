//! Triangle meshes and their discrete curvature estimators.
//!
//! Mean curvature comes from the cotangent Laplace-Beltrami operator applied
//! to vertex positions and normalized by mixed Voronoi areas (Meyer et al.,
//! "Discrete Differential-Geometry Operators for Triangulated 2-Manifolds").
//! Gaussian curvature uses the angle defect over the same vertex areas, and
//! the squared second fundamental form follows from |A|^2 = H^2 - 2K, which
//! holds for surfaces in R^3.
//!
//! Sign convention: H is the sum of principal curvatures, positive for a
//! sphere with outward normal, so -H nu points into a convex body.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

/// Face area below this fraction of the mean declares the mesh degenerate.
pub const DEGENERACY_FRACTION: f64 = 1e-12;

/// Closed (or bordered) triangle mesh at a fixed flow time.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
    time: f64,
    closed: bool,
    boundary_vertex: Vec<bool>,
}

impl TriMesh {
    /// Build and validate a mesh. Faces must be consistently oriented and
    /// every edge must belong to at most two faces (exactly two on a closed
    /// surface). Degenerate faces and isolated vertices are rejected.
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>, time: f64) -> Result<Self> {
        if vertices.len() < 4 {
            return Err(Error::Structural(format!(
                "mesh needs at least 4 vertices, got {}",
                vertices.len()
            )));
        }
        if !time.is_finite() {
            return Err(Error::Argument("mesh time must be finite".into()));
        }
        let nv = vertices.len();
        let mut referenced = vec![false; nv];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= nv {
                    return Err(Error::Structural(format!(
                        "face {fi} references vertex {v} out of range"
                    )));
                }
                referenced[v] = true;
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::Structural(format!("face {fi} repeats a vertex")));
            }
        }
        if let Some(v) = referenced.iter().position(|r| !r) {
            return Err(Error::Structural(format!("isolated vertex {v}")));
        }

        // Edge incidence: each directed edge at most once, each undirected
        // edge carried by one or two faces with opposite orientation.
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let e = (f[k], f[(k + 1) % 3]);
                if directed.insert(e, fi).is_some() {
                    return Err(Error::Structural(format!(
                        "directed edge ({},{}) appears twice: inconsistent orientation or non-manifold",
                        e.0, e.1
                    )));
                }
            }
        }
        let mut boundary_vertex = vec![false; nv];
        let mut closed = true;
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) {
                closed = false;
                boundary_vertex[a] = true;
                boundary_vertex[b] = true;
            }
        }

        let mesh = TriMesh { vertices, faces, time, closed, boundary_vertex };
        let areas: Vec<f64> = (0..mesh.faces.len()).map(|i| mesh.face_area(i)).collect();
        let mean = areas.iter().sum::<f64>() / areas.len().max(1) as f64;
        if let Some((fi, a)) = areas
            .iter()
            .enumerate()
            .find(|(_, &a)| a <= DEGENERACY_FRACTION * mean)
        {
            return Err(Error::Structural(format!(
                "degenerate face {fi}: area {a:.3e} <= {DEGENERACY_FRACTION:.0e} x mean {mean:.3e}"
            )));
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    /// True when every edge is shared by exactly two faces.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    /// Replace vertex positions without re-deriving connectivity. Degeneracy
    /// is re-checked; connectivity invariants are positional-independent.
    pub fn with_positions(&self, vertices: Vec<Point3<f64>>, time: f64) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::Argument("vertex count changed".into()));
        }
        let mesh = TriMesh {
            vertices,
            faces: self.faces.clone(),
            time,
            closed: self.closed,
            boundary_vertex: self.boundary_vertex.clone(),
        };
        let areas: Vec<f64> = (0..mesh.faces.len()).map(|i| mesh.face_area(i)).collect();
        let mean = areas.iter().sum::<f64>() / areas.len().max(1) as f64;
        if areas.iter().any(|&a| a <= DEGENERACY_FRACTION * mean) {
            return Err(Error::Structural("degenerate face after position update".into()));
        }
        Ok(mesh)
    }

    pub fn face_area(&self, fi: usize) -> f64 {
        let [a, b, c] = self.faces[fi];
        let ab = self.vertices[b] - self.vertices[a];
        let ac = self.vertices[c] - self.vertices[a];
        0.5 * ab.cross(&ac).norm()
    }

    pub fn face_normal(&self, fi: usize) -> Vector3<f64> {
        let [a, b, c] = self.faces[fi];
        let ab = self.vertices[b] - self.vertices[a];
        let ac = self.vertices[c] - self.vertices[a];
        let n = ab.cross(&ac);
        let len = n.norm();
        if len == 0.0 {
            Vector3::zeros()
        } else {
            n / len
        }
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|i| self.face_area(i)).sum()
    }

    pub fn mean_edge_length(&self) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                if a < b {
                    sum += (self.vertices[b] - self.vertices[a]).norm();
                    count += 1;
                }
            }
        }
        sum / count.max(1) as f64
    }

    pub fn min_edge_length(&self) -> f64 {
        let mut min = f64::INFINITY;
        for f in &self.faces {
            for k in 0..3 {
                let l = (self.vertices[f[(k + 1) % 3]] - self.vertices[f[k]]).norm();
                if l < min {
                    min = l;
                }
            }
        }
        min
    }

    /// Cotangent weight matrix L_w (positive semi-definite) and the mixed
    /// Voronoi vertex areas. (L_w x)_i = sum_j w_ij (x_i - x_j).
    pub fn cotan_matrix(&self) -> (CsrMatrix, Vec<f64>) {
        let geo = self.vertex_geometry_raw();
        (geo.laplacian, geo.vertex_area)
    }

    fn vertex_geometry_raw(&self) -> RawGeometry {
        let nv = self.vertices.len();
        let mut vertex_area = vec![0.0; nv];
        let mut angle_sum = vec![0.0; nv];
        let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(self.faces.len() * 12);
        let mut obtuse_fallbacks = 0usize;
        let mut voronoi_fallback = vec![false; nv];

        for f in &self.faces {
            let [ia, ib, ic] = *f;
            let pa = self.vertices[ia];
            let pb = self.vertices[ib];
            let pc = self.vertices[ic];
            let area = 0.5 * (pb - pa).cross(&(pc - pa)).norm();

            let ang_a = triangle_angle(&pa, &pb, &pc);
            let ang_b = triangle_angle(&pb, &pc, &pa);
            let ang_c = triangle_angle(&pc, &pa, &pb);
            angle_sum[ia] += ang_a;
            angle_sum[ib] += ang_b;
            angle_sum[ic] += ang_c;

            // cot of the angle opposite each edge
            let cot_a = cot(ang_a); // opposite edge (b, c)
            let cot_b = cot(ang_b); // opposite edge (c, a)
            let cot_c = cot(ang_c); // opposite edge (a, b)

            for &(i, j, w) in &[(ib, ic, cot_a), (ic, ia, cot_b), (ia, ib, cot_c)] {
                let half = 0.5 * w;
                triplets.push((i, j, -half));
                triplets.push((j, i, -half));
                triplets.push((i, i, half));
                triplets.push((j, j, half));
            }

            // mixed Voronoi area: obtuse triangles fall back to area fractions
            let obtuse = if ang_a > PI / 2.0 {
                Some(0)
            } else if ang_b > PI / 2.0 {
                Some(1)
            } else if ang_c > PI / 2.0 {
                Some(2)
            } else {
                None
            };
            match obtuse {
                None => {
                    // Voronoi contribution: (1/8)(|edge|^2 cot(opposite))
                    let l_bc = (pc - pb).norm_squared();
                    let l_ca = (pa - pc).norm_squared();
                    let l_ab = (pb - pa).norm_squared();
                    vertex_area[ia] += 0.125 * (l_ab * cot_c + l_ca * cot_b);
                    vertex_area[ib] += 0.125 * (l_bc * cot_a + l_ab * cot_c);
                    vertex_area[ic] += 0.125 * (l_ca * cot_b + l_bc * cot_a);
                }
                Some(k) => {
                    obtuse_fallbacks += 1;
                    for (local, &iv) in [ia, ib, ic].iter().enumerate() {
                        vertex_area[iv] += if local == k { area / 2.0 } else { area / 4.0 };
                        voronoi_fallback[iv] = true;
                    }
                }
            }
        }

        RawGeometry {
            laplacian: CsrMatrix::from_triplets(nv, &triplets),
            vertex_area,
            angle_sum,
            obtuse_fallbacks,
            voronoi_fallback,
        }
    }

    /// Per-vertex curvature quantities.
    pub fn vertex_geometry(&self) -> Result<MeshGeometry> {
        let raw = self.vertex_geometry_raw();
        let nv = self.vertices.len();

        // mean curvature vector: H_vec_i = -(L_w X)_i / A_i
        let xs: Vec<f64> = self.vertices.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = self.vertices.iter().map(|p| p.y).collect();
        let zs: Vec<f64> = self.vertices.iter().map(|p| p.z).collect();
        let mut lx = vec![0.0; nv];
        let mut ly = vec![0.0; nv];
        let mut lz = vec![0.0; nv];
        raw.laplacian.mul_vec(&xs, &mut lx);
        raw.laplacian.mul_vec(&ys, &mut ly);
        raw.laplacian.mul_vec(&zs, &mut lz);

        // angle-weighted vertex normals
        let mut normals = vec![Vector3::zeros(); nv];
        for f in &self.faces {
            let [ia, ib, ic] = *f;
            let n = {
                let ab = self.vertices[ib] - self.vertices[ia];
                let ac = self.vertices[ic] - self.vertices[ia];
                ab.cross(&ac)
            };
            let len = n.norm();
            if len == 0.0 {
                continue;
            }
            let unit = n / len;
            let pa = self.vertices[ia];
            let pb = self.vertices[ib];
            let pc = self.vertices[ic];
            normals[ia] += triangle_angle(&pa, &pb, &pc) * unit;
            normals[ib] += triangle_angle(&pb, &pc, &pa) * unit;
            normals[ic] += triangle_angle(&pc, &pa, &pb) * unit;
        }

        let mut mean_curvature = vec![0.0; nv];
        let mut gauss = vec![0.0; nv];
        let mut a2 = vec![0.0; nv];
        let mut clamp_count = 0usize;
        for i in 0..nv {
            let area = raw.vertex_area[i];
            if area <= 0.0 {
                return Err(Error::Structural(format!("vertex {i} has vanishing area")));
            }
            let nlen = normals[i].norm();
            if nlen == 0.0 {
                return Err(Error::Structural(format!("vertex {i} has no usable normal")));
            }
            normals[i] /= nlen;

            let hvec = Vector3::new(-lx[i], -ly[i], -lz[i]) / area;
            // H_vec = -H nu, so project onto the outward normal with a sign flip
            let h = -hvec.dot(&normals[i]);
            mean_curvature[i] = h;

            let defect = 2.0 * PI - raw.angle_sum[i];
            let k = if self.boundary_vertex[i] { 0.0 } else { defect / area };
            gauss[i] = k;

            let v = h * h - 2.0 * k;
            if v < 0.0 {
                clamp_count += 1;
                a2[i] = 0.0;
            } else {
                a2[i] = v;
            }
        }

        Ok(MeshGeometry {
            normals,
            mean_curvature,
            gauss,
            second_form_sq: a2,
            vertex_area: raw.vertex_area,
            obtuse_fallbacks: raw.obtuse_fallbacks,
            voronoi_fallback: raw.voronoi_fallback,
            a2_clamp_count: clamp_count,
        })
    }

    /// Quadrature samples: the three edge-midpoint nodes per face, each with
    /// weight area/3 (degree-2 exact). Vertex quantities are interpolated.
    pub fn quadrature_samples(&self, geo: &MeshGeometry) -> Vec<super::GeometrySample> {
        let mut out = Vec::with_capacity(self.faces.len() * 3);
        for (fi, f) in self.faces.iter().enumerate() {
            let [ia, ib, ic] = *f;
            let area = self.face_area(fi);
            let w = area / 3.0;
            let n = self.face_normal(fi);
            let pts = [
                (ia, ib, 0.5, 0.5, 0.0),
                (ib, ic, 0.0, 0.5, 0.5),
                (ic, ia, 0.5, 0.0, 0.5),
            ];
            for &(_, _, wa, wb, wc) in &pts {
                let pos = Point3::from(
                    self.vertices[ia].coords * wa
                        + self.vertices[ib].coords * wb
                        + self.vertices[ic].coords * wc,
                );
                let h = wa * geo.mean_curvature[ia]
                    + wb * geo.mean_curvature[ib]
                    + wc * geo.mean_curvature[ic];
                let a2 = wa * geo.second_form_sq[ia]
                    + wb * geo.second_form_sq[ib]
                    + wc * geo.second_form_sq[ic];
                out.push(super::GeometrySample {
                    position: pos,
                    weight: w,
                    normal: n,
                    mean_curvature: h,
                    second_form_sq: a2,
                });
            }
        }
        out
    }

    /// Quadrature samples of the part of the mesh inside B(center, radius).
    /// Straddling faces are subdivided `depth` times and leaf triangles are
    /// weighted by the fraction of their corners inside, which keeps the
    /// clipped area conservative and monotone in the radius.
    pub fn restricted_samples(
        &self,
        geo: &MeshGeometry,
        center: &Point3<f64>,
        radius: f64,
        depth: u32,
    ) -> Result<Vec<super::GeometrySample>> {
        if radius <= 0.0 {
            return Err(Error::Argument(format!("ball radius must be positive, got {radius}")));
        }
        let r2 = radius * radius;
        let inside = |p: &Point3<f64>| (p - center).norm_squared() <= r2;
        let mut out = Vec::new();
        for (fi, f) in self.faces.iter().enumerate() {
            let [ia, ib, ic] = *f;
            let corners = [self.vertices[ia], self.vertices[ib], self.vertices[ic]];
            let vals = [
                (geo.mean_curvature[ia], geo.second_form_sq[ia]),
                (geo.mean_curvature[ib], geo.second_form_sq[ib]),
                (geo.mean_curvature[ic], geo.second_form_sq[ic]),
            ];
            let n_inside = corners.iter().filter(|p| inside(p)).count();
            let normal = self.face_normal(fi);
            if n_inside == 3 {
                // fully inside: reuse the standard 3-point rule on this face
                push_face_samples(&corners, &vals, normal, &mut out);
            } else {
                // quick reject: face plane farther than radius from center
                let d_min = corners
                    .iter()
                    .map(|p| (p - center).norm())
                    .fold(f64::INFINITY, f64::min);
                let max_edge = (0..3)
                    .map(|k| (corners[(k + 1) % 3] - corners[k]).norm())
                    .fold(0.0, f64::max);
                if n_inside == 0 && d_min > radius + max_edge {
                    continue;
                }
                subdivide_clip(&corners, &vals, normal, center, radius, depth, &mut out);
            }
        }
        Ok(out)
    }

    /// Minimum distance from a point to the mesh vertices.
    pub fn distance_to_point(&self, p: &Point3<f64>) -> f64 {
        self.vertices
            .iter()
            .map(|v| (v - p).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

struct RawGeometry {
    laplacian: CsrMatrix,
    vertex_area: Vec<f64>,
    angle_sum: Vec<f64>,
    obtuse_fallbacks: usize,
    voronoi_fallback: Vec<bool>,
}

/// Per-vertex discrete curvature data.
#[derive(Debug, Clone)]
pub struct MeshGeometry {
    pub normals: Vec<Vector3<f64>>,
    pub mean_curvature: Vec<f64>,
    pub gauss: Vec<f64>,
    pub second_form_sq: Vec<f64>,
    pub vertex_area: Vec<f64>,
    /// Number of faces where the Voronoi area fell back to area fractions.
    pub obtuse_fallbacks: usize,
    /// Per-vertex record of the obtuse-triangle area fallback.
    pub voronoi_fallback: Vec<bool>,
    /// Number of vertices where H^2 - 2K < 0 was clamped to zero.
    pub a2_clamp_count: usize,
}

impl MeshGeometry {
    pub fn max_second_form_sq(&self) -> f64 {
        self.second_form_sq.iter().cloned().fold(0.0, f64::max)
    }
}

fn triangle_angle(at: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> f64 {
    let u = b - at;
    let v = c - at;
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (u.dot(&v) / (nu * nv)).clamp(-1.0, 1.0).acos()
}

fn cot(angle: f64) -> f64 {
    let s = angle.sin();
    if s.abs() < 1e-300 {
        0.0
    } else {
        angle.cos() / s
    }
}

fn push_face_samples(
    corners: &[Point3<f64>; 3],
    vals: &[(f64, f64); 3],
    normal: Vector3<f64>,
    out: &mut Vec<super::GeometrySample>,
) {
    let area = 0.5 * (corners[1] - corners[0]).cross(&(corners[2] - corners[0])).norm();
    let w = area / 3.0;
    let mids = [(0usize, 1usize), (1, 2), (2, 0)];
    for &(i, j) in &mids {
        let pos = Point3::from((corners[i].coords + corners[j].coords) * 0.5);
        let h = 0.5 * (vals[i].0 + vals[j].0);
        let a2 = 0.5 * (vals[i].1 + vals[j].1);
        out.push(super::GeometrySample {
            position: pos,
            weight: w,
            normal,
            mean_curvature: h,
            second_form_sq: a2,
        });
    }
}

fn subdivide_clip(
    corners: &[Point3<f64>; 3],
    vals: &[(f64, f64); 3],
    normal: Vector3<f64>,
    center: &Point3<f64>,
    radius: f64,
    depth: u32,
    out: &mut Vec<super::GeometrySample>,
) {
    let r2 = radius * radius;
    let n_inside = corners
        .iter()
        .filter(|p| (*p - center).norm_squared() <= r2)
        .count();
    if n_inside == 0 && depth == 0 {
        return;
    }
    if depth == 0 {
        // leaf: count by corner fraction -- conservative (never exceeds area)
        let area = 0.5 * (corners[1] - corners[0]).cross(&(corners[2] - corners[0])).norm();
        let frac = n_inside as f64 / 3.0;
        if frac > 0.0 {
            let pos = Point3::from(
                (corners[0].coords + corners[1].coords + corners[2].coords) / 3.0,
            );
            let h = (vals[0].0 + vals[1].0 + vals[2].0) / 3.0;
            let a2 = (vals[0].1 + vals[1].1 + vals[2].1) / 3.0;
            out.push(super::GeometrySample {
                position: pos,
                weight: area * frac,
                normal,
                mean_curvature: h,
                second_form_sq: a2,
            });
        }
        return;
    }
    if n_inside == 3 {
        push_face_samples(corners, vals, normal, out);
        return;
    }
    // quick reject for far-away sub-triangles
    let d_min = corners
        .iter()
        .map(|p| (p - center).norm())
        .fold(f64::INFINITY, f64::min);
    let max_edge = (0..3)
        .map(|k| (corners[(k + 1) % 3] - corners[k]).norm())
        .fold(0.0, f64::max);
    if n_inside == 0 && d_min > radius + max_edge {
        return;
    }

    let m01 = Point3::from((corners[0].coords + corners[1].coords) * 0.5);
    let m12 = Point3::from((corners[1].coords + corners[2].coords) * 0.5);
    let m20 = Point3::from((corners[2].coords + corners[0].coords) * 0.5);
    let v01 = mid_vals(vals[0], vals[1]);
    let v12 = mid_vals(vals[1], vals[2]);
    let v20 = mid_vals(vals[2], vals[0]);
    let subs: [([Point3<f64>; 3], [(f64, f64); 3]); 4] = [
        ([corners[0], m01, m20], [vals[0], v01, v20]),
        ([m01, corners[1], m12], [v01, vals[1], v12]),
        ([m20, m12, corners[2]], [v20, v12, vals[2]]),
        ([m01, m12, m20], [v01, v12, v20]),
    ];
    for (c, v) in &subs {
        subdivide_clip(c, v, normal, center, radius, depth - 1, out);
    }
}

fn mid_vals(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1))
}

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

/// Icosphere: subdivided icosahedron projected onto the sphere.
pub fn icosphere(center: Point3<f64>, radius: f64, subdivisions: u32, time: f64) -> TriMesh {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut verts: Vec<Vector3<f64>> = vec![
        Vector3::new(-1.0, phi, 0.0),
        Vector3::new(1.0, phi, 0.0),
        Vector3::new(-1.0, -phi, 0.0),
        Vector3::new(1.0, -phi, 0.0),
        Vector3::new(0.0, -1.0, phi),
        Vector3::new(0.0, 1.0, phi),
        Vector3::new(0.0, -1.0, -phi),
        Vector3::new(0.0, 1.0, -phi),
        Vector3::new(phi, 0.0, -1.0),
        Vector3::new(phi, 0.0, 1.0),
        Vector3::new(-phi, 0.0, -1.0),
        Vector3::new(-phi, 0.0, 1.0),
    ];
    for v in verts.iter_mut() {
        v.normalize_mut();
    }
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    let m = (verts[a] + verts[b]).normalize();
                    verts.push(m);
                    verts.len() - 1
                });
            }
            new_faces.push([f[0], mid[0], mid[2]]);
            new_faces.push([f[1], mid[1], mid[0]]);
            new_faces.push([f[2], mid[2], mid[1]]);
            new_faces.push([mid[0], mid[1], mid[2]]);
        }
        faces = new_faces;
    }

    let vertices: Vec<Point3<f64>> = verts
        .into_iter()
        .map(|v| center + v * radius)
        .collect();
    TriMesh::new(vertices, faces, time).expect("icosphere construction is valid")
}

/// Flat rectangular patch in the z = z0 plane, (nx+1) x (ny+1) grid.
pub fn flat_patch(
    origin: Point3<f64>,
    width: f64,
    height: f64,
    nx: usize,
    ny: usize,
    time: f64,
) -> TriMesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point3::new(
                origin.x + width * i as f64 / nx as f64,
                origin.y + height * j as f64 / ny as f64,
                origin.z,
            ));
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::with_capacity(nx * ny * 2);
    for j in 0..ny {
        for i in 0..nx {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriMesh::new(vertices, faces, time).expect("flat patch construction is valid")
}

/// Capsule: cylinder of given radius about the x-axis with hemispherical
/// caps, centered at `center`. Used by the axisymmetric cross-check.
pub fn capsule(
    center: Point3<f64>,
    radius: f64,
    half_length: f64,
    segments: usize,
    rings_body: usize,
    rings_cap: usize,
    time: f64,
) -> TriMesh {
    assert!(segments >= 3 && rings_body >= 1 && rings_cap >= 1);
    // profile polyline in (x, r): left cap, body, right cap
    let mut profile: Vec<(f64, f64)> = Vec::new();
    for k in 0..=rings_cap {
        let a = -PI / 2.0 + (PI / 2.0) * k as f64 / rings_cap as f64;
        profile.push((-half_length + radius * a.sin(), radius * a.cos()));
    }
    for k in 1..=rings_body {
        profile.push((
            -half_length + 2.0 * half_length * k as f64 / rings_body as f64,
            radius,
        ));
    }
    for k in 1..=rings_cap {
        let a = (PI / 2.0) * k as f64 / rings_cap as f64;
        profile.push((half_length + radius * a.sin(), radius * a.cos()));
    }

    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let south = {
        vertices.push(center + Vector3::new(profile[0].0, 0.0, 0.0));
        0usize
    };
    let mut ring_start: Vec<usize> = Vec::new();
    for &(x, r) in &profile[1..profile.len() - 1] {
        ring_start.push(vertices.len());
        for s in 0..segments {
            let th = 2.0 * PI * s as f64 / segments as f64;
            vertices.push(center + Vector3::new(x, r * th.cos(), r * th.sin()));
        }
    }
    let north = {
        vertices.push(center + Vector3::new(profile[profile.len() - 1].0, 0.0, 0.0));
        vertices.len() - 1
    };

    let mut faces: Vec<[usize; 3]> = Vec::new();
    // south fan (outward orientation: normal points away from the axis)
    let first = ring_start[0];
    for s in 0..segments {
        let a = first + s;
        let b = first + (s + 1) % segments;
        faces.push([south, b, a]);
    }
    for w in ring_start.windows(2) {
        let (r0, r1) = (w[0], w[1]);
        for s in 0..segments {
            let s1 = (s + 1) % segments;
            faces.push([r0 + s, r1 + s1, r1 + s]);
            faces.push([r0 + s, r0 + s1, r1 + s1]);
        }
    }
    let last = *ring_start.last().unwrap();
    for s in 0..segments {
        let a = last + s;
        let b = last + (s + 1) % segments;
        faces.push([north, a, b]);
    }
    TriMesh::new(vertices, faces, time).expect("capsule construction is valid")
}
