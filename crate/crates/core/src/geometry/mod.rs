//! Surface representations and the geometric quantities every diagnostic
//! consumes: mean curvature, |A|^2, area elements, kernel-weighted
//! integrals and metric-ball restrictions.
//!
//! Three representations share one interface: triangle meshes (discrete
//! path), axisymmetric radius profiles (discrete path, surfaces of
//! revolution about the x-axis) and exact catalog surfaces (analytic path).
//! Every operation is a pure function of the state.

pub mod axisym;
pub mod exact_surface;
pub mod mesh;

use std::sync::OnceLock;

use nalgebra::{Point3, Vector3};

pub use axisym::{AxisymProfile, BoundaryKind, ProfileGeometry};
pub use exact_surface::{sphere_cap_area, unit_sphere_area, ExactSurface, KERNEL_EXP_CUTOFF};
pub use mesh::{MeshGeometry, TriMesh};

use crate::error::{Error, Result};

/// One quadrature node on a surface: position, weight (its share of the
/// area), outward normal and interpolated curvature data.
#[derive(Debug, Clone, Copy)]
pub struct GeometrySample {
    pub position: Point3<f64>,
    pub weight: f64,
    pub normal: Vector3<f64>,
    pub mean_curvature: f64,
    pub second_form_sq: f64,
}

/// How a number was produced: closed form or discrete quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    Discrete,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Analytic => write!(f, "analytic"),
            Provenance::Discrete => write!(f, "discrete"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Representation {
    Mesh(TriMesh),
    Profile(AxisymProfile),
    Exact(ExactSurface),
}

/// A hypersurface at one flow time.
#[derive(Debug, Clone)]
pub struct SurfaceState {
    time: f64,
    repr: Representation,
    mesh_geo: OnceLock<MeshGeometry>,
    profile_geo: OnceLock<ProfileGeometry>,
}

impl SurfaceState {
    pub fn from_mesh(mesh: TriMesh) -> Self {
        SurfaceState {
            time: mesh.time(),
            repr: Representation::Mesh(mesh),
            mesh_geo: OnceLock::new(),
            profile_geo: OnceLock::new(),
        }
    }

    pub fn from_profile(profile: AxisymProfile) -> Self {
        SurfaceState {
            time: profile.time(),
            repr: Representation::Profile(profile),
            mesh_geo: OnceLock::new(),
            profile_geo: OnceLock::new(),
        }
    }

    pub fn from_exact(surface: ExactSurface, time: f64) -> Self {
        SurfaceState {
            time,
            repr: Representation::Exact(surface),
            mesh_geo: OnceLock::new(),
            profile_geo: OnceLock::new(),
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn provenance(&self) -> Provenance {
        match self.repr {
            Representation::Exact(_) => Provenance::Analytic,
            _ => Provenance::Discrete,
        }
    }

    pub fn as_mesh(&self) -> Option<&TriMesh> {
        match &self.repr {
            Representation::Mesh(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_profile(&self) -> Option<&AxisymProfile> {
        match &self.repr {
            Representation::Profile(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_exact(&self) -> Option<&ExactSurface> {
        match &self.repr {
            Representation::Exact(e) => Some(e),
            _ => None,
        }
    }

    pub fn mesh_geometry(&self) -> Result<&MeshGeometry> {
        match &self.repr {
            Representation::Mesh(m) => {
                if let Some(g) = self.mesh_geo.get() {
                    return Ok(g);
                }
                let g = m.vertex_geometry()?;
                Ok(self.mesh_geo.get_or_init(|| g))
            }
            _ => Err(Error::Unsupported("state is not a mesh".into())),
        }
    }

    pub fn profile_geometry(&self) -> Result<&ProfileGeometry> {
        match &self.repr {
            Representation::Profile(p) => {
                Ok(self.profile_geo.get_or_init(|| p.node_geometry()))
            }
            _ => Err(Error::Unsupported("state is not a profile".into())),
        }
    }

    pub fn area(&self) -> Result<f64> {
        match &self.repr {
            Representation::Mesh(m) => Ok(m.total_area()),
            Representation::Profile(p) => Ok(p.total_area()),
            Representation::Exact(e) => e
                .area()
                .ok_or_else(|| Error::Unsupported("plane has unbounded area".into())),
        }
    }

    /// sup of |A|^2 over the surface.
    pub fn max_second_form_sq(&self) -> Result<f64> {
        match &self.repr {
            Representation::Mesh(_) => Ok(self.mesh_geometry()?.max_second_form_sq()),
            Representation::Profile(_) => Ok(self.profile_geometry()?.max_second_form_sq()),
            Representation::Exact(e) => Ok(e.second_form_sq()),
        }
    }

    /// Minimum profile radius; None for non-axisymmetric representations.
    pub fn min_radius(&self) -> Option<f64> {
        match &self.repr {
            Representation::Profile(p) => Some(p.min_radius()),
            _ => None,
        }
    }

    /// Per-location mean curvature and unit normal.
    pub fn mean_curvature(&self) -> Result<CurvatureData> {
        match &self.repr {
            Representation::Mesh(m) => {
                let geo = self.mesh_geometry()?;
                Ok(CurvatureData {
                    positions: m.vertices().to_vec(),
                    mean_curvature: geo.mean_curvature.clone(),
                    normals: geo.normals.clone(),
                })
            }
            Representation::Profile(p) => {
                let geo = self.profile_geometry()?;
                // representative point of each ring at angle 0
                let positions = (0..p.grid().len())
                    .map(|i| Point3::new(p.grid()[i], p.radii()[i], 0.0))
                    .collect();
                let normals = (0..p.grid().len())
                    .map(|i| {
                        Vector3::new(-geo.ux[i], 1.0, 0.0) / geo.arc_factor[i]
                    })
                    .collect();
                Ok(CurvatureData {
                    positions,
                    mean_curvature: geo.mean_curvature.clone(),
                    normals,
                })
            }
            Representation::Exact(e) => {
                let (p, n) = exact_representative(e);
                Ok(CurvatureData {
                    positions: vec![p],
                    mean_curvature: vec![e.mean_curvature()],
                    normals: vec![n],
                })
            }
        }
    }

    /// Per-location |A|^2 together with the number of clamped nodes.
    pub fn second_form_norm(&self) -> Result<(Vec<f64>, usize)> {
        match &self.repr {
            Representation::Mesh(_) => {
                let geo = self.mesh_geometry()?;
                Ok((geo.second_form_sq.clone(), geo.a2_clamp_count))
            }
            Representation::Profile(_) => {
                Ok((self.profile_geometry()?.second_form_sq.clone(), 0))
            }
            Representation::Exact(e) => Ok((vec![e.second_form_sq()], 0)),
        }
    }

    /// Integral of a scalar field over the surface.
    pub fn surface_integral<F: Fn(&Point3<f64>) -> f64>(&self, f: F) -> Result<f64> {
        match &self.repr {
            Representation::Mesh(m) => {
                let geo = self.mesh_geometry()?;
                Ok(m.quadrature_samples(geo)
                    .iter()
                    .map(|s| s.weight * f(&s.position))
                    .sum())
            }
            Representation::Profile(p) => Ok(p.integrate_field(f, 1e-11)),
            Representation::Exact(e) => e.integrate_field(f, 1e-11),
        }
    }

    /// Density-style kernel integral at time-to-blowup tau about y0.
    pub fn kernel_integral(&self, y0: &Point3<f64>, tau: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Err(Error::Argument(format!("tau must be positive, got {tau}")));
        }
        let pref = (4.0 * std::f64::consts::PI * tau).powf(-(self.dim() as f64) / 2.0);
        match &self.repr {
            Representation::Mesh(m) => {
                let geo = self.mesh_geometry()?;
                let mut acc = 0.0;
                for s in m.quadrature_samples(geo) {
                    let expo = -(s.position - y0).norm_squared() / (4.0 * tau);
                    if expo >= KERNEL_EXP_CUTOFF {
                        acc += s.weight * expo.exp();
                    }
                }
                Ok(pref * acc)
            }
            Representation::Profile(p) => Ok(profile_kernel_integral(p, y0, tau) * pref),
            Representation::Exact(e) => e.kernel_integral(y0, tau),
        }
    }

    /// Monotonicity dissipation: integral of rho (H - <x-y0, nu>/(2 tau))^2.
    pub fn dissipation_integral(&self, y0: &Point3<f64>, tau: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Err(Error::Argument(format!("tau must be positive, got {tau}")));
        }
        let pref = (4.0 * std::f64::consts::PI * tau).powf(-(self.dim() as f64) / 2.0);
        match &self.repr {
            Representation::Mesh(m) => {
                let geo = self.mesh_geometry()?;
                let mut acc = 0.0;
                for s in m.quadrature_samples(geo) {
                    let rel = s.position - y0;
                    let expo = -rel.norm_squared() / (4.0 * tau);
                    if expo >= KERNEL_EXP_CUTOFF {
                        let resid = s.mean_curvature - rel.dot(&s.normal) / (2.0 * tau);
                        acc += s.weight * expo.exp() * resid * resid;
                    }
                }
                Ok(pref * acc)
            }
            Representation::Profile(p) => {
                let geo = self.profile_geometry()?;
                Ok(profile_dissipation_integral(p, geo, y0, tau) * pref)
            }
            Representation::Exact(e) => e.dissipation_integral(y0, tau),
        }
    }

    /// integral of |A|^power over the surface.
    pub fn a2_power_integral(&self, power: f64) -> Result<f64> {
        match &self.repr {
            Representation::Mesh(m) => {
                let geo = self.mesh_geometry()?;
                Ok(m.quadrature_samples(geo)
                    .iter()
                    .map(|s| s.weight * s.second_form_sq.max(0.0).sqrt().powf(power))
                    .sum())
            }
            Representation::Profile(p) => {
                let geo = self.profile_geometry()?;
                Ok(p.integrate_axisymmetric(geo, |i| {
                    geo.second_form_sq[i].max(0.0).sqrt().powf(power)
                }))
            }
            Representation::Exact(e) => e.a2_power_integral(power),
        }
    }

    /// integral of |H|^power over the surface.
    pub fn h_power_integral(&self, power: f64) -> Result<f64> {
        match &self.repr {
            Representation::Mesh(m) => {
                let geo = self.mesh_geometry()?;
                Ok(m.quadrature_samples(geo)
                    .iter()
                    .map(|s| s.weight * s.mean_curvature.abs().powf(power))
                    .sum())
            }
            Representation::Profile(p) => {
                let geo = self.profile_geometry()?;
                Ok(p.integrate_axisymmetric(geo, |i| geo.mean_curvature[i].abs().powf(power)))
            }
            Representation::Exact(e) => e.h_power_integral(power),
        }
    }

    /// Area of the part of the surface inside B(x0, sigma).
    pub fn restricted_area(&self, x0: &Point3<f64>, sigma: f64) -> Result<f64> {
        self.restricted_a2_power_integral(x0, sigma, 0.0)
    }

    /// integral of |A|^power over the part inside B(x0, sigma).
    pub fn restricted_a2_power_integral(
        &self,
        x0: &Point3<f64>,
        sigma: f64,
        power: f64,
    ) -> Result<f64> {
        if sigma <= 0.0 {
            return Err(Error::Argument(format!("ball radius must be positive, got {sigma}")));
        }
        match &self.repr {
            Representation::Mesh(m) => {
                let geo = self.mesh_geometry()?;
                let samples = m.restricted_samples(geo, x0, sigma, 5)?;
                Ok(samples
                    .iter()
                    .map(|s| s.weight * s.second_form_sq.max(0.0).sqrt().powf(power))
                    .sum())
            }
            Representation::Profile(p) => {
                let geo = self.profile_geometry()?;
                Ok(profile_restricted_a2_power(p, geo, x0, sigma, power))
            }
            Representation::Exact(e) => {
                let area = e.restricted_area(x0, sigma)?;
                Ok(if power == 0.0 {
                    area
                } else {
                    e.second_form_sq().sqrt().powf(power) * area
                })
            }
        }
    }

    /// sup |A|^2 over the part inside B(x0, sigma); None when empty.
    pub fn restricted_sup_a2(&self, x0: &Point3<f64>, sigma: f64) -> Result<Option<f64>> {
        if sigma <= 0.0 {
            return Err(Error::Argument(format!("ball radius must be positive, got {sigma}")));
        }
        match &self.repr {
            Representation::Mesh(m) => {
                let geo = self.mesh_geometry()?;
                let r2 = sigma * sigma;
                let mut best: Option<f64> = None;
                for (i, v) in m.vertices().iter().enumerate() {
                    if (v - x0).norm_squared() <= r2 {
                        let a2 = geo.second_form_sq[i];
                        best = Some(best.map_or(a2, |b: f64| b.max(a2)));
                    }
                }
                Ok(best)
            }
            Representation::Profile(p) => {
                let geo = self.profile_geometry()?;
                let mut best: Option<f64> = None;
                for i in 0..p.grid().len() {
                    if p.ring_distance(i, x0) <= sigma {
                        let a2 = geo.second_form_sq[i];
                        best = Some(best.map_or(a2, |b: f64| b.max(a2)));
                    }
                }
                Ok(best)
            }
            Representation::Exact(e) => e.restricted_sup_a2(x0, sigma),
        }
    }

    /// Distance from y0 to the surface.
    pub fn distance_to_point(&self, y0: &Point3<f64>) -> f64 {
        match &self.repr {
            Representation::Mesh(m) => m.distance_to_point(y0),
            Representation::Profile(p) => p.distance_to_point(y0),
            Representation::Exact(e) => e.distance_to_point(y0),
        }
    }

    /// sup |A|^2 / H^2;  fails loudly when |H| dips below the floor.
    pub fn pinching_sup(&self, h_floor: f64) -> Result<f64> {
        match &self.repr {
            Representation::Mesh(m) => {
                let geo = self.mesh_geometry()?;
                let mut sup: f64 = 0.0;
                for i in 0..m.vertices().len() {
                    let h = geo.mean_curvature[i];
                    if h.abs() < h_floor {
                        return Err(Error::Argument(format!(
                            "mean curvature vanishes at vertex {i}: |H| = {:.3e} < {h_floor:.0e}",
                            h.abs()
                        )));
                    }
                    sup = sup.max(geo.second_form_sq[i] / (h * h));
                }
                Ok(sup)
            }
            Representation::Profile(p) => {
                let geo = self.profile_geometry()?;
                let mut sup: f64 = 0.0;
                for i in 0..p.grid().len() {
                    let h = geo.mean_curvature[i];
                    if h.abs() < h_floor {
                        return Err(Error::Argument(format!(
                            "mean curvature vanishes at node {i}: |H| = {:.3e} < {h_floor:.0e}",
                            h.abs()
                        )));
                    }
                    sup = sup.max(geo.second_form_sq[i] / (h * h));
                }
                Ok(sup)
            }
            Representation::Exact(e) => {
                let h = e.mean_curvature();
                if h.abs() < h_floor {
                    return Err(Error::Argument(format!(
                        "mean curvature vanishes identically: |H| = {:.3e} < {h_floor:.0e}",
                        h.abs()
                    )));
                }
                Ok(e.second_form_sq() / (h * h))
            }
        }
    }

    /// Position of the point realizing sup |A|^2 (a representative for
    /// exact surfaces).
    pub fn argmax_a2_position(&self) -> Result<Point3<f64>> {
        match &self.repr {
            Representation::Mesh(m) => {
                let geo = self.mesh_geometry()?;
                let (i, _) = geo
                    .second_form_sq
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .unwrap();
                Ok(m.vertices()[i])
            }
            Representation::Profile(p) => {
                let geo = self.profile_geometry()?;
                let (i, _) = geo
                    .second_form_sq
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .unwrap();
                // by symmetry the blow-up point of a pinching ring is on the axis
                Ok(Point3::new(p.grid()[i], 0.0, 0.0))
            }
            Representation::Exact(e) => Ok(exact_representative(e).0),
        }
    }

    fn dim(&self) -> usize {
        match &self.repr {
            Representation::Exact(e) => e.dim(),
            _ => 2,
        }
    }

    /// Parabolic dilation of the state: x -> lambda (x - y0), with the
    /// caller supplying the rescaled time.
    pub fn dilated(&self, y0: &Point3<f64>, lambda: f64, new_time: f64) -> Result<SurfaceState> {
        if lambda <= 0.0 {
            return Err(Error::Argument(format!("dilation scale must be positive, got {lambda}")));
        }
        match &self.repr {
            Representation::Mesh(m) => {
                let verts = m
                    .vertices()
                    .iter()
                    .map(|v| Point3::from((v - y0) * lambda))
                    .collect();
                Ok(SurfaceState::from_mesh(m.with_positions(verts, new_time)?))
            }
            Representation::Profile(p) => {
                // stays axisymmetric only for centers on the axis
                let off_axis = (y0.y * y0.y + y0.z * y0.z).sqrt();
                let scale = p.radii().iter().cloned().fold(0.0, f64::max);
                if off_axis > 1e-9 * scale.max(1.0) {
                    return Err(Error::Unsupported(format!(
                        "profile dilation center must lie on the x-axis (offset {off_axis:.3e})"
                    )));
                }
                let grid = p.grid().iter().map(|&x| (x - y0.x) * lambda).collect();
                let radii = p.radii().iter().map(|&u| u * lambda).collect();
                Ok(SurfaceState::from_profile(AxisymProfile::new(
                    grid,
                    radii,
                    p.boundary(),
                    new_time,
                )?))
            }
            Representation::Exact(e) => {
                Ok(SurfaceState::from_exact(e.dilated(y0, lambda), new_time))
            }
        }
    }
}

/// Per-location mean curvature output.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub positions: Vec<Point3<f64>>,
    pub mean_curvature: Vec<f64>,
    pub normals: Vec<Vector3<f64>>,
}

fn exact_representative(e: &ExactSurface) -> (Point3<f64>, Vector3<f64>) {
    match e {
        ExactSurface::Sphere { center, radius, .. } => {
            (center + Vector3::new(*radius, 0.0, 0.0), Vector3::x())
        }
        ExactSurface::Cylinder { center, axis, radius, .. } => {
            let (u, _) = exact_surface::orthonormal_frame(axis);
            (center + u * *radius, u)
        }
        ExactSurface::Plane { point, normal } => (*point, normal.into_inner()),
    }
}

/// Ring-by-ring kernel integral over a profile (without the (4 pi tau)^{-n/2}
/// prefactor): adaptive in angle, exact-in-angle on the axis.
fn profile_kernel_integral(p: &AxisymProfile, y0: &Point3<f64>, tau: f64) -> f64 {
    let geo = p.node_geometry();
    let w = p.node_weights();
    let rho0 = (y0.y * y0.y + y0.z * y0.z).sqrt();
    let mut total = 0.0;
    for i in 0..p.grid().len() {
        let x = p.grid()[i];
        let u = p.radii()[i];
        let base = (x - y0.x) * (x - y0.x) + u * u + rho0 * rho0;
        let ring = if rho0 < 1e-14 {
            let expo = -base / (4.0 * tau);
            if expo < KERNEL_EXP_CUTOFF {
                0.0
            } else {
                2.0 * std::f64::consts::PI * expo.exp()
            }
        } else {
            // angle between the ring point and the transverse offset of y0
            let theta0 = y0.z.atan2(y0.y);
            adaptive_ring(|th| {
                let expo = -(base - 2.0 * u * rho0 * (th - theta0).cos()) / (4.0 * tau);
                if expo < KERNEL_EXP_CUTOFF {
                    0.0
                } else {
                    expo.exp()
                }
            })
        };
        total += ring * u * geo.arc_factor[i] * w[i];
    }
    total
}

/// Dissipation integrand over a profile (without the kernel prefactor).
fn profile_dissipation_integral(
    p: &AxisymProfile,
    geo: &ProfileGeometry,
    y0: &Point3<f64>,
    tau: f64,
) -> f64 {
    let w = p.node_weights();
    let mut total = 0.0;
    for i in 0..p.grid().len() {
        let x = p.grid()[i];
        let u = p.radii()[i];
        let ux = geo.ux[i];
        let inv_arc = 1.0 / geo.arc_factor[i];
        let h = geo.mean_curvature[i];
        let ring = adaptive_ring(|th| {
            let (c, s) = (th.cos(), th.sin());
            let pos_rel = Vector3::new(x - y0.x, u * c - y0.y, u * s - y0.z);
            let expo = -pos_rel.norm_squared() / (4.0 * tau);
            if expo < KERNEL_EXP_CUTOFF {
                return 0.0;
            }
            let normal = Vector3::new(-ux * inv_arc, c * inv_arc, s * inv_arc);
            let resid = h - pos_rel.dot(&normal) / (2.0 * tau);
            expo.exp() * resid * resid
        });
        total += ring * u * geo.arc_factor[i] * w[i];
    }
    total
}

fn profile_restricted_a2_power(
    p: &AxisymProfile,
    geo: &ProfileGeometry,
    x0: &Point3<f64>,
    sigma: f64,
    power: f64,
) -> f64 {
    let w = p.node_weights();
    let rho0 = (x0.y * x0.y + x0.z * x0.z).sqrt();
    let mut total = 0.0;
    for i in 0..p.grid().len() {
        let x = p.grid()[i];
        let u = p.radii()[i];
        let s2 = sigma * sigma - (x - x0.x) * (x - x0.x);
        let arc_angle = if s2 <= 0.0 {
            0.0
        } else if rho0 < 1e-14 {
            if u * u <= s2 {
                2.0 * std::f64::consts::PI
            } else {
                0.0
            }
        } else {
            let c = (u * u + rho0 * rho0 - s2) / (2.0 * u * rho0);
            if c <= -1.0 {
                2.0 * std::f64::consts::PI
            } else if c >= 1.0 {
                0.0
            } else {
                2.0 * c.acos()
            }
        };
        if arc_angle > 0.0 {
            let val = geo.second_form_sq[i].max(0.0).sqrt().powf(power);
            total += val * arc_angle * u * geo.arc_factor[i] * w[i];
        }
    }
    total
}

/// Periodic trapezoid with doubling; spectrally accurate for smooth rings.
fn adaptive_ring<F: Fn(f64) -> f64>(f: F) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let eval = |m: usize| -> f64 {
        let mut acc = 0.0;
        for k in 0..m {
            acc += f(two_pi * k as f64 / m as f64);
        }
        acc * two_pi / m as f64
    };
    let mut m = 16;
    let mut prev = eval(m);
    loop {
        m *= 2;
        let cur = eval(m);
        if (cur - prev).abs() <= 1e-12 * (cur.abs() + 1e-300) || m >= 1 << 16 {
            return cur;
        }
        prev = cur;
    }
}
