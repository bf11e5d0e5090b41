//! Closed-form flow families: shrinking spheres and cylinders, static
//! planes, and the self-shrinker catalog. These are the oracles against
//! which every discrete path is checked.

use std::f64::consts::{E, PI};

use nalgebra::{Point3, Unit, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{
    axisym, mesh, unit_sphere_area, AxisymProfile, BoundaryKind, ExactSurface, SurfaceState,
};

/// Minimum cylinder truncation in units of sqrt(T - t); the kernel tail
/// beyond it is exp(-36) and invisible at every stated tolerance.
pub const CYLINDER_TRUNCATION_FACTOR: f64 = 12.0;

/// Shrinking round n-sphere: r(t) = sqrt(r0^2 - 2 n t).
#[derive(Debug, Clone)]
pub struct ShrinkingSphere {
    pub center: Point3<f64>,
    pub initial_radius: f64,
    pub dim: usize,
}

/// Shrinking round cylinder about an axis: r(t) = sqrt(r0^2 - 2 t).
/// The ideal object is infinite; `half_length` truncates sampling.
#[derive(Debug, Clone)]
pub struct ShrinkingCylinder {
    pub center: Point3<f64>,
    pub axis: Unit<Vector3<f64>>,
    pub initial_radius: f64,
    pub half_length: f64,
}

/// Static plane; a trivial solution of the flow.
#[derive(Debug, Clone)]
pub struct PlaneSolution {
    pub point: Point3<f64>,
    pub normal: Unit<Vector3<f64>>,
}

/// Any member of the closed-form catalog.
#[derive(Debug, Clone)]
pub enum ExactSolution {
    Sphere(ShrinkingSphere),
    Cylinder(ShrinkingCylinder),
    Plane(PlaneSolution),
}

/// How to realize a sampled state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplingMode {
    /// Keep the analytic representation (preferred by diagnostics).
    Analytic,
    /// Triangle mesh; the parameter is the icosphere subdivision level or
    /// the patch resolution.
    Mesh(u32),
    /// Axisymmetric profile with the given node count.
    Profile(usize),
}

impl ShrinkingSphere {
    pub fn new(center: Point3<f64>, initial_radius: f64, dim: usize) -> Result<Self> {
        if initial_radius <= 0.0 {
            return Err(Error::Argument(format!(
                "initial radius must be positive, got {initial_radius}"
            )));
        }
        if dim == 0 {
            return Err(Error::Argument("sphere dimension must be >= 1".into()));
        }
        Ok(ShrinkingSphere { center, initial_radius, dim })
    }

    pub fn extinction_time(&self) -> f64 {
        self.initial_radius * self.initial_radius / (2.0 * self.dim as f64)
    }

    pub fn radius_at(&self, t: f64) -> Result<f64> {
        let t_ext = self.extinction_time();
        if t >= t_ext {
            return Err(Error::Argument(format!(
                "t = {t} is past the extinction time {t_ext}"
            )));
        }
        Ok((self.initial_radius * self.initial_radius - 2.0 * self.dim as f64 * t).sqrt())
    }

    pub fn second_form_sq_at(&self, t: f64) -> Result<f64> {
        let r = self.radius_at(t)?;
        Ok(self.dim as f64 / (r * r))
    }

    pub fn mean_curvature_at(&self, t: f64) -> Result<f64> {
        let r = self.radius_at(t)?;
        Ok(self.dim as f64 / r)
    }

    pub fn surface_at(&self, t: f64) -> Result<ExactSurface> {
        Ok(ExactSurface::Sphere {
            center: self.center,
            radius: self.radius_at(t)?,
            dim: self.dim,
        })
    }
}

impl ShrinkingCylinder {
    pub fn new(
        center: Point3<f64>,
        axis: Unit<Vector3<f64>>,
        initial_radius: f64,
        half_length: f64,
    ) -> Result<Self> {
        if initial_radius <= 0.0 {
            return Err(Error::Argument(format!(
                "initial radius must be positive, got {initial_radius}"
            )));
        }
        if half_length <= 0.0 {
            return Err(Error::Argument("half_length must be positive".into()));
        }
        Ok(ShrinkingCylinder { center, axis, initial_radius, half_length })
    }

    pub fn extinction_time(&self) -> f64 {
        self.initial_radius * self.initial_radius / 2.0
    }

    pub fn radius_at(&self, t: f64) -> Result<f64> {
        let t_ext = self.extinction_time();
        if t >= t_ext {
            return Err(Error::Argument(format!(
                "t = {t} is past the extinction time {t_ext}"
            )));
        }
        Ok((self.initial_radius * self.initial_radius - 2.0 * t).sqrt())
    }

    pub fn second_form_sq_at(&self, t: f64) -> Result<f64> {
        let r = self.radius_at(t)?;
        Ok(1.0 / (r * r))
    }

    pub fn mean_curvature_at(&self, t: f64) -> Result<f64> {
        Ok(1.0 / self.radius_at(t)?)
    }

    /// Checks the truncation rule half_length >= 12 sqrt(T - t).
    pub fn truncation_ok_at(&self, t: f64) -> bool {
        let tau = self.extinction_time() - t;
        self.half_length >= CYLINDER_TRUNCATION_FACTOR * tau.max(0.0).sqrt()
    }

    pub fn surface_at(&self, t: f64) -> Result<ExactSurface> {
        Ok(ExactSurface::Cylinder {
            center: self.center,
            axis: self.axis,
            radius: self.radius_at(t)?,
            half_length: self.half_length,
        })
    }
}

impl PlaneSolution {
    pub fn surface(&self) -> ExactSurface {
        ExactSurface::Plane { point: self.point, normal: self.normal }
    }
}

impl ExactSolution {
    /// Extinction time; planes never vanish.
    pub fn extinction_time(&self) -> Option<f64> {
        match self {
            ExactSolution::Sphere(s) => Some(s.extinction_time()),
            ExactSolution::Cylinder(c) => Some(c.extinction_time()),
            ExactSolution::Plane(_) => None,
        }
    }

    /// Gaussian density at the solution's own singular spacetime point
    /// (t-independent for these self-similar solutions).
    pub fn closed_form_density(&self) -> f64 {
        match self {
            ExactSolution::Sphere(s) => {
                // omega_n (n / 2 pi)^{n/2} e^{-n/2}
                let n = s.dim as f64;
                unit_sphere_area(s.dim) * (n / (2.0 * PI)).powf(n / 2.0) * (-n / 2.0).exp()
            }
            ExactSolution::Cylinder(_) => (2.0 * PI / E).sqrt(),
            ExactSolution::Plane(_) => 1.0,
        }
    }

    /// The spacetime point at which the closed-form density is taken.
    pub fn singular_point(&self) -> Option<(Point3<f64>, f64)> {
        match self {
            ExactSolution::Sphere(s) => Some((s.center, s.extinction_time())),
            ExactSolution::Cylinder(c) => Some((c.center, c.extinction_time())),
            ExactSolution::Plane(_) => None,
        }
    }

    pub fn max_second_form_sq_at(&self, t: f64) -> Result<f64> {
        match self {
            ExactSolution::Sphere(s) => s.second_form_sq_at(t),
            ExactSolution::Cylinder(c) => c.second_form_sq_at(t),
            ExactSolution::Plane(_) => Ok(0.0),
        }
    }

    /// Residual of the |A|^2 evolution identity
    /// d/dt |A|^2 = Lap |A|^2 - 2 |grad A|^2 + 2 |A|^4
    /// evaluated with closed forms; spatial terms vanish on the catalog.
    pub fn evolution_identity_residual(&self, t: f64) -> Result<f64> {
        match self {
            ExactSolution::Sphere(s) => {
                let r = s.radius_at(t)?;
                let n = s.dim as f64;
                // d/dt (n / r^2) with d(r^2)/dt = -2n
                let da2_dt = 2.0 * n * n / (r * r * r * r);
                let a2 = n / (r * r);
                Ok((da2_dt - 2.0 * a2 * a2).abs())
            }
            ExactSolution::Cylinder(c) => {
                let r = c.radius_at(t)?;
                // d/dt (1 / r^2) with d(r^2)/dt = -2
                let da2_dt = 2.0 / (r * r * r * r);
                let a2 = 1.0 / (r * r);
                Ok((da2_dt - 2.0 * a2 * a2).abs())
            }
            ExactSolution::Plane(_) => Ok(0.0),
        }
    }

    /// Realize the solution at time t in the requested representation.
    pub fn sample_state(&self, t: f64, mode: SamplingMode) -> Result<SurfaceState> {
        match self {
            ExactSolution::Sphere(s) => match mode {
                SamplingMode::Analytic => Ok(SurfaceState::from_exact(s.surface_at(t)?, t)),
                SamplingMode::Mesh(subdiv) => {
                    if s.dim != 2 {
                        return Err(Error::Unsupported(
                            "mesh sampling requires a 2-sphere".into(),
                        ));
                    }
                    let r = s.radius_at(t)?;
                    Ok(SurfaceState::from_mesh(mesh::icosphere(s.center, r, subdiv, t)))
                }
                SamplingMode::Profile(_) => Err(Error::Unsupported(
                    "profile sampling of a sphere is not provided".into(),
                )),
            },
            ExactSolution::Cylinder(c) => match mode {
                SamplingMode::Analytic => {
                    if !c.truncation_ok_at(t) {
                        return Err(truncation_error(c, t));
                    }
                    Ok(SurfaceState::from_exact(c.surface_at(t)?, t))
                }
                SamplingMode::Profile(nodes) => {
                    if !c.truncation_ok_at(t) {
                        return Err(truncation_error(c, t));
                    }
                    let r = c.radius_at(t)?;
                    let grid = axisym::uniform_grid(-c.half_length, c.half_length, nodes);
                    Ok(SurfaceState::from_profile(AxisymProfile::new(
                        grid,
                        vec![r; nodes],
                        BoundaryKind::Reflecting,
                        t,
                    )?))
                }
                SamplingMode::Mesh(_) => Err(Error::Unsupported(
                    "mesh sampling of a cylinder is not provided; use the capsule generator"
                        .into(),
                )),
            },
            ExactSolution::Plane(p) => match mode {
                SamplingMode::Analytic => Ok(SurfaceState::from_exact(p.surface(), t)),
                SamplingMode::Mesh(res) => {
                    // flat patch spanning the plane around its base point
                    let n = p.normal.into_inner();
                    let mesh = flat_patch_on_plane(&p.point, &n, 2.0, res.max(2) as usize, t);
                    Ok(SurfaceState::from_mesh(mesh))
                }
                SamplingMode::Profile(_) => Err(Error::Unsupported(
                    "profile sampling of a plane is not provided".into(),
                )),
            },
        }
    }

    /// Sample a time-ordered track of states.
    pub fn sample_track(&self, times: &[f64], mode: SamplingMode) -> Result<Vec<SurfaceState>> {
        let mut out = Vec::with_capacity(times.len());
        let mut prev = f64::NEG_INFINITY;
        for &t in times {
            if t <= prev {
                return Err(Error::Argument("sample times must be strictly increasing".into()));
            }
            prev = t;
            out.push(self.sample_state(t, mode)?);
        }
        Ok(out)
    }
}

fn truncation_error(c: &ShrinkingCylinder, t: f64) -> Error {
    let tau = c.extinction_time() - t;
    Error::Argument(format!(
        "cylinder truncation too short: half_length = {} < {} sqrt(T - t) = {:.6}; \
         the kernel tail bound exp(-L^2/(4(T-t))) would not be negligible",
        c.half_length,
        CYLINDER_TRUNCATION_FACTOR,
        CYLINDER_TRUNCATION_FACTOR * tau.sqrt()
    ))
}

fn flat_patch_on_plane(
    point: &Point3<f64>,
    normal: &Vector3<f64>,
    extent: f64,
    res: usize,
    t: f64,
) -> mesh::TriMesh {
    let n = Unit::new_normalize(*normal);
    let (u, v) = crate::geometry::exact_surface::orthonormal_frame(&n);
    let mut verts = Vec::with_capacity((res + 1) * (res + 1));
    for j in 0..=res {
        for i in 0..=res {
            let a = extent * (i as f64 / res as f64 - 0.5);
            let b = extent * (j as f64 / res as f64 - 0.5);
            verts.push(point + u * a + v * b);
        }
    }
    let idx = |i: usize, j: usize| j * (res + 1) + i;
    let mut faces = Vec::with_capacity(res * res * 2);
    for j in 0..res {
        for i in 0..res {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    mesh::TriMesh::new(verts, faces, t).expect("planar patch is valid")
}

// ---------------------------------------------------------------------------
// self-shrinker catalog
// ---------------------------------------------------------------------------

/// Catalog tag for tangent-flow classification and shrinker samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShrinkerKind {
    Plane,
    Sphere,
    Cylinder,
}

impl std::fmt::Display for ShrinkerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShrinkerKind::Plane => write!(f, "plane"),
            ShrinkerKind::Sphere => write!(f, "sphere"),
            ShrinkerKind::Cylinder => write!(f, "cylinder"),
        }
    }
}

/// A sampled self-shrinker at rescaled time s < 0. Catalog members at the
/// canonical scale satisfy H = <x, nu> / (-2s) exactly; `with_radius`
/// produces off-scale samples with positive residual.
#[derive(Debug, Clone)]
pub struct SelfShrinkerSample {
    pub kind: ShrinkerKind,
    pub s: f64,
    pub geometry: ExactSurface,
}

impl SelfShrinkerSample {
    /// Canonical member: sphere radius sqrt(-2 n s), cylinder radius
    /// sqrt(-2 s), plane through the origin.
    pub fn canonical(kind: ShrinkerKind, s: f64, dim: usize) -> Result<Self> {
        if s >= 0.0 {
            return Err(Error::Argument(format!("rescaled time must be negative, got {s}")));
        }
        let geometry = match kind {
            ShrinkerKind::Sphere => ExactSurface::Sphere {
                center: Point3::origin(),
                radius: (-2.0 * dim as f64 * s).sqrt(),
                dim,
            },
            ShrinkerKind::Cylinder => ExactSurface::Cylinder {
                center: Point3::origin(),
                axis: Unit::new_normalize(Vector3::x()),
                radius: (-2.0 * s).sqrt(),
                half_length: CYLINDER_TRUNCATION_FACTOR * (-s).sqrt(),
            },
            ShrinkerKind::Plane => ExactSurface::Plane {
                point: Point3::origin(),
                normal: Unit::new_normalize(Vector3::z()),
            },
        };
        Ok(SelfShrinkerSample { kind, s, geometry })
    }

    /// Off-scale sample of a sphere or cylinder with an explicit radius.
    pub fn with_radius(kind: ShrinkerKind, s: f64, radius: f64, dim: usize) -> Result<Self> {
        if s >= 0.0 {
            return Err(Error::Argument(format!("rescaled time must be negative, got {s}")));
        }
        if radius <= 0.0 {
            return Err(Error::Argument("radius must be positive".into()));
        }
        let geometry = match kind {
            ShrinkerKind::Sphere => ExactSurface::Sphere {
                center: Point3::origin(),
                radius,
                dim,
            },
            ShrinkerKind::Cylinder => ExactSurface::Cylinder {
                center: Point3::origin(),
                axis: Unit::new_normalize(Vector3::x()),
                radius,
                half_length: CYLINDER_TRUNCATION_FACTOR * (-s).sqrt(),
            },
            ShrinkerKind::Plane => {
                return Err(Error::Argument("a plane has no radius".into()));
            }
        };
        Ok(SelfShrinkerSample { kind, s, geometry })
    }

    /// sup over the surface of |H - <x, nu> / (-2s)|.
    pub fn residual_exact(&self) -> Result<f64> {
        if self.s >= 0.0 {
            return Err(Error::Argument("rescaled time must be negative".into()));
        }
        let minus_2s = -2.0 * self.s;
        Ok(match &self.geometry {
            ExactSurface::Sphere { radius, dim, center } => {
                debug_assert!(center.coords.norm() < 1e-14);
                (*dim as f64 / radius - radius / minus_2s).abs()
            }
            ExactSurface::Cylinder { radius, .. } => (1.0 / radius - radius / minus_2s).abs(),
            ExactSurface::Plane { point, normal } => {
                // <x, nu> is the constant signed offset of the plane
                (point.coords.dot(normal) / minus_2s).abs()
            }
        })
    }

    /// Geometry at another rescaled time via the homothety
    /// M_s = sqrt(-s) M_{-1} (exact for canonical members).
    pub fn at_time(&self, s_new: f64) -> Result<Self> {
        if s_new >= 0.0 {
            return Err(Error::Argument(format!("rescaled time must be negative, got {s_new}")));
        }
        let scale = ((-s_new) / (-self.s)).sqrt();
        let geometry = match &self.geometry {
            ExactSurface::Sphere { center, radius, dim } => ExactSurface::Sphere {
                center: *center,
                radius: radius * scale,
                dim: *dim,
            },
            ExactSurface::Cylinder { center, axis, radius, half_length } => {
                ExactSurface::Cylinder {
                    center: *center,
                    axis: *axis,
                    radius: radius * scale,
                    half_length: half_length * scale,
                }
            }
            ExactSurface::Plane { .. } => self.geometry.clone(),
        };
        Ok(SelfShrinkerSample { kind: self.kind, s: s_new, geometry })
    }
}

/// Catalog Gaussian densities used by tangent-flow classification.
pub fn catalog_density(kind: ShrinkerKind) -> f64 {
    match kind {
        ShrinkerKind::Plane => 1.0,
        ShrinkerKind::Sphere => 4.0 / E,
        ShrinkerKind::Cylinder => (2.0 * PI / E).sqrt(),
    }
}
