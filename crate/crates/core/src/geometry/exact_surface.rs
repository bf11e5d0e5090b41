//! Analytic surfaces: round spheres, round cylinders and planes, with
//! closed-form (or spectrally accurate) integrals of the backward heat
//! kernel and of curvature powers.
//!
//! These back the analytic evaluation path of the diagnostics; sampled
//! meshes and profiles exercise the discrete path against them.

use std::f64::consts::PI;

use nalgebra::{Point3, Unit, Vector3};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// Kernel contributions with exponent below this cutoff are treated as zero.
pub const KERNEL_EXP_CUTOFF: f64 = -40.0;

/// An exactly represented hypersurface at a single instant.
#[derive(Debug, Clone)]
pub enum ExactSurface {
    /// Round n-sphere of the given radius. Spatial operations require
    /// `dim == 2` (surface in R^3); scalar laws hold for any dimension.
    Sphere {
        center: Point3<f64>,
        radius: f64,
        dim: usize,
    },
    /// Round cylinder about the given axis, truncated at +-half_length.
    Cylinder {
        center: Point3<f64>,
        axis: Unit<Vector3<f64>>,
        radius: f64,
        half_length: f64,
    },
    /// Static plane through `point` with unit `normal`.
    Plane {
        point: Point3<f64>,
        normal: Unit<Vector3<f64>>,
    },
}

/// Surface area of the unit n-sphere.
pub fn unit_sphere_area(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        2 => 4.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * unit_sphere_area(n - 2),
    }
}

impl ExactSurface {
    pub fn dim(&self) -> usize {
        match self {
            ExactSurface::Sphere { dim, .. } => *dim,
            _ => 2,
        }
    }

    /// Total area; planes are unbounded.
    pub fn area(&self) -> Option<f64> {
        match self {
            ExactSurface::Sphere { radius, dim, .. } => {
                Some(unit_sphere_area(*dim) * radius.powi(*dim as i32))
            }
            ExactSurface::Cylinder { radius, half_length, .. } => {
                Some(2.0 * PI * radius * 2.0 * half_length)
            }
            ExactSurface::Plane { .. } => None,
        }
    }

    /// Mean curvature (sum of principal curvatures), constant on these surfaces.
    pub fn mean_curvature(&self) -> f64 {
        match self {
            ExactSurface::Sphere { radius, dim, .. } => *dim as f64 / radius,
            ExactSurface::Cylinder { radius, .. } => 1.0 / radius,
            ExactSurface::Plane { .. } => 0.0,
        }
    }

    pub fn second_form_sq(&self) -> f64 {
        match self {
            ExactSurface::Sphere { radius, dim, .. } => *dim as f64 / (radius * radius),
            ExactSurface::Cylinder { radius, .. } => 1.0 / (radius * radius),
            ExactSurface::Plane { .. } => 0.0,
        }
    }

    /// Distance from a point to the surface.
    pub fn distance_to_point(&self, p: &Point3<f64>) -> f64 {
        match self {
            ExactSurface::Sphere { center, radius, .. } => ((p - center).norm() - radius).abs(),
            ExactSurface::Cylinder { center, axis, radius, half_length } => {
                let rel = p - center;
                let z = rel.dot(axis);
                let rho = (rel - axis.into_inner() * z).norm();
                let dr = rho - radius;
                if z.abs() <= *half_length {
                    dr.abs()
                } else {
                    let dz = z.abs() - half_length;
                    (dz * dz + dr * dr).sqrt()
                }
            }
            ExactSurface::Plane { point, normal } => (p - point).dot(normal).abs(),
        }
    }

    /// Integral of the backward heat kernel rho_{y0, T} at time-to-blowup tau.
    ///
    /// Sphere and plane are closed forms; the cylinder separates into an
    /// erf factor along the axis and an angular integral evaluated by the
    /// periodic trapezoid rule with doubling.
    pub fn kernel_integral(&self, y0: &Point3<f64>, tau: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Err(Error::Argument(format!("tau must be positive, got {tau}")));
        }
        match self {
            ExactSurface::Sphere { center, radius, dim } => {
                let d = (center - y0).norm();
                let r = *radius;
                let n = *dim as f64;
                if d < 1e-14 * r.max(1.0) {
                    let expo = -r * r / (4.0 * tau);
                    if expo < KERNEL_EXP_CUTOFF {
                        return Ok(0.0);
                    }
                    let area = unit_sphere_area(*dim) * r.powi(*dim as i32);
                    return Ok((4.0 * PI * tau).powf(-n / 2.0) * area * expo.exp());
                }
                if *dim != 2 {
                    return Err(Error::Unsupported(
                        "off-center kernel integral requires a 2-sphere".into(),
                    ));
                }
                let (w0, _, _) = sphere_kernel_moments(r, d, tau);
                Ok((4.0 * PI * tau).powi(-1) * 2.0 * PI * r * r * w0)
            }
            ExactSurface::Cylinder { .. } => {
                self.cylinder_kernel_weighted(y0, tau, |_| 1.0)
            }
            ExactSurface::Plane { point, normal } => {
                let h = (y0 - point).dot(normal);
                let expo = -h * h / (4.0 * tau);
                Ok(if expo < KERNEL_EXP_CUTOFF { 0.0 } else { expo.exp() })
            }
        }
    }

    /// Kernel-weighted monotonicity dissipation
    /// integral of rho * (H - <x - y0, nu> / (2 tau))^2.
    pub fn dissipation_integral(&self, y0: &Point3<f64>, tau: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Err(Error::Argument(format!("tau must be positive, got {tau}")));
        }
        match self {
            ExactSurface::Sphere { center, radius, dim } => {
                if *dim != 2 {
                    return Err(Error::Unsupported(
                        "dissipation integral requires a 2-sphere".into(),
                    ));
                }
                let r = *radius;
                let d = (center - y0).norm();
                let h0 = 2.0 / r - r / (2.0 * tau);
                let beta = d / (2.0 * tau);
                let (w0, w1, w2) = sphere_kernel_moments(r, d, tau);
                let combined = h0 * h0 * w0 - 2.0 * h0 * beta * w1 + beta * beta * w2;
                Ok((4.0 * PI * tau).powi(-1) * 2.0 * PI * r * r * combined)
            }
            ExactSurface::Cylinder { center, axis, radius, .. } => {
                let r = *radius;
                let rel = y0 - center;
                let z0 = rel.dot(axis);
                let w0 = rel - axis.into_inner() * z0;
                let rho0 = w0.norm();
                self.cylinder_kernel_weighted(y0, tau, move |phi: f64| {
                    let resid = 1.0 / r - (r - rho0 * phi.cos()) / (2.0 * tau);
                    resid * resid
                })
            }
            ExactSurface::Plane { point, normal } => {
                let h = (y0 - point).dot(normal);
                let expo = -h * h / (4.0 * tau);
                if expo < KERNEL_EXP_CUTOFF {
                    return Ok(0.0);
                }
                Ok(expo.exp() * h * h / (4.0 * tau * tau))
            }
        }
    }

    /// Kernel integral over the cylinder with an extra angular weight
    /// g(phi), phi measured from the direction of the transverse offset.
    fn cylinder_kernel_weighted<G: Fn(f64) -> f64>(
        &self,
        y0: &Point3<f64>,
        tau: f64,
        g: G,
    ) -> Result<f64> {
        let (center, axis, r, half_length) = match self {
            ExactSurface::Cylinder { center, axis, radius, half_length } => {
                (center, axis, *radius, *half_length)
            }
            _ => unreachable!(),
        };
        let rel = y0 - center;
        let z0 = rel.dot(axis);
        let w0 = rel - axis.into_inner() * z0;
        let rho0 = w0.norm();

        // axial factor: int_{-L}^{L} exp(-(z - z0)^2 / (4 tau)) dz
        let s = 2.0 * tau.sqrt();
        let zpart = PI.sqrt() * s * 0.5
            * (erf((half_length - z0) / s) + erf((half_length + z0) / s));

        // angular factor, doubled trapezoid until converged
        let radial = |phi: f64| -> f64 {
            let expo = -(r * r + rho0 * rho0 - 2.0 * r * rho0 * phi.cos()) / (4.0 * tau);
            if expo < KERNEL_EXP_CUTOFF {
                0.0
            } else {
                expo.exp() * g(phi)
            }
        };
        let eval = |m: usize| -> f64 {
            let mut acc = 0.0;
            for k in 0..m {
                acc += radial(2.0 * PI * k as f64 / m as f64);
            }
            acc * 2.0 * PI / m as f64
        };
        let mut m = 32;
        let mut prev = eval(m);
        let angular = loop {
            m *= 2;
            let cur = eval(m);
            if (cur - prev).abs() <= 1e-12 * (cur.abs() + 1e-300) || m >= 1 << 17 {
                break cur;
            }
            prev = cur;
        };
        Ok((4.0 * PI * tau).powi(-1) * r * angular * zpart)
    }

    /// integral of |A|^power over the surface (zero for planes).
    pub fn a2_power_integral(&self, power: f64) -> Result<f64> {
        match self {
            ExactSurface::Plane { .. } => Ok(0.0),
            _ => {
                let a = self.area().expect("bounded surface");
                Ok(self.second_form_sq().sqrt().powf(power) * a)
            }
        }
    }

    /// integral of |H|^power over the surface (zero for planes).
    pub fn h_power_integral(&self, power: f64) -> Result<f64> {
        match self {
            ExactSurface::Plane { .. } => Ok(0.0),
            _ => {
                let a = self.area().expect("bounded surface");
                Ok(self.mean_curvature().abs().powf(power) * a)
            }
        }
    }

    /// Area of the intersection with the ball B(x0, sigma).
    pub fn restricted_area(&self, x0: &Point3<f64>, sigma: f64) -> Result<f64> {
        if sigma <= 0.0 {
            return Err(Error::Argument(format!("ball radius must be positive, got {sigma}")));
        }
        match self {
            ExactSurface::Sphere { center, radius, dim } => {
                if *dim != 2 {
                    return Err(Error::Unsupported("ball restriction requires a 2-sphere".into()));
                }
                Ok(sphere_cap_area(*radius, (center - x0).norm(), sigma))
            }
            ExactSurface::Cylinder { center, axis, radius, half_length } => {
                // per-slice arc angle is analytic; integrate along the axis
                let rel = x0 - center;
                let z0 = rel.dot(axis);
                let w0 = rel - axis.into_inner() * z0;
                let rho0 = w0.norm();
                let r = *radius;
                let n_z = 4097usize;
                let mut acc = 0.0;
                for k in 0..n_z {
                    let z = -half_length + 2.0 * half_length * k as f64 / (n_z - 1) as f64;
                    let s2 = sigma * sigma - (z - z0) * (z - z0);
                    let arc = if s2 <= 0.0 {
                        0.0
                    } else if rho0 < 1e-14 {
                        if r * r <= s2 { 2.0 * PI } else { 0.0 }
                    } else {
                        let c = (r * r + rho0 * rho0 - s2) / (2.0 * r * rho0);
                        if c <= -1.0 {
                            2.0 * PI
                        } else if c >= 1.0 {
                            0.0
                        } else {
                            2.0 * c.acos()
                        }
                    };
                    let w = if k == 0 || k == n_z - 1 { 0.5 } else { 1.0 };
                    acc += arc * w;
                }
                Ok(acc * r * 2.0 * half_length / (n_z - 1) as f64)
            }
            ExactSurface::Plane { point, normal } => {
                let h = (x0 - point).dot(normal).abs();
                if h >= sigma {
                    Ok(0.0)
                } else {
                    Ok(PI * (sigma * sigma - h * h))
                }
            }
        }
    }

    /// sup of |A|^2 over the part inside B(x0, sigma); None when empty.
    pub fn restricted_sup_a2(&self, x0: &Point3<f64>, sigma: f64) -> Result<Option<f64>> {
        let touches = self.distance_to_point(x0) < sigma;
        Ok(if touches { Some(self.second_form_sq()) } else { None })
    }

    /// Generic surface integral by parametric quadrature. Planes are
    /// rejected: their improper integrals are handled by the kernel-aware
    /// entry points above.
    pub fn integrate_field<F: Fn(&Point3<f64>) -> f64>(&self, f: F, rel_tol: f64) -> Result<f64> {
        match self {
            ExactSurface::Sphere { center, radius, dim } => {
                if *dim != 2 {
                    return Err(Error::Unsupported("field integral requires a 2-sphere".into()));
                }
                let r = *radius;
                let eval = |n_mu: usize, n_phi: usize| -> f64 {
                    let (nodes, weights) = gauss_legendre(n_mu);
                    let mut acc = 0.0;
                    for (mu, wmu) in nodes.iter().zip(&weights) {
                        let st = (1.0 - mu * mu).sqrt();
                        let mut ring = 0.0;
                        for k in 0..n_phi {
                            let ph = 2.0 * PI * k as f64 / n_phi as f64;
                            let p = center
                                + Vector3::new(r * st * ph.cos(), r * st * ph.sin(), r * mu);
                            ring += f(&p);
                        }
                        acc += wmu * ring * 2.0 * PI / n_phi as f64;
                    }
                    acc * r * r
                };
                let mut n = 24;
                let mut prev = eval(n, 2 * n);
                loop {
                    n *= 2;
                    let cur = eval(n, 2 * n);
                    if (cur - prev).abs() <= rel_tol * (cur.abs() + 1e-300) || n >= 1536 {
                        return Ok(cur);
                    }
                    prev = cur;
                }
            }
            ExactSurface::Cylinder { center, axis, radius, half_length } => {
                let frame = orthonormal_frame(axis);
                let r = *radius;
                let eval = |n_z: usize, n_th: usize| -> f64 {
                    let mut acc = 0.0;
                    for iz in 0..n_z {
                        let z = -half_length
                            + 2.0 * half_length * iz as f64 / (n_z - 1) as f64;
                        let wz = if iz == 0 || iz == n_z - 1 { 0.5 } else { 1.0 };
                        let mut ring = 0.0;
                        for k in 0..n_th {
                            let th = 2.0 * PI * k as f64 / n_th as f64;
                            let p = center
                                + axis.into_inner() * z
                                + frame.0 * (r * th.cos())
                                + frame.1 * (r * th.sin());
                            ring += f(&p);
                        }
                        acc += wz * ring * 2.0 * PI / n_th as f64;
                    }
                    acc * r * 2.0 * half_length / (n_z - 1) as f64
                };
                let mut n = 65;
                let mut prev = eval(n, 64);
                loop {
                    n = (n - 1) * 2 + 1;
                    let cur = eval(n, (n - 1) / 2);
                    if (cur - prev).abs() <= rel_tol * (cur.abs() + 1e-300) || n >= 8193 {
                        return Ok(cur);
                    }
                    prev = cur;
                }
            }
            ExactSurface::Plane { .. } => Err(Error::Unsupported(
                "generic field integral over an unbounded plane".into(),
            )),
        }
    }

    /// Parabolic dilation x -> lambda (x - y0) as an exact parameter map.
    pub fn dilated(&self, y0: &Point3<f64>, lambda: f64) -> ExactSurface {
        match self {
            ExactSurface::Sphere { center, radius, dim } => ExactSurface::Sphere {
                center: Point3::from((center - y0) * lambda),
                radius: radius * lambda,
                dim: *dim,
            },
            ExactSurface::Cylinder { center, axis, radius, half_length } => {
                ExactSurface::Cylinder {
                    center: Point3::from((center - y0) * lambda),
                    axis: *axis,
                    radius: radius * lambda,
                    half_length: half_length * lambda,
                }
            }
            ExactSurface::Plane { point, normal } => ExactSurface::Plane {
                point: Point3::from((point - y0) * lambda),
                normal: *normal,
            },
        }
    }
}

/// Exponentially weighted moments of the sphere kernel:
/// w_k = e^{-(r^2+d^2)/(4 tau)} * int_{-1}^{1} mu^k e^{-q mu} d mu,
/// q = r d / (2 tau), evaluated in overflow-safe form.
fn sphere_kernel_moments(r: f64, d: f64, tau: f64) -> (f64, f64, f64) {
    let q = r * d / (2.0 * tau);
    let base = -(r * r + d * d) / (4.0 * tau);
    if q < 1e-6 {
        let e = if base < KERNEL_EXP_CUTOFF { 0.0 } else { base.exp() };
        return (
            e * (2.0 + q * q / 3.0),
            e * (-2.0 * q / 3.0),
            e * (2.0 / 3.0 + q * q / 5.0),
        );
    }
    // e^{base + q} = e^{-(r-d)^2/(4 tau)}, e^{base - q} = e^{-(r+d)^2/(4 tau)}
    let em_exp = -(r - d) * (r - d) / (4.0 * tau);
    let ep_exp = -(r + d) * (r + d) / (4.0 * tau);
    let em = if em_exp < KERNEL_EXP_CUTOFF { 0.0 } else { em_exp.exp() };
    let ep = if ep_exp < KERNEL_EXP_CUTOFF { 0.0 } else { ep_exp.exp() };
    let w0 = (em - ep) / q;
    let w1 = -((q - 1.0) * em + (q + 1.0) * ep) / (q * q);
    let w2 = ((q * q - 2.0 * q + 2.0) * em - (q * q + 2.0 * q + 2.0) * ep) / (q * q * q);
    (w0, w1, w2)
}

/// Area of the 2-sphere (radius r, center at distance d from the ball
/// center) intersected with a ball of radius sigma.
pub fn sphere_cap_area(r: f64, d: f64, sigma: f64) -> f64 {
    if d >= r + sigma {
        return 0.0; // disjoint
    }
    if sigma >= d + r {
        return 4.0 * PI * r * r; // ball swallows the sphere
    }
    if d + sigma <= r {
        return 0.0; // ball strictly inside the sphere
    }
    if d < 1e-300 {
        // concentric and sigma < r: no surface inside
        return 0.0;
    }
    let cos_g = (d * d + r * r - sigma * sigma) / (2.0 * d * r);
    let h = r * (1.0 - cos_g.clamp(-1.0, 1.0));
    2.0 * PI * r * h
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            // Legendre P_n(x) and derivative by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                let dpf = {
                    let mut q0 = 1.0;
                    let mut q1 = x;
                    for k in 2..=n {
                        let q2 = ((2 * k - 1) as f64 * x * q1 - (k - 1) as f64 * q0) / k as f64;
                        q0 = q1;
                        q1 = q2;
                    }
                    n as f64 * (x * q1 - q0) / (x * x - 1.0)
                };
                nodes[i] = -x;
                nodes[n - 1 - i] = x;
                let w = 2.0 / ((1.0 - x * x) * dpf * dpf);
                weights[i] = w;
                weights[n - 1 - i] = w;
                break;
            }
        }
    }
    (nodes, weights)
}

/// Any orthonormal pair completing `axis` to a right-handed frame.
pub fn orthonormal_frame(axis: &Unit<Vector3<f64>>) -> (Vector3<f64>, Vector3<f64>) {
    let a = axis.into_inner();
    let helper = if a.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let u = a.cross(&helper).normalize();
    let v = a.cross(&u);
    (u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn unit_sphere() -> ExactSurface {
        ExactSurface::Sphere { center: Point3::origin(), radius: 1.0, dim: 2 }
    }

    #[test]
    fn self_shrinker_densities() {
        // self-similar scales: sphere r = sqrt(4 tau), cylinder r = sqrt(2 tau)
        for tau in [0.25f64, 0.07, 0.011] {
            let sph = ExactSurface::Sphere {
                center: Point3::origin(),
                radius: (4.0 * tau).sqrt(),
                dim: 2,
            };
            let v = sph.kernel_integral(&Point3::origin(), tau).unwrap();
            assert_relative_eq!(v, 4.0 / E, epsilon = 1e-12);

            let cyl = ExactSurface::Cylinder {
                center: Point3::origin(),
                axis: Unit::new_normalize(Vector3::x()),
                radius: (2.0 * tau).sqrt(),
                half_length: 12.0 * tau.sqrt(),
            };
            let v = cyl.kernel_integral(&Point3::origin(), tau).unwrap();
            assert_relative_eq!(v, (2.0 * PI / E).sqrt(), epsilon = 1e-10);
        }
    }

    #[test]
    fn plane_density_is_one_on_surface() {
        let pl = ExactSurface::Plane {
            point: Point3::new(0.2, -0.4, 1.0),
            normal: Unit::new_normalize(Vector3::new(1.0, 2.0, -0.5)),
        };
        let v = pl.kernel_integral(&Point3::new(0.2, -0.4, 1.0), 0.3).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn off_center_sphere_kernel_matches_quadrature() {
        let s = ExactSurface::Sphere { center: Point3::origin(), radius: 0.7, dim: 2 };
        let y0 = Point3::new(0.3, -0.2, 0.5);
        let tau = 0.11;
        let closed = s.kernel_integral(&y0, tau).unwrap();
        let quad = s
            .integrate_field(
                |p| (-(p - y0).norm_squared() / (4.0 * tau)).exp() / (4.0 * PI * tau),
                1e-12,
            )
            .unwrap();
        assert_relative_eq!(closed, quad, epsilon = 1e-10);
        // frozen against the independent oracle
        assert_relative_eq!(closed, 1.0955592941767258, epsilon = 1e-12);
    }

    #[test]
    fn dissipation_vanishes_on_self_shrinkers() {
        let tau: f64 = 0.09;
        let sph = ExactSurface::Sphere {
            center: Point3::origin(),
            radius: (4.0 * tau).sqrt(),
            dim: 2,
        };
        assert!(sph.dissipation_integral(&Point3::origin(), tau).unwrap() < 1e-28);

        let cyl = ExactSurface::Cylinder {
            center: Point3::origin(),
            axis: Unit::new_normalize(Vector3::x()),
            radius: (2.0 * tau).sqrt(),
            half_length: 12.0 * tau.sqrt(),
        };
        assert!(cyl.dissipation_integral(&Point3::origin(), tau).unwrap() < 1e-24);
    }

    #[test]
    fn dissipation_matches_density_derivative() {
        // d Theta / dt = -dissipation; central difference in t as the oracle
        let y0 = Point3::new(0.4, 0.1, -0.2);
        let tbar = 0.5;
        let r0: f64 = 1.0;
        let theta = |t: f64| {
            let r = (r0 * r0 - 4.0 * t).sqrt();
            let s = ExactSurface::Sphere { center: Point3::origin(), radius: r, dim: 2 };
            s.kernel_integral(&y0, tbar - t).unwrap()
        };
        let t = 0.12;
        let dt = 1e-6;
        let deriv = (theta(t + dt) - theta(t - dt)) / (2.0 * dt);
        let r = (r0 * r0 - 4.0 * t).sqrt();
        let s = ExactSurface::Sphere { center: Point3::origin(), radius: r, dim: 2 };
        let dis = s.dissipation_integral(&y0, tbar - t).unwrap();
        assert_relative_eq!(deriv, -dis, epsilon = 1e-6, max_relative = 1e-6);
    }

    #[test]
    fn spherical_cap_formula() {
        // ball of radius r centered on the north pole of the unit sphere:
        // boundary at z = 1 - r^2/2, cap area = pi r^2
        let area = sphere_cap_area(1.0, 1.0, 1.0);
        assert_relative_eq!(area, PI, epsilon = 1e-12);
        assert_relative_eq!(sphere_cap_area(1.0, 0.5, 2.0), 4.0 * PI, epsilon = 1e-12);
        assert_eq!(sphere_cap_area(1.0, 3.0, 1.0), 0.0);
        assert_eq!(sphere_cap_area(1.0, 0.2, 0.5), 0.0);
    }

    #[test]
    fn cap_restriction_monotone_in_radius() {
        let s = unit_sphere();
        let x0 = Point3::new(1.2, 0.3, -0.1);
        let mut prev = 0.0;
        for k in 1..40 {
            let sigma = 0.05 * k as f64;
            let a = s.restricted_area(&x0, sigma).unwrap();
            assert!(a + 1e-12 >= prev, "sigma {sigma}: {a} < {prev}");
            prev = a;
        }
    }

    #[test]
    fn cylinder_restricted_area_sanity() {
        let c = ExactSurface::Cylinder {
            center: Point3::origin(),
            axis: Unit::new_normalize(Vector3::x()),
            radius: 1.0,
            half_length: 5.0,
        };
        // huge ball captures everything
        let full = c.restricted_area(&Point3::origin(), 100.0).unwrap();
        assert_relative_eq!(full, 2.0 * PI * 10.0, epsilon = 1e-9);
        // disjoint ball
        assert_eq!(c.restricted_area(&Point3::new(0.0, 10.0, 0.0), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let int: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(10)).sum();
        // exact only above degree 2n-1 = 15, so degree 10 is exact
        assert_relative_eq!(int, 2.0 / 11.0, epsilon = 1e-13);
    }
}
