//! Surfaces of revolution about the x-axis, stored as a radius profile.
//!
//! A node (x_i, u_i) describes the circle {(x_i, u_i cos a, u_i sin a)}.
//! Principal curvatures of the revolved graph:
//!   k_profile  = -u_xx / (1 + u_x^2)^{3/2}
//!   k_rotation =  1 / (u sqrt(1 + u_x^2))
//! with H their sum (outward normal (-u_x, cos a, sin a)/sqrt(1+u_x^2)).

use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

/// Allowed ratio between the largest and smallest grid spacing.
pub const MAX_SPACING_RATIO: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// u and its derivatives wrap around; the grid covers one period
    /// (the last node is not a duplicate of the first).
    Periodic,
    /// Even reflection at both ends (u_x = 0 there).
    Reflecting,
}

/// Radius profile of a surface of revolution at a fixed flow time.
#[derive(Debug, Clone)]
pub struct AxisymProfile {
    grid: Vec<f64>,
    radii: Vec<f64>,
    boundary: BoundaryKind,
    time: f64,
}

impl AxisymProfile {
    pub fn new(grid: Vec<f64>, radii: Vec<f64>, boundary: BoundaryKind, time: f64) -> Result<Self> {
        if grid.len() < 3 || grid.len() != radii.len() {
            return Err(Error::Structural(format!(
                "profile needs matching grid/radii of length >= 3, got {}/{}",
                grid.len(),
                radii.len()
            )));
        }
        if !time.is_finite() {
            return Err(Error::Argument("profile time must be finite".into()));
        }
        let mut min_h = f64::INFINITY;
        let mut max_h: f64 = 0.0;
        for w in grid.windows(2) {
            let h = w[1] - w[0];
            if h <= 0.0 {
                return Err(Error::Structural("grid must be strictly increasing".into()));
            }
            min_h = min_h.min(h);
            max_h = max_h.max(h);
        }
        if max_h / min_h > MAX_SPACING_RATIO {
            return Err(Error::Structural(format!(
                "grid spacing ratio {:.3e} exceeds {MAX_SPACING_RATIO:.0e}",
                max_h / min_h
            )));
        }
        if let Some(i) = radii.iter().position(|&u| u <= 0.0) {
            return Err(Error::Structural(format!(
                "radius must stay positive, node {i} has u = {}",
                radii[i]
            )));
        }
        Ok(AxisymProfile { grid, radii, boundary, time })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn boundary(&self) -> BoundaryKind {
        self.boundary
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn min_radius(&self) -> f64 {
        self.radii.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn min_spacing(&self) -> f64 {
        self.grid
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn mean_spacing(&self) -> f64 {
        (self.grid[self.grid.len() - 1] - self.grid[0]) / (self.grid.len() - 1) as f64
    }

    pub fn with_radii(&self, radii: Vec<f64>, time: f64) -> Result<Self> {
        Self::new(self.grid.clone(), radii, self.boundary, time)
    }

    fn neighbor(&self, i: usize, offset: i64) -> (f64, f64) {
        // returns (x, u) of the neighbor, unwrapping boundary conditions
        let n = self.grid.len() as i64;
        let j = i as i64 + offset;
        match self.boundary {
            BoundaryKind::Periodic => {
                let period = self.period();
                let mut shift = 0.0;
                let mut k = j;
                while k < 0 {
                    k += n;
                    shift -= period;
                }
                while k >= n {
                    k -= n;
                    shift += period;
                }
                (self.grid[k as usize] + shift, self.radii[k as usize])
            }
            BoundaryKind::Reflecting => {
                if j < 0 {
                    let k = (-j) as usize;
                    (2.0 * self.grid[0] - self.grid[k], self.radii[k])
                } else if j >= n {
                    let k = (2 * (n - 1) - j) as usize;
                    (2.0 * self.grid[(n - 1) as usize] - self.grid[k], self.radii[k])
                } else {
                    (self.grid[j as usize], self.radii[j as usize])
                }
            }
        }
    }

    fn period(&self) -> f64 {
        // one period = span plus one trailing spacing (last node wraps to first)
        let n = self.grid.len();
        let span = self.grid[n - 1] - self.grid[0];
        let h_last = if n >= 2 {
            self.grid[n - 1] - self.grid[n - 2]
        } else {
            span
        };
        span + h_last
    }

    /// Per-node u_x and u_xx via second-order differences on the
    /// (possibly non-uniform) grid.
    pub fn derivatives(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.len();
        let mut ux = vec![0.0; n];
        let mut uxx = vec![0.0; n];
        for i in 0..n {
            let (xm, um) = self.neighbor(i, -1);
            let (xp, up) = self.neighbor(i, 1);
            let x0 = self.grid[i];
            let u0 = self.radii[i];
            let hm = x0 - xm;
            let hp = xp - x0;
            ux[i] = (up * hm * hm - um * hp * hp + u0 * (hp * hp - hm * hm))
                / (hm * hp * (hm + hp));
            uxx[i] = 2.0 * (um * hp + up * hm - u0 * (hm + hp)) / (hm * hp * (hm + hp));
        }
        (ux, uxx)
    }

    /// Per-node geometry of the revolved surface.
    pub fn node_geometry(&self) -> ProfileGeometry {
        let n = self.grid.len();
        let (ux, uxx) = self.derivatives();
        let mut h = vec![0.0; n];
        let mut a2 = vec![0.0; n];
        let mut arc = vec![0.0; n];
        for i in 0..n {
            let w = 1.0 + ux[i] * ux[i];
            let k1 = -uxx[i] / w.powf(1.5);
            let k2 = 1.0 / (self.radii[i] * w.sqrt());
            h[i] = k1 + k2;
            a2[i] = k1 * k1 + k2 * k2;
            arc[i] = w.sqrt();
        }
        ProfileGeometry { ux, uxx, mean_curvature: h, second_form_sq: a2, arc_factor: arc }
    }

    /// Trapezoid weights in x (one per node, respecting the boundary kind).
    pub fn node_weights(&self) -> Vec<f64> {
        let n = self.grid.len();
        let mut w = vec![0.0; n];
        match self.boundary {
            BoundaryKind::Periodic => {
                for i in 0..n {
                    let (xm, _) = self.neighbor(i, -1);
                    let (xp, _) = self.neighbor(i, 1);
                    w[i] = 0.5 * (xp - xm);
                }
            }
            BoundaryKind::Reflecting => {
                for i in 0..n {
                    let lo = if i == 0 { self.grid[0] } else { 0.5 * (self.grid[i - 1] + self.grid[i]) };
                    let hi = if i == n - 1 {
                        self.grid[n - 1]
                    } else {
                        0.5 * (self.grid[i] + self.grid[i + 1])
                    };
                    w[i] = hi - lo;
                }
            }
        }
        w
    }

    /// Integral of an axisymmetric function of the node index:
    /// sum_i g(i) * 2 pi u_i sqrt(1+u_x^2) dx_i.
    pub fn integrate_axisymmetric<F: Fn(usize) -> f64>(
        &self,
        geo: &ProfileGeometry,
        g: F,
    ) -> f64 {
        let w = self.node_weights();
        let mut total = 0.0;
        for i in 0..self.grid.len() {
            total += g(i) * 2.0 * PI * self.radii[i] * geo.arc_factor[i] * w[i];
        }
        total
    }

    /// Integral of a general scalar field over the revolved surface.
    /// Each ring integral is evaluated by the periodic trapezoid rule with
    /// doubling until the requested relative tolerance is met.
    pub fn integrate_field<F: Fn(&Point3<f64>) -> f64>(&self, f: F, rel_tol: f64) -> f64 {
        let geo = self.node_geometry();
        let w = self.node_weights();
        let mut total = 0.0;
        for i in 0..self.grid.len() {
            let ring = self.ring_integral(i, &f, rel_tol);
            total += ring * self.radii[i] * geo.arc_factor[i] * w[i];
        }
        total
    }

    /// Integral of f over angles of ring i (without the u*arc*dx factor).
    fn ring_integral<F: Fn(&Point3<f64>) -> f64>(&self, i: usize, f: &F, rel_tol: f64) -> f64 {
        let x = self.grid[i];
        let u = self.radii[i];
        let eval = |n_theta: usize| -> f64 {
            let mut acc = 0.0;
            for k in 0..n_theta {
                let th = 2.0 * PI * k as f64 / n_theta as f64;
                let p = Point3::new(x, u * th.cos(), u * th.sin());
                acc += f(&p);
            }
            acc * 2.0 * PI / n_theta as f64
        };
        let mut n = 16;
        let mut prev = eval(n);
        loop {
            n *= 2;
            let cur = eval(n);
            if (cur - prev).abs() <= rel_tol * (cur.abs() + 1e-300) || n >= 1 << 16 {
                return cur;
            }
            prev = cur;
        }
    }

    /// Geometry samples around each ring at a fixed angular resolution.
    /// The per-sample normal is the outward surface normal.
    pub fn sample_rings(&self, n_theta: usize) -> Vec<super::GeometrySample> {
        let geo = self.node_geometry();
        let w = self.node_weights();
        let mut out = Vec::with_capacity(self.grid.len() * n_theta);
        for i in 0..self.grid.len() {
            let u = self.radii[i];
            let x = self.grid[i];
            let wring = u * geo.arc_factor[i] * w[i] * 2.0 * PI / n_theta as f64;
            let inv = 1.0 / geo.arc_factor[i];
            for k in 0..n_theta {
                let th = 2.0 * PI * k as f64 / n_theta as f64;
                let (c, s) = (th.cos(), th.sin());
                out.push(super::GeometrySample {
                    position: Point3::new(x, u * c, u * s),
                    weight: wring,
                    normal: Vector3::new(-geo.ux[i] * inv, c * inv, s * inv),
                    mean_curvature: geo.mean_curvature[i],
                    second_form_sq: geo.second_form_sq[i],
                });
            }
        }
        out
    }

    /// Distance from a point to the surface (minimum over rings).
    pub fn distance_to_point(&self, p: &Point3<f64>) -> f64 {
        let rho = (p.y * p.y + p.z * p.z).sqrt();
        let mut best = f64::INFINITY;
        for i in 0..self.grid.len() {
            let dx = p.x - self.grid[i];
            let dr = rho - self.radii[i];
            let d = (dx * dx + dr * dr).sqrt();
            if d < best {
                best = d;
            }
        }
        best
    }

    /// Shortest distance from the circle of ring i to a point.
    pub fn ring_distance(&self, i: usize, p: &Point3<f64>) -> f64 {
        let rho = (p.y * p.y + p.z * p.z).sqrt();
        let dx = p.x - self.grid[i];
        let dr = rho - self.radii[i];
        (dx * dx + dr * dr).sqrt()
    }

    pub fn total_area(&self) -> f64 {
        let geo = self.node_geometry();
        self.integrate_axisymmetric(&geo, |_| 1.0)
    }
}

/// Per-node derivative and curvature data for a profile.
#[derive(Debug, Clone)]
pub struct ProfileGeometry {
    pub ux: Vec<f64>,
    pub uxx: Vec<f64>,
    pub mean_curvature: Vec<f64>,
    pub second_form_sq: Vec<f64>,
    /// sqrt(1 + u_x^2), the arc-length factor of the profile curve.
    pub arc_factor: Vec<f64>,
}

impl ProfileGeometry {
    pub fn max_second_form_sq(&self) -> f64 {
        self.second_form_sq.iter().cloned().fold(0.0, f64::max)
    }
}

/// Uniform grid over [lo, hi] with n nodes.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Dumbbell initial profile on [-half_length, half_length]: bulbs of the
/// given radius at the reflecting ends and a thin neck at x = 0.
pub fn dumbbell_profile(
    neck_radius: f64,
    bulb_radius: f64,
    half_length: f64,
    nodes: usize,
    time: f64,
) -> Result<AxisymProfile> {
    if neck_radius <= 0.0 || bulb_radius <= neck_radius {
        return Err(Error::Argument(
            "dumbbell needs 0 < neck_radius < bulb_radius".into(),
        ));
    }
    let grid = uniform_grid(-half_length, half_length, nodes);
    let amp = bulb_radius - neck_radius;
    let radii = grid
        .iter()
        .map(|&x| neck_radius + amp * (PI * x / (2.0 * half_length)).sin().powi(2))
        .collect();
    AxisymProfile::new(grid, radii, BoundaryKind::Reflecting, time)
}
