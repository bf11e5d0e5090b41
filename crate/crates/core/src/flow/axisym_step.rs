//! Semi-implicit axisymmetric stepping for u_t = u_xx/(1+u_x^2) - 1/u.
//!
//! The diffusion term is treated implicitly with the coefficient
//! 1/(1+u_x^2) frozen at the current state; the reaction -1/u stays
//! explicit. Grids may be non-uniform. Periodic profiles lead to a cyclic
//! tridiagonal system, reflecting ones to Neumann folding.

use crate::error::{Error, Result};
use crate::geometry::{AxisymProfile, BoundaryKind};
use crate::linalg::{solve_cyclic_tridiagonal, solve_tridiagonal};

/// Outcome of one axisymmetric step.
pub enum AxisymStep {
    Stepped(AxisymProfile),
    /// The radius would cross zero within the step: the caller freezes the
    /// state at the last valid time and flags the singularity.
    WouldVanish { min_radius: f64 },
}

pub fn step_axisym(profile: &AxisymProfile, dt: f64) -> Result<AxisymStep> {
    if dt <= 0.0 {
        return Err(Error::Argument(format!("dt must be positive, got {dt}")));
    }
    let n = profile.grid().len();
    let u = profile.radii();
    let (ux, _) = profile.derivatives();

    // explicit reaction first; refuse if it already drives u below zero
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        rhs[i] = u[i] - dt / u[i];
    }

    // implicit diffusion with frozen coefficient
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut alpha = 0.0;
    let mut beta = 0.0;
    for i in 0..n {
        let coef = 1.0 / (1.0 + ux[i] * ux[i]);
        let (hm, hp) = spacing(profile, i);
        let cm = 2.0 / (hm * (hm + hp));
        let cp = 2.0 / (hp * (hm + hp));
        let c0 = cm + cp;
        diag[i] = 1.0 + dt * coef * c0;
        match profile.boundary() {
            BoundaryKind::Periodic => {
                if i == 0 {
                    alpha = -dt * coef * cm; // couples row 0 to column n-1
                    sup[i] = -dt * coef * cp;
                } else if i == n - 1 {
                    beta = -dt * coef * cp; // couples row n-1 to column 0
                    sub[i] = -dt * coef * cm;
                } else {
                    sub[i] = -dt * coef * cm;
                    sup[i] = -dt * coef * cp;
                }
            }
            BoundaryKind::Reflecting => {
                // ghost mirror: u_{-1} = u_1, u_{n} = u_{n-2}
                if i == 0 {
                    sup[i] = -dt * coef * (cm + cp);
                } else if i == n - 1 {
                    sub[i] = -dt * coef * (cm + cp);
                } else {
                    sub[i] = -dt * coef * cm;
                    sup[i] = -dt * coef * cp;
                }
            }
        }
    }
    let new_u = match profile.boundary() {
        BoundaryKind::Periodic => solve_cyclic_tridiagonal(&sub, &diag, &sup, alpha, beta, &rhs)?,
        BoundaryKind::Reflecting => solve_tridiagonal(&sub, &diag, &sup, &rhs)?,
    };

    let min = new_u.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Ok(AxisymStep::WouldVanish { min_radius: min });
    }
    Ok(AxisymStep::Stepped(profile.with_radii(
        new_u,
        profile.time() + dt,
    )?))
}

fn spacing(profile: &AxisymProfile, i: usize) -> (f64, f64) {
    let x = profile.grid();
    let n = x.len();
    match profile.boundary() {
        BoundaryKind::Periodic => {
            let hm = if i == 0 {
                // wrap spacing equals the trailing spacing of the period
                x[n - 1] - x[n - 2]
            } else {
                x[i] - x[i - 1]
            };
            let hp = if i == n - 1 { x[n - 1] - x[n - 2] } else { x[i + 1] - x[i] };
            (hm, hp)
        }
        BoundaryKind::Reflecting => {
            let hm = if i == 0 { x[1] - x[0] } else { x[i] - x[i - 1] };
            let hp = if i == n - 1 { x[n - 1] - x[n - 2] } else { x[i + 1] - x[i] };
            (hm, hp)
        }
    }
}
