//! The backward heat kernel centered at a spacetime point.

use nalgebra::Point3;
use std::f64::consts::PI;

use super::SpacetimePoint;
use crate::error::{Error, Result};
use crate::geometry::KERNEL_EXP_CUTOFF;

/// rho_{y0,T}(y, t) = (4 pi (T-t))^{-n/2} exp(-|y-y0|^2 / (4(T-t))).
/// Contributions with exponent below -40 short-circuit to zero.
pub fn backward_heat_kernel(sp: &SpacetimePoint, y: &Point3<f64>, t: f64, n: usize) -> Result<f64> {
    let tau = sp.t_singular - t;
    if tau <= 0.0 {
        return Err(Error::Argument(format!(
            "kernel needs t < T, got t = {t}, T = {}",
            sp.t_singular
        )));
    }
    let expo = -(y - sp.y0).norm_squared() / (4.0 * tau);
    if expo < KERNEL_EXP_CUTOFF {
        return Ok(0.0);
    }
    Ok((4.0 * PI * tau).powf(-(n as f64) / 2.0) * expo.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_value_at_center() {
        // T - t = 1/(4 pi) makes the prefactor one for n = 2
        let sp = SpacetimePoint::new(Point3::new(0.3, 0.1, -0.2), 1.0);
        let t = 1.0 - 1.0 / (4.0 * PI);
        let v = backward_heat_kernel(&sp, &sp.y0, t, 2).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn radial_symmetry() {
        let sp = SpacetimePoint::new(Point3::origin(), 0.5);
        let t = 0.2;
        let a = backward_heat_kernel(&sp, &Point3::new(0.3, 0.4, 0.0), t, 2).unwrap();
        let b = backward_heat_kernel(&sp, &Point3::new(0.0, 0.3, 0.4), t, 2).unwrap();
        let c = backward_heat_kernel(&sp, &Point3::new(0.5, 0.0, 0.0), t, 2).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-15);
        assert_relative_eq!(a, c, epsilon = 1e-15);
    }

    #[test]
    fn cutoff_short_circuits() {
        let sp = SpacetimePoint::new(Point3::origin(), 1.0);
        let t = 0.0;
        // |y - y0|^2 = 4 (T - t) * 40 sits exactly at the cutoff
        let y = Point3::new((4.0_f64 * 40.0).sqrt(), 0.0, 0.0);
        assert_eq!(backward_heat_kernel(&sp, &y, t, 2).unwrap(), 0.0);
    }

    #[test]
    fn rejects_future_times() {
        let sp = SpacetimePoint::new(Point3::origin(), 1.0);
        assert!(backward_heat_kernel(&sp, &Point3::origin(), 1.0, 2).is_err());
        assert!(backward_heat_kernel(&sp, &Point3::origin(), 1.5, 2).is_err());
    }
}
