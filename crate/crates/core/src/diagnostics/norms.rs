//! Spacetime and time-slice curvature norms.
//!
//! Time integration is composite trapezoid over track snapshots; divergent
//! integrands near T are reported as truncated values at the requested
//! t_end, never extrapolated.

use crate::error::{Error, Result};
use crate::flow::FlowTrack;

/// Per-snapshot spatial integrals g(t_k) combined by trapezoid up to t_end,
/// with a linearly interpolated partial panel when t_end falls inside one.
fn time_trapezoid(times: &[f64], values: &[f64], t_end: f64) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::Argument("time integration needs at least 2 snapshots".into()));
    }
    if t_end < times[0] - 1e-12 || t_end > times[times.len() - 1] + 1e-12 {
        return Err(Error::Argument(format!(
            "t_end = {t_end} outside the track span [{}, {}]",
            times[0],
            times[times.len() - 1]
        )));
    }
    let mut acc = 0.0;
    for k in 0..times.len() - 1 {
        if times[k + 1] <= t_end {
            acc += 0.5 * (values[k] + values[k + 1]) * (times[k + 1] - times[k]);
        } else if times[k] < t_end {
            let lam = (t_end - times[k]) / (times[k + 1] - times[k]);
            let v_end = values[k] * (1.0 - lam) + values[k + 1] * lam;
            acc += 0.5 * (values[k] + v_end) * (t_end - times[k]);
            break;
        } else {
            break;
        }
    }
    Ok(acc)
}

/// ||H||_{L^alpha(M x [t0, t_end])} = (int int |H|^alpha dmu dt)^{1/alpha}.
pub fn spacetime_h_norm(track: &FlowTrack, alpha: f64, t_end: f64) -> Result<f64> {
    if alpha <= 0.0 {
        return Err(Error::Argument(format!("alpha must be positive, got {alpha}")));
    }
    let times = track.times();
    let mut values = Vec::with_capacity(times.len());
    for s in track.states() {
        values.push(s.h_power_integral(alpha)?);
    }
    Ok(time_trapezoid(&times, &values, t_end)?.powf(1.0 / alpha))
}

/// Result of the mixed-norm computation; `scaling_exact` records whether
/// the exponents satisfy n/q + 2/p = 1 (n = 2), which makes the norm
/// scale-invariant. Off-relation exponents warn rather than refuse.
#[derive(Debug, Clone, Copy)]
pub struct LpqNorm {
    pub value: f64,
    pub scaling_exact: bool,
}

/// ||A||_{L^{p,q}} = (int (int |A|^q dmu)^{p/q} dt)^{1/p}.
pub fn lpq_a_norm(track: &FlowTrack, p: f64, q: f64, t_end: f64) -> Result<LpqNorm> {
    if p <= 0.0 || q <= 0.0 {
        return Err(Error::Argument(format!(
            "exponents must be positive, got p = {p}, q = {q}"
        )));
    }
    let times = track.times();
    let mut values = Vec::with_capacity(times.len());
    for s in track.states() {
        values.push(s.a2_power_integral(q)?.powf(p / q));
    }
    let total = time_trapezoid(&times, &values, t_end)?;
    let scaling_exact = (2.0 / q + 2.0 / p - 1.0).abs() < 1e-12;
    Ok(LpqNorm { value: total.powf(1.0 / p), scaling_exact })
}

/// Series ||A||_{L^s(M_t)} (T - t)^{(s-n)/(2s)} over snapshots with t < T,
/// together with its maximum (the empirical type-I constant).
pub struct SliceSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub extremum: f64,
}

pub fn slice_ls_product(track: &FlowTrack, s_exp: f64, t_singular: f64) -> Result<SliceSeries> {
    let n = 2.0;
    if s_exp <= n {
        return Err(Error::Argument(format!(
            "slice exponent must exceed n = {n}, got {s_exp}"
        )));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for st in track.states() {
        let tau = t_singular - st.time();
        if tau <= 0.0 {
            continue;
        }
        let norm = st.a2_power_integral(s_exp)?.powf(1.0 / s_exp);
        times.push(st.time());
        values.push(norm * tau.powf((s_exp - n) / (2.0 * s_exp)));
    }
    if times.is_empty() {
        return Err(Error::Argument("no snapshots below the singular time".into()));
    }
    let extremum = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(SliceSeries { times, values, extremum })
}

/// Running supremum f(t) = sup_{t1 <= t} ||A||_{L^s(M_{t1})} and the series
/// f(t) (T-t)^{(s-n)/(2s)}; the reported extremum is the series minimum.
pub struct RunningSupSeries {
    pub times: Vec<f64>,
    pub running_sup: Vec<f64>,
    pub products: Vec<f64>,
    pub product_min: f64,
}

pub fn running_sup_ls(track: &FlowTrack, s_exp: f64, t_singular: f64) -> Result<RunningSupSeries> {
    let n = 2.0;
    if s_exp <= n {
        return Err(Error::Argument(format!(
            "slice exponent must exceed n = {n}, got {s_exp}"
        )));
    }
    let mut times = Vec::new();
    let mut running = Vec::new();
    let mut products = Vec::new();
    let mut sup = f64::NEG_INFINITY;
    for st in track.states() {
        let tau = t_singular - st.time();
        if tau <= 0.0 {
            continue;
        }
        let norm = st.a2_power_integral(s_exp)?.powf(1.0 / s_exp);
        sup = sup.max(norm);
        times.push(st.time());
        running.push(sup);
        products.push(sup * tau.powf((s_exp - n) / (2.0 * s_exp)));
    }
    if times.is_empty() {
        return Err(Error::Argument("no snapshots below the singular time".into()));
    }
    let product_min = products.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(RunningSupSeries { times, running_sup: running, products, product_min })
}

/// sup over the state of |A|^2 / H^2; vanishing mean curvature is an error
/// naming the offending node.
pub fn pinching_ratio(state: &crate::geometry::SurfaceState, h_floor: f64) -> Result<f64> {
    state.pinching_sup(h_floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{ExactSolution, PlaneSolution, SamplingMode, ShrinkingSphere};
    use crate::flow::{run_exact, DtPolicy, StopCriterion};
    use approx::assert_relative_eq;
    use nalgebra::{Point3, Unit, Vector3};
    use std::f64::consts::PI;

    fn sphere_track_to(tau_end: f64) -> FlowTrack {
        let sol = ExactSolution::Sphere(ShrinkingSphere::new(Point3::origin(), 1.0, 2).unwrap());
        run_exact(
            &sol,
            0.0,
            StopCriterion::TimeMax(0.25 - tau_end),
            &DtPolicy::default(),
            SamplingMode::Analytic,
        )
        .unwrap()
    }

    #[test]
    fn lpq_sphere_matches_closed_form() {
        // integral of |A|^4 dmu = 4 pi / (T - t): fourth power of the norm
        // is 4 pi log(T / (T - t_end))
        let track = sphere_track_to(1e-4);
        let t_end = track.last_time();
        let norm = lpq_a_norm(&track, 4.0, 4.0, t_end).unwrap();
        assert!(norm.scaling_exact);
        let exact = (4.0 * PI * (0.25f64 / (0.25 - t_end)).ln()).powf(0.25);
        // geometric snapshots make the trapezoid error a fixed small factor
        assert_relative_eq!(norm.value, exact, max_relative = 5e-3);
    }

    #[test]
    fn plane_norms_vanish() {
        let sol = ExactSolution::Plane(PlaneSolution {
            point: Point3::origin(),
            normal: Unit::new_normalize(Vector3::z()),
        });
        let track = run_exact(
            &sol,
            0.0,
            StopCriterion::TimeMax(1.0),
            &DtPolicy::default(),
            SamplingMode::Analytic,
        )
        .unwrap();
        assert_eq!(spacetime_h_norm(&track, 4.0, 1.0).unwrap(), 0.0);
        assert_eq!(lpq_a_norm(&track, 4.0, 4.0, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn slice_product_constant_on_sphere() {
        let track = sphere_track_to(1e-5);
        for (s_exp, expect) in [(4.0, (4.0 * PI).powf(0.25)), (8.0, PI.powf(0.125))] {
            let series = slice_ls_product(&track, s_exp, 0.25).unwrap();
            for v in &series.values {
                assert_relative_eq!(*v, expect, epsilon = 1e-6);
            }
            assert_relative_eq!(series.extremum, expect, epsilon = 1e-6);
        }
        assert!(slice_ls_product(&track, 2.0, 0.25).is_err());
    }

    #[test]
    fn running_sup_equals_slice_on_sphere() {
        // the slice norm increases in t on the sphere, so f equals it
        let track = sphere_track_to(1e-5);
        let series = running_sup_ls(&track, 4.0, 0.25).unwrap();
        let expect = (4.0 * PI).powf(0.25);
        assert_relative_eq!(series.product_min, expect, epsilon = 1e-6);
        for w in series.running_sup.windows(2) {
            assert!(w[1] + 1e-15 >= w[0]);
        }
    }

    #[test]
    fn alpha_divergence_rates() {
        // alpha = n + 2 = 4: value^4 grows by a constant increment per
        // epsilon halving; alpha = 2: increments shrink geometrically
        let sol = ExactSolution::Sphere(ShrinkingSphere::new(Point3::origin(), 1.0, 2).unwrap());
        // snapshots at quarter-halving ratio so halving ends are on-grid
        let ratio = 0.5f64.powf(0.25);
        let policy = DtPolicy { snapshot_ratio: ratio, ..DtPolicy::default() };
        let track = run_exact(
            &sol,
            0.0,
            StopCriterion::MaxSecondFormSq(2e4),
            &policy,
            SamplingMode::Analytic,
        )
        .unwrap();
        let eps0 = 0.025;
        let mut inc4 = Vec::new();
        let mut inc2 = Vec::new();
        let mut prev4 = 0.0;
        let mut prev2 = 0.0;
        for j in 0..5 {
            let eps = eps0 * 0.5f64.powi(j);
            let v4 = spacetime_h_norm(&track, 4.0, 0.25 - eps).unwrap().powi(4);
            let v2 = spacetime_h_norm(&track, 2.0, 0.25 - eps).unwrap().powi(2);
            if j > 0 {
                inc4.push(v4 - prev4);
                inc2.push(v2 - prev2);
            }
            prev4 = v4;
            prev2 = v2;
        }
        let base = inc4[0];
        for inc in &inc4 {
            assert!((inc - base).abs() / base < 0.05, "increments {inc4:?}");
        }
        for w in inc2.windows(2) {
            assert!(w[1] / w[0] <= 0.75, "alpha=2 increments {inc2:?}");
        }
    }

    #[test]
    fn rejects_bad_exponents() {
        let track = sphere_track_to(1e-3);
        assert!(spacetime_h_norm(&track, 0.0, 0.1).is_err());
        assert!(lpq_a_norm(&track, -1.0, 4.0, 0.1).is_err());
        let warn = lpq_a_norm(&track, 3.0, 4.0, 0.1).unwrap();
        assert!(!warn.scaling_exact);
    }
}
