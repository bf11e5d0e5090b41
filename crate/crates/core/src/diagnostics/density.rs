//! Gaussian density along a track, its monotonicity audit, and the
//! extrapolated density limit with regularity verdicts.

use super::{SpacetimePoint, Verdict};
use crate::error::{Error, Result};
use crate::flow::FlowTrack;
use crate::geometry::{Provenance, Representation, SurfaceState};

/// Allowed density increase per snapshot before a violation is recorded.
pub const MONOTONE_TOL_ANALYTIC: f64 = 1e-6;
pub const MONOTONE_TOL_DISCRETE: f64 = 1e-3;

/// Verdict margins: below-2 needs Theta < 2 - BELOW2_MARGIN, the unit
/// verdict needs |Theta - 1| < WHITE_MARGIN. Configuration, not constants
/// with a derivation: the criteria are open inequalities.
pub const BELOW2_MARGIN: f64 = 0.05;
pub const WHITE_MARGIN: f64 = 0.02;

/// Gaussian density Theta(t) = integral of rho_{y0,T} over M_t.
pub fn gaussian_density(track: &FlowTrack, sp: &SpacetimePoint, t: f64) -> Result<f64> {
    if t >= sp.t_singular {
        return Err(Error::Argument(format!(
            "density needs t < T, got t = {t}, T = {}",
            sp.t_singular
        )));
    }
    let state = track.state_at(t)?;
    state.kernel_integral(&sp.y0, sp.t_singular - t)
}

/// Density evaluated directly on a state.
pub fn state_density(state: &SurfaceState, sp: &SpacetimePoint) -> Result<f64> {
    let tau = sp.t_singular - state.time();
    if tau <= 0.0 {
        return Err(Error::Argument(format!(
            "density needs t < T, got t = {}, T = {}",
            state.time(),
            sp.t_singular
        )));
    }
    state.kernel_integral(&sp.y0, tau)
}

/// Density series, monotonicity violations and the dissipation proxy.
#[derive(Debug, Clone)]
pub struct DensityReport {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// integral of rho |H - <x-y0,nu>/(2(T-t))|^2 at each snapshot;
    /// vanishes identically on a self-shrinker centered at sp.
    pub dissipation: Vec<f64>,
    /// (time, increase) pairs where the density rose beyond tolerance.
    pub violations: Vec<(f64, f64)>,
    pub tolerance: f64,
    pub provenance: Provenance,
    pub limit: Option<f64>,
    pub verdict: Verdict,
}

/// Per-snapshot density with the monotonicity audit.
pub fn monotonicity_audit(track: &FlowTrack, sp: &SpacetimePoint) -> Result<DensityReport> {
    let below: Vec<&SurfaceState> = track
        .states()
        .iter()
        .filter(|s| s.time() < sp.t_singular)
        .collect();
    if below.len() < 3 {
        return Err(Error::Argument(format!(
            "monotonicity audit needs at least 3 snapshots below T, found {}",
            below.len()
        )));
    }
    let provenance = if below
        .iter()
        .all(|s| matches!(s.representation(), Representation::Exact(_)))
    {
        Provenance::Analytic
    } else {
        Provenance::Discrete
    };
    let tol = match provenance {
        Provenance::Analytic => MONOTONE_TOL_ANALYTIC,
        Provenance::Discrete => MONOTONE_TOL_DISCRETE,
    };

    let mut times = Vec::with_capacity(below.len());
    let mut values = Vec::with_capacity(below.len());
    let mut dissipation = Vec::with_capacity(below.len());
    for s in &below {
        let tau = sp.t_singular - s.time();
        times.push(s.time());
        values.push(s.kernel_integral(&sp.y0, tau)?);
        dissipation.push(s.dissipation_integral(&sp.y0, tau)?);
    }
    let mut violations = Vec::new();
    for k in 1..values.len() {
        let rise = values[k] - values[k - 1];
        if rise > tol {
            violations.push((times[k], rise));
        }
    }
    Ok(DensityReport {
        times,
        values,
        dissipation,
        violations,
        tolerance: tol,
        provenance,
        limit: None,
        verdict: Verdict::Inconclusive,
    })
}

/// Smallest time-to-blowup at which a discrete snapshot can still resolve
/// the kernel: the squared mean resolution of the final state.
fn quadrature_floor(track: &FlowTrack) -> f64 {
    let last = track.states().last().expect("non-empty track");
    match last.representation() {
        Representation::Mesh(m) => {
            let h = m.mean_edge_length();
            h * h
        }
        Representation::Profile(p) => {
            let h = p.mean_spacing();
            h * h
        }
        Representation::Exact(_) => 0.0,
    }
}

/// Density limit by extrapolation in (T - t) over the last snapshots,
/// with the regularity verdicts of the density thresholds.
pub fn density_limit(track: &FlowTrack, sp: &SpacetimePoint) -> Result<DensityReport> {
    let mut report = monotonicity_audit(track, sp)?;
    let floor = quadrature_floor(track);

    // usable snapshots: below T and above the resolution floor
    let usable: Vec<(f64, f64)> = report
        .times
        .iter()
        .zip(&report.values)
        .filter(|(t, _)| sp.t_singular - **t >= floor)
        .map(|(t, v)| (sp.t_singular - *t, *v))
        .collect();
    if usable.len() < 5 {
        report.verdict = Verdict::Inconclusive;
        return Ok(report);
    }
    let tail = &usable[usable.len() - 5..];
    let scale = tail.iter().fold(0.0f64, |a, (_, v)| a.max(v.abs())).max(1e-300);
    let spread = tail.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    let flat = spread <= 1e-9 * scale;
    let tau_first = usable[0].0;
    let tau_last = usable[usable.len() - 1].0;
    if !flat && tau_last > tau_first / 4.0 {
        // a varying series that never approached T: refuse to extrapolate
        report.verdict = Verdict::Inconclusive;
        return Ok(report);
    }

    let limit = extrapolate_tail(tail);
    report.limit = Some(limit);
    report.verdict = if (limit - 1.0).abs() < WHITE_MARGIN {
        Verdict::RegularUnitDensity
    } else if limit < 2.0 - BELOW2_MARGIN {
        Verdict::RegularBelowTwo
    } else {
        Verdict::Inconclusive
    };
    Ok(report)
}

/// Aitken extrapolation when the tail contracts geometrically; linear
/// intercept in tau as the fallback; the last value when already flat.
fn extrapolate_tail(tail: &[(f64, f64)]) -> f64 {
    let n = tail.len();
    let vals: Vec<f64> = tail.iter().map(|(_, v)| *v).collect();
    let taus: Vec<f64> = tail.iter().map(|(t, _)| *t).collect();
    let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
    let spread = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread <= 1e-9 * scale {
        return vals[n - 1];
    }
    let d1 = vals[n - 2] - vals[n - 3];
    let d2 = vals[n - 1] - vals[n - 2];
    if d1.abs() > 1e-14 * scale {
        let ratio = d2 / d1;
        if ratio > 0.05 && ratio < 0.95 {
            return vals[n - 1] + d2 * ratio / (1.0 - ratio);
        }
    }
    // linear fit of Theta against tau, intercept at tau = 0
    match crate::linalg::linear_fit(&taus, &vals) {
        Ok((a, _, _)) => a,
        Err(_) => vals[n - 1],
    }
}
