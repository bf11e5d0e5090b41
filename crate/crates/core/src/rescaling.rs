//! Parabolic dilation of spacetime data about a candidate singular point,
//! self-shrinker residuals of the rescaled flow, and heuristic tangent-flow
//! classification from density and residual.
//!
//! The dilation maps (y, t) to (lambda (y - y0), lambda^2 (t - T)): sampled
//! geometry is transformed coordinate-by-coordinate, never resampled.

use nalgebra::Point3;

use crate::diagnostics::SpacetimePoint;
use crate::error::{Error, Result};
use crate::exact::{catalog_density, ShrinkerKind};
use crate::flow::FlowTrack;
use crate::geometry::SurfaceState;

/// A flow track in dilated coordinates; rescaled times s are negative.
#[derive(Debug, Clone)]
pub struct RescaledTrack {
    pub sp: SpacetimePoint,
    pub lambda: f64,
    states: Vec<SurfaceState>,
}

impl RescaledTrack {
    /// States in rescaled coordinates; `SurfaceState::time` holds s < 0.
    pub fn states(&self) -> &[SurfaceState] {
        &self.states
    }

    pub fn rescaled_times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.time()).collect()
    }

    pub fn first_s(&self) -> f64 {
        self.states[0].time()
    }

    pub fn last_s(&self) -> f64 {
        self.states[self.states.len() - 1].time()
    }
}

/// Exact coordinate transform of every sampled state.
pub fn parabolic_dilate(
    track: &FlowTrack,
    sp: &SpacetimePoint,
    lambda: f64,
) -> Result<RescaledTrack> {
    if lambda <= 0.0 {
        return Err(Error::Argument(format!(
            "dilation scale must be positive, got {lambda}"
        )));
    }
    let mut states = Vec::with_capacity(track.states().len());
    for st in track.states() {
        let t = st.time();
        if t >= sp.t_singular {
            return Err(Error::Argument(format!(
                "dilation requires all track times below T = {}; found t = {t}",
                sp.t_singular
            )));
        }
        let s = lambda * lambda * (t - sp.t_singular);
        states.push(st.dilated(&sp.y0, lambda, s)?);
    }
    Ok(RescaledTrack { sp: *sp, lambda, states })
}

/// integral over the window of rho_{0,0} |H - <x, nu>/(-2s)|^2 dmu ds on
/// the rescaled track: the dissipation of the dilated monotonicity
/// identity, vanishing exactly on a self-shrinker.
pub fn shrinker_residual(rtrack: &RescaledTrack, s_window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = s_window;
    if !(lo < hi && hi < 0.0) {
        return Err(Error::Argument(format!(
            "window must satisfy lo < hi < 0, got [{lo}, {hi}]"
        )));
    }
    if rtrack.first_s() > lo + 1e-12 || rtrack.last_s() < hi - 1e-12 {
        return Err(Error::Argument(format!(
            "empty window coverage: track spans [{}, {}], window [{lo}, {hi}]",
            rtrack.first_s(),
            rtrack.last_s()
        )));
    }

    let origin = Point3::origin();
    let times: Vec<f64> = rtrack.rescaled_times();
    let dissipation_at = |k: usize| -> Result<f64> {
        let st = &rtrack.states()[k];
        st.dissipation_integral(&origin, -st.time())
    };

    // trapezoid over the window with interpolated ends
    let mut acc = 0.0;
    for k in 0..times.len() - 1 {
        let (a, b) = (times[k], times[k + 1]);
        if b <= lo || a >= hi {
            continue;
        }
        let mut va = dissipation_at(k)?;
        let mut vb = dissipation_at(k + 1)?;
        let mut ta = a;
        let mut tb = b;
        if a < lo {
            let lam = (lo - a) / (b - a);
            va = va * (1.0 - lam) + vb * lam;
            ta = lo;
        }
        if b > hi {
            let lam = (hi - a) / (b - a);
            vb = dissipation_at(k)? * (1.0 - lam) + vb * lam;
            tb = hi;
        }
        acc += 0.5 * (va + vb) * (tb - ta);
    }
    Ok(acc)
}

/// Tangent-flow label with the evidence that produced it. Classification
/// is heuristic: multiplicity cannot be certified from sampled data.
#[derive(Debug, Clone)]
pub struct Classification {
    pub label: Option<ShrinkerKind>,
    pub density: f64,
    pub residual: f64,
    pub residual_threshold: f64,
    /// Relative gap to the matched catalog density.
    pub density_gap: f64,
    pub confidence: &'static str,
}

/// Default residual threshold separating shrinker-like rescalings from
/// off-class data, calibrated on the catalog oracles.
pub const RESIDUAL_THRESHOLD: f64 = 1e-2;

/// Maximum relative gap to a catalog density for a label.
pub const DENSITY_GAP: f64 = 0.05;

/// Nearest-catalog-density classification, guarded by the residual.
pub fn tangent_flow_classify(
    rtrack: &RescaledTrack,
    density_at_sp: f64,
    s_window: (f64, f64),
    residual_threshold: f64,
) -> Result<Classification> {
    let residual = shrinker_residual(rtrack, s_window)?;
    let catalog = [
        ShrinkerKind::Plane,
        ShrinkerKind::Sphere,
        ShrinkerKind::Cylinder,
    ];
    let mut best: Option<(ShrinkerKind, f64)> = None;
    for kind in catalog {
        let gap = (density_at_sp - catalog_density(kind)).abs() / catalog_density(kind);
        if best.is_none_or(|(_, g)| gap < g) {
            best = Some((kind, gap));
        }
    }
    let (kind, gap) = best.expect("catalog non-empty");
    let label = if residual < residual_threshold && gap < DENSITY_GAP {
        Some(kind)
    } else {
        None
    };
    Ok(Classification {
        label,
        density: density_at_sp,
        residual,
        residual_threshold,
        density_gap: gap,
        confidence: "heuristic",
    })
}
