//! Time integration of the flow with stopping logic, snapshot scheduling
//! and blow-up estimation.

pub mod axisym_step;
pub mod mesh_step;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::exact::{ExactSolution, SamplingMode};
use crate::geometry::{Representation, SurfaceState};
use crate::linalg::linear_fit;

pub use axisym_step::{step_axisym, AxisymStep};
pub use mesh_step::{refine_mesh, step_semi_implicit, MeshStep};

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    TimeReached,
    CurvatureThreshold,
    Degenerate,
    Extinction,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::TimeReached => write!(f, "time_reached"),
            StopReason::CurvatureThreshold => write!(f, "curvature_threshold"),
            StopReason::Degenerate => write!(f, "degenerate"),
            StopReason::Extinction => write!(f, "extinction"),
        }
    }
}

/// Stop condition for `run_until`.
#[derive(Debug, Clone, Copy)]
pub enum StopCriterion {
    /// Run to this time.
    TimeMax(f64),
    /// Stop once max |A|^2 reaches the threshold.
    MaxSecondFormSq(f64),
    /// Stop once the minimum profile radius drops to the threshold.
    MinRadius(f64),
}

/// Time-step policy. dt = c_stab / max|A|^2; explicit sub-operations
/// (the axisymmetric reaction term) are additionally capped by
/// c_mesh * h_min^2 when `c_mesh` is set.
#[derive(Debug, Clone, Copy)]
pub struct DtPolicy {
    pub c_stab: f64,
    pub c_mesh: Option<f64>,
    /// Snapshots follow a geometric grid in estimated (T - t) with this ratio.
    pub snapshot_ratio: f64,
    /// dt below this is treated as no progress.
    pub dt_min: f64,
    pub max_steps: usize,
    /// Optional long-edge-split / flip pass: refine whenever the longest
    /// edge exceeds this factor times the mean. Off by default; mesh
    /// degradation near a singularity is an accepted stop.
    pub remesh_factor: Option<f64>,
}

impl Default for DtPolicy {
    fn default() -> Self {
        DtPolicy {
            c_stab: 0.1,
            c_mesh: Some(0.25),
            snapshot_ratio: 0.8,
            dt_min: 1e-14,
            max_steps: 2_000_000,
            remesh_factor: None,
        }
    }
}

/// Per-snapshot scalar summary.
#[derive(Debug, Clone, Copy)]
pub struct StepSummary {
    pub step: usize,
    pub time: f64,
    pub max_a2: f64,
    pub area: f64,
    pub min_radius: Option<f64>,
    pub dt: f64,
}

/// Time-ordered sequence of surface states with summaries.
#[derive(Debug, Clone)]
pub struct FlowTrack {
    states: Vec<SurfaceState>,
    summaries: Vec<StepSummary>,
    stop_reason: StopReason,
}

/// Area may wiggle by this relative amount per snapshot on discrete tracks.
pub const AREA_SLACK: f64 = 1e-3;

impl FlowTrack {
    pub fn new(
        states: Vec<SurfaceState>,
        summaries: Vec<StepSummary>,
        stop_reason: StopReason,
    ) -> Result<Self> {
        if states.is_empty() || states.len() != summaries.len() {
            return Err(Error::Argument(format!(
                "track needs matching non-empty states/summaries, got {}/{}",
                states.len(),
                summaries.len()
            )));
        }
        for k in 1..states.len() {
            if states[k].time() <= states[k - 1].time() {
                return Err(Error::Argument("track times must be strictly increasing".into()));
            }
            if summaries[k].area > summaries[k - 1].area * (1.0 + AREA_SLACK) {
                return Err(Error::Argument(format!(
                    "area increased beyond slack between snapshots {} and {}: {} -> {}",
                    k - 1,
                    k,
                    summaries[k - 1].area,
                    summaries[k].area
                )));
            }
        }
        Ok(FlowTrack { states, summaries, stop_reason })
    }

    pub fn states(&self) -> &[SurfaceState] {
        &self.states
    }

    pub fn summaries(&self) -> &[StepSummary] {
        &self.summaries
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop_reason
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.time()).collect()
    }

    pub fn first_time(&self) -> f64 {
        self.states[0].time()
    }

    pub fn last_time(&self) -> f64 {
        self.states[self.states.len() - 1].time()
    }

    /// State at exactly time t (within a tiny tolerance).
    pub fn state_at(&self, t: f64) -> Result<&SurfaceState> {
        let scale = self.last_time().abs().max(1.0);
        self.states
            .iter()
            .find(|s| (s.time() - t).abs() <= 1e-12 * scale)
            .ok_or_else(|| Error::Argument(format!("no snapshot at t = {t}")))
    }

    /// Neighboring snapshot indices bracketing time t.
    pub fn bracket(&self, t: f64) -> Result<(usize, usize, f64)> {
        if t < self.first_time() - 1e-12 || t > self.last_time() + 1e-12 {
            return Err(Error::Argument(format!(
                "t = {t} outside track span [{}, {}]",
                self.first_time(),
                self.last_time()
            )));
        }
        let times = self.times();
        for k in 0..times.len() - 1 {
            if t >= times[k] - 1e-15 && t <= times[k + 1] + 1e-15 {
                let lam = if times[k + 1] > times[k] {
                    ((t - times[k]) / (times[k + 1] - times[k])).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                return Ok((k, k + 1, lam));
            }
        }
        Ok((times.len() - 1, times.len() - 1, 0.0))
    }
}

/// Exact-solution track sampled on a schedule (analytic or discretized).
pub fn run_exact(
    solution: &ExactSolution,
    t_start: f64,
    stop: StopCriterion,
    policy: &DtPolicy,
    mode: SamplingMode,
) -> Result<FlowTrack> {
    let t_end = solution.extinction_time();
    let mut times = Vec::new();
    match stop {
        StopCriterion::TimeMax(t_max) => {
            match t_end {
                Some(te) if t_max >= te => {
                    return Err(Error::Argument(format!(
                        "t_max = {t_max} reaches the extinction time {te}"
                    )));
                }
                _ => {}
            }
            // geometric in (T - t) when T exists, uniform otherwise;
            // the first level after the start sits half a ratio-step down
            match t_end {
                Some(te) => {
                    let tau0 = te - t_start;
                    let tau_stop = te - t_max;
                    times.push(t_start);
                    let mut tau = tau0 * policy.snapshot_ratio.sqrt();
                    while tau > tau_stop * (1.0 + 1e-12) {
                        times.push(te - tau);
                        tau *= policy.snapshot_ratio;
                    }
                    times.push(t_max);
                }
                None => {
                    let n = 41;
                    for k in 0..n {
                        times.push(t_start + (t_max - t_start) * k as f64 / (n - 1) as f64);
                    }
                }
            }
        }
        StopCriterion::MaxSecondFormSq(theta) => {
            let te = t_end.ok_or_else(|| {
                Error::Refused("curvature never blows up on this solution".into())
            })?;
            // |A|^2 = c / (T - t) on the catalog: stop when tau <= c / theta
            let a2_start = solution.max_second_form_sq_at(t_start)?;
            let c = a2_start * (te - t_start);
            let tau_stop = c / theta;
            let tau0 = te - t_start;
            times.push(t_start);
            let mut tau = tau0 * policy.snapshot_ratio.sqrt();
            while tau > tau_stop * (1.0 + 1e-12) {
                times.push(te - tau);
                tau *= policy.snapshot_ratio;
            }
            times.push(te - tau_stop);
        }
        StopCriterion::MinRadius(_) => {
            return Err(Error::Unsupported(
                "min-radius stop applies to profile solvers".into(),
            ));
        }
    }

    let states = solution.sample_track(&times, mode)?;
    let mut summaries = Vec::with_capacity(states.len());
    let mut prev_t = None;
    for (k, s) in states.iter().enumerate() {
        let dt = prev_t.map_or(0.0, |p: f64| s.time() - p);
        prev_t = Some(s.time());
        summaries.push(StepSummary {
            step: k,
            time: s.time(),
            max_a2: s.max_second_form_sq()?,
            area: s.area().unwrap_or(f64::NAN),
            min_radius: s.min_radius(),
            dt,
        });
    }
    // planes have unbounded area: patch the NaNs with zeros for summaries
    for s in summaries.iter_mut() {
        if s.area.is_nan() {
            s.area = 0.0;
        }
    }
    let reason = match stop {
        StopCriterion::TimeMax(_) => StopReason::TimeReached,
        _ => StopReason::CurvatureThreshold,
    };
    FlowTrack::new(states, summaries, reason)
}

/// Advance a discrete initial state until the stop criterion fires.
/// Snapshots are recorded on a geometric grid in the estimated remaining
/// time tau_hat = 1/(2 max|A|^2); the final state is always recorded.
pub fn run_until(
    initial: &SurfaceState,
    stop: StopCriterion,
    policy: &DtPolicy,
) -> Result<FlowTrack> {
    match initial.representation() {
        Representation::Mesh(_) => run_mesh(initial, stop, policy),
        Representation::Profile(_) => run_profile(initial, stop, policy),
        Representation::Exact(_) => Err(Error::Unsupported(
            "exact states advance through run_exact with their defining solution".into(),
        )),
    }
}

struct Recorder {
    states: Vec<SurfaceState>,
    summaries: Vec<StepSummary>,
    next_tau: f64,
    ratio: f64,
    step: usize,
}

impl Recorder {
    fn new(ratio: f64) -> Self {
        Recorder { states: Vec::new(), summaries: Vec::new(), next_tau: f64::INFINITY, ratio, step: 0 }
    }

    fn observe(&mut self, state: &SurfaceState, max_a2: f64, dt: f64, force: bool) -> Result<()> {
        let tau_hat = if max_a2 > 0.0 { 0.5 / max_a2 } else { f64::INFINITY };
        let due = tau_hat <= self.next_tau || self.states.is_empty();
        if due || force {
            let area = state.area().unwrap_or(0.0);
            self.summaries.push(StepSummary {
                step: self.step,
                time: state.time(),
                max_a2,
                area,
                min_radius: state.min_radius(),
                dt,
            });
            self.states.push(state.clone());
            if tau_hat.is_finite() {
                // first scheduled level sits half a ratio-step below the start
                let mut next = if self.next_tau.is_finite() {
                    self.next_tau
                } else {
                    tau_hat * self.ratio.sqrt() / self.ratio
                };
                while next >= tau_hat {
                    next *= self.ratio;
                }
                self.next_tau = next;
            }
        }
        self.step += 1;
        Ok(())
    }
}

fn run_mesh(initial: &SurfaceState, stop: StopCriterion, policy: &DtPolicy) -> Result<FlowTrack> {
    let mut state = initial.clone();
    let mut rec = Recorder::new(policy.snapshot_ratio);
    let mut reason = None;
    let mut last_dt = 0.0;

    for _ in 0..policy.max_steps {
        let max_a2 = state.max_second_form_sq()?;
        let stop_now = match stop {
            StopCriterion::TimeMax(t_max) => state.time() >= t_max - 1e-15,
            StopCriterion::MaxSecondFormSq(th) => max_a2 >= th,
            StopCriterion::MinRadius(_) => {
                return Err(Error::Unsupported("min-radius stop needs a profile".into()))
            }
        };
        if stop_now {
            reason = Some(match stop {
                StopCriterion::TimeMax(_) => StopReason::TimeReached,
                _ => StopReason::CurvatureThreshold,
            });
            rec.observe(&state, max_a2, last_dt, true)?;
            break;
        }
        rec.observe(&state, max_a2, last_dt, false)?;

        let mut dt = if max_a2 > 0.0 { policy.c_stab / max_a2 } else { f64::INFINITY };
        if let StopCriterion::TimeMax(t_max) = stop {
            dt = dt.min(t_max - state.time());
        }
        if !dt.is_finite() {
            // flat surfaces do not move; jump to the requested time
            match stop {
                StopCriterion::TimeMax(t_max) => {
                    let mesh = state.as_mesh().unwrap().clone();
                    let frozen = mesh.with_positions(mesh.vertices().to_vec(), t_max)?;
                    state = SurfaceState::from_mesh(frozen);
                    continue;
                }
                _ => {
                    return Err(Error::Refused(
                        "curvature threshold unreachable on a flat mesh".into(),
                    ))
                }
            }
        }
        if dt < policy.dt_min {
            reason = Some(StopReason::Degenerate);
            rec.observe(&state, max_a2, last_dt, true)?;
            break;
        }

        let mesh = state.as_mesh().expect("mesh track");
        match step_semi_implicit(mesh, dt) {
            Ok(stepped) => {
                let mut mesh = stepped.mesh;
                if let Some(factor) = policy.remesh_factor {
                    let longest = mesh
                        .faces()
                        .iter()
                        .flat_map(|f| (0..3).map(move |k| (f[k], f[(k + 1) % 3])))
                        .map(|(a, b)| (mesh.vertices()[b] - mesh.vertices()[a]).norm())
                        .fold(0.0f64, f64::max);
                    if longest > factor * mesh.mean_edge_length() {
                        mesh = refine_mesh(&mesh, factor)?;
                    }
                }
                state = SurfaceState::from_mesh(mesh);
                last_dt = dt;
            }
            Err(Error::Structural(_)) => {
                // mesh collapsed: singular-degenerate stop, keep last state
                reason = Some(StopReason::Degenerate);
                rec.observe(&state, max_a2, last_dt, true)?;
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let reason = reason.ok_or_else(|| Error::Step("step budget exhausted".into()))?;
    FlowTrack::new(rec.states, rec.summaries, reason)
}

fn run_profile(
    initial: &SurfaceState,
    stop: StopCriterion,
    policy: &DtPolicy,
) -> Result<FlowTrack> {
    let mut state = initial.clone();
    let mut rec = Recorder::new(policy.snapshot_ratio);
    let mut reason = None;
    let mut last_dt = 0.0;

    let h_min = initial.as_profile().expect("profile track").min_spacing();
    let dt_cap = policy.c_mesh.map(|c| c * h_min * h_min);

    for _ in 0..policy.max_steps {
        let max_a2 = state.max_second_form_sq()?;
        let min_u = state.min_radius().expect("profile state");
        let stop_now = match stop {
            StopCriterion::TimeMax(t_max) => state.time() >= t_max - 1e-15,
            StopCriterion::MaxSecondFormSq(th) => max_a2 >= th,
            StopCriterion::MinRadius(th) => min_u <= th,
        };
        if stop_now {
            reason = Some(match stop {
                StopCriterion::TimeMax(_) => StopReason::TimeReached,
                _ => StopReason::CurvatureThreshold,
            });
            rec.observe(&state, max_a2, last_dt, true)?;
            break;
        }
        rec.observe(&state, max_a2, last_dt, false)?;

        let mut dt = policy.c_stab / max_a2;
        if let Some(cap) = dt_cap {
            dt = dt.min(cap);
        }
        if let StopCriterion::TimeMax(t_max) = stop {
            dt = dt.min(t_max - state.time());
        }
        if dt < policy.dt_min {
            reason = Some(StopReason::Degenerate);
            rec.observe(&state, max_a2, last_dt, true)?;
            break;
        }

        let profile = state.as_profile().expect("profile track");
        match step_axisym(profile, dt)? {
            AxisymStep::Stepped(next) => {
                state = SurfaceState::from_profile(next);
                last_dt = dt;
            }
            AxisymStep::WouldVanish { .. } => {
                // singularity flag: freeze at the last valid time
                reason = Some(StopReason::Extinction);
                rec.observe(&state, max_a2, last_dt, true)?;
                break;
            }
        }
    }

    let reason = reason.ok_or_else(|| Error::Step("step budget exhausted".into()))?;
    FlowTrack::new(rec.states, rec.summaries, reason)
}

/// Estimated singular point of a track.
#[derive(Debug, Clone)]
pub struct SingularityEstimate {
    pub t_est: f64,
    pub y0_est: Point3<f64>,
    pub c0_est: f64,
    pub fit_r2: f64,
    /// Set when the fit quality reaches R^2 >= 0.999.
    pub type_one: bool,
    /// Set when the extrapolated center violates the distance estimate
    /// dist(M_t, y0) <= sqrt(2n (T-t)) by more than 5%.
    pub distance_flagged: bool,
}

/// Default number of trailing snapshots used by the blow-up fit.
pub const FIT_WINDOW: usize = 12;

/// Least-squares fit of 1/max|A|^2 against t over the last `window`
/// snapshots. Requires at least 8 snapshots of growing max|A|^2.
pub fn detect_singularity(track: &FlowTrack, window: usize) -> Result<SingularityEstimate> {
    let sums = track.summaries();
    let growing: Vec<&StepSummary> = sums.iter().filter(|s| s.max_a2 > 0.0).collect();
    if growing.len() < 8 {
        return Err(Error::Refused(format!(
            "no-blow-up: only {} snapshots with positive curvature",
            growing.len()
        )));
    }
    for w in growing.windows(2) {
        if w[1].max_a2 <= w[0].max_a2 {
            return Err(Error::Refused(format!(
                "no-blow-up: max|A|^2 is not increasing between t = {} and t = {}",
                w[0].time, w[1].time
            )));
        }
    }

    let k = window.max(2).min(growing.len());
    let tail = &growing[growing.len() - k..];
    let ts: Vec<f64> = tail.iter().map(|s| s.time).collect();
    let ys: Vec<f64> = tail.iter().map(|s| 1.0 / s.max_a2).collect();
    let (a, b, r2) = linear_fit(&ts, &ys)?;
    if b >= 0.0 {
        return Err(Error::Refused("no-blow-up: 1/max|A|^2 is not decreasing".into()));
    }
    let t_est = -a / b;
    let c0_est = -1.0 / b;
    if t_est <= track.last_time() {
        return Err(Error::Refused(format!(
            "no-blow-up: extrapolated T = {t_est} does not exceed the last sample time {}",
            track.last_time()
        )));
    }

    // blow-up center: extrapolate the argmax-|A| position linearly in
    // sqrt(T - t), whose intercept is the center for type-I shrinkers
    let idx_tail = sums.len() - k.min(sums.len())..sums.len();
    let mut sq = Vec::new();
    let mut px = Vec::new();
    let mut py = Vec::new();
    let mut pz = Vec::new();
    for i in idx_tail {
        let t = sums[i].time;
        if t_est <= t {
            continue;
        }
        let p = track.states()[i].argmax_a2_position()?;
        sq.push((t_est - t).sqrt());
        px.push(p.x);
        py.push(p.y);
        pz.push(p.z);
    }
    let last_pos = track.states()[sums.len() - 1].argmax_a2_position()?;
    let mut y0_est = if sq.len() >= 2 {
        let (ax, _, _) = linear_fit(&sq, &px)?;
        let (ay, _, _) = linear_fit(&sq, &py)?;
        let (az, _, _) = linear_fit(&sq, &pz)?;
        Point3::new(ax, ay, az)
    } else {
        last_pos
    };

    // consistency clamp against the distance estimate (n = 2): an intercept
    // violating dist <= sqrt(2n (T-t)) by > 5% falls back to the last
    // argmax position; a still-violating estimate is flagged
    if distance_violated(track, &y0_est, t_est) {
        y0_est = last_pos;
    }
    let flagged = distance_violated(track, &y0_est, t_est);

    Ok(SingularityEstimate {
        t_est,
        y0_est,
        c0_est,
        fit_r2: r2,
        type_one: r2 >= 0.999,
        distance_flagged: flagged,
    })
}

fn distance_violated(track: &FlowTrack, y0: &Point3<f64>, t_est: f64) -> bool {
    for (i, s) in track.summaries().iter().enumerate() {
        if s.time >= t_est {
            continue;
        }
        let bound = (4.0 * (t_est - s.time)).sqrt();
        if track.states()[i].distance_to_point(y0) > bound * 1.05 {
            return true;
        }
    }
    false
}
