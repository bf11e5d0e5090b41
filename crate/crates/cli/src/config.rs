//! Scenario configuration: one JSON document describes the initial
//! geometry, the solver and stop rule, the requested diagnostics and
//! rescalings. The same serde types echo back into the report, so config
//! and report share a single parser.

use serde::{Deserialize, Serialize};

use mcf_core::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub initial: InitialGeometry,
    pub solver: SolverConfig,
    pub stop: StopConfig,
    #[serde(default)]
    pub diagnostics: Vec<DiagnosticRequest>,
    #[serde(default)]
    pub rescalings: Vec<RescalingRequest>,
    /// Optional radial perturbation of the initial discrete geometry.
    #[serde(default)]
    pub perturbation: Option<Perturbation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialGeometry {
    Sphere {
        center: [f64; 3],
        radius: f64,
        #[serde(default = "default_dim")]
        dim: usize,
        sample: SampleSpec,
    },
    Cylinder {
        center: [f64; 3],
        axis: [f64; 3],
        radius: f64,
        half_length: f64,
        sample: SampleSpec,
    },
    Plane {
        point: [f64; 3],
        normal: [f64; 3],
        sample: SampleSpec,
    },
    Dumbbell {
        neck_radius: f64,
        bulb_radius: f64,
        half_length: f64,
        nodes: usize,
    },
    MeshFile {
        path: String,
    },
    ProfileFile {
        path: String,
        boundary: BoundarySpec,
    },
}

fn default_dim() -> usize {
    2
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SampleSpec {
    /// Closed-form representation (exact solver only).
    Analytic,
    /// Triangle mesh: icosphere subdivisions or patch resolution.
    Mesh { resolution: u32 },
    /// Axisymmetric profile with this node count.
    Profile { nodes: usize },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySpec {
    Periodic,
    Reflecting,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub kind: SolverKind,
    #[serde(default = "default_c_stab")]
    pub c_stab: f64,
    /// Cap dt by c_mesh * h_min^2 (explicit sub-operations); null disables.
    #[serde(default)]
    pub c_mesh: Option<f64>,
    #[serde(default = "default_snapshot_ratio")]
    pub snapshot_ratio: f64,
    /// Long-edge-split/flip pass when the longest edge exceeds this factor
    /// times the mean edge length; null disables (the default).
    #[serde(default)]
    pub remesh: Option<f64>,
}

fn default_c_stab() -> f64 {
    0.1
}

fn default_snapshot_ratio() -> f64 {
    0.8
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Sample the closed-form solution (catalog initial data only).
    Exact,
    MeshSemiImplicit,
    Axisym,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StopConfig {
    TMax { value: f64 },
    MaxA2 { value: f64 },
    MinU { value: f64 },
}

/// Where a diagnostic takes its spacetime center from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    /// "exact" = catalog singular point, "estimate" = fitted blow-up center.
    Named(String),
    Coords([f64; 3]),
}

/// Where a diagnostic takes the singular time from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    Named(String),
    Value(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiagnosticRequest {
    GaussianDensity {
        center: PointSpec,
        t_singular: TimeSpec,
        /// Track time at which to evaluate; defaults to the last snapshot.
        #[serde(default)]
        at: Option<f64>,
    },
    MonotonicityAudit {
        center: PointSpec,
        t_singular: TimeSpec,
    },
    DensityLimit {
        center: PointSpec,
        t_singular: TimeSpec,
    },
    TypeOneFit {
        #[serde(default = "default_fit_window")]
        window: usize,
    },
    SpacetimeHNorm {
        alpha: f64,
        #[serde(default)]
        t_end: Option<f64>,
    },
    LpqANorm {
        p: f64,
        q: f64,
        #[serde(default)]
        t_end: Option<f64>,
    },
    SliceLsProduct {
        s: f64,
        t_singular: TimeSpec,
    },
    RunningSupLs {
        s: f64,
        t_singular: TimeSpec,
    },
    LocalEnergy {
        x0: [f64; 3],
        sigma: f64,
        t0: f64,
    },
    EpsRegularity {
        x0: [f64; 3],
        sigma: f64,
        t0: f64,
        epsilon0: f64,
    },
    PinchingRatio {
        #[serde(default)]
        at: Option<f64>,
        #[serde(default = "default_h_floor")]
        h_floor: f64,
    },
    DistanceAudit {
        center: PointSpec,
        t_singular: TimeSpec,
        #[serde(default = "default_distance_tol")]
        tolerance: f64,
    },
}

fn default_fit_window() -> usize {
    12
}

fn default_h_floor() -> f64 {
    1e-8
}

fn default_distance_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescalingRequest {
    pub lambdas: Vec<f64>,
    pub window: [f64; 2],
    #[serde(default)]
    pub center: Option<PointSpec>,
    #[serde(default)]
    pub t_singular: Option<TimeSpec>,
    #[serde(default)]
    pub classify: bool,
    #[serde(default = "default_residual_threshold")]
    pub residual_threshold: f64,
}

fn default_residual_threshold() -> f64 {
    mcf_core::rescaling::RESIDUAL_THRESHOLD
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub amplitude: f64,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| Error::Argument(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Argument("config.name: must be non-empty".into()));
        }
        if self.solver.c_stab <= 0.0 {
            return Err(Error::Argument(format!(
                "config.solver.c_stab: must be positive, got {}",
                self.solver.c_stab
            )));
        }
        if !(0.0 < self.solver.snapshot_ratio && self.solver.snapshot_ratio < 1.0) {
            return Err(Error::Argument(format!(
                "config.solver.snapshot_ratio: must be in (0, 1), got {}",
                self.solver.snapshot_ratio
            )));
        }
        match &self.initial {
            InitialGeometry::Sphere { radius, dim, .. } => {
                if *radius <= 0.0 {
                    return Err(Error::Argument(
                        "config.initial.radius: must be positive".into(),
                    ));
                }
                if *dim == 0 {
                    return Err(Error::Argument("config.initial.dim: must be >= 1".into()));
                }
            }
            InitialGeometry::Cylinder { radius, half_length, .. } => {
                if *radius <= 0.0 || *half_length <= 0.0 {
                    return Err(Error::Argument(
                        "config.initial: radius and half_length must be positive".into(),
                    ));
                }
            }
            InitialGeometry::Dumbbell { neck_radius, bulb_radius, half_length, nodes } => {
                if !(0.0 < *neck_radius && neck_radius < bulb_radius) {
                    return Err(Error::Argument(
                        "config.initial: needs 0 < neck_radius < bulb_radius".into(),
                    ));
                }
                if *half_length <= 0.0 || *nodes < 16 {
                    return Err(Error::Argument(
                        "config.initial: half_length must be positive and nodes >= 16".into(),
                    ));
                }
            }
            InitialGeometry::MeshFile { path } | InitialGeometry::ProfileFile { path, .. } => {
                if !std::path::Path::new(path).exists() {
                    return Err(Error::Argument(format!(
                        "config.initial.path: file {path:?} does not exist"
                    )));
                }
            }
            InitialGeometry::Plane { normal, .. } => {
                let n2: f64 = normal.iter().map(|x| x * x).sum();
                if n2 == 0.0 {
                    return Err(Error::Argument(
                        "config.initial.normal: must be non-zero".into(),
                    ));
                }
            }
        }
        for (i, r) in self.rescalings.iter().enumerate() {
            if r.lambdas.iter().any(|&l| l <= 0.0) {
                return Err(Error::Argument(format!(
                    "config.rescalings[{i}].lambdas: must be positive"
                )));
            }
            if !(r.window[0] < r.window[1] && r.window[1] < 0.0) {
                return Err(Error::Argument(format!(
                    "config.rescalings[{i}].window: must satisfy lo < hi < 0"
                )));
            }
        }
        if let Some(p) = &self.perturbation {
            if p.amplitude < 0.0 {
                return Err(Error::Argument(
                    "config.perturbation.amplitude: must be non-negative".into(),
                ));
            }
        }
        Ok(())
    }
}
