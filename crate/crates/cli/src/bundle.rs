//! Track persistence: OFF sequences / profile CSVs plus a JSON meta file,
//! so that `diagnose` and `rescale` can operate on saved runs.

use std::path::Path;

use nalgebra::{Point3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use mcf_core::error::{Error, Result};
use mcf_core::exact::ExactSolution;
use mcf_core::flow::{FlowTrack, StepSummary, StopReason};
use mcf_core::geometry::{
    AxisymProfile, BoundaryKind, ExactSurface, Representation, SurfaceState,
};
use mcf_core::io;

#[derive(Debug, Serialize, Deserialize)]
struct TrackMeta {
    kind: String,
    stop_reason: String,
    times: Vec<f64>,
    #[serde(default)]
    boundary: Option<String>,
    #[serde(default)]
    state_files: Vec<String>,
    #[serde(default)]
    exact_states: Vec<ExactStateMeta>,
    summaries: Vec<SummaryMeta>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SummaryMeta {
    step: usize,
    time: f64,
    max_a2: f64,
    area: f64,
    min_radius: Option<f64>,
    dt: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ExactStateMeta {
    Sphere { center: [f64; 3], radius: f64, dim: usize },
    Cylinder { center: [f64; 3], axis: [f64; 3], radius: f64, half_length: f64 },
    Plane { point: [f64; 3], normal: [f64; 3] },
}

fn stop_reason_from_str(s: &str) -> Result<StopReason> {
    Ok(match s {
        "time_reached" => StopReason::TimeReached,
        "curvature_threshold" => StopReason::CurvatureThreshold,
        "degenerate" => StopReason::Degenerate,
        "extinction" => StopReason::Extinction,
        other => return Err(Error::Io(format!("unknown stop reason {other:?}"))),
    })
}

/// Write the track states (and the exact-solution parameters, if any)
/// under `dir/states`, with meta in `dir/track_meta.json`.
pub fn save_track(track: &FlowTrack, _solution: Option<&ExactSolution>, dir: &Path) -> Result<()> {
    let states_dir = dir.join("states");
    std::fs::create_dir_all(&states_dir).map_err(|e| Error::Io(format!("{states_dir:?}: {e}")))?;

    let mut meta = TrackMeta {
        kind: String::new(),
        stop_reason: track.stop_reason().to_string(),
        times: track.times(),
        boundary: None,
        state_files: Vec::new(),
        exact_states: Vec::new(),
        summaries: track
            .summaries()
            .iter()
            .map(|s| SummaryMeta {
                step: s.step,
                time: s.time,
                max_a2: s.max_a2,
                area: s.area,
                min_radius: s.min_radius,
                dt: s.dt,
            })
            .collect(),
    };

    for (k, st) in track.states().iter().enumerate() {
        match st.representation() {
            Representation::Mesh(m) => {
                meta.kind = "mesh".into();
                let name = format!("states/state_{k:05}.off");
                io::write_off(m, &dir.join(&name))?;
                meta.state_files.push(name);
            }
            Representation::Profile(p) => {
                meta.kind = "profile".into();
                meta.boundary = Some(match p.boundary() {
                    BoundaryKind::Periodic => "periodic".into(),
                    BoundaryKind::Reflecting => "reflecting".into(),
                });
                let name = format!("states/state_{k:05}.csv");
                io::write_profile_csv(p, &dir.join(&name))?;
                meta.state_files.push(name);
            }
            Representation::Exact(e) => {
                meta.kind = "exact".into();
                meta.exact_states.push(match e {
                    ExactSurface::Sphere { center, radius, dim } => ExactStateMeta::Sphere {
                        center: [center.x, center.y, center.z],
                        radius: *radius,
                        dim: *dim,
                    },
                    ExactSurface::Cylinder { center, axis, radius, half_length } => {
                        ExactStateMeta::Cylinder {
                            center: [center.x, center.y, center.z],
                            axis: [axis.x, axis.y, axis.z],
                            radius: *radius,
                            half_length: *half_length,
                        }
                    }
                    ExactSurface::Plane { point, normal } => ExactStateMeta::Plane {
                        point: [point.x, point.y, point.z],
                        normal: [normal.x, normal.y, normal.z],
                    },
                });
            }
        }
    }

    let json = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::Io(format!("track meta serialization: {e}")))?;
    std::fs::write(dir.join("track_meta.json"), json)
        .map_err(|e| Error::Io(format!("track_meta.json: {e}")))?;
    Ok(())
}

/// Reconstruct a track saved by `save_track`.
pub fn load_track(dir: &Path) -> Result<FlowTrack> {
    let meta_path = dir.join("track_meta.json");
    let text = std::fs::read_to_string(&meta_path)
        .map_err(|e| Error::Io(format!("{meta_path:?}: {e}")))?;
    let meta: TrackMeta =
        serde_json::from_str(&text).map_err(|e| Error::Io(format!("{meta_path:?}: {e}")))?;

    let mut states = Vec::with_capacity(meta.times.len());
    match meta.kind.as_str() {
        "mesh" => {
            for (k, name) in meta.state_files.iter().enumerate() {
                let mesh = io::read_off(&dir.join(name), meta.times[k])?;
                states.push(SurfaceState::from_mesh(mesh));
            }
        }
        "profile" => {
            let boundary = match meta.boundary.as_deref() {
                Some("periodic") => BoundaryKind::Periodic,
                Some("reflecting") | None => BoundaryKind::Reflecting,
                Some(other) => {
                    return Err(Error::Io(format!("unknown boundary {other:?}")));
                }
            };
            for (k, name) in meta.state_files.iter().enumerate() {
                let p: AxisymProfile =
                    io::read_profile_csv(&dir.join(name), boundary, meta.times[k])?;
                states.push(SurfaceState::from_profile(p));
            }
        }
        "exact" => {
            for (k, e) in meta.exact_states.iter().enumerate() {
                let surf = match e {
                    ExactStateMeta::Sphere { center, radius, dim } => ExactSurface::Sphere {
                        center: Point3::new(center[0], center[1], center[2]),
                        radius: *radius,
                        dim: *dim,
                    },
                    ExactStateMeta::Cylinder { center, axis, radius, half_length } => {
                        ExactSurface::Cylinder {
                            center: Point3::new(center[0], center[1], center[2]),
                            axis: Unit::new_normalize(Vector3::new(axis[0], axis[1], axis[2])),
                            radius: *radius,
                            half_length: *half_length,
                        }
                    }
                    ExactStateMeta::Plane { point, normal } => ExactSurface::Plane {
                        point: Point3::new(point[0], point[1], point[2]),
                        normal: Unit::new_normalize(Vector3::new(
                            normal[0], normal[1], normal[2],
                        )),
                    },
                };
                states.push(SurfaceState::from_exact(surf, meta.times[k]));
            }
        }
        other => return Err(Error::Io(format!("unknown track kind {other:?}"))),
    }

    let summaries: Vec<StepSummary> = meta
        .summaries
        .iter()
        .map(|s| StepSummary {
            step: s.step,
            time: s.time,
            max_a2: s.max_a2,
            area: s.area,
            min_radius: s.min_radius,
            dt: s.dt,
        })
        .collect();
    FlowTrack::new(states, summaries, stop_reason_from_str(&meta.stop_reason)?)
}

/// Save a rescaled track as OFF/CSV states with an s-time column.
pub fn save_rescaled(
    rtrack: &mcf_core::rescaling::RescaledTrack,
    dir: &Path,
) -> Result<()> {
    let states_dir = dir.join("states");
    std::fs::create_dir_all(&states_dir).map_err(|e| Error::Io(format!("{states_dir:?}: {e}")))?;
    let mut w = io::CsvWriter::create(&dir.join("rescaled.csv"), "index,s,max_A2,area")?;
    for (k, st) in rtrack.states().iter().enumerate() {
        match st.representation() {
            Representation::Mesh(m) => {
                io::write_off(m, &dir.join(format!("states/state_{k:05}.off")))?;
            }
            Representation::Profile(p) => {
                io::write_profile_csv(p, &dir.join(format!("states/state_{k:05}.csv")))?;
            }
            Representation::Exact(_) => {}
        }
        w.row(&[
            io::CsvField::Int(k as i64),
            io::CsvField::Float(st.time()),
            io::CsvField::Float(st.max_second_form_sq()?),
            io::CsvField::Float(st.area().unwrap_or(0.0)),
        ])?;
    }
    Ok(())
}
