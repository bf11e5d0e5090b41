//! Mesh and profile ingestion/emission: OFF and OBJ (triangles only),
//! profile CSV, and a small CSV writer used by track exports.
//!
//! Emitted coordinates carry 17 significant digits so that round-trips
//! reproduce the f64 bit pattern.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geometry::{AxisymProfile, BoundaryKind, TriMesh};

/// Parse an OFF file (triangles only).
pub fn read_off(path: &Path, time: f64) -> Result<TriMesh> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;
    parse_off(&text, time)
}

pub fn parse_off(text: &str, time: f64) -> Result<TriMesh> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace());
    match tokens.next() {
        Some("OFF") => {}
        other => {
            return Err(Error::Io(format!("expected OFF header, found {other:?}")));
        }
    }
    let nv: usize = next_number(&mut tokens, "vertex count")?;
    let nf: usize = next_number(&mut tokens, "face count")?;
    let _ne: usize = next_number(&mut tokens, "edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let x: f64 = next_number(&mut tokens, &format!("vertex {i} x"))?;
        let y: f64 = next_number(&mut tokens, &format!("vertex {i} y"))?;
        let z: f64 = next_number(&mut tokens, &format!("vertex {i} z"))?;
        vertices.push(Point3::new(x, y, z));
    }
    let mut faces = Vec::with_capacity(nf);
    for i in 0..nf {
        let arity: usize = next_number(&mut tokens, &format!("face {i} arity"))?;
        if arity != 3 {
            return Err(Error::Io(format!("face {i} has {arity} vertices; triangles only")));
        }
        let a: usize = next_number(&mut tokens, &format!("face {i} index 0"))?;
        let b: usize = next_number(&mut tokens, &format!("face {i} index 1"))?;
        let c: usize = next_number(&mut tokens, &format!("face {i} index 2"))?;
        faces.push([a, b, c]);
    }
    TriMesh::new(vertices, faces, time)
}

fn next_number<'a, T: std::str::FromStr>(
    tokens: &mut impl Iterator<Item = &'a str>,
    what: &str,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    match tokens.next() {
        Some(tok) => tok
            .parse::<T>()
            .map_err(|e| Error::Io(format!("bad {what}: {tok:?} ({e})"))),
        None => Err(Error::Io(format!("unexpected end of file reading {what}"))),
    }
}

/// Emit OFF with 17-significant-digit coordinates.
pub fn write_off(mesh: &TriMesh, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("OFF\n");
    out.push_str(&format!(
        "{} {} 0\n",
        mesh.vertices().len(),
        mesh.faces().len()
    ));
    for v in mesh.vertices() {
        out.push_str(&format!("{:.16e} {:.16e} {:.16e}\n", v.x, v.y, v.z));
    }
    for f in mesh.faces() {
        out.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
    }
    fs::write(path, out).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;
    Ok(())
}

/// Parse a Wavefront OBJ (v/f records, triangles only; texture and normal
/// indices after '/' are ignored).
pub fn read_obj(path: &Path, time: f64) -> Result<TriMesh> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;
    parse_obj(&text, time)
}

pub fn parse_obj(text: &str, time: f64) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with("v ") {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() < 4 {
                return Err(Error::Io(format!("line {}: malformed vertex", ln + 1)));
            }
            let coords: Vec<f64> = parts[1..4]
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::Io(format!("line {}: {e}", ln + 1)))
                })
                .collect::<Result<_>>()?;
            vertices.push(Point3::new(coords[0], coords[1], coords[2]));
        } else if line.starts_with("f ") {
            let idx: Vec<usize> = line
                .split_whitespace()
                .skip(1)
                .map(|tok| {
                    let lead = tok.split('/').next().unwrap_or("");
                    lead.parse::<isize>()
                        .map_err(|e| Error::Io(format!("line {}: {e}", ln + 1)))
                        .and_then(|i| {
                            if i >= 1 {
                                Ok(i as usize - 1)
                            } else {
                                Err(Error::Io(format!(
                                    "line {}: negative indices unsupported",
                                    ln + 1
                                )))
                            }
                        })
                })
                .collect::<Result<_>>()?;
            if idx.len() != 3 {
                return Err(Error::Io(format!(
                    "line {}: face has {} vertices; triangles only",
                    ln + 1,
                    idx.len()
                )));
            }
            faces.push([idx[0], idx[1], idx[2]]);
        }
    }
    TriMesh::new(vertices, faces, time)
}

/// Emit a profile as CSV: header row `x,u`, then one row per node.
pub fn write_profile_csv(profile: &AxisymProfile, path: &Path) -> Result<()> {
    let mut out = String::from("x,u\n");
    for (x, u) in profile.grid().iter().zip(profile.radii()) {
        out.push_str(&format!("{x:.16e},{u:.16e}\n"));
    }
    fs::write(path, out).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;
    Ok(())
}

pub fn read_profile_csv(
    path: &Path,
    boundary: BoundaryKind,
    time: f64,
) -> Result<AxisymProfile> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;
    let mut grid = Vec::new();
    let mut radii = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if ln == 0 && line.starts_with('x') {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let x: f64 = parts
            .next()
            .ok_or_else(|| Error::Io(format!("line {}: missing x", ln + 1)))?
            .trim()
            .parse()
            .map_err(|e| Error::Io(format!("line {}: {e}", ln + 1)))?;
        let u: f64 = parts
            .next()
            .ok_or_else(|| Error::Io(format!("line {}: missing u", ln + 1)))?
            .trim()
            .parse()
            .map_err(|e| Error::Io(format!("line {}: {e}", ln + 1)))?;
        grid.push(x);
        radii.push(u);
    }
    AxisymProfile::new(grid, radii, boundary, time)
}

/// Minimal CSV writer with fixed 17-significant-digit floats.
pub struct CsvWriter {
    file: fs::File,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &str) -> Result<Self> {
        let mut file = fs::File::create(path).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;
        writeln!(file, "{header}").map_err(|e| Error::Io(e.to_string()))?;
        Ok(CsvWriter { file })
    }

    pub fn row(&mut self, fields: &[CsvField<'_>]) -> Result<()> {
        let mut line = String::new();
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            match f {
                CsvField::Int(v) => line.push_str(&v.to_string()),
                CsvField::Float(v) => line.push_str(&format!("{v:.16e}")),
                CsvField::Str(s) => line.push_str(s),
            }
        }
        writeln!(self.file, "{line}").map_err(|e| Error::Io(e.to_string()))?;
        Ok(())
    }
}

pub enum CsvField<'a> {
    Int(i64),
    Float(f64),
    Str(&'a str),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh::icosphere;

    #[test]
    fn off_round_trip_is_bit_exact() {
        let dir = std::env::temp_dir().join("mcf_off_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sphere.off");
        let mesh = icosphere(Point3::new(0.1, 0.2, 0.3), 0.77, 2, 0.0);
        write_off(&mesh, &path).unwrap();
        let back = read_off(&path, 0.0).unwrap();
        assert_eq!(mesh.vertices().len(), back.vertices().len());
        assert_eq!(mesh.faces(), back.faces());
        for (a, b) in mesh.vertices().iter().zip(back.vertices()) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
            assert_eq!(a.z.to_bits(), b.z.to_bits());
        }
    }

    #[test]
    fn obj_parsing() {
        let text = "\
# tetrahedron
v 0 0 0
v 1 0 0
v 0 1 0
v 0 0 1
f 1 3 2
f 1 2 4
f 1 4 3
f 2 3 4
";
        let mesh = parse_obj(text, 0.0).unwrap();
        assert_eq!(mesh.vertices().len(), 4);
        assert_eq!(mesh.faces().len(), 4);
        assert!(mesh.is_closed());

        // slashed indices parse their leading vertex index
        let slashed = text.replace("f 1 3 2", "f 1/1/1 3/3/3 2/2/2");
        let mesh = parse_obj(&slashed, 0.0).unwrap();
        assert!(mesh.is_closed());

        // quads are rejected
        let quad = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        assert!(parse_obj(quad, 0.0).is_err());
    }

    #[test]
    fn profile_round_trip() {
        let dir = std::env::temp_dir().join("mcf_profile_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("p.csv");
        let p = crate::geometry::axisym::dumbbell_profile(0.35, 1.0, 3.0, 101, 0.5).unwrap();
        write_profile_csv(&p, &path).unwrap();
        let back = read_profile_csv(&path, BoundaryKind::Reflecting, 0.5).unwrap();
        for (a, b) in p.radii().iter().zip(back.radii()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn off_rejects_garbage() {
        assert!(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 0\n", 0.0).is_err());
        assert!(parse_off("PLY\n", 0.0).is_err());
    }
}
