//! Minimal Wavefront OBJ reader: `v` and `f` statements only.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Positions plus polygons as written, one entry per `f` statement.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjData {
    pub vertices: Vec<Vec3>,
    pub polygons: Vec<Vec<u32>>,
}

pub fn read_obj(path: &Path) -> Result<ObjData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text).map_err(|message| Error::Format {
        format: "OBJ",
        path: path.to_path_buf(),
        message,
    })
}

pub fn parse_obj(text: &str) -> Result<ObjData, String> {
    let mut vertices = Vec::new();
    let mut polygons = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| format!("line {}: {e}", ln + 1))?;
                if c.len() != 3 {
                    return Err(format!("line {}: vertex needs 3 coordinates", ln + 1));
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in it {
                    let idx = tok.split('/').next().unwrap_or("");
                    let i: i64 = idx
                        .parse()
                        .map_err(|_| format!("line {}: bad face index `{tok}`", ln + 1))?;
                    let resolved = if i > 0 {
                        i - 1
                    } else if i < 0 {
                        vertices.len() as i64 + i
                    } else {
                        return Err(format!("line {}: face index 0", ln + 1));
                    };
                    if resolved < 0 || resolved >= vertices.len() as i64 {
                        return Err(format!("line {}: face index {i} out of range", ln + 1));
                    }
                    poly.push(resolved as u32);
                }
                if poly.len() < 3 {
                    return Err(format!("line {}: face with fewer than 3 vertices", ln + 1));
                }
                polygons.push(poly);
            }
            _ => {}
        }
    }
    Ok(ObjData { vertices, polygons })
}

/// Writes positions and polygons; indices are 1-based on disk.
pub fn write_obj(path: &Path, vertices: &[Vec3], polygons: &[Vec<u32>]) -> Result<()> {
    use std::fmt::Write as _;
    let mut s = String::new();
    for v in vertices {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    for p in polygons {
        s.push('f');
        for i in p {
            let _ = write!(s, " {}", i + 1);
        }
        s.push('\n');
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}
