//! Binary little-endian PLY for annotated clouds and meshes.
//!
//! Clouds are written with per-vertex `x y z` (double), `red green blue`
//! (uchar), `nx ny nz` (float), `object_id part_id` (uint). Meshes carry
//! `x y z` vertices and faces with `vertex_indices` plus per-face
//! `object_id part_id` (uint). Reading accepts any scalar type for these
//! properties and ignores unknown ones.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{AnnotatedCloud, TriMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Scalar> {
        Some(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn read(self, r: &mut impl Read) -> std::io::Result<f64> {
        let mut b = [0u8; 8];
        Ok(match self {
            Scalar::I8 => {
                r.read_exact(&mut b[..1])?;
                b[0] as i8 as f64
            }
            Scalar::U8 => {
                r.read_exact(&mut b[..1])?;
                b[0] as f64
            }
            Scalar::I16 => {
                r.read_exact(&mut b[..2])?;
                i16::from_le_bytes([b[0], b[1]]) as f64
            }
            Scalar::U16 => {
                r.read_exact(&mut b[..2])?;
                u16::from_le_bytes([b[0], b[1]]) as f64
            }
            Scalar::I32 => {
                r.read_exact(&mut b[..4])?;
                i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64
            }
            Scalar::U32 => {
                r.read_exact(&mut b[..4])?;
                u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64
            }
            Scalar::F32 => {
                r.read_exact(&mut b[..4])?;
                f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64
            }
            Scalar::F64 => {
                r.read_exact(&mut b)?;
                f64::from_le_bytes(b)
            }
        })
    }
}

#[derive(Debug)]
enum Property {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

#[derive(Default)]
struct ElementData {
    scalars: HashMap<String, Vec<f64>>,
    lists: HashMap<String, Vec<Vec<u32>>>,
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        format: "PLY",
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn read_ply(path: &Path) -> Result<HashMap<String, ElementData>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut line = String::new();
    let next_line = |r: &mut BufReader<File>, line: &mut String| -> Result<()> {
        line.clear();
        let n = r.read_line(line).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            return Err(format_err(path, "unexpected end of header"));
        }
        Ok(())
    };

    next_line(&mut r, &mut line)?;
    if line.trim_end() != "ply" {
        return Err(format_err(path, "missing `ply` magic"));
    }
    let mut elements: Vec<Element> = Vec::new();
    loop {
        next_line(&mut r, &mut line)?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["end_header"] => break,
            ["format", fmt, _] => {
                if *fmt != "binary_little_endian" {
                    return Err(format_err(path, format!("unsupported format `{fmt}`")));
                }
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| format_err(path, format!("bad element count `{count}`")))?,
                props: Vec::new(),
            }),
            ["property", "list", count_ty, item_ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| format_err(path, "property before element"))?;
                let (c, i) = Scalar::parse(count_ty)
                    .zip(Scalar::parse(item_ty))
                    .ok_or_else(|| format_err(path, format!("bad list types in `{}`", line.trim())))?;
                el.props.push(Property::List(name.to_string(), c, i));
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| format_err(path, "property before element"))?;
                let t = Scalar::parse(ty).ok_or_else(|| format_err(path, format!("bad type `{ty}`")))?;
                el.props.push(Property::Scalar(name.to_string(), t));
            }
            _ => return Err(format_err(path, format!("unrecognized header line `{}`", line.trim()))),
        }
    }

    let mut out = HashMap::new();
    for el in &elements {
        let mut data = ElementData::default();
        for p in &el.props {
            match p {
                Property::Scalar(n, _) => {
                    data.scalars.insert(n.clone(), Vec::with_capacity(el.count));
                }
                Property::List(n, ..) => {
                    data.lists.insert(n.clone(), Vec::with_capacity(el.count));
                }
            }
        }
        for _ in 0..el.count {
            for p in &el.props {
                match p {
                    Property::Scalar(n, t) => {
                        let v = t.read(&mut r).map_err(|e| Error::io(path, e))?;
                        data.scalars.get_mut(n).unwrap().push(v);
                    }
                    Property::List(n, ct, it) => {
                        let len = ct.read(&mut r).map_err(|e| Error::io(path, e))? as usize;
                        let mut items = Vec::with_capacity(len);
                        for _ in 0..len {
                            let v = it.read(&mut r).map_err(|e| Error::io(path, e))?;
                            if v < 0.0 {
                                return Err(format_err(path, format!("negative index in `{n}`")));
                            }
                            items.push(v as u32);
                        }
                        data.lists.get_mut(n).unwrap().push(items);
                    }
                }
            }
        }
        out.insert(el.name.clone(), data);
    }
    Ok(out)
}

fn take<'a>(path: &Path, el: &'a ElementData, name: &str) -> Result<&'a [f64]> {
    el.scalars
        .get(name)
        .map(Vec::as_slice)
        .ok_or_else(|| format_err(path, format!("missing property `{name}`")))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

/// Writes the cloud as PLY. The label table is not part of PLY; see
/// [`write_labels`].
pub fn write_cloud_ply(path: &Path, cloud: &AnnotatedCloud) -> Result<()> {
    cloud.validate()?;
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    write!(
        w,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\n\
         property double x\nproperty double y\nproperty double z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\n\
         property float nx\nproperty float ny\nproperty float nz\n\
         property uint object_id\nproperty uint part_id\nend_header\n",
        cloud.len()
    )
    .map_err(io)?;
    let mut buf = Vec::with_capacity(cloud.len() * 47);
    for i in 0..cloud.len() {
        let p = cloud.points[i];
        for v in [p.x, p.y, p.z] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&cloud.colors[i]);
        let n = cloud.normals.as_ref().map_or(Vec3::ZERO, |ns| ns[i]);
        for v in [n.x, n.y, n.z] {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        buf.extend_from_slice(&cloud.object_id[i].to_le_bytes());
        buf.extend_from_slice(&cloud.part_id[i].to_le_bytes());
    }
    w.write_all(&buf).map_err(io)?;
    w.flush().map_err(io)
}

/// Reads a cloud written by [`write_cloud_ply`] (or any binary PLY with at
/// least `x y z`). All-zero normals read back as "no normals". Every part id
/// gets an empty label; merge the sidecar with [`read_labels`].
pub fn read_cloud_ply(path: &Path) -> Result<AnnotatedCloud> {
    let data = read_ply(path)?;
    let v = data
        .get("vertex")
        .ok_or_else(|| format_err(path, "no vertex element"))?;
    let (x, y, z) = (take(path, v, "x")?, take(path, v, "y")?, take(path, v, "z")?);
    let n = x.len();
    let get_or = |name: &str, default: f64| -> Vec<f64> {
        v.scalars.get(name).cloned().unwrap_or_else(|| vec![default; n])
    };
    let (r, g, b) = (get_or("red", 128.0), get_or("green", 128.0), get_or("blue", 128.0));
    let (nx, ny, nz) = (get_or("nx", 0.0), get_or("ny", 0.0), get_or("nz", 0.0));
    let obj = get_or("object_id", 0.0);
    let part = get_or("part_id", 0.0);

    let points: Vec<Vec3> = (0..n).map(|i| Vec3::new(x[i], y[i], z[i])).collect();
    let raw_normals: Vec<Vec3> = (0..n).map(|i| Vec3::new(nx[i], ny[i], nz[i])).collect();
    let normals = if raw_normals.iter().all(|n| *n == Vec3::ZERO) {
        None
    } else {
        Some(
            raw_normals
                .into_iter()
                .map(|n| n.try_normalize().unwrap_or(Vec3::UP))
                .collect(),
        )
    };
    let part_id: Vec<u32> = part.iter().map(|&p| p as u32).collect();
    let label_table = part_id.iter().map(|&p| (p, String::new())).collect();
    Ok(AnnotatedCloud {
        points,
        colors: (0..n).map(|i| [r[i] as u8, g[i] as u8, b[i] as u8]).collect(),
        normals,
        curvature: None,
        object_id: obj.iter().map(|&o| o as u32).collect(),
        part_id,
        label_table,
    })
}

pub fn write_mesh_ply(path: &Path, mesh: &TriMesh) -> Result<()> {
    mesh.validate()?;
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    write!(
        w,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\n\
         property double x\nproperty double y\nproperty double z\n\
         element face {}\nproperty list uchar uint vertex_indices\n\
         property uint object_id\nproperty uint part_id\nend_header\n",
        mesh.vertices.len(),
        mesh.faces.len()
    )
    .map_err(io)?;
    let mut buf = Vec::with_capacity(mesh.vertices.len() * 24 + mesh.faces.len() * 21);
    for p in &mesh.vertices {
        for v in [p.x, p.y, p.z] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    for (f, face) in mesh.faces.iter().enumerate() {
        buf.push(3);
        for i in face {
            buf.extend_from_slice(&i.to_le_bytes());
        }
        buf.extend_from_slice(&mesh.face_object_id[f].to_le_bytes());
        buf.extend_from_slice(&mesh.face_part_id[f].to_le_bytes());
    }
    w.write_all(&buf).map_err(io)?;
    w.flush().map_err(io)
}

/// Reads a triangle (or polygon, fan-triangulated) mesh with optional
/// per-face `object_id`/`part_id`.
pub fn read_mesh_ply(path: &Path) -> Result<TriMesh> {
    let data = read_ply(path)?;
    let v = data
        .get("vertex")
        .ok_or_else(|| format_err(path, "no vertex element"))?;
    let (x, y, z) = (take(path, v, "x")?, take(path, v, "y")?, take(path, v, "z")?);
    let vertices: Vec<Vec3> = (0..x.len()).map(|i| Vec3::new(x[i], y[i], z[i])).collect();
    let f = data.get("face").ok_or_else(|| format_err(path, "no face element"))?;
    let polys = f
        .lists
        .get("vertex_indices")
        .or_else(|| f.lists.get("vertex_index"))
        .ok_or_else(|| format_err(path, "face element has no vertex_indices"))?;
    let nf = polys.len();
    let obj = f.scalars.get("object_id").cloned().unwrap_or_else(|| vec![0.0; nf]);
    let part = f.scalars.get("part_id").cloned().unwrap_or_else(|| vec![0.0; nf]);
    let mut faces = Vec::new();
    let mut face_part_id = Vec::new();
    let mut face_object_id = Vec::new();
    for (i, poly) in polys.iter().enumerate() {
        if poly.len() < 3 {
            return Err(format_err(path, format!("face {i} has {} vertices", poly.len())));
        }
        for k in 1..poly.len() - 1 {
            faces.push([poly[0], poly[k], poly[k + 1]]);
            face_part_id.push(part[i] as u32);
            face_object_id.push(obj[i] as u32);
        }
    }
    TriMesh::new(vertices, faces, face_part_id, face_object_id)
}

/// Label-table sidecar: `{"<part_id>": "<object_part>"}`.
pub fn write_labels(path: &Path, cloud: &AnnotatedCloud) -> Result<()> {
    crate::io::write_json(path, &cloud.label_table)
}

pub fn read_labels(path: &Path) -> Result<std::collections::BTreeMap<u32, String>> {
    crate::io::read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_mesh_surface;

    fn quad() -> TriMesh {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.5),
            Vec3::new(0.0, 1.0, 0.5),
        ];
        TriMesh::new(v, vec![[0, 1, 2], [0, 2, 3]], vec![3, 4], vec![7, 8]).unwrap()
    }

    #[test]
    fn cloud_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ply");
        let mut c = sample_mesh_surface(&quad(), 257, 1).unwrap();
        c.label_table = [(3, "a_b".into()), (4, "a_c".into())].into();
        c.colors[3] = [1, 2, 3];
        write_cloud_ply(&path, &c).unwrap();
        let back = read_cloud_ply(&path).unwrap();
        assert_eq!(back.points, c.points);
        assert_eq!(back.colors, c.colors);
        assert_eq!(back.part_id, c.part_id);
        assert_eq!(back.object_id, c.object_id);
        for (a, b) in back.normals.unwrap().iter().zip(c.normals.unwrap()) {
            assert!(a.distance(b) < 1e-6);
        }
    }

    #[test]
    fn mesh_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ply");
        write_mesh_ply(&path, &quad()).unwrap();
        assert_eq!(read_mesh_ply(&path).unwrap(), quad());
    }

    #[test]
    fn ascii_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ply");
        std::fs::write(&path, "ply\nformat ascii 1.0\nelement vertex 0\nend_header\n").unwrap();
        assert!(matches!(read_cloud_ply(&path), Err(Error::Format { .. })));
    }
}
