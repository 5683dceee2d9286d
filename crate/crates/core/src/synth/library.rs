use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{SizeTier, TriMesh};
use crate::io::{obj::read_obj, ply::read_mesh_ply, read_json};

/// One part-annotated library shape in its canonical frame: centered on the
/// origin in x/y, resting on z = 0, front facing -y.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeRecord {
    pub shape_id: String,
    pub category: String,
    pub size_tier: SizeTier,
    /// Flat top that small objects may be put on.
    pub supports_objects: bool,
    /// Face part ids are the local ids of `part_labels`; object ids are 0.
    pub mesh: TriMesh,
    /// local part id → part name ("leg")
    pub part_labels: BTreeMap<u32, String>,
}

impl ShapeRecord {
    /// The `object_part` label of a local part.
    pub fn label(&self, part: u32) -> Option<String> {
        self.part_labels.get(&part).map(|n| format!("{}_{}", self.category, n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ShapeLibrary {
    /// sorted by shape id
    pub shapes: Vec<ShapeRecord>,
    pub rejected: Vec<Rejection>,
}

impl ShapeLibrary {
    pub fn from_shapes(mut shapes: Vec<ShapeRecord>) -> Result<Self> {
        shapes.sort_by(|a, b| a.shape_id.cmp(&b.shape_id));
        if let Some(w) = shapes.windows(2).find(|w| w[0].shape_id == w[1].shape_id) {
            return Err(Error::DuplicateShape(w[0].shape_id.clone()));
        }
        Ok(ShapeLibrary {
            shapes,
            rejected: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn get(&self, shape_id: &str) -> Option<&ShapeRecord> {
        self.shapes
            .binary_search_by(|s| s.shape_id.as_str().cmp(shape_id))
            .ok()
            .map(|i| &self.shapes[i])
    }

    pub fn by_category(&self, category: &str) -> Vec<&ShapeRecord> {
        self.shapes.iter().filter(|s| s.category == category).collect()
    }

    pub fn by_tier(&self, tier: SizeTier) -> Vec<&ShapeRecord> {
        self.shapes.iter().filter(|s| s.size_tier == tier).collect()
    }

    pub fn categories(&self) -> BTreeSet<&str> {
        self.shapes.iter().map(|s| s.category.as_str()).collect()
    }
}

#[derive(Debug, Deserialize)]
struct Sidecar {
    shape_id: String,
    category: String,
    size_tier: SizeTier,
    #[serde(default)]
    supports_objects: bool,
    /// Mesh file next to the sidecar; defaults to the sidecar stem with
    /// `.obj`, then `.ply`.
    #[serde(default)]
    mesh: Option<String>,
    parts: Vec<SidecarPart>,
}

#[derive(Debug, Deserialize)]
struct SidecarPart {
    part_id: u32,
    name: String,
    /// Half-open ranges over OBJ `f` statements. Ignored for PLY meshes,
    /// which carry per-face `part_id`.
    #[serde(default)]
    faces: Vec<[usize; 2]>,
}

/// Loads every `*.json` sidecar under `root` (recursively) with its mesh.
///
/// Invalid shapes are listed in [`ShapeLibrary::rejected`] with a reason.
/// Fails when no shape is valid or two shapes share an id.
pub fn load_shape_library(root: &Path) -> Result<ShapeLibrary> {
    let mut sidecars = Vec::new();
    collect_json(root, &mut sidecars)?;
    sidecars.sort();

    let mut shapes = Vec::new();
    let mut rejected = Vec::new();
    for path in sidecars {
        match load_shape(&path) {
            Ok(s) => shapes.push(s),
            Err(reason) => {
                log::warn!("rejected shape {}: {reason}", path.display());
                rejected.push(Rejection { path, reason });
            }
        }
    }
    if shapes.is_empty() {
        return Err(Error::NoShapes(root.to_path_buf()));
    }
    let mut lib = ShapeLibrary::from_shapes(shapes)?;
    lib.rejected = rejected;
    Ok(lib)
}

fn collect_json(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_json(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "json") {
            out.push(path);
        }
    }
    Ok(())
}

fn load_shape(path: &Path) -> std::result::Result<ShapeRecord, String> {
    let side: Sidecar = read_json(path).map_err(|e| e.to_string())?;
    if side.shape_id.is_empty() || side.category.is_empty() {
        return Err("empty shape_id or category".into());
    }
    if side.parts.is_empty() {
        return Err("no parts".into());
    }
    let mut part_labels = BTreeMap::new();
    for p in &side.parts {
        if p.name.is_empty() {
            return Err(format!("part {} has an empty name", p.part_id));
        }
        if part_labels.insert(p.part_id, p.name.clone()).is_some() {
            return Err(format!("part id {} listed twice", p.part_id));
        }
    }

    let dir = path.parent().unwrap_or(Path::new("."));
    let mesh_path = match &side.mesh {
        Some(m) => dir.join(m),
        None => {
            let obj = path.with_extension("obj");
            if obj.exists() {
                obj
            } else {
                path.with_extension("ply")
            }
        }
    };
    let is_ply = mesh_path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ply"));
    let mut mesh = if is_ply {
        let mut m = read_mesh_ply(&mesh_path).map_err(|e| e.to_string())?;
        if let Some(p) = m.face_part_id.iter().find(|p| !part_labels.contains_key(p)) {
            return Err(format!("mesh face has part id {p} missing from the sidecar"));
        }
        m.face_object_id.iter_mut().for_each(|o| *o = 0);
        m
    } else {
        obj_mesh(&mesh_path, &side)?
    };
    mesh.remove_degenerate_faces();
    if mesh.is_empty() {
        return Err("no sampleable surface".into());
    }

    let present: BTreeSet<u32> = mesh.face_part_id.iter().copied().collect();
    part_labels.retain(|p, name| {
        let keep = present.contains(p);
        if !keep {
            log::warn!("shape {}: part {p} ({name}) has no faces left", side.shape_id);
        }
        keep
    });

    Ok(ShapeRecord {
        shape_id: side.shape_id,
        category: side.category,
        size_tier: side.size_tier,
        supports_objects: side.supports_objects,
        mesh,
        part_labels,
    })
}

fn obj_mesh(path: &Path, side: &Sidecar) -> std::result::Result<TriMesh, String> {
    let obj = read_obj(path).map_err(|e| e.to_string())?;
    let np = obj.polygons.len();
    let mut owner: Vec<Option<u32>> = vec![None; np];
    for p in &side.parts {
        for &[start, end] in &p.faces {
            if start >= end || end > np {
                return Err(format!(
                    "part {} face range [{start}, {end}) out of range for {np} faces",
                    p.part_id
                ));
            }
            for o in &mut owner[start..end] {
                if o.replace(p.part_id).is_some() {
                    return Err(format!("face ranges overlap at part {}", p.part_id));
                }
            }
        }
    }
    if let Some(f) = owner.iter().position(Option::is_none) {
        return Err(format!("face {f} belongs to no part"));
    }

    let mut faces = Vec::new();
    let mut face_part_id = Vec::new();
    for (poly, part) in obj.polygons.iter().zip(owner) {
        for k in 1..poly.len() - 1 {
            faces.push([poly[0], poly[k], poly[k + 1]]);
            face_part_id.push(part.unwrap());
        }
    }
    let n = faces.len();
    TriMesh::new(obj.vertices, faces, face_part_id, vec![0; n]).map_err(|e| e.to_string())
}
