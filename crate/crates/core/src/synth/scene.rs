use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::layout::Layout;
use super::library::{ShapeLibrary, ShapeRecord};
use super::palette::part_color;
use super::queries::{derive_queries, QuerySpec};
use super::split::Split;
use crate::error::{Error, Result};
use crate::geometry::{apply_placement, Aabb, AnnotatedCloud, PlacementTransform, SizeTier, TriMesh, Vec3};
use crate::io::ply::{read_cloud_ply, read_labels, read_mesh_ply, write_cloud_ply, write_labels, write_mesh_ply};
use crate::io::{read_json, write_json};
use crate::rng::{derive_seed, stream_rng, Stream};
use crate::spatial::PointGrid;

/// Knobs of scene synthesis. Defaults give full-size scenes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub small_object_count: usize,
    /// Per-axis scale is drawn from `1 ± scale_jitter`.
    pub scale_jitter: f64,
    /// Jitter amplitude as a fraction of the scaled shape diagonal.
    pub deformation: f64,
    /// Multiplies the per-tier sample counts.
    pub tier_scale: f64,
    /// Mesh edges are split down to this fraction of the shape diagonal so the
    /// deformed mesh follows the deformed point cloud.
    pub refine_fraction: f64,
    /// Horizontal gap kept between a small object and its neighbors.
    pub clearance: f64,
    /// Floor spots for small objects keep this fraction of the room extent
    /// away from each wall.
    pub floor_margin: f64,
    pub max_attempts: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            small_object_count: 8,
            scale_jitter: 0.10,
            deformation: 0.01,
            tier_scale: 1.0,
            refine_fraction: 0.05,
            clearance: 0.05,
            floor_margin: 1.0 / 6.0,
            max_attempts: 100,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.scale_jitter) {
            return Err(Error::Config(format!("scale_jitter must be in [0, 1), got {}", self.scale_jitter)));
        }
        if !(0.0..=0.05).contains(&self.deformation) {
            return Err(Error::Config(format!("deformation must be in [0, 0.05], got {}", self.deformation)));
        }
        if !(self.tier_scale > 0.0 && self.tier_scale.is_finite()) {
            return Err(Error::Config(format!("tier_scale must be positive, got {}", self.tier_scale)));
        }
        if !(self.refine_fraction >= 0.0) || !(self.clearance >= 0.0) {
            return Err(Error::Config("refine_fraction and clearance must be non-negative".into()));
        }
        if !(0.0..0.5).contains(&self.floor_margin) {
            return Err(Error::Config(format!("floor_margin must be in [0, 0.5), got {}", self.floor_margin)));
        }
        Ok(())
    }

    pub fn sample_count(&self, tier: SizeTier) -> usize {
        ((tier.sample_count() as f64 * self.tier_scale).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PlacementSource {
    Layout { index: usize },
    Floor,
    Support { object_id: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedShape {
    pub shape_id: String,
    pub object_id: u32,
    pub transform: PlacementTransform,
    pub sample_count: usize,
    /// local part id of the library shape → scene-wide part id
    pub part_ids: BTreeMap<u32, u32>,
    pub source: PlacementSource,
}

/// Everything needed to rebuild a scene from the library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub scene_id: String,
    pub layout_id: String,
    pub room_extent: Aabb,
    pub seed: u64,
    pub split: Split,
    pub refine_fraction: f64,
    pub placed_shapes: Vec<PlacedShape>,
    pub palette: BTreeMap<u32, [u8; 3]>,
    /// part id → object_part label
    pub labels: BTreeMap<u32, String>,
    pub queries: Vec<QuerySpec>,
}

impl SceneManifest {
    pub fn query(&self, text: &str) -> Option<&QuerySpec> {
        self.queries.iter().find(|q| q.query_text == text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub manifest: SceneManifest,
    pub mesh: TriMesh,
    pub cloud: AnnotatedCloud,
}

struct Realized {
    shape: PlacedShape,
    mesh: TriMesh,
    cloud: AnnotatedCloud,
    aabb: Aabb,
    supports: bool,
}

/// Populates `layout` with library shapes.
///
/// Required placements go first, then optional ones, each in layout order;
/// small objects follow, on the floor or on top of supporting furniture. The
/// shape for placement `i` and its random transform come from substreams
/// keyed by `(seed, i)`, small object `k` from `(seed, k)`.
pub fn generate_scene(
    layout: &Layout,
    library: &ShapeLibrary,
    seed: u64,
    cfg: &SceneConfig,
    implicit_templates: Option<&BTreeMap<String, String>>,
) -> Result<Scene> {
    layout.validate()?;
    cfg.validate()?;
    for p in layout.placements.iter().filter(|p| p.required) {
        if library.by_category(&p.category).is_empty() {
            return Err(Error::MissingCategory(p.category.clone()));
        }
    }

    let mut placed: Vec<Realized> = Vec::new();
    let mut next_part = 1u32;
    let mut required_at: Vec<usize> = Vec::new();

    let order = layout
        .placements
        .iter()
        .enumerate()
        .filter(|(_, p)| p.required)
        .chain(layout.placements.iter().enumerate().filter(|(_, p)| !p.required));
    for (i, p) in order {
        let candidates = library.by_category(&p.category);
        if candidates.is_empty() {
            log::warn!("{}: optional placement {i} skipped, no `{}` shapes", layout.layout_id, p.category);
            continue;
        }
        let rec = candidates[stream_rng(seed, Stream::ShapeChoice, i as u64).random_range(0..candidates.len())];
        let mut rng = stream_rng(seed, Stream::Transform, i as u64);
        let mut transform = random_transform(&mut rng, rec, cfg, p.yaw)?;
        let object_id = placed.len() as u32 + 1;
        let jitter_seed = derive_seed(seed, Stream::Jitter, object_id as u64);
        let local = placed_aabb(rec, &transform, jitter_seed, cfg.refine_fraction)?;
        transform.translation = p.position - Vec3::new(local.center().x, local.center().y, local.min.z);
        let aabb = shifted(&local, transform.translation);

        if let Some(j) = placed.iter().position(|o| o.aabb.intersection_volume(&aabb) > 1e-9) {
            if p.required {
                let PlacementSource::Layout { index } = placed[j].shape.source else {
                    unreachable!("only layout placements precede required ones")
                };
                return Err(Error::LayoutCollision { first: index, second: i });
            }
            log::warn!("{}: optional placement {i} ({}) overlaps placed furniture, dropped", layout.layout_id, p.category);
            continue;
        }
        if p.required {
            required_at.push(placed.len());
        }
        let shape = new_placed(rec, object_id, transform, cfg, &mut next_part, PlacementSource::Layout { index: i });
        placed.push(realize_placed(rec, shape, seed, cfg.refine_fraction)?);
    }

    place_small_objects(layout, library, seed, cfg, &mut placed, &mut next_part)?;

    let labels: BTreeMap<u32, String> = placed
        .iter()
        .flat_map(|o| {
            let rec = library.get(&o.shape.shape_id).expect("placed shapes come from the library");
            o.shape
                .part_ids
                .iter()
                .map(move |(local, global)| (*global, rec.label(*local).expect("part ids come from the shape")))
        })
        .collect();
    let palette = labels.keys().map(|&p| (p, part_color(seed, p))).collect();
    let manifest = SceneManifest {
        scene_id: format!("{}-{seed}", layout.layout_id),
        layout_id: layout.layout_id.clone(),
        room_extent: layout.room_extent,
        seed,
        split: Split::Train,
        refine_fraction: cfg.refine_fraction,
        queries: derive_queries(&labels, implicit_templates),
        placed_shapes: placed.iter().map(|o| o.shape.clone()).collect(),
        palette,
        labels,
    };
    let (mesh, cloud) = assemble(&manifest, placed.into_iter().map(|o| (o.mesh, o.cloud)).collect());
    Ok(Scene { manifest, mesh, cloud })
}

/// Rebuilds mesh and cloud from a manifest; bit-identical to the output of
/// the [`generate_scene`] call that produced the manifest.
pub fn build_scene(manifest: &SceneManifest, library: &ShapeLibrary) -> Result<(TriMesh, AnnotatedCloud)> {
    let objects = manifest
        .placed_shapes
        .par_iter()
        .map(|s| {
            let rec = library
                .get(&s.shape_id)
                .ok_or_else(|| Error::InvalidInput(format!("manifest shape `{}` is not in the library", s.shape_id)))?;
            realize(rec, s, manifest.seed, manifest.refine_fraction)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(manifest, objects))
}

fn random_transform(
    rng: &mut ChaCha8Rng,
    rec: &ShapeRecord,
    cfg: &SceneConfig,
    yaw: f64,
) -> Result<PlacementTransform> {
    let s = cfg.scale_jitter;
    let mut draw = || if s > 0.0 { 1.0 + rng.random_range(-s..s) } else { 1.0 };
    let scale = Vec3::new(draw(), draw(), draw());
    let diag = rec.mesh.aabb()?.extent().mul_elem(scale).norm();
    Ok(PlacementTransform {
        scale,
        yaw,
        translation: Vec3::ZERO,
        jitter_amplitude: cfg.deformation * diag,
    })
}

fn new_placed(
    rec: &ShapeRecord,
    object_id: u32,
    transform: PlacementTransform,
    cfg: &SceneConfig,
    next_part: &mut u32,
    source: PlacementSource,
) -> PlacedShape {
    let part_ids = rec
        .part_labels
        .keys()
        .map(|&local| {
            let g = *next_part;
            *next_part += 1;
            (local, g)
        })
        .collect();
    PlacedShape {
        shape_id: rec.shape_id.clone(),
        object_id,
        transform,
        sample_count: cfg.sample_count(rec.size_tier),
        part_ids,
        source,
    }
}

fn shifted(b: &Aabb, t: Vec3) -> Aabb {
    Aabb {
        min: b.min + t,
        max: b.max + t,
    }
}

fn annotated_mesh(rec: &ShapeRecord, shape: &PlacedShape) -> Result<TriMesh> {
    let mut mesh = rec.mesh.clone();
    for p in &mut mesh.face_part_id {
        *p = *shape.part_ids.get(p).ok_or_else(|| {
            Error::InvalidInput(format!("manifest has no scene part for part {p} of `{}`", rec.shape_id))
        })?;
    }
    mesh.face_object_id = vec![shape.object_id; mesh.faces.len()];
    Ok(mesh)
}

fn refined(mesh: &TriMesh, refine_fraction: f64) -> Result<TriMesh> {
    if refine_fraction > 0.0 {
        Ok(mesh.refine(refine_fraction * mesh.aabb()?.diagonal()))
    } else {
        Ok(mesh.clone())
    }
}

/// Bounds of the placed, refined mesh.
fn placed_aabb(rec: &ShapeRecord, t: &PlacementTransform, jitter_seed: u64, refine_fraction: f64) -> Result<Aabb> {
    let mesh = refined(&rec.mesh, refine_fraction)?;
    let (m, _) = apply_placement(&mesh, &AnnotatedCloud::default(), t, jitter_seed)?;
    m.aabb()
}

fn realize(rec: &ShapeRecord, shape: &PlacedShape, seed: u64, refine_fraction: f64) -> Result<(TriMesh, AnnotatedCloud)> {
    let mesh = annotated_mesh(rec, shape)?;
    let sample_seed = derive_seed(seed, Stream::SceneSeed, shape.object_id as u64);
    let cloud = crate::geometry::sample_mesh_surface(&mesh, shape.sample_count, sample_seed)?;
    let fine = refined(&mesh, refine_fraction)?;
    let jitter_seed = derive_seed(seed, Stream::Jitter, shape.object_id as u64);
    apply_placement(&fine, &cloud, &shape.transform, jitter_seed)
}

fn realize_placed(rec: &ShapeRecord, shape: PlacedShape, seed: u64, refine_fraction: f64) -> Result<Realized> {
    let (mesh, cloud) = realize(rec, &shape, seed, refine_fraction)?;
    Ok(Realized {
        aabb: mesh.aabb()?,
        mesh,
        cloud,
        supports: rec.supports_objects,
        shape,
    })
}

fn assemble(manifest: &SceneManifest, objects: Vec<(TriMesh, AnnotatedCloud)>) -> (TriMesh, AnnotatedCloud) {
    let mut mesh = TriMesh::default();
    let mut cloud = AnnotatedCloud::default();
    for (m, mut c) in objects {
        c.colors = c.part_id.iter().map(|p| manifest.palette[p]).collect();
        c.label_table = c
            .label_table
            .keys()
            .map(|p| (*p, manifest.labels[p].clone()))
            .collect();
        mesh.append(&m);
        cloud.append(&c);
    }
    (mesh, cloud)
}

/// Horizontal top surface of a supporting object: the up-facing points of the
/// part whose up-facing points sit highest.
fn support_top(o: &Realized) -> Vec<Vec3> {
    let normals = o.cloud.normals.as_ref().expect("sampled clouds carry normals");
    let mut per_part: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for (i, n) in normals.iter().enumerate() {
        if n.z > 0.95 {
            let e = per_part.entry(o.cloud.part_id[i]).or_insert((0.0, 0));
            e.0 += o.cloud.points[i].z;
            e.1 += 1;
        }
    }
    let Some((&top, _)) = per_part
        .iter()
        .max_by(|a, b| (a.1 .0 / a.1 .1 as f64).total_cmp(&(b.1 .0 / b.1 .1 as f64)))
    else {
        return Vec::new();
    };
    (0..o.cloud.len())
        .filter(|&i| o.cloud.part_id[i] == top && normals[i].z > 0.95)
        .map(|i| o.cloud.points[i])
        .collect()
}

fn place_small_objects(
    layout: &Layout,
    library: &ShapeLibrary,
    seed: u64,
    cfg: &SceneConfig,
    placed: &mut Vec<Realized>,
    next_part: &mut u32,
) -> Result<()> {
    if cfg.small_object_count == 0 {
        return Ok(());
    }
    let smalls = library.by_tier(SizeTier::Small);
    if smalls.is_empty() {
        log::warn!("no small shapes in the library; skipping {} small objects", cfg.small_object_count);
        return Ok(());
    }
    let supports: Vec<(usize, Vec<Vec3>)> = placed
        .iter()
        .enumerate()
        .filter(|(_, o)| o.supports)
        .map(|(i, o)| (i, support_top(o)))
        .filter(|(_, top)| !top.is_empty())
        .collect();
    let flat: Vec<Vec<Vec3>> = supports
        .iter()
        .map(|(_, top)| top.iter().map(|p| Vec3::new(p.x, p.y, 0.0)).collect())
        .collect();
    let grids: Vec<PointGrid> = flat.iter().map(|f| PointGrid::new(f, 0.05)).collect();
    let room = layout.room_extent;

    for k in 0..cfg.small_object_count {
        let mut rng = stream_rng(seed, Stream::SmallObjects, k as u64);
        let rec = smalls[rng.random_range(0..smalls.len())];
        let yaw = rng.random_range(0.0..std::f64::consts::TAU);
        let mut transform = random_transform(&mut rng, rec, cfg, yaw)?;
        let object_id = placed.len() as u32 + 1;
        let jitter_seed = derive_seed(seed, Stream::Jitter, object_id as u64);
        let local = placed_aabb(rec, &transform, jitter_seed, cfg.refine_fraction)?;
        let half = local.extent() * 0.5;
        let center = local.center();

        let mut accepted = None;
        for _ in 0..cfg.max_attempts {
            let on_support = !supports.is_empty() && rng.random_bool(0.5);
            let (x, y, z, source, skip) = if on_support {
                let s = rng.random_range(0..supports.len());
                let (idx, top) = &supports[s];
                let b = placed[*idx].aabb;
                let (lo, hi) = (b.min.x + half.x + 0.02, b.max.x - half.x - 0.02);
                let (ylo, yhi) = (b.min.y + half.y + 0.02, b.max.y - half.y - 0.02);
                if lo >= hi || ylo >= yhi {
                    continue;
                }
                let (x, y) = (rng.random_range(lo..hi), rng.random_range(ylo..yhi));
                let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0), (0.0, 0.0)];
                let on_top = corners.iter().all(|(sx, sy)| {
                    let q = Vec3::new(x + sx * half.x, y + sy * half.y, 0.0);
                    !grids[s].within(q, 0.03).is_empty()
                });
                if !on_top {
                    continue;
                }
                let z = top
                    .iter()
                    .filter(|p| (p.x - x).abs() <= half.x + 0.02 && (p.y - y).abs() <= half.y + 0.02)
                    .map(|p| p.z)
                    .fold(f64::NEG_INFINITY, f64::max);
                let oid = placed[*idx].shape.object_id;
                (x, y, z, PlacementSource::Support { object_id: oid }, Some(*idx))
            } else {
                let margin = room.extent() * cfg.floor_margin;
                let (lo, hi) = (room.min.x + margin.x + half.x, room.max.x - margin.x - half.x);
                let (ylo, yhi) = (room.min.y + margin.y + half.y, room.max.y - margin.y - half.y);
                if lo >= hi || ylo >= yhi {
                    continue;
                }
                let (x, y) = (rng.random_range(lo..hi), rng.random_range(ylo..yhi));
                (x, y, room.min.z, PlacementSource::Floor, None)
            };
            let t = Vec3::new(x - center.x, y - center.y, z - local.min.z);
            let cand = shifted(&local, t);
            let grown = Aabb {
                min: cand.min - Vec3::new(cfg.clearance, cfg.clearance, 0.0),
                max: cand.max + Vec3::new(cfg.clearance, cfg.clearance, 0.0),
            };
            let blocked = placed
                .iter()
                .enumerate()
                .any(|(j, o)| Some(j) != skip && o.aabb.intersection_volume(&grown) > 1e-9);
            if !blocked {
                accepted = Some((t, source));
                break;
            }
        }
        let Some((t, source)) = accepted else {
            log::warn!(
                "{}: small object {k} ({}) found no free spot in {} attempts, dropped",
                layout.layout_id,
                rec.shape_id,
                cfg.max_attempts
            );
            continue;
        };
        transform.translation = t;
        let shape = new_placed(rec, object_id, transform, cfg, next_part, source);
        placed.push(realize_placed(rec, shape, seed, cfg.refine_fraction)?);
    }
    Ok(())
}

const CLOUD_FILE: &str = "scene.ply";
const LABELS_FILE: &str = "scene.labels.json";
const MESH_FILE: &str = "scene_mesh.ply";
const MANIFEST_FILE: &str = "manifest.json";
const QUERIES_FILE: &str = "queries.json";

/// Writes `scene.ply`, `scene.labels.json`, `scene_mesh.ply`,
/// `manifest.json` and `queries.json` into `dir`.
pub fn write_scene(dir: &Path, scene: &Scene) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_cloud_ply(&dir.join(CLOUD_FILE), &scene.cloud)?;
    write_labels(&dir.join(LABELS_FILE), &scene.cloud)?;
    write_mesh_ply(&dir.join(MESH_FILE), &scene.mesh)?;
    write_json(&dir.join(MANIFEST_FILE), &scene.manifest)?;
    write_json(&dir.join(QUERIES_FILE), &scene.manifest.queries)
}

/// Reads a scene written by [`write_scene`]. Normals come back at single
/// precision.
pub fn load_scene(dir: &Path) -> Result<Scene> {
    let manifest: SceneManifest = read_json(&dir.join(MANIFEST_FILE))?;
    let mut cloud = read_cloud_ply(&dir.join(CLOUD_FILE))?;
    let labels_path = dir.join(LABELS_FILE);
    cloud.label_table = if labels_path.exists() {
        read_labels(&labels_path)?
    } else {
        manifest.labels.clone()
    };
    cloud.validate()?;
    let mesh = read_mesh_ply(&dir.join(MESH_FILE))?;
    Ok(Scene { manifest, mesh, cloud })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::procedural::{catalogue, library_from_specs};
    use crate::synth::LayoutPlacement;

    fn lib() -> ShapeLibrary {
        library_from_specs(&catalogue()).unwrap()
    }

    fn small_cfg() -> SceneConfig {
        SceneConfig {
            tier_scale: 0.05,
            small_object_count: 0,
            ..SceneConfig::default()
        }
    }

    fn one_table() -> Layout {
        Layout {
            layout_id: "t".into(),
            room_extent: Aabb::new(Vec3::new(-2.0, -2.0, 0.0), Vec3::new(2.0, 2.0, 3.0)).unwrap(),
            placements: vec![LayoutPlacement {
                category: "table".into(),
                position: Vec3::ZERO,
                yaw: 0.0,
                required: true,
            }],
        }
    }

    fn only_category(lib: &ShapeLibrary, cat: &str) -> ShapeLibrary {
        let shapes = lib.by_category(cat).into_iter().take(1).cloned().collect();
        ShapeLibrary::from_shapes(shapes).unwrap()
    }

    #[test]
    fn minimal_scene_has_one_object() {
        let lib = only_category(&lib(), "table");
        let cfg = small_cfg();
        let s = generate_scene(&one_table(), &lib, 1, &cfg, None).unwrap();
        assert_eq!(s.manifest.placed_shapes.len(), 1);
        assert_eq!(s.cloud.len(), cfg.sample_count(SizeTier::Large));
        s.cloud.validate().unwrap();
        let b = s.mesh.aabb().unwrap();
        assert!(b.center().x.abs() < 1e-9 && b.center().y.abs() < 1e-9 && b.min.z.abs() < 1e-9);
    }

    #[test]
    fn seeds_change_the_scene() {
        let lib = lib();
        let a = generate_scene(&one_table(), &lib, 7, &small_cfg(), None).unwrap();
        let b = generate_scene(&one_table(), &lib, 8, &small_cfg(), None).unwrap();
        assert_ne!(a.manifest, b.manifest);
    }

    #[test]
    fn manifest_round_trip_is_bit_identical() {
        let lib = lib();
        let cfg = SceneConfig {
            small_object_count: 4,
            ..small_cfg()
        };
        let s = generate_scene(&one_table(), &lib, 3, &cfg, None).unwrap();
        let text = serde_json::to_string(&s.manifest).unwrap();
        let m: SceneManifest = serde_json::from_str(&text).unwrap();
        let (mesh, cloud) = build_scene(&m, &lib).unwrap();
        assert_eq!(mesh, s.mesh);
        assert_eq!(cloud, s.cloud);
    }

    #[test]
    fn part_ids_partition_the_cloud() {
        let lib = lib();
        let cfg = SceneConfig {
            small_object_count: 3,
            ..small_cfg()
        };
        let s = generate_scene(&one_table(), &lib, 5, &cfg, None).unwrap();
        let total: usize = s
            .manifest
            .labels
            .keys()
            .map(|&p| s.cloud.part_id.iter().filter(|&&q| q == p).count())
            .sum();
        assert_eq!(total, s.cloud.len());
        for q in &s.manifest.queries {
            for p in &q.gt_part_ids {
                assert_eq!(s.manifest.labels[p], q.query_text);
            }
        }
    }

    #[test]
    fn missing_required_category_is_named() {
        let lib = only_category(&lib(), "chair");
        let err = generate_scene(&one_table(), &lib, 1, &small_cfg(), None).unwrap_err();
        assert!(err.to_string().contains("`table`"), "{err}");
    }

    #[test]
    fn overlapping_required_placements_are_a_layout_defect() {
        let mut layout = one_table();
        layout.placements.push(LayoutPlacement {
            category: "table".into(),
            position: Vec3::new(0.3, 0.0, 0.0),
            yaw: 0.0,
            required: true,
        });
        let err = generate_scene(&layout, &lib(), 1, &small_cfg(), None).unwrap_err();
        assert!(matches!(err, Error::LayoutCollision { first: 0, second: 1 }));
    }

    #[test]
    fn small_objects_do_not_overlap() {
        let lib = lib();
        let cfg = SceneConfig {
            small_object_count: 8,
            ..small_cfg()
        };
        let s = generate_scene(&one_table(), &lib, 9, &cfg, None).unwrap();
        let boxes: Vec<Aabb> = (1..=s.manifest.placed_shapes.len() as u32)
            .map(|o| {
                let pts: Vec<Vec3> = (0..s.cloud.len())
                    .filter(|&i| s.cloud.object_id[i] == o)
                    .map(|i| s.cloud.points[i])
                    .collect();
                crate::geometry::compute_aabb(&pts).unwrap()
            })
            .collect();
        let support_of = |o: usize| match s.manifest.placed_shapes[o].source {
            PlacementSource::Support { object_id } => Some(object_id as usize - 1),
            _ => None,
        };
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if support_of(j) == Some(i) {
                    continue;
                }
                assert!(
                    boxes[i].intersection_volume(&boxes[j]) < 1e-4,
                    "objects {} and {} overlap",
                    i + 1,
                    j + 1
                );
            }
        }
        assert!(s.manifest.placed_shapes.len() > 1);
    }

    #[test]
    fn scene_files_round_trip() {
        let lib = only_category(&lib(), "table");
        let s = generate_scene(&one_table(), &lib, 2, &small_cfg(), None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_scene(dir.path(), &s).unwrap();
        let back = load_scene(dir.path()).unwrap();
        assert_eq!(back.manifest, s.manifest);
        assert_eq!(back.mesh, s.mesh);
        assert_eq!(back.cloud.points, s.cloud.points);
        assert_eq!(back.cloud.part_id, s.cloud.part_id);
        assert_eq!(back.cloud.label_table, s.cloud.label_table);
    }
}
