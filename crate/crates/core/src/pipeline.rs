//! End-to-end composition: dataset synthesis, per-scene preparation
//! (cameras, renders, visibility, superpoints), per-query segmentation and
//! benchmark evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{aggregate, evaluate, write_report, EvalReport, QueryReport, ScoredMask};
use crate::geometry::{estimate_normals, NORMAL_NEIGHBORS};
use crate::grouping::{
    form_instances, score_superpoints, superpoint_weights, write_prediction, PartInstance3D, Prediction, WeightMode,
};
use crate::io::{read_json, write_json};
use crate::render::{
    cell_distance, default_epsilon, plan_global_snap, plan_room_tour, render_view, scene_bounds, visible_pixels, Camera,
    CameraParams, GridDecomposition, ViewBundle,
};
use crate::rng::{derive_seed, Stream};
use crate::segment::{
    corrupt_masks, external_segment, mask_union, oracle_segment, resolve_query, ExternalBackend, Mask2D, PartIndex,
    SegmenterBackend,
};
use crate::superpoints::{SuperpointParams, SuperpointPartition};
use crate::synth::procedural::{builtin_layouts, builtin_templates, catalogue, library_from_specs};
use crate::synth::{
    assign_splits, generate_scene, load_layouts, load_scene, load_shape_library, load_templates, write_scene, Layout,
    Scene, SceneConfig, ShapeLibrary, Split,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CameraStrategy {
    #[default]
    RoomTour,
    GlobalSnap,
}

impl std::str::FromStr for CameraStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "room_tour" => Ok(CameraStrategy::RoomTour),
            "global_snap" => Ok(CameraStrategy::GlobalSnap),
            other => Err(format!("unknown camera strategy `{other}` (expected room_tour or global_snap)")),
        }
    }
}

/// Far-view mask corruption for ablations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskNoise {
    /// flip probability per pixel
    pub probability: f64,
    /// views whose pixel lies at least this many cells (Chebyshev) from the
    /// camera cell are corrupted
    pub min_cell_distance: usize,
}

impl Default for MaskNoise {
    fn default() -> Self {
        MaskNoise {
            probability: 0.2,
            min_cell_distance: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Shape library root; the built-in procedural catalogue when unset.
    pub shape_library: Option<PathBuf>,
    /// Directory of layout JSON files; the built-in layouts when unset.
    pub layouts: Option<PathBuf>,
    /// Implicit-query templates; the built-in set when unset.
    pub templates: Option<PathBuf>,
    pub output: PathBuf,
    pub seed: u64,
    pub scene: SceneConfig,
    pub cameras: CameraStrategy,
    /// camera count for global snap
    pub global_views: usize,
    pub camera: CameraParams,
    pub superpoints: SuperpointParams,
    pub segmenter: SegmenterBackend,
    pub weights: WeightMode,
    /// Visibility tolerance in meters; scaled to the scene diagonal when unset.
    pub visibility_epsilon: Option<f64>,
    pub threshold: f64,
    pub noise: Option<MaskNoise>,
    /// Scenes processed at once by `benchmark`; 0 uses every core.
    pub jobs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            shape_library: None,
            layouts: None,
            templates: None,
            output: PathBuf::from("out"),
            seed: 0,
            scene: SceneConfig::default(),
            cameras: CameraStrategy::RoomTour,
            global_views: 16,
            camera: CameraParams::default(),
            superpoints: SuperpointParams::default(),
            segmenter: SegmenterBackend::default(),
            weights: WeightMode::Proximity,
            visibility_epsilon: None,
            threshold: crate::grouping::FOREGROUND_THRESHOLD,
            noise: None,
            jobs: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.camera.validate()?;
        self.superpoints.validate()?;
        if self.global_views == 0 {
            return Err(Error::Config("global_views must be at least 1".into()));
        }
        if self.visibility_epsilon.is_some_and(|e| !(e >= 0.0 && e.is_finite())) {
            return Err(Error::Config("visibility_epsilon must be a non-negative number".into()));
        }
        if !(0.0..1.0).contains(&self.threshold) {
            return Err(Error::Config(format!("threshold must be in [0, 1), got {}", self.threshold)));
        }
        if let Some(n) = &self.noise {
            if !(0.0..=1.0).contains(&n.probability) {
                return Err(Error::Config(format!("noise.probability must be in [0, 1], got {}", n.probability)));
            }
        }
        for (name, path) in [
            ("shape_library", &self.shape_library),
            ("layouts", &self.layouts),
            ("templates", &self.templates),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(Error::Config(format!("{name} path {} does not exist", p.display())));
                }
            }
        }
        if let SegmenterBackend::External { timeout_seconds, .. } = &self.segmenter {
            if *timeout_seconds == 0 {
                return Err(Error::Config("segmenter.timeout_seconds must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg: PipelineConfig = read_json(path).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn library(&self) -> Result<ShapeLibrary> {
        match &self.shape_library {
            Some(p) => load_shape_library(p),
            None => library_from_specs(&catalogue()),
        }
    }

    pub fn layout_list(&self) -> Result<Vec<Layout>> {
        match &self.layouts {
            Some(p) => load_layouts(p),
            None => Ok(builtin_layouts()),
        }
    }

    pub fn template_map(&self) -> Result<BTreeMap<String, String>> {
        match &self.templates {
            Some(p) => load_templates(p),
            None => Ok(builtin_templates()),
        }
    }

    pub fn scenes_dir(&self) -> PathBuf {
        self.output.join("scenes")
    }
}

/// Seed of scene `i` of a dataset.
pub fn scene_seed(seed: u64, i: usize) -> u64 {
    derive_seed(seed, Stream::Dataset, i as u64)
}

/// Generates `count` scenes under `<output>/scenes/<scene_id>/`. Scene `i`
/// uses layout `i mod L` and seed [`scene_seed`].
pub fn synthesize_dataset(config: &PipelineConfig, count: usize) -> Result<Vec<PathBuf>> {
    config.validate()?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let library = config.library()?;
    let layouts = config.layout_list()?;
    if layouts.is_empty() {
        return Err(Error::InvalidInput("no layouts available".into()));
    }
    let templates = config.template_map()?;
    let splits = assign_splits(count, config.seed);
    let root = config.scenes_dir();
    let mut out = Vec::with_capacity(count);
    for (i, split) in splits.into_iter().enumerate() {
        let layout = &layouts[i % layouts.len()];
        let mut scene = generate_scene(layout, &library, scene_seed(config.seed, i), &config.scene, Some(&templates))?;
        scene.manifest.split = split;
        scene.manifest.scene_id = format!("{i:04}_{}", scene.manifest.scene_id);
        let dir = root.join(&scene.manifest.scene_id);
        write_scene(&dir, &scene)?;
        log::info!(
            "scene {}/{count}: {} ({} objects, {} points, {})",
            i + 1,
            scene.manifest.scene_id,
            scene.manifest.placed_shapes.len(),
            scene.cloud.len(),
            split.as_str()
        );
        out.push(dir);
    }
    Ok(out)
}

/// Scene directories below `root` (those holding a `manifest.json`), sorted.
pub fn list_scenes(root: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if root.join("manifest.json").is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let entries = std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    for e in entries {
        let p = e.map_err(|e| Error::io(root, e))?.path();
        if p.join("manifest.json").is_file() {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

/// What segmentation needs of one view.
#[derive(Debug, Clone)]
pub struct PreparedView {
    pub camera: Camera,
    pub parts: PartIndex,
    /// pixel of each point, or `NOT_VISIBLE`
    pub visible: Vec<u32>,
    /// ascending rendered pixels far from the camera cell; filled only when
    /// mask noise is configured
    pub far_pixels: Vec<u32>,
}

/// A scene with everything that does not depend on the query.
#[derive(Debug, Clone)]
pub struct PreparedScene {
    pub scene: Scene,
    pub grid: GridDecomposition,
    pub views: Vec<PreparedView>,
    pub partition: SuperpointPartition,
    pub epsilon: f64,
}

pub fn plan_cameras(config: &PipelineConfig, grid: &GridDecomposition) -> Result<Vec<Camera>> {
    match config.cameras {
        CameraStrategy::RoomTour => plan_room_tour(grid, &config.camera),
        CameraStrategy::GlobalSnap => plan_global_snap(grid, config.global_views, &config.camera),
    }
}

pub fn scene_grid(scene: &Scene) -> Result<GridDecomposition> {
    let bounds = scene_bounds(&scene.cloud.points, Some(&scene.manifest.room_extent))?;
    GridDecomposition::new(bounds, &scene.cloud.points)
}

pub fn render_scene(scene: &Scene, cameras: &[Camera]) -> Vec<ViewBundle> {
    cameras
        .iter()
        .map(|c| render_view(&scene.mesh, &scene.manifest.palette, c))
        .collect()
}

impl PreparedScene {
    pub fn new(mut scene: Scene, config: &PipelineConfig) -> Result<Self> {
        if scene.cloud.normals.is_none() {
            scene.cloud = estimate_normals(&scene.cloud, NORMAL_NEIGHBORS)?;
        }
        let grid = scene_grid(&scene)?;
        let cameras = plan_cameras(config, &grid)?;
        let epsilon = config
            .visibility_epsilon
            .unwrap_or_else(|| default_epsilon(grid.aabb.diagonal()));
        let mut views = Vec::with_capacity(cameras.len());
        for camera in cameras {
            let bundle = render_view(&scene.mesh, &scene.manifest.palette, &camera);
            let visible = visible_pixels(&camera, &bundle.depth, &scene.cloud.points, epsilon);
            let far_pixels = match &config.noise {
                Some(n) => far_pixels(&bundle, &grid, n.min_cell_distance),
                None => Vec::new(),
            };
            views.push(PreparedView {
                parts: PartIndex::new(&bundle.part_id),
                camera,
                visible,
                far_pixels,
            });
        }
        let partition = config.superpoints.compute(&scene.cloud)?;
        Ok(PreparedScene {
            scene,
            grid,
            views,
            partition,
            epsilon,
        })
    }

    pub fn load(dir: &Path, config: &PipelineConfig) -> Result<Self> {
        Self::new(load_scene(dir)?, config)
    }

    pub fn cameras(&self) -> Vec<Camera> {
        self.views.iter().map(|v| v.camera.clone()).collect()
    }

    /// Ground-truth point sets answering `query`, one per part instance.
    pub fn ground_truth(&self, query: &str) -> Option<Vec<Vec<u32>>> {
        let m = &self.scene.manifest;
        let parts = resolve_query(query, &m.labels, &m.queries)?;
        Some(part_point_sets(&self.scene.cloud.part_id, &parts))
    }
}

/// Covered pixels whose surface point falls at least `min_distance` cells
/// from the camera's cell.
pub fn far_pixels(view: &ViewBundle, grid: &GridDecomposition, min_distance: usize) -> Vec<u32> {
    let w = view.width();
    let cam = &view.camera;
    view.depth
        .par_iter()
        .enumerate()
        .filter_map(|(i, &d)| {
            if !d.is_finite() {
                return None;
            }
            let p = cam.unproject((i % w) as f64, (i / w) as f64, d as f64);
            (cell_distance(cam.grid_cell, grid.cell_of(p)) >= min_distance).then_some(i as u32)
        })
        .collect()
}

pub fn part_point_sets(part_id: &[u32], parts: &BTreeSet<u32>) -> Vec<Vec<u32>> {
    let mut sets: BTreeMap<u32, Vec<u32>> = parts.iter().map(|&p| (p, Vec::new())).collect();
    for (i, p) in part_id.iter().enumerate() {
        if let Some(s) = sets.get_mut(p) {
            s.push(i as u32);
        }
    }
    sets.into_values().filter(|s| !s.is_empty()).collect()
}

#[derive(Debug, Clone)]
pub struct QueryResult {
    pub query: String,
    pub masks: Vec<Mask2D>,
    pub instances: Vec<PartInstance3D>,
}

fn text_hash(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// 2D masks for `query` from the configured backend, corrupted when noise is
/// configured.
pub fn segment_2d(prepared: &PreparedScene, query: &str, config: &PipelineConfig) -> Result<Vec<Mask2D>> {
    let masks = match &config.segmenter {
        SegmenterBackend::Oracle { min_pixels } => {
            let m = &prepared.scene.manifest;
            match resolve_query(query, &m.labels, &m.queries) {
                Some(parts) => {
                    let index: Vec<PartIndex> = prepared.views.iter().map(|v| v.parts.clone()).collect();
                    oracle_segment(&index, &parts, *min_pixels)
                }
                None => Vec::new(),
            }
        }
        SegmenterBackend::External {
            exchange_dir,
            timeout_seconds,
        } => {
            let views = render_scene(&prepared.scene, &prepared.cameras());
            let backend = ExternalBackend::new(exchange_dir, Duration::from_secs(*timeout_seconds));
            external_segment(&views, query, &backend)?
        }
    };
    Ok(match &config.noise {
        Some(n) => {
            let targets: Vec<Vec<u32>> = prepared.views.iter().map(|v| v.far_pixels.clone()).collect();
            let seed = derive_seed(prepared.scene.manifest.seed, Stream::MaskNoise, text_hash(query));
            corrupt_masks(masks, &targets, n.probability, seed)
        }
        None => masks,
    })
}

/// Lifts 2D masks to 3D instances on a prepared scene.
pub fn group_masks(prepared: &PreparedScene, masks: &[Mask2D], config: &PipelineConfig) -> Result<Vec<PartInstance3D>> {
    let views = &prepared.views;
    let pixels = views.first().map(|v| v.camera.width() * v.camera.height()).unwrap_or(0);
    let inside = mask_union(masks, views.len(), pixels);
    let visible: Vec<Vec<u32>> = views.iter().map(|v| v.visible.clone()).collect();
    let weights = superpoint_weights(&prepared.cameras(), &prepared.partition, &prepared.grid, config.weights);
    let scores = score_superpoints(&prepared.partition, &visible, &inside, &weights)?;
    Ok(form_instances(&scores, &prepared.partition, config.threshold))
}

pub fn segment_scene(prepared: &PreparedScene, query: &str, config: &PipelineConfig) -> Result<QueryResult> {
    let masks = segment_2d(prepared, query, config)?;
    let instances = group_masks(prepared, &masks, config)?;
    Ok(QueryResult {
        query: query.to_string(),
        masks,
        instances,
    })
}

pub fn scored_masks(instances: &[PartInstance3D]) -> Vec<ScoredMask> {
    instances
        .iter()
        .map(|i| ScoredMask {
            confidence: i.confidence,
            points: i.points.clone(),
        })
        .collect()
}

/// Runs `queries` (every listed query of the scene when empty) on one scene,
/// writing `pred/<slug>.json` under `out` and, with `with_eval`, the report.
pub fn run_scene(
    prepared: &PreparedScene,
    queries: &[String],
    config: &PipelineConfig,
    out: &Path,
    with_eval: bool,
) -> Result<(Vec<QueryResult>, Option<EvalReport>)> {
    let listed: Vec<String>;
    let queries = if queries.is_empty() {
        listed = prepared.scene.manifest.queries.iter().map(|q| q.query_text.clone()).collect();
        &listed
    } else {
        queries
    };
    let mut results = Vec::with_capacity(queries.len());
    for q in queries {
        let r = segment_scene(prepared, q, config)?;
        write_prediction(&out.join("pred"), &Prediction::new(q, &r.instances))?;
        results.push(r);
    }
    let report = if with_eval {
        let mut gts = BTreeMap::new();
        let mut preds = BTreeMap::new();
        for r in &results {
            gts.insert(r.query.clone(), prepared.ground_truth(&r.query).unwrap_or_default());
            preds.insert(r.query.clone(), scored_masks(&r.instances));
        }
        let report = evaluate(&preds, &gts)?;
        write_report(out, &report)?;
        Some(report)
    } else {
        None
    };
    Ok((results, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSummary {
    pub scene_id: String,
    pub queries: usize,
    pub ap: f64,
    pub ap50: f64,
    pub ap25: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub split: Option<Split>,
    pub scenes: Vec<SceneSummary>,
    pub failed: usize,
    /// over every query of every successful scene
    pub report: EvalReport,
}

/// Runs every listed query of every scene under `scenes_root` (restricted to
/// `split` when given). Per-scene outputs go to `<out>/<scene_id>/`; the
/// summary to `<out>/summary.json` and `<out>/summary.csv`. Scene failures
/// are recorded; the call fails only when every scene fails.
pub fn benchmark(
    scenes_root: &Path,
    split: Option<Split>,
    config: &PipelineConfig,
    out: &Path,
) -> Result<BenchmarkSummary> {
    config.validate()?;
    let mut dirs = Vec::new();
    for d in list_scenes(scenes_root)? {
        let m: crate::synth::SceneManifest = read_json(&d.join("manifest.json"))?;
        if split.is_none_or(|s| s == m.split) {
            dirs.push((m.scene_id, d));
        }
    }
    if dirs.is_empty() {
        return Err(Error::InvalidInput(format!("no scenes under {}", scenes_root.display())));
    }
    let run_one = |(id, dir): &(String, PathBuf)| -> (SceneSummary, Vec<QueryReport>) {
        let start = std::time::Instant::now();
        let result = PreparedScene::load(dir, config).and_then(|p| run_scene(&p, &[], config, &out.join(id), true));
        let seconds = start.elapsed().as_secs_f64();
        match result {
            Ok((_, Some(report))) => {
                log::info!("{id}: AP {:.3} AP50 {:.3} AP25 {:.3} ({seconds:.1} s)", report.ap, report.ap50, report.ap25);
                let queries = report
                    .queries
                    .iter()
                    .cloned()
                    .map(|mut q| {
                        q.query = format!("{id}/{}", q.query);
                        q
                    })
                    .collect();
                (
                    SceneSummary {
                        scene_id: id.clone(),
                        queries: report.queries.len(),
                        ap: report.ap,
                        ap50: report.ap50,
                        ap25: report.ap25,
                        error: None,
                    },
                    queries,
                )
            }
            Ok((_, None)) => unreachable!("evaluation requested"),
            Err(e) => {
                log::error!("{id}: {e}");
                (
                    SceneSummary {
                        scene_id: id.clone(),
                        queries: 0,
                        ap: 0.0,
                        ap50: 0.0,
                        ap25: 0.0,
                        error: Some(e.to_string()),
                    },
                    Vec::new(),
                )
            }
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", config.jobs)))?;
    let results: Vec<(SceneSummary, Vec<QueryReport>)> = pool.install(|| dirs.par_iter().map(run_one).collect());
    let failed = results.iter().filter(|(s, _)| s.error.is_some()).count();
    let (scenes, queries): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let summary = BenchmarkSummary {
        split,
        failed,
        report: aggregate(queries.into_iter().flatten().collect()),
        scenes,
    };
    write_json(&out.join("summary.json"), &summary)?;
    write_summary_csv(&out.join("summary.csv"), &summary)?;
    if failed == summary.scenes.len() {
        return Err(Error::InvalidInput(format!("all {failed} scenes failed")));
    }
    Ok(summary)
}

fn write_summary_csv(path: &Path, s: &BenchmarkSummary) -> Result<()> {
    let mut body = String::from("scene,queries,ap,ap50,ap25,error\n");
    for r in &s.scenes {
        body.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{}\n",
            r.scene_id,
            r.queries,
            r.ap,
            r.ap50,
            r.ap25,
            r.error.as_deref().unwrap_or("").replace([',', '\n'], ";")
        ));
    }
    body.push_str(&format!(
        "mean,{},{:.6},{:.6},{:.6},\n",
        s.report.evaluated_queries, s.report.ap, s.report.ap50, s.report.ap25
    ));
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_round_trip() {
        let cfg = PipelineConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: PipelineConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let partial: PipelineConfig = serde_json::from_str(r#"{"seed": 3, "weights": "uniform"}"#).unwrap();
        assert_eq!(partial.seed, 3);
        assert_eq!(partial.weights, WeightMode::Uniform);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"sed": 3}"#).is_err());
    }

    #[test]
    fn validation_rejects_bad_ranges() {
        let cfg = PipelineConfig {
            threshold: 1.5,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg = PipelineConfig {
            layouts: Some(PathBuf::from("/nonexistent/layouts")),
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn point_sets_per_part() {
        let sets = part_point_sets(&[0, 3, 3, 4, 0, 4, 5], &BTreeSet::from([3, 4, 9]));
        assert_eq!(sets, vec![vec![1, 2], vec![3, 5]]);
    }

    #[test]
    fn one_table_closed_loop() {
        let dir = tempfile::tempdir().unwrap();
        let config = PipelineConfig {
            output: dir.path().to_path_buf(),
            seed: 5,
            scene: SceneConfig {
                tier_scale: 0.2,
                small_object_count: 0,
                ..Default::default()
            },
            camera: CameraParams {
                resolution: [384, 384],
                ..Default::default()
            },
            ..Default::default()
        };
        let library = config.library().unwrap();
        let layout = Layout {
            layout_id: "one_table".into(),
            room_extent: crate::geometry::Aabb::new(
                crate::geometry::Vec3::new(-2.0, -2.0, 0.0),
                crate::geometry::Vec3::new(2.0, 2.0, 3.0),
            )
            .unwrap(),
            placements: vec![crate::synth::LayoutPlacement {
                category: "table".into(),
                position: crate::geometry::Vec3::ZERO,
                yaw: 0.0,
                required: true,
            }],
        };
        let scene = generate_scene(&layout, &library, 5, &config.scene, None).unwrap();
        let prepared = PreparedScene::new(scene, &config).unwrap();
        assert_eq!(prepared.views.len(), 25);

        let gt = prepared.ground_truth("table_leg").unwrap();
        let r = segment_scene(&prepared, "table_leg", &config).unwrap();
        assert_eq!(r.instances.len(), gt.len(), "one instance per leg");
        for g in &gt {
            let best = r
                .instances
                .iter()
                .map(|i| {
                    let (inter, union) = crate::eval::overlap(&i.points, g);
                    inter as f64 / union as f64
                })
                .fold(0.0, f64::max);
            assert!(best >= 0.8, "leg IoU {best}");
        }
        assert!(segment_scene(&prepared, "unicorn_horn", &config).unwrap().instances.is_empty());
        let uniform = PipelineConfig {
            weights: WeightMode::Uniform,
            ..config.clone()
        };
        assert!(!segment_scene(&prepared, "table_leg", &uniform).unwrap().instances.is_empty());
    }
}
