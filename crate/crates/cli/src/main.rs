mod overrides;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use partlift::error::{Error, Result};
use partlift::eval::{evaluate, write_report, ScoredMask};
use partlift::grouping::{write_prediction, Prediction, WeightMode};
use partlift::io::{read_json, write_gray16_png, write_json};
use partlift::io::ply::write_cloud_ply;
use partlift::pipeline::{
    benchmark, group_masks, part_point_sets, render_scene, run_scene, segment_2d, synthesize_dataset, CameraStrategy,
    PipelineConfig, PreparedScene,
};
use partlift::render::write_view;
use partlift::segment::{read_response, resolve_query, RequestFile, ResponseFile, ResponseMask};
use partlift::synth::procedural::write_builtin_assets;
use partlift::synth::{load_scene, part_color, Split};

#[derive(Debug, Parser)]
#[command(name = "partlift", version, about = "Open-vocabulary 3D part segmentation by lifting 2D part masks")]
struct Cli {
    /// JSON pipeline config; fields may also be set with `--<dotted.name>=<value>`
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// worker threads (0 = all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    weights: Option<WeightMode>,
    #[arg(long, global = true)]
    cameras: Option<CameraStrategy>,
    /// output root (overrides `output`)
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// print the effective config as JSON and exit
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate scenes into <output>/scenes
    Synth {
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Plan cameras and render views of a scene
    Snap {
        scene: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// 2D part masks for a query, written as label maps
    Segment {
        scene: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lift masks written by `segment` to 3D part instances
    Group {
        scene: PathBuf,
        /// directory written by `segment`
        #[arg(long)]
        masks: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline on one scene
    Run {
        scene: PathBuf,
        /// query text; every listed query of the scene when omitted
        #[arg(long)]
        query: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// evaluate against the scene ground truth
        #[arg(long)]
        eval: bool,
        /// write a PLY coloring predicted parts per query
        #[arg(long)]
        viz: bool,
    },
    /// Run and evaluate every query of every scene in a split
    Benchmark {
        /// scenes root; <output>/scenes when omitted
        #[arg(long)]
        scenes: Option<PathBuf>,
        #[arg(long)]
        split: Option<Split>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate stored predictions against a scene's ground truth
    Eval {
        scene: PathBuf,
        /// directory of prediction JSON files
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Color a scene cloud by predicted instances
    Viz {
        scene: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the built-in shape library, layouts and templates
    MakeLibrary { dir: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    ExitCode::from(run(std::env::args().collect()))
}

/// Parses `args` (program name first) and executes; returns the exit code.
fn run(args: Vec<String>) -> u8 {
    let (args, sets) = match overrides::extract(args) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match effective_config(&cli, &sets).and_then(|cfg| {
        if cli.print_config {
            println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
            return Ok(());
        }
        if cfg.jobs > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global();
        }
        dispatch(&cli.command, &cfg)
    }) {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            if e.is_user_error() {
                1
            } else {
                2
            }
        }
    }
}

fn effective_config(cli: &Cli, sets: &[(String, String)]) -> Result<PipelineConfig> {
    let mut value = match &cli.config {
        Some(p) => read_json::<serde_json::Value>(p).map_err(|e| Error::Config(e.to_string()))?,
        None => serde_json::to_value(PipelineConfig::default()).expect("config serializes"),
    };
    let mut set = |key: &str, v: serde_json::Value| overrides::apply(&mut value, key, v).map_err(Error::Config);
    for (k, v) in sets {
        set(k, overrides::parse_value(v))?;
    }
    if let Some(s) = cli.seed {
        set("seed", s.into())?;
    }
    if let Some(j) = cli.jobs {
        set("jobs", j.into())?;
    }
    if let Some(w) = cli.weights {
        set("weights", serde_json::to_value(w).expect("enum serializes"))?;
    }
    if let Some(c) = cli.cameras {
        set("cameras", serde_json::to_value(c).expect("enum serializes"))?;
    }
    if let Some(o) = &cli.output {
        set("output", o.to_string_lossy().into_owned().into())?;
    }
    let cfg: PipelineConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn scene_id(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scene".into())
}

fn dispatch(cmd: &Command, cfg: &PipelineConfig) -> Result<()> {
    match cmd {
        Command::Synth { count } => {
            let dirs = synthesize_dataset(cfg, *count)?;
            log::info!("wrote {} scenes under {}", dirs.len(), cfg.scenes_dir().display());
            Ok(())
        }
        Command::Snap { scene, out } => {
            let out = out.clone().unwrap_or_else(|| cfg.output.join("views").join(scene_id(scene)));
            let s = load_scene(scene)?;
            let grid = partlift::pipeline::scene_grid(&s)?;
            let cameras = partlift::pipeline::plan_cameras(cfg, &grid)?;
            for (k, v) in render_scene(&s, &cameras).iter().enumerate() {
                write_view(&out, k, v)?;
            }
            log::info!("wrote {} views to {}", cameras.len(), out.display());
            Ok(())
        }
        Command::Segment { scene, query, out } => {
            let prepared = PreparedScene::load(scene, cfg)?;
            let out = out.clone().unwrap_or_else(|| {
                cfg.output
                    .join("masks")
                    .join(scene_id(scene))
                    .join(partlift::grouping::query_slug(query))
            });
            write_masks(&out, &prepared, query, cfg)
        }
        Command::Group { scene, masks, out } => {
            let prepared = PreparedScene::load(scene, cfg)?;
            let request: RequestFile = read_json(&masks.join("request.json"))?;
            if request.views != prepared.views.len() {
                return Err(Error::InvalidInput(format!(
                    "masks cover {} views, the configured cameras give {}",
                    request.views,
                    prepared.views.len()
                )));
            }
            let m = read_response(masks, &request)?;
            let instances = group_masks(&prepared, &m, cfg)?;
            let out = out.clone().unwrap_or_else(|| cfg.output.join("runs").join(scene_id(scene)));
            let path = write_prediction(&out.join("pred"), &Prediction::new(&request.query, &instances))?;
            log::info!("{} instances -> {}", instances.len(), path.display());
            Ok(())
        }
        Command::Run {
            scene,
            query,
            out,
            eval,
            viz,
        } => {
            let prepared = PreparedScene::load(scene, cfg)?;
            let out = out.clone().unwrap_or_else(|| cfg.output.join("runs").join(scene_id(scene)));
            let (results, report) = run_scene(&prepared, query, cfg, &out, *eval)?;
            for r in &results {
                log::info!("`{}`: {} masks, {} instances", r.query, r.masks.len(), r.instances.len());
                if *viz {
                    let pred = Prediction::new(&r.query, &r.instances);
                    let path = out.join("viz").join(format!("{}.ply", partlift::grouping::query_slug(&r.query)));
                    write_viz(&prepared.scene.cloud, &pred, prepared.scene.manifest.seed, &path)?;
                }
            }
            if let Some(r) = report {
                log::info!("AP {:.4} AP50 {:.4} AP25 {:.4}", r.ap, r.ap50, r.ap25);
            }
            Ok(())
        }
        Command::Benchmark { scenes, split, out } => {
            let root = scenes.clone().unwrap_or_else(|| cfg.scenes_dir());
            let out = out.clone().unwrap_or_else(|| {
                cfg.output
                    .join("benchmark")
                    .join(split.map(Split::as_str).unwrap_or("all"))
            });
            let s = benchmark(&root, *split, cfg, &out)?;
            println!("scenes {} (failed {})", s.scenes.len(), s.failed);
            println!("queries {}", s.report.evaluated_queries);
            println!("AP   {:.4}", s.report.ap);
            println!("AP50 {:.4}", s.report.ap50);
            println!("AP25 {:.4}", s.report.ap25);
            Ok(())
        }
        Command::Eval { scene, pred, out } => {
            let s = load_scene(scene)?;
            let mut preds: BTreeMap<String, Vec<ScoredMask>> = BTreeMap::new();
            let mut files: Vec<PathBuf> = std::fs::read_dir(pred)
                .map_err(|e| Error::Io { path: pred.clone(), source: e })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            for f in files {
                let p: Prediction = read_json(&f)?;
                let masks = p
                    .masks()
                    .into_iter()
                    .map(|(confidence, points)| ScoredMask { confidence, points })
                    .collect();
                preds.insert(p.query, masks);
            }
            let m = &s.manifest;
            let mut gts = BTreeMap::new();
            for q in m.queries.iter().map(|q| q.query_text.clone()).chain(preds.keys().cloned()) {
                if let Some(parts) = resolve_query(&q, &m.labels, &m.queries) {
                    gts.insert(q, part_point_sets(&s.cloud.part_id, &parts));
                }
            }
            let report = evaluate(&preds, &gts)?;
            let out = out.clone().unwrap_or_else(|| pred.parent().unwrap_or(pred).to_path_buf());
            write_report(&out, &report)?;
            println!("AP {:.4} AP50 {:.4} AP25 {:.4}", report.ap, report.ap50, report.ap25);
            Ok(())
        }
        Command::Viz { scene, pred, out } => {
            let s = load_scene(scene)?;
            let p: Prediction = read_json(pred)?;
            write_viz(&s.cloud, &p, s.manifest.seed, out)
        }
        Command::MakeLibrary { dir } => {
            write_builtin_assets(dir)?;
            log::info!("wrote built-in assets to {}", dir.display());
            Ok(())
        }
    }
}

fn write_masks(out: &Path, prepared: &PreparedScene, query: &str, cfg: &PipelineConfig) -> Result<()> {
    let masks = segment_2d(prepared, query, cfg)?;
    let cam = &prepared.views.first().ok_or(Error::Empty("views"))?.camera;
    let (w, h) = (cam.width(), cam.height());
    let mut maps: BTreeMap<usize, Vec<u16>> = BTreeMap::new();
    for m in &masks {
        let label = u16::try_from(m.instance)
            .map_err(|_| Error::InvalidInput(format!("instance {} exceeds a 16-bit label map", m.instance)))?;
        let map = maps.entry(m.view).or_insert_with(|| vec![0; w * h]);
        for &p in &m.pixels {
            map[p as usize] = label;
        }
    }
    if out.exists() {
        std::fs::remove_dir_all(out).map_err(|e| Error::Io { path: out.to_path_buf(), source: e })?;
    }
    for (v, map) in maps {
        write_gray16_png(&out.join("masks").join(format!("{v}.png")), w as u32, h as u32, map)?;
    }
    write_json(
        &out.join("request.json"),
        &RequestFile {
            query: query.to_string(),
            views: prepared.views.len(),
            resolution: cam.resolution,
        },
    )?;
    write_json(
        &out.join("response.json"),
        &ResponseFile {
            query: query.to_string(),
            model_info: format!("partlift {:?}", cfg.segmenter),
            masks: masks
                .iter()
                .map(|m| ResponseMask {
                    view: m.view,
                    instance: m.instance,
                    confidence: m.confidence,
                })
                .collect(),
        },
    )?;
    log::info!("{} masks -> {}", masks.len(), out.display());
    Ok(())
}

const VIZ_GRAY: [u8; 3] = [160, 160, 160];

fn write_viz(cloud: &partlift::geometry::AnnotatedCloud, pred: &Prediction, seed: u64, path: &Path) -> Result<()> {
    let mut colored = cloud.clone();
    colored.colors = vec![VIZ_GRAY; cloud.len()];
    for (k, (_, points)) in pred.masks().into_iter().enumerate() {
        let c = part_color(seed, k as u32 + 1);
        for p in points {
            let slot = colored
                .colors
                .get_mut(p as usize)
                .ok_or_else(|| Error::InvalidInput(format!("prediction point {p} is outside the cloud")))?;
            *slot = c;
        }
    }
    write_cloud_ply(path, &colored)
}
