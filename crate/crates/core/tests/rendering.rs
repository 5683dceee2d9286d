use partlift::geometry::{TriMesh, Vec3};
use partlift::pipeline::{plan_cameras, scene_grid, PipelineConfig};
use partlift::render::{default_epsilon, render_view, visible_pixels, Camera, NOT_VISIBLE};
use partlift::synth::procedural::{builtin_layouts, catalogue, library_from_specs};
use partlift::synth::{generate_scene, Scene, SceneConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn desk_scene(layout: usize, seed: u64, refine_fraction: f64) -> Scene {
    let library = library_from_specs(&catalogue()).unwrap();
    let layouts = builtin_layouts();
    let cfg = SceneConfig {
        tier_scale: 0.35,
        small_object_count: 6,
        refine_fraction,
        ..Default::default()
    };
    generate_scene(&layouts[layout % layouts.len()], &library, seed, &cfg, None).unwrap()
}

fn ray_hit(o: Vec3, d: Vec3, [a, b, c]: [Vec3; 3]) -> Option<f64> {
    let (e1, e2) = (b - a, c - a);
    let p = d.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let s = o - a;
    let u = s.dot(p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = d.dot(q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(q) * inv)
}

/// Casts the ray through the centre of the pixel the point rounds to and
/// finds the nearest surface between the near and far planes. The point is
/// visible when it lies no more than `eps` behind that surface.
fn oracle_visible(mesh: &TriMesh, cam: &Camera, p: Vec3, eps: f64) -> bool {
    let Some(q) = cam.project(p) else { return false };
    let (x, y) = (q.u.round(), q.v.round());
    if x < 0.0 || y < 0.0 || x >= cam.width() as f64 || y >= cam.height() as f64 {
        return false;
    }
    // unit view depth at t = 1, so the hit parameter is the hit depth
    let d = cam.unproject(x, y, 1.0) - cam.position;
    let mut nearest = f64::INFINITY;
    for f in 0..mesh.faces.len() {
        if let Some(t) = ray_hit(cam.position, d, mesh.triangle(f)) {
            if t >= cam.near && t <= cam.far && t < nearest {
                nearest = t;
            }
        }
    }
    q.depth <= nearest + eps
}

#[test]
fn visibility_agrees_with_ray_casting() {
    let config = PipelineConfig::default();
    let (mut agree, mut total, mut visible) = (0usize, 0usize, 0usize);
    for s in 0..5 {
        let scene = desk_scene(s, 100 + s as u64, 0.0);
        let grid = scene_grid(&scene).unwrap();
        let cameras = plan_cameras(&config, &grid).unwrap();
        let eps = default_epsilon(grid.aabb.diagonal());
        let mut rng = ChaCha8Rng::seed_from_u64(s as u64);
        let pts: Vec<Vec3> = (0..200).map(|_| scene.cloud.points[rng.random_range(0..scene.cloud.len())]).collect();
        for cam in &cameras {
            let view = render_view(&scene.mesh, &scene.manifest.palette, cam);
            let vis = visible_pixels(cam, &view.depth, &pts, eps);
            for (k, &p) in pts.iter().enumerate() {
                let o = oracle_visible(&scene.mesh, cam, p, eps);
                agree += (o == (vis[k] != NOT_VISIBLE)) as usize;
                visible += o as usize;
                total += 1;
            }
        }
    }
    let rate = agree as f64 / total as f64;
    println!("visibility agreement {agree}/{total} = {rate:.5} ({visible} visible by ray casting)");
    assert!(rate >= 0.995, "agreement {rate}");
    assert!(visible > total / 10, "degenerate sample: {visible} visible of {total}");
}

#[test]
fn camera_classes_per_scene() {
    let config = PipelineConfig::default();
    for s in 0..5 {
        let scene = desk_scene(s, 300 + s as u64, 0.05);
        let grid = scene_grid(&scene).unwrap();
        let cams = plan_cameras(&config, &grid).unwrap();
        assert_eq!(cams.len(), 25);
        let mut per_cell = [[0usize; 3]; 3];
        for c in &cams {
            per_cell[c.grid_cell[1]][c.grid_cell[0]] += 1;
        }
        let (mut corner, mut side, mut center) = (0, 0, 0);
        for j in 0..3 {
            for i in 0..3 {
                let extra = per_cell[j][i] - 1;
                match (i == 1) as u8 + (j == 1) as u8 {
                    0 => corner += extra,
                    1 => side += extra,
                    _ => center += extra,
                }
            }
        }
        assert_eq!((corner, side, center), (4, 8, 4));
    }
}

#[test]
fn rendering_is_deterministic() {
    let scene = desk_scene(2, 9, 0.05);
    let grid = scene_grid(&scene).unwrap();
    let cams = plan_cameras(&PipelineConfig::default(), &grid).unwrap();
    let a = render_view(&scene.mesh, &scene.manifest.palette, &cams[4]);
    let b = render_view(&scene.mesh, &scene.manifest.palette, &cams[4]);
    assert_eq!(a, b);
}
