use std::collections::BTreeMap;

use rayon::prelude::*;

use super::camera::Camera;
use crate::geometry::{TriMesh, Vec3};

/// One rendered view. Buffers are row-major, `width * height` long.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewBundle {
    pub camera: Camera,
    /// RGB, 3 bytes per pixel
    pub color: Vec<u8>,
    /// 0 = background
    pub part_id: Vec<u32>,
    pub object_id: Vec<u32>,
    /// view-space depth in meters, `+inf` where empty
    pub depth: Vec<f32>,
}

impl ViewBundle {
    pub fn width(&self) -> usize {
        self.camera.width()
    }

    pub fn height(&self) -> usize {
        self.camera.height()
    }
}

pub const BACKGROUND: [u8; 3] = [0, 0, 0];
const FALLBACK_COLOR: [u8; 3] = [128, 128, 128];
const BAND_ROWS: usize = 32;

/// Triangle in screen space: pixel coordinates plus inverse depth.
#[derive(Debug, Clone, Copy)]
struct ScreenTri {
    p: [(f64, f64); 3],
    inv_z: [f64; 3],
    part: u32,
    object: u32,
    rows: (usize, usize),
}

/// Perspective z-buffer rendering of every triangle, front and back faces
/// alike. The nearest fragment wins; equal depths go to the lower part id.
pub fn render_view(mesh: &TriMesh, palette: &BTreeMap<u32, [u8; 3]>, camera: &Camera) -> ViewBundle {
    render_banded(mesh, palette, camera, BAND_ROWS)
}

pub(crate) fn render_banded(
    mesh: &TriMesh,
    palette: &BTreeMap<u32, [u8; 3]>,
    camera: &Camera,
    band_rows: usize,
) -> ViewBundle {
    let (w, h) = (camera.width(), camera.height());
    let tris = screen_triangles(mesh, camera);

    let mut depth = vec![f32::INFINITY; w * h];
    let mut part_id = vec![0u32; w * h];
    let mut object_id = vec![0u32; w * h];
    depth
        .par_chunks_mut(band_rows * w)
        .zip(part_id.par_chunks_mut(band_rows * w))
        .zip(object_id.par_chunks_mut(band_rows * w))
        .enumerate()
        .for_each(|(b, ((d, p), o))| {
            let (r0, r1) = (b * band_rows, ((b + 1) * band_rows).min(h));
            let mut band = Band {
                width: w,
                row0: r0,
                row1: r1,
                far: camera.far,
                depth: d,
                part: p,
                object: o,
            };
            for t in tris.iter().filter(|t| t.rows.0 < r1 && t.rows.1 >= r0) {
                band.fill(t);
            }
        });

    let mut color = Vec::with_capacity(3 * w * h);
    for &p in &part_id {
        let c = if p == 0 {
            BACKGROUND
        } else {
            palette.get(&p).copied().unwrap_or(FALLBACK_COLOR)
        };
        color.extend_from_slice(&c);
    }
    ViewBundle {
        camera: camera.clone(),
        color,
        part_id,
        object_id,
        depth,
    }
}

fn screen_triangles(mesh: &TriMesh, camera: &Camera) -> Vec<ScreenTri> {
    let fr = camera.frame();
    let f = camera.focal();
    let (cx, cy) = camera.principal_point();
    let (w, h) = (camera.width() as f64, camera.height() as f64);
    let view: Vec<Vec3> = mesh
        .vertices
        .iter()
        .map(|&v| {
            let d = v - camera.position;
            Vec3::new(d.dot(fr.right), d.dot(fr.up), d.dot(fr.forward))
        })
        .collect();

    mesh.faces
        .par_iter()
        .enumerate()
        .flat_map_iter(|(fi, face)| {
            let poly = clip_near(face.map(|i| view[i as usize]), camera.near);
            let proj: Vec<((f64, f64), f64)> = poly
                .iter()
                .map(|q| ((cx + f * q.x / q.z, cy - f * q.y / q.z), 1.0 / q.z))
                .collect();
            let (part, object) = (mesh.face_part_id[fi], mesh.face_object_id[fi]);
            (1..proj.len().saturating_sub(1)).filter_map(move |k| {
                let t = [proj[0], proj[k], proj[k + 1]];
                let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
                for ((x, y), _) in t {
                    lo_x = lo_x.min(x);
                    hi_x = hi_x.max(x);
                    lo_y = lo_y.min(y);
                    hi_y = hi_y.max(y);
                }
                if hi_x < -0.5 || lo_x > w - 0.5 || hi_y < -0.5 || lo_y > h - 0.5 {
                    return None;
                }
                let r0 = lo_y.ceil().max(0.0) as usize;
                let r1 = hi_y.floor().min(h - 1.0);
                if r1 < r0 as f64 {
                    return None;
                }
                Some(ScreenTri {
                    p: [t[0].0, t[1].0, t[2].0],
                    inv_z: [t[0].1, t[1].1, t[2].1],
                    part,
                    object,
                    rows: (r0, r1 as usize),
                })
            })
        })
        .collect()
}

/// Sutherland–Hodgman clip of a view-space triangle against `z >= near`.
fn clip_near(tri: [Vec3; 3], near: f64) -> Vec<Vec3> {
    let inside = |p: &Vec3| p.z >= near;
    if tri.iter().all(inside) {
        return tri.to_vec();
    }
    let mut out = Vec::with_capacity(4);
    for k in 0..3 {
        let (a, b) = (tri[k], tri[(k + 1) % 3]);
        if inside(&a) {
            out.push(a);
        }
        if inside(&a) != inside(&b) {
            let t = (near - a.z) / (b.z - a.z);
            let mut q = a + (b - a) * t;
            q.z = near;
            out.push(q);
        }
    }
    out
}

struct Band<'a> {
    width: usize,
    row0: usize,
    row1: usize,
    far: f64,
    depth: &'a mut [f32],
    part: &'a mut [u32],
    object: &'a mut [u32],
}

#[inline]
fn edge(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

impl Band<'_> {
    fn fill(&mut self, t: &ScreenTri) {
        let [a, b, c] = t.p;
        let area = edge(a, b, c);
        if area == 0.0 || !area.is_finite() {
            return;
        }
        let lo_x = a.0.min(b.0).min(c.0).ceil().max(0.0) as usize;
        let hi_x = a.0.max(b.0).max(c.0).floor().min(self.width as f64 - 1.0);
        if hi_x < lo_x as f64 {
            return;
        }
        let hi_x = hi_x as usize;
        let r0 = t.rows.0.max(self.row0);
        let r1 = t.rows.1.min(self.row1 - 1);
        let inv_area = 1.0 / area;
        for y in r0..=r1 {
            let row = (y - self.row0) * self.width;
            for x in lo_x..=hi_x {
                let p = (x as f64, y as f64);
                let l0 = edge(b, c, p) * inv_area;
                let l1 = edge(c, a, p) * inv_area;
                let l2 = edge(a, b, p) * inv_area;
                if l0 < 0.0 || l1 < 0.0 || l2 < 0.0 {
                    continue;
                }
                let z = 1.0 / (l0 * t.inv_z[0] + l1 * t.inv_z[1] + l2 * t.inv_z[2]);
                if !(z <= self.far) {
                    continue;
                }
                let z = z as f32;
                let i = row + x;
                let cur = self.depth[i];
                if z < cur || (z == cur && (t.part, t.object) < (self.part[i], self.object[i])) {
                    self.depth[i] = z;
                    self.part[i] = t.part;
                    self.object[i] = t.object;
                }
            }
        }
    }
}
