//! Built-in library of part-annotated furniture and small objects made of
//! boxes and prisms, plus a handful of room layouts that use them.
//!
//! Shapes are open at the bottom and faces hidden by contact between boxes
//! are cut away, so every sampled point lies on a surface a camera can see.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;

use serde::Serialize;

use super::layout::{Layout, LayoutPlacement};
use super::library::{ShapeLibrary, ShapeRecord};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, SizeTier, TriMesh, Vec3};
use crate::io::obj::write_obj;
use crate::io::write_json;

/// A shape as polygons grouped by part.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSpec {
    pub shape_id: String,
    pub category: String,
    pub size_tier: SizeTier,
    pub supports_objects: bool,
    /// part id → name
    pub parts: BTreeMap<u32, String>,
    /// Planar convex polygons, counter-clockwise seen from outside, sorted by
    /// part.
    pub polygons: Vec<(u32, Vec<Vec3>)>,
}

impl ShapeSpec {
    pub fn to_record(&self) -> Result<ShapeRecord> {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        let mut face_part_id = Vec::new();
        for (part, poly) in &self.polygons {
            let base = vertices.len() as u32;
            vertices.extend_from_slice(poly);
            for k in 1..poly.len() as u32 - 1 {
                faces.push([base, base + k, base + k + 1]);
                face_part_id.push(*part);
            }
        }
        let n = faces.len();
        let mesh = TriMesh::new(vertices, faces, face_part_id, vec![0; n])?;
        Ok(ShapeRecord {
            shape_id: self.shape_id.clone(),
            category: self.category.clone(),
            size_tier: self.size_tier,
            supports_objects: self.supports_objects,
            mesh,
            part_labels: self.parts.clone(),
        })
    }

    /// Writes `<shape_id>.obj` and its `<shape_id>.json` sidecar into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut vertices = Vec::new();
        let mut polygons = Vec::new();
        let mut ranges: BTreeMap<u32, [usize; 2]> = BTreeMap::new();
        for (i, (part, poly)) in self.polygons.iter().enumerate() {
            let base = vertices.len() as u32;
            vertices.extend_from_slice(poly);
            polygons.push((base..base + poly.len() as u32).collect::<Vec<_>>());
            ranges.entry(*part).and_modify(|r| r[1] = i + 1).or_insert([i, i + 1]);
        }
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_obj(&dir.join(format!("{}.obj", self.shape_id)), &vertices, &polygons)?;

        #[derive(Serialize)]
        struct Part<'a> {
            part_id: u32,
            name: &'a str,
            faces: Vec<[usize; 2]>,
        }
        #[derive(Serialize)]
        struct Sidecar<'a> {
            shape_id: &'a str,
            category: &'a str,
            size_tier: SizeTier,
            supports_objects: bool,
            mesh: String,
            parts: Vec<Part<'a>>,
        }
        let side = Sidecar {
            shape_id: &self.shape_id,
            category: &self.category,
            size_tier: self.size_tier,
            supports_objects: self.supports_objects,
            mesh: format!("{}.obj", self.shape_id),
            parts: self
                .parts
                .iter()
                .map(|(&part_id, name)| Part {
                    part_id,
                    name,
                    faces: ranges.get(&part_id).map(|r| vec![*r]).unwrap_or_default(),
                })
                .collect(),
        };
        write_json(&dir.join(format!("{}.json", self.shape_id)), &side)
    }
}

#[derive(Debug, Clone, Copy)]
struct BoxPart {
    part: u32,
    min: [f64; 3],
    max: [f64; 3],
}

#[derive(Debug, Clone, Copy)]
struct Prism {
    part: u32,
    center: [f64; 2],
    z: [f64; 2],
    radius: f64,
    sides: u32,
    cap: bool,
}

#[derive(Default)]
struct Builder {
    parts: BTreeMap<u32, String>,
    boxes: Vec<BoxPart>,
    prisms: Vec<Prism>,
}

type Rect = [f64; 4];

impl Builder {
    fn part(&mut self, name: &str) -> u32 {
        let id = self.parts.len() as u32 + 1;
        self.parts.insert(id, name.to_string());
        id
    }

    fn cuboid(&mut self, part: u32, min: [f64; 3], max: [f64; 3]) {
        assert!((0..3).all(|a| min[a] < max[a]), "empty box {min:?} {max:?}");
        self.boxes.push(BoxPart { part, min, max });
    }

    #[allow(clippy::too_many_arguments)]
    fn prism(&mut self, part: u32, x: f64, y: f64, z0: f64, z1: f64, radius: f64, sides: u32, cap: bool) {
        self.prisms.push(Prism {
            part,
            center: [x, y],
            z: [z0, z1],
            radius,
            sides,
            cap,
        });
    }

    fn polygons(&self, scale: f64) -> Vec<(u32, Vec<Vec3>)> {
        let mut out: Vec<(u32, Vec<Vec3>)> = Vec::new();
        for (bi, b) in self.boxes.iter().enumerate() {
            for axis in 0..3 {
                for positive in [false, true] {
                    if axis == 2 && !positive {
                        continue;
                    }
                    let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                    let plane = if positive { b.max[axis] } else { b.min[axis] };
                    let face = [b.min[u], b.max[u], b.min[v], b.max[v]];
                    let holes: Vec<Rect> = self
                        .boxes
                        .iter()
                        .enumerate()
                        .filter(|&(oi, _)| oi != bi)
                        .filter_map(|(_, o)| {
                            let other = if positive { o.min[axis] } else { o.max[axis] };
                            ((other - plane).abs() < 1e-9).then_some([o.min[u], o.max[u], o.min[v], o.max[v]])
                        })
                        .collect();
                    for r in rect_minus(face, &holes) {
                        let mut corners = [(r[0], r[2]), (r[1], r[2]), (r[1], r[3]), (r[0], r[3])];
                        if !positive {
                            corners.reverse();
                        }
                        let poly = corners
                            .iter()
                            .map(|&(cu, cv)| {
                                let mut p = [0.0; 3];
                                p[axis] = plane;
                                p[u] = cu;
                                p[v] = cv;
                                Vec3::new(p[0], p[1], p[2]) * scale
                            })
                            .collect();
                        out.push((b.part, poly));
                    }
                }
            }
        }
        for p in &self.prisms {
            let ring: Vec<(f64, f64)> = (0..p.sides)
                .map(|k| {
                    let t = TAU * k as f64 / p.sides as f64;
                    (p.center[0] + p.radius * t.cos(), p.center[1] + p.radius * t.sin())
                })
                .collect();
            for k in 0..ring.len() {
                let (a, b) = (ring[k], ring[(k + 1) % ring.len()]);
                let quad = [(a, p.z[0]), (b, p.z[0]), (b, p.z[1]), (a, p.z[1])];
                out.push((p.part, quad.iter().map(|&((x, y), z)| Vec3::new(x, y, z) * scale).collect()));
            }
            if p.cap {
                out.push((p.part, ring.iter().map(|&(x, y)| Vec3::new(x, y, p.z[1]) * scale).collect()));
            }
        }
        out.sort_by_key(|(part, _)| *part);
        out
    }
}

/// `face` minus the union of `holes`, as disjoint rectangles `[u0, u1, v0, v1]`.
fn rect_minus(face: Rect, holes: &[Rect]) -> Vec<Rect> {
    let holes: Vec<Rect> = holes
        .iter()
        .filter_map(|h| {
            let c = [h[0].max(face[0]), h[1].min(face[1]), h[2].max(face[2]), h[3].min(face[3])];
            (c[0] < c[1] && c[2] < c[3]).then_some(c)
        })
        .collect();
    if holes.is_empty() {
        return vec![face];
    }
    let cuts = |lo: f64, hi: f64, pick: &dyn Fn(&Rect) -> [f64; 2]| {
        let mut c = vec![lo, hi];
        for h in &holes {
            c.extend(pick(h));
        }
        c.sort_by(f64::total_cmp);
        c.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        c
    };
    let us = cuts(face[0], face[1], &|h| [h[0], h[1]]);
    let vs = cuts(face[2], face[3], &|h| [h[2], h[3]]);
    let mut out = Vec::new();
    for j in 0..vs.len() - 1 {
        let vm = 0.5 * (vs[j] + vs[j + 1]);
        let mut run: Option<f64> = None;
        for i in 0..us.len() - 1 {
            let um = 0.5 * (us[i] + us[i + 1]);
            let covered = holes.iter().any(|h| h[0] < um && um < h[1] && h[2] < vm && vm < h[3]);
            match (covered, run) {
                (false, None) => run = Some(us[i]),
                (true, Some(start)) => {
                    out.push([start, us[i], vs[j], vs[j + 1]]);
                    run = None;
                }
                _ => {}
            }
        }
        if let Some(start) = run {
            out.push([start, *us.last().unwrap(), vs[j], vs[j + 1]]);
        }
    }
    out
}

fn table(b: &mut Builder, v: usize) {
    let (w, d, h) = [(1.2, 0.8, 0.75), (1.6, 0.9, 0.74)][v];
    let (t, lw, inset) = (0.04, 0.05, 0.06);
    let top = b.part("top");
    b.cuboid(top, [-w / 2.0, -d / 2.0, h - t], [w / 2.0, d / 2.0, h]);
    for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
        let leg = b.part("leg");
        let (cx, cy) = (sx * (w / 2.0 - inset - lw / 2.0), sy * (d / 2.0 - inset - lw / 2.0));
        b.cuboid(leg, [cx - lw / 2.0, cy - lw / 2.0, 0.0], [cx + lw / 2.0, cy + lw / 2.0, h - t]);
    }
}

fn desk(b: &mut Builder, v: usize) {
    let (w, d, h) = [(1.4, 0.7, 0.76), (1.2, 0.65, 0.75)][v];
    let t = 0.04;
    let top = b.part("top");
    b.cuboid(top, [-w / 2.0, -d / 2.0, h - t], [w / 2.0, d / 2.0, h]);
    let (px1, py0, py1) = (w / 2.0 - 0.05, -d / 2.0 + 0.05, d / 2.0 - 0.05);
    let px0 = px1 - 0.4;
    let ped = b.part("pedestal");
    b.cuboid(ped, [px0, py0, 0.0], [px1, py1, h - t]);
    for sy in [-1.0, 1.0] {
        let leg = b.part("leg");
        let (cx, cy) = (-w / 2.0 + 0.085, sy * (d / 2.0 - 0.085));
        b.cuboid(leg, [cx - 0.025, cy - 0.025, 0.0], [cx + 0.025, cy + 0.025, h - t]);
    }
    for (z0, z1) in [(0.06, 0.30), (0.38, 0.62)] {
        let drawer = b.part("drawer");
        b.cuboid(drawer, [px0 + 0.04, py0 - 0.04, z0], [px1 - 0.04, py0, z1]);
        let handle = b.part("handle");
        let (hx, hz) = (0.5 * (px0 + px1), z1 - 0.06);
        b.cuboid(handle, [hx - 0.06, py0 - 0.085, hz - 0.0125], [hx + 0.06, py0 - 0.04, hz + 0.0125]);
    }
}

/// Body with two front doors and a vertical handle on each.
fn two_door(b: &mut Builder, (w, d, h): (f64, f64, f64), door_margin: f64, handle_half: f64) {
    let body = b.part("body");
    b.cuboid(body, [-w / 2.0, -d / 2.0, 0.0], [w / 2.0, d / 2.0, h]);
    for side in [-1.0, 1.0] {
        let door = b.part("door");
        let (x0, x1) = if side < 0.0 { (-w / 2.0 + 0.04, -0.04) } else { (0.04, w / 2.0 - 0.04) };
        b.cuboid(door, [x0, -d / 2.0 - 0.04, door_margin], [x1, -d / 2.0, h - door_margin]);
    }
    for side in [-1.0, 1.0] {
        let handle = b.part("handle");
        let (x0, x1) = if side < 0.0 { (-0.125, -0.1) } else { (0.1, 0.125) };
        b.cuboid(
            handle,
            [x0, -d / 2.0 - 0.085, h / 2.0 - handle_half],
            [x1, -d / 2.0 - 0.04, h / 2.0 + handle_half],
        );
    }
}

fn cabinet(b: &mut Builder, v: usize) {
    two_door(b, [(0.9, 0.45, 0.9), (0.8, 0.4, 1.0)][v], 0.06, 0.08);
}

fn wardrobe(b: &mut Builder, v: usize) {
    two_door(b, [(1.0, 0.55, 1.9), (1.2, 0.6, 2.0)][v], 0.08, 0.15);
}

fn bed(b: &mut Builder, v: usize) {
    let (w, l) = [(1.5, 2.0), (1.7, 2.1)][v];
    let frame = b.part("frame");
    b.cuboid(frame, [-w / 2.0, -l / 2.0, 0.0], [w / 2.0, l / 2.0, 0.3]);
    let mattress = b.part("mattress");
    b.cuboid(mattress, [-w / 2.0 + 0.05, -l / 2.0 + 0.05, 0.3], [w / 2.0 - 0.05, l / 2.0 - 0.15, 0.5]);
    let head = b.part("headboard");
    b.cuboid(head, [-w / 2.0 - 0.05, l / 2.0, 0.0], [w / 2.0 + 0.05, l / 2.0 + 0.06, 1.0]);
    let pillow = b.part("pillow");
    b.cuboid(pillow, [-0.3, l / 2.0 - 0.45, 0.5], [0.3, l / 2.0 - 0.2, 0.62]);
}

fn sofa(b: &mut Builder, v: usize) {
    let w = [2.0, 1.7][v];
    let base = b.part("base");
    b.cuboid(base, [-w / 2.0, -0.42, 0.0], [w / 2.0, 0.42, 0.42]);
    let back = b.part("back");
    b.cuboid(back, [-w / 2.0 + 0.05, 0.17, 0.42], [w / 2.0 - 0.05, 0.37, 0.85]);
    let left = b.part("arm");
    b.cuboid(left, [-w / 2.0 + 0.1, -0.37, 0.42], [-w / 2.0 + 0.3, 0.17, 0.62]);
    let right = b.part("arm");
    b.cuboid(right, [w / 2.0 - 0.3, -0.37, 0.42], [w / 2.0 - 0.1, 0.17, 0.62]);
    let cushion = b.part("cushion");
    b.cuboid(cushion, [-w / 2.0 + 0.35, -0.37, 0.42], [w / 2.0 - 0.35, 0.12, 0.52]);
}

fn chair(b: &mut Builder, _v: usize) {
    let s: f64 = 0.45;
    let seat = b.part("seat");
    b.cuboid(seat, [-s / 2.0, -s / 2.0, 0.42], [s / 2.0, s / 2.0, 0.47]);
    for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
        let leg = b.part("leg");
        let (cx, cy) = (sx * (s / 2.0 - 0.06), sy * (s / 2.0 - 0.06));
        b.cuboid(leg, [cx - 0.02, cy - 0.02, 0.0], [cx + 0.02, cy + 0.02, 0.42]);
    }
    let back = b.part("back");
    b.cuboid(back, [-s / 2.0 + 0.04, s / 2.0 - 0.085, 0.47], [s / 2.0 - 0.04, s / 2.0 - 0.045, 0.92]);
}

fn stool(b: &mut Builder, _v: usize) {
    let seat = b.part("seat");
    b.cuboid(seat, [-0.18, -0.18, 0.6], [0.18, 0.18, 0.64]);
    for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
        let leg = b.part("leg");
        let (cx, cy) = (sx * 0.12, sy * 0.12);
        b.cuboid(leg, [cx - 0.0175, cy - 0.0175, 0.0], [cx + 0.0175, cy + 0.0175, 0.6]);
    }
}

fn nightstand(b: &mut Builder, v: usize) {
    let (w, d, h) = [(0.45, 0.4, 0.55), (0.5, 0.4, 0.6)][v];
    let body = b.part("body");
    b.cuboid(body, [-w / 2.0, -d / 2.0, 0.0], [w / 2.0, d / 2.0, h]);
    let drawer = b.part("drawer");
    b.cuboid(drawer, [-w / 2.0 + 0.04, -d / 2.0 - 0.04, h - 0.22], [w / 2.0 - 0.04, -d / 2.0, h - 0.05]);
    let handle = b.part("handle");
    let hz = h - 0.11;
    b.cuboid(handle, [-0.06, -d / 2.0 - 0.085, hz - 0.0125], [0.06, -d / 2.0 - 0.04, hz + 0.0125]);
}

fn floor_lamp(b: &mut Builder, _v: usize) {
    let base = b.part("base");
    b.prism(base, 0.0, 0.0, 0.0, 0.03, 0.15, 16, true);
    let pole = b.part("pole");
    b.prism(pole, 0.0, 0.0, 0.03, 1.5, 0.015, 8, false);
    let shade = b.part("shade");
    b.prism(shade, 0.0, 0.0, 1.5, 1.75, 0.2, 16, true);
}

fn door(b: &mut Builder, v: usize) {
    let w = [0.9, 0.8][v];
    let frame = b.part("frame");
    b.cuboid(frame, [-w / 2.0 - 0.05, -0.06, 0.0], [-w / 2.0, 0.06, 2.1]);
    b.cuboid(frame, [w / 2.0, -0.06, 0.0], [w / 2.0 + 0.05, 0.06, 2.1]);
    b.cuboid(frame, [-w / 2.0 - 0.05, -0.06, 2.1], [w / 2.0 + 0.05, 0.06, 2.2]);
    let panel = b.part("panel");
    b.cuboid(panel, [-w / 2.0, -0.02, 0.0], [w / 2.0, 0.02, 2.1]);
    let handle = b.part("handle");
    b.cuboid(handle, [w / 2.0 - 0.17, -0.07, 1.0], [w / 2.0 - 0.05, -0.02, 1.03]);
}

fn trash_can(b: &mut Builder, _v: usize) {
    let body = b.part("body");
    b.prism(body, 0.0, 0.0, 0.0, 0.35, 0.14, 16, false);
    let lid = b.part("lid");
    b.prism(lid, 0.0, 0.0, 0.35, 0.39, 0.18, 16, true);
}

fn mug(b: &mut Builder, _v: usize) {
    let body = b.part("body");
    b.prism(body, 0.0, 0.0, 0.0, 0.1, 0.04, 12, true);
    let handle = b.part("handle");
    b.cuboid(handle, [0.045, -0.008, 0.025], [0.085, 0.008, 0.075]);
}

fn bottle(b: &mut Builder, _v: usize) {
    let body = b.part("body");
    b.prism(body, 0.0, 0.0, 0.0, 0.22, 0.035, 12, true);
    let cap = b.part("cap");
    b.prism(cap, 0.0, 0.0, 0.22, 0.25, 0.018, 12, true);
}

fn desk_lamp(b: &mut Builder, _v: usize) {
    let base = b.part("base");
    b.cuboid(base, [-0.075, -0.075, 0.0], [0.075, 0.075, 0.02]);
    let arm = b.part("arm");
    b.cuboid(arm, [-0.01, 0.0, 0.02], [0.01, 0.02, 0.38]);
    let head = b.part("head");
    b.cuboid(head, [-0.05, -0.1, 0.38], [0.05, 0.1, 0.43]);
}

fn monitor(b: &mut Builder, _v: usize) {
    let base = b.part("base");
    b.cuboid(base, [-0.1, -0.1, 0.0], [0.1, 0.1, 0.02]);
    let stand = b.part("stand");
    b.cuboid(stand, [-0.02, 0.02, 0.02], [0.02, 0.05, 0.2]);
    let screen = b.part("screen");
    b.cuboid(screen, [-0.27, -0.02, 0.12], [0.27, 0.02, 0.45]);
}

fn laptop(b: &mut Builder, _v: usize) {
    let base = b.part("base");
    b.cuboid(base, [-0.165, -0.115, 0.0], [0.165, 0.115, 0.02]);
    let screen = b.part("screen");
    b.cuboid(screen, [-0.145, 0.07, 0.02], [0.145, 0.085, 0.24]);
}

fn book(b: &mut Builder, _v: usize) {
    let cover = b.part("cover");
    b.cuboid(cover, [-0.12, -0.085, 0.0], [0.12, 0.085, 0.035]);
}

fn plant(b: &mut Builder, _v: usize) {
    let pot = b.part("pot");
    b.prism(pot, 0.0, 0.0, 0.0, 0.14, 0.08, 12, false);
    let leaves = b.part("leaves");
    b.prism(leaves, 0.0, 0.0, 0.14, 0.4, 0.13, 10, true);
}

fn bowl(b: &mut Builder, _v: usize) {
    let body = b.part("body");
    b.prism(body, 0.0, 0.0, 0.0, 0.05, 0.07, 16, false);
    let rim = b.part("rim");
    b.prism(rim, 0.0, 0.0, 0.05, 0.065, 0.1, 16, true);
}

type MakeFn = fn(&mut Builder, usize);

/// category, tier, supports objects, builder, whether the second variant is
/// the first one scaled up
const CATEGORIES: &[(&str, SizeTier, bool, MakeFn, bool)] = &[
    ("bed", SizeTier::Large, false, bed, false),
    ("bottle", SizeTier::Small, false, bottle, true),
    ("bowl", SizeTier::Small, false, bowl, true),
    ("book", SizeTier::Small, false, book, true),
    ("cabinet", SizeTier::Large, true, cabinet, false),
    ("chair", SizeTier::Medium, false, chair, true),
    ("desk", SizeTier::Large, true, desk, false),
    ("desk_lamp", SizeTier::Small, false, desk_lamp, true),
    ("door", SizeTier::Medium, false, door, false),
    ("floor_lamp", SizeTier::Medium, false, floor_lamp, true),
    ("laptop", SizeTier::Small, false, laptop, true),
    ("monitor", SizeTier::Small, false, monitor, true),
    ("mug", SizeTier::Small, false, mug, true),
    ("nightstand", SizeTier::Medium, true, nightstand, false),
    ("plant", SizeTier::Small, false, plant, true),
    ("sofa", SizeTier::Large, false, sofa, false),
    ("stool", SizeTier::Medium, false, stool, true),
    ("table", SizeTier::Large, true, table, false),
    ("trash_can", SizeTier::Medium, false, trash_can, true),
    ("wardrobe", SizeTier::Large, false, wardrobe, false),
];

const VARIANT_SCALE: f64 = 1.15;

/// Two variants of every built-in category, sorted by shape id.
pub fn catalogue() -> Vec<ShapeSpec> {
    let mut out = Vec::new();
    for &(category, size_tier, supports_objects, make, scaled) in CATEGORIES {
        for v in 0..2 {
            let mut b = Builder::default();
            make(&mut b, if scaled { 0 } else { v });
            let scale = if scaled && v == 1 { VARIANT_SCALE } else { 1.0 };
            out.push(ShapeSpec {
                shape_id: format!("{category}_{v}"),
                category: category.to_string(),
                size_tier,
                supports_objects,
                polygons: b.polygons(scale),
                parts: b.parts,
            });
        }
    }
    out.sort_by(|a, b| a.shape_id.cmp(&b.shape_id));
    out
}

pub fn library_from_specs(specs: &[ShapeSpec]) -> Result<ShapeLibrary> {
    ShapeLibrary::from_shapes(specs.iter().map(ShapeSpec::to_record).collect::<Result<_>>()?)
}

fn room(min: [f64; 2], max: [f64; 2]) -> Aabb {
    Aabb {
        min: Vec3::new(min[0], min[1], 0.0),
        max: Vec3::new(max[0], max[1], 3.0),
    }
}

fn put(category: &str, x: f64, y: f64, yaw: f64, required: bool) -> LayoutPlacement {
    LayoutPlacement {
        category: category.to_string(),
        position: Vec3::new(x, y, 0.0),
        yaw,
        required,
    }
}

/// Built-in layouts. Furniture keeps to the middle two thirds of each room.
pub fn builtin_layouts() -> Vec<Layout> {
    vec![
        Layout {
            layout_id: "bedroom".into(),
            room_extent: room([-3.3, -2.4], [3.0, 2.4]),
            placements: vec![
                put("bed", 0.0, 0.2, 0.0, true),
                put("nightstand", -1.3, 1.0, 0.0, true),
                put("nightstand", 1.3, 1.0, 0.0, true),
                put("wardrobe", -1.9, -0.9, FRAC_PI_2, true),
                put("door", 1.5, -1.2, FRAC_PI_2, false),
                put("floor_lamp", 1.6, 0.0, 0.0, false),
            ],
        },
        Layout {
            layout_id: "dining".into(),
            room_extent: room([-2.4, -1.9], [2.4, 1.9]),
            placements: vec![
                put("table", 0.0, 0.0, 0.0, true),
                put("chair", 0.0, 0.9, 0.0, true),
                put("chair", 0.0, -0.9, PI, true),
                put("chair", 1.25, 0.0, -FRAC_PI_2, true),
                put("chair", -1.25, 0.0, FRAC_PI_2, true),
            ],
        },
        Layout {
            layout_id: "living".into(),
            room_extent: room([-3.0, -1.9], [2.8, 2.6]),
            placements: vec![
                put("sofa", 0.0, 0.9, 0.0, true),
                put("table", 0.0, -0.3, 0.0, true),
                put("cabinet", -1.7, -0.2, FRAC_PI_2, true),
                put("floor_lamp", 1.5, 1.0, 0.0, false),
            ],
        },
        Layout {
            layout_id: "office".into(),
            room_extent: room([-2.2, -2.0], [2.2, 2.0]),
            placements: vec![
                put("desk", 0.0, 0.5, 0.0, true),
                put("chair", 0.0, -0.35, PI, true),
                put("cabinet", 1.1, 0.4, -FRAC_PI_2, true),
                put("trash_can", -1.0, 0.3, 0.0, false),
                put("floor_lamp", -1.1, -0.6, 0.0, false),
            ],
        },
        Layout {
            layout_id: "study".into(),
            room_extent: room([-2.0, -1.6], [2.0, 1.6]),
            placements: vec![
                put("desk", 0.0, 0.3, 0.0, true),
                put("chair", 0.0, -0.55, PI, true),
                put("nightstand", 1.05, 0.35, -FRAC_PI_2, true),
                put("floor_lamp", -1.0, 0.4, 0.0, false),
            ],
        },
    ]
}

/// Implicit descriptions for labels of the built-in library.
pub fn builtin_templates() -> BTreeMap<String, String> {
    [
        ("bed_pillow", "where to rest my head"),
        ("cabinet_handle", "open the cabinet"),
        ("chair_seat", "somewhere to sit"),
        ("desk_drawer", "pull out a drawer of the desk"),
        ("door_handle", "open the door"),
        ("floor_lamp_shade", "adjust the light"),
        ("trash_can_lid", "throw away rubbish"),
        ("wardrobe_handle", "open the wardrobe"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

/// Writes `shapes/`, `layouts/` and `templates.json` under `dir`.
pub fn write_builtin_assets(dir: &Path) -> Result<()> {
    let shapes = dir.join("shapes");
    for spec in catalogue() {
        spec.write(&shapes)?;
    }
    let layouts = dir.join("layouts");
    std::fs::create_dir_all(&layouts).map_err(|e| Error::io(&layouts, e))?;
    for l in builtin_layouts() {
        write_json(&layouts.join(format!("{}.json", l.layout_id)), &l)?;
    }
    write_json(&dir.join("templates.json"), &builtin_templates())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::load_shape_library;

    fn area(r: &Rect) -> f64 {
        (r[1] - r[0]) * (r[3] - r[2])
    }

    #[test]
    fn rect_minus_center_hole() {
        let out = rect_minus([0.0, 3.0, 0.0, 3.0], &[[1.0, 2.0, 1.0, 2.0]]);
        assert!((out.iter().map(area).sum::<f64>() - 8.0).abs() < 1e-12);
        assert_eq!(out.len(), 4);
        assert!(rect_minus([0.0, 1.0, 0.0, 1.0], &[[-1.0, 2.0, -1.0, 2.0]]).is_empty());
        assert_eq!(rect_minus([0.0, 1.0, 0.0, 1.0], &[[2.0, 3.0, 0.0, 1.0]]), vec![[0.0, 1.0, 0.0, 1.0]]);
    }

    #[test]
    fn contact_faces_are_removed() {
        let mut b = Builder::default();
        let p = b.part("a");
        b.cuboid(p, [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]);
        b.cuboid(p, [1.0, 0.0, 0.0], [2.0, 1.0, 1.0]);
        let polys = b.polygons(1.0);
        // two open-bottom cubes sharing a face: 2 * 5 - 2 faces
        assert_eq!(polys.len(), 8);
    }

    #[test]
    fn polygons_face_outward() {
        let mut b = Builder::default();
        let p = b.part("a");
        b.cuboid(p, [0.0, 0.0, 0.0], [1.0, 2.0, 3.0]);
        let mut c = Builder::default();
        let q = c.part("b");
        c.prism(q, 0.5, 1.0, 0.0, 3.0, 0.5, 7, true);
        for polys in [b.polygons(1.0), c.polygons(1.0)] {
            for (_, poly) in polys {
                let n = (poly[1] - poly[0]).cross(poly[2] - poly[0]);
                let centroid = poly.iter().fold(Vec3::ZERO, |a, &v| a + v) / poly.len() as f64;
                assert!(n.dot(centroid - Vec3::new(0.5, 1.0, 1.5)) > 0.0, "{poly:?}");
            }
        }
    }

    #[test]
    fn catalogue_is_well_formed() {
        let specs = catalogue();
        assert_eq!(specs.len(), 2 * CATEGORIES.len());
        for s in &specs {
            let rec = s.to_record().unwrap();
            let aabb = rec.mesh.aabb().unwrap();
            assert!(aabb.min.z.abs() < 1e-12, "{} does not rest on the floor", s.shape_id);
            assert!(aabb.center().x.abs() < 0.2 && aabb.center().y.abs() < 0.2, "{}", s.shape_id);
            assert_eq!(
                rec.part_labels.keys().copied().collect::<Vec<_>>(),
                rec.mesh.face_part_id.iter().copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect::<Vec<_>>()
            );
        }
        let lib = library_from_specs(&specs).unwrap();
        for l in builtin_layouts() {
            l.validate().unwrap();
            for p in &l.placements {
                assert!(!lib.by_category(&p.category).is_empty(), "{}", p.category);
            }
        }
    }

    #[test]
    fn written_assets_load_back() {
        let dir = tempfile::tempdir().unwrap();
        write_builtin_assets(dir.path()).unwrap();
        let lib = load_shape_library(&dir.path().join("shapes")).unwrap();
        assert!(lib.rejected.is_empty());
        let direct = library_from_specs(&catalogue()).unwrap();
        assert_eq!(lib.len(), direct.len());
        for (a, b) in lib.shapes.iter().zip(&direct.shapes) {
            assert_eq!(a.shape_id, b.shape_id);
            assert_eq!(a.part_labels, b.part_labels);
            assert_eq!(a.mesh.faces.len(), b.mesh.faces.len());
            assert!((a.mesh.surface_area() - b.mesh.surface_area()).abs() < 1e-6);
        }
        assert_eq!(crate::synth::load_layouts(&dir.path().join("layouts")).unwrap().len(), 5);
    }
}
