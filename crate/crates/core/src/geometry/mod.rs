//! Mesh and point-cloud types plus the operations the rest of the pipeline
//! builds on: surface sampling, normal estimation, placement transforms and
//! bounding volumes.
//!
//! The vertical axis is +z throughout.

mod normals;
mod placement;
mod sampling;

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use normals::{estimate_normals, local_geometry, LocalGeometry, NORMAL_NEIGHBORS};
pub use placement::{apply_placement, apply_placement_to_mesh, apply_placement_to_cloud, JitterField, PlacementTransform};
pub use sampling::{sample_mesh_surface, SizeTier};

/// A point or direction in scene space, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const UP: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn splat(v: f64) -> Self {
        Vec3::new(v, v, v)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction, or `None` for (near) zero vectors.
    pub fn try_normalize(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 1e-300 && n.is_finite()).then(|| self / n)
    }

    pub fn normalize(self) -> Vec3 {
        self.try_normalize().unwrap_or(Vec3::ZERO)
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn distance_squared(self, o: Vec3) -> f64 {
        (self - o).norm_squared()
    }

    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn mul_elem(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Angle between two directions in radians, in `[0, π]`.
    pub fn angle_to(self, o: Vec3) -> f64 {
        let denom = self.norm() * o.norm();
        if denom == 0.0 {
            return 0.0;
        }
        (self.dot(o) / denom).clamp(-1.0, 1.0).acos()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self> {
        if !(min.x <= max.x && min.y <= max.y && min.z <= max.z) || !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidInput(format!("bad AABB bounds {min:?}..{max:?}")));
        }
        Ok(Aabb { min, max })
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: self.min.min(o.min),
            max: self.max.max(o.max),
        }
    }

    /// Volume of the intersection; zero when the boxes only touch.
    pub fn intersection_volume(&self, o: &Aabb) -> f64 {
        let lo = self.min.max(o.min);
        let hi = self.max.min(o.max);
        let d = hi - lo;
        if d.x <= 0.0 || d.y <= 0.0 || d.z <= 0.0 {
            0.0
        } else {
            d.x * d.y * d.z
        }
    }

    pub fn contains_xy(&self, p: Vec3) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// Tight bounding box of a point set.
pub fn compute_aabb(points: &[Vec3]) -> Result<Aabb> {
    let (first, rest) = points.split_first().ok_or(Error::Empty("bounding box of zero points"))?;
    let (min, max) = rest
        .iter()
        .fold((*first, *first), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    Ok(Aabb { min, max })
}

/// Triangle mesh with per-face part and object annotations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    pub face_part_id: Vec<u32>,
    pub face_object_id: Vec<u32>,
}

impl TriMesh {
    /// Builds a mesh, checks index bounds and drops zero-area faces.
    pub fn new(
        vertices: Vec<Vec3>,
        faces: Vec<[u32; 3]>,
        face_part_id: Vec<u32>,
        face_object_id: Vec<u32>,
    ) -> Result<Self> {
        let mut mesh = TriMesh {
            vertices,
            faces,
            face_part_id,
            face_object_id,
        };
        mesh.validate()?;
        mesh.remove_degenerate_faces();
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<()> {
        let nf = self.faces.len();
        if self.face_part_id.len() != nf || self.face_object_id.len() != nf {
            return Err(Error::InvalidMesh(format!(
                "{nf} faces but {} part ids and {} object ids",
                self.face_part_id.len(),
                self.face_object_id.len()
            )));
        }
        let nv = self.vertices.len();
        if let Some((fi, f)) = self
            .faces
            .iter()
            .enumerate()
            .find(|(_, f)| f.iter().any(|&i| i as usize >= nv))
        {
            return Err(Error::InvalidMesh(format!(
                "face {fi} references vertex {:?} but mesh has {nv} vertices",
                f
            )));
        }
        if let Some(v) = self.vertices.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh(format!("vertex {v} is not finite")));
        }
        Ok(())
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Twice the face area times the unit normal.
    fn face_cross(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(c - a)
    }

    pub fn face_area(&self, face: usize) -> f64 {
        0.5 * self.face_cross(face).norm()
    }

    pub fn face_normal(&self, face: usize) -> Vec3 {
        self.face_cross(face).normalize()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Removes faces whose area is zero (collapsed or collinear vertices).
    /// Returns the number of removed faces.
    pub fn remove_degenerate_faces(&mut self) -> usize {
        let keep: Vec<bool> = (0..self.faces.len()).map(|f| self.face_area(f) > 0.0).collect();
        let before = self.faces.len();
        let mut k = keep.iter();
        self.faces.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        self.face_part_id.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        self.face_object_id.retain(|_| *k.next().unwrap());
        before - self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn aabb(&self) -> Result<Aabb> {
        compute_aabb(&self.vertices)
    }

    /// Appends another mesh, re-indexing its faces.
    pub fn append(&mut self, other: &TriMesh) {
        let offset = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.faces
            .extend(other.faces.iter().map(|f| [f[0] + offset, f[1] + offset, f[2] + offset]));
        self.face_part_id.extend_from_slice(&other.face_part_id);
        self.face_object_id.extend_from_slice(&other.face_object_id);
    }

    /// Splits every triangle into four by edge midpoints until no edge is
    /// longer than `max_edge`. The surface is unchanged; only tessellation gets
    /// finer, so smooth displacement fields applied per vertex stay close to
    /// the same field applied to points sampled on the original faces.
    pub fn refine(&self, max_edge: f64) -> TriMesh {
        assert!(max_edge > 0.0);
        let mut out = TriMesh {
            vertices: self.vertices.clone(),
            ..TriMesh::default()
        };
        let mut stack: Vec<([u32; 3], u32, u32)> = Vec::new();
        let mut midpoints = std::collections::HashMap::new();
        for f in 0..self.faces.len() {
            stack.push((self.faces[f], self.face_part_id[f], self.face_object_id[f]));
            while let Some((tri, part, obj)) = stack.pop() {
                let p = tri.map(|i| out.vertices[i as usize]);
                let longest = (0..3)
                    .map(|e| p[e].distance(p[(e + 1) % 3]))
                    .fold(0.0, f64::max);
                if longest <= max_edge {
                    out.faces.push(tri);
                    out.face_part_id.push(part);
                    out.face_object_id.push(obj);
                    continue;
                }
                let mut mid = |a: u32, b: u32, verts: &mut Vec<Vec3>| -> u32 {
                    let key = (a.min(b), a.max(b));
                    *midpoints.entry(key).or_insert_with(|| {
                        verts.push((verts[a as usize] + verts[b as usize]) * 0.5);
                        (verts.len() - 1) as u32
                    })
                };
                let [a, b, c] = tri;
                let ab = mid(a, b, &mut out.vertices);
                let bc = mid(b, c, &mut out.vertices);
                let ca = mid(c, a, &mut out.vertices);
                // pushed in reverse so faces come out in a stable depth-first order
                stack.push(([ab, bc, ca], part, obj));
                stack.push(([ca, bc, c], part, obj));
                stack.push(([ab, b, bc], part, obj));
                stack.push(([a, ab, ca], part, obj));
            }
        }
        out
    }
}

/// Points with color, normals and instance annotations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotatedCloud {
    pub points: Vec<Vec3>,
    pub colors: Vec<[u8; 3]>,
    /// Unit normals; `None` until sampled from a mesh or estimated.
    pub normals: Option<Vec<Vec3>>,
    /// Surface-variation proxy from normal estimation (least eigenvalue over
    /// eigenvalue sum); never persisted.
    pub curvature: Option<Vec<f64>>,
    pub object_id: Vec<u32>,
    pub part_id: Vec<u32>,
    /// part id → object_part label
    pub label_table: BTreeMap<u32, String>,
}

impl AnnotatedCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        let check = |what: &str, len: usize| {
            if len != n {
                Err(Error::InvalidCloud(format!("{n} points but {len} {what}")))
            } else {
                Ok(())
            }
        };
        check("colors", self.colors.len())?;
        check("object ids", self.object_id.len())?;
        check("part ids", self.part_id.len())?;
        if let Some(normals) = &self.normals {
            check("normals", normals.len())?;
            if let Some(i) = normals.iter().position(|v| (v.norm() - 1.0).abs() > 1e-6) {
                return Err(Error::InvalidCloud(format!("normal {i} is not unit length")));
            }
        }
        if let Some(c) = &self.curvature {
            check("curvature values", c.len())?;
        }
        if let Some(p) = self.part_id.iter().find(|p| !self.label_table.contains_key(p)) {
            return Err(Error::InvalidCloud(format!("part id {p} has no label")));
        }
        Ok(())
    }

    pub fn aabb(&self) -> Result<Aabb> {
        compute_aabb(&self.points)
    }

    /// Appends another cloud. Normals survive only if both sides carry them.
    pub fn append(&mut self, other: &AnnotatedCloud) {
        let had_points = !self.points.is_empty();
        self.points.extend_from_slice(&other.points);
        self.colors.extend_from_slice(&other.colors);
        self.normals = match (self.normals.take(), &other.normals) {
            (Some(mut a), Some(b)) => {
                a.extend_from_slice(b);
                Some(a)
            }
            (None, Some(b)) if !had_points => Some(b.clone()),
            _ => None,
        };
        self.curvature = None;
        self.object_id.extend_from_slice(&other.object_id);
        self.part_id.extend_from_slice(&other.part_id);
        self.label_table
            .extend(other.label_table.iter().map(|(k, v)| (*k, v.clone())));
    }

    /// Boolean point mask of all points carrying one of `parts`.
    pub fn part_mask(&self, part: u32) -> Vec<bool> {
        self.part_id.iter().map(|&p| p == part).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aabb_of_two_points() {
        let b = compute_aabb(&[Vec3::ZERO, Vec3::new(1.0, 2.0, 3.0)]).unwrap();
        assert_eq!(b.min, Vec3::ZERO);
        assert_eq!(b.max, Vec3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn aabb_of_single_point() {
        let p = Vec3::new(-1.5, 0.25, 7.0);
        let b = compute_aabb(&[p]).unwrap();
        assert_eq!(b.min, p);
        assert_eq!(b.max, p);
    }

    #[test]
    fn aabb_of_nothing_is_an_error() {
        assert!(matches!(compute_aabb(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn aabb_translates_with_points() {
        let cube: Vec<Vec3> = (0..8)
            .map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
            .collect();
        let shift = Vec3::new(1.0, 0.0, 0.0);
        let a = compute_aabb(&cube).unwrap();
        let moved: Vec<Vec3> = cube.iter().map(|&p| p + shift).collect();
        let b = compute_aabb(&moved).unwrap();
        assert_eq!(b.min, a.min + shift);
        assert_eq!(b.max, a.max + shift);
    }

    #[test]
    fn degenerate_faces_are_dropped_on_load() {
        let v = vec![
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        // second face is collinear
        let m = TriMesh::new(v, vec![[0, 1, 2], [0, 1, 3]], vec![1, 2], vec![1, 1]).unwrap();
        assert_eq!(m.faces.len(), 1);
        assert_eq!(m.face_part_id, vec![1]);
    }

    #[test]
    fn out_of_range_face_index_is_rejected() {
        let v = vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        assert!(TriMesh::new(v, vec![[0, 1, 3]], vec![1], vec![1]).is_err());
    }

    #[test]
    fn refine_keeps_area_and_labels() {
        let v = vec![Vec3::ZERO, Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0)];
        let m = TriMesh::new(v, vec![[0, 1, 2]], vec![5], vec![9]).unwrap();
        let r = m.refine(0.5);
        assert!((r.surface_area() - m.surface_area()).abs() < 1e-12);
        assert!(r.face_part_id.iter().all(|&p| p == 5));
        assert!(r.face_object_id.iter().all(|&o| o == 9));
        for f in 0..r.faces.len() {
            let t = r.triangle(f);
            for e in 0..3 {
                assert!(t[e].distance(t[(e + 1) % 3]) <= 0.5 + 1e-12);
            }
        }
    }
}
