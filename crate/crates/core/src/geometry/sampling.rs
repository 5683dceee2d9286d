use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AnnotatedCloud, TriMesh, Vec3};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Shape size class; decides how densely a shape is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeTier {
    Large,
    Medium,
    Small,
}

impl SizeTier {
    pub fn sample_count(self) -> usize {
        match self {
            SizeTier::Large => 102_400,
            SizeTier::Medium => 51_200,
            SizeTier::Small => 25_600,
        }
    }
}

const DEFAULT_GRAY: [u8; 3] = [128, 128, 128];

/// Draws `n` points uniformly over the mesh surface.
///
/// Faces are picked proportionally to area, then a point is placed uniformly
/// inside the face with square-root barycentric warping. Per-face counts come
/// from one stream seeded by `seed`; the points of face `f` come from a
/// substream keyed by `(seed, f)`, so the parallel result matches a serial run
/// bit for bit. Points are emitted grouped by face, in face order.
///
/// Each point inherits its face's part and object ids and carries the face
/// normal. Colors are a neutral gray; callers recolor from a palette.
pub fn sample_mesh_surface(mesh: &TriMesh, n: usize, seed: u64) -> Result<AnnotatedCloud> {
    if n == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let areas: Vec<f64> = (0..mesh.faces.len()).map(|f| mesh.face_area(f)).collect();
    let mut cumulative = Vec::with_capacity(areas.len());
    let mut total = 0.0;
    for a in &areas {
        total += a;
        cumulative.push(total);
    }
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::NoSampleableSurface);
    }

    let mut counts = vec![0usize; areas.len()];
    let mut rng = stream_rng(seed, Stream::FaceCounts, 0);
    for _ in 0..n {
        let u = rng.random::<f64>() * total;
        let mut f = cumulative.partition_point(|&c| c <= u);
        // guard against u landing on the very end after rounding
        f = f.min(areas.len() - 1);
        while areas[f] == 0.0 {
            f = if f + 1 < areas.len() { f + 1 } else { f - 1 };
        }
        counts[f] += 1;
    }

    let per_face: Vec<Vec<Vec3>> = counts
        .par_iter()
        .enumerate()
        .map(|(f, &c)| {
            if c == 0 {
                return Vec::new();
            }
            let [a, b, cc] = mesh.triangle(f);
            let mut rng = stream_rng(seed, Stream::FaceSampling, f as u64);
            (0..c)
                .map(|_| {
                    let r1: f64 = rng.random::<f64>().sqrt();
                    let r2: f64 = rng.random();
                    a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + cc * (r1 * r2)
                })
                .collect()
        })
        .collect();

    let mut cloud = AnnotatedCloud {
        points: Vec::with_capacity(n),
        colors: Vec::with_capacity(n),
        normals: Some(Vec::with_capacity(n)),
        curvature: None,
        object_id: Vec::with_capacity(n),
        part_id: Vec::with_capacity(n),
        label_table: BTreeMap::new(),
    };
    let normals = cloud.normals.as_mut().unwrap();
    for (f, pts) in per_face.into_iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let normal = mesh.face_normal(f);
        let part = mesh.face_part_id[f];
        let obj = mesh.face_object_id[f];
        for p in pts {
            cloud.points.push(p);
            cloud.colors.push(DEFAULT_GRAY);
            normals.push(normal);
            cloud.object_id.push(obj);
            cloud.part_id.push(part);
        }
        cloud.label_table.entry(part).or_default();
    }
    Ok(cloud)
}
