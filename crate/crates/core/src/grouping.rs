//! Lifting 2D masks onto superpoints by view-weighted voting, and forming
//! 3D part instances from the foreground superpoints.

use std::collections::VecDeque;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_json;
use crate::render::{cell_distance, Camera, GridDecomposition, NOT_VISIBLE};
use crate::superpoints::SuperpointPartition;

pub const FOREGROUND_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    #[default]
    Proximity,
    Uniform,
}

impl FromStr for WeightMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "proximity" => Ok(WeightMode::Proximity),
            "uniform" => Ok(WeightMode::Uniform),
            other => Err(format!("unknown weight mode `{other}` (expected proximity or uniform)")),
        }
    }
}

/// 3 when camera and centroid share a grid cell, 2 for 8-neighbors, else 1.
pub fn view_weight(camera_cell: [usize; 2], centroid_cell: [usize; 2]) -> u8 {
    match cell_distance(camera_cell, centroid_cell) {
        0 => 3,
        1 => 2,
        _ => 1,
    }
}

pub fn assign_view_weight(camera: &Camera, centroid: crate::geometry::Vec3, grid: &GridDecomposition) -> u8 {
    view_weight(camera.grid_cell, grid.cell_of(centroid))
}

/// `weights[v][i]`: weight of view `v` for superpoint `i`.
pub fn superpoint_weights(
    cameras: &[Camera],
    partition: &SuperpointPartition,
    grid: &GridDecomposition,
    mode: WeightMode,
) -> Vec<Vec<u8>> {
    let cells: Vec<[usize; 2]> = partition.centroids.iter().map(|&c| grid.cell_of(c)).collect();
    cameras
        .iter()
        .map(|cam| match mode {
            WeightMode::Uniform => vec![1; cells.len()],
            WeightMode::Proximity => cells.iter().map(|&c| view_weight(cam.grid_cell, c)).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpointScore {
    pub superpoint: u32,
    pub score: f64,
    pub numerator: f64,
    pub denominator: f64,
}

impl SuperpointScore {
    pub fn is_foreground(&self, threshold: f64) -> bool {
        self.score > threshold
    }
}

/// Weighted fraction of a superpoint's visible points that land inside a
/// mask, over all views.
///
/// `visible[v][p]` is the pixel of point `p` in view `v` or [`NOT_VISIBLE`];
/// `inside[v]` is the union of the masks of view `v` as a pixel bitmap, empty
/// when the view has no mask. Sums run over views, then points, ascending.
pub fn score_superpoints(
    partition: &SuperpointPartition,
    visible: &[Vec<u32>],
    inside: &[Vec<bool>],
    weights: &[Vec<u8>],
) -> Result<Vec<SuperpointScore>> {
    if visible.len() != inside.len() || visible.len() != weights.len() {
        return Err(Error::LengthMismatch(visible.len(), inside.len().max(weights.len())));
    }
    let n = partition.assignment.len();
    if let Some(v) = visible.iter().find(|v| v.len() != n) {
        return Err(Error::LengthMismatch(v.len(), n));
    }
    if let Some(w) = weights.iter().find(|w| w.len() != partition.len()) {
        return Err(Error::LengthMismatch(w.len(), partition.len()));
    }
    Ok(partition
        .members
        .par_iter()
        .enumerate()
        .map(|(i, members)| {
            let (mut num, mut den) = (0.0f64, 0.0f64);
            for v in 0..visible.len() {
                let w = weights[v][i] as f64;
                let (vis, ins) = (&visible[v], &inside[v]);
                for &p in members {
                    let px = vis[p as usize];
                    if px == NOT_VISIBLE {
                        continue;
                    }
                    den += w;
                    if !ins.is_empty() && ins[px as usize] {
                        num += w;
                    }
                }
            }
            SuperpointScore {
                superpoint: i as u32,
                score: if den > 0.0 { num / den } else { 0.0 },
                numerator: num,
                denominator: den,
            }
        })
        .collect())
}

/// One predicted 3D part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartInstance3D {
    /// ascending
    pub superpoints: Vec<u32>,
    /// ascending point indices
    pub points: Vec<u32>,
    pub confidence: f64,
}

impl PartInstance3D {
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &p in &self.points {
            m[p as usize] = true;
        }
        m
    }
}

/// Connected components of the foreground superpoints (score strictly above
/// `threshold`) in the adjacency graph. Confidence is the point-weighted mean
/// score; instances come sorted by confidence, highest first.
pub fn form_instances(scores: &[SuperpointScore], partition: &SuperpointPartition, threshold: f64) -> Vec<PartInstance3D> {
    let fg: Vec<bool> = scores.iter().map(|s| s.is_foreground(threshold)).collect();
    let mut seen = vec![false; fg.len()];
    let mut out = Vec::new();
    for start in 0..fg.len() {
        if !fg[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start as u32];
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for &b in &partition.adjacency[a] {
                let b = b as usize;
                if fg[b] && !seen[b] {
                    seen[b] = true;
                    comp.push(b as u32);
                    queue.push_back(b);
                }
            }
        }
        comp.sort_unstable();
        let (mut weighted, mut count) = (0.0, 0usize);
        let mut points = Vec::new();
        for &s in &comp {
            let m = &partition.members[s as usize];
            weighted += scores[s as usize].score * m.len() as f64;
            count += m.len();
            points.extend_from_slice(m);
        }
        points.sort_unstable();
        out.push(PartInstance3D {
            superpoints: comp,
            points,
            confidence: weighted / count as f64,
        });
    }
    out.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    out
}

/// `[start, length]` runs covering ascending indices.
pub fn rle_encode(indices: &[u32]) -> Vec<[u32; 2]> {
    let mut runs: Vec<[u32; 2]> = Vec::new();
    for &i in indices {
        match runs.last_mut() {
            Some(r) if r[0] + r[1] == i => r[1] += 1,
            _ => runs.push([i, 1]),
        }
    }
    runs
}

pub fn rle_decode(runs: &[[u32; 2]]) -> Vec<u32> {
    runs.iter().flat_map(|&[s, l]| s..s + l).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedInstance {
    pub confidence: f64,
    pub superpoints: Vec<u32>,
    pub points_rle: Vec<[u32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub query: String,
    pub instances: Vec<PredictedInstance>,
}

impl Prediction {
    pub fn new(query: &str, instances: &[PartInstance3D]) -> Self {
        Prediction {
            query: query.to_string(),
            instances: instances
                .iter()
                .map(|i| PredictedInstance {
                    confidence: i.confidence,
                    superpoints: i.superpoints.clone(),
                    points_rle: rle_encode(&i.points),
                })
                .collect(),
        }
    }

    /// `(confidence, ascending points)` per instance.
    pub fn masks(&self) -> Vec<(f64, Vec<u32>)> {
        self.instances.iter().map(|i| (i.confidence, rle_decode(&i.points_rle))).collect()
    }
}

/// File-name-safe form of a query: lowercase alphanumerics joined by `_`.
pub fn query_slug(query: &str) -> String {
    let mut s = String::new();
    for c in query.trim().chars() {
        if c.is_ascii_alphanumeric() {
            s.push(c.to_ascii_lowercase());
        } else if !s.ends_with('_') {
            s.push('_');
        }
    }
    let s = s.trim_matches('_');
    if s.is_empty() {
        "query".to_string()
    } else {
        s.to_string()
    }
}

/// Writes `<dir>/<slug>.json`.
pub fn write_prediction(dir: &Path, prediction: &Prediction) -> Result<std::path::PathBuf> {
    let path = dir.join(format!("{}.json", query_slug(&prediction.query)));
    write_json(&path, prediction)?;
    Ok(path)
}
