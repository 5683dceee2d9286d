//! Region-growing superpoints: the atomic units that 2D votes are lifted
//! onto.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{local_geometry, AnnotatedCloud, Vec3, NORMAL_NEIGHBORS};
use crate::io::{read_json, write_json};
use crate::spatial::{mean_spacing, PointGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuperpointParams {
    pub angle_degrees: f64,
    /// Growing radius as a multiple of the mean point spacing.
    pub distance_factor: f64,
    /// Absolute growing radius in meters; overrides `distance_factor`.
    pub distance: Option<f64>,
    pub min_size: usize,
}

impl Default for SuperpointParams {
    fn default() -> Self {
        SuperpointParams {
            angle_degrees: 15.0,
            distance_factor: 2.5,
            distance: None,
            min_size: 20,
        }
    }
}

impl SuperpointParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.angle_degrees > 0.0 && self.angle_degrees <= 180.0) {
            return Err(Error::Config(format!("angle_degrees must be in (0, 180], got {}", self.angle_degrees)));
        }
        if !(self.distance_factor > 0.0) || self.distance.is_some_and(|d| !(d > 0.0)) {
            return Err(Error::Config("superpoint distance must be positive".into()));
        }
        Ok(())
    }

    pub fn distance_for(&self, points: &[Vec3]) -> f64 {
        self.distance.unwrap_or_else(|| self.distance_factor * mean_spacing(points))
    }

    pub fn compute(&self, cloud: &AnnotatedCloud) -> Result<SuperpointPartition> {
        self.validate()?;
        compute_superpoints(
            cloud,
            self.angle_degrees.to_radians(),
            self.distance_for(&cloud.points),
            self.min_size,
        )
    }
}

/// Disjoint, exhaustive grouping of the points of a cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpointPartition {
    /// superpoint of each point
    pub assignment: Vec<u32>,
    /// point indices of each superpoint, ascending
    pub members: Vec<Vec<u32>>,
    pub centroids: Vec<Vec3>,
    /// Sorted neighbor lists: superpoints with two points closer than the
    /// adjacency radius.
    pub adjacency: Vec<Vec<u32>>,
}

impl SuperpointPartition {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Builds the partition for a given assignment; labels must cover
    /// `0..S` without gaps.
    pub fn from_assignment(points: &[Vec3], assignment: Vec<u32>, adjacency_radius: f64) -> Result<Self> {
        if points.len() != assignment.len() {
            return Err(Error::LengthMismatch(points.len(), assignment.len()));
        }
        let s = assignment.iter().map(|&a| a as usize + 1).max().unwrap_or(0);
        let mut members = vec![Vec::new(); s];
        for (i, &a) in assignment.iter().enumerate() {
            members[a as usize].push(i as u32);
        }
        if let Some(k) = members.iter().position(Vec::is_empty) {
            return Err(Error::InvalidInput(format!("superpoint {k} has no points")));
        }
        let centroids = members
            .iter()
            .map(|m| m.iter().fold(Vec3::ZERO, |acc, &i| acc + points[i as usize]) / m.len() as f64)
            .collect();
        let adjacency = label_adjacency(points, &assignment, s, adjacency_radius);
        Ok(SuperpointPartition {
            assignment,
            members,
            centroids,
            adjacency,
        })
    }

    /// Every point on its own.
    pub fn singletons(points: &[Vec3], adjacency_radius: f64) -> Self {
        Self::from_assignment(points, (0..points.len() as u32).collect(), adjacency_radius)
            .expect("singleton labels are dense")
    }

    pub fn edges(&self) -> Vec<[u32; 2]> {
        let mut out = Vec::new();
        for (a, ns) in self.adjacency.iter().enumerate() {
            out.extend(ns.iter().filter(|&&b| b as usize > a).map(|&b| [a as u32, b]));
        }
        out
    }
}

fn label_adjacency(points: &[Vec3], labels: &[u32], count: usize, radius: f64) -> Vec<Vec<u32>> {
    let mut sets = vec![BTreeSet::new(); count];
    if radius > 0.0 && !points.is_empty() {
        let grid = PointGrid::new(points, radius);
        for (i, &p) in points.iter().enumerate() {
            let a = labels[i];
            grid.for_each_within(p, radius, |j, _| {
                let b = labels[j as usize];
                if b != a {
                    sets[a as usize].insert(b);
                }
            });
        }
    }
    sets.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// Region growing over the cloud.
///
/// Seeds are taken in ascending curvature (then index) order. A region grows
/// breadth-first through neighbors strictly within `distance_threshold`
/// whose normal deviates less than `angle_threshold` from the running mean
/// normal of the region. Regions smaller than `min_size` then merge, smallest
/// first, into the neighbor with the most similar mean normal. Superpoints
/// are numbered by their first point.
pub fn compute_superpoints(
    cloud: &AnnotatedCloud,
    angle_threshold: f64,
    distance_threshold: f64,
    min_size: usize,
) -> Result<SuperpointPartition> {
    let normals = cloud.normals.as_ref().ok_or(Error::MissingNormals)?;
    if !(angle_threshold > 0.0) || !(distance_threshold > 0.0) {
        return Err(Error::InvalidInput(format!(
            "superpoint thresholds must be positive, got angle {angle_threshold}, distance {distance_threshold}"
        )));
    }
    let points = &cloud.points;
    let n = points.len();
    if n == 0 {
        return Err(Error::Empty("point cloud"));
    }
    let curvature = match &cloud.curvature {
        Some(c) => c.clone(),
        None if n >= NORMAL_NEIGHBORS => local_geometry(points, &cloud.object_id, NORMAL_NEIGHBORS)?.curvature,
        None => vec![0.0; n],
    };

    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| curvature[a as usize].total_cmp(&curvature[b as usize]).then(a.cmp(&b)));

    let grid = PointGrid::new(points, distance_threshold);
    let cos_t = angle_threshold.cos();
    let accept = |mean: Vec3, nj: Vec3| angle_threshold >= std::f64::consts::PI || mean.dot(nj) > cos_t;
    const UNSET: u32 = u32::MAX;
    let mut label = vec![UNSET; n];
    let mut regions: Vec<(usize, Vec3)> = Vec::new();
    let mut queue = VecDeque::new();
    for &seed in &order {
        if label[seed as usize] != UNSET {
            continue;
        }
        let r = regions.len() as u32;
        label[seed as usize] = r;
        let mut sum = normals[seed as usize];
        let mut mean = sum.try_normalize().unwrap_or(Vec3::UP);
        let mut size = 1;
        queue.push_back(seed);
        while let Some(i) = queue.pop_front() {
            for j in grid.within(points[i as usize], distance_threshold) {
                if label[j as usize] != UNSET || !accept(mean, normals[j as usize]) {
                    continue;
                }
                label[j as usize] = r;
                size += 1;
                sum += normals[j as usize];
                if let Some(m) = sum.try_normalize() {
                    mean = m;
                }
                queue.push_back(j);
            }
        }
        regions.push((size, sum));
    }

    let mut adjacency = label_adjacency(points, &label, regions.len(), distance_threshold);
    link_isolated(&grid, points, &label, &regions, &mut adjacency, min_size);
    let root = merge_small(&regions, &adjacency, min_size);

    let mut renumber: BTreeMap<u32, u32> = BTreeMap::new();
    let assignment: Vec<u32> = label
        .iter()
        .map(|&l| {
            let next = renumber.len() as u32;
            *renumber.entry(root[l as usize]).or_insert(next)
        })
        .collect();
    SuperpointPartition::from_assignment(points, assignment, distance_threshold)
}

/// Gives every small region without neighbors the region of its nearest
/// outside point as its only neighbor, so that it can still merge.
fn link_isolated(
    grid: &PointGrid,
    points: &[Vec3],
    label: &[u32],
    regions: &[(usize, Vec3)],
    adjacency: &mut [Vec<u32>],
    min_size: usize,
) {
    let isolated: BTreeSet<u32> = (0..regions.len())
        .filter(|&r| regions[r].0 < min_size && adjacency[r].is_empty())
        .map(|r| r as u32)
        .collect();
    if isolated.is_empty() || regions.len() < 2 {
        return;
    }
    let mut nearest: BTreeMap<u32, (f64, u32, u32)> = BTreeMap::new();
    for (i, &p) in points.iter().enumerate() {
        let r = label[i];
        if !isolated.contains(&r) {
            continue;
        }
        let mut k = regions[r as usize].0 + 1;
        let hit = loop {
            let found = grid.knn(p, k.min(points.len()));
            if let Some(&(j, d)) = found.iter().find(|(j, _)| label[*j as usize] != r) {
                break (d, label[j as usize], j);
            }
            if k >= points.len() {
                unreachable!("another region exists");
            }
            k *= 2;
        };
        let e = nearest.entry(r).or_insert(hit);
        if (hit.0, hit.2) < (e.0, e.2) {
            *e = hit;
        }
    }
    for (r, (_, t, _)) in nearest {
        adjacency[r as usize].push(t);
        if let Err(at) = adjacency[t as usize].binary_search(&r) {
            adjacency[t as usize].insert(at, r);
        }
    }
}

/// Final region of every grown region after merging the small ones.
fn merge_small(regions: &[(usize, Vec3)], adjacency: &[Vec<u32>], min_size: usize) -> Vec<u32> {
    let m = regions.len();
    let mut size: Vec<usize> = regions.iter().map(|r| r.0).collect();
    let mut normal: Vec<Vec3> = regions.iter().map(|r| r.1).collect();
    let mut neighbors: Vec<BTreeSet<u32>> = adjacency.iter().map(|a| a.iter().copied().collect()).collect();
    let mut parent: Vec<u32> = (0..m as u32).collect();
    let mut small: BTreeSet<(usize, u32)> = (0..m).filter(|&r| size[r] < min_size).map(|r| (size[r], r as u32)).collect();

    while let Some((_, r)) = small.pop_first() {
        let ru = r as usize;
        let mean = normal[ru].try_normalize().unwrap_or(Vec3::ZERO);
        let Some(&t) = neighbors[ru].iter().max_by(|&&a, &&b| {
            let da = mean.dot(normal[a as usize].try_normalize().unwrap_or(Vec3::ZERO));
            let db = mean.dot(normal[b as usize].try_normalize().unwrap_or(Vec3::ZERO));
            da.total_cmp(&db).then(b.cmp(&a))
        }) else {
            continue;
        };
        let tu = t as usize;
        small.remove(&(size[tu], t));
        parent[ru] = t;
        size[tu] += size[ru];
        normal[tu] = normal[tu] + normal[ru];
        let moved = std::mem::take(&mut neighbors[ru]);
        for &k in &moved {
            let ku = k as usize;
            neighbors[ku].remove(&r);
            if k != t {
                neighbors[ku].insert(t);
                neighbors[tu].insert(k);
            }
        }
        neighbors[tu].remove(&t);
        if size[tu] < min_size {
            small.insert((size[tu], t));
        }
    }

    (0..m as u32)
        .map(|mut r| {
            while parent[r as usize] != r {
                r = parent[r as usize];
            }
            r
        })
        .collect()
}

/// Best IoU reachable per ground-truth part by a union of superpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurityReport {
    pub per_part: BTreeMap<u32, f64>,
    pub mean: f64,
}

/// For each nonzero part id, the best IoU of any union of superpoints with
/// the part. The optimum takes superpoints in decreasing order of
/// inside/outside point ratio and keeps the best prefix.
pub fn superpoint_purity(partition: &SuperpointPartition, part_id: &[u32]) -> Result<PurityReport> {
    if part_id.len() != partition.assignment.len() {
        return Err(Error::LengthMismatch(partition.assignment.len(), part_id.len()));
    }
    let mut part_size: BTreeMap<u32, usize> = BTreeMap::new();
    let mut overlap: BTreeMap<u32, BTreeMap<u32, usize>> = BTreeMap::new();
    for (i, &p) in part_id.iter().enumerate() {
        if p == 0 {
            continue;
        }
        *part_size.entry(p).or_default() += 1;
        *overlap.entry(p).or_default().entry(partition.assignment[i]).or_default() += 1;
    }
    let mut per_part = BTreeMap::new();
    for (&p, &g) in &part_size {
        let mut cands: Vec<(usize, usize)> = overlap[&p]
            .iter()
            .map(|(&s, &o)| (o, partition.members[s as usize].len() - o))
            .collect();
        // o1 / e1 > o2 / e2  <=>  o1 * e2 > o2 * e1, with e = 0 first
        cands.sort_by(|a, b| (b.0 * a.1).cmp(&(a.0 * b.1)).then(b.0.cmp(&a.0)));
        let (mut inter, mut extra, mut best) = (0usize, 0usize, 0.0f64);
        for (o, e) in cands {
            inter += o;
            extra += e;
            best = best.max(inter as f64 / (g + extra) as f64);
        }
        per_part.insert(p, best);
    }
    let mean = if per_part.is_empty() {
        0.0
    } else {
        per_part.values().sum::<f64>() / per_part.len() as f64
    };
    Ok(PurityReport { per_part, mean })
}

#[derive(Serialize, Deserialize)]
struct AdjacencyFile {
    count: usize,
    edges: Vec<[u32; 2]>,
}

/// Writes `superpoints.bin` (N and S as u64, then N u32 labels, all little
/// endian) and `superpoints.adj.json` into `dir`.
pub fn write_partition(dir: &Path, partition: &SuperpointPartition) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut bytes = Vec::with_capacity(16 + 4 * partition.assignment.len());
    bytes.extend_from_slice(&(partition.assignment.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&(partition.len() as u64).to_le_bytes());
    for a in &partition.assignment {
        bytes.extend_from_slice(&a.to_le_bytes());
    }
    let path = dir.join("superpoints.bin");
    std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    write_json(
        &dir.join("superpoints.adj.json"),
        &AdjacencyFile {
            count: partition.len(),
            edges: partition.edges(),
        },
    )
}

/// Reads a partition written by [`write_partition`] for the given points.
pub fn read_partition(dir: &Path, points: &[Vec3]) -> Result<SuperpointPartition> {
    let path = dir.join("superpoints.bin");
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let bad = |message: String| Error::Format {
        format: "superpoints",
        path: path.clone(),
        message,
    };
    if bytes.len() < 16 {
        return Err(bad("truncated header".into()));
    }
    let n = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
    let s = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    if bytes.len() != 16 + 4 * n || n != points.len() {
        return Err(bad(format!("expected {} labels, header says {n}", points.len())));
    }
    let assignment: Vec<u32> = bytes[16..].chunks_exact(4).map(|b| u32::from_le_bytes(b.try_into().unwrap())).collect();
    if assignment.iter().any(|&a| a as usize >= s) {
        return Err(bad(format!("label out of range for {s} superpoints")));
    }
    let adj: AdjacencyFile = read_json(&dir.join("superpoints.adj.json"))?;
    if adj.count != s {
        return Err(bad(format!("adjacency lists {} superpoints, labels {s}", adj.count)));
    }
    let mut members = vec![Vec::new(); s];
    for (i, &a) in assignment.iter().enumerate() {
        members[a as usize].push(i as u32);
    }
    if members.iter().any(Vec::is_empty) {
        return Err(bad("empty superpoint".into()));
    }
    let centroids = members
        .iter()
        .map(|m| m.iter().fold(Vec3::ZERO, |acc, &i| acc + points[i as usize]) / m.len() as f64)
        .collect();
    let mut adjacency = vec![Vec::new(); s];
    for [a, b] in adj.edges {
        if a as usize >= s || b as usize >= s || a == b {
            return Err(bad(format!("bad adjacency edge [{a}, {b}]")));
        }
        adjacency[a as usize].push(b);
        adjacency[b as usize].push(a);
    }
    for l in &mut adjacency {
        l.sort_unstable();
        l.dedup();
    }
    Ok(SuperpointPartition {
        assignment,
        members,
        centroids,
        adjacency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Jittered lattice on the unit square in the plane spanned by `u`, `v`
    /// through `origin`, labelled `part`.
    fn plane(origin: Vec3, u: Vec3, v: Vec3, step: f64, part: u32, seed: u64, cloud: &mut AnnotatedCloud) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = u.cross(v).normalize();
        let k = (1.0 / step) as usize;
        let normals = cloud.normals.get_or_insert_with(Vec::new);
        for a in 0..k {
            for b in 0..k {
                let s = (a as f64 + rng.random_range(0.2..0.8)) * step;
                let t = (b as f64 + rng.random_range(0.2..0.8)) * step;
                cloud.points.push(origin + u * s + v * t);
                normals.push(normal);
                cloud.colors.push([0, 0, 0]);
                cloud.object_id.push(1);
                cloud.part_id.push(part);
            }
        }
    }

    fn two_planes(step: f64) -> AnnotatedCloud {
        let mut c = AnnotatedCloud::default();
        let (x, y, z) = (Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::UP);
        plane(Vec3::ZERO, x, y, step, 1, 1, &mut c);
        plane(Vec3::ZERO, y, z, step, 2, 2, &mut c);
        c
    }

    fn check_partition(p: &SuperpointPartition, n: usize) {
        assert_eq!(p.assignment.len(), n);
        assert_eq!(p.members.iter().map(Vec::len).sum::<usize>(), n);
        let mut seen = vec![false; n];
        for (s, m) in p.members.iter().enumerate() {
            assert!(!m.is_empty());
            for &i in m {
                assert!(!seen[i as usize]);
                seen[i as usize] = true;
                assert_eq!(p.assignment[i as usize], s as u32);
            }
        }
        for (a, ns) in p.adjacency.iter().enumerate() {
            for &b in ns {
                assert_ne!(a as u32, b);
                assert!(p.adjacency[b as usize].contains(&(a as u32)));
            }
        }
    }

    #[test]
    fn single_plane_is_one_superpoint() {
        let mut c = AnnotatedCloud::default();
        plane(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), 0.02, 1, 3, &mut c);
        let p = SuperpointParams::default().compute(&c).unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn perpendicular_planes_split_cleanly() {
        let c = two_planes(0.02);
        let p = SuperpointParams::default().compute(&c).unwrap();
        check_partition(&p, c.len());
        assert_eq!(p.len(), 2);
        for m in &p.members {
            let ones = m.iter().filter(|&&i| c.part_id[i as usize] == 1).count();
            let purity = ones.max(m.len() - ones) as f64 / m.len() as f64;
            assert!(purity >= 0.99, "purity {purity}");
        }
        let report = superpoint_purity(&p, &c.part_id).unwrap();
        assert!(report.mean >= 0.99);
        assert_eq!(p.adjacency, vec![vec![1], vec![0]]);
    }

    #[test]
    fn limiting_thresholds_give_one_superpoint() {
        let c = two_planes(0.05);
        let diag = crate::geometry::compute_aabb(&c.points).unwrap().diagonal();
        let p = compute_superpoints(&c, std::f64::consts::PI, diag, 20).unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn stray_small_cluster_joins_nearest_region() {
        let mut c = AnnotatedCloud::default();
        plane(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), 0.02, 1, 3, &mut c);
        let n = c.len();
        let normals = c.normals.as_mut().unwrap();
        for k in 0..3 {
            c.points.push(Vec3::new(1.3 + 0.01 * k as f64, 0.5, 0.0));
            normals.push(Vec3::UP);
            c.colors.push([0, 0, 0]);
            c.object_id.push(1);
            c.part_id.push(1);
        }
        let p = compute_superpoints(&c, 15f64.to_radians(), 0.05, 20).unwrap();
        check_partition(&p, c.len());
        assert_eq!(p.len(), 1);
        assert_eq!(p.assignment[n], p.assignment[0]);
    }

    #[test]
    fn missing_normals_is_an_error() {
        let mut c = two_planes(0.1);
        c.normals = None;
        assert!(matches!(SuperpointParams::default().compute(&c), Err(Error::MissingNormals)));
    }

    #[test]
    fn purity_closed_forms() {
        let c = two_planes(0.05);
        let single = SuperpointPartition::singletons(&c.points, 0.01);
        let r = superpoint_purity(&single, &c.part_id).unwrap();
        assert!(r.per_part.values().all(|&v| v == 1.0));
        let one = SuperpointPartition::from_assignment(&c.points, vec![0; c.len()], 0.01).unwrap();
        let r = superpoint_purity(&one, &c.part_id).unwrap();
        let n1 = c.part_id.iter().filter(|&&p| p == 1).count();
        assert_eq!(r.per_part[&1], n1 as f64 / c.len() as f64);
    }

    #[test]
    fn purity_matches_exhaustive_union_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = rng.random_range(5..40);
            let s = rng.random_range(1..7u32);
            let mut assignment: Vec<u32> = (0..n).map(|_| rng.random_range(0..s)).collect();
            assignment[..s as usize].copy_from_slice(&(0..s).collect::<Vec<_>>());
            let parts: Vec<u32> = (0..n).map(|_| rng.random_range(0..3)).collect();
            let pts = vec![Vec3::ZERO; n];
            let p = SuperpointPartition::from_assignment(&pts, assignment.clone(), 0.0).unwrap();
            let r = superpoint_purity(&p, &parts).unwrap();
            for (&part, &got) in &r.per_part {
                let mut best = 0.0f64;
                for mask in 1u32..(1 << s) {
                    let inside = |i: usize| mask >> assignment[i] & 1 == 1;
                    let inter = (0..n).filter(|&i| inside(i) && parts[i] == part).count();
                    let union = (0..n).filter(|&i| inside(i) || parts[i] == part).count();
                    best = best.max(inter as f64 / union as f64);
                }
                assert!((best - got).abs() < 1e-12, "{best} vs {got}");
            }
        }
    }

    #[test]
    fn partition_files_round_trip() {
        let c = two_planes(0.05);
        let p = SuperpointParams::default().compute(&c).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_partition(dir.path(), &p).unwrap();
        assert_eq!(read_partition(dir.path(), &c.points).unwrap(), p);
        assert!(read_partition(dir.path(), &c.points[1..]).is_err());
    }

    /// A few boxes' worth of faces with random sizes and positions.
    fn box_cloud(seed: u64) -> AnnotatedCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = AnnotatedCloud::default();
        let (x, y, z) = (Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::UP);
        for k in 0..rng.random_range(1..4) {
            let o = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0);
            let part = k * 3 + 1;
            plane(o, x, y, 0.05, part, seed + k as u64, &mut c);
            plane(o, y, z, 0.05, part + 1, seed + 10 + k as u64, &mut c);
            plane(o + y, z, x, 0.05, part + 2, seed + 20 + k as u64, &mut c);
        }
        c
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn partition_is_exhaustive_disjoint_and_deterministic(seed in 0u64..1000, angle in 5.0f64..60.0) {
            let c = box_cloud(seed);
            let params = SuperpointParams { angle_degrees: angle, ..Default::default() };
            let a = params.compute(&c).unwrap();
            check_partition(&a, c.len());
            prop_assert_eq!(a, params.compute(&c).unwrap());
        }

        #[test]
        fn smaller_angle_never_reduces_count(seed in 0u64..1000, hi in 10.0f64..90.0, frac in 0.1f64..1.0) {
            let c = box_cloud(seed);
            let count = |angle: f64| SuperpointParams { angle_degrees: angle, ..Default::default() }.compute(&c).unwrap().len();
            prop_assert!(count(hi * frac) >= count(hi));
        }
    }
}
