//! Uniform-grid spatial hash for exact k-nearest-neighbor and radius queries.

use std::collections::HashMap;

use crate::geometry::{compute_aabb, Vec3};

type CellKey = [i64; 3];

/// Points bucketed into cubic cells of a fixed size.
pub struct PointGrid<'a> {
    points: &'a [Vec3],
    cell: f64,
    inv_cell: f64,
    /// point indices sorted by cell
    order: Vec<u32>,
    cells: HashMap<CellKey, (u32, u32)>,
    key_min: CellKey,
    key_max: CellKey,
}

impl<'a> PointGrid<'a> {
    pub fn new(points: &'a [Vec3], cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "grid cell size must be positive, got {cell}");
        let inv_cell = 1.0 / cell;
        let key_of = |p: Vec3| -> CellKey {
            [
                (p.x * inv_cell).floor() as i64,
                (p.y * inv_cell).floor() as i64,
                (p.z * inv_cell).floor() as i64,
            ]
        };
        let mut keyed: Vec<(CellKey, u32)> = points
            .iter()
            .enumerate()
            .map(|(i, &p)| (key_of(p), i as u32))
            .collect();
        keyed.sort_unstable();
        let mut cells = HashMap::new();
        let mut key_min = [i64::MAX; 3];
        let mut key_max = [i64::MIN; 3];
        let mut start = 0;
        while start < keyed.len() {
            let key = keyed[start].0;
            let mut end = start + 1;
            while end < keyed.len() && keyed[end].0 == key {
                end += 1;
            }
            cells.insert(key, (start as u32, (end - start) as u32));
            for a in 0..3 {
                key_min[a] = key_min[a].min(key[a]);
                key_max[a] = key_max[a].max(key[a]);
            }
            start = end;
        }
        PointGrid {
            points,
            cell,
            inv_cell,
            order: keyed.into_iter().map(|(_, i)| i).collect(),
            cells,
            key_min,
            key_max,
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    fn key(&self, p: Vec3) -> CellKey {
        [
            (p.x * self.inv_cell).floor() as i64,
            (p.y * self.inv_cell).floor() as i64,
            (p.z * self.inv_cell).floor() as i64,
        ]
    }

    fn bucket(&self, key: &CellKey) -> &[u32] {
        match self.cells.get(key) {
            Some(&(s, n)) => &self.order[s as usize..(s + n) as usize],
            None => &[],
        }
    }

    /// Largest shell index that can still contain points for a query in `k`.
    fn max_ring(&self, k: CellKey) -> i64 {
        (0..3)
            .map(|a| (k[a] - self.key_min[a]).abs().max((self.key_max[a] - k[a]).abs()))
            .max()
            .unwrap_or(0)
    }

    /// The `k` nearest points to `q` as `(index, squared distance)`, closest
    /// first; ties break on the lower index. Includes `q` itself if it is one
    /// of the indexed points.
    pub fn knn(&self, q: Vec3, k: usize) -> Vec<(u32, f64)> {
        let mut best: Vec<(u32, f64)> = Vec::with_capacity(k + 1);
        if k == 0 || self.points.is_empty() {
            return best;
        }
        let center = self.key(q);
        let max_ring = self.max_ring(center);
        let mut ring = 0i64;
        loop {
            if ring > 2 && shell_cells(ring) > self.cells.len() as i64 {
                // shells are mostly empty; a scan of the leftover cells is cheaper
                for (key, &(s, n)) in &self.cells {
                    let d = (0..3).map(|a| (key[a] - center[a]).abs()).max().unwrap();
                    if d >= ring {
                        for &i in &self.order[s as usize..(s + n) as usize] {
                            push_candidate(&mut best, k, i, self.points[i as usize].distance_squared(q));
                        }
                    }
                }
                break;
            }
            for_shell(center, ring, |key| {
                for &i in self.bucket(&key) {
                    push_candidate(&mut best, k, i, self.points[i as usize].distance_squared(q));
                }
            });
            if best.len() == k {
                let reach = ring as f64 * self.cell;
                if best[k - 1].1 <= reach * reach {
                    break;
                }
            }
            if ring >= max_ring {
                break;
            }
            ring += 1;
        }
        best
    }

    /// Indices of all points strictly closer than `r` to `q`, ascending.
    pub fn within(&self, q: Vec3, r: f64) -> Vec<u32> {
        let mut out = Vec::new();
        self.for_each_within(q, r, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    /// Calls `f(index, squared distance)` for every point strictly closer than
    /// `r` to `q`, in unspecified order.
    pub fn for_each_within(&self, q: Vec3, r: f64, mut f: impl FnMut(u32, f64)) {
        let r2 = r * r;
        let reach = (r * self.inv_cell).ceil() as i64;
        let lo = self.key(q - Vec3::splat(r));
        let hi = self.key(q + Vec3::splat(r));
        let span = (0..3).map(|a| (hi[a] - lo[a] + 1) as i64).product::<i64>();
        if reach > 2 && span > self.cells.len() as i64 {
            for (key, &(s, n)) in &self.cells {
                if (0..3).all(|a| key[a] >= lo[a] && key[a] <= hi[a]) {
                    for &i in &self.order[s as usize..(s + n) as usize] {
                        let d = self.points[i as usize].distance_squared(q);
                        if d < r2 {
                            f(i, d);
                        }
                    }
                }
            }
            return;
        }
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    for &i in self.bucket(&[x, y, z]) {
                        let d = self.points[i as usize].distance_squared(q);
                        if d < r2 {
                            f(i, d);
                        }
                    }
                }
            }
        }
    }
}

fn shell_cells(ring: i64) -> i64 {
    let outer = 2 * ring + 1;
    let inner = 2 * ring - 1;
    outer.pow(3) - inner.max(0).pow(3)
}

fn for_shell(c: CellKey, ring: i64, mut f: impl FnMut(CellKey)) {
    if ring == 0 {
        f(c);
        return;
    }
    for dx in -ring..=ring {
        for dy in -ring..=ring {
            let on_face = dx.abs() == ring || dy.abs() == ring;
            if on_face {
                for dz in -ring..=ring {
                    f([c[0] + dx, c[1] + dy, c[2] + dz]);
                }
            } else {
                f([c[0] + dx, c[1] + dy, c[2] - ring]);
                f([c[0] + dx, c[1] + dy, c[2] + ring]);
            }
        }
    }
}

fn push_candidate(best: &mut Vec<(u32, f64)>, k: usize, i: u32, d: f64) {
    let worse = |a: &(u32, f64)| a.1 < d || (a.1 == d && a.0 < i);
    if best.len() == k {
        let last = best[k - 1];
        if !(d < last.1 || (d == last.1 && i < last.0)) {
            return;
        }
        best.pop();
    }
    let pos = best.partition_point(worse);
    best.insert(pos, (i, d));
}

/// Average sampling pitch of a surface cloud: for each point the side of the
/// square patch it owns, `r_k · sqrt(π / k)` with `r_k` the distance to its
/// k-th neighbor. On a uniformly sampled surface of density λ this tends to
/// `1 / sqrt(λ)`.
///
/// Estimated from at most 4096 evenly strided points.
pub fn mean_spacing(points: &[Vec3]) -> f64 {
    const K: usize = 8;
    const MAX_PROBES: usize = 4096;
    if points.len() <= K {
        return match compute_aabb(points) {
            Ok(b) => b.diagonal() / (points.len().max(1) as f64).sqrt(),
            Err(_) => 0.0,
        };
    }
    let bbox = compute_aabb(points).expect("non-empty");
    let coarse = (bbox.diagonal() / (points.len() as f64).sqrt()).max(1e-9) * 2.0;
    let grid = PointGrid::new(points, coarse);
    let stride = (points.len() / MAX_PROBES).max(1);
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in (0..points.len()).step_by(stride) {
        // K + 1 because the probe itself is returned at distance zero
        let nn = grid.knn(points[i], K + 1);
        let rk = nn.last().map(|&(_, d)| d.sqrt()).unwrap_or(0.0);
        sum += rk * (std::f64::consts::PI / K as f64).sqrt();
        count += 1;
    }
    sum / count as f64
}

/// Grid sized for k-NN queries at twice the mean spacing.
pub fn knn_grid(points: &[Vec3]) -> PointGrid<'_> {
    let spacing = mean_spacing(points);
    let cell = if spacing > 0.0 { 2.0 * spacing } else { 1.0 };
    PointGrid::new(points, cell)
}
