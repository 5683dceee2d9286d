use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};

/// Pinhole camera with square pixels. Pixel centers sit on integer
/// coordinates; the principal point is `(W/2, H/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub position: Vec3,
    pub look_at: Vec3,
    pub up: Vec3,
    /// vertical field of view, radians
    pub fov: f64,
    /// `[width, height]`
    pub resolution: [u32; 2],
    pub near: f64,
    pub far: f64,
    /// `[i, j]`: grid cell hosting the camera, `i` along x
    pub grid_cell: [usize; 2],
}

/// Camera-frame axes: `right`, `up` and `forward` are orthonormal.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub right: Vec3,
    pub up: Vec3,
    pub forward: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    /// distance along the optical axis
    pub depth: f64,
}

impl Camera {
    pub fn validate(&self) -> Result<()> {
        let ok = self.position.is_finite()
            && self.look_at.is_finite()
            && self.position.distance(self.look_at) > 0.0
            && self.fov > 0.0
            && self.fov < std::f64::consts::PI
            && self.near > 0.0
            && self.near < self.far
            && self.resolution[0] > 0
            && self.resolution[1] > 0
            && self.up.try_normalize().is_some();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid camera {self:?}")))
        }
    }

    pub fn width(&self) -> usize {
        self.resolution[0] as usize
    }

    pub fn height(&self) -> usize {
        self.resolution[1] as usize
    }

    /// Falls back to +y (then +x) as the up hint when looking along `up`.
    pub fn frame(&self) -> Frame {
        let forward = (self.look_at - self.position).normalize();
        let right = [self.up, Vec3::new(0.0, 1.0, 0.0), Vec3::new(1.0, 0.0, 0.0)]
            .into_iter()
            .map(|hint| forward.cross(hint))
            .find(|side| side.norm() > 1e-9)
            .expect("two independent hints")
            .normalize();
        Frame {
            right,
            up: right.cross(forward),
            forward,
        }
    }

    /// Focal length in pixels.
    pub fn focal(&self) -> f64 {
        0.5 * self.resolution[1] as f64 / (0.5 * self.fov).tan()
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (0.5 * self.resolution[0] as f64, 0.5 * self.resolution[1] as f64)
    }

    /// `None` when `p` is not strictly in front of the camera.
    pub fn project(&self, p: Vec3) -> Option<Projection> {
        project_with(&self.frame(), self.position, self.focal(), self.principal_point(), p)
    }

    /// Inverse of [`Camera::project`].
    pub fn unproject(&self, u: f64, v: f64, depth: f64) -> Vec3 {
        let fr = self.frame();
        let f = self.focal();
        let (cx, cy) = self.principal_point();
        self.position + fr.forward * depth + fr.right * ((u - cx) * depth / f) + fr.up * (-(v - cy) * depth / f)
    }
}

/// [`Camera::project`] with the per-camera terms hoisted out.
#[inline]
pub fn project_with(fr: &Frame, origin: Vec3, focal: f64, (cx, cy): (f64, f64), p: Vec3) -> Option<Projection> {
    let d = p - origin;
    let z = d.dot(fr.forward);
    if !(z > 0.0) {
        return None;
    }
    Some(Projection {
        u: cx + focal * d.dot(fr.right) / z,
        v: cy - focal * d.dot(fr.up) / z,
        depth: z,
    })
}

/// Rendering knobs shared by all cameras of a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraParams {
    pub resolution: [u32; 2],
    pub fov_degrees: f64,
    pub near: f64,
    /// far plane as a multiple of the scene diagonal
    pub far_factor: f64,
}

impl Default for CameraParams {
    fn default() -> Self {
        CameraParams {
            resolution: [1024, 1024],
            fov_degrees: 60.0,
            near: 0.05,
            far_factor: 2.0,
        }
    }
}

impl CameraParams {
    pub fn validate(&self) -> Result<()> {
        if self.resolution[0] == 0 || self.resolution[1] == 0 || self.resolution[0] > 16384 || self.resolution[1] > 16384 {
            return Err(Error::Config(format!("resolution must be within 1..=16384, got {:?}", self.resolution)));
        }
        if !(self.fov_degrees > 0.0 && self.fov_degrees < 180.0) {
            return Err(Error::Config(format!("fov_degrees must be in (0, 180), got {}", self.fov_degrees)));
        }
        if !(self.near > 0.0) || !(self.far_factor > 0.0) {
            return Err(Error::Config("near and far_factor must be positive".into()));
        }
        Ok(())
    }

    fn camera(&self, aabb: &Aabb, position: Vec3, look_at: Vec3, grid_cell: [usize; 2]) -> Camera {
        Camera {
            position,
            look_at,
            up: Vec3::UP,
            fov: self.fov_degrees.to_radians(),
            resolution: self.resolution,
            near: self.near,
            far: (self.far_factor * aabb.diagonal()).max(2.0 * self.near),
            grid_cell,
        }
    }
}

/// 3×3 split of the horizontal footprint of a scene into equal thirds.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDecomposition {
    pub aabb: Aabb,
    /// `centroids[j][i]`: mean of the points falling in cell `(i, j)`
    pub centroids: [[Option<Vec3>; 3]; 3],
}

impl GridDecomposition {
    pub fn new(aabb: Aabb, points: &[Vec3]) -> Result<Self> {
        let e = aabb.extent();
        if !(e.x > 0.0 && e.y > 0.0) || !aabb.min.is_finite() || !aabb.max.is_finite() {
            return Err(Error::InvalidInput(format!("degenerate scene footprint {aabb:?}")));
        }
        let mut sums = [[(Vec3::ZERO, 0usize); 3]; 3];
        let grid = GridDecomposition {
            aabb,
            centroids: [[None; 3]; 3],
        };
        for &p in points {
            let [i, j] = grid.cell_of(p);
            sums[j][i].0 += p;
            sums[j][i].1 += 1;
        }
        let mut centroids = [[None; 3]; 3];
        for j in 0..3 {
            for i in 0..3 {
                let (s, n) = sums[j][i];
                if n > 0 {
                    centroids[j][i] = Some(s / n as f64);
                }
            }
        }
        Ok(GridDecomposition { centroids, ..grid })
    }

    /// Cell of the horizontal position of `p`, clamped into the grid.
    pub fn cell_of(&self, p: Vec3) -> [usize; 2] {
        let e = self.aabb.extent();
        let idx = |x: f64, lo: f64, ext: f64| {
            let t = ((x - lo) / ext * 3.0).floor();
            if t.is_nan() {
                0
            } else {
                t.clamp(0.0, 2.0) as usize
            }
        };
        [idx(p.x, self.aabb.min.x, e.x), idx(p.y, self.aabb.min.y, e.y)]
    }

    /// `[x0, y0, x1, y1]` of cell `(i, j)`.
    pub fn cell_rect(&self, [i, j]: [usize; 2]) -> [f64; 4] {
        let (lo, e) = (self.aabb.min, self.aabb.extent());
        let x = |k: usize| if k == 3 { self.aabb.max.x } else { lo.x + e.x * k as f64 / 3.0 };
        let y = |k: usize| if k == 3 { self.aabb.max.y } else { lo.y + e.y * k as f64 / 3.0 };
        [x(i), y(j), x(i + 1), y(j + 1)]
    }

    pub fn cell_center(&self, cell: [usize; 2]) -> (f64, f64) {
        let r = self.cell_rect(cell);
        (0.5 * (r[0] + r[2]), 0.5 * (r[1] + r[3]))
    }

    pub fn cell_diagonal(&self) -> f64 {
        let e = self.aabb.extent();
        (e.x / 3.0).hypot(e.y / 3.0)
    }
}

/// Chebyshev distance between grid cells.
pub fn cell_distance(a: [usize; 2], b: [usize; 2]) -> usize {
    a[0].abs_diff(b[0]).max(a[1].abs_diff(b[1]))
}

/// Footprint corners at floor height that lie farthest from cell `(i, j)`:
/// one for corner cells, the two on the opposite side for side cells, all
/// four for the center cell.
pub fn far_corners(aabb: &Aabb, [i, j]: [usize; 2]) -> Vec<Vec3> {
    let opposite = |k: usize, lo: f64, hi: f64| match k {
        0 => vec![hi],
        2 => vec![lo],
        _ => vec![lo, hi],
    };
    let mut out = Vec::new();
    for y in opposite(j, aabb.min.y, aabb.max.y) {
        for x in opposite(i, aabb.min.x, aabb.max.x) {
            out.push(Vec3::new(x, y, aabb.min.z));
        }
    }
    out
}

/// 25 cameras over the 3×3 footprint grid. Per cell, in row order (`j`
/// outer, `i` inner): the camera aimed at the centroid of the cell's points,
/// then the cameras aimed at the far corners. All sit above the cell center
/// at the scene top plus 0.6 cell diagonals.
pub fn plan_room_tour(grid: &GridDecomposition, params: &CameraParams) -> Result<Vec<Camera>> {
    params.validate()?;
    let aabb = grid.aabb;
    let height = aabb.max.z + 0.6 * grid.cell_diagonal();
    let mut cams = Vec::with_capacity(25);
    for j in 0..3 {
        for i in 0..3 {
            let (cx, cy) = grid.cell_center([i, j]);
            let pos = Vec3::new(cx, cy, height);
            let target = grid.centroids[j][i].unwrap_or(Vec3::new(cx, cy, aabb.min.z));
            cams.push(params.camera(&aabb, pos, target, [i, j]));
            for corner in far_corners(&aabb, [i, j]) {
                cams.push(params.camera(&aabb, pos, corner, [i, j]));
            }
        }
    }
    Ok(cams)
}

/// `n` cameras evenly spaced on a horizontal circle of radius 0.75 scene
/// diagonals at the scene top, all aimed at the scene center.
pub fn plan_global_snap(grid: &GridDecomposition, n: usize, params: &CameraParams) -> Result<Vec<Camera>> {
    params.validate()?;
    if n == 0 {
        return Err(Error::Config("global snap needs at least one camera".into()));
    }
    let aabb = grid.aabb;
    let c = aabb.center();
    let r = 0.75 * aabb.diagonal();
    Ok((0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            let pos = Vec3::new(c.x + r * t.cos(), c.y + r * t.sin(), aabb.max.z);
            params.camera(&aabb, pos, c, grid.cell_of(pos))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> GridDecomposition {
        let aabb = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(3.0, 6.0, 1.0)).unwrap();
        GridDecomposition::new(aabb, &[Vec3::new(0.5, 0.5, 0.2), Vec3::new(0.7, 0.9, 0.4)]).unwrap()
    }

    #[test]
    fn room_tour_has_25_cameras_by_cell_class() {
        let g = grid();
        let cams = plan_room_tour(&g, &CameraParams::default()).unwrap();
        assert_eq!(cams.len(), 25);
        let mut per_cell = [[0; 3]; 3];
        for c in &cams {
            per_cell[c.grid_cell[1]][c.grid_cell[0]] += 1;
            c.validate().unwrap();
        }
        assert_eq!(per_cell, [[2, 3, 2], [3, 5, 3], [2, 3, 2]]);
    }

    #[test]
    fn corner_cell_looks_at_opposite_corner() {
        let g = grid();
        let cams = plan_room_tour(&g, &CameraParams::default()).unwrap();
        let c00: Vec<_> = cams.iter().filter(|c| c.grid_cell == [0, 0]).collect();
        assert!(c00[0].look_at.distance(Vec3::new(0.6, 0.7, 0.3)) < 1e-12);
        assert_eq!(c00[1].look_at, Vec3::new(3.0, 6.0, 0.0));
        let center: Vec<_> = cams.iter().filter(|c| c.grid_cell == [1, 1]).skip(1).map(|c| c.look_at).collect();
        assert_eq!(center.len(), 4);
        for corner in [(0.0, 0.0), (3.0, 0.0), (0.0, 6.0), (3.0, 6.0)] {
            assert!(center.contains(&Vec3::new(corner.0, corner.1, 0.0)));
        }
        // empty cell aims at its floor center
        let c22 = cams.iter().find(|c| c.grid_cell == [2, 2]).unwrap();
        assert_eq!(c22.look_at, Vec3::new(2.5, 5.0, 0.0));
        let h = 1.0 + 0.6 * 1f64.hypot(2.0);
        assert!(cams.iter().all(|c| (c.position.z - h).abs() < 1e-12));
    }

    #[test]
    fn global_snap_circle() {
        let g = grid();
        let cams = plan_global_snap(&g, 16, &CameraParams::default()).unwrap();
        assert_eq!(cams.len(), 16);
        let c = g.aabb.center();
        for k in 0..16 {
            assert_eq!(cams[k].look_at, c);
            let a = |cam: &Camera| (cam.position.y - c.y).atan2(cam.position.x - c.x);
            let step = (a(&cams[(k + 1) % 16]) - a(&cams[k])).rem_euclid(std::f64::consts::TAU);
            assert_relative_eq!(step.to_degrees(), 22.5, epsilon = 1e-9);
        }
        assert_eq!(plan_global_snap(&g, 1, &CameraParams::default()).unwrap().len(), 1);
    }

    #[test]
    fn projection_round_trip() {
        let cam = Camera {
            position: Vec3::new(1.0, 2.0, 3.0),
            look_at: Vec3::new(0.2, -0.5, 0.1),
            up: Vec3::UP,
            fov: 1.0,
            resolution: [640, 480],
            near: 0.05,
            far: 100.0,
            grid_cell: [0, 0],
        };
        let fr = cam.frame();
        let on_axis = cam.project(cam.position + fr.forward * 2.5).unwrap();
        assert_relative_eq!(on_axis.u, 320.0, epsilon = 1e-9);
        assert_relative_eq!(on_axis.v, 240.0, epsilon = 1e-9);
        assert_relative_eq!(on_axis.depth, 2.5, epsilon = 1e-12);
        assert!(cam.project(cam.position - fr.forward).is_none());
        assert!(cam.project(cam.position).is_none());
        let p = Vec3::new(-0.3, 0.4, 0.5);
        let q = cam.project(p).unwrap();
        assert!(cam.unproject(q.u, q.v, q.depth).distance(p) < 1e-6);
    }

    #[test]
    fn straight_down_uses_fallback_up() {
        let cam = Camera {
            position: Vec3::new(0.0, 0.0, 5.0),
            look_at: Vec3::ZERO,
            up: Vec3::UP,
            fov: 1.0,
            resolution: [10, 10],
            near: 0.05,
            far: 10.0,
            grid_cell: [1, 1],
        };
        let fr = cam.frame();
        assert!(fr.right.is_finite() && fr.up.is_finite());
        assert_relative_eq!(fr.right.dot(fr.up), 0.0, epsilon = 1e-12);
        assert!(cam.project(Vec3::ZERO).is_some());
    }

    #[test]
    fn cells_tile_the_footprint() {
        let g = grid();
        assert_eq!(g.cell_of(Vec3::new(0.0, 0.0, 0.0)), [0, 0]);
        assert_eq!(g.cell_of(Vec3::new(3.0, 6.0, 0.0)), [2, 2]);
        assert_eq!(g.cell_of(Vec3::new(1.5, 2.1, 0.0)), [1, 1]);
        assert_eq!(g.cell_of(Vec3::new(-5.0, 9.0, 0.0)), [0, 2]);
        assert_eq!(cell_distance([0, 0], [1, 1]), 1);
        assert_eq!(cell_distance([0, 0], [2, 1]), 2);
    }
}
