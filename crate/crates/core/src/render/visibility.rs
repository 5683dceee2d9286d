use rayon::prelude::*;

use super::camera::{project_with, Camera, Frame};
use super::raster::ViewBundle;
use crate::geometry::Vec3;

/// Marks a point that is not visible in a view.
pub const NOT_VISIBLE: u32 = u32::MAX;

/// Default visibility tolerance: 1 cm per 10 m of scene diagonal.
pub fn default_epsilon(scene_diagonal: f64) -> f64 {
    1e-2 * scene_diagonal / 10.0
}

/// Maps points to the pixel they round to.
#[derive(Debug, Clone, Copy)]
pub struct PixelProjector {
    frame: Frame,
    origin: Vec3,
    focal: f64,
    center: (f64, f64),
    width: usize,
    height: usize,
}

impl PixelProjector {
    pub fn new(camera: &Camera) -> Self {
        PixelProjector {
            frame: camera.frame(),
            origin: camera.position,
            focal: camera.focal(),
            center: camera.principal_point(),
            width: camera.width(),
            height: camera.height(),
        }
    }

    /// Row-major pixel index and view depth, or `None` when `p` is behind
    /// the camera or rounds to a pixel outside the image.
    #[inline]
    pub fn pixel(&self, p: Vec3) -> Option<(usize, f64)> {
        let q = project_with(&self.frame, self.origin, self.focal, self.center, p)?;
        let (x, y) = (q.u.round(), q.v.round());
        if x >= 0.0 && y >= 0.0 && x < self.width as f64 && y < self.height as f64 {
            Some((y as usize * self.width + x as usize, q.depth))
        } else {
            None
        }
    }
}

/// Pixel index of every visible point, [`NOT_VISIBLE`] otherwise. A point is
/// visible when it is in front of the camera, rounds to a pixel inside the
/// image and is no more than `epsilon` behind the depth buffer there.
pub fn visible_pixels(camera: &Camera, depth: &[f32], points: &[Vec3], epsilon: f64) -> Vec<u32> {
    let proj = PixelProjector::new(camera);
    points
        .par_iter()
        .map(|&p| match proj.pixel(p) {
            Some((i, z)) if z <= depth[i] as f64 + epsilon => i as u32,
            _ => NOT_VISIBLE,
        })
        .collect()
}

pub fn compute_visibility(points: &[Vec3], view: &ViewBundle, epsilon: f64) -> Vec<bool> {
    visible_pixels(&view.camera, &view.depth, points, epsilon)
        .into_iter()
        .map(|i| i != NOT_VISIBLE)
        .collect()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::geometry::TriMesh;
    use crate::render::render_view;

    fn cam() -> Camera {
        Camera {
            position: Vec3::new(0.0, -3.0, 1.0),
            look_at: Vec3::new(0.0, 0.0, 1.0),
            up: Vec3::UP,
            fov: 1.0,
            resolution: [80, 60],
            near: 0.05,
            far: 50.0,
            grid_cell: [0, 0],
        }
    }

    fn wall(y: f64) -> TriMesh {
        let v = vec![
            Vec3::new(-20.0, y, -20.0),
            Vec3::new(20.0, y, -20.0),
            Vec3::new(20.0, y, 20.0),
            Vec3::new(-20.0, y, 20.0),
        ];
        TriMesh::new(v, vec![[0, 1, 2], [0, 2, 3]], vec![1; 2], vec![1; 2]).unwrap()
    }

    #[test]
    fn lone_point_in_empty_view_is_visible() {
        let c = cam();
        let view = render_view(&TriMesh::default(), &BTreeMap::new(), &c);
        let vis = compute_visibility(&[Vec3::new(0.1, 0.0, 1.1), Vec3::new(0.0, -5.0, 1.0)], &view, 1e-3);
        assert_eq!(vis, vec![true, false]);
    }

    #[test]
    fn point_behind_wall_is_hidden() {
        let c = cam();
        let view = render_view(&wall(0.0), &BTreeMap::new(), &c);
        let pts = [Vec3::new(0.2, 1.0, 1.1), Vec3::new(0.2, 0.0, 1.1), Vec3::new(0.2, -1.0, 1.1)];
        assert_eq!(compute_visibility(&pts, &view, 1e-3), vec![false, true, true]);
        // outside the frustum
        assert_eq!(compute_visibility(&[Vec3::new(30.0, -2.0, 1.0)], &view, 1e-3), vec![false]);
    }

    #[test]
    fn rendered_surface_points_are_visible() {
        let c = Camera {
            look_at: Vec3::new(0.4, 0.0, 0.2),
            ..cam()
        };
        let view = render_view(&wall(0.0), &BTreeMap::new(), &c);
        let mut pts = Vec::new();
        for y in 0..60 {
            for x in 0..80 {
                let d = view.depth[y * 80 + x];
                if d.is_finite() {
                    pts.push(c.unproject(x as f64, y as f64, d as f64));
                }
            }
        }
        assert!(pts.len() > 1000);
        assert!(compute_visibility(&pts, &view, 1e-3).iter().all(|&v| v));
    }
}
