//! Camera planning, z-buffer rendering of part-labelled meshes and per-point
//! visibility.

mod camera;
mod export;
mod raster;
mod visibility;

pub use camera::{
    cell_distance, far_corners, plan_global_snap, plan_room_tour, project_with, Camera, CameraParams, Frame,
    GridDecomposition, Projection,
};
pub use export::{read_camera, read_depth, write_camera, write_view};
pub use raster::{render_view, ViewBundle, BACKGROUND};
pub use visibility::{compute_visibility, default_epsilon, visible_pixels, PixelProjector, NOT_VISIBLE};

use crate::error::Result;
use crate::geometry::{compute_aabb, Aabb, Vec3};

/// Bounds used for camera planning: the cloud bounds, widened to the room
/// footprint when one is known.
pub fn scene_bounds(points: &[Vec3], room: Option<&Aabb>) -> Result<Aabb> {
    let b = compute_aabb(points)?;
    Ok(match room {
        Some(r) => b.union(&Aabb {
            min: Vec3::new(r.min.x, r.min.y, b.min.z),
            max: Vec3::new(r.max.x, r.max.y, b.min.z),
        }),
        None => b,
    })
}
