use std::path::Path;

use super::camera::Camera;
use super::raster::ViewBundle;
use crate::error::{Error, Result};
use crate::io::{read_json, write_gray16_png, write_json, write_rgb_png};

/// Writes `<k>.png`, `<k>.part.png`, `<k>.depth.bin` and `<k>.camera.json`
/// into `dir`.
pub fn write_view(dir: &Path, k: usize, view: &ViewBundle) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (w, h) = (view.camera.resolution[0], view.camera.resolution[1]);
    write_rgb_png(&dir.join(format!("{k}.png")), w, h, view.color.clone())?;
    let parts = view
        .part_id
        .iter()
        .map(|&p| {
            u16::try_from(p).map_err(|_| Error::InvalidInput(format!("part id {p} does not fit a 16-bit part image")))
        })
        .collect::<Result<Vec<u16>>>()?;
    write_gray16_png(&dir.join(format!("{k}.part.png")), w, h, parts)?;
    let mut bytes = Vec::with_capacity(4 * view.depth.len());
    for d in &view.depth {
        bytes.extend_from_slice(&d.to_le_bytes());
    }
    let path = dir.join(format!("{k}.depth.bin"));
    std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    write_camera(&dir.join(format!("{k}.camera.json")), &view.camera)
}

pub fn write_camera(path: &Path, camera: &Camera) -> Result<()> {
    write_json(path, camera)
}

pub fn read_camera(path: &Path) -> Result<Camera> {
    let c: Camera = read_json(path)?;
    c.validate()?;
    Ok(c)
}

pub fn read_depth(path: &Path, width: usize, height: usize) -> Result<Vec<f32>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() != 4 * width * height {
        return Err(Error::Format {
            format: "depth",
            path: path.to_path_buf(),
            message: format!("expected {} bytes, found {}", 4 * width * height, bytes.len()),
        });
    }
    Ok(bytes.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect())
}
