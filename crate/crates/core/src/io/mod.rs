//! File formats: PLY, OBJ, JSON helpers, PNG buffers.

pub mod obj;
pub mod ply;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_rgb_png(path: &Path, width: u32, height: u32, rgb: Vec<u8>) -> Result<()> {
    let img = image::RgbImage::from_raw(width, height, rgb)
        .ok_or_else(|| Error::InvalidInput(format!("RGB buffer does not match {width}x{height}")))?;
    ensure_parent(path)?;
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

pub fn write_gray16_png(path: &Path, width: u32, height: u32, data: Vec<u16>) -> Result<()> {
    let img = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::from_raw(width, height, data)
        .ok_or_else(|| Error::InvalidInput(format!("label buffer does not match {width}x{height}")))?;
    ensure_parent(path)?;
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// Reads a 16-bit grayscale PNG as `(width, height, row-major values)`.
/// 8-bit grayscale inputs are widened.
pub fn read_gray16_png(path: &Path) -> Result<(u32, u32, Vec<u16>)> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    match img {
        image::DynamicImage::ImageLuma16(buf) => Ok((buf.width(), buf.height(), buf.into_raw())),
        image::DynamicImage::ImageLuma8(buf) => Ok((
            buf.width(),
            buf.height(),
            buf.into_raw().into_iter().map(u16::from).collect(),
        )),
        other => Err(Error::Format {
            format: "PNG",
            path: path.to_path_buf(),
            message: format!("expected single-channel grayscale, got {:?}", other.color()),
        }),
    }
}

pub fn read_rgb_png(path: &Path) -> Result<(u32, u32, Vec<u8>)> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let rgb = img.to_rgb8();
    Ok((rgb.width(), rgb.height(), rgb.into_raw()))
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}
