//! File exchange with an external 2D segmenter.
//!
//! ```text
//! <root>/request/views/<k>.png, views/<k>.camera.json, request.json
//! <root>/response/masks/<k>.png, response.json
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::Mask2D;
use crate::error::{Error, Result};
use crate::io::{read_gray16_png, read_json, write_json, write_rgb_png};
use crate::render::{write_camera, ViewBundle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestFile {
    pub query: String,
    pub views: usize,
    pub resolution: [u32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseMask {
    pub view: usize,
    pub instance: u32,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseFile {
    pub query: String,
    #[serde(default)]
    pub model_info: String,
    pub masks: Vec<ResponseMask>,
}

#[derive(Debug, Clone)]
pub struct ExternalBackend {
    pub exchange_dir: PathBuf,
    pub timeout: Duration,
    pub poll_interval: Duration,
}

impl ExternalBackend {
    pub fn new(exchange_dir: impl Into<PathBuf>, timeout: Duration) -> Self {
        ExternalBackend {
            exchange_dir: exchange_dir.into(),
            timeout,
            poll_interval: Duration::from_millis(100),
        }
    }

    pub fn request_dir(&self) -> PathBuf {
        self.exchange_dir.join("request")
    }

    pub fn response_dir(&self) -> PathBuf {
        self.exchange_dir.join("response")
    }
}

/// Writes the request directory for `views`. All views share one resolution.
pub fn write_request(dir: &Path, query: &str, views: &[ViewBundle]) -> Result<()> {
    let resolution = views.first().map(|v| v.camera.resolution).unwrap_or([0, 0]);
    if let Some(v) = views.iter().find(|v| v.camera.resolution != resolution) {
        return Err(Error::InvalidInput(format!(
            "views disagree on resolution: {:?} vs {:?}",
            resolution, v.camera.resolution
        )));
    }
    let views_dir = dir.join("views");
    std::fs::create_dir_all(&views_dir).map_err(|e| Error::io(&views_dir, e))?;
    for (k, v) in views.iter().enumerate() {
        let [w, h] = v.camera.resolution;
        write_rgb_png(&views_dir.join(format!("{k}.png")), w, h, v.color.clone())?;
        write_camera(&views_dir.join(format!("{k}.camera.json")), &v.camera)?;
    }
    write_json(
        &dir.join("request.json"),
        &RequestFile {
            query: query.to_string(),
            views: views.len(),
            resolution,
        },
    )
}

/// Parses and validates a response directory against the request it answers.
pub fn read_response(dir: &Path, request: &RequestFile) -> Result<Vec<Mask2D>> {
    let response: ResponseFile = read_json(&dir.join("response.json"))
        .map_err(|e| Error::schema("response.json", e.to_string()))?;
    if response.query != request.query {
        return Err(Error::schema(
            "query",
            format!("answers `{}`, expected `{}`", response.query, request.query),
        ));
    }
    let mut listed: BTreeMap<usize, BTreeMap<u32, f64>> = BTreeMap::new();
    for (i, m) in response.masks.iter().enumerate() {
        let field = format!("masks[{i}]");
        if m.view >= request.views {
            return Err(Error::schema(
                format!("{field}.view"),
                format!("view {} out of range 0..{}", m.view, request.views),
            ));
        }
        if !(0.0..=1.0).contains(&m.confidence) {
            return Err(Error::schema(
                format!("{field}.confidence"),
                format!("{} outside [0, 1]", m.confidence),
            ));
        }
        if m.instance == 0 || m.instance > u16::MAX as u32 {
            return Err(Error::schema(
                format!("{field}.instance"),
                format!("{} outside 1..=65535", m.instance),
            ));
        }
        if listed.entry(m.view).or_default().insert(m.instance, m.confidence).is_some() {
            return Err(Error::schema(
                format!("{field}.instance"),
                format!("instance {} listed twice for view {}", m.instance, m.view),
            ));
        }
    }

    let [w, h] = request.resolution;
    let mut out = Vec::new();
    for (&view, instances) in &listed {
        let field = format!("masks/{view}.png");
        let path = dir.join("masks").join(format!("{view}.png"));
        if !path.is_file() {
            return Err(Error::schema(field, "file missing"));
        }
        let (pw, ph, labels) = read_gray16_png(&path).map_err(|e| Error::schema(&field, e.to_string()))?;
        if (pw, ph) != (w, h) {
            return Err(Error::schema(
                field,
                format!("view {view} is {pw}x{ph}, expected {w}x{h}"),
            ));
        }
        let mut pixels: BTreeMap<u32, Vec<u32>> = instances.keys().map(|&k| (k, Vec::new())).collect();
        let mut unlisted = BTreeSet::new();
        for (i, &label) in labels.iter().enumerate() {
            if label == 0 {
                continue;
            }
            match pixels.get_mut(&(label as u32)) {
                Some(px) => px.push(i as u32),
                None => {
                    unlisted.insert(label);
                }
            }
        }
        if let Some(label) = unlisted.first() {
            return Err(Error::schema(
                field,
                format!("label {label} in view {view} is not listed in response.json"),
            ));
        }
        for (instance, px) in pixels {
            if px.is_empty() {
                return Err(Error::schema(
                    field,
                    format!("instance {instance} of view {view} has no pixels"),
                ));
            }
            out.push(Mask2D {
                view,
                instance,
                pixels: px,
                confidence: instances[&instance],
            });
        }
    }
    Ok(out)
}

/// One blocking exchange: clears any stale response, writes the request and
/// polls for `response/response.json` until the backend timeout.
pub fn external_segment(views: &[ViewBundle], query: &str, backend: &ExternalBackend) -> Result<Vec<Mask2D>> {
    let request_dir = backend.request_dir();
    let response_dir = backend.response_dir();
    for dir in [&request_dir, &response_dir] {
        if dir.exists() {
            std::fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    write_request(&request_dir, query, views)?;
    let request: RequestFile = read_json(&request_dir.join("request.json"))?;
    let marker = response_dir.join("response.json");
    let start = Instant::now();
    log::info!("waiting for response in {}", response_dir.display());
    while !marker.is_file() {
        if start.elapsed() >= backend.timeout {
            return Err(Error::Timeout(backend.timeout));
        }
        std::thread::sleep(backend.poll_interval.min(backend.timeout.saturating_sub(start.elapsed())));
    }
    read_response(&response_dir, &request)
}
