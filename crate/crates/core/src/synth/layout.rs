use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};
use crate::io::read_json;

/// Room footprint plus the furniture it must (or may) contain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub layout_id: String,
    pub room_extent: Aabb,
    pub placements: Vec<LayoutPlacement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutPlacement {
    pub category: String,
    /// Where the bottom center of the placed shape goes.
    pub position: Vec3,
    #[serde(default)]
    pub yaw: f64,
    #[serde(default = "default_required")]
    pub required: bool,
}

fn default_required() -> bool {
    true
}

impl Layout {
    pub fn validate(&self) -> Result<()> {
        let r = &self.room_extent;
        if !(r.min.x < r.max.x && r.min.y < r.max.y && r.min.z <= r.max.z) {
            return Err(Error::InvalidLayout(format!("{}: empty room extent", self.layout_id)));
        }
        for (i, p) in self.placements.iter().enumerate() {
            if p.category.is_empty() {
                return Err(Error::InvalidLayout(format!("{}: placement {i} has no category", self.layout_id)));
            }
            if !p.position.is_finite() || !p.yaw.is_finite() {
                return Err(Error::InvalidLayout(format!("{}: placement {i} is not finite", self.layout_id)));
            }
            if !r.contains_xy(p.position) {
                return Err(Error::InvalidLayout(format!(
                    "{}: placement {i} ({}) at {:?} lies outside the room",
                    self.layout_id, p.category, p.position
                )));
            }
        }
        Ok(())
    }
}

pub fn load_layout(path: &Path) -> Result<Layout> {
    let layout: Layout = read_json(path)?;
    layout.validate()?;
    Ok(layout)
}

/// Loads every `*.json` layout in `dir`, sorted by file name.
pub fn load_layouts(dir: &Path) -> Result<Vec<Layout>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidLayout(format!("no layout files in {}", dir.display())));
    }
    paths.iter().map(|p| load_layout(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_schema() {
        let text = r#"{"layout_id":"l","room_extent":{"min":[0,0,0],"max":[4,3,3]},
            "placements":[{"category":"table","position":[2,1.5,0],"yaw":0.5,"required":true}]}"#;
        let l: Layout = serde_json::from_str(text).unwrap();
        l.validate().unwrap();
        assert_eq!(l.placements[0].position, Vec3::new(2.0, 1.5, 0.0));
    }

    #[test]
    fn placement_outside_room_is_invalid() {
        let text = r#"{"layout_id":"l","room_extent":{"min":[0,0,0],"max":[4,3,3]},
            "placements":[{"category":"table","position":[5,1,0]}]}"#;
        let l: Layout = serde_json::from_str(text).unwrap();
        assert!(l.validate().is_err());
    }
}
