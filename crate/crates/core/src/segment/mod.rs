//! 2D part masks for a text query: a ground-truth oracle reading rendered
//! part-id buffers, or an external model reached through a file exchange.

mod exchange;
mod noise;
mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use exchange::{external_segment, read_response, write_request, ExternalBackend, RequestFile, ResponseFile, ResponseMask};
pub use noise::corrupt_masks;
pub use oracle::{oracle_segment, oracle_segment_views, PartIndex};

use crate::synth::QuerySpec;

/// Masks smaller than this many pixels carry no usable signal.
pub const DEFAULT_MIN_PIXELS: usize = 10;

/// One 2D instance mask in one view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mask2D {
    pub view: usize,
    /// unique within (view, query), from 1
    pub instance: u32,
    /// row-major pixel indices, ascending
    pub pixels: Vec<u32>,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SegmenterBackend {
    Oracle {
        #[serde(default = "default_min_pixels")]
        min_pixels: usize,
    },
    External {
        exchange_dir: std::path::PathBuf,
        #[serde(default = "default_timeout")]
        timeout_seconds: u64,
    },
}

fn default_min_pixels() -> usize {
    DEFAULT_MIN_PIXELS
}

fn default_timeout() -> u64 {
    600
}

impl Default for SegmenterBackend {
    fn default() -> Self {
        SegmenterBackend::Oracle {
            min_pixels: DEFAULT_MIN_PIXELS,
        }
    }
}

/// Part instances answering `text`: parts whose label equals the text, else
/// the ground truth of a listed query with that text. `None` (with a
/// warning) when neither exists.
pub fn resolve_query(text: &str, labels: &BTreeMap<u32, String>, queries: &[QuerySpec]) -> Option<BTreeSet<u32>> {
    let direct: BTreeSet<u32> = labels.iter().filter(|(_, l)| l.as_str() == text).map(|(&p, _)| p).collect();
    if !direct.is_empty() {
        return Some(direct);
    }
    if let Some(q) = queries.iter().find(|q| q.query_text == text) {
        return Some(q.gt_part_ids.iter().copied().collect());
    }
    log::warn!("query `{text}` matches no part label or listed query; returning no masks");
    None
}

/// Per-view membership bitmaps of the union of `masks`.
pub fn mask_union(masks: &[Mask2D], views: usize, pixels_per_view: usize) -> Vec<Vec<bool>> {
    let mut out = vec![Vec::new(); views];
    for m in masks {
        let bits = &mut out[m.view];
        if bits.is_empty() {
            bits.resize(pixels_per_view, false);
        }
        for &p in &m.pixels {
            bits[p as usize] = true;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::QueryKind;

    #[test]
    fn resolution_prefers_labels_then_listed_queries() {
        let labels = BTreeMap::from([(1, "door_handle".to_string()), (2, "door_panel".to_string())]);
        let queries = vec![QuerySpec {
            query_text: "open the door".into(),
            kind: QueryKind::Implicit,
            gt_part_ids: vec![1],
        }];
        assert_eq!(resolve_query("door_panel", &labels, &queries), Some(BTreeSet::from([2])));
        assert_eq!(resolve_query("open the door", &labels, &queries), Some(BTreeSet::from([1])));
        assert_eq!(resolve_query("unicorn_horn", &labels, &queries), None);
    }

    #[test]
    fn backend_config_schema() {
        let b: SegmenterBackend = serde_json::from_str(r#"{"kind":"oracle"}"#).unwrap();
        assert_eq!(b, SegmenterBackend::default());
        let e: SegmenterBackend = serde_json::from_str(r#"{"kind":"external","exchange_dir":"/tmp/x"}"#).unwrap();
        assert!(matches!(e, SegmenterBackend::External { timeout_seconds: 600, .. }));
    }
}
