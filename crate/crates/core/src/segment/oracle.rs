use std::collections::BTreeSet;

use super::Mask2D;
use crate::render::ViewBundle;

/// Pixels of one view grouped by part id.
#[derive(Debug, Clone, PartialEq)]
pub struct PartIndex {
    /// ascending part ids, background excluded
    parts: Vec<u32>,
    /// `offsets[k]..offsets[k + 1]` indexes `pixels` for `parts[k]`
    offsets: Vec<usize>,
    pixels: Vec<u32>,
}

impl PartIndex {
    pub fn new(part_id: &[u32]) -> Self {
        let mut parts: Vec<u32> = part_id.iter().copied().filter(|&p| p != 0).collect::<BTreeSet<_>>().into_iter().collect();
        parts.sort_unstable();
        let mut counts = vec![0usize; parts.len()];
        let slot = |p: u32| parts.binary_search(&p).expect("collected above");
        for &p in part_id.iter().filter(|&&p| p != 0) {
            counts[slot(p)] += 1;
        }
        let mut offsets = Vec::with_capacity(parts.len() + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let mut fill = offsets[..parts.len()].to_vec();
        let mut pixels = vec![0u32; *offsets.last().unwrap()];
        for (i, &p) in part_id.iter().enumerate() {
            if p != 0 {
                let s = slot(p);
                pixels[fill[s]] = i as u32;
                fill[s] += 1;
            }
        }
        PartIndex { parts, offsets, pixels }
    }

    /// Ascending pixel indices showing `part`.
    pub fn pixels_of(&self, part: u32) -> &[u32] {
        match self.parts.binary_search(&part) {
            Ok(k) => &self.pixels[self.offsets[k]..self.offsets[k + 1]],
            Err(_) => &[],
        }
    }
}

/// One mask per view and matching part instance, holding exactly the pixels
/// showing that part; confidence 1. Masks under `min_pixels` are dropped.
pub fn oracle_segment(views: &[PartIndex], parts: &BTreeSet<u32>, min_pixels: usize) -> Vec<Mask2D> {
    let mut out = Vec::new();
    for (v, index) in views.iter().enumerate() {
        let mut instance = 0;
        for &p in parts {
            let pixels = index.pixels_of(p);
            if !pixels.is_empty() && pixels.len() >= min_pixels {
                instance += 1;
                out.push(Mask2D {
                    view: v,
                    instance,
                    pixels: pixels.to_vec(),
                    confidence: 1.0,
                });
            }
        }
    }
    out
}

pub fn oracle_segment_views(views: &[ViewBundle], parts: &BTreeSet<u32>, min_pixels: usize) -> Vec<Mask2D> {
    let index: Vec<PartIndex> = views.iter().map(|v| PartIndex::new(&v.part_id)).collect();
    oracle_segment(&index, parts, min_pixels)
}
