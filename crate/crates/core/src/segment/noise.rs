use std::collections::BTreeMap;

use rand::Rng;

use super::Mask2D;
use crate::rng::{stream_rng, Stream};

/// Flips mask membership of each listed pixel with probability `p`: pixels
/// in a mask leave it, pixels outside every mask join an extra mask of the
/// view. `targets[v]` lists the ascending pixels of view `v` open to
/// corruption. Draws are keyed by `(seed, view)`.
pub fn corrupt_masks(masks: Vec<Mask2D>, targets: &[Vec<u32>], p: f64, seed: u64) -> Vec<Mask2D> {
    let mut by_view: BTreeMap<usize, Vec<Mask2D>> = BTreeMap::new();
    for m in masks {
        by_view.entry(m.view).or_default().push(m);
    }
    let mut out = Vec::new();
    for (v, pixels) in targets.iter().enumerate() {
        let mut view_masks = by_view.remove(&v).unwrap_or_default();
        let mut rng = stream_rng(seed, Stream::MaskNoise, v as u64);
        let mut flips = Vec::new();
        for &px in pixels {
            if rng.random::<f64>() < p {
                flips.push(px);
            }
        }
        let mut added = Vec::new();
        for px in flips {
            match view_masks.iter_mut().find(|m| m.pixels.binary_search(&px).is_ok()) {
                Some(m) => {
                    let at = m.pixels.binary_search(&px).unwrap();
                    m.pixels.remove(at);
                }
                None => added.push(px),
            }
        }
        view_masks.retain(|m| !m.pixels.is_empty());
        if !added.is_empty() {
            let instance = view_masks.iter().map(|m| m.instance).max().unwrap_or(0) + 1;
            view_masks.push(Mask2D {
                view: v,
                instance,
                pixels: added,
                confidence: 1.0,
            });
        }
        out.extend(view_masks);
    }
    for (_, rest) in by_view {
        out.extend(rest);
    }
    out
}
