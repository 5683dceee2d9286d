use rand::Rng;

use crate::rng::{stream_rng, Stream};

/// Flat color of a part, keyed by `(seed, part_id)`. Saturated mid-bright
/// hues so neighboring parts stay distinguishable in rendered views.
pub fn part_color(seed: u64, part_id: u32) -> [u8; 3] {
    let mut rng = stream_rng(seed, Stream::Palette, part_id as u64);
    let h: f64 = rng.random_range(0.0..360.0);
    let s: f64 = rng.random_range(0.45..0.9);
    let v: f64 = rng.random_range(0.55..0.95);
    hsv_to_rgb(h, s, v)
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let q = |t: f64| ((t + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}
