use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            _ => Err(format!("unknown split `{s}` (expected train, val or test)")),
        }
    }
}

/// `(train, val, test)` sizes: 90% / 5% / rest, rounded.
pub fn split_sizes(total: usize) -> (usize, usize, usize) {
    let train = ((total as f64) * 0.9).round() as usize;
    let val = (((total as f64) * 0.05).round() as usize).min(total - train);
    (train, val, total - train - val)
}

/// Split of every index in `0..total`: indices are shuffled with `seed`, the
/// first 90% of the shuffled order go to train, the next 5% to val.
pub fn assign_splits(total: usize, seed: u64) -> Vec<Split> {
    let (train, val, test) = split_sizes(total);
    if total > 0 && (val == 0 || test == 0) {
        log::warn!("{total} scenes give an uneven split: {train} train, {val} val, {test} test");
    }
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut stream_rng(seed, Stream::Split, total as u64));
    let mut out = vec![Split::Test; total];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = if rank < train {
            Split::Train
        } else if rank < train + val {
            Split::Val
        } else {
            Split::Test
        };
    }
    out
}

pub fn assign_split(i: usize, total: usize, seed: u64) -> Split {
    assert!(i < total, "scene index {i} out of range for {total} scenes");
    assign_splits(total, seed)[i]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(total: usize) -> (usize, usize, usize) {
        let s = assign_splits(total, 11);
        let c = |k| s.iter().filter(|&&x| x == k).count();
        (c(Split::Train), c(Split::Val), c(Split::Test))
    }

    #[test]
    fn documented_sizes() {
        assert_eq!(counts(10_000), (9000, 500, 500));
        assert_eq!(counts(20), (18, 1, 1));
        assert_eq!(counts(1), (1, 0, 0));
    }

    #[test]
    fn shuffled_and_deterministic() {
        let a = assign_splits(100, 3);
        assert_eq!(a, assign_splits(100, 3));
        assert_ne!(a, assign_splits(100, 4));
        assert!(a[90..].iter().any(|&s| s == Split::Train));
        assert_eq!(assign_split(5, 100, 3), a[5]);
    }
}
