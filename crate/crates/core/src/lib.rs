//! Part-annotated synthetic indoor scenes and open-vocabulary 3D part
//! segmentation by lifting 2D part masks from many rendered views onto
//! superpoints.

pub mod error;
pub mod eval;
pub mod geometry;
pub mod grouping;
pub mod io;
pub mod pipeline;
pub mod rng;
pub mod segment;
pub mod spatial;
pub mod superpoints;
pub mod render;
pub mod synth;

pub use error::{Error, Result};
