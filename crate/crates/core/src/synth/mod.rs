//! Synthetic scene construction: shape library, layouts, placement, queries
//! and dataset splits.

mod layout;
mod library;
mod palette;
pub mod procedural;
mod queries;
mod scene;
mod split;

pub use layout::{load_layout, load_layouts, Layout, LayoutPlacement};
pub use library::{load_shape_library, Rejection, ShapeLibrary, ShapeRecord};
pub use palette::part_color;
pub use queries::{derive_queries, load_templates, QueryKind, QuerySpec};
pub use scene::{
    build_scene, generate_scene, load_scene, write_scene, PlacedShape, PlacementSource, Scene, SceneConfig,
    SceneManifest,
};
pub use split::{assign_split, assign_splits, split_sizes, Split};
