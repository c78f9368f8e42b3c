//! Dataset ingestion, colorization, procedural generation, and manifests.

pub mod colorize;
pub mod idx;
pub mod manifest;
pub mod shapes;

pub use colorize::{colorize_hue_shift, gray_set_from_idx, HueRange};
pub use idx::{read_idx, IdxError, IdxTensor};
pub use manifest::{read_manifest, write_manifest, LabeledImageSet, Manifest, ManifestError};
pub use shapes::{generate_shapes, ShapeClass, ShapesConfig, SplitKind};
