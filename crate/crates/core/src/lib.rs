//! Exactly color-equivariant group convolutions via double-cover lifting.
//!
//! Interval-valued color channels (saturation, luminance) carry no group
//! structure of their own. This crate lifts them onto the circle through a
//! two-to-one covering map, which makes cyclic shift actions exact, and
//! builds group-convolutional networks over the resulting hue–saturation–
//! luminance product group. Alongside the layers themselves it provides the
//! measurement harness (equivariance and restoration error, commutativity
//! panels), coverage analysis of the lifting, dataset generation, and
//! bit-exact MNIST-style ingestion.
//!
//! Data-parallel inner loops run on rayon when the default `parallel`
//! feature is enabled and fall back to sequential iteration without it.

pub mod colorspace;
pub mod datasets;
pub mod equivariance;
pub mod exec;
pub mod groups;
pub mod lifting;
pub mod nn;
pub mod ppm;

pub use colorspace::{hsl_to_rgb, psnr, rgb_to_hsl, HslImage, RgbImage};
pub use groups::{CoverMap, CyclicGroup, GroupElement, HslElement, HslGroup};
pub use lifting::{coverage_report, lift_image, orbit_values, partition_entropy, select_order};
