//! Minimal dense-tensor engine, group-convolutional layers, and training.

pub mod layers;
pub mod network;
pub mod tensor;
pub mod train;

pub use layers::{
    encode_planes, planar_conv2d, softmax_xent, Affine, AxisMode, GroupConv, GroupPoolMode,
    InputEncoding, LiftKind, LiftingConv,
};
pub use network::{
    load_checkpoint, save_checkpoint, ConfigError, Gradients, Network, NetworkConfig, Trace,
};
pub use tensor::{FeatureMap, Scalar};
pub use train::{
    evaluate, gradient_check, metrics_jsonl, train, EpochMetrics, Hyper, Sample, TrainError,
};
