//! Discretized color groups, double covers, and their actions.

pub mod action;
pub mod baseline;
pub mod cover;
pub mod cyclic;
pub mod rgb_shift;
pub mod scale;

pub use action::{
    function_action, hsl_action, hue_action, lum_action, sat_action, ActionError, GroupAxis,
    GroupIndexedFunction,
};
pub use baseline::{
    lcer_function_action, lcer_lift, lcer_lum_action, lcer_sat_action, lcer_step, Channel,
};
pub use cover::{CoverError, CoverKind, CoverMap};
pub use cyclic::{CyclicGroup, GroupElement, HslElement, HslGroup};
pub use rgb_shift::{rgb_shift_action, RgbAngles, RgbElement, RgbGroup};
pub use scale::{resample_with_warp, scale_action, scale_coord_map, scale_group, WarpAngles};
