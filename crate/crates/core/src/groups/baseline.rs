//! Translation-with-clipping baseline actions (LCER).
//!
//! The baseline models saturation and luminance as clipped translations of
//! the interval with step `Δ = 1/(M−1)`, and shifts functions on the group
//! with zero-fill instead of wraparound. Clipping and zero-fill destroy
//! information, so these actions are not cyclic and the resulting layers are
//! only approximately equivariant.

use crate::colorspace::HslImage;
use crate::groups::cover::CoverMap;

/// Translation step per index for a baseline group of order `m`.
pub fn lcer_step(m: usize) -> f64 {
    assert!(m >= 2, "baseline order must be at least 2");
    1.0 / (m as f64 - 1.0)
}

/// Shifts the saturation channel by `k` steps of `Δ = 1/(m−1)`, clamping to
/// `[0, 1]`. Negative `k` shifts down.
pub fn lcer_sat_action(k: i64, x: &HslImage, m: usize) -> HslImage {
    let delta = lcer_step(m);
    translate_channel(x, k as f64 * delta, Channel::Sat)
}

/// Luminance analogue of [`lcer_sat_action`].
pub fn lcer_lum_action(k: i64, x: &HslImage, m: usize) -> HslImage {
    let delta = lcer_step(m);
    translate_channel(x, k as f64 * delta, Channel::Lum)
}

/// Shifts the named channel by a raw interval amount, clamping to `[0, 1]`.
pub fn translate_channel(x: &HslImage, amount: f64, channel: Channel) -> HslImage {
    let mut out = x.clone();
    match channel {
        Channel::Sat => {
            let cover = CoverMap::saturation();
            for theta in out.sat_theta_mut() {
                let v = (cover.project(*theta) + amount).clamp(0.0, 1.0);
                *theta = cover.lift(v).expect("clamped into domain");
            }
        }
        Channel::Lum => {
            let cover = CoverMap::luminance();
            for theta in out.lum_theta_mut() {
                let v = (cover.project(*theta) + amount).clamp(0.0, 1.0);
                *theta = cover.lift(v).expect("clamped into domain");
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Sat,
    Lum,
}

/// Baseline lifting: `m` copies with the channel lowered by `i·Δ`,
/// `i = 0..m−1`, so the copies sweep the interval down from the input.
pub fn lcer_lift(x: &HslImage, m: usize, channel: Channel) -> Vec<HslImage> {
    let delta = lcer_step(m);
    (0..m)
        .map(|i| translate_channel(x, -(i as f64) * delta, channel))
        .collect()
}

/// Zero-fill shift of a slot vector: slot `j` receives `f[j + k]` when that
/// index exists, `zero` otherwise. Not cyclic.
pub fn lcer_function_action<T: Clone>(k: i64, f: &[T], zero: T) -> Vec<T> {
    let m = f.len() as i64;
    (0..m)
        .map(|j| {
            let src = j + k;
            if (0..m).contains(&src) {
                f[src as usize].clone()
            } else {
                zero.clone()
            }
        })
        .collect()
}
