//! Cyclic scale (resolution) action on normalized image coordinates.
//!
//! Normalized coordinates in `[0, 1]` are lifted with the luminance-style
//! cover, shifted on the circle, and projected back, giving a warp of the
//! image plane. [`WarpAngles`] holds the lifted coordinate grid so sequential
//! applications compose exactly; image-level application resamples bilinearly
//! with edge clamping.

use std::f64::consts::TAU;

use crate::colorspace::RgbImage;
use crate::groups::cover::CoverMap;
use crate::groups::cyclic::{CyclicGroup, GroupElement};

/// The cyclic scale group of order `N`.
pub fn scale_group(order: usize) -> CyclicGroup {
    CyclicGroup::new(order)
}

/// Single-application coordinate map `p ↦ π(lift(p) + α)` on `[0, 1]`.
pub fn scale_coord_map(alpha: f64, p: f64) -> f64 {
    let cover = CoverMap::luminance();
    cover.project(cover.lift(p.clamp(0.0, 1.0)).expect("clamped") + alpha)
}

/// Lifted coordinate grid for an `height × width` image: one covering angle
/// per axis sample.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpAngles {
    theta_x: Vec<f64>,
    theta_y: Vec<f64>,
}

impl WarpAngles {
    /// Identity warp: lifted normalized pixel-center coordinates.
    pub fn identity(height: usize, width: usize) -> Self {
        let cover = CoverMap::luminance();
        let norm = |i: usize, n: usize| {
            if n <= 1 {
                0.0
            } else {
                i as f64 / (n - 1) as f64
            }
        };
        Self {
            theta_x: (0..width)
                .map(|i| cover.lift(norm(i, width)).expect("in range"))
                .collect(),
            theta_y: (0..height)
                .map(|i| cover.lift(norm(i, height)).expect("in range"))
                .collect(),
        }
    }

    /// Advances both coordinate angle fields by the element's angle.
    pub fn apply(&self, alpha: GroupElement) -> Self {
        self.apply_angle(alpha.angle())
    }

    pub fn apply_angle(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        for t in out.theta_x.iter_mut().chain(out.theta_y.iter_mut()) {
            *t = (*t + alpha).rem_euclid(TAU);
        }
        out
    }

    /// Projected normalized coordinates (xs, ys).
    pub fn coords(&self) -> (Vec<f64>, Vec<f64>) {
        let cover = CoverMap::luminance();
        (
            self.theta_x.iter().map(|&t| cover.project(t)).collect(),
            self.theta_y.iter().map(|&t| cover.project(t)).collect(),
        )
    }

    pub fn max_coord_diff(&self, other: &Self) -> f64 {
        let (ax, ay) = self.coords();
        let (bx, by) = other.coords();
        ax.iter()
            .zip(&bx)
            .chain(ay.iter().zip(&by))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Bilinear sample with edge clamping at normalized coordinates.
fn bilinear(img: &RgbImage, xn: f64, yn: f64) -> [f64; 3] {
    let w = img.width();
    let h = img.height();
    let fx = (xn * (w - 1) as f64).clamp(0.0, (w - 1) as f64);
    let fy = (yn * (h - 1) as f64).clamp(0.0, (h - 1) as f64);
    let x0 = fx.floor() as usize;
    let y0 = fy.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let tx = fx - x0 as f64;
    let ty = fy - y0 as f64;
    let p = |x: usize, y: usize| img.pixel(y * w + x);
    let mut out = [0.0; 3];
    let (a, b, c, d) = (p(x0, y0), p(x1, y0), p(x0, y1), p(x1, y1));
    for ch in 0..3 {
        let top = a[ch] * (1.0 - tx) + b[ch] * tx;
        let bot = c[ch] * (1.0 - tx) + d[ch] * tx;
        out[ch] = top * (1.0 - ty) + bot * ty;
    }
    out
}

/// Resamples `img` through the warp: output pixel at grid position (i, j)
/// reads the input at the warp's projected coordinates.
pub fn resample_with_warp(img: &RgbImage, warp: &WarpAngles) -> RgbImage {
    let (xs, ys) = warp.coords();
    let mut out = RgbImage::zeros(img.height(), img.width());
    for (j, &yn) in ys.iter().enumerate() {
        for (i, &xn) in xs.iter().enumerate() {
            out.set_pixel(j * img.width() + i, bilinear(img, xn, yn));
        }
    }
    out
}

/// Scale action on an image: pulls back through the coordinate map of the
/// inverse element and resamples bilinearly.
pub fn scale_action(alpha: GroupElement, img: &RgbImage) -> RgbImage {
    let warp = WarpAngles::identity(img.height(), img.width()).apply(alpha.inverse());
    resample_with_warp(img, &warp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_warp_resamples_to_input() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let data: Vec<f64> = (0..8 * 8 * 3).map(|_| rng.gen()).collect();
        let img = RgbImage::from_data(8, 8, data).unwrap();
        let g = scale_group(4);
        let out = scale_action(g.identity(), &img);
        assert!(out.max_abs_diff(&img) <= 1e-9);
    }

    #[test]
    fn coordinate_maps_compose_exactly() {
        let g = scale_group(6);
        let warp = WarpAngles::identity(16, 16);
        let a = g.element(2);
        let b = g.element(5);
        let seq = warp.apply(b).apply(a);
        let direct = warp.apply(a.compose(&b));
        assert!(seq.max_coord_diff(&direct) <= 1e-12);
    }

    #[test]
    fn orbit_closure_on_coordinates() {
        let g = scale_group(5);
        let id = WarpAngles::identity(12, 12);
        let mut warp = id.clone();
        for _ in 0..5 {
            warp = warp.apply(g.element(1));
        }
        assert!(warp.max_coord_diff(&id) <= 1e-12);
    }

    #[test]
    fn single_shot_map_agrees_with_warp_on_fresh_coords() {
        let g = scale_group(8);
        let alpha = g.element(3);
        let warp = WarpAngles::identity(1, 11).apply(alpha);
        let (xs, _) = warp.coords();
        for (i, &x) in xs.iter().enumerate() {
            let p = i as f64 / 10.0;
            assert!((scale_coord_map(alpha.angle(), p) - x).abs() <= 1e-12);
        }
    }
}
