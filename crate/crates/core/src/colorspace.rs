//! RGB and HSL image containers and exact conversions between them.
//!
//! Pixels are 64-bit floats throughout; 8-bit quantization happens only at
//! the PPM boundary. Hue is stored in radians in `[0, 2π)`. Saturation and
//! luminance are interval values in `[0, 1]` at the API surface, but an
//! [`HslImage`] keeps them internally as angles on the covering circle so
//! that group actions compose exactly (see the `groups` module).

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::groups::cover::CoverMap;

/// One sixth of a full turn; hue sector width in radians.
const SECTOR: f64 = PI / 3.0;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("pixel data length {got} does not match {height}x{width}x3 = {want}")]
    BadLength {
        height: usize,
        width: usize,
        got: usize,
        want: usize,
    },
    #[error("channel value {value} out of range for {channel}")]
    OutOfRange { channel: &'static str, value: f64 },
}

/// Planar RGB image; components in `[0, 1]`, row-major interleaved (r, g, b).
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl RgbImage {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            data: vec![0.0; height * width * 3],
        }
    }

    pub fn from_data(height: usize, width: usize, data: Vec<f64>) -> Result<Self, ImageError> {
        let want = height * width * 3;
        if data.len() != want {
            return Err(ImageError::BadLength {
                height,
                width,
                got: data.len(),
                want,
            });
        }
        for &v in &data {
            if !(0.0..=1.0).contains(&v) {
                return Err(ImageError::OutOfRange {
                    channel: "rgb",
                    value: v,
                });
            }
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, idx: usize) -> [f64; 3] {
        [
            self.data[3 * idx],
            self.data[3 * idx + 1],
            self.data[3 * idx + 2],
        ]
    }

    pub fn set_pixel(&mut self, idx: usize, rgb: [f64; 3]) {
        self.data[3 * idx] = rgb[0];
        self.data[3 * idx + 1] = rgb[1];
        self.data[3 * idx + 2] = rgb[2];
    }

    /// Largest absolute componentwise difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Mean absolute componentwise difference to `other`.
    pub fn mean_abs_diff(&self, other: &Self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        let s: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .sum();
        s / self.data.len() as f64
    }
}

/// Peak signal-to-noise ratio between two images on the unit scale, in dB.
pub fn psnr(a: &RgbImage, b: &RgbImage) -> f64 {
    assert_eq!(a.data.len(), b.data.len(), "image shapes must match");
    let mse: f64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.data.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * mse.log10()
    }
}

/// HSL image. Saturation and luminance are held as angles on the covering
/// circle; the interval-valued channels visible through [`HslImage::pixel`]
/// are their projections. A freshly converted image carries the canonical
/// (principal-branch) angles, so reading channels back gives the standard
/// HSL values; group actions advance the angles directly and therefore
/// compose without losing the covering branch.
#[derive(Debug, Clone, PartialEq)]
pub struct HslImage {
    height: usize,
    width: usize,
    hue: Vec<f64>,
    sat_theta: Vec<f64>,
    lum_theta: Vec<f64>,
}

impl HslImage {
    /// Builds an image from interval-valued channels, lifting saturation and
    /// luminance onto their covers with the principal branch.
    pub fn from_channels(
        height: usize,
        width: usize,
        pixels: &[(f64, f64, f64)],
    ) -> Result<Self, ImageError> {
        let want = height * width;
        if pixels.len() != want {
            return Err(ImageError::BadLength {
                height,
                width,
                got: pixels.len() * 3,
                want: want * 3,
            });
        }
        let sat = CoverMap::saturation();
        let lum = CoverMap::luminance();
        let mut img = Self {
            height,
            width,
            hue: Vec::with_capacity(want),
            sat_theta: Vec::with_capacity(want),
            lum_theta: Vec::with_capacity(want),
        };
        for &(h, s, l) in pixels {
            if !(0.0..=1.0).contains(&s) {
                return Err(ImageError::OutOfRange {
                    channel: "saturation",
                    value: s,
                });
            }
            if !(0.0..=1.0).contains(&l) {
                return Err(ImageError::OutOfRange {
                    channel: "luminance",
                    value: l,
                });
            }
            img.hue.push(h.rem_euclid(TAU));
            img.sat_theta.push(sat.lift(s).expect("validated range"));
            img.lum_theta.push(lum.lift(l).expect("validated range"));
        }
        Ok(img)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    /// Interval-valued (h, s, l) at pixel `idx`.
    pub fn pixel(&self, idx: usize) -> (f64, f64, f64) {
        (
            self.hue[idx],
            CoverMap::saturation().project(self.sat_theta[idx]),
            CoverMap::luminance().project(self.lum_theta[idx]),
        )
    }

    pub fn hue(&self) -> &[f64] {
        &self.hue
    }

    pub(crate) fn hue_mut(&mut self) -> &mut [f64] {
        &mut self.hue
    }

    /// Covering-circle angles backing the saturation channel.
    pub fn sat_theta(&self) -> &[f64] {
        &self.sat_theta
    }

    pub(crate) fn sat_theta_mut(&mut self) -> &mut [f64] {
        &mut self.sat_theta
    }

    /// Covering-circle angles backing the luminance channel.
    pub fn lum_theta(&self) -> &[f64] {
        &self.lum_theta
    }

    pub(crate) fn lum_theta_mut(&mut self) -> &mut [f64] {
        &mut self.lum_theta
    }

    /// Largest absolute difference over the projected (h, s, l) channels,
    /// with hue compared on the circle.
    pub fn max_channel_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.pixel_count() {
            let (h0, s0, l0) = self.pixel(i);
            let (h1, s1, l1) = other.pixel(i);
            let dh = circular_diff(h0, h1);
            worst = worst.max(dh).max((s0 - s1).abs()).max((l0 - l1).abs());
        }
        worst
    }
}

/// Shortest angular distance between two angles in radians.
pub fn circular_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Converts one RGB pixel to (h, s, l) with the hexcone model.
/// Achromatic pixels get h = 0, s = 0.
pub fn rgb_pixel_to_hsl(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let l = (max + min) / 2.0;
    if max == min {
        return (0.0, 0.0, l);
    }
    let c = max - min;
    let s = c / (1.0 - (2.0 * l - 1.0).abs());
    let hp = if max == r {
        ((g - b) / c).rem_euclid(6.0)
    } else if max == g {
        (b - r) / c + 2.0
    } else {
        (r - g) / c + 4.0
    };
    ((hp * SECTOR).rem_euclid(TAU), s.clamp(0.0, 1.0), l)
}

/// Converts one (h, s, l) pixel to RGB with the hexcone model.
pub fn hsl_pixel_to_rgb(h: f64, s: f64, l: f64) -> [f64; 3] {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h.rem_euclid(TAU) / SECTOR;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r1, g1, b1) = match hp {
        v if v < 1.0 => (c, x, 0.0),
        v if v < 2.0 => (x, c, 0.0),
        v if v < 3.0 => (0.0, c, x),
        v if v < 4.0 => (0.0, x, c),
        v if v < 5.0 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    [
        (r1 + m).clamp(0.0, 1.0),
        (g1 + m).clamp(0.0, 1.0),
        (b1 + m).clamp(0.0, 1.0),
    ]
}

/// Converts an RGB image to HSL.
pub fn rgb_to_hsl(img: &RgbImage) -> HslImage {
    let pixels: Vec<(f64, f64, f64)> = (0..img.pixel_count())
        .map(|i| {
            let [r, g, b] = img.pixel(i);
            rgb_pixel_to_hsl(r, g, b)
        })
        .collect();
    HslImage::from_channels(img.height(), img.width(), &pixels).expect("conversion stays in range")
}

/// Converts an HSL image to RGB.
pub fn hsl_to_rgb(img: &HslImage) -> RgbImage {
    let mut out = RgbImage::zeros(img.height(), img.width());
    for i in 0..img.pixel_count() {
        let (h, s, l) = img.pixel(i);
        out.set_pixel(i, hsl_pixel_to_rgb(h, s, l));
    }
    out
}
