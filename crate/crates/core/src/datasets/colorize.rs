//! Hue colorization of grayscale digit sets.
//!
//! Each image gets one hue drawn uniformly from a degree range; pixels map to
//! HSL as (h = sampled hue, s = 1, l = gray/2) so black stays black, then
//! convert to RGB. Generation is a pure function of (spec, seed).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::colorspace::{hsl_pixel_to_rgb, RgbImage};
use crate::datasets::idx::IdxTensor;
use crate::datasets::manifest::{LabeledImageSet, ManifestError};

/// Half-open hue range in degrees.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HueRange {
    pub lo_deg: f64,
    pub hi_deg: f64,
}

impl HueRange {
    pub fn new(lo_deg: f64, hi_deg: f64) -> Self {
        Self { lo_deg, hi_deg }
    }
}

/// Builds a grayscale labeled set from parsed IDX images and labels,
/// optionally box-downsampling by an integer factor.
pub fn gray_set_from_idx(
    images: &IdxTensor,
    labels: &IdxTensor,
    downsample: usize,
) -> Result<LabeledImageSet, ManifestError> {
    assert!(images.is_images(), "images tensor required");
    assert!(labels.is_labels(), "labels tensor required");
    let count = images.dims[0];
    let (h, w) = (images.dims[1], images.dims[2]);
    let f = downsample.max(1);
    let (oh, ow) = (h / f, w / f);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let src = &images.data[i * h * w..(i + 1) * h * w];
        let mut data = Vec::with_capacity(oh * ow * 3);
        for y in 0..oh {
            for x in 0..ow {
                let mut acc = 0.0;
                for dy in 0..f {
                    for dx in 0..f {
                        acc += src[(y * f + dy) * w + (x * f + dx)] as f64 / 255.0;
                    }
                }
                let v = acc / (f * f) as f64;
                data.extend([v, v, v]);
            }
        }
        out.push(RgbImage::from_data(oh, ow, data).expect("bytes map into range"));
    }
    let classes = (0..10).map(|d| d.to_string()).collect();
    LabeledImageSet::new(
        out,
        labels.data.iter().map(|&b| b as usize).collect(),
        classes,
    )
}

/// Colorizes a grayscale set with per-image hues from `range`. `count`
/// samples are drawn (with repetition when `count > set.len()`), each pairing
/// a source image with a fresh hue.
pub fn colorize_hue_shift(
    gray: &LabeledImageSet,
    range: HueRange,
    count: usize,
    seed: u64,
) -> LabeledImageSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        let idx = rng.gen_range(0..gray.len());
        let hue_deg = rng.gen_range(range.lo_deg..range.hi_deg.max(range.lo_deg + f64::EPSILON));
        let hue = hue_deg.to_radians();
        let src = &gray.images[idx];
        let mut data = Vec::with_capacity(src.data().len());
        for p in 0..src.pixel_count() {
            let gray_value = src.pixel(p)[0];
            let rgb = hsl_pixel_to_rgb(hue, 1.0, gray_value / 2.0);
            data.extend(rgb);
        }
        images.push(RgbImage::from_data(src.height(), src.width(), data).expect("in range"));
        labels.push(gray.labels[idx]);
    }
    LabeledImageSet::new(images, labels, gray.classes.clone()).expect("labels preserved")
}

/// Colorizes every image exactly once, preserving order, count, and labels.
pub fn colorize_all(gray: &LabeledImageSet, range: HueRange, seed: u64) -> LabeledImageSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images = gray
        .images
        .iter()
        .map(|src| {
            let hue_deg =
                rng.gen_range(range.lo_deg..range.hi_deg.max(range.lo_deg + f64::EPSILON));
            let hue = hue_deg.to_radians();
            let mut data = Vec::with_capacity(src.data().len());
            for p in 0..src.pixel_count() {
                let rgb = hsl_pixel_to_rgb(hue, 1.0, src.pixel(p)[0] / 2.0);
                data.extend(rgb);
            }
            RgbImage::from_data(src.height(), src.width(), data).expect("in range")
        })
        .collect();
    LabeledImageSet::new(images, gray.labels.clone(), gray.classes.clone())
        .expect("labels preserved")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::idx::{parse_idx, MAGIC_IMAGES, MAGIC_LABELS};

    fn gray_fixture() -> LabeledImageSet {
        let mut img_bytes = Vec::new();
        img_bytes.extend(MAGIC_IMAGES.to_be_bytes());
        img_bytes.extend(3u32.to_be_bytes());
        img_bytes.extend(2u32.to_be_bytes());
        img_bytes.extend(2u32.to_be_bytes());
        img_bytes.extend([0u8, 255, 128, 64, 10, 20, 30, 40, 0, 0, 255, 255]);
        let mut lab_bytes = Vec::new();
        lab_bytes.extend(MAGIC_LABELS.to_be_bytes());
        lab_bytes.extend(3u32.to_be_bytes());
        lab_bytes.extend([1u8, 2, 3]);
        gray_set_from_idx(
            &parse_idx(&img_bytes, "imgs").unwrap(),
            &parse_idx(&lab_bytes, "labs").unwrap(),
            1,
        )
        .unwrap()
    }

    #[test]
    fn red_range_colorizes_red() {
        let gray = gray_fixture();
        let colored = colorize_all(&gray, HueRange::new(0.0, 0.0), 9);
        // Pixel with gray 255 -> hsl(0, 1, 0.5) -> pure red.
        let [r, g, b] = colored.images[0].pixel(1);
        assert!((r - 1.0).abs() < 1e-12 && g.abs() < 1e-12 && b.abs() < 1e-12);
    }

    #[test]
    fn black_stays_black() {
        let gray = gray_fixture();
        let colored = colorize_all(&gray, HueRange::new(120.0, 240.0), 5);
        let [r, g, b] = colored.images[0].pixel(0);
        assert!(r.abs() < 1e-12 && g.abs() < 1e-12 && b.abs() < 1e-12);
    }

    #[test]
    fn equal_seeds_give_identical_sets() {
        let gray = gray_fixture();
        let a = colorize_hue_shift(&gray, HueRange::new(0.0, 120.0), 10, 42);
        let b = colorize_hue_shift(&gray, HueRange::new(0.0, 120.0), 10, 42);
        assert_eq!(a.labels, b.labels);
        for (x, y) in a.images.iter().zip(&b.images) {
            assert_eq!(x.data(), y.data());
        }
        let c = colorize_hue_shift(&gray, HueRange::new(0.0, 120.0), 10, 43);
        assert_ne!(
            a.images
                .iter()
                .flat_map(|i| i.data().to_vec())
                .collect::<Vec<_>>(),
            c.images
                .iter()
                .flat_map(|i| i.data().to_vec())
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn colorize_all_preserves_count_and_labels() {
        let gray = gray_fixture();
        let colored = colorize_all(&gray, HueRange::new(0.0, 360.0), 3);
        assert_eq!(colored.len(), gray.len());
        assert_eq!(colored.labels, gray.labels);
        assert_eq!(colored.class_histogram(), gray.class_histogram());
    }

    #[test]
    fn downsampling_box_means() {
        let mut img_bytes = Vec::new();
        img_bytes.extend(MAGIC_IMAGES.to_be_bytes());
        img_bytes.extend(1u32.to_be_bytes());
        img_bytes.extend(2u32.to_be_bytes());
        img_bytes.extend(2u32.to_be_bytes());
        img_bytes.extend([0u8, 255, 255, 0]);
        let mut lab_bytes = Vec::new();
        lab_bytes.extend(MAGIC_LABELS.to_be_bytes());
        lab_bytes.extend(1u32.to_be_bytes());
        lab_bytes.extend([0u8]);
        let set = gray_set_from_idx(
            &parse_idx(&img_bytes, "i").unwrap(),
            &parse_idx(&lab_bytes, "l").unwrap(),
            2,
        )
        .unwrap();
        assert_eq!(set.images[0].height(), 1);
        assert!((set.images[0].pixel(0)[0] - 0.5).abs() < 1e-12);
    }
}
