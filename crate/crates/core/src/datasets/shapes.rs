//! Procedural color-shifted shapes: a desk-scale stand-in for rendered
//! 3D-shape datasets with controlled color splits.
//!
//! Each image is a wall/floor scene with one centered object of class
//! {square, circle, triangle}. Region colors come from warm or cold hue
//! pools (ten evenly spaced hues, warm = indices 0–4, cold = 5–9), with
//! optional saturation/luminance shifts applied through the double-cover
//! action so exact group-element specs commute with generation. All
//! randomness derives from `hash(seed, image_index)`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::colorspace::{hsl_pixel_to_rgb, RgbImage};
use crate::datasets::manifest::LabeledImageSet;
use crate::exec;
use crate::groups::cover::CoverMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ShapeClass {
    Square,
    Circle,
    Triangle,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 3] = [ShapeClass::Square, ShapeClass::Circle, ShapeClass::Triangle];

    pub fn label(self) -> usize {
        match self {
            ShapeClass::Square => 0,
            ShapeClass::Circle => 1,
            ShapeClass::Triangle => 2,
        }
    }

    pub fn names() -> Vec<String> {
        vec!["square".into(), "circle".into(), "triangle".into()]
    }
}

/// Hue pool per scene region: ten evenly spaced hues, warm half or cold half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum HuePool {
    Warm,
    Cold,
    Full,
}

impl HuePool {
    fn sample(self, rng: &mut ChaCha8Rng) -> f64 {
        let idx = match self {
            HuePool::Warm => rng.gen_range(0..5),
            HuePool::Cold => rng.gen_range(5..10),
            HuePool::Full => rng.gen_range(0..10),
        };
        TAU * idx as f64 / 10.0
    }
}

/// Channel shift applied to region colors after sampling.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum ShiftMode {
    None,
    /// Fixed interval fraction, mapped to the circle as `2π·t`.
    Fixed(f64),
    /// Multiples of the step, cycling with the image index.
    RegularMultiples(f64),
    /// Uniform random fraction per image.
    Random,
}

impl ShiftMode {
    fn angle(self, index: usize, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            ShiftMode::None => 0.0,
            ShiftMode::Fixed(t) => TAU * t,
            ShiftMode::RegularMultiples(step) => {
                let period = (1.0 / step).round().max(1.0) as usize;
                TAU * step * (index % period) as f64
            }
            ShiftMode::Random => TAU * rng.gen::<f64>(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ShapesConfig {
    pub count: usize,
    pub size: usize,
    pub object_pool: HuePool,
    pub floor_pool: HuePool,
    pub wall_pool: HuePool,
    pub hue_shift: ShiftMode,
    pub sat_shift: ShiftMode,
    pub lum_shift: ShiftMode,
    pub seed: u64,
}

impl ShapesConfig {
    pub fn new(count: usize, seed: u64) -> Self {
        Self {
            count,
            size: 64,
            object_pool: HuePool::Warm,
            floor_pool: HuePool::Warm,
            wall_pool: HuePool::Warm,
            hue_shift: ShiftMode::None,
            sat_shift: ShiftMode::None,
            lum_shift: ShiftMode::None,
            seed,
        }
    }
}

/// The standard split structure of the color-shift protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SplitKind {
    /// All regions warm (train / in-distribution test).
    HueA,
    /// All regions cold.
    HueB,
    /// Floor and wall warm, object cold.
    HueC,
    /// Original saturation.
    SatA,
    /// Regular saturation shifts of multiples of 0.125.
    SatB,
    /// Random saturation shifts.
    SatC,
    /// Random shifts in all of hue, saturation, luminance.
    HslRandom,
}

impl SplitKind {
    pub fn configure(self, count: usize, seed: u64) -> ShapesConfig {
        let mut cfg = ShapesConfig::new(count, seed);
        match self {
            SplitKind::HueA | SplitKind::SatA => {}
            SplitKind::HueB => {
                cfg.object_pool = HuePool::Cold;
                cfg.floor_pool = HuePool::Cold;
                cfg.wall_pool = HuePool::Cold;
            }
            SplitKind::HueC => {
                cfg.object_pool = HuePool::Cold;
            }
            SplitKind::SatB => {
                cfg.sat_shift = ShiftMode::RegularMultiples(0.125);
            }
            SplitKind::SatC => {
                cfg.sat_shift = ShiftMode::Random;
            }
            SplitKind::HslRandom => {
                cfg.hue_shift = ShiftMode::Random;
                cfg.sat_shift = ShiftMode::Random;
                cfg.lum_shift = ShiftMode::Random;
            }
        }
        cfg
    }
}

fn image_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 of (seed, index)
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy)]
struct Hsl {
    h: f64,
    s: f64,
    l: f64,
}

fn shift_color(c: Hsl, hue_a: f64, sat_a: f64, lum_a: f64) -> Hsl {
    let sat_cover = CoverMap::saturation();
    let lum_cover = CoverMap::luminance();
    Hsl {
        h: (c.h + hue_a).rem_euclid(TAU),
        s: sat_cover.project(sat_cover.lift(c.s).expect("in range") + sat_a),
        l: lum_cover.project(lum_cover.lift(c.l).expect("in range") + lum_a),
    }
}

fn render_one(cfg: &ShapesConfig, index: usize) -> (RgbImage, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(image_seed(cfg.seed, index));
    let size = cfg.size;
    let shape = ShapeClass::ALL[rng.gen_range(0..3)];

    let mut wall = Hsl {
        h: cfg.wall_pool.sample(&mut rng),
        s: rng.gen_range(0.55..0.9),
        l: rng.gen_range(0.45..0.65),
    };
    let mut floor = Hsl {
        h: cfg.floor_pool.sample(&mut rng),
        s: rng.gen_range(0.55..0.9),
        l: rng.gen_range(0.3..0.5),
    };
    let mut object = Hsl {
        h: cfg.object_pool.sample(&mut rng),
        s: rng.gen_range(0.6..0.95),
        l: rng.gen_range(0.35..0.6),
    };

    let hue_a = cfg.hue_shift.angle(index, &mut rng);
    let sat_a = cfg.sat_shift.angle(index, &mut rng);
    let lum_a = cfg.lum_shift.angle(index, &mut rng);
    wall = shift_color(wall, hue_a, sat_a, lum_a);
    floor = shift_color(floor, hue_a, sat_a, lum_a);
    object = shift_color(object, hue_a, sat_a, lum_a);

    let horizon = (size as f64 * rng.gen_range(0.5..0.62)) as usize;
    let cx = size as f64 * rng.gen_range(0.35..0.65);
    let cy = size as f64 * rng.gen_range(0.4..0.7);
    let radius = size as f64 * rng.gen_range(0.14..0.24);

    let mut data = Vec::with_capacity(size * size * 3);
    for y in 0..size {
        for x in 0..size {
            let (fx, fy) = (x as f64 + 0.5, y as f64 + 0.5);
            let inside = match shape {
                ShapeClass::Square => (fx - cx).abs() < radius && (fy - cy).abs() < radius,
                ShapeClass::Circle => {
                    (fx - cx) * (fx - cx) + (fy - cy) * (fy - cy) < radius * radius
                }
                ShapeClass::Triangle => {
                    let t = (fy - (cy - radius)) / (2.0 * radius);
                    (0.0..=1.0).contains(&t) && (fx - cx).abs() < t * radius
                }
            };
            let c = if inside {
                object
            } else if y < horizon {
                wall
            } else {
                floor
            };
            data.extend(hsl_pixel_to_rgb(c.h, c.s, c.l));
        }
    }
    (
        RgbImage::from_data(size, size, data).expect("rendered colors in range"),
        shape.label(),
    )
}

/// Generates the configured set, data-parallel across images.
pub fn generate_shapes(cfg: &ShapesConfig) -> LabeledImageSet {
    let rendered = exec::map_indexed(cfg.count, |i| render_one(cfg, i));
    collect(rendered)
}

/// Sequential twin of [`generate_shapes`], kept callable for benchmarks.
pub fn generate_shapes_seq(cfg: &ShapesConfig) -> LabeledImageSet {
    let rendered = exec::map_indexed_seq(cfg.count, |i| render_one(cfg, i));
    collect(rendered)
}

fn collect(rendered: Vec<(RgbImage, usize)>) -> LabeledImageSet {
    let mut images = Vec::with_capacity(rendered.len());
    let mut labels = Vec::with_capacity(rendered.len());
    for (img, label) in rendered {
        images.push(img);
        labels.push(label);
    }
    LabeledImageSet::new(images, labels, ShapeClass::names()).expect("labels in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorspace::rgb_to_hsl;
    use crate::groups::action::hue_action;
    use crate::groups::cyclic::CyclicGroup;

    #[test]
    fn deterministic_given_seed() {
        let cfg = ShapesConfig::new(6, 1999);
        let a = generate_shapes(&cfg);
        let b = generate_shapes(&cfg);
        assert_eq!(a.labels, b.labels);
        for (x, y) in a.images.iter().zip(&b.images) {
            assert_eq!(x.data(), y.data());
        }
        let c = generate_shapes(&ShapesConfig::new(6, 2000));
        let same_pixels = a
            .images
            .iter()
            .zip(&c.images)
            .all(|(x, y)| x.data() == y.data());
        assert!(!same_pixels, "different seeds must differ");
    }

    #[test]
    fn parallel_matches_sequential() {
        let cfg = ShapesConfig::new(5, 7);
        let a = generate_shapes(&cfg);
        let b = generate_shapes_seq(&cfg);
        for (x, y) in a.images.iter().zip(&b.images) {
            assert_eq!(x.data(), y.data());
        }
    }

    #[test]
    fn split_structure() {
        let a = SplitKind::HueA.configure(4, 3);
        let b = SplitKind::HueB.configure(4, 3);
        let c = SplitKind::HueC.configure(4, 3);
        assert_eq!(a.object_pool, HuePool::Warm);
        assert_eq!(b.object_pool, HuePool::Cold);
        assert_eq!(b.wall_pool, HuePool::Cold);
        assert_eq!(c.object_pool, HuePool::Cold);
        assert_eq!(c.wall_pool, HuePool::Warm);
        let sb = SplitKind::SatB.configure(4, 3);
        assert_eq!(sb.sat_shift, ShiftMode::RegularMultiples(0.125));
    }

    #[test]
    fn regular_sat_shifts_cycle_in_eighths() {
        let mode = ShiftMode::RegularMultiples(0.125);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for i in 0..16 {
            let a = mode.angle(i, &mut rng);
            assert!((a - TAU * 0.125 * (i % 8) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_hue_shift_commutes_with_generation() {
        // Shifting the spec hue by an exact group element equals acting on
        // the generated images with the same element.
        let n = 5;
        let element = CyclicGroup::new(n).element(2);
        let base = generate_shapes(&ShapesConfig::new(3, 11));
        let mut shifted_cfg = ShapesConfig::new(3, 11);
        shifted_cfg.hue_shift = ShiftMode::Fixed(2.0 / n as f64);
        let shifted = generate_shapes(&shifted_cfg);
        for (img, expect) in base.images.iter().zip(&shifted.images) {
            let acted = crate::colorspace::hsl_to_rgb(&hue_action(element, &rgb_to_hsl(img)));
            assert!(acted.max_abs_diff(expect) <= 1e-9);
        }
    }

    #[test]
    fn all_classes_appear() {
        let set = generate_shapes(&ShapesConfig::new(60, 5));
        let hist = set.class_histogram();
        assert_eq!(hist.len(), 3);
        assert!(hist.iter().all(|&c| c > 0), "{hist:?}");
    }
}
