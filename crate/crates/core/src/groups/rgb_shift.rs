//! Cyclic shift actions on RGB channels via the interval cover.
//!
//! Each RGB channel lives on `[0, 1]` and is lifted with the saturation-style
//! cover, shifted on the circle, and projected back. [`RgbAngles`] keeps the
//! lifted angles so repeated shifts compose exactly; [`rgb_shift_action`] is
//! the single-application convenience on plain images.

use std::f64::consts::TAU;

use crate::colorspace::RgbImage;
use crate::groups::cover::CoverMap;
use crate::groups::cyclic::{CyclicGroup, GroupElement};

/// The product group `RGB_{NMR}` of per-channel cyclic shifts.
#[derive(Debug, Clone, Copy)]
pub struct RgbGroup {
    pub red: CyclicGroup,
    pub green: CyclicGroup,
    pub blue: CyclicGroup,
}

impl RgbGroup {
    pub fn new(n: usize, m: usize, r: usize) -> Self {
        Self {
            red: CyclicGroup::new(n),
            green: CyclicGroup::new(m),
            blue: CyclicGroup::new(r),
        }
    }

    pub fn element(&self, i: usize, j: usize, k: usize) -> RgbElement {
        RgbElement {
            red: self.red.element(i),
            green: self.green.element(j),
            blue: self.blue.element(k),
        }
    }

    pub fn size(&self) -> usize {
        self.red.order() * self.green.order() * self.blue.order()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RgbElement {
    pub red: GroupElement,
    pub green: GroupElement,
    pub blue: GroupElement,
}

impl RgbElement {
    pub fn compose(&self, other: &RgbElement) -> RgbElement {
        RgbElement {
            red: self.red.compose(&other.red),
            green: self.green.compose(&other.green),
            blue: self.blue.compose(&other.blue),
        }
    }

    pub fn inverse(&self) -> RgbElement {
        RgbElement {
            red: self.red.inverse(),
            green: self.green.inverse(),
            blue: self.blue.inverse(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.red.is_identity() && self.green.is_identity() && self.blue.is_identity()
    }
}

/// An RGB image lifted channelwise onto the covering circle.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbAngles {
    height: usize,
    width: usize,
    /// Interleaved (θr, θg, θb) per pixel.
    theta: Vec<f64>,
}

impl RgbAngles {
    pub fn lift(img: &RgbImage) -> Self {
        let cover = CoverMap::saturation();
        let theta = img
            .data()
            .iter()
            .map(|&v| cover.lift(v).expect("rgb components are in [0,1]"))
            .collect();
        Self {
            height: img.height(),
            width: img.width(),
            theta,
        }
    }

    pub fn project(&self) -> RgbImage {
        let cover = CoverMap::saturation();
        let data = self.theta.iter().map(|&t| cover.project(t)).collect();
        RgbImage::from_data(self.height, self.width, data).expect("projection stays in range")
    }

    /// Shifts the three channel angle fields by the element's angles.
    pub fn shift(&self, g: RgbElement) -> Self {
        let mut out = self.clone();
        let a = [g.red.angle(), g.green.angle(), g.blue.angle()];
        for (i, t) in out.theta.iter_mut().enumerate() {
            *t = (*t + a[i % 3]).rem_euclid(TAU);
        }
        out
    }

    pub fn max_theta_diff(&self, other: &Self) -> f64 {
        self.theta
            .iter()
            .zip(&other.theta)
            .map(|(a, b)| {
                let d = (a - b).rem_euclid(TAU);
                d.min(TAU - d)
            })
            .fold(0.0, f64::max)
    }
}

/// Single-application RGB shift on a plain image: lift channelwise with the
/// principal branch, shift, project.
pub fn rgb_shift_action(g: RgbElement, x: &RgbImage) -> RgbImage {
    RgbAngles::lift(x).shift(g).project()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_rgb(seed: u64, side: usize) -> RgbImage {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..side * side * 3).map(|_| rng.gen()).collect();
        RgbImage::from_data(side, side, data).unwrap()
    }

    #[test]
    fn identity_element_is_identity() {
        let x = random_rgb(1, 4);
        let g = RgbGroup::new(4, 4, 4);
        let y = rgb_shift_action(g.element(0, 0, 0), &x);
        assert!(x.max_abs_diff(&y) <= 1e-12);
    }

    #[test]
    fn antipodal_red_shift_flips_channel() {
        let x = RgbImage::from_data(1, 1, vec![0.8, 0.3, 0.6]).unwrap();
        let g = RgbGroup::new(2, 1, 1);
        let y = rgb_shift_action(g.element(1, 0, 0), &x);
        let [r, gg, b] = y.pixel(0);
        assert!((r - 0.2).abs() < 1e-12);
        assert!((gg - 0.3).abs() < 1e-12 && (b - 0.6).abs() < 1e-12);
    }

    #[test]
    fn lifted_shifts_compose_exactly() {
        let x = random_rgb(2, 5);
        let grp = RgbGroup::new(3, 4, 5);
        let lifted = RgbAngles::lift(&x);
        let a = grp.element(2, 1, 3);
        let b = grp.element(1, 3, 4);
        let seq = lifted.shift(b).shift(a);
        let direct = lifted.shift(a.compose(&b));
        assert!(seq.max_theta_diff(&direct) <= 1e-12);
    }

    #[test]
    fn lifted_orbit_closure() {
        let x = random_rgb(3, 4);
        let grp = RgbGroup::new(6, 1, 1);
        let mut lifted = RgbAngles::lift(&x);
        for _ in 0..6 {
            lifted = lifted.shift(grp.element(1, 0, 0));
        }
        assert!(lifted.project().max_abs_diff(&x) <= 1e-9);
    }
}
