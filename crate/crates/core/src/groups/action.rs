//! Group actions on HSL images and on group-indexed functions.
//!
//! Hue shifts add to the hue angle directly. Saturation and luminance shifts
//! advance the covering-circle angle that backs the channel, so repeated
//! actions compose exactly; on a freshly converted image this coincides with
//! lift–shift–project through the principal branch.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::colorspace::HslImage;
use crate::groups::cyclic::{GroupElement, HslElement};

#[derive(Debug, Error, PartialEq)]
pub enum ActionError {
    #[error("shift {shift} out of range for axis of order {order}")]
    ShiftOutOfRange { shift: usize, order: usize },
    #[error("axis order {got} does not match function axis length {want}")]
    AxisMismatch { got: usize, want: usize },
}

/// Rotates the hue channel by the element's angle; saturation and luminance
/// are untouched.
pub fn hue_action(h: GroupElement, x: &HslImage) -> HslImage {
    let mut out = x.clone();
    let a = h.angle();
    for v in out.hue_mut() {
        *v = (*v + a).rem_euclid(TAU);
    }
    out
}

/// Advances the saturation covering angle by the element's angle.
pub fn sat_action(s: GroupElement, x: &HslImage) -> HslImage {
    let mut out = x.clone();
    let a = s.angle();
    for v in out.sat_theta_mut() {
        *v = (*v + a).rem_euclid(TAU);
    }
    out
}

/// Advances the luminance covering angle by the element's angle.
pub fn lum_action(l: GroupElement, x: &HslImage) -> HslImage {
    let mut out = x.clone();
    let a = l.angle();
    for v in out.lum_theta_mut() {
        *v = (*v + a).rem_euclid(TAU);
    }
    out
}

/// Composite action φ_h ∘ φ_s ∘ φ_l of a product-group element.
pub fn hsl_action(g: HslElement, x: &HslImage) -> HslImage {
    let mut out = x.clone();
    apply_hsl_in_place(g, &mut out);
    out
}

pub(crate) fn apply_hsl_in_place(g: HslElement, x: &mut HslImage) {
    let (ah, asat, alum) = (g.hue.angle(), g.sat.angle(), g.lum.angle());
    for v in x.lum_theta_mut() {
        *v = (*v + alum).rem_euclid(TAU);
    }
    for v in x.sat_theta_mut() {
        *v = (*v + asat).rem_euclid(TAU);
    }
    for v in x.hue_mut() {
        *v = (*v + ah).rem_euclid(TAU);
    }
}

/// Axis of a group-indexed function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupAxis {
    Hue,
    Sat,
    Lum,
}

/// A function on the HSL group: values indexed by (i, j, k) with the
/// luminance index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupIndexedFunction<T> {
    n: usize,
    m: usize,
    r: usize,
    values: Vec<T>,
}

impl<T: Clone> GroupIndexedFunction<T> {
    pub fn new(n: usize, m: usize, r: usize, values: Vec<T>) -> Result<Self, ActionError> {
        if values.len() != n * m * r {
            return Err(ActionError::AxisMismatch {
                got: values.len(),
                want: n * m * r,
            });
        }
        Ok(Self { n, m, r, values })
    }

    pub fn axes(&self) -> (usize, usize, usize) {
        (self.n, self.m, self.r)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &T {
        &self.values[(i * self.m + j) * self.r + k]
    }

    fn axis_order(&self, axis: GroupAxis) -> usize {
        match axis {
            GroupAxis::Hue => self.n,
            GroupAxis::Sat => self.m,
            GroupAxis::Lum => self.r,
        }
    }

    /// Cyclic shift along `axis`: the slot at position `p` receives the value
    /// from position `(p + shift) mod order`.
    pub fn shift(&self, axis: GroupAxis, shift: usize) -> Result<Self, ActionError> {
        let order = self.axis_order(axis);
        if shift >= order {
            return Err(ActionError::ShiftOutOfRange { shift, order });
        }
        let mut values = self.values.clone();
        let (n, m, r) = (self.n, self.m, self.r);
        for i in 0..n {
            for j in 0..m {
                for k in 0..r {
                    let (si, sj, sk) = match axis {
                        GroupAxis::Hue => ((i + shift) % n, j, k),
                        GroupAxis::Sat => (i, (j + shift) % m, k),
                        GroupAxis::Lum => (i, j, (k + shift) % r),
                    };
                    values[(i * m + j) * r + k] =
                        self.values[(si * m + sj) * r + sk].clone();
                }
            }
        }
        Ok(Self {
            n,
            m,
            r,
            values,
        })
    }

    /// Composite cyclic shift by a product-group element.
    pub fn shift_hsl(&self, g: HslElement) -> Result<Self, ActionError> {
        self.shift(GroupAxis::Lum, g.lum.index())?
            .shift(GroupAxis::Sat, g.sat.index())?
            .shift(GroupAxis::Hue, g.hue.index())
    }

    /// Shift along `axis` with zero-fill instead of wraparound; `shift` may be
    /// negative. Slots with no source receive `zero`.
    pub fn shift_zero_fill(&self, axis: GroupAxis, shift: i64, zero: T) -> Self {
        let order = self.axis_order(axis) as i64;
        let mut values = vec![zero; self.values.len()];
        let (n, m, r) = (self.n, self.m, self.r);
        for i in 0..n {
            for j in 0..m {
                for k in 0..r {
                    let p = match axis {
                        GroupAxis::Hue => i,
                        GroupAxis::Sat => j,
                        GroupAxis::Lum => k,
                    } as i64;
                    let src = p + shift;
                    if !(0..order).contains(&src) {
                        continue;
                    }
                    let s = src as usize;
                    let (si, sj, sk) = match axis {
                        GroupAxis::Hue => (s, j, k),
                        GroupAxis::Sat => (i, s, k),
                        GroupAxis::Lum => (i, j, s),
                    };
                    values[(i * m + j) * r + k] =
                        self.values[(si * m + sj) * r + sk].clone();
                }
            }
        }
        Self {
            n,
            m,
            r,
            values,
        }
    }
}

/// Free-standing form of [`GroupIndexedFunction::shift`].
pub fn function_action<T: Clone>(
    axis: GroupAxis,
    shift: usize,
    f: &GroupIndexedFunction<T>,
) -> Result<GroupIndexedFunction<T>, ActionError> {
    f.shift(axis, shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorspace::{hsl_to_rgb, rgb_to_hsl, RgbImage};
    use crate::groups::cyclic::{CyclicGroup, HslGroup};
    use rand::{Rng, SeedableRng};

    fn random_image(seed: u64, side: usize) -> HslImage {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..side * side * 3).map(|_| rng.gen()).collect();
        rgb_to_hsl(&RgbImage::from_data(side, side, data).unwrap())
    }

    #[test]
    fn hue_identity_and_shift() {
        let x = random_image(1, 6);
        let g = CyclicGroup::new(4);
        assert!(hue_action(g.identity(), &x).max_channel_diff(&x) == 0.0);
        let pix = HslImage::from_channels(1, 1, &[(std::f64::consts::FRAC_PI_2, 0.5, 0.5)]).unwrap();
        let shifted = hue_action(g.element(1), &pix);
        assert!((shifted.pixel(0).0 - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn hue_orbit_closure() {
        let x = random_image(2, 6);
        let n = 5;
        let g = CyclicGroup::new(n);
        let mut y = x.clone();
        for _ in 0..n {
            y = hue_action(g.element(1), &y);
        }
        assert!(y.max_channel_diff(&x) <= 1e-9);
    }

    #[test]
    fn sat_action_antipode_flips_value() {
        let x = HslImage::from_channels(1, 1, &[(0.0, 0.8, 0.5)]).unwrap();
        let g = CyclicGroup::new(2);
        let y = sat_action(g.element(1), &x);
        assert!((y.pixel(0).1 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn sat_restoration_identity() {
        let x = random_image(3, 8);
        let g = CyclicGroup::new(7);
        for k in 0..7 {
            let s = g.element(k);
            let restored = sat_action(s.inverse(), &sat_action(s, &x));
            assert!(restored.max_channel_diff(&x) <= 1e-9);
        }
    }

    #[test]
    fn lum_restoration_and_full_cycle() {
        let x = random_image(4, 8);
        let g = CyclicGroup::new(5);
        for k in 0..5 {
            let l = g.element(k);
            let restored = lum_action(l.inverse(), &lum_action(l, &x));
            assert!(restored.max_channel_diff(&x) <= 1e-9);
        }
        let mut y = x.clone();
        for _ in 0..5 {
            y = lum_action(g.element(1), &y);
        }
        assert!(y.max_channel_diff(&x) <= 1e-9);
    }

    #[test]
    fn hsl_action_is_group_action() {
        let x = random_image(5, 6);
        let grp = HslGroup::new(3, 4, 5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = grp.element(rng.gen_range(0..3), rng.gen_range(0..4), rng.gen_range(0..5));
            let b = grp.element(rng.gen_range(0..3), rng.gen_range(0..4), rng.gen_range(0..5));
            let lhs = hsl_action(a, &hsl_action(b, &x));
            let rhs = hsl_action(a.compose(&b), &x);
            assert!(lhs.max_channel_diff(&rhs) <= 1e-9);
        }
        assert!(hsl_action(grp.identity(), &x).max_channel_diff(&x) == 0.0);
    }

    #[test]
    fn pure_hue_element_reduces_to_hue_action() {
        let x = random_image(6, 6);
        let grp = HslGroup::new(4, 3, 3);
        let g = grp.element(2, 0, 0);
        let via_product = hsl_action(g, &x);
        let via_hue = hue_action(grp.hue().element(2), &x);
        assert!(via_product.max_channel_diff(&via_hue) == 0.0);
    }

    #[test]
    fn action_matches_lift_shift_project_on_fresh_images() {
        // On a freshly converted image the stored angle is the principal
        // branch, so the action agrees with explicit lift-shift-project.
        let x = random_image(7, 4);
        let g = CyclicGroup::new(8);
        let y = sat_action(g.element(3), &x);
        let cover = crate::groups::cover::CoverMap::saturation();
        for i in 0..x.pixel_count() {
            let (_, s, _) = x.pixel(i);
            let theta = cover.lift(s).unwrap();
            let expect = cover.project(theta + g.element(3).angle());
            assert!((y.pixel(i).1 - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn function_shift_composition_exhaustive() {
        for n in 1..=6 {
            let f = GroupIndexedFunction::new(n, 1, 1, (0..n).collect::<Vec<_>>()).unwrap();
            for a in 0..n {
                for b in 0..n {
                    let ab = f
                        .shift(GroupAxis::Hue, a)
                        .unwrap()
                        .shift(GroupAxis::Hue, b)
                        .unwrap();
                    let direct = f.shift(GroupAxis::Hue, (a + b) % n).unwrap();
                    assert_eq!(ab, direct);
                }
            }
        }
    }

    #[test]
    fn function_shift_identity_and_bounds() {
        let f = GroupIndexedFunction::new(2, 3, 1, (0..6).collect::<Vec<_>>()).unwrap();
        assert_eq!(f.shift(GroupAxis::Sat, 0).unwrap(), f);
        assert_eq!(
            f.shift(GroupAxis::Sat, 3),
            Err(ActionError::ShiftOutOfRange { shift: 3, order: 3 })
        );
        // N unit shifts return to the start
        let mut g = f.clone();
        for _ in 0..3 {
            g = g.shift(GroupAxis::Sat, 1).unwrap();
        }
        assert_eq!(g, f);
    }

    #[test]
    fn round_trip_rgb_after_action_stays_in_range() {
        let x = random_image(8, 5);
        let grp = HslGroup::new(4, 4, 4);
        for g in grp.elements() {
            let rgb = hsl_to_rgb(&hsl_action(g, &x));
            for &v in rgb.data() {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
