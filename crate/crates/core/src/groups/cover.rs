//! Double covers of the unit interval by the circle.
//!
//! Interval-valued channels have no group structure; projecting the circle
//! two-to-one onto the interval gives them one. Two parameterizations are
//! used: the saturation cover `u(θ) = c/2 + (c/2)·sin θ` and the luminance
//! cover `u(θ) = c·|sin(θ/2)|`. Every interior value has exactly two circle
//! preimages; the extrema have one.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CoverError {
    #[error("value {value} outside the cover domain [0, {bound}]")]
    OutOfDomain { value: f64, bound: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CoverKind {
    Saturation,
    Luminance,
}

/// A double cover π of the interval `[0, c]` by the circle, together with its
/// canonical (principal-branch) inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverMap {
    kind: CoverKind,
    c: f64,
}

impl CoverMap {
    pub fn saturation() -> Self {
        Self {
            kind: CoverKind::Saturation,
            c: 1.0,
        }
    }

    pub fn luminance() -> Self {
        Self {
            kind: CoverKind::Luminance,
            c: 1.0,
        }
    }

    pub fn of_kind(kind: CoverKind) -> Self {
        match kind {
            CoverKind::Saturation => Self::saturation(),
            CoverKind::Luminance => Self::luminance(),
        }
    }

    pub fn kind(&self) -> CoverKind {
        self.kind
    }

    /// Upper bound `c` of the covered interval.
    pub fn bound(&self) -> f64 {
        self.c
    }

    /// Projects a circle angle onto the interval; total on all reals.
    pub fn project(&self, theta: f64) -> f64 {
        let t = theta.rem_euclid(TAU);
        match self.kind {
            CoverKind::Saturation => self.c / 2.0 + (self.c / 2.0) * t.sin(),
            CoverKind::Luminance => self.c * (t / 2.0).sin().abs(),
        }
    }

    /// Canonical preimage of an interval value, in `[0, 2π)`.
    pub fn lift(&self, v: f64) -> Result<f64, CoverError> {
        if !(0.0..=self.c).contains(&v) {
            return Err(CoverError::OutOfDomain {
                value: v,
                bound: self.c,
            });
        }
        Ok(match self.kind {
            CoverKind::Saturation => (2.0 * v / self.c - 1.0).asin().rem_euclid(TAU),
            CoverKind::Luminance => 2.0 * (v / self.c).asin(),
        })
    }

    /// All distinct circle preimages of `v` in `[0, 2π)`: two in the interior,
    /// one at each extremum.
    pub fn preimages(&self, v: f64) -> Result<Vec<f64>, CoverError> {
        let a = self.lift(v)?;
        let b = match self.kind {
            CoverKind::Saturation => (PI - a).rem_euclid(TAU),
            CoverKind::Luminance => (TAU - a).rem_euclid(TAU),
        };
        if (a - b).abs() < 1e-12 || (TAU - (a - b).abs()) < 1e-12 {
            Ok(vec![a])
        } else {
            Ok(vec![a, b])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FRAC_PI_6: f64 = PI / 6.0;

    #[test]
    fn saturation_projection_examples() {
        let m = CoverMap::saturation();
        assert!((m.project(0.0) - 0.5).abs() < 1e-15);
        assert!((m.project(PI / 2.0) - 1.0).abs() < 1e-15);
        // 0.5 + 0.5·sin(7π/6) = 0.5 − 0.25
        assert!((m.project(7.0 * PI / 6.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn saturation_lift_examples() {
        let m = CoverMap::saturation();
        assert!((m.lift(0.5).unwrap() - 0.0).abs() < 1e-15);
        assert!((m.lift(1.0).unwrap() - PI / 2.0).abs() < 1e-15);
        // arcsin(−0.5) = −π/6, normalized into [0, 2π)
        assert!((m.lift(0.25).unwrap() - (TAU - FRAC_PI_6)).abs() < 1e-12);
    }

    #[test]
    fn lift_rejects_out_of_domain() {
        let m = CoverMap::saturation();
        assert!(m.lift(-0.01).is_err());
        assert!(m.lift(1.01).is_err());
        assert!(CoverMap::luminance().lift(2.0).is_err());
    }

    #[test]
    fn luminance_lift_range_and_projection() {
        let m = CoverMap::luminance();
        let t = m.lift(1.0).unwrap();
        assert!((t - PI).abs() < 1e-15);
        assert!((m.project(t) - 1.0).abs() < 1e-15);
        assert_eq!(m.lift(0.0).unwrap(), 0.0);
    }

    #[test]
    fn preimage_counts() {
        for m in [CoverMap::saturation(), CoverMap::luminance()] {
            assert_eq!(m.preimages(0.0).unwrap().len(), 1, "{:?} at 0", m.kind());
            assert_eq!(m.preimages(1.0).unwrap().len(), 1, "{:?} at 1", m.kind());
            for v in [0.1, 0.25, 0.5, 0.9] {
                let pre = m.preimages(v).unwrap();
                assert_eq!(pre.len(), 2, "{:?} at {v}", m.kind());
                for t in pre {
                    assert!((m.project(t) - v).abs() < 1e-12);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn project_after_lift_is_identity(v in 0.0f64..=1.0) {
            for m in [CoverMap::saturation(), CoverMap::luminance()] {
                let t = m.lift(v).unwrap();
                prop_assert!((m.project(t) - v).abs() <= 1e-12);
                prop_assert!((0.0..TAU).contains(&t) || (t - TAU).abs() < 1e-15);
            }
        }

        #[test]
        fn projection_stays_in_interval(theta in -10.0f64..10.0) {
            for m in [CoverMap::saturation(), CoverMap::luminance()] {
                let v = m.project(theta);
                prop_assert!((-1e-15..=1.0 + 1e-15).contains(&v));
            }
        }
    }
}
