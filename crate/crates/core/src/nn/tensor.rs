//! Scalar abstraction and the group-indexed feature-map tensor.

use num_traits::{Float, NumAssign, NumCast};

/// Floating-point element type for network tensors. Training typically runs
/// in `f32`; verification suites instantiate `f64`.
pub trait Scalar:
    Float + NumAssign + NumCast + Send + Sync + std::fmt::Debug + std::fmt::Display + Default + 'static
{
    const BITS: u32;

    fn from_f64(v: f64) -> Self {
        NumCast::from(v).expect("finite f64 converts")
    }

    fn as_f64(self) -> f64 {
        NumCast::from(self).expect("scalar converts to f64")
    }
}

impl Scalar for f32 {
    const BITS: u32 = 32;
}

impl Scalar for f64 {
    const BITS: u32 = 64;
}

/// Dense tensor over three group axes, a channel axis, and two spatial axes.
/// Layout is row-major in (g_hue, g_sat, g_lum, channel, y, x) with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<S: Scalar> {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> FeatureMap<S> {
    pub fn zeros(n: usize, m: usize, r: usize, channels: usize, height: usize, width: usize) -> Self {
        Self {
            n,
            m,
            r,
            channels,
            height,
            width,
            data: vec![S::zero(); n * m * r * channels * height * width],
        }
    }

    pub fn group_size(&self) -> usize {
        self.n * self.m * self.r
    }

    /// Elements per group slot: channels × height × width.
    pub fn fiber_len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    pub fn flat_group(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.m + j) * self.r + k
    }

    /// Slice holding one group slot.
    pub fn slot(&self, g: usize) -> &[S] {
        let f = self.fiber_len();
        &self.data[g * f..(g + 1) * f]
    }

    pub fn slot_mut(&mut self, g: usize) -> &mut [S] {
        let f = self.fiber_len();
        &mut self.data[g * f..(g + 1) * f]
    }

    /// Applies the composite cyclic shift (dn, dm, dr): output slot (i, j, k)
    /// receives input slot ((i+dn) mod n, (j+dm) mod m, (k+dr) mod r).
    pub fn shift_group(&self, dn: usize, dm: usize, dr: usize) -> Self {
        let mut out = Self::zeros(self.n, self.m, self.r, self.channels, self.height, self.width);
        let f = self.fiber_len();
        for i in 0..self.n {
            for j in 0..self.m {
                for k in 0..self.r {
                    let src = self.flat_group((i + dn) % self.n, (j + dm) % self.m, (k + dr) % self.r);
                    let dst = self.flat_group(i, j, k);
                    out.data[dst * f..(dst + 1) * f].copy_from_slice(&self.data[src * f..(src + 1) * f]);
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).as_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|a| a.as_f64().abs()).sum()
    }
}
