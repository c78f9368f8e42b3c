//! Convolution, pooling, and classifier layers with hand-written backprop.
//!
//! Spatial convolution is 2D cross-correlation with zero-fill "same" padding.
//! Group convolution combines it with circular (or, for the translation
//! baseline, zero-padded) correlation along the three group axes.

use crate::colorspace::{hsl_pixel_to_rgb, HslImage};
use crate::groups::action::hsl_action;
use crate::groups::baseline::{lcer_step, translate_channel, Channel};
use crate::groups::cyclic::HslGroup;

use super::tensor::{FeatureMap, Scalar};

/// 2D cross-correlation of a multi-channel input with one filter, accumulated
/// into a single output plane. Same padding, zero fill.
pub fn xcorr2d_accum<S: Scalar>(
    inp: &[S],
    cin: usize,
    h: usize,
    w: usize,
    ker: &[S],
    kh: usize,
    kw: usize,
    out: &mut [S],
) {
    debug_assert_eq!(inp.len(), cin * h * w);
    debug_assert_eq!(ker.len(), cin * kh * kw);
    debug_assert_eq!(out.len(), h * w);
    let (ch, cw) = (kh / 2, kw / 2);
    for c in 0..cin {
        let plane = &inp[c * h * w..(c + 1) * h * w];
        for ky in 0..kh {
            let dy = ky as isize - ch as isize;
            for kx in 0..kw {
                let dx = kx as isize - cw as isize;
                let wgt = ker[(c * kh + ky) * kw + kx];
                if wgt == S::zero() {
                    continue;
                }
                let y0 = 0.max(-dy) as usize;
                let y1 = (h as isize).min(h as isize - dy) as usize;
                let x0 = 0.max(-dx) as usize;
                let x1 = (w as isize).min(w as isize - dx) as usize;
                for y in y0..y1 {
                    let sy = (y as isize + dy) as usize;
                    let sx = (x0 as isize + dx) as usize;
                    let src = &plane[sy * w + sx..sy * w + sx + (x1 - x0)];
                    let dst = &mut out[y * w + x0..y * w + x1];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += wgt * *s;
                    }
                }
            }
        }
    }
}

/// Adjoint of [`xcorr2d_accum`] with respect to the input: scatters an output
/// gradient plane back through one filter into the input gradient.
pub fn xcorr2d_input_grad<S: Scalar>(
    gout: &[S],
    h: usize,
    w: usize,
    ker: &[S],
    cin: usize,
    kh: usize,
    kw: usize,
    ginp: &mut [S],
) {
    debug_assert_eq!(gout.len(), h * w);
    debug_assert_eq!(ginp.len(), cin * h * w);
    let (ch, cw) = (kh / 2, kw / 2);
    for c in 0..cin {
        let gplane = &mut ginp[c * h * w..(c + 1) * h * w];
        for ky in 0..kh {
            let dy = ky as isize - ch as isize;
            for kx in 0..kw {
                let dx = kx as isize - cw as isize;
                let wgt = ker[(c * kh + ky) * kw + kx];
                if wgt == S::zero() {
                    continue;
                }
                let y0 = 0.max(-dy) as usize;
                let y1 = (h as isize).min(h as isize - dy) as usize;
                let x0 = 0.max(-dx) as usize;
                let x1 = (w as isize).min(w as isize - dx) as usize;
                for y in y0..y1 {
                    let sy = (y as isize + dy) as usize;
                    let sx = (x0 as isize + dx) as usize;
                    let dst = &mut gplane[sy * w + sx..sy * w + sx + (x1 - x0)];
                    let src = &gout[y * w + x0..y * w + x1];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += wgt * *s;
                    }
                }
            }
        }
    }
}

/// Adjoint of [`xcorr2d_accum`] with respect to the filter.
pub fn xcorr2d_weight_grad<S: Scalar>(
    inp: &[S],
    cin: usize,
    h: usize,
    w: usize,
    gout: &[S],
    kh: usize,
    kw: usize,
    gker: &mut [S],
) {
    debug_assert_eq!(gker.len(), cin * kh * kw);
    let (ch, cw) = (kh / 2, kw / 2);
    for c in 0..cin {
        let plane = &inp[c * h * w..(c + 1) * h * w];
        for ky in 0..kh {
            let dy = ky as isize - ch as isize;
            for kx in 0..kw {
                let dx = kx as isize - cw as isize;
                let y0 = 0.max(-dy) as usize;
                let y1 = (h as isize).min(h as isize - dy) as usize;
                let x0 = 0.max(-dx) as usize;
                let x1 = (w as isize).min(w as isize - dx) as usize;
                let mut acc = S::zero();
                for y in y0..y1 {
                    let sy = (y as isize + dy) as usize;
                    let sx = (x0 as isize + dx) as usize;
                    let src = &plane[sy * w + sx..sy * w + sx + (x1 - x0)];
                    let g = &gout[y * w + x0..y * w + x1];
                    for (s, gg) in src.iter().zip(g) {
                        acc += *s * *gg;
                    }
                }
                gker[(c * kh + ky) * kw + kx] += acc;
            }
        }
    }
}

/// Standalone planar convolution of a (C, H, W) input with a (K, C, kh, kw)
/// bank, producing (K, H, W). Panics on shape mismatch.
pub fn planar_conv2d<S: Scalar>(
    inp: &[S],
    cin: usize,
    h: usize,
    w: usize,
    bank: &[S],
    kout: usize,
    kh: usize,
    kw: usize,
) -> Vec<S> {
    assert_eq!(inp.len(), cin * h * w, "input shape mismatch");
    assert_eq!(bank.len(), kout * cin * kh * kw, "bank shape mismatch");
    assert!(kh % 2 == 1 && kw % 2 == 1, "kernel must be odd-sized");
    let mut out = vec![S::zero(); kout * h * w];
    for ko in 0..kout {
        xcorr2d_accum(
            inp,
            cin,
            h,
            w,
            &bank[ko * cin * kh * kw..(ko + 1) * cin * kh * kw],
            kh,
            kw,
            &mut out[ko * h * w..(ko + 1) * h * w],
        );
    }
    out
}

/// How input images are rendered into channel planes for convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum InputEncoding {
    /// Planes (h / 2π, s, l).
    HslPlanes,
    /// Planes (r, g, b).
    RgbPlanes,
    /// Planes (r − ½, g − ½, b − ½).
    RgbCentered,
}

/// Which lifting the first layer uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LiftKind {
    /// Exact cyclic lifting through the double cover.
    DoubleCover,
    /// Translation baseline: hue stays cyclic; saturation and luminance slots
    /// are clipped translations lowered by `i/(order−1)` and feature shifts
    /// zero-fill.
    LcerTranslate,
}

/// Renders an HSL image into `encoding` channel planes.
pub fn encode_planes<S: Scalar>(img: &HslImage, encoding: InputEncoding) -> Vec<S> {
    let np = img.pixel_count();
    let mut out = vec![S::zero(); 3 * np];
    match encoding {
        InputEncoding::HslPlanes => {
            for i in 0..np {
                let (h, s, l) = img.pixel(i);
                out[i] = S::from_f64(h / std::f64::consts::TAU);
                out[np + i] = S::from_f64(s);
                out[2 * np + i] = S::from_f64(l);
            }
        }
        InputEncoding::RgbPlanes | InputEncoding::RgbCentered => {
            let off = if encoding == InputEncoding::RgbCentered {
                0.5
            } else {
                0.0
            };
            for i in 0..np {
                let (h, s, l) = img.pixel(i);
                let rgb = hsl_pixel_to_rgb(h, s, l);
                out[i] = S::from_f64(rgb[0] - off);
                out[np + i] = S::from_f64(rgb[1] - off);
                out[2 * np + i] = S::from_f64(rgb[2] - off);
            }
        }
    }
    out
}

/// Produces the lifted image for group slot (i, j, k) under the chosen lift.
pub fn lift_slot(x: &HslImage, group: &HslGroup, lift: LiftKind, i: usize, j: usize, k: usize) -> HslImage {
    match lift {
        LiftKind::DoubleCover => hsl_action(group.element(i, j, k), x),
        LiftKind::LcerTranslate => {
            let mut img = crate::groups::action::hue_action(group.hue().element(i), x);
            let m = group.sat().order();
            if m > 1 {
                img = translate_channel(&img, -(j as f64) * lcer_step(m), Channel::Sat);
            }
            let r = group.lum().order();
            if r > 1 {
                img = translate_channel(&img, -(k as f64) * lcer_step(r), Channel::Lum);
            }
            img
        }
    }
}

/// First layer: lifts the input over the group and convolves each slot with a
/// planar filter bank.
#[derive(Debug, Clone)]
pub struct LiftingConv<S: Scalar> {
    pub kout: usize,
    pub cin: usize,
    pub kh: usize,
    pub kw: usize,
    /// (kout, cin, kh, kw)
    pub weights: Vec<S>,
    pub bias: Vec<S>,
}

impl<S: Scalar> LiftingConv<S> {
    /// Forward over precomputed slot planes; returns the group feature map.
    pub fn forward(&self, planes: &[Vec<S>], group: &HslGroup, h: usize, w: usize) -> FeatureMap<S> {
        let (n, m, r) = group.orders();
        let mut out = FeatureMap::zeros(n, m, r, self.kout, h, w);
        let fiber = out.fiber_len();
        crate::exec::for_each_chunk(&mut out.data, fiber, |g, slot| {
            for ko in 0..self.kout {
                let ker = &self.weights[ko * self.cin * self.kh * self.kw
                    ..(ko + 1) * self.cin * self.kh * self.kw];
                let plane_out = &mut slot[ko * h * w..(ko + 1) * h * w];
                xcorr2d_accum(&planes[g], self.cin, h, w, ker, self.kh, self.kw, plane_out);
                let b = self.bias[ko];
                for v in plane_out.iter_mut() {
                    *v += b;
                }
            }
        });
        out
    }

    /// Accumulates weight and bias gradients from the output gradient.
    pub fn backward(
        &self,
        planes: &[Vec<S>],
        gout: &FeatureMap<S>,
        gw: &mut [S],
        gb: &mut [S],
    ) {
        let (h, w) = (gout.height, gout.width);
        for g in 0..gout.group_size() {
            let gslot = gout.slot(g);
            for ko in 0..self.kout {
                let gplane = &gslot[ko * h * w..(ko + 1) * h * w];
                xcorr2d_weight_grad(
                    &planes[g],
                    self.cin,
                    h,
                    w,
                    gplane,
                    self.kh,
                    self.kw,
                    &mut gw[ko * self.cin * self.kh * self.kw
                        ..(ko + 1) * self.cin * self.kh * self.kw],
                );
                let mut acc = S::zero();
                for v in gplane {
                    acc += *v;
                }
                gb[ko] += acc;
            }
        }
    }
}

/// Per-axis correlation mode of the group convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisMode {
    Cyclic,
    ZeroPad,
}

/// Group convolution layer over (hue, sat, lum) axes plus 2D space.
#[derive(Debug, Clone)]
pub struct GroupConv<S: Scalar> {
    pub kout: usize,
    pub kin: usize,
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub kh: usize,
    pub kw: usize,
    pub modes: [AxisMode; 3],
    /// (kout, n, m, r, kin, kh, kw)
    pub weights: Vec<S>,
    pub bias: Vec<S>,
}

impl<S: Scalar> GroupConv<S> {
    fn ker_slice(&self, ko: usize, d1: usize, d2: usize, d3: usize) -> &[S] {
        let stride = self.kin * self.kh * self.kw;
        let idx = (((ko * self.n + d1) * self.m + d2) * self.r + d3) * stride;
        &self.weights[idx..idx + stride]
    }

    /// Group-axis offset `a − r` under the axis mode; `None` when the
    /// zero-padded offset falls outside the filter support.
    fn offset(order: usize, mode: AxisMode, a: usize, r: usize) -> Option<usize> {
        match mode {
            AxisMode::Cyclic => Some((a + order - r) % order),
            AxisMode::ZeroPad => {
                let d = a as isize - r as isize;
                if (0..order as isize).contains(&d) {
                    Some(d as usize)
                } else {
                    None
                }
            }
        }
    }

    pub fn forward(&self, f: &FeatureMap<S>) -> FeatureMap<S> {
        assert_eq!(
            (f.n, f.m, f.r, f.channels),
            (self.n, self.m, self.r, self.kin),
            "group/channel axes of input and filter bank must match"
        );
        let (h, w) = (f.height, f.width);
        let mut out = FeatureMap::zeros(self.n, self.m, self.r, self.kout, h, w);
        let fiber = out.fiber_len();
        crate::exec::for_each_chunk(&mut out.data, fiber, |a, slot| {
            let (a1, rem) = (a / (self.m * self.r), a % (self.m * self.r));
            let (a2, a3) = (rem / self.r, rem % self.r);
            for r1 in 0..self.n {
                let Some(d1) = Self::offset(self.n, self.modes[0], a1, r1) else {
                    continue;
                };
                for r2 in 0..self.m {
                    let Some(d2) = Self::offset(self.m, self.modes[1], a2, r2) else {
                        continue;
                    };
                    for r3 in 0..self.r {
                        let Some(d3) = Self::offset(self.r, self.modes[2], a3, r3) else {
                            continue;
                        };
                        let src = f.slot((r1 * self.m + r2) * self.r + r3);
                        for ko in 0..self.kout {
                            xcorr2d_accum(
                                src,
                                self.kin,
                                h,
                                w,
                                self.ker_slice(ko, d1, d2, d3),
                                self.kh,
                                self.kw,
                                &mut slot[ko * h * w..(ko + 1) * h * w],
                            );
                        }
                    }
                }
            }
            for ko in 0..self.kout {
                let b = self.bias[ko];
                for v in slot[ko * h * w..(ko + 1) * h * w].iter_mut() {
                    *v += b;
                }
            }
        });
        out
    }

    /// Backward pass: fills the input gradient and accumulates filter and
    /// bias gradients.
    pub fn backward(
        &self,
        f_in: &FeatureMap<S>,
        gout: &FeatureMap<S>,
        gw: &mut [S],
        gb: &mut [S],
    ) -> FeatureMap<S> {
        let (h, w) = (f_in.height, f_in.width);
        let mut gin = FeatureMap::zeros(self.n, self.m, self.r, self.kin, h, w);
        let fiber_in = gin.fiber_len();
        // Input gradient: slot r accumulates from every output slot a.
        crate::exec::for_each_chunk(&mut gin.data, fiber_in, |rf, gslot| {
            let (r1, rem) = (rf / (self.m * self.r), rf % (self.m * self.r));
            let (r2, r3) = (rem / self.r, rem % self.r);
            for a1 in 0..self.n {
                let Some(d1) = Self::offset(self.n, self.modes[0], a1, r1) else {
                    continue;
                };
                for a2 in 0..self.m {
                    let Some(d2) = Self::offset(self.m, self.modes[1], a2, r2) else {
                        continue;
                    };
                    for a3 in 0..self.r {
                        let Some(d3) = Self::offset(self.r, self.modes[2], a3, r3) else {
                            continue;
                        };
                        let go = gout.slot((a1 * self.m + a2) * self.r + a3);
                        for ko in 0..self.kout {
                            xcorr2d_input_grad(
                                &go[ko * h * w..(ko + 1) * h * w],
                                h,
                                w,
                                self.ker_slice(ko, d1, d2, d3),
                                self.kin,
                                self.kh,
                                self.kw,
                                gslot,
                            );
                        }
                    }
                }
            }
        });
        // Filter gradient: offsets partition the (a, r) pairs.
        let stride = self.kin * self.kh * self.kw;
        let dlen = self.n * self.m * self.r;
        for dflat in 0..dlen {
            let (d1, rem) = (dflat / (self.m * self.r), dflat % (self.m * self.r));
            let (d2, d3) = (rem / self.r, rem % self.r);
            for a1 in 0..self.n {
                let Some(r1) = Self::source(self.n, self.modes[0], a1, d1) else {
                    continue;
                };
                for a2 in 0..self.m {
                    let Some(r2) = Self::source(self.m, self.modes[1], a2, d2) else {
                        continue;
                    };
                    for a3 in 0..self.r {
                        let Some(r3) = Self::source(self.r, self.modes[2], a3, d3) else {
                            continue;
                        };
                        let src = f_in.slot((r1 * self.m + r2) * self.r + r3);
                        let go = gout.slot((a1 * self.m + a2) * self.r + a3);
                        for ko in 0..self.kout {
                            xcorr2d_weight_grad(
                                src,
                                self.kin,
                                h,
                                w,
                                &go[ko * h * w..(ko + 1) * h * w],
                                self.kh,
                                self.kw,
                                &mut gw[(((ko * self.n + d1) * self.m + d2) * self.r + d3) * stride
                                    ..(((ko * self.n + d1) * self.m + d2) * self.r + d3) * stride
                                        + stride],
                            );
                        }
                    }
                }
            }
        }
        for slot in gout.data.chunks(gout.fiber_len()) {
            for ko in 0..self.kout {
                let mut acc = S::zero();
                for v in &slot[ko * h * w..(ko + 1) * h * w] {
                    acc += *v;
                }
                gb[ko] += acc;
            }
        }
        gin
    }

    /// Inverse of [`Self::offset`]: source slot index r with `a − r = d`.
    fn source(order: usize, mode: AxisMode, a: usize, d: usize) -> Option<usize> {
        match mode {
            AxisMode::Cyclic => Some((a + order - d) % order),
            AxisMode::ZeroPad => {
                let r = a as isize - d as isize;
                if (0..order as isize).contains(&r) {
                    Some(r as usize)
                } else {
                    None
                }
            }
        }
    }
}

/// In-place ReLU; returns nothing, backward masks on the stored output.
pub fn relu_forward<S: Scalar>(f: &mut FeatureMap<S>) {
    for v in f.data.iter_mut() {
        if *v < S::zero() {
            *v = S::zero();
        }
    }
}

pub fn relu_backward<S: Scalar>(out: &FeatureMap<S>, gout: &mut FeatureMap<S>) {
    for (g, o) in gout.data.iter_mut().zip(&out.data) {
        if *o <= S::zero() {
            *g = S::zero();
        }
    }
}

/// 2×2 stride-2 spatial max pool; trailing odd rows/columns are dropped.
/// Returns the pooled map and the flat argmax index per output cell.
pub fn maxpool2_forward<S: Scalar>(f: &FeatureMap<S>) -> (FeatureMap<S>, Vec<usize>) {
    let (h, w) = (f.height, f.width);
    let (oh, ow) = (h / 2, w / 2);
    let mut out = FeatureMap::zeros(f.n, f.m, f.r, f.channels, oh, ow);
    let mut arg = vec![0usize; out.data.len()];
    let planes = f.group_size() * f.channels;
    for p in 0..planes {
        let src = &f.data[p * h * w..(p + 1) * h * w];
        let dst_off = p * oh * ow;
        for y in 0..oh {
            for x in 0..ow {
                let mut best = src[2 * y * w + 2 * x];
                let mut bi = 2 * y * w + 2 * x;
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let idx = (2 * y + dy) * w + 2 * x + dx;
                    if src[idx] > best {
                        best = src[idx];
                        bi = idx;
                    }
                }
                out.data[dst_off + y * ow + x] = best;
                arg[dst_off + y * ow + x] = p * h * w + bi;
            }
        }
    }
    (out, arg)
}

pub fn maxpool2_backward<S: Scalar>(
    f_shape: &FeatureMap<S>,
    gout: &FeatureMap<S>,
    arg: &[usize],
) -> FeatureMap<S> {
    let mut gin = FeatureMap::zeros(
        f_shape.n,
        f_shape.m,
        f_shape.r,
        f_shape.channels,
        f_shape.height,
        f_shape.width,
    );
    for (i, &src) in arg.iter().enumerate() {
        gin.data[src] += gout.data[i];
    }
    gin
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum GroupPoolMode {
    Max,
    Mean,
}

/// Reduction over all three group axes, producing a (channels, h, w) tensor.
/// Max mode breaks ties toward the first slot in (i, j, k) order, which makes
/// the pooled output exactly invariant under slot permutations.
pub fn group_pool_forward<S: Scalar>(
    f: &FeatureMap<S>,
    mode: GroupPoolMode,
) -> (Vec<S>, Option<Vec<usize>>) {
    let fiber = f.fiber_len();
    let g = f.group_size();
    let mut out = vec![S::zero(); fiber];
    match mode {
        GroupPoolMode::Mean => {
            // Summation runs in sorted value order so the mean is bitwise
            // invariant under slot permutations.
            let inv = S::from_f64(1.0 / g as f64);
            let mut fiber_vals = vec![S::zero(); g];
            for (i, o) in out.iter_mut().enumerate() {
                for (gi, fv) in fiber_vals.iter_mut().enumerate() {
                    *fv = f.data[gi * fiber + i];
                }
                fiber_vals.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                let mut acc = S::zero();
                for v in &fiber_vals {
                    acc += *v;
                }
                *o = acc * inv;
            }
            (out, None)
        }
        GroupPoolMode::Max => {
            let mut arg = vec![0usize; fiber];
            out.copy_from_slice(f.slot(0));
            for gi in 1..g {
                let slot = f.slot(gi);
                for (i, v) in slot.iter().enumerate() {
                    if *v > out[i] {
                        out[i] = *v;
                        arg[i] = gi;
                    }
                }
            }
            (out, Some(arg))
        }
    }
}

pub fn group_pool_backward<S: Scalar>(
    f_shape: &FeatureMap<S>,
    gout: &[S],
    mode: GroupPoolMode,
    arg: Option<&[usize]>,
) -> FeatureMap<S> {
    let mut gin = FeatureMap::zeros(
        f_shape.n,
        f_shape.m,
        f_shape.r,
        f_shape.channels,
        f_shape.height,
        f_shape.width,
    );
    let fiber = gin.fiber_len();
    match mode {
        GroupPoolMode::Mean => {
            let inv = S::from_f64(1.0 / gin.group_size() as f64);
            for g in 0..gin.group_size() {
                let slot = gin.slot_mut(g);
                for (s, go) in slot.iter_mut().zip(gout) {
                    *s = *go * inv;
                }
            }
        }
        GroupPoolMode::Max => {
            let arg = arg.expect("max pool stores argmax");
            for i in 0..fiber {
                let g = arg[i];
                gin.data[g * fiber + i] = gout[i];
            }
        }
    }
    gin
}

/// Mean over the spatial axes of a (channels, h, w) tensor.
pub fn spatial_mean<S: Scalar>(t: &[S], channels: usize, hw: usize) -> Vec<S> {
    let inv = S::from_f64(1.0 / hw as f64);
    (0..channels)
        .map(|c| {
            let mut acc = S::zero();
            for v in &t[c * hw..(c + 1) * hw] {
                acc += *v;
            }
            acc * inv
        })
        .collect()
}

pub fn spatial_mean_backward<S: Scalar>(gout: &[S], channels: usize, hw: usize) -> Vec<S> {
    let inv = S::from_f64(1.0 / hw as f64);
    let mut gin = vec![S::zero(); channels * hw];
    for c in 0..channels {
        let g = gout[c] * inv;
        for v in gin[c * hw..(c + 1) * hw].iter_mut() {
            *v = g;
        }
    }
    gin
}

/// Affine classifier head.
#[derive(Debug, Clone)]
pub struct Affine<S: Scalar> {
    pub out_dim: usize,
    pub in_dim: usize,
    /// (out_dim, in_dim)
    pub weights: Vec<S>,
    pub bias: Vec<S>,
}

impl<S: Scalar> Affine<S> {
    pub fn forward(&self, x: &[S]) -> Vec<S> {
        (0..self.out_dim)
            .map(|o| {
                let mut acc = self.bias[o];
                let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
                for (wv, xv) in row.iter().zip(x) {
                    acc += *wv * *xv;
                }
                acc
            })
            .collect()
    }

    pub fn backward(&self, x: &[S], gout: &[S], gw: &mut [S], gb: &mut [S]) -> Vec<S> {
        let mut gin = vec![S::zero(); self.in_dim];
        for o in 0..self.out_dim {
            let g = gout[o];
            gb[o] += g;
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let grow = &mut gw[o * self.in_dim..(o + 1) * self.in_dim];
            for i in 0..self.in_dim {
                grow[i] += g * x[i];
                gin[i] += row[i] * g;
            }
        }
        gin
    }
}

/// Numerically stable softmax cross-entropy; returns the loss and the
/// gradient with respect to the logits.
pub fn softmax_xent<S: Scalar>(logits: &[S], label: usize) -> (f64, Vec<S>) {
    let max = logits
        .iter()
        .map(|v| v.as_f64())
        .fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v.as_f64() - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    let loss = -(exps[label] / z).ln();
    let grad = exps
        .iter()
        .enumerate()
        .map(|(i, &e)| S::from_f64(e / z - if i == label { 1.0 } else { 0.0 }))
        .collect();
    (loss, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn delta_kernel_is_identity() {
        let inp: Vec<f64> = (0..25).map(|i| i as f64).collect();
        let mut ker = vec![0.0; 9];
        ker[4] = 1.0;
        let out = planar_conv2d(&inp, 1, 5, 5, &ker, 1, 3, 3);
        assert_eq!(out, inp);
    }

    #[test]
    fn ones_kernel_counts_interior() {
        let inp = vec![1.0f64; 36];
        let ker = vec![1.0; 9];
        let out = planar_conv2d(&inp, 1, 6, 6, &ker, 1, 3, 3);
        assert_eq!(out[7], 9.0); // interior
        assert_eq!(out[0], 4.0); // corner sees 2x2 window
    }

    #[test]
    fn translation_equivariance_in_interior() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let h = 8;
        let w = 8;
        let inp: Vec<f64> = (0..h * w).map(|_| rng.gen()).collect();
        let ker: Vec<f64> = (0..9).map(|_| rng.gen::<f64>() - 0.5).collect();
        // Shift input down by one row.
        let mut shifted = vec![0.0; h * w];
        for y in 1..h {
            for x in 0..w {
                shifted[y * w + x] = inp[(y - 1) * w + x];
            }
        }
        let a = planar_conv2d(&inp, 1, h, w, &ker, 1, 3, 3);
        let b = planar_conv2d(&shifted, 1, h, w, &ker, 1, 3, 3);
        // Away from borders, outputs shift the same way.
        for y in 2..h - 2 {
            for x in 2..w - 2 {
                assert!((b[y * w + x] - a[(y - 1) * w + x]).abs() < 1e-12);
            }
        }
    }

    #[test]
    #[should_panic(expected = "shape mismatch")]
    fn planar_conv_rejects_bad_shapes() {
        planar_conv2d(&[0.0f64; 10], 1, 5, 5, &[0.0; 9], 1, 3, 3);
    }

    fn random_gc(seed: u64, modes: [AxisMode; 3]) -> (GroupConv<f64>, FeatureMap<f64>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (n, m, r, kin, kout, h, w) = (2, 2, 2, 2, 2, 4, 4);
        let weights: Vec<f64> = (0..kout * n * m * r * kin * 9)
            .map(|_| rng.gen::<f64>() - 0.5)
            .collect();
        let bias: Vec<f64> = (0..kout).map(|_| rng.gen::<f64>() - 0.5).collect();
        let gc = GroupConv {
            kout,
            kin,
            n,
            m,
            r,
            kh: 3,
            kw: 3,
            modes,
            weights,
            bias,
        };
        let mut f = FeatureMap::zeros(n, m, r, kin, h, w);
        for v in f.data.iter_mut() {
            *v = rng.gen::<f64>() - 0.5;
        }
        (gc, f)
    }

    #[test]
    fn group_delta_filter_is_identity() {
        // Filter = group delta at the identity offset with a spatial delta.
        let (n, m, r, k) = (2, 3, 2, 2);
        let mut weights = vec![0.0f64; k * n * m * r * k * 9];
        let stride = k * 9;
        for ko in 0..k {
            // offset (0,0,0), cin == ko, center tap
            let idx = (((ko * n) * m) * r) * stride + ko * 9 + 4;
            weights[idx] = 1.0;
        }
        let gc = GroupConv {
            kout: k,
            kin: k,
            n,
            m,
            r,
            kh: 3,
            kw: 3,
            modes: [AxisMode::Cyclic; 3],
            weights,
            bias: vec![0.0; k],
        };
        let mut f = FeatureMap::zeros(n, m, r, k, 3, 3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for v in f.data.iter_mut() {
            *v = rng.gen();
        }
        let out = gc.forward(&f);
        assert!(out.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn cyclic_equivariance_bitwise_scale() {
        let (gc, f) = random_gc(17, [AxisMode::Cyclic; 3]);
        for (dn, dm, dr) in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)] {
            let a = gc.forward(&f.shift_group(dn, dm, dr));
            let b = gc.forward(&f).shift_group(dn, dm, dr);
            assert!(a.max_abs_diff(&b) <= 1e-10);
        }
    }

    #[test]
    fn constant_along_axis_stays_constant() {
        let (gc, mut f) = random_gc(23, [AxisMode::Cyclic; 3]);
        // Make f constant along the hue axis.
        let half = f.data.len() / 2;
        let (a, b) = f.data.split_at_mut(half);
        b.copy_from_slice(a);
        let out = gc.forward(&f);
        let diff = out.max_abs_diff(&out.shift_group(1, 0, 0));
        assert!(diff <= 1e-10, "{diff}");
    }

    #[test]
    fn zero_pad_breaks_cyclicity() {
        let (gc, f) = random_gc(29, [AxisMode::Cyclic, AxisMode::ZeroPad, AxisMode::Cyclic]);
        let a = gc.forward(&f.shift_group(0, 1, 0));
        let b = gc.forward(&f).shift_group(0, 1, 0);
        assert!(a.max_abs_diff(&b) > 1e-6);
    }

    #[test]
    fn relu_and_pools_roundtrip_gradients() {
        let mut f = FeatureMap::<f64>::zeros(1, 1, 1, 1, 4, 4);
        for (i, v) in f.data.iter_mut().enumerate() {
            *v = (i as f64) - 7.5;
        }
        let (pooled, arg) = maxpool2_forward(&f);
        assert_eq!(pooled.height, 2);
        let mut gout = pooled.clone();
        gout.data.iter_mut().for_each(|v| *v = 1.0);
        let gin = maxpool2_backward(&f, &gout, &arg);
        assert_eq!(gin.data.iter().sum::<f64>(), 4.0);
    }

    #[test]
    fn group_pool_invariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let mut f = FeatureMap::<f64>::zeros(2, 3, 2, 2, 3, 3);
        for v in f.data.iter_mut() {
            *v = rng.gen();
        }
        for mode in [GroupPoolMode::Max, GroupPoolMode::Mean] {
            let (base, _) = group_pool_forward(&f, mode);
            for dn in 0..2 {
                for dm in 0..3 {
                    for dr in 0..2 {
                        let (shifted, _) = group_pool_forward(&f.shift_group(dn, dm, dr), mode);
                        assert_eq!(base, shifted);
                    }
                }
            }
        }
    }

    #[test]
    fn group_pool_max_takes_hot_entry() {
        let mut f = FeatureMap::<f64>::zeros(2, 2, 1, 1, 1, 1);
        f.data = vec![0.1, 0.9, 0.3, 0.2];
        let (out, arg) = group_pool_forward(&f, GroupPoolMode::Max);
        assert_eq!(out, vec![0.9]);
        assert_eq!(arg.unwrap(), vec![1]);
    }

    #[test]
    fn softmax_xent_gradient_sums_to_zero() {
        let (loss, grad) = softmax_xent(&[1.0f64, 2.0, -0.5], 1);
        assert!(loss > 0.0);
        assert!(grad.iter().sum::<f64>().abs() < 1e-12);
        assert!(grad[1] < 0.0);
    }
}
