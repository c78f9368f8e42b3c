//! Equivariance and restoration error measurements.
//!
//! The harness compares the double-cover lifting against the
//! translation-with-clipping baseline. The error of a lifting map `f` under a
//! group element `g` is the ratio of global L1 norms
//! `‖f(φ(g,x)) − φ̃(g,f(x))‖₁ / ‖f(φ(g,x)) + φ̃(g,f(x))‖₁`, aggregated over
//! all entries of the rendered stacks. Baseline slots are lowered copies with
//! step `1/(M−1)`, its image action translates with clipping, and its
//! function action shifts with zero fill.

use std::f64::consts::TAU;

use crate::colorspace::{hsl_to_rgb, HslImage, RgbImage};
use crate::exec;
use crate::groups::action::{hsl_action, hue_action, lum_action, sat_action};
use crate::groups::baseline::{
    lcer_function_action, lcer_lift, lcer_step, translate_channel, Channel,
};
use crate::groups::cyclic::CyclicGroup;
use crate::nn::layers::{encode_planes, InputEncoding};
use crate::nn::network::Network;
use crate::nn::tensor::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ModelKind {
    DoubleCover,
    Lcer,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::DoubleCover => "double_cover",
            ModelKind::Lcer => "lcer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Axis {
    Hue,
    Sat,
    Lum,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Hue => "hue",
            Axis::Sat => "sat",
            Axis::Lum => "lum",
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EquivarianceResult {
    pub model: ModelKind,
    pub axis: Axis,
    pub order: usize,
    pub element: usize,
    pub error: f64,
    /// Set when the denominator vanished and the error was defined as 0.
    pub degenerate_norm: bool,
}

/// Ratio of global L1 norms of difference and sum over two equal-shape
/// stacks of rendered planes.
fn l1_ratio(a: &[Vec<f64>], b: &[Vec<f64>]) -> (f64, bool) {
    let mut num = 0.0;
    let mut den = 0.0;
    for (sa, sb) in a.iter().zip(b) {
        for (x, y) in sa.iter().zip(sb) {
            num += (x - y).abs();
            den += (x + y).abs();
        }
    }
    if den == 0.0 {
        (0.0, true)
    } else {
        (num / den, false)
    }
}

fn render(img: &HslImage) -> Vec<f64> {
    encode_planes::<f64>(img, InputEncoding::HslPlanes)
}

fn axis_lift(model: ModelKind, axis: Axis, order: usize, x: &HslImage) -> Vec<HslImage> {
    match (model, axis) {
        (_, Axis::Hue) => {
            let g = CyclicGroup::new(order);
            (0..order).map(|j| hue_action(g.element(j), x)).collect()
        }
        (ModelKind::DoubleCover, Axis::Sat) => {
            let g = CyclicGroup::new(order);
            (0..order).map(|j| sat_action(g.element(j), x)).collect()
        }
        (ModelKind::DoubleCover, Axis::Lum) => {
            let g = CyclicGroup::new(order);
            (0..order).map(|j| lum_action(g.element(j), x)).collect()
        }
        (ModelKind::Lcer, Axis::Sat) => lcer_lift(x, order, Channel::Sat),
        (ModelKind::Lcer, Axis::Lum) => lcer_lift(x, order, Channel::Lum),
    }
}

fn axis_image_action(
    model: ModelKind,
    axis: Axis,
    order: usize,
    k: usize,
    x: &HslImage,
) -> HslImage {
    match (model, axis) {
        (_, Axis::Hue) => hue_action(CyclicGroup::new(order).element(k), x),
        (ModelKind::DoubleCover, Axis::Sat) => sat_action(CyclicGroup::new(order).element(k), x),
        (ModelKind::DoubleCover, Axis::Lum) => lum_action(CyclicGroup::new(order).element(k), x),
        (ModelKind::Lcer, Axis::Sat) => {
            translate_channel(x, k as f64 * lcer_step(order), Channel::Sat)
        }
        (ModelKind::Lcer, Axis::Lum) => {
            translate_channel(x, k as f64 * lcer_step(order), Channel::Lum)
        }
    }
}

fn axis_function_action(model: ModelKind, k: usize, stack: &[HslImage]) -> Vec<HslImage> {
    match model {
        ModelKind::DoubleCover => {
            let m = stack.len();
            (0..m).map(|j| stack[(j + k) % m].clone()).collect()
        }
        ModelKind::Lcer => {
            let zero = zero_like(&stack[0]);
            lcer_function_action(k as i64, stack, zero)
        }
    }
}

/// The zero feature: renders to all-zero planes under the HSL encoding.
fn zero_like(img: &HslImage) -> HslImage {
    HslImage::from_channels(
        img.height(),
        img.width(),
        &vec![(0.0, 0.0, 0.0); img.pixel_count()],
    )
    .expect("zero image is valid")
}

fn render_stack(stack: &[HslImage]) -> Vec<Vec<f64>> {
    stack.iter().map(render).collect()
}

/// Equivariance error of the lifting map for one element.
pub fn equivariance_error(
    model: ModelKind,
    axis: Axis,
    order: usize,
    element: usize,
    x: &HslImage,
) -> EquivarianceResult {
    let lifted_of_transformed = render_stack(&axis_lift(
        model,
        axis,
        order,
        &axis_image_action(model, axis, order, element, x),
    ));
    let transformed_lift = render_stack(&axis_function_action(
        model,
        element,
        &axis_lift(model, axis, order, x),
    ));
    let (error, degenerate_norm) = l1_ratio(&lifted_of_transformed, &transformed_lift);
    EquivarianceResult {
        model,
        axis,
        order,
        element,
        error,
        degenerate_norm,
    }
}

/// Mean equivariance error per order, averaged over all non-identity
/// elements and all images; runs data-parallel over (image, element).
pub fn equivariance_scan(
    model: ModelKind,
    axis: Axis,
    orders: &[usize],
    images: &[HslImage],
) -> Vec<(usize, f64, Vec<EquivarianceResult>)> {
    orders
        .iter()
        .map(|&order| {
            let jobs: Vec<(usize, usize)> = (0..images.len())
                .flat_map(|i| (1..order).map(move |k| (i, k)))
                .collect();
            let results = exec::map_indexed(jobs.len(), |j| {
                let (i, k) = jobs[j];
                equivariance_error(model, axis, order, k, &images[i])
            });
            let mean = if results.is_empty() {
                0.0
            } else {
                results.iter().map(|r| r.error).sum::<f64>() / results.len() as f64
            };
            (order, mean, results)
        })
        .collect()
}

/// CSV rows `(model, axis, order, element, error)`.
pub fn equivariance_csv(scan: &[(usize, f64, Vec<EquivarianceResult>)]) -> String {
    let mut out = String::from("model,axis,order,element,error\n");
    for (_, _, results) in scan {
        for r in results {
            out.push_str(&format!(
                "{},{},{},{},{:.12}\n",
                r.model.name(),
                r.axis.name(),
                r.order,
                r.element,
                r.error
            ));
        }
    }
    out
}

/// JSON summary with the per-order means.
pub fn equivariance_summary_json(
    model: ModelKind,
    axis: Axis,
    scan: &[(usize, f64, Vec<EquivarianceResult>)],
) -> String {
    let means: Vec<serde_json::Value> = scan
        .iter()
        .map(|(order, mean, _)| serde_json::json!({"order": order, "mean_error": mean}))
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({
        "model": model.name(),
        "axis": axis.name(),
        "per_order": means,
    }))
    .expect("summary serializes")
}

/// Restoration error: shift down then up by an interval fraction `t` along
/// `axis`, and report the mean absolute RGB difference on the 8-bit scale.
/// The double-cover model composes the two shifts on the covering circle;
/// the baseline translates with clipping both ways.
pub fn lifting_restoration_error(model: ModelKind, axis: Axis, shift: f64, x: &RgbImage) -> f64 {
    let hsl = crate::colorspace::rgb_to_hsl(x);
    let angle = TAU * shift;
    let restored = match (model, axis) {
        (_, Axis::Hue) => shift_hue(&shift_hue(&hsl, -angle), angle),
        (ModelKind::DoubleCover, Axis::Sat) => {
            shift_cover(&shift_cover(&hsl, -angle, Channel::Sat), angle, Channel::Sat)
        }
        (ModelKind::DoubleCover, Axis::Lum) => {
            shift_cover(&shift_cover(&hsl, -angle, Channel::Lum), angle, Channel::Lum)
        }
        (ModelKind::Lcer, Axis::Sat) => {
            translate_channel(&translate_channel(&hsl, -shift, Channel::Sat), shift, Channel::Sat)
        }
        (ModelKind::Lcer, Axis::Lum) => {
            translate_channel(&translate_channel(&hsl, -shift, Channel::Lum), shift, Channel::Lum)
        }
    };
    hsl_to_rgb(&restored).mean_abs_diff(x) * 255.0
}

fn shift_hue(x: &HslImage, angle: f64) -> HslImage {
    let mut out = x.clone();
    for h in out.hue_mut() {
        *h = (*h + angle).rem_euclid(TAU);
    }
    out
}

fn shift_cover(x: &HslImage, angle: f64, channel: Channel) -> HslImage {
    let mut out = x.clone();
    match channel {
        Channel::Sat => {
            for t in out.sat_theta_mut() {
                *t = (*t + angle).rem_euclid(TAU);
            }
        }
        Channel::Lum => {
            for t in out.lum_theta_mut() {
                *t = (*t + angle).rem_euclid(TAU);
            }
        }
    }
    out
}

/// One row of the commutativity panel: the largest absolute difference per
/// layer between features of a transformed input and permuted features of
/// the original.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PanelRow {
    pub transform: String,
    pub per_layer_max_diff: Vec<f64>,
}

/// Compares every layer's feature map under exact group-element transforms
/// against the cyclically permuted originals; the last two entries are the
/// pooled-feature and logit differences, which group pooling makes invariant.
pub fn commutativity_panel<S: Scalar>(
    net: &Network<S>,
    x: &HslImage,
    transforms: &[crate::groups::cyclic::HslElement],
) -> Vec<PanelRow> {
    let base = net.forward_trace(x);
    transforms
        .iter()
        .map(|&g| {
            let shifted = net.forward_trace(&hsl_action(g, x));
            let (dn, dm, dr) = g.indices();
            let mut diffs = Vec::new();
            diffs.push(
                shifted
                    .lifted
                    .max_abs_diff(&base.lifted.shift_group(dn, dm, dr)),
            );
            for (s, b) in shifted.block_io.iter().zip(&base.block_io) {
                diffs.push(s.1.max_abs_diff(&b.1.shift_group(dn, dm, dr)));
            }
            diffs.push(
                shifted
                    .features
                    .iter()
                    .zip(&base.features)
                    .map(|(a, b)| (*a - *b).as_f64().abs())
                    .fold(0.0, f64::max),
            );
            diffs.push(
                shifted
                    .logits
                    .iter()
                    .zip(&base.logits)
                    .map(|(a, b)| (*a - *b).as_f64().abs())
                    .fold(0.0, f64::max),
            );
            PanelRow {
                transform: format!("g({dn},{dm},{dr})"),
                per_layer_max_diff: diffs,
            }
        })
        .collect()
}

/// CSV export of a commutativity panel; columns are layers.
pub fn panel_csv(rows: &[PanelRow]) -> String {
    let layers = rows.first().map_or(0, |r| r.per_layer_max_diff.len());
    let mut header = String::from("transform");
    for i in 0..layers {
        header.push_str(&format!(",layer{i}"));
    }
    header.push('\n');
    rows.iter().fold(header, |mut acc, r| {
        acc.push_str(&r.transform);
        for d in &r.per_layer_max_diff {
            acc.push_str(&format!(",{d:.3e}"));
        }
        acc.push('\n');
        acc
    })
}

/// Deterministic synthetic measurement images: smooth channel ramps plus
/// seeded shapes scenes.
pub fn measurement_images(count: usize, side: usize, seed: u64) -> Vec<HslImage> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        if i % 2 == 0 {
            let phase = i as f64 * 0.13;
            let pixels: Vec<(f64, f64, f64)> = (0..side * side)
                .map(|p| {
                    let (y, x) = (p / side, p % side);
                    let h = ((x as f64 / side as f64 + phase) % 1.0) * TAU;
                    let s = y as f64 / (side - 1).max(1) as f64;
                    let l = 0.25 + 0.5 * x as f64 / (side - 1).max(1) as f64;
                    (h, s, l)
                })
                .collect();
            out.push(HslImage::from_channels(side, side, &pixels).expect("ramps in range"));
        } else {
            let mut cfg =
                crate::datasets::shapes::ShapesConfig::new(1, seed.wrapping_add(i as u64));
            cfg.size = side;
            let set = crate::datasets::shapes::generate_shapes(&cfg);
            out.push(crate::colorspace::rgb_to_hsl(&set.images[0]));
        }
    }
    out
}
