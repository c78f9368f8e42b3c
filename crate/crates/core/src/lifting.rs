//! Lifting layer and coverage analysis of the double-cover orbits.
//!
//! Lifting maps an image to a stack indexed by the HSL group, one transformed
//! copy per element. Coverage analysis measures how well an orbit of lifted
//! channel values spreads over the interval, using the entropy of the induced
//! partition, and picks group orders from data statistics.

use thiserror::Error;

use crate::colorspace::HslImage;
use crate::exec;
use crate::groups::action::hsl_action;
use crate::groups::cover::{CoverError, CoverMap};
use crate::groups::cyclic::HslGroup;

#[derive(Debug, Error)]
pub enum LiftingError {
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error("empty value list")]
    EmptyValues,
    #[error("empty candidate order list")]
    EmptyCandidates,
    #[error("histogram weights must be non-negative with positive sum")]
    BadHistogram,
}

/// Feature stack over the HSL group: entry (i, j, k) is `φ_hsl(g_ijk, x)`.
#[derive(Debug, Clone)]
pub struct LiftedStack {
    group: HslGroup,
    images: Vec<HslImage>,
}

impl LiftedStack {
    pub fn group(&self) -> HslGroup {
        self.group
    }

    pub fn images(&self) -> &[HslImage] {
        &self.images
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &HslImage {
        &self.images[self.group.flat_index(i, j, k)]
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// Lifts an image to a stack of `N·M·R` transformed copies.
pub fn lift_image(x: &HslImage, group: &HslGroup) -> LiftedStack {
    let elements: Vec<_> = group.elements().collect();
    let images = exec::map_indexed(elements.len(), |idx| hsl_action(elements[idx], x));
    LiftedStack {
        group: *group,
        images,
    }
}

/// Sequential twin of [`lift_image`], kept callable for benchmarks.
pub fn lift_image_seq(x: &HslImage, group: &HslGroup) -> LiftedStack {
    let elements: Vec<_> = group.elements().collect();
    let images = exec::map_indexed_seq(elements.len(), |idx| hsl_action(elements[idx], x));
    LiftedStack {
        group: *group,
        images,
    }
}

/// Orbit of an interval value under the order-`n` cyclic shift on the cover:
/// `[π(lift(v) + 2πj/n) for j = 0..n−1]`.
pub fn orbit_values(m: &CoverMap, v: f64, n: usize) -> Result<Vec<f64>, LiftingError> {
    let theta0 = m.lift(v)?;
    let step = std::f64::consts::TAU / n as f64;
    Ok((0..n).map(|j| m.project(theta0 + j as f64 * step)).collect())
}

/// Shannon entropy of the partition of `[0, c]` induced by `values`,
/// including the two boundary segments. Returns the entropy and the full
/// segment-length list. Zero-length segments contribute nothing.
pub fn partition_entropy(values: &[f64], c: f64) -> Result<(f64, Vec<f64>), LiftingError> {
    if values.is_empty() {
        return Err(LiftingError::EmptyValues);
    }
    let points = distinct_sorted(values);
    let mut segments = Vec::with_capacity(points.len() + 1);
    let mut prev = 0.0;
    for &p in &points {
        segments.push(p - prev);
        prev = p;
    }
    segments.push(c - prev);
    Ok((entropy_of_segments(&segments, c), segments))
}

/// Entropy of the interior segments only: the gaps between consecutive
/// distinct values, without the two boundary segments. This is the coverage
/// score behind the per-element density; a single distinct value has no
/// interior segment and scores zero.
pub fn interior_entropy(values: &[f64], c: f64) -> Result<f64, LiftingError> {
    if values.is_empty() {
        return Err(LiftingError::EmptyValues);
    }
    let points = distinct_sorted(values);
    let segments: Vec<f64> = points.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(entropy_of_segments(&segments, c))
}

fn entropy_of_segments(segments: &[f64], c: f64) -> f64 {
    -segments
        .iter()
        .filter(|&&s| s > 1e-15)
        .map(|&s| (s / c) * (s / c).ln())
        .sum::<f64>()
}

const DUPLICATE_TOL: f64 = 1e-9;

fn distinct_sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        if out.last().map_or(true, |&p| (x - p).abs() > DUPLICATE_TOL) {
            out.push(x);
        }
    }
    out
}

/// Coverage of one (input value, order) pair.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CoverageReport {
    pub input_value: f64,
    pub order: usize,
    /// Orbit values, sorted ascending (duplicates kept).
    pub lifted_values: Vec<f64>,
    /// Full partition segment lengths, boundary segments included.
    pub partition_segments: Vec<f64>,
    /// Entropy of the full partition.
    pub entropy: f64,
    /// Interior coverage entropy divided by the order.
    pub entropy_density: f64,
    /// True when the orbit repeats a value within 1e-9.
    pub degenerate: bool,
    pub distinct_count: usize,
}

/// Analyzes the orbit of `v` under the order-`n` lift on cover `m`.
pub fn coverage_report(m: &CoverMap, v: f64, n: usize) -> Result<CoverageReport, LiftingError> {
    let mut lifted = orbit_values(m, v, n)?;
    let distinct_count = distinct_sorted(&lifted).len();
    let (entropy, partition_segments) = partition_entropy(&lifted, m.bound())?;
    let density = interior_entropy(&lifted, m.bound())? / n as f64;
    lifted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(CoverageReport {
        input_value: v,
        order: n,
        lifted_values: lifted,
        partition_segments,
        entropy,
        entropy_density: density,
        degenerate: distinct_count < n,
        distinct_count,
    })
}

/// Reports over the cartesian product of `grid` values and `orders`.
pub fn coverage_grid(
    m: &CoverMap,
    grid: &[f64],
    orders: &[usize],
) -> Result<Vec<CoverageReport>, LiftingError> {
    let pairs: Vec<(f64, usize)> = grid
        .iter()
        .flat_map(|&v| orders.iter().map(move |&n| (v, n)))
        .collect();
    let reports = exec::map_indexed(pairs.len(), |idx| {
        let (v, n) = pairs[idx];
        coverage_report(m, v, n)
    });
    reports.into_iter().collect()
}

/// Sequential twin of [`coverage_grid`], kept callable for benchmarks.
pub fn coverage_grid_seq(
    m: &CoverMap,
    grid: &[f64],
    orders: &[usize],
) -> Result<Vec<CoverageReport>, LiftingError> {
    let pairs: Vec<(f64, usize)> = grid
        .iter()
        .flat_map(|&v| orders.iter().map(move |&n| (v, n)))
        .collect();
    let reports = exec::map_indexed_seq(pairs.len(), |idx| {
        let (v, n) = pairs[idx];
        coverage_report(m, v, n)
    });
    reports.into_iter().collect()
}

/// Uniform grid over `[0, c]` with the given step.
pub fn uniform_grid(c: f64, step: f64) -> Vec<f64> {
    let n = (c / step).round() as usize;
    (0..=n).map(|i| (i as f64 * step).min(c)).collect()
}

/// CSV rows `(value, order, entropy, entropy_density, degenerate, distinct_count)`.
pub fn coverage_csv(reports: &[CoverageReport]) -> String {
    let mut out = String::from("value,order,entropy,entropy_density,degenerate,distinct_count\n");
    for r in reports {
        out.push_str(&format!(
            "{:.6},{},{:.9},{:.9},{},{}\n",
            r.input_value, r.order, r.entropy, r.entropy_density, r.degenerate, r.distinct_count
        ));
    }
    out
}

/// Picks the candidate order with the highest histogram-weighted mean
/// coverage density; ties break toward the smaller order.
pub fn select_order(
    m: &CoverMap,
    histogram: &[(f64, f64)],
    candidates: &[usize],
) -> Result<usize, LiftingError> {
    if candidates.is_empty() {
        return Err(LiftingError::EmptyCandidates);
    }
    let total: f64 = histogram.iter().map(|&(_, w)| w).sum();
    if histogram.iter().any(|&(_, w)| w < 0.0) || total <= 0.0 {
        return Err(LiftingError::BadHistogram);
    }
    let mut best = (candidates[0], f64::NEG_INFINITY);
    let mut sorted: Vec<usize> = candidates.to_vec();
    sorted.sort_unstable();
    for &n in &sorted {
        let mut acc = 0.0;
        for &(v, w) in histogram {
            if w == 0.0 {
                continue;
            }
            acc += w * (interior_entropy(&orbit_values(m, v, n)?, m.bound())? / n as f64);
        }
        let mean = acc / total;
        if mean > best.1 {
            best = (n, mean);
        }
    }
    Ok(best.0)
}
