//! SGD training, evaluation, and finite-difference gradient verification.
//!
//! The batch gradient is the sum of per-sample gradients (classic delta-rule
//! SGD), so the reported learning rate applies to the summed gradient.
//! Shuffling and initialization derive from explicit seeds; given the same
//! seeds and data the run is deterministic.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::colorspace::HslImage;
use crate::exec;

use super::layers::softmax_xent;
use super::network::{Gradients, Network};
use super::tensor::Scalar;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("loss became non-finite at epoch {epoch}, batch {batch}")]
    NanLoss { epoch: usize, batch: usize },
    #[error("empty training set")]
    EmptySet,
}

/// One labeled training sample, pre-converted to the action domain.
#[derive(Debug, Clone)]
pub struct Sample {
    pub image: HslImage,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Hyper {
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            epochs: 5,
            batch: 128,
            seed: 1999,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub test_error: Option<f64>,
}

/// Summed loss and gradient over a batch; forward/backward per sample runs
/// data-parallel, the reduction is a fixed-order fold.
fn batch_grad<S: Scalar>(
    net: &Network<S>,
    batch: &[&Sample],
) -> (f64, usize, Gradients<S>) {
    let per_sample: Vec<(f64, usize, Gradients<S>)> = exec::map_indexed(batch.len(), |i| {
        let sample = batch[i];
        let trace = net.forward_trace(&sample.image);
        let (loss, dlogits) = softmax_xent(&trace.logits, sample.label);
        let mut grads = Gradients::zeros_like(net);
        net.backward(&trace, &dlogits, &mut grads);
        let correct = usize::from(argmax(&trace.logits) == sample.label);
        (loss, correct, grads)
    });
    let mut it = per_sample.into_iter();
    let (mut loss, mut correct, mut acc) = it.next().expect("non-empty batch");
    for (l, c, g) in it {
        loss += l;
        correct += c;
        acc.add_assign(&g);
    }
    (loss, correct, acc)
}

/// Sequential twin of [`batch_grad`], kept callable for benchmarks.
pub fn batch_grad_seq<S: Scalar>(net: &Network<S>, batch: &[&Sample]) -> (f64, Gradients<S>) {
    let mut total = 0.0;
    let mut grads = Gradients::zeros_like(net);
    for sample in batch {
        let trace = net.forward_trace(&sample.image);
        let (loss, dlogits) = softmax_xent(&trace.logits, sample.label);
        net.backward(&trace, &dlogits, &mut grads);
        total += loss;
    }
    (total, grads)
}

/// Batch forward pass (losses only), data-parallel across samples.
pub fn batch_loss<S: Scalar>(net: &Network<S>, batch: &[&Sample]) -> f64 {
    exec::map_indexed(batch.len(), |i| {
        let logits = net.logits(&batch[i].image);
        softmax_xent(&logits, batch[i].label).0
    })
    .iter()
    .sum()
}

/// Sequential twin of [`batch_loss`].
pub fn batch_loss_seq<S: Scalar>(net: &Network<S>, batch: &[&Sample]) -> f64 {
    batch
        .iter()
        .map(|s| softmax_xent(&net.logits(&s.image), s.label).0)
        .sum()
}

fn argmax<S: Scalar>(v: &[S]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Classification error rate in [0, 1], evaluated data-parallel.
pub fn evaluate<S: Scalar>(net: &Network<S>, samples: &[Sample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let wrong: usize = exec::map_indexed(samples.len(), |i| {
        usize::from(net.predict(&samples[i].image) != samples[i].label)
    })
    .iter()
    .sum();
    wrong as f64 / samples.len() as f64
}

/// Trains in place; returns per-epoch metrics. Aborts on non-finite loss.
pub fn train<S: Scalar>(
    net: &mut Network<S>,
    train_set: &[Sample],
    test_set: Option<&[Sample]>,
    hyper: Hyper,
) -> Result<Vec<EpochMetrics>, TrainError> {
    if train_set.is_empty() {
        return Err(TrainError::EmptySet);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let lr = S::from_f64(hyper.lr);
    let mut metrics = Vec::with_capacity(hyper.epochs);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut epoch_correct = 0usize;
        for (bi, chunk) in order.chunks(hyper.batch).enumerate() {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (loss, correct, grads) = batch_grad(net, &batch);
            if !loss.is_finite() {
                return Err(TrainError::NanLoss { epoch, batch: bi });
            }
            net.sgd_step(&grads, lr);
            epoch_loss += loss;
            epoch_correct += correct;
        }
        let test_error = test_set.map(|t| evaluate(net, t));
        metrics.push(EpochMetrics {
            epoch,
            train_loss: epoch_loss / train_set.len() as f64,
            train_accuracy: epoch_correct as f64 / train_set.len() as f64,
            test_error,
        });
    }
    Ok(metrics)
}

/// Central finite differences against analytic gradients over a random
/// parameter subset; returns the maximum relative error.
pub fn gradient_check<S: Scalar>(
    net: &mut Network<S>,
    sample: &Sample,
    n_params: usize,
    epsilon: f64,
    seed: u64,
) -> f64 {
    let trace = net.forward_trace(&sample.image);
    let (_, dlogits) = softmax_xent(&trace.logits, sample.label);
    let mut grads = Gradients::zeros_like(net);
    net.backward(&trace, &dlogits, &mut grads);
    let analytic = flatten_grads(&grads);

    let total = net.param_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n_params.min(total) {
        let idx = rng.gen_range(0..total);
        net.param_add(idx, epsilon);
        let up = softmax_xent(&net.logits(&sample.image), sample.label).0;
        net.param_add(idx, -2.0 * epsilon);
        let down = softmax_xent(&net.logits(&sample.image), sample.label).0;
        net.param_add(idx, epsilon);
        let numeric = (up - down) / (2.0 * epsilon);
        let a = analytic[idx];
        let denom = numeric.abs().max(a.abs()).max(1e-8);
        worst = worst.max((numeric - a).abs() / denom);
    }
    worst
}

fn flatten_grads<S: Scalar>(g: &Gradients<S>) -> Vec<f64> {
    let mut out = Vec::new();
    let push = |out: &mut Vec<f64>, s: &[S]| out.extend(s.iter().map(|v| v.as_f64()));
    push(&mut out, &g.lift_w);
    push(&mut out, &g.lift_b);
    for (w, b) in &g.blocks {
        push(&mut out, w);
        push(&mut out, b);
    }
    push(&mut out, &g.fc_w);
    push(&mut out, &g.fc_b);
    out
}

/// Metrics rendered as one JSON object per line.
pub fn metrics_jsonl(metrics: &[EpochMetrics]) -> String {
    metrics
        .iter()
        .map(|m| serde_json::to_string(m).expect("metrics serialize"))
        .fold(String::new(), |mut acc, line| {
            acc.push_str(&line);
            acc.push('\n');
            acc
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorspace::{rgb_to_hsl, RgbImage};
    use crate::nn::network::NetworkConfig;

    fn toy_samples(n: usize, side: usize, seed: u64) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let data: Vec<f64> = (0..side * side * 3).map(|_| rng.gen()).collect();
                Sample {
                    image: rgb_to_hsl(&RgbImage::from_data(side, side, data).unwrap()),
                    label: i % 3,
                }
            })
            .collect()
    }

    fn tiny_net(seed: u64) -> Network<f64> {
        let mut cfg = NetworkConfig::new(2, 1, 1);
        cfg.base_width = 4;
        cfg.depth = 2;
        cfg.classes = 3;
        cfg.budget_tolerance = 1.0;
        cfg.seed = seed;
        Network::build(cfg).unwrap()
    }

    #[test]
    fn zero_lr_leaves_parameters_unchanged() {
        let mut net = tiny_net(1);
        let before = net.params_f64();
        let samples = toy_samples(8, 6, 2);
        let hyper = Hyper {
            lr: 0.0,
            epochs: 2,
            batch: 4,
            seed: 3,
        };
        train(&mut net, &samples, None, hyper).unwrap();
        assert_eq!(net.params_f64(), before);
    }

    #[test]
    fn single_sgd_step_matches_hand_computed_affine_update() {
        // Features reduce to constants for a flat image; the classifier
        // update is then fully hand-computable: w -= lr * (p - y) x^T,
        // summed over the two samples.
        let mut net = tiny_net(4);
        let samples = toy_samples(2, 4, 5);
        let hyper = Hyper {
            lr: 0.05,
            epochs: 1,
            batch: 2,
            seed: 6,
        };
        let feats: Vec<Vec<f64>> = samples
            .iter()
            .map(|s| net.forward_trace(&s.image).features)
            .collect();
        let probs: Vec<Vec<f64>> = samples
            .iter()
            .map(|s| {
                let logits = net.logits(&s.image);
                let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = logits.iter().map(|v| (v - m).exp()).collect();
                let z: f64 = e.iter().sum();
                e.iter().map(|v| v / z).collect()
            })
            .collect();
        let before_w = net.fc.weights.clone();
        let before_b = net.fc.bias.clone();
        train(&mut net, &samples, None, hyper).unwrap();
        for o in 0..3 {
            let mut gb = 0.0;
            for (s, p) in samples.iter().zip(&probs) {
                gb += p[o] - if s.label == o { 1.0 } else { 0.0 };
            }
            assert!(
                (net.fc.bias[o] - (before_b[o] - 0.05 * gb)).abs() < 1e-10,
                "bias {o}"
            );
            for i in 0..net.fc.in_dim {
                let mut gw = 0.0;
                for ((s, p), f) in samples.iter().zip(&probs).zip(&feats) {
                    gw += (p[o] - if s.label == o { 1.0 } else { 0.0 }) * f[i];
                }
                let expect = before_w[o * net.fc.in_dim + i] - 0.05 * gw;
                assert!((net.fc.weights[o * net.fc.in_dim + i] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn training_reduces_loss_on_separable_toy() {
        let mut net = tiny_net(7);
        let samples = toy_samples(24, 6, 8);
        let refs: Vec<&Sample> = samples.iter().collect();
        let before = batch_loss(&net, &refs);
        let hyper = Hyper {
            lr: 0.02,
            epochs: 30,
            batch: 8,
            seed: 9,
        };
        train(&mut net, &samples, None, hyper).unwrap();
        let after = batch_loss(&net, &refs);
        assert!(after < before, "{after} !< {before}");
    }

    #[test]
    fn gradient_check_affine_path() {
        let mut net = tiny_net(10);
        let samples = toy_samples(1, 6, 11);
        let err = gradient_check(&mut net, &samples[0], 60, 1e-5, 12);
        assert!(err <= 1e-6, "max rel err {err}");
    }

    #[test]
    fn parallel_and_sequential_batches_agree() {
        let net = tiny_net(13);
        let samples = toy_samples(6, 6, 14);
        let refs: Vec<&Sample> = samples.iter().collect();
        let (loss_p, _, grads_p) = batch_grad(&net, &refs);
        let (loss_s, grads_s) = batch_grad_seq(&net, &refs);
        assert!((loss_p - loss_s).abs() < 1e-9);
        assert!(flatten_grads(&grads_p)
            .iter()
            .zip(flatten_grads(&grads_s))
            .all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn nan_loss_aborts() {
        let mut net = tiny_net(15);
        for w in net.fc.weights.iter_mut() {
            *w = f64::INFINITY;
        }
        let samples = toy_samples(4, 4, 16);
        let err = train(&mut net, &samples, None, Hyper::default());
        assert!(matches!(err, Err(TrainError::NanLoss { .. })));
    }
}
