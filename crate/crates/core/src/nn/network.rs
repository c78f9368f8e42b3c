//! Network assembly, parameter budget, forward/backward, checkpoints.
//!
//! The backbone is: lifting convolution, then `depth − 1` group-convolution
//! blocks with ReLU, one 2×2 spatial max-pool mid-stack, group pooling,
//! global spatial mean, and an affine classifier. Channel width scales as
//! `round(base / √(N·M·R))` so parameter counts stay within a tolerance of
//! the plain (order-1) reference.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::colorspace::HslImage;
use crate::groups::cyclic::HslGroup;

use super::layers::{
    encode_planes, group_pool_backward, group_pool_forward, lift_slot, maxpool2_backward,
    maxpool2_forward, relu_backward, relu_forward, spatial_mean, spatial_mean_backward, Affine,
    AxisMode, GroupConv, GroupPoolMode, InputEncoding, LiftKind, LiftingConv,
};
use super::tensor::{FeatureMap, Scalar};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parameter budget violated: {got} params vs reference {reference} (|ratio−1| = {deviation:.3} > {tolerance})")]
    BudgetViolation {
        got: usize,
        reference: usize,
        deviation: f64,
        tolerance: f64,
    },
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("base width must be at least 1")]
    ZeroWidth,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct NetworkConfig {
    pub hue_order: usize,
    pub sat_order: usize,
    pub lum_order: usize,
    pub base_width: usize,
    /// Total convolution layers including the lifting layer.
    pub depth: usize,
    pub classes: usize,
    pub kernel: usize,
    pub encoding: InputEncoding,
    pub lift: LiftKind,
    pub group_pool: GroupPoolMode,
    /// Allowed relative deviation from the order-1 reference parameter count.
    pub budget_tolerance: f64,
    pub seed: u64,
}

impl NetworkConfig {
    pub fn new(hue_order: usize, sat_order: usize, lum_order: usize) -> Self {
        Self {
            hue_order,
            sat_order,
            lum_order,
            base_width: 22,
            depth: 3,
            classes: 10,
            kernel: 3,
            encoding: InputEncoding::RgbCentered,
            lift: LiftKind::DoubleCover,
            group_pool: GroupPoolMode::Max,
            budget_tolerance: 0.10,
            seed: 1999,
        }
    }

    pub fn group(&self) -> HslGroup {
        HslGroup::new(self.hue_order, self.sat_order, self.lum_order)
    }

    pub fn group_size(&self) -> usize {
        self.hue_order * self.sat_order * self.lum_order
    }

    /// Channel width under the √|G| budget rule.
    pub fn width(&self) -> usize {
        ((self.base_width as f64 / (self.group_size() as f64).sqrt()).round() as usize).max(1)
    }

    /// Analytic parameter count of this configuration.
    pub fn param_count(&self) -> usize {
        let k = self.width();
        let g = self.group_size();
        let taps = self.kernel * self.kernel;
        let lift = k * 3 * taps + k;
        let per_conv = k * g * k * taps + k;
        let fc = self.classes * k + self.classes;
        lift + (self.depth - 1) * per_conv + fc
    }

    /// Parameter count of the order-1 reference with the same base width.
    pub fn reference_param_count(&self) -> usize {
        let mut reference = self.clone();
        reference.hue_order = 1;
        reference.sat_order = 1;
        reference.lum_order = 1;
        reference.param_count()
    }

    /// Number of group-conv blocks that run before the spatial max pool.
    pub fn pool_after_blocks(&self) -> usize {
        (self.depth - 1) / 2
    }
}

/// Fixed-vocabulary group-convolutional classifier.
#[derive(Debug, Clone)]
pub struct Network<S: Scalar> {
    pub cfg: NetworkConfig,
    pub lift: LiftingConv<S>,
    pub blocks: Vec<GroupConv<S>>,
    pub fc: Affine<S>,
}

/// Gradient buffers mirroring the parameter blocks of a [`Network`].
#[derive(Debug, Clone)]
pub struct Gradients<S: Scalar> {
    pub lift_w: Vec<S>,
    pub lift_b: Vec<S>,
    pub blocks: Vec<(Vec<S>, Vec<S>)>,
    pub fc_w: Vec<S>,
    pub fc_b: Vec<S>,
}

impl<S: Scalar> Gradients<S> {
    pub fn zeros_like(net: &Network<S>) -> Self {
        Self {
            lift_w: vec![S::zero(); net.lift.weights.len()],
            lift_b: vec![S::zero(); net.lift.bias.len()],
            blocks: net
                .blocks
                .iter()
                .map(|b| (vec![S::zero(); b.weights.len()], vec![S::zero(); b.bias.len()]))
                .collect(),
            fc_w: vec![S::zero(); net.fc.weights.len()],
            fc_b: vec![S::zero(); net.fc.bias.len()],
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        fn axpy<S: Scalar>(a: &mut [S], b: &[S]) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
        axpy(&mut self.lift_w, &other.lift_w);
        axpy(&mut self.lift_b, &other.lift_b);
        for (mine, theirs) in self.blocks.iter_mut().zip(&other.blocks) {
            axpy(&mut mine.0, &theirs.0);
            axpy(&mut mine.1, &theirs.1);
        }
        axpy(&mut self.fc_w, &other.fc_w);
        axpy(&mut self.fc_b, &other.fc_b);
    }
}

/// Forward-pass intermediates needed by backprop.
pub struct Trace<S: Scalar> {
    pub planes: Vec<Vec<S>>,
    pub lifted: FeatureMap<S>,
    /// (input to block, output of block after ReLU) per group-conv block.
    pub block_io: Vec<(FeatureMap<S>, FeatureMap<S>)>,
    pub prepool: Option<(FeatureMap<S>, Vec<usize>)>,
    pub gpooled: Vec<S>,
    pub gpool_arg: Option<Vec<usize>>,
    pub gpool_input_shape: FeatureMap<S>,
    pub features: Vec<S>,
    pub logits: Vec<S>,
}

impl<S: Scalar> Network<S> {
    /// Builds a seeded network, enforcing the parameter budget against the
    /// order-1 reference of the same architecture.
    pub fn build(cfg: NetworkConfig) -> Result<Self, ConfigError> {
        if cfg.depth == 0 {
            return Err(ConfigError::ZeroDepth);
        }
        if cfg.base_width == 0 {
            return Err(ConfigError::ZeroWidth);
        }
        let got = cfg.param_count();
        let reference = cfg.reference_param_count();
        let deviation = (got as f64 / reference as f64 - 1.0).abs();
        if deviation > cfg.budget_tolerance {
            return Err(ConfigError::BudgetViolation {
                got,
                reference,
                deviation,
                tolerance: cfg.budget_tolerance,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Self::init(cfg, &mut rng))
    }

    fn init(cfg: NetworkConfig, rng: &mut ChaCha8Rng) -> Self {
        let k = cfg.width();
        let (n, m, r) = (cfg.hue_order, cfg.sat_order, cfg.lum_order);
        let taps = cfg.kernel * cfg.kernel;
        // He-style uniform fan-in scaling; biases start at zero.
        let uniform = |rng: &mut ChaCha8Rng, count: usize, fan_in: usize| -> Vec<S> {
            let bound = (6.0 / fan_in as f64).sqrt();
            (0..count)
                .map(|_| S::from_f64(rng.gen_range(-bound..bound)))
                .collect()
        };
        let lift = LiftingConv {
            kout: k,
            cin: 3,
            kh: cfg.kernel,
            kw: cfg.kernel,
            weights: uniform(rng, k * 3 * taps, 3 * taps),
            bias: vec![S::zero(); k],
        };
        let modes = match cfg.lift {
            LiftKind::DoubleCover => [AxisMode::Cyclic; 3],
            LiftKind::LcerTranslate => [AxisMode::Cyclic, AxisMode::ZeroPad, AxisMode::ZeroPad],
        };
        let g = cfg.group_size();
        let blocks = (1..cfg.depth)
            .map(|_| GroupConv {
                kout: k,
                kin: k,
                n,
                m,
                r,
                kh: cfg.kernel,
                kw: cfg.kernel,
                modes,
                weights: uniform(rng, k * g * k * taps, g * k * taps),
                bias: vec![S::zero(); k],
            })
            .collect();
        let fc_bound = (3.0 / k as f64).sqrt();
        let fc = Affine {
            out_dim: cfg.classes,
            in_dim: k,
            weights: (0..cfg.classes * k)
                .map(|_| S::from_f64(rng.gen_range(-fc_bound..fc_bound)))
                .collect(),
            bias: vec![S::zero(); cfg.classes],
        };
        Self {
            cfg,
            lift,
            blocks,
            fc,
        }
    }

    pub fn param_count(&self) -> usize {
        self.lift.weights.len()
            + self.lift.bias.len()
            + self
                .blocks
                .iter()
                .map(|b| b.weights.len() + b.bias.len())
                .sum::<usize>()
            + self.fc.weights.len()
            + self.fc.bias.len()
    }

    /// Renders the lifted slot planes for an input image.
    pub fn encode_slots(&self, x: &HslImage) -> Vec<Vec<S>> {
        let group = self.cfg.group();
        let elements: Vec<(usize, usize, usize)> = group
            .elements()
            .map(|el| el.indices())
            .collect();
        crate::exec::map_indexed(elements.len(), |idx| {
            let (i, j, k) = elements[idx];
            let img = lift_slot(x, &group, self.cfg.lift, i, j, k);
            encode_planes(&img, self.cfg.encoding)
        })
    }

    /// Full forward pass retaining intermediates for backprop.
    pub fn forward_trace(&self, x: &HslImage) -> Trace<S> {
        let group = self.cfg.group();
        let (h, w) = (x.height(), x.width());
        let planes = self.encode_slots(x);
        let mut lifted = self.lift.forward(&planes, &group, h, w);
        relu_forward(&mut lifted);
        let pool_after = self.cfg.pool_after_blocks();

        let mut current = lifted.clone();
        let mut block_io = Vec::with_capacity(self.blocks.len());
        let mut prepool = None;
        if self.blocks.is_empty() || pool_after == 0 {
            let (pooled, arg) = maxpool2_forward(&current);
            prepool = Some((current.clone(), arg));
            current = pooled;
        }
        for (bi, block) in self.blocks.iter().enumerate() {
            let input = current.clone();
            let mut out = block.forward(&input);
            relu_forward(&mut out);
            block_io.push((input, out.clone()));
            current = out;
            if prepool.is_none() && bi + 1 == pool_after {
                let (pooled, arg) = maxpool2_forward(&current);
                prepool = Some((current.clone(), arg));
                current = pooled;
            }
        }
        let gpool_input_shape = FeatureMap::zeros(
            current.n,
            current.m,
            current.r,
            current.channels,
            current.height,
            current.width,
        );
        let (gpooled, gpool_arg) = group_pool_forward(&current, self.cfg.group_pool);
        let features = spatial_mean(&gpooled, current.channels, current.plane_len());
        let logits = self.fc.forward(&features);
        Trace {
            planes,
            lifted,
            block_io,
            prepool,
            gpooled,
            gpool_arg,
            gpool_input_shape,
            features,
            logits,
        }
    }

    pub fn logits(&self, x: &HslImage) -> Vec<S> {
        self.forward_trace(x).logits
    }

    pub fn predict(&self, x: &HslImage) -> usize {
        let logits = self.logits(x);
        logits
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite logits"))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Backward pass from a logit gradient; accumulates into `grads`.
    pub fn backward(&self, trace: &Trace<S>, dlogits: &[S], grads: &mut Gradients<S>) {
        let gfeat = self
            .fc
            .backward(&trace.features, dlogits, &mut grads.fc_w, &mut grads.fc_b);
        let shape = &trace.gpool_input_shape;
        let gspatial = spatial_mean_backward(&gfeat, shape.channels, shape.plane_len());
        let mut gcurrent = group_pool_backward(
            shape,
            &gspatial,
            self.cfg.group_pool,
            trace.gpool_arg.as_deref(),
        );
        let pool_after = self.cfg.pool_after_blocks();
        let pool_at_front = self.blocks.is_empty() || pool_after == 0;
        for (bi, block) in self.blocks.iter().enumerate().rev() {
            if !pool_at_front && bi + 1 == pool_after {
                let (pre, arg) = trace.prepool.as_ref().expect("pool recorded");
                gcurrent = maxpool2_backward(pre, &gcurrent, arg);
            }
            let (input, output) = &trace.block_io[bi];
            relu_backward(output, &mut gcurrent);
            let (gw, gb) = &mut grads.blocks[bi];
            gcurrent = block.backward(input, &gcurrent, gw, gb);
        }
        if pool_at_front {
            let (pre, arg) = trace.prepool.as_ref().expect("pool recorded");
            gcurrent = maxpool2_backward(pre, &gcurrent, arg);
        }
        relu_backward(&trace.lifted, &mut gcurrent);
        self.lift
            .backward(&trace.planes, &gcurrent, &mut grads.lift_w, &mut grads.lift_b);
    }

    /// Applies one SGD step: `param -= lr · grad`.
    pub fn sgd_step(&mut self, grads: &Gradients<S>, lr: S) {
        fn step<S: Scalar>(p: &mut [S], g: &[S], lr: S) {
            for (pv, gv) in p.iter_mut().zip(g) {
                *pv -= lr * *gv;
            }
        }
        step(&mut self.lift.weights, &grads.lift_w, lr);
        step(&mut self.lift.bias, &grads.lift_b, lr);
        for (block, (gw, gb)) in self.blocks.iter_mut().zip(&grads.blocks) {
            step(&mut block.weights, gw, lr);
            step(&mut block.bias, gb, lr);
        }
        step(&mut self.fc.weights, &grads.fc_w, lr);
        step(&mut self.fc.bias, &grads.fc_b, lr);
    }

    /// Flattened parameters in declaration order, as f64.
    pub fn params_f64(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        let push = |out: &mut Vec<f64>, s: &[S]| out.extend(s.iter().map(|v| v.as_f64()));
        push(&mut out, &self.lift.weights);
        push(&mut out, &self.lift.bias);
        for b in &self.blocks {
            push(&mut out, &b.weights);
            push(&mut out, &b.bias);
        }
        push(&mut out, &self.fc.weights);
        push(&mut out, &self.fc.bias);
        out
    }

    /// Overwrites all parameters from a flat f64 vector in declaration order.
    pub fn set_params_f64(&mut self, params: &[f64]) -> Result<(), ConfigError> {
        if params.len() != self.param_count() {
            return Err(ConfigError::Checkpoint(format!(
                "parameter count mismatch: {} vs {}",
                params.len(),
                self.param_count()
            )));
        }
        let mut it = params.iter();
        let mut fill = |dst: &mut [S]| {
            for v in dst.iter_mut() {
                *v = S::from_f64(*it.next().expect("length checked"));
            }
        };
        fill(&mut self.lift.weights);
        fill(&mut self.lift.bias);
        for b in &mut self.blocks {
            fill(&mut b.weights);
            fill(&mut b.bias);
        }
        fill(&mut self.fc.weights);
        fill(&mut self.fc.bias);
        Ok(())
    }

    /// Reads or writes one parameter by flat index (declaration order).
    pub fn param_get(&self, idx: usize) -> f64 {
        self.param_block(idx).0
    }

    pub fn param_add(&mut self, idx: usize, delta: f64) {
        let mut remaining = idx;
        let blocks: Vec<&mut [S]> = {
            let mut v: Vec<&mut [S]> = Vec::new();
            v.push(&mut self.lift.weights);
            v.push(&mut self.lift.bias);
            for b in &mut self.blocks {
                v.push(&mut b.weights);
                v.push(&mut b.bias);
            }
            v.push(&mut self.fc.weights);
            v.push(&mut self.fc.bias);
            v
        };
        for block in blocks {
            if remaining < block.len() {
                block[remaining] = block[remaining] + S::from_f64(delta);
                return;
            }
            remaining -= block.len();
        }
        panic!("parameter index {idx} out of range");
    }

    fn param_block(&self, idx: usize) -> (f64, usize) {
        let mut remaining = idx;
        let blocks: [&[S]; 2] = [&self.lift.weights, &self.lift.bias];
        for block in blocks {
            if remaining < block.len() {
                return (block[remaining].as_f64(), idx);
            }
            remaining -= block.len();
        }
        for b in &self.blocks {
            for block in [&b.weights, &b.bias] {
                if remaining < block.len() {
                    return (block[remaining].as_f64(), idx);
                }
                remaining -= block.len();
            }
        }
        for block in [&self.fc.weights, &self.fc.bias] {
            if remaining < block.len() {
                return (block[remaining].as_f64(), idx);
            }
            remaining -= block.len();
        }
        panic!("parameter index {idx} out of range");
    }
}

const CHECKPOINT_MAGIC: &[u8; 6] = b"T3CEN\0";
const CHECKPOINT_VERSION: u16 = 1;

/// Writes a checkpoint: magic, version, config JSON, little-endian f64
/// parameters in declaration order.
pub fn save_checkpoint<S: Scalar>(net: &Network<S>, path: &Path) -> Result<(), ConfigError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(CHECKPOINT_MAGIC)?;
    f.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    let cfg = serde_json::to_vec(&net.cfg).expect("config serializes");
    f.write_all(&(cfg.len() as u32).to_le_bytes())?;
    f.write_all(&cfg)?;
    let params = net.params_f64();
    f.write_all(&(params.len() as u64).to_le_bytes())?;
    for p in params {
        f.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a checkpoint back into a typed network.
pub fn load_checkpoint<S: Scalar>(path: &Path) -> Result<Network<S>, ConfigError> {
    let mut f = std::fs::File::open(path)?;
    let mut magic = [0u8; 6];
    f.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(ConfigError::Checkpoint(format!(
            "bad magic {magic:?}, not a checkpoint"
        )));
    }
    let mut v = [0u8; 2];
    f.read_exact(&mut v)?;
    let version = u16::from_le_bytes(v);
    if version != CHECKPOINT_VERSION {
        return Err(ConfigError::Checkpoint(format!(
            "unsupported version {version}"
        )));
    }
    let mut len4 = [0u8; 4];
    f.read_exact(&mut len4)?;
    let mut cfg_bytes = vec![0u8; u32::from_le_bytes(len4) as usize];
    f.read_exact(&mut cfg_bytes)?;
    let cfg: NetworkConfig = serde_json::from_slice(&cfg_bytes)
        .map_err(|e| ConfigError::Checkpoint(format!("config parse: {e}")))?;
    let mut len8 = [0u8; 8];
    f.read_exact(&mut len8)?;
    let n = u64::from_le_bytes(len8) as usize;
    let mut params = Vec::with_capacity(n);
    let mut buf = [0u8; 8];
    for _ in 0..n {
        f.read_exact(&mut buf)?;
        params.push(f64::from_le_bytes(buf));
    }
    let mut net = Network::<S>::build(cfg)?;
    net.set_params_f64(&params)?;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorspace::{rgb_to_hsl, RgbImage};
    use rand::{Rng, SeedableRng};

    fn random_input(seed: u64, side: usize) -> HslImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..side * side * 3).map(|_| rng.gen()).collect();
        rgb_to_hsl(&RgbImage::from_data(side, side, data).unwrap())
    }

    #[test]
    fn reference_matches_plain_cnn_count() {
        let cfg = NetworkConfig::new(1, 1, 1);
        assert_eq!(cfg.param_count(), cfg.reference_param_count());
    }

    #[test]
    fn budget_holds_across_orders() {
        // Width 32 keeps the Z2CNN-style backbone within ±10% of the plain
        // reference for all tested hue orders.
        for order in [1usize, 3, 4, 8, 16, 20] {
            let mut cfg = NetworkConfig::new(order, 1, 1);
            cfg.base_width = 32;
            let net = Network::<f64>::build(cfg.clone()).unwrap();
            assert_eq!(net.param_count(), cfg.param_count());
            let dev =
                (cfg.param_count() as f64 / cfg.reference_param_count() as f64 - 1.0).abs();
            assert!(dev <= 0.10, "order {order}: deviation {dev:.3}");
        }
    }

    #[test]
    fn budget_violation_is_rejected() {
        let mut cfg = NetworkConfig::new(8, 1, 1);
        cfg.base_width = 12; // rounds 12/√8 to 4, far under budget
        assert!(matches!(
            Network::<f64>::build(cfg),
            Err(ConfigError::BudgetViolation { .. })
        ));
    }

    #[test]
    fn logits_shape_and_determinism() {
        let mut cfg = NetworkConfig::new(2, 2, 1);
        cfg.base_width = 8;
        cfg.depth = 2;
        cfg.budget_tolerance = 1.0;
        let net = Network::<f64>::build(cfg.clone()).unwrap();
        let net2 = Network::<f64>::build(cfg).unwrap();
        let x = random_input(5, 8);
        let a = net.logits(&x);
        let b = net2.logits(&x);
        assert_eq!(a.len(), 10);
        assert_eq!(a, b);
    }

    #[test]
    fn group_transform_leaves_logits_invariant() {
        let mut cfg = NetworkConfig::new(3, 2, 2);
        cfg.base_width = 7;
        cfg.depth = 3;
        cfg.budget_tolerance = 1.0;
        let net = Network::<f64>::build(cfg).unwrap();
        let x = random_input(7, 8);
        let base = net.logits(&x);
        let group = net.cfg.group();
        for el in group.elements() {
            let shifted = net.logits(&crate::groups::action::hsl_action(el, &x));
            for (a, b) in base.iter().zip(&shifted) {
                assert!((a - b).abs() <= 1e-9, "element {:?}", el.indices());
            }
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut cfg = NetworkConfig::new(2, 1, 2);
        cfg.base_width = 6;
        cfg.depth = 2;
        cfg.budget_tolerance = 1.0;
        let net = Network::<f64>::build(cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&net, &path).unwrap();
        let loaded = load_checkpoint::<f64>(&path).unwrap();
        assert_eq!(net.params_f64(), loaded.params_f64());
        let x = random_input(9, 6);
        assert_eq!(net.logits(&x), loaded.logits(&x));
        // Magic guard
        let garbage = dir.path().join("bad.ckpt");
        std::fs::write(&garbage, b"NOTCKPT").unwrap();
        assert!(load_checkpoint::<f64>(&garbage).is_err());
    }

    #[test]
    fn param_indexing_round_trip() {
        let mut cfg = NetworkConfig::new(2, 1, 1);
        cfg.base_width = 4;
        cfg.depth = 2;
        cfg.budget_tolerance = 1.0;
        let mut net = Network::<f64>::build(cfg).unwrap();
        let n = net.param_count();
        let before = net.param_get(n - 1);
        net.param_add(n - 1, 0.5);
        assert!((net.param_get(n - 1) - before - 0.5).abs() < 1e-15);
        let flat = net.params_f64();
        assert_eq!(flat.len(), n);
        assert!((flat[n - 1] - before - 0.5).abs() < 1e-15);
    }
}
