//! Shared actor-critic multilayer perceptron, written out explicitly:
//! forward pass, exact reverse-mode gradients, and Adam updates.
//!
//! The observation is split into an ownship block and a local block (the
//! neighbor slots). The local block goes through a small encoder layer, its
//! output is concatenated with the ownship block, and the result feeds two
//! shared hidden layers with a softmax policy head and a linear value head
//! on top.

pub mod checkpoint;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("input length {got} does not match network input width {expected}")]
    InputWidth { expected: usize, got: usize },
    #[error("gradient set does not match parameter shapes")]
    GradientShape,
    #[error("non-finite gradient; update rejected")]
    NonFiniteGradient,
}

/// Layer widths. The observation layout fixes `own_width`/`local_width`;
/// the interior widths default to the 32/256 architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub own_width: usize,
    pub local_width: usize,
    pub encoder_width: usize,
    pub hidden_width: usize,
    pub num_actions: usize,
}

impl NetworkConfig {
    pub fn for_observation(own_width: usize, local_width: usize) -> Self {
        NetworkConfig { own_width, local_width, encoder_width: 32, hidden_width: 256, num_actions: 3 }
    }

    pub fn input_width(&self) -> usize {
        self.own_width + self.local_width
    }

    /// Width of the encoder-output + ownship concatenation.
    pub fn concat_width(&self) -> usize {
        self.encoder_width + self.own_width
    }
}

/// One fully connected layer: row-major `out_dim x in_dim` weights plus bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl LinearParams {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        LinearParams { in_dim, out_dim, w: vec![0.0; in_dim * out_dim], b: vec![0.0; out_dim] }
    }

    /// He-uniform initialization scaled by `gain`.
    fn init(in_dim: usize, out_dim: usize, gain: f64, rng: &mut impl Rng) -> Self {
        let limit = gain * (6.0 / in_dim as f64).sqrt();
        let w = (0..in_dim * out_dim).map(|_| rng.random_range(-limit..limit)).collect();
        LinearParams { in_dim, out_dim, w, b: vec![0.0; out_dim] }
    }

    fn same_shape(&self, other: &LinearParams) -> bool {
        self.in_dim == other.in_dim && self.out_dim == other.out_dim
    }

    fn param_count(&self) -> usize {
        self.w.len() + self.b.len()
    }

    fn affine_into(&self, x: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(x.len(), self.in_dim);
        out.clear();
        for i in 0..self.out_dim {
            let row = &self.w[i * self.in_dim..(i + 1) * self.in_dim];
            let dot: f64 = row.iter().zip(x).map(|(w, x)| w * x).sum();
            out.push(dot + self.b[i]);
        }
    }

    /// Accumulate dW += dy ⊗ x, db += dy and return nothing; the input
    /// gradient is accumulated separately to keep loops cache-friendly.
    fn accumulate_grads(&self, x: &[f64], dy: &[f64], gw: &mut [f64], gb: &mut [f64]) {
        for i in 0..self.out_dim {
            let d = dy[i];
            if d == 0.0 {
                continue;
            }
            gb[i] += d;
            let row = &mut gw[i * self.in_dim..(i + 1) * self.in_dim];
            for (g, &xv) in row.iter_mut().zip(x) {
                *g += d * xv;
            }
        }
    }

    /// dx += Wᵀ dy.
    fn backprop_input(&self, dy: &[f64], dx: &mut [f64]) {
        for i in 0..self.out_dim {
            let d = dy[i];
            if d == 0.0 {
                continue;
            }
            let row = &self.w[i * self.in_dim..(i + 1) * self.in_dim];
            for (g, &wv) in dx.iter_mut().zip(row) {
                *g += d * wv;
            }
        }
    }
}

/// The five layers as one addressable set; also the shape of a gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub encoder: LinearParams,
    pub hidden1: LinearParams,
    pub hidden2: LinearParams,
    pub policy: LinearParams,
    pub value: LinearParams,
}

impl ParamSet {
    pub fn zeros(config: &NetworkConfig) -> Self {
        ParamSet {
            encoder: LinearParams::zeros(config.local_width, config.encoder_width),
            hidden1: LinearParams::zeros(config.concat_width(), config.hidden_width),
            hidden2: LinearParams::zeros(config.hidden_width, config.hidden_width),
            policy: LinearParams::zeros(config.hidden_width, config.num_actions),
            value: LinearParams::zeros(config.hidden_width, 1),
        }
    }

    pub fn layers(&self) -> [(&'static str, &LinearParams); 5] {
        [
            ("encoder", &self.encoder),
            ("hidden1", &self.hidden1),
            ("hidden2", &self.hidden2),
            ("policy_head", &self.policy),
            ("value_head", &self.value),
        ]
    }

    fn layers_mut(&mut self) -> [&mut LinearParams; 5] {
        [
            &mut self.encoder,
            &mut self.hidden1,
            &mut self.hidden2,
            &mut self.policy,
            &mut self.value,
        ]
    }

    pub fn same_shape(&self, other: &ParamSet) -> bool {
        self.layers()
            .iter()
            .zip(other.layers().iter())
            .all(|((_, a), (_, b))| a.same_shape(b))
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|(_, l)| l.param_count()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.layers()
            .iter()
            .all(|(_, l)| l.w.iter().chain(&l.b).all(|v| v.is_finite()))
    }

    pub fn scale(&mut self, factor: f64) {
        for layer in self.layers_mut() {
            for v in layer.w.iter_mut().chain(layer.b.iter_mut()) {
                *v *= factor;
            }
        }
    }

    /// Global L2 norm across every weight and bias.
    pub fn l2_norm(&self) -> f64 {
        self.layers()
            .iter()
            .map(|(_, l)| l.w.iter().chain(&l.b).map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }
}

/// Adam moment-decay constants; the paper only fixes the learning rate, so
/// the standard defaults apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// All trainable state: layer parameters plus Adam moment buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub config: NetworkConfig,
    pub layers: ParamSet,
    pub adam_m: ParamSet,
    pub adam_v: ParamSet,
    pub adam_steps: u64,
}

/// Cached activations from one forward pass; enough to reproduce exact
/// gradients on the way back.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    local: Vec<f64>,
    enc_pre: Vec<f64>,
    concat: Vec<f64>,
    h1_pre: Vec<f64>,
    h1: Vec<f64>,
    h2_pre: Vec<f64>,
    h2: Vec<f64>,
}

/// Policy distribution and value estimate for one observation.
#[derive(Debug, Clone)]
pub struct ForwardOutput {
    pub policy: Vec<f64>,
    pub log_policy: Vec<f64>,
    pub value: f64,
}

impl ForwardOutput {
    pub fn entropy(&self) -> f64 {
        -self.policy.iter().zip(&self.log_policy).map(|(p, lp)| p * lp).sum::<f64>()
    }
}

/// Gradients of a scalar loss at the two heads. The policy-side gradient is
/// taken with respect to the pre-softmax logits.
#[derive(Debug, Clone)]
pub struct HeadGrads {
    pub dlogits: Vec<f64>,
    pub dvalue: f64,
}

fn relu_into(pre: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend(pre.iter().map(|&v| v.max(0.0)));
}

/// Numerically stable softmax and log-softmax from logits.
pub fn softmax_log_softmax(logits: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let log_sum = sum.ln();
    let probs = exps.iter().map(|&e| e / sum).collect();
    let log_probs = logits.iter().map(|&z| z - max - log_sum).collect();
    (probs, log_probs)
}

impl NetworkParams {
    /// Fresh parameters: He-uniform hidden layers, near-zero heads so the
    /// initial policy is close to uniform and the critic starts near zero.
    pub fn init(config: NetworkConfig, rng: &mut impl Rng) -> Self {
        let layers = ParamSet {
            encoder: LinearParams::init(config.local_width, config.encoder_width, 1.0, rng),
            hidden1: LinearParams::init(config.concat_width(), config.hidden_width, 1.0, rng),
            hidden2: LinearParams::init(config.hidden_width, config.hidden_width, 1.0, rng),
            policy: LinearParams::init(config.hidden_width, config.num_actions, 0.01, rng),
            value: LinearParams::init(config.hidden_width, 1, 0.01, rng),
        };
        NetworkParams {
            config,
            adam_m: ParamSet::zeros(&config),
            adam_v: ParamSet::zeros(&config),
            adam_steps: 0,
            layers,
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.param_count()
    }

    pub fn forward(&self, obs: &[f64]) -> Result<(ForwardOutput, ForwardTrace), NetError> {
        let cfg = &self.config;
        if obs.len() != cfg.input_width() {
            return Err(NetError::InputWidth { expected: cfg.input_width(), got: obs.len() });
        }
        let own = &obs[..cfg.own_width];
        let local = &obs[cfg.own_width..];

        let mut enc_pre = Vec::new();
        self.layers.encoder.affine_into(local, &mut enc_pre);
        let mut enc = Vec::new();
        relu_into(&enc_pre, &mut enc);

        let mut concat = Vec::with_capacity(cfg.concat_width());
        concat.extend_from_slice(&enc);
        concat.extend_from_slice(own);

        let mut h1_pre = Vec::new();
        self.layers.hidden1.affine_into(&concat, &mut h1_pre);
        let mut h1 = Vec::new();
        relu_into(&h1_pre, &mut h1);

        let mut h2_pre = Vec::new();
        self.layers.hidden2.affine_into(&h1, &mut h2_pre);
        let mut h2 = Vec::new();
        relu_into(&h2_pre, &mut h2);

        let mut logits = Vec::new();
        self.layers.policy.affine_into(&h2, &mut logits);
        let mut value_out = Vec::new();
        self.layers.value.affine_into(&h2, &mut value_out);

        let (policy, log_policy) = softmax_log_softmax(&logits);
        let output = ForwardOutput { policy, log_policy, value: value_out[0] };
        let trace = ForwardTrace {
            local: local.to_vec(),
            enc_pre,
            concat,
            h1_pre,
            h1,
            h2_pre,
            h2,
        };
        Ok((output, trace))
    }

    /// Policy and value without keeping the trace.
    pub fn policy_value(&self, obs: &[f64]) -> Result<ForwardOutput, NetError> {
        self.forward(obs).map(|(out, _)| out)
    }

    /// Accumulate exact gradients for one sample into `grads`.
    pub fn backward_into(&self, trace: &ForwardTrace, heads: &HeadGrads, grads: &mut ParamSet) {
        let cfg = &self.config;
        debug_assert_eq!(heads.dlogits.len(), cfg.num_actions);

        // Heads share the trunk output h2.
        let mut dh2 = vec![0.0; cfg.hidden_width];
        self.layers.policy.accumulate_grads(&trace.h2, &heads.dlogits, &mut grads.policy.w, &mut grads.policy.b);
        self.layers.policy.backprop_input(&heads.dlogits, &mut dh2);
        let dvalue = [heads.dvalue];
        self.layers.value.accumulate_grads(&trace.h2, &dvalue, &mut grads.value.w, &mut grads.value.b);
        self.layers.value.backprop_input(&dvalue, &mut dh2);

        // Trunk layer 2.
        let dh2_pre: Vec<f64> = dh2
            .iter()
            .zip(&trace.h2_pre)
            .map(|(&d, &pre)| if pre > 0.0 { d } else { 0.0 })
            .collect();
        self.layers.hidden2.accumulate_grads(&trace.h1, &dh2_pre, &mut grads.hidden2.w, &mut grads.hidden2.b);
        let mut dh1 = vec![0.0; cfg.hidden_width];
        self.layers.hidden2.backprop_input(&dh2_pre, &mut dh1);

        // Trunk layer 1.
        let dh1_pre: Vec<f64> = dh1
            .iter()
            .zip(&trace.h1_pre)
            .map(|(&d, &pre)| if pre > 0.0 { d } else { 0.0 })
            .collect();
        self.layers.hidden1.accumulate_grads(&trace.concat, &dh1_pre, &mut grads.hidden1.w, &mut grads.hidden1.b);
        let mut dconcat = vec![0.0; cfg.concat_width()];
        self.layers.hidden1.backprop_input(&dh1_pre, &mut dconcat);

        // Only the encoder half of the concatenation has parameters upstream.
        let denc = &dconcat[..cfg.encoder_width];
        let denc_pre: Vec<f64> = denc
            .iter()
            .zip(&trace.enc_pre)
            .map(|(&d, &pre)| if pre > 0.0 { d } else { 0.0 })
            .collect();
        self.layers.encoder.accumulate_grads(&trace.local, &denc_pre, &mut grads.encoder.w, &mut grads.encoder.b);
    }

    /// Gradients for one sample; shapes mirror the parameters.
    pub fn backward(&self, trace: &ForwardTrace, heads: &HeadGrads) -> ParamSet {
        let mut grads = ParamSet::zeros(&self.config);
        self.backward_into(trace, heads, &mut grads);
        grads
    }

    /// Standard Adam with bias correction. A non-finite gradient rejects the
    /// whole update and leaves every buffer untouched.
    pub fn adam_step(
        &mut self,
        grads: &ParamSet,
        lr: f64,
        hyper: &AdamHyper,
    ) -> Result<(), NetError> {
        if !self.layers.same_shape(grads) {
            return Err(NetError::GradientShape);
        }
        if !grads.all_finite() {
            return Err(NetError::NonFiniteGradient);
        }
        self.adam_steps += 1;
        let t = self.adam_steps as i32;
        let bias1 = 1.0 - hyper.beta1.powi(t);
        let bias2 = 1.0 - hyper.beta2.powi(t);

        let params = self.layers.layers_mut();
        let ms = self.adam_m.layers_mut();
        let vs = self.adam_v.layers_mut();
        let gs = grads.layers();
        for (((layer, m), v), (_, g)) in params.into_iter().zip(ms).zip(vs).zip(gs) {
            let iter = layer
                .w
                .iter_mut()
                .zip(m.w.iter_mut())
                .zip(v.w.iter_mut())
                .zip(g.w.iter())
                .chain(
                    layer
                        .b
                        .iter_mut()
                        .zip(m.b.iter_mut())
                        .zip(v.b.iter_mut())
                        .zip(g.b.iter()),
                );
            for (((p, m), v), &g) in iter {
                *m = hyper.beta1 * *m + (1.0 - hyper.beta1) * g;
                *v = hyper.beta2 * *v + (1.0 - hyper.beta2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *p -= lr * m_hat / (v_hat.sqrt() + hyper.eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_config() -> NetworkConfig {
        NetworkConfig {
            own_width: 4,
            local_width: 6,
            encoder_width: 5,
            hidden_width: 8,
            num_actions: 3,
        }
    }

    fn random_obs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn softmax_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let config = small_config();
        let net = NetworkParams::init(config, &mut rng);
        for _ in 0..20 {
            let obs = random_obs(&mut rng, config.input_width());
            let out = net.policy_value(&obs).unwrap();
            let sum: f64 = out.policy.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(out.policy.iter().all(|&p| p > 0.0 && p < 1.0));
        }
    }

    #[test]
    fn zero_network_is_uniform() {
        let config = small_config();
        let net = NetworkParams {
            config,
            layers: ParamSet::zeros(&config),
            adam_m: ParamSet::zeros(&config),
            adam_v: ParamSet::zeros(&config),
            adam_steps: 0,
        };
        let obs = vec![0.3; config.input_width()];
        let out = net.policy_value(&obs).unwrap();
        for p in &out.policy {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn forward_is_deterministic() {
        let config = small_config();
        let net1 = NetworkParams::init(config, &mut ChaCha8Rng::seed_from_u64(42));
        let net2 = NetworkParams::init(config, &mut ChaCha8Rng::seed_from_u64(42));
        let obs = random_obs(&mut ChaCha8Rng::seed_from_u64(7), config.input_width());
        let a = net1.policy_value(&obs).unwrap();
        let b = net2.policy_value(&obs).unwrap();
        assert_eq!(a.policy, b.policy);
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn wrong_input_width_is_rejected() {
        let config = small_config();
        let net = NetworkParams::init(config, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(matches!(
            net.policy_value(&vec![0.0; config.input_width() + 1]),
            Err(NetError::InputWidth { .. })
        ));
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_grads() {
        let config = small_config();
        let net = NetworkParams::init(config, &mut ChaCha8Rng::seed_from_u64(5));
        let obs = random_obs(&mut ChaCha8Rng::seed_from_u64(6), config.input_width());
        let (_, trace) = net.forward(&obs).unwrap();
        let grads = net.backward(&trace, &HeadGrads { dlogits: vec![0.0; 3], dvalue: 0.0 });
        assert!(grads.layers().iter().all(|(_, l)| l.w.iter().chain(&l.b).all(|&g| g == 0.0)));
    }

    #[test]
    fn heads_are_disjoint_after_trunk() {
        let config = small_config();
        let net = NetworkParams::init(config, &mut ChaCha8Rng::seed_from_u64(8));
        let obs = random_obs(&mut ChaCha8Rng::seed_from_u64(9), config.input_width());
        let (_, trace) = net.forward(&obs).unwrap();
        // Value-only loss leaves the policy head untouched, and vice versa.
        let value_grads = net.backward(&trace, &HeadGrads { dlogits: vec![0.0; 3], dvalue: 1.0 });
        assert!(value_grads.policy.w.iter().chain(&value_grads.policy.b).all(|&g| g == 0.0));
        assert!(value_grads.value.w.iter().any(|&g| g != 0.0));
        let policy_grads =
            net.backward(&trace, &HeadGrads { dlogits: vec![1.0, -0.5, 0.25], dvalue: 0.0 });
        assert!(policy_grads.value.w.iter().chain(&policy_grads.value.b).all(|&g| g == 0.0));
    }

    #[test]
    fn sentinel_slot_permutation_leaves_output_unchanged() {
        // Ownship block of 6, three neighbor slots of 8; the last two slots
        // carry identical sentinel content.
        let config = NetworkConfig::for_observation(6, 24);
        let net = NetworkParams::init(config, &mut ChaCha8Rng::seed_from_u64(10));
        let sentinel = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let mut obs = vec![0.25; 6];
        obs.extend([0.1, 0.3, 0.5, -0.2, 0.9, 0.0, 0.4, 0.15]);
        obs.extend(sentinel);
        obs.extend(sentinel);
        let base = net.policy_value(&obs).unwrap();
        let mut swapped = obs.clone();
        swapped[..].copy_within(14..22, 22);
        // The two sentinel slots are identical, so swapping them reproduces
        // the same vector and therefore the same outputs, bit for bit.
        assert_eq!(obs, swapped);
        let out = net.policy_value(&swapped).unwrap();
        assert_eq!(base.policy, out.policy);
        assert_eq!(base.value, out.value);
    }

    #[test]
    fn adam_first_step_is_signed_lr() {
        let config = small_config();
        let mut net = NetworkParams::init(config, &mut ChaCha8Rng::seed_from_u64(11));
        let before = net.layers.clone();
        let mut grads = ParamSet::zeros(&config);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for layer in [&mut grads.encoder, &mut grads.hidden1, &mut grads.policy] {
            for g in layer.w.iter_mut() {
                *g = rng.random_range(-3.0..3.0);
            }
        }
        let lr = 1e-3;
        net.adam_step(&grads, lr, &AdamHyper::default()).unwrap();
        for ((_, b), ((_, a), (_, g))) in
            before.layers().iter().zip(net.layers.layers().iter().zip(grads.layers().iter()))
        {
            for ((&pb, &pa), &gv) in b.w.iter().zip(&a.w).zip(&g.w) {
                let delta = pa - pb;
                if gv == 0.0 {
                    assert_eq!(delta, 0.0);
                } else {
                    // First bias-corrected step is -lr * g / (|g| + eps).
                    assert!((delta + lr * gv.signum()).abs() < 1e-6);
                }
            }
        }
        assert_eq!(net.adam_steps, 1);
    }

    #[test]
    fn adam_zero_gradient_keeps_params() {
        let config = small_config();
        let mut net = NetworkParams::init(config, &mut ChaCha8Rng::seed_from_u64(13));
        let before = net.layers.clone();
        let grads = ParamSet::zeros(&config);
        net.adam_step(&grads, 1e-3, &AdamHyper::default()).unwrap();
        assert_eq!(before, net.layers);
    }

    #[test]
    fn adam_is_deterministic() {
        let config = small_config();
        let mut a = NetworkParams::init(config, &mut ChaCha8Rng::seed_from_u64(14));
        let mut b = a.clone();
        let mut grads = ParamSet::zeros(&config);
        for g in grads.hidden2.w.iter_mut() {
            *g = 0.37;
        }
        a.adam_step(&grads, 1e-4, &AdamHyper::default()).unwrap();
        b.adam_step(&grads, 1e-4, &AdamHyper::default()).unwrap();
        assert_eq!(a.layers, b.layers);
        assert_eq!(a.adam_m, b.adam_m);
        assert_eq!(a.adam_v, b.adam_v);
    }

    #[test]
    fn adam_rejects_non_finite_gradients() {
        let config = small_config();
        let mut net = NetworkParams::init(config, &mut ChaCha8Rng::seed_from_u64(15));
        let before = net.clone();
        let mut grads = ParamSet::zeros(&config);
        grads.policy.w[0] = f64::NAN;
        assert!(matches!(
            net.adam_step(&grads, 1e-4, &AdamHyper::default()),
            Err(NetError::NonFiniteGradient)
        ));
        assert_eq!(before, net);
    }

    #[test]
    fn long_adam_run_stays_finite() {
        let config = small_config();
        let mut net = NetworkParams::init(config, &mut ChaCha8Rng::seed_from_u64(16));
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut grads = ParamSet::zeros(&config);
        for _ in 0..10_000 {
            for layer in grads.layers_mut() {
                for g in layer.w.iter_mut().chain(layer.b.iter_mut()) {
                    *g = rng.random_range(-5.0f64..5.0);
                }
            }
            net.adam_step(&grads, 1e-4, &AdamHyper::default()).unwrap();
        }
        assert!(net.layers.all_finite());
        assert!(net.adam_m.all_finite());
        assert!(net.adam_v.all_finite());
    }
}
