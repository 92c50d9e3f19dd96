//! Forward passes, objectives and exact gradients.
//!
//! All objectives are log-likelihood style quantities that training
//! maximizes:
//! - `L_sup = Σₙ Σⱼ yⱼ log uⱼ + (1 − yⱼ) log(1 − uⱼ)`
//! - `L_unsup = −½ Σₙ ‖x − x̃‖²`
//! - `L = (1 − λ) L_sup + λ L_unsup`
//!
//! Gradients point uphill.

use alloc::vec;
use alloc::vec::Vec;

use super::params::{sigmoid, NetworkParams, Parameters, TiedAutoencoder};
use crate::error::{invalid, Error, Result};

/// Posterior clipping bound inside the supervised log-likelihood.
pub const PROB_CLIP: f64 = 1e-12;

#[inline]
pub fn clip_probability(u: f64) -> f64 {
    u.clamp(PROB_CLIP, 1.0 - PROB_CLIP)
}

/// A labeled minibatch view: borrowed inputs with class indices.
#[derive(Debug, Clone)]
pub struct Batch<'a> {
    pub inputs: Vec<&'a [f64]>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl<'a> Batch<'a> {
    pub fn new(inputs: Vec<&'a [f64]>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if inputs.len() != labels.len() {
            return Err(invalid!("inputs and labels differ in length"));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(invalid!(
                "label {bad} out of range for {num_classes} classes"
            ));
        }
        Ok(Self {
            inputs,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Per-layer values kept for backpropagation through the encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderTrace {
    /// Pre-activations `z_l`, one per hidden layer.
    pub pre: Vec<Vec<f64>>,
    /// `a_0 = x, a_1, …, a_L`.
    pub post: Vec<Vec<f64>>,
}

impl EncoderTrace {
    pub fn code(&self) -> &[f64] {
        self.post.last().expect("trace holds the input")
    }
}

#[derive(Debug, Clone, PartialEq)]
struct DecoderTrace {
    /// Pre-activations indexed by reconstructed layer: `t[k]` has `sizes[k]`.
    pre: Vec<Vec<f64>>,
    /// `r[k]` for `k = 0..L`; `r[L]` is the code, `r[0]` the reconstruction.
    post: Vec<Vec<f64>>,
}

/// Result of [`forward`]: hidden activations and sigmoid outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub trace: EncoderTrace,
    pub output: Vec<f64>,
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

impl TiedAutoencoder {
    pub fn encode_trace(&self, x: &[f64]) -> EncoderTrace {
        let mut pre = Vec::with_capacity(self.depth());
        let mut post = Vec::with_capacity(self.depth() + 1);
        post.push(x.to_vec());
        for k in 0..self.depth() {
            let w = &self.hidden_weights[k];
            let mut z = vec![0.0; w.cols];
            w.t_mul_vec_into(&post[k], &mut z);
            for (zi, bi) in z.iter_mut().zip(&self.hidden_biases[k]) {
                *zi += bi;
            }
            let act = self.activations[k];
            let a = z.iter().map(|&v| act.apply(v)).collect();
            pre.push(z);
            post.push(a);
        }
        EncoderTrace { pre, post }
    }

    /// `h = f_L ∘ ⋯ ∘ f_1 (x)` with `f_l(s) = φ(W_lᵀ s + b_l)`.
    pub fn encode(&self, x: &[f64]) -> Vec<f64> {
        let mut t = self.encode_trace(x);
        t.post.pop().expect("trace holds the input")
    }

    fn decode_trace(&self, h: &[f64]) -> DecoderTrace {
        let l = self.depth();
        let mut pre = vec![Vec::new(); l];
        let mut post = vec![Vec::new(); l + 1];
        post[l] = h.to_vec();
        for k in (0..l).rev() {
            // Layer k+1 weights map sizes[k+1] back to sizes[k].
            let w = &self.hidden_weights[k];
            let mut t = vec![0.0; w.rows];
            w.mul_vec_into(&post[k + 1], &mut t);
            for (ti, ci) in t.iter_mut().zip(&self.decoder_biases[k]) {
                *ti += ci;
            }
            let r = if k == 0 {
                t.clone()
            } else {
                let act = self.activations[k - 1];
                t.iter().map(|&v| act.apply(v)).collect()
            };
            pre[k] = t;
            post[k] = r;
        }
        DecoderTrace { pre, post }
    }

    /// Tied decoder: `s_{l−1} = φ(W_l s_l + c_l)` for intermediate layers,
    /// linear at the reconstruction layer.
    pub fn decode(&self, h: &[f64]) -> Vec<f64> {
        let mut t = self.decode_trace(h);
        core::mem::take(&mut t.post[0])
    }

    pub fn reconstruct(&self, x: &[f64]) -> Vec<f64> {
        self.decode(&self.encode(x))
    }

    /// Backpropagates `delta_code` (∂L/∂a_L) through the encoder, adding into
    /// `grads`.
    fn backprop_encoder(
        &self,
        trace: &EncoderTrace,
        delta_code: Vec<f64>,
        grads: &mut TiedAutoencoder,
    ) {
        let mut delta = delta_code;
        for k in (0..self.depth()).rev() {
            let act = self.activations[k];
            for (d, &z) in delta.iter_mut().zip(&trace.pre[k]) {
                *d *= act.derivative(z);
            }
            for (gb, d) in grads.hidden_biases[k].iter_mut().zip(&delta) {
                *gb += d;
            }
            let gw = &mut grads.hidden_weights[k];
            let input = &trace.post[k];
            for (r, &a) in input.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let row = &mut gw.data[r * gw.cols..(r + 1) * gw.cols];
                for (g, d) in row.iter_mut().zip(&delta) {
                    *g += a * d;
                }
            }
            if k > 0 {
                let mut below = vec![0.0; self.sizes[k]];
                self.hidden_weights[k].mul_vec_into(&delta, &mut below);
                delta = below;
            }
        }
    }

    /// Backpropagates ∂L/∂x̃ through the decoder, adding into `grads`.
    /// Returns ∂L/∂h.
    fn backprop_decoder(
        &self,
        trace: &DecoderTrace,
        delta_recon: Vec<f64>,
        grads: &mut TiedAutoencoder,
    ) -> Vec<f64> {
        let mut delta = delta_recon;
        for k in 0..self.depth() {
            // delta is ∂L/∂r_k; turn it into ∂L/∂t_k.
            if k > 0 {
                let act = self.activations[k - 1];
                for (d, &t) in delta.iter_mut().zip(&trace.pre[k]) {
                    *d *= act.derivative(t);
                }
            }
            for (gc, d) in grads.decoder_biases[k].iter_mut().zip(&delta) {
                *gc += d;
            }
            let upper = &trace.post[k + 1];
            let gw = &mut grads.hidden_weights[k];
            for (r, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &mut gw.data[r * gw.cols..(r + 1) * gw.cols];
                for (g, u) in row.iter_mut().zip(upper) {
                    *g += d * u;
                }
            }
            let mut next = vec![0.0; self.sizes[k + 1]];
            self.hidden_weights[k].t_mul_vec_into(&delta, &mut next);
            delta = next;
        }
        delta
    }

    /// Adds `weight · ∂L_unsup/∂θ` for one sample into `grads` and returns the
    /// sample's `L_unsup`.
    pub fn accumulate_reconstruction(
        &self,
        x: &[f64],
        weight: f64,
        grads: &mut TiedAutoencoder,
    ) -> f64 {
        let enc = self.encode_trace(x);
        let (loss, delta_code) = self.reconstruction_delta(&enc, x, weight, grads);
        self.backprop_encoder(&enc, delta_code, grads);
        loss
    }

    fn reconstruction_delta(
        &self,
        enc: &EncoderTrace,
        x: &[f64],
        weight: f64,
        grads: &mut TiedAutoencoder,
    ) -> (f64, Vec<f64>) {
        let dec = self.decode_trace(enc.code());
        let diff: Vec<f64> = x.iter().zip(&dec.post[0]).map(|(a, b)| a - b).collect();
        let loss = -0.5 * diff.iter().map(|d| d * d).sum::<f64>();
        if weight == 0.0 {
            return (loss, vec![0.0; self.code_dim()]);
        }
        // ∂(−½‖x − x̃‖²)/∂x̃ = x − x̃
        let delta: Vec<f64> = diff.into_iter().map(|d| weight * d).collect();
        (loss, self.backprop_decoder(&dec, delta, grads))
    }
}

/// `u = σ(Uᵀ φ(W_Lᵀ ⋯ φ(W_1ᵀ x)))`, biases included at every layer.
pub fn forward(params: &NetworkParams, x: &[f64]) -> Result<Forward> {
    if x.len() != params.input_dim() {
        return Err(invalid!(
            "input has {} components, network expects {}",
            x.len(),
            params.input_dim()
        ));
    }
    let trace = params.stack.encode_trace(x);
    let mut o = vec![0.0; params.num_classes()];
    params.output_weights.t_mul_vec_into(trace.code(), &mut o);
    for (oi, bi) in o.iter_mut().zip(&params.output_bias) {
        *oi += bi;
    }
    check_finite(&o, "network output pre-activation")?;
    let output = o.into_iter().map(sigmoid).collect();
    Ok(Forward { trace, output })
}

pub fn encode(params: &NetworkParams, x: &[f64]) -> Vec<f64> {
    params.stack.encode(x)
}

pub fn decode(params: &NetworkParams, h: &[f64]) -> Vec<f64> {
    params.stack.decode(h)
}

fn sample_sup_loss(u: &[f64], label: usize) -> f64 {
    u.iter()
        .enumerate()
        .map(|(j, &uj)| {
            let p = clip_probability(uj);
            if j == label {
                libm::log(p)
            } else {
                libm::log(1.0 - p)
            }
        })
        .sum()
}

pub fn loss_supervised(params: &NetworkParams, batch: &Batch<'_>) -> Result<f64> {
    if batch.is_empty() {
        return Err(invalid!("empty batch"));
    }
    let mut total = 0.0;
    for (x, &y) in batch.inputs.iter().zip(&batch.labels) {
        total += sample_sup_loss(&forward(params, x)?.output, y);
    }
    Ok(total)
}

pub fn loss_unsupervised(stack: &TiedAutoencoder, inputs: &[&[f64]]) -> Result<f64> {
    if inputs.is_empty() {
        return Err(invalid!("empty batch"));
    }
    let mut total = 0.0;
    for x in inputs {
        if x.len() != stack.input_dim() {
            return Err(invalid!("input dimension mismatch"));
        }
        let r = stack.reconstruct(x);
        total -= 0.5
            * x.iter()
                .zip(&r)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
    }
    Ok(total)
}

/// Supervised and unsupervised parts evaluated together.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct LossParts {
    pub supervised: f64,
    pub unsupervised: f64,
    pub total: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(invalid!("lambda must lie in [0, 1], got {lambda}"))
    }
}

/// `(1 − λ) L_sup + λ L_unsup`; with `unlabeled`, `L_unsup` covers labeled
/// and unlabeled inputs together.
pub fn loss_hybrid(
    params: &NetworkParams,
    batch: &Batch<'_>,
    lambda: f64,
    unlabeled: &[&[f64]],
) -> Result<LossParts> {
    check_lambda(lambda)?;
    let supervised = loss_supervised(params, batch)?;
    let mut inputs = batch.inputs.clone();
    inputs.extend_from_slice(unlabeled);
    let unsupervised = loss_unsupervised(&params.stack, &inputs)?;
    Ok(LossParts {
        supervised,
        unsupervised,
        total: (1.0 - lambda) * supervised + lambda * unsupervised,
    })
}

/// Exact gradient of the hybrid objective. `U` and the output bias receive
/// only the supervised term; every `W_l` collects its encoder use on both
/// paths and its decoder use on the reconstruction path.
pub fn gradients(
    params: &NetworkParams,
    batch: &Batch<'_>,
    lambda: f64,
    unlabeled: &[&[f64]],
) -> Result<(NetworkParams, LossParts)> {
    check_lambda(lambda)?;
    let mut grads = params.zeros_like();
    let mut parts = LossParts::default();
    let w_sup = 1.0 - lambda;
    for (x, &y) in batch.inputs.iter().zip(&batch.labels) {
        let fwd = forward(params, x)?;
        parts.supervised += sample_sup_loss(&fwd.output, y);
        // ∂L_sup/∂o_j = y_j − u_j where u is not clipped, 0 where it is.
        let delta_out: Vec<f64> = fwd
            .output
            .iter()
            .enumerate()
            .map(|(j, &u)| {
                let target = if j == y { 1.0 } else { 0.0 };
                if u > PROB_CLIP && u < 1.0 - PROB_CLIP {
                    w_sup * (target - u)
                } else {
                    0.0
                }
            })
            .collect();
        let code = fwd.trace.code();
        let mut delta_code = vec![0.0; code.len()];
        if w_sup != 0.0 {
            for (gb, d) in grads.output_bias.iter_mut().zip(&delta_out) {
                *gb += d;
            }
            let gu = &mut grads.output_weights;
            for (r, &a) in code.iter().enumerate() {
                let row = &mut gu.data[r * gu.cols..(r + 1) * gu.cols];
                for (g, d) in row.iter_mut().zip(&delta_out) {
                    *g += a * d;
                }
            }
            params
                .output_weights
                .mul_vec_into(&delta_out, &mut delta_code);
        }
        let (recon, delta_recon) =
            params
                .stack
                .reconstruction_delta(&fwd.trace, x, lambda, &mut grads.stack);
        parts.unsupervised += recon;
        for (d, r) in delta_code.iter_mut().zip(&delta_recon) {
            *d += r;
        }
        params
            .stack
            .backprop_encoder(&fwd.trace, delta_code, &mut grads.stack);
    }
    for x in unlabeled {
        if x.len() != params.input_dim() {
            return Err(invalid!("unlabeled input dimension mismatch"));
        }
        parts.unsupervised += params
            .stack
            .accumulate_reconstruction(x, lambda, &mut grads.stack);
    }
    parts.total = w_sup * parts.supervised + lambda * parts.unsupervised;
    if !parts.total.is_finite() {
        return Err(Error::NonFinite(alloc::string::String::from(
            "hybrid objective",
        )));
    }
    Ok((grads, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::nn::params::Activation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_one_half() {
        let p = NetworkParams::zeros(4, &[3, 2], 5).unwrap();
        let f = forward(&p, &[1.0, -2.0, 3.0, 0.5]).unwrap();
        assert!(f.output.iter().all(|&u| u == 0.5));
    }

    #[test]
    fn rectifier_blocks_negative_input() {
        let mut p = NetworkParams::zeros(1, &[1], 1).unwrap();
        p.stack.hidden_weights[0].data[0] = 1.0;
        p.output_weights.data[0] = 1.0;
        let f = forward(&p, &[-2.0]).unwrap();
        assert_eq!(f.trace.code(), &[0.0]);
        assert_eq!(f.output, vec![0.5]);
    }

    #[test]
    fn wrong_input_length_is_rejected() {
        let p = NetworkParams::zeros(3, &[2], 2).unwrap();
        assert!(forward(&p, &[1.0]).is_err());
    }

    #[test]
    fn hand_computed_supervised_loss() {
        // Build a 1-hidden-unit net whose outputs are exactly (0.9, 0.2) by
        // choosing output biases logit(0.9), logit(0.2) and zero weights.
        let mut p = NetworkParams::zeros(2, &[1], 2).unwrap();
        let logit = |u: f64| libm::log(u / (1.0 - u));
        p.output_bias = vec![logit(0.9), logit(0.2)];
        let x = [0.3, 0.4];
        let batch = Batch::new(vec![&x[..]], vec![0], 2).unwrap();
        let l = loss_supervised(&p, &batch).unwrap();
        let expect = libm::log(0.9) + libm::log(0.8);
        assert!((l - expect).abs() < 1e-12);
        assert!((l + 0.3285).abs() < 1e-4);
    }

    #[test]
    fn uniform_outputs_give_closed_form_loss() {
        let p = NetworkParams::zeros(2, &[3], 4).unwrap();
        let xs: Vec<[f64; 2]> = (0..5).map(|i| [i as f64, 1.0]).collect();
        let batch =
            Batch::new(xs.iter().map(|x| &x[..]).collect(), vec![0, 1, 2, 3, 0], 4).unwrap();
        let l = loss_supervised(&p, &batch).unwrap();
        assert!((l + 5.0 * 4.0 * core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn saturated_correct_prediction_has_near_zero_loss() {
        let mut p = NetworkParams::zeros(1, &[1], 2).unwrap();
        p.output_bias = vec![100.0, -100.0];
        let x = [0.0];
        let batch = Batch::new(vec![&x[..]], vec![0], 2).unwrap();
        let l = loss_supervised(&p, &batch).unwrap();
        assert!(l <= 0.0 && l > -3e-12);
    }

    #[test]
    fn orthogonal_tied_layer_reconstructs_positive_inputs() {
        // W = rotation by 0.3 rad; x chosen so Wᵀx lies in the positive cone.
        let (s, c) = (libm::sin(0.3), libm::cos(0.3));
        let mut stack = TiedAutoencoder::zeros(&[2, 2], &[Activation::Relu]).unwrap();
        stack.hidden_weights[0] = Matrix::from_rows(&[vec![c, -s], vec![s, c]]).unwrap();
        let x = [1.0, 0.8];
        let h = stack.encode(&x);
        assert!(h.iter().all(|&v| v > 0.0));
        let r = stack.decode(&h);
        assert!((r[0] - x[0]).abs() < 1e-9 && (r[1] - x[1]).abs() < 1e-9);
    }

    #[test]
    fn zero_weights_reconstruct_bias_only() {
        let mut stack = TiedAutoencoder::zeros(&[3, 4, 2], &[Activation::Relu; 2]).unwrap();
        assert_eq!(stack.reconstruct(&[1.0, 2.0, 3.0]), vec![0.0; 3]);
        stack.decoder_biases[0] = vec![0.5, -1.0, 2.0];
        assert_eq!(stack.reconstruct(&[1.0, 2.0, 3.0]), vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn reconstruction_shape_matches_input_for_any_architecture() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for sizes in [vec![7, 3], vec![5, 9, 2], vec![4, 6, 6, 1, 3]] {
            let acts = vec![Activation::Relu; sizes.len() - 1];
            let s = TiedAutoencoder::glorot(&sizes, &acts, &mut rng).unwrap();
            let x = vec![0.3; sizes[0]];
            assert_eq!(s.reconstruct(&x).len(), sizes[0]);
            assert_eq!(s.encode(&x).len(), *sizes.last().unwrap());
        }
    }

    #[test]
    fn unsupervised_loss_small_cases() {
        let stack = TiedAutoencoder::zeros(&[2, 3], &[Activation::Relu]).unwrap();
        // x̃ = 0, so x − x̃ = (1, 1)
        let x = [1.0, 1.0];
        assert_eq!(loss_unsupervised(&stack, &[&x]).unwrap(), -1.0);
        let zero = [0.0, 0.0];
        assert_eq!(loss_unsupervised(&stack, &[&zero]).unwrap(), 0.0);
    }

    #[test]
    fn hybrid_arithmetic_and_lambda_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = NetworkParams::glorot(3, &[4], 2, &mut rng).unwrap();
        let x = [0.1, 0.2, -0.3];
        let b = Batch::new(vec![&x[..]], vec![1], 2).unwrap();
        let parts = loss_hybrid(&p, &b, 0.5, &[]).unwrap();
        assert_eq!(
            parts.total,
            0.5 * parts.supervised + 0.5 * parts.unsupervised
        );
        assert!(loss_hybrid(&p, &b, 1.5, &[]).is_err());
        assert!(loss_hybrid(&p, &b, -0.1, &[]).is_err());
    }

    #[test]
    fn pure_reconstruction_leaves_output_layer_untouched() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = NetworkParams::glorot(4, &[5, 3], 3, &mut rng).unwrap();
        let xs = [[0.2, -0.1, 0.5, 0.9], [1.0, 0.3, -0.4, 0.0]];
        let b = Batch::new(xs.iter().map(|x| &x[..]).collect(), vec![0, 2], 3).unwrap();
        let (g, _) = gradients(&p, &b, 1.0, &[]).unwrap();
        assert!(g.output_weights.data.iter().all(|&v| v == 0.0));
        assert!(g.output_bias.iter().all(|&v| v == 0.0));
        assert!(g.stack.hidden_weights[0].data.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn stationary_point_has_zero_gradient() {
        // Identity-like tied layer reconstructs x exactly, and saturated
        // outputs match the target up to the clip tolerance.
        let mut p = NetworkParams::zeros(2, &[2], 2).unwrap();
        p.stack.hidden_weights[0] = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        p.output_bias = vec![60.0, -60.0];
        let x = [0.4, 0.7];
        let b = Batch::new(vec![&x[..]], vec![0], 2).unwrap();
        for lambda in [0.0, 0.5, 1.0] {
            let (g, _) = gradients(&p, &b, lambda, &[]).unwrap();
            for block in g.blocks() {
                assert!(block.iter().all(|v| v.abs() < 1e-12), "{block:?}");
            }
        }
    }

    #[test]
    fn tied_weights_feed_both_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = TiedAutoencoder::glorot(&[3, 4], &[Activation::Relu], &mut rng).unwrap();
        // Positive weights keep every rectifier active.
        s.hidden_weights[0]
            .data
            .iter_mut()
            .for_each(|w| *w = w.abs());
        let x = [0.5, 0.2, 0.9];
        let h0 = s.encode(&x);
        let fixed_code = vec![0.3, 0.1, 0.7, 0.2];
        let r0 = s.decode(&fixed_code);
        s.hidden_weights[0].data[0] += 0.25;
        assert_ne!(s.encode(&x), h0);
        assert_ne!(s.decode(&fixed_code), r0);
    }
}
