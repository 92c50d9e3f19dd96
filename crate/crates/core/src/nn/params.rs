use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Linear => z,
        }
    }

    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Anything that exposes its parameters as flat blocks in a fixed order.
pub trait Parameters: Clone {
    fn blocks(&self) -> Vec<&[f64]>;
    fn blocks_mut(&mut self) -> Vec<&mut [f64]>;

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for b in z.blocks_mut() {
            b.iter_mut().for_each(|v| *v = 0.0);
        }
        z
    }

    fn all_finite(&self) -> bool {
        self.blocks()
            .iter()
            .all(|b| b.iter().all(|v| v.is_finite()))
    }
}

/// Stack of hidden layers shared between an encoder and a tied decoder.
///
/// Layer `l` maps `sizes[l-1] → sizes[l]` with `W_lᵀ`; the decoder reuses
/// the same `W_l` (untransposed) to map back. Only biases are separate for
/// the decoding direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiedAutoencoder {
    pub sizes: Vec<usize>,
    /// `W_l` stored as `sizes[l-1] x sizes[l]`.
    pub hidden_weights: Vec<Matrix>,
    pub hidden_biases: Vec<Vec<f64>>,
    /// Bias of the decoder layer that reconstructs `sizes[l-1]` from `sizes[l]`.
    pub decoder_biases: Vec<Vec<f64>>,
    pub activations: Vec<Activation>,
}

impl TiedAutoencoder {
    pub fn zeros(sizes: &[usize], activations: &[Activation]) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(invalid!("need an input size and at least one hidden layer"));
        }
        if activations.len() != sizes.len() - 1 {
            return Err(invalid!("one activation per hidden layer required"));
        }
        if sizes.contains(&0) {
            return Err(invalid!("layer sizes must be positive"));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            hidden_weights: sizes
                .windows(2)
                .map(|w| Matrix::zeros(w[0], w[1]))
                .collect(),
            hidden_biases: sizes[1..].iter().map(|&s| vec![0.0; s]).collect(),
            decoder_biases: sizes[..sizes.len() - 1]
                .iter()
                .map(|&s| vec![0.0; s])
                .collect(),
            activations: activations.to_vec(),
        })
    }

    pub fn glorot<R: Rng>(
        sizes: &[usize],
        activations: &[Activation],
        rng: &mut R,
    ) -> Result<Self> {
        let mut s = Self::zeros(sizes, activations)?;
        for w in &mut s.hidden_weights {
            glorot_fill(w, rng);
        }
        Ok(s)
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn code_dim(&self) -> usize {
        *self.sizes.last().expect("non-empty sizes")
    }

    pub fn depth(&self) -> usize {
        self.hidden_weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.sizes.len().saturating_sub(1);
        if l == 0
            || self.hidden_weights.len() != l
            || self.hidden_biases.len() != l
            || self.decoder_biases.len() != l
            || self.activations.len() != l
        {
            return Err(invalid!("layer lists disagree with sizes"));
        }
        for k in 0..l {
            let w = &self.hidden_weights[k];
            if w.rows != self.sizes[k]
                || w.cols != self.sizes[k + 1]
                || w.data.len() != w.rows * w.cols
                || self.hidden_biases[k].len() != self.sizes[k + 1]
                || self.decoder_biases[k].len() != self.sizes[k]
            {
                return Err(invalid!("layer {} has inconsistent shapes", k + 1));
            }
        }
        if !self.all_finite() {
            return Err(invalid!("non-finite parameter"));
        }
        Ok(())
    }
}

pub(crate) fn glorot_fill<R: Rng>(w: &mut Matrix, rng: &mut R) {
    let limit = libm::sqrt(6.0 / (w.rows + w.cols) as f64);
    for v in &mut w.data {
        *v = rng.random_range(-limit..limit);
    }
}

impl Parameters for TiedAutoencoder {
    fn blocks(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(3 * self.depth());
        for k in 0..self.depth() {
            out.push(self.hidden_weights[k].data.as_slice());
            out.push(self.hidden_biases[k].as_slice());
            out.push(self.decoder_biases[k].as_slice());
        }
        out
    }

    fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(3 * self.hidden_weights.len());
        for ((w, b), c) in self
            .hidden_weights
            .iter_mut()
            .zip(self.hidden_biases.iter_mut())
            .zip(self.decoder_biases.iter_mut())
        {
            out.push(w.data.as_mut_slice());
            out.push(b.as_mut_slice());
            out.push(c.as_mut_slice());
        }
        out
    }
}

/// Hidden stack plus a sigmoid output layer `u = σ(Uᵀ h + d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub stack: TiedAutoencoder,
    /// `U`, stored as `code_dim x q`.
    pub output_weights: Matrix,
    pub output_bias: Vec<f64>,
}

impl NetworkParams {
    /// All-zero network with rectified hidden layers.
    pub fn zeros(input: usize, hidden: &[usize], classes: usize) -> Result<Self> {
        if classes == 0 {
            return Err(invalid!("need at least one output class"));
        }
        let mut sizes = vec![input];
        sizes.extend_from_slice(hidden);
        let stack = TiedAutoencoder::zeros(&sizes, &vec![Activation::Relu; hidden.len()])?;
        let top = stack.code_dim();
        Ok(Self {
            stack,
            output_weights: Matrix::zeros(top, classes),
            output_bias: vec![0.0; classes],
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot<R: Rng>(
        input: usize,
        hidden: &[usize],
        classes: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut p = Self::zeros(input, hidden, classes)?;
        for w in &mut p.stack.hidden_weights {
            glorot_fill(w, rng);
        }
        glorot_fill(&mut p.output_weights, rng);
        Ok(p)
    }

    pub fn input_dim(&self) -> usize {
        self.stack.input_dim()
    }

    pub fn num_classes(&self) -> usize {
        self.output_bias.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.stack.validate()?;
        let q = self.output_bias.len();
        if q == 0
            || self.output_weights.rows != self.stack.code_dim()
            || self.output_weights.cols != q
            || self.output_weights.data.len() != self.output_weights.rows * q
        {
            return Err(invalid!("output layer shape mismatch"));
        }
        if !self.all_finite() {
            return Err(invalid!("non-finite parameter"));
        }
        Ok(())
    }
}

impl Parameters for NetworkParams {
    fn blocks(&self) -> Vec<&[f64]> {
        let mut out = self.stack.blocks();
        out.push(self.output_weights.data.as_slice());
        out.push(self.output_bias.as_slice());
        out
    }

    fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = self.stack.blocks_mut();
        out.push(self.output_weights.data.as_mut_slice());
        out.push(self.output_bias.as_mut_slice());
        out
    }
}
