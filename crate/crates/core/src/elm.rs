//! Extreme learning machine baseline: a frozen random sigmoid layer with a
//! ridge-regression readout.

use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::argmax;
use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky_solve, Matrix};
use crate::nn::{sigmoid, LabeledFrameDataset};

pub const DEFAULT_HIDDEN: usize = 2000;
pub const DEFAULT_RIDGE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElmModel {
    /// `input x hidden`, drawn once and never trained.
    input_weights: Matrix,
    input_bias: Vec<f64>,
    /// `hidden x classes`.
    pub readout: Matrix,
    pub ridge: f64,
}

impl ElmModel {
    pub fn hidden_size(&self) -> usize {
        self.input_bias.len()
    }

    pub fn input_weights(&self) -> &Matrix {
        &self.input_weights
    }

    pub fn input_bias(&self) -> &[f64] {
        &self.input_bias
    }

    pub fn hidden(&self, x: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.hidden_size()];
        self.input_weights.t_mul_vec_into(x, &mut h);
        h.iter_mut()
            .zip(&self.input_bias)
            .for_each(|(v, b)| *v = sigmoid(*v + b));
        h
    }

    /// Readout scores `βᵀ h(x)`.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.readout.cols];
        self.readout.t_mul_vec_into(&self.hidden(x), &mut s);
        s
    }
}

/// Solves `(HᵀH + ridge·I) β = HᵀT` with one-hot targets `T`.
pub fn elm_train(
    data: &LabeledFrameDataset,
    hidden: usize,
    ridge: f64,
    seed: u64,
) -> Result<ElmModel> {
    data.validate()?;
    if data.is_empty() {
        return Err(invalid!("empty training set"));
    }
    if hidden == 0 {
        return Err(invalid!("hidden size must be at least 1"));
    }
    if !(ridge >= 0.0) {
        return Err(invalid!("ridge must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = data.dim();
    let mut input_weights = Matrix::zeros(d, hidden);
    for w in &mut input_weights.data {
        *w = rng.random_range(-1.0..1.0);
    }
    let input_bias: Vec<f64> = (0..hidden).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut model = ElmModel {
        input_weights,
        input_bias,
        readout: Matrix::zeros(hidden, data.num_classes),
        ridge,
    };
    let mut gram = Matrix::zeros(hidden, hidden);
    let mut rhs = Matrix::zeros(hidden, data.num_classes);
    for (x, &y) in data.inputs.iter().zip(&data.labels) {
        let h = model.hidden(x);
        for (i, &hi) in h.iter().enumerate() {
            let row = &mut gram.data[i * hidden..(i + 1) * hidden];
            // Lower triangle plus diagonal; mirrored below.
            for (g, &hj) in row[..=i].iter_mut().zip(&h[..=i]) {
                *g += hi * hj;
            }
            rhs.data[i * data.num_classes + y] += hi;
        }
    }
    for i in 0..hidden {
        for j in 0..i {
            let v = gram.get(i, j);
            gram.set(j, i, v);
        }
        let v = gram.get(i, i);
        gram.set(i, i, v + ridge);
    }
    model.readout = cholesky_solve(&gram, &rhs).map_err(|e| match e {
        Error::Singular(msg) if ridge == 0.0 => {
            Error::Singular(alloc::format!("{msg}; use a positive ridge coefficient"))
        }
        other => other,
    })?;
    if !model.readout.data.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite(alloc::string::String::from("ELM readout")));
    }
    Ok(model)
}

/// Per-frame argmax of the readout scores.
pub fn elm_predict(model: &ElmModel, frames: &[Vec<f64>]) -> Result<Vec<usize>> {
    frames
        .iter()
        .map(|x| {
            if x.len() != model.input_weights.rows {
                Err(invalid!(
                    "frame has {} components, model expects {}",
                    x.len(),
                    model.input_weights.rows
                ))
            } else {
                Ok(argmax(&model.scores(x)))
            }
        })
        .collect()
}
