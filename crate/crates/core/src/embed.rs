//! Two-dimensional embeddings of frame features: a deep tied autoencoder with
//! a linear 2-unit code layer, and a PCA baseline.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::nn::{
    optimize, Activation, EpochLog, LossParts, Parameters, TiedAutoencoder, DEFAULT_EPSILON,
    DEFAULT_RHO,
};

pub type Point2 = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VizConfig {
    /// Hidden sizes; the last entry is the code layer and must be 2.
    pub arch: Vec<usize>,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub adadelta_rho: f64,
    pub adadelta_epsilon: f64,
    pub seed: u64,
}

impl Default for VizConfig {
    fn default() -> Self {
        Self {
            arch: vec![1000, 500, 100, 2],
            epochs: 50,
            minibatch_size: 128,
            adadelta_rho: DEFAULT_RHO,
            adadelta_epsilon: DEFAULT_EPSILON,
            seed: 0,
        }
    }
}

impl VizConfig {
    pub fn validate(&self) -> Result<()> {
        if self.arch.last() != Some(&2) {
            return Err(invalid!("the code layer must have exactly 2 units"));
        }
        if self.arch.contains(&0) {
            return Err(invalid!("layer sizes must be positive"));
        }
        if self.minibatch_size < 1 {
            return Err(invalid!("minibatch_size must be at least 1"));
        }
        if !(self.adadelta_rho > 0.0 && self.adadelta_rho < 1.0) || !(self.adadelta_epsilon > 0.0) {
            return Err(invalid!("invalid ADADELTA constants"));
        }
        Ok(())
    }
}

/// Rectified hidden layers around a linear 2-unit code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VizAutoencoder {
    pub stack: TiedAutoencoder,
    pub log: Vec<EpochLog>,
}

impl VizAutoencoder {
    pub fn embed(&self, x: &[f64]) -> Result<Point2> {
        if x.len() != self.stack.input_dim() {
            return Err(invalid!(
                "frame has {} components, autoencoder expects {}",
                x.len(),
                self.stack.input_dim()
            ));
        }
        let h = self.stack.encode(x);
        Ok([h[0], h[1]])
    }
}

/// Trains on reconstruction alone. Zero epochs return the initial model.
pub fn train_viz_autoencoder(frames: &[Vec<f64>], config: &VizConfig) -> Result<VizAutoencoder> {
    config.validate()?;
    let dim = frames
        .first()
        .map(Vec::len)
        .ok_or_else(|| invalid!("no frames to embed"))?;
    if dim == 0 || frames.iter().any(|f| f.len() != dim) {
        return Err(invalid!("frames must share a positive dimension"));
    }
    let mut sizes = vec![dim];
    sizes.extend_from_slice(&config.arch);
    let mut activations = vec![Activation::Relu; config.arch.len()];
    *activations.last_mut().expect("non-empty arch") = Activation::Linear;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let stack = TiedAutoencoder::glorot(&sizes, &activations, &mut rng)?;
    let step_grad = |p: &TiedAutoencoder, idx: &[usize], _step: usize| {
        let mut g = p.zeros_like();
        for &i in idx {
            p.accumulate_reconstruction(&frames[i], 1.0, &mut g);
        }
        Ok(g)
    };
    let evaluate = |p: &TiedAutoencoder| {
        let mut total = 0.0;
        for x in frames {
            let r = p.reconstruct(x);
            total -= 0.5
                * x.iter()
                    .zip(&r)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
        }
        Ok(LossParts {
            supervised: 0.0,
            unsupervised: total,
            total,
        })
    };
    let trained = optimize(
        stack,
        frames.len(),
        config.epochs,
        config.minibatch_size,
        config.adadelta_rho,
        config.adadelta_epsilon,
        &mut rng,
        step_grad,
        evaluate,
    )?;
    Ok(VizAutoencoder {
        stack: trained.params,
        log: trained.log,
    })
}

/// Points of one sequence, in frame order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub source_id: String,
    pub label: String,
    pub points: Vec<Point2>,
}

pub fn embed_2d(model: &VizAutoencoder, frames: &[Vec<f64>]) -> Result<Vec<Point2>> {
    frames.iter().map(|x| model.embed(x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Two orthonormal directions, leading first.
    pub components: [Vec<f64>; 2],
    pub eigenvalues: [f64; 2],
}

/// Leading two eigenvectors of the sample covariance (divisor `n − 1`).
/// Each direction's sign is fixed so its largest-magnitude entry is positive.
pub fn pca_fit(frames: &[Vec<f64>]) -> Result<PcaModel> {
    let n = frames.len();
    if n < 2 {
        return Err(invalid!("PCA needs at least 2 samples, got {n}"));
    }
    let d = frames[0].len();
    if d < 2 || frames.iter().any(|f| f.len() != d) {
        return Err(invalid!("PCA needs samples of a common dimension >= 2"));
    }
    let mut mean = vec![0.0; d];
    for f in frames {
        for (m, v) in mean.iter_mut().zip(f) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = Matrix::zeros(d, d);
    let mut c = vec![0.0; d];
    for f in frames {
        for ((ci, v), m) in c.iter_mut().zip(f).zip(&mean) {
            *ci = v - m;
        }
        for i in 0..d {
            let row = &mut cov.data[i * d..(i + 1) * d];
            for (r, cj) in row[i..].iter_mut().zip(&c[i..]) {
                *r += c[i] * cj;
            }
        }
    }
    let scale = 1.0 / (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov.get(i, j) * scale;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    if cov.data.iter().all(|&v| v == 0.0) {
        return Err(Error::DegeneratePoints(String::from(
            "all samples are identical, so the covariance is zero; supply varied input",
        )));
    }
    let (values, vectors) = symmetric_eigen(&cov)?;
    let column = |k: usize| {
        let mut v: Vec<f64> = (0..d).map(|i| vectors.get(i, k)).collect();
        let big = v
            .iter()
            .copied()
            .fold(0.0_f64, |a, x| if x.abs() > a.abs() { x } else { a });
        if big < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        v
    };
    Ok(PcaModel {
        mean,
        components: [column(0), column(1)],
        eigenvalues: [values[0].max(0.0), values[1].max(0.0)],
    })
}

pub fn pca_project(model: &PcaModel, frames: &[Vec<f64>]) -> Result<Vec<Point2>> {
    frames
        .iter()
        .map(|x| {
            if x.len() != model.mean.len() {
                return Err(invalid!(
                    "frame has {} components, PCA model expects {}",
                    x.len(),
                    model.mean.len()
                ));
            }
            let mut p = [0.0; 2];
            for (k, comp) in model.components.iter().enumerate() {
                p[k] = x
                    .iter()
                    .zip(&model.mean)
                    .zip(comp)
                    .map(|((v, m), c)| (v - m) * c)
                    .sum();
            }
            Ok(p)
        })
        .collect()
}

/// Fraction of points whose nearest neighbour from a different sequence
/// carries the same label. Neighbours from the point's own sequence are
/// skipped, since consecutive frames would otherwise match trivially.
pub fn nearest_neighbor_purity(embeddings: &[Embedding]) -> Result<f64> {
    let points: Vec<(usize, &str, Point2)> = embeddings
        .iter()
        .enumerate()
        .flat_map(|(s, e)| e.points.iter().map(move |&p| (s, e.label.as_str(), p)))
        .collect();
    if embeddings.len() < 2 || points.is_empty() {
        return Err(invalid!("purity needs at least two non-empty sequences"));
    }
    let mut hits = 0usize;
    for &(s, label, p) in &points {
        let mut best = f64::INFINITY;
        let mut best_label = "";
        for &(t, other, q) in &points {
            if t == s {
                continue;
            }
            let d = (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]);
            if d < best {
                best = d;
                best_label = other;
            }
        }
        hits += usize::from(best_label == label);
    }
    Ok(hits as f64 / points.len() as f64)
}
