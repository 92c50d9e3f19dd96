use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adadelta::{adadelta_step, AdadeltaState, DEFAULT_EPSILON, DEFAULT_RHO};
use super::network::{gradients, loss_hybrid, Batch, LossParts};
use super::params::{NetworkParams, Parameters};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitScheme {
    #[default]
    GlorotUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub adadelta_rho: f64,
    pub adadelta_epsilon: f64,
    pub seed: u64,
    pub init_scale: InitScheme,
    /// Extra inputs that only enter the reconstruction term.
    #[serde(skip)]
    pub unlabeled_data: Option<Vec<Vec<f64>>>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            epochs: 100,
            minibatch_size: 128,
            adadelta_rho: DEFAULT_RHO,
            adadelta_epsilon: DEFAULT_EPSILON,
            seed: 0,
            init_scale: InitScheme::GlorotUniform,
            unlabeled_data: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(invalid!("lambda must lie in [0, 1]"));
        }
        if self.epochs < 1 {
            return Err(invalid!("epochs must be at least 1"));
        }
        if self.minibatch_size < 1 {
            return Err(invalid!("minibatch_size must be at least 1"));
        }
        if !(self.adadelta_rho > 0.0 && self.adadelta_rho < 1.0) {
            return Err(invalid!("adadelta_rho must lie in (0, 1)"));
        }
        if !(self.adadelta_epsilon > 0.0) {
            return Err(invalid!("adadelta_epsilon must be positive"));
        }
        Ok(())
    }
}

/// Frame-level training data: one input row and class index per frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledFrameDataset {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    /// Index of the sequence each frame came from.
    pub sequence_ids: Vec<usize>,
}

impl LabeledFrameDataset {
    pub fn validate(&self) -> Result<()> {
        if self.inputs.len() != self.labels.len() || self.inputs.len() != self.sequence_ids.len() {
            return Err(invalid!("inputs, labels and sequence ids differ in length"));
        }
        if self.labels.iter().any(|&l| l >= self.num_classes) {
            return Err(invalid!("label out of range"));
        }
        let dim = self.dim();
        if self.inputs.iter().any(|x| x.len() != dim) {
            return Err(invalid!("ragged inputs"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    /// One-hot target of row `i`.
    pub fn target(&self, i: usize) -> Vec<f64> {
        (0..self.num_classes)
            .map(|c| if c == self.labels[i] { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn batch(&self, idx: &[usize]) -> Batch<'_> {
        Batch {
            inputs: idx.iter().map(|&i| self.inputs[i].as_slice()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
        }
    }

    pub fn as_batch(&self) -> Batch<'_> {
        Batch {
            inputs: self.inputs.iter().map(Vec::as_slice).collect(),
            labels: self.labels.clone(),
            num_classes: self.num_classes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    /// 0 is the initial model.
    pub epoch: usize,
    pub supervised: f64,
    pub unsupervised: f64,
    pub total: f64,
}

impl EpochLog {
    fn new(epoch: usize, parts: LossParts) -> Self {
        Self {
            epoch,
            supervised: parts.supervised,
            unsupervised: parts.unsupervised,
            total: parts.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trained<P> {
    pub params: P,
    pub log: Vec<EpochLog>,
}

/// Minibatch ADADELTA ascent shared by classifier and autoencoder training.
///
/// `step_grad` returns the gradient over a set of row indices; `evaluate`
/// scores the full training set after every epoch.
#[allow(clippy::too_many_arguments)]
pub(crate) fn optimize<P, G, E>(
    mut params: P,
    rows: usize,
    epochs: usize,
    minibatch: usize,
    rho: f64,
    epsilon: f64,
    rng: &mut ChaCha8Rng,
    mut step_grad: G,
    mut evaluate: E,
) -> Result<Trained<P>>
where
    P: Parameters,
    G: FnMut(&P, &[usize], usize) -> Result<P>,
    E: FnMut(&P) -> Result<LossParts>,
{
    let mut state = AdadeltaState::new(&params);
    let mut log = Vec::with_capacity(epochs + 1);
    log.push(EpochLog::new(0, evaluate(&params)?));
    let mut order: Vec<usize> = (0..rows).collect();
    let mut step = 0usize;
    for epoch in 1..=epochs {
        order.shuffle(rng);
        for chunk in order.chunks(minibatch) {
            let g = step_grad(&params, chunk, step)?;
            adadelta_step(&mut params, &g, &mut state, rho, epsilon)?;
            step += 1;
        }
        let parts = evaluate(&params)?;
        if !parts.total.is_finite() || !params.all_finite() {
            return Err(Error::NonFinite(alloc::format!(
                "objective diverged at epoch {epoch} (L_sup = {}, L_unsup = {})",
                parts.supervised,
                parts.unsupervised
            )));
        }
        log.push(EpochLog::new(epoch, parts));
    }
    Ok(Trained { params, log })
}

/// Trains a hybrid MLP with hidden layer sizes `hidden` on `data`.
pub fn train(
    data: &LabeledFrameDataset,
    hidden: &[usize],
    config: &TrainConfig,
) -> Result<Trained<NetworkParams>> {
    config.validate()?;
    data.validate()?;
    if data.is_empty() {
        return Err(invalid!("empty training set"));
    }
    if hidden.is_empty() {
        return Err(invalid!("at least one hidden layer is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let params = match config.init_scale {
        InitScheme::GlorotUniform => {
            NetworkParams::glorot(data.dim(), hidden, data.num_classes, &mut rng)?
        }
    };
    let unlabeled: Vec<&[f64]> = config
        .unlabeled_data
        .as_deref()
        .unwrap_or(&[])
        .iter()
        .map(Vec::as_slice)
        .collect();
    if unlabeled.iter().any(|x| x.len() != data.dim()) {
        return Err(invalid!(
            "unlabeled data dimension differs from labeled data"
        ));
    }
    let lambda = config.lambda;
    let minibatch = config.minibatch_size;
    let step_grad = |p: &NetworkParams, idx: &[usize], step: usize| {
        // Unlabeled rows are consumed in a fixed cyclic order, one slice per
        // labeled minibatch.
        let extra: Vec<&[f64]> = if unlabeled.is_empty() {
            Vec::new()
        } else {
            (0..minibatch)
                .map(|k| unlabeled[(step * minibatch + k) % unlabeled.len()])
                .collect()
        };
        gradients(p, &data.batch(idx), lambda, &extra).map(|(g, _)| g)
    };
    let evaluate = |p: &NetworkParams| loss_hybrid(p, &data.as_batch(), lambda, &unlabeled);
    optimize(
        params,
        data.len(),
        config.epochs,
        minibatch,
        config.adadelta_rho,
        config.adadelta_epsilon,
        &mut rng,
        step_grad,
        evaluate,
    )
}
