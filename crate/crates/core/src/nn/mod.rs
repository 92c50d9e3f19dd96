//! Feedforward network with a tied-weight reconstruction path.
//!
//! The hidden stack doubles as the encoder of a deep autoencoder whose
//! decoder reuses the same weight matrices in reverse order. The output
//! layer `U` only serves classification.

mod adadelta;
mod network;
mod params;
mod train;

pub use adadelta::{adadelta_step, AdadeltaState, DEFAULT_EPSILON, DEFAULT_RHO};
pub use network::{
    clip_probability, decode, encode, forward, gradients, loss_hybrid, loss_supervised,
    loss_unsupervised, Batch, EncoderTrace, Forward, LossParts, PROB_CLIP,
};
pub use params::{sigmoid, Activation, NetworkParams, Parameters, TiedAutoencoder};
pub use train::{train, EpochLog, InitScheme, LabeledFrameDataset, TrainConfig, Trained};

pub(crate) use train::optimize;
