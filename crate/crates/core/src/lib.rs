//! Motion-capture action recognition: skeleton normalization, per-frame
//! PO/TD/NT features, a hybrid classify-and-reconstruct MLP, sequence
//! decisions from per-frame posteriors, cross-validation, and 2-D embeddings.
//!
//! The crate is `no_std` and needs only `alloc`. File formats and the
//! command-line tool live in the `mocap` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod align;
pub mod classify;
pub mod elm;
pub mod embed;
mod error;
pub mod eval;
pub mod features;
pub mod linalg;
pub mod nn;
pub mod seed;
pub mod skeleton;
pub mod synth;

pub use error::{Error, Result};
