//! File formats, artifacts and the `mocap` command-line tool built on
//! [`mocap_core`].

pub mod amc;
pub mod artifact;
pub mod asf;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod featfile;
pub mod jsonl;
pub mod mergemap;
pub mod plot;

pub use error::{MocapError, Result};
