use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use mocap_core::synth::{synth_generate, SynthConfig};
use serde::Serialize;

use super::{create_writer, to_value};
use crate::config::load_settings;
use crate::error::{MocapError, Result};
use crate::jsonl::write_jsonl;

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// TOML generator settings (classes, counts, noise); built-in six-class set when omitted
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output JSONL motion file
    #[arg(long)]
    pub out: PathBuf,
    /// Sequences generated per class
    #[arg(long)]
    pub sequences_per_class: Option<usize>,
    /// Standard deviation of positional noise
    #[arg(long)]
    pub noise_sigma: Option<f64>,
}

#[derive(Serialize)]
struct Header<'a> {
    format: &'a str,
    config: serde_json::Value,
}

pub fn run(args: &SynthArgs, seed: Option<u64>) -> Result<()> {
    let mut s: SynthConfig = load_settings(args.config.as_deref())?;
    if let Some(n) = args.sequences_per_class {
        s.sequences_per_class = n;
    }
    if let Some(v) = args.noise_sigma {
        s.noise_sigma = v;
    }
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let seqs = synth_generate(&s)?;
    let header = Header {
        format: "mocap-motion",
        config: to_value(&s)?,
    };
    let mut w = create_writer(&args.out)?;
    write_jsonl(&mut w, Some(&header), &seqs)?;
    w.flush().map_err(|e| MocapError::io(&args.out, e))?;
    log::info!(
        "wrote {} synthetic sequences to {}",
        seqs.len(),
        args.out.display()
    );
    Ok(())
}
