use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use mocap_core::embed::{
    embed_2d, pca_fit, pca_project, train_viz_autoencoder, Embedding, VizConfig,
};
use mocap_core::eval::FeatureDataset;
use mocap_core::seed::derive_seed;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::train::load_dataset;
use super::{require, sibling, to_value, write_text};
use crate::config::load_settings;
use crate::error::{MocapError, Result};
use crate::plot::{render_csv, render_svg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EmbedMethod {
    /// Deep autoencoder with a two-unit code layer
    #[default]
    Ae,
    /// First two principal components
    Pca,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// TOML settings, or an artifact whose embedded config is reused
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Labeled feature file
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<EmbedMethod>,
    /// Autoencoder layer sizes ending in 2, e.g. 1000,500,100,2
    #[arg(long, value_delimiter = ',')]
    pub arch: Option<Vec<usize>>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub minibatch_size: Option<usize>,
    /// Keep at most this many randomly chosen sequences of each class
    #[arg(long)]
    pub sequences_per_class: Option<usize>,
    /// Only embed these classes (after merging)
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<String>>,
    /// Class merge map file, or builtin:hdm05_65
    #[arg(long)]
    pub merge_map: Option<String>,
    /// Output SVG plot
    #[arg(long)]
    pub out: PathBuf,
    /// Output CSV of coordinates; defaults to the SVG path with a .csv extension
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedSettings {
    pub features: PathBuf,
    pub method: EmbedMethod,
    pub arch: Vec<usize>,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub sequences_per_class: Option<usize>,
    pub classes: Option<Vec<String>>,
    pub merge_map: Option<String>,
    pub seed: u64,
}

impl Default for EmbedSettings {
    fn default() -> Self {
        let v = VizConfig::default();
        Self {
            features: PathBuf::new(),
            method: EmbedMethod::Ae,
            arch: v.arch,
            epochs: v.epochs,
            minibatch_size: v.minibatch_size,
            sequences_per_class: None,
            classes: None,
            merge_map: None,
            seed: 1,
        }
    }
}

/// Indices of the sequences to embed, in dataset order.
pub fn select_sequences(data: &FeatureDataset, s: &EmbedSettings) -> Result<Vec<usize>> {
    let wanted: Option<Vec<usize>> = match &s.classes {
        None => None,
        Some(names) => Some(
            names
                .iter()
                .map(|n| {
                    data.class_names
                        .iter()
                        .position(|c| c == n)
                        .ok_or_else(|| MocapError::Config(format!("unknown class `{n}`")))
                })
                .collect::<Result<_>>()?,
        ),
    };
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, q) in data.sequences.iter().enumerate() {
        if wanted.as_ref().is_none_or(|w| w.contains(&q.label)) {
            by_class.entry(q.label).or_default().push(i);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(s.seed, "embed-subsample"));
    let mut keep = Vec::new();
    for idx in by_class.values_mut() {
        if let Some(n) = s.sequences_per_class {
            idx.shuffle(&mut rng);
            idx.truncate(n);
        }
        keep.extend_from_slice(idx);
    }
    keep.sort_unstable();
    if keep.is_empty() {
        return Err(MocapError::Config("no sequences selected".into()));
    }
    Ok(keep)
}

type Projector = Box<dyn Fn(&[Vec<f64>]) -> mocap_core::Result<Vec<[f64; 2]>>>;

/// 2-D trajectories of the selected sequences.
pub fn embed_sequences(data: &FeatureDataset, s: &EmbedSettings) -> Result<Vec<Embedding>> {
    let keep = select_sequences(data, s)?;
    let frames: Vec<Vec<f64>> = keep
        .iter()
        .flat_map(|&i| data.sequences[i].frames.clone())
        .collect();
    let project: Projector = match s.method {
        EmbedMethod::Pca => {
            let model = pca_fit(&frames)?;
            Box::new(move |f| pca_project(&model, f))
        }
        EmbedMethod::Ae => {
            let config = VizConfig {
                arch: s.arch.clone(),
                epochs: s.epochs,
                minibatch_size: s.minibatch_size,
                seed: derive_seed(s.seed, "embed"),
                ..VizConfig::default()
            };
            let model = train_viz_autoencoder(&frames, &config)?;
            Box::new(move |f| embed_2d(&model, f))
        }
    };
    keep.iter()
        .map(|&i| {
            let q = &data.sequences[i];
            Ok(Embedding {
                source_id: q.source_id.clone(),
                label: data.class_names[q.label].clone(),
                points: project(&q.frames)?,
            })
        })
        .collect()
}

pub fn run(args: &EmbedArgs, seed: Option<u64>) -> Result<()> {
    let mut s: EmbedSettings = load_settings(args.config.as_deref())?;
    if let Some(v) = &args.features {
        s.features = v.clone();
    }
    if let Some(v) = args.method {
        s.method = v;
    }
    if let Some(v) = &args.arch {
        s.arch = v.clone();
    }
    if let Some(v) = args.epochs {
        s.epochs = v;
    }
    if let Some(v) = args.minibatch_size {
        s.minibatch_size = v;
    }
    if args.sequences_per_class.is_some() {
        s.sequences_per_class = args.sequences_per_class;
    }
    if args.classes.is_some() {
        s.classes = args.classes.clone();
    }
    if args.merge_map.is_some() {
        s.merge_map = args.merge_map.clone();
    }
    if let Some(v) = seed {
        s.seed = v;
    }
    require(&s.features, "--features")?;

    let (_, data) = load_dataset(&s.features, s.merge_map.as_deref())?;
    let embeddings = embed_sequences(&data, &s)?;
    let meta = to_value(&s)?.to_string();
    write_text(&args.out, &render_svg(&embeddings, &meta))?;
    let csv = args
        .csv
        .clone()
        .unwrap_or_else(|| sibling(&args.out, "csv"));
    write_text(&csv, &render_csv(&embeddings, &meta))?;
    log::info!(
        "embedded {} sequences into {}",
        embeddings.len(),
        args.out.display()
    );
    Ok(())
}
