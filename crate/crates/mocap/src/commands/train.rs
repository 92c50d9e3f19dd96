use std::path::{Path, PathBuf};

use clap::Args;
use mocap_core::eval::FeatureDataset;
use mocap_core::nn::TrainConfig;
use serde::{Deserialize, Serialize};

use super::{load_merge_map, open_reader, require, to_value};
use crate::artifact::{write_json, ClassifierKind, ClassifierSpec, ModelArtifact, MODEL_FORMAT};
use crate::config::load_settings;
use crate::error::{MocapError, Result};
use crate::featfile::{read_features, FeatureFile};

/// Classifier settings shared by `train` and `eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSettings {
    pub classifier: ClassifierKind,
    /// Hidden layer sizes of the network.
    pub arch: Vec<usize>,
    pub lambda: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub adadelta_rho: f64,
    pub adadelta_epsilon: f64,
    pub elm_hidden: usize,
    pub elm_ridge: f64,
}

impl Default for ModelSettings {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            classifier: ClassifierKind::Mlp,
            arch: vec![1000, 500],
            lambda: t.lambda,
            epochs: t.epochs,
            minibatch_size: t.minibatch_size,
            adadelta_rho: t.adadelta_rho,
            adadelta_epsilon: t.adadelta_epsilon,
            elm_hidden: 2000,
            elm_ridge: 1e-3,
        }
    }
}

impl ModelSettings {
    pub fn spec(&self) -> ClassifierSpec {
        ClassifierSpec {
            kind: self.classifier,
            hidden: self.arch.clone(),
            train: TrainConfig {
                lambda: self.lambda,
                epochs: self.epochs,
                minibatch_size: self.minibatch_size,
                adadelta_rho: self.adadelta_rho,
                adadelta_epsilon: self.adadelta_epsilon,
                ..TrainConfig::default()
            },
            elm_hidden: self.elm_hidden,
            elm_ridge: self.elm_ridge,
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelFlags {
    /// Classifier family
    #[arg(long, value_enum)]
    pub classifier: Option<ClassifierKind>,
    /// Hidden layer sizes, e.g. 1000,500
    #[arg(long, value_delimiter = ',')]
    pub arch: Option<Vec<usize>>,
    /// Weight of the reconstruction term, in [0, 1]
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub minibatch_size: Option<usize>,
    /// Hidden units of the extreme learning machine
    #[arg(long)]
    pub elm_hidden: Option<usize>,
    /// Ridge penalty of the extreme learning machine readout
    #[arg(long)]
    pub elm_ridge: Option<f64>,
}

impl ModelFlags {
    pub fn apply(&self, m: &mut ModelSettings) {
        if let Some(v) = self.classifier {
            m.classifier = v;
        }
        if let Some(v) = &self.arch {
            m.arch = v.clone();
        }
        if let Some(v) = self.lambda {
            m.lambda = v;
        }
        if let Some(v) = self.epochs {
            m.epochs = v;
        }
        if let Some(v) = self.minibatch_size {
            m.minibatch_size = v;
        }
        if let Some(v) = self.elm_hidden {
            m.elm_hidden = v;
        }
        if let Some(v) = self.elm_ridge {
            m.elm_ridge = v;
        }
    }
}

pub(crate) fn read_feature_file(path: &Path) -> Result<FeatureFile> {
    read_features(open_reader(path)?).map_err(|e| e.in_file(path))
}

/// Labeled sequences of a feature file, merged when a map is named.
pub(crate) fn load_dataset(
    path: &Path,
    merge_map: Option<&str>,
) -> Result<(FeatureFile, FeatureDataset)> {
    let file = read_feature_file(path)?;
    let merge = load_merge_map(merge_map)?;
    let data = file
        .to_dataset(merge.as_ref())
        .map_err(|e| e.in_file(path))?;
    if data.sequences.is_empty() {
        return Err(MocapError::Config(format!(
            "{}: no sequences",
            path.display()
        )));
    }
    Ok((file, data))
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// TOML settings, or an artifact whose embedded config is reused
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Labeled feature file
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Class merge map file, or builtin:hdm05_65
    #[arg(long)]
    pub merge_map: Option<String>,
    /// Feature file whose frames only enter the reconstruction term
    #[arg(long)]
    pub unlabeled: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelFlags,
    /// Output model file
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub features: PathBuf,
    pub merge_map: Option<String>,
    pub unlabeled: Option<PathBuf>,
    pub seed: u64,
    pub model: ModelSettings,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            features: PathBuf::new(),
            merge_map: None,
            unlabeled: None,
            seed: 1,
            model: ModelSettings::default(),
        }
    }
}

pub fn run(args: &TrainArgs, seed: Option<u64>) -> Result<()> {
    let mut s: TrainSettings = load_settings(args.config.as_deref())?;
    if let Some(v) = &args.features {
        s.features = v.clone();
    }
    if args.merge_map.is_some() {
        s.merge_map = args.merge_map.clone();
    }
    if args.unlabeled.is_some() {
        s.unlabeled = args.unlabeled.clone();
    }
    if let Some(v) = seed {
        s.seed = v;
    }
    args.model.apply(&mut s.model);
    require(&s.features, "--features")?;

    let (file, data) = load_dataset(&s.features, s.merge_map.as_deref())?;
    let all: Vec<usize> = (0..data.sequences.len()).collect();
    let frames = data.frames_of(&all);
    let mut spec = s.model.spec();
    if let Some(path) = &s.unlabeled {
        let extra = read_feature_file(path)?;
        if extra.dimension() != data.dim() {
            return Err(MocapError::Config(format!(
                "{}: dimension {} differs from the labeled data ({})",
                path.display(),
                extra.dimension(),
                data.dim()
            )));
        }
        spec.train.unlabeled_data =
            Some(extra.records.into_iter().flat_map(|r| r.frames).collect());
    }
    log::info!(
        "training {:?} on {} frames of {} sequences, {} classes",
        spec.kind,
        frames.len(),
        data.sequences.len(),
        data.num_classes()
    );
    let classifier = spec.fit(&frames, s.seed)?;
    let artifact = ModelArtifact {
        format: MODEL_FORMAT.into(),
        config: to_value(&s)?,
        features: file.header,
        class_names: data.class_names.clone(),
        classifier,
    };
    write_json(&args.out, &artifact)?;
    log::info!("wrote model to {}", args.out.display());
    Ok(())
}
