//! JSON artifacts (trained models and evaluation reports) and the
//! classifiers they carry.

use std::fs;
use std::path::Path;

use mocap_core::classify::{frame_posteriors, PosteriorMatrix};
use mocap_core::elm::{elm_predict, elm_train, ElmModel};
use mocap_core::eval::{EvalReport, FrameClassifier, FramePrediction, Learner};
use mocap_core::nn::{train, EpochLog, LabeledFrameDataset, NetworkParams, TrainConfig};
use mocap_core::seed::derive_seed;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{MocapError, Result};
use crate::featfile::FeatureHeader;

pub const MODEL_FORMAT: &str = "mocap-model";
pub const REPORT_FORMAT: &str = "mocap-report";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    #[default]
    Mlp,
    Elm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Classifier {
    Mlp {
        params: NetworkParams,
        log: Vec<EpochLog>,
    },
    Elm {
        model: ElmModel,
    },
}

impl Classifier {
    pub fn input_dim(&self) -> usize {
        match self {
            Classifier::Mlp { params, .. } => params.input_dim(),
            Classifier::Elm { model } => model.input_weights().rows,
        }
    }

    pub fn posteriors(&self, frames: &[Vec<f64>]) -> Option<mocap_core::Result<PosteriorMatrix>> {
        match self {
            Classifier::Mlp { params, .. } => Some(frame_posteriors(params, frames)),
            Classifier::Elm { .. } => None,
        }
    }
}

impl FrameClassifier for Classifier {
    fn predict(&self, frames: &[Vec<f64>]) -> mocap_core::Result<FramePrediction> {
        match self {
            Classifier::Mlp { params, .. } => Ok(FramePrediction::Posteriors(frame_posteriors(
                params, frames,
            )?)),
            Classifier::Elm { model } => Ok(FramePrediction::Labels(elm_predict(model, frames)?)),
        }
    }
}

/// Everything needed to fit a classifier on frame data.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub hidden: Vec<usize>,
    /// Seed inside is ignored; seeds come from [`ClassifierSpec::fit`].
    pub train: TrainConfig,
    pub elm_hidden: usize,
    pub elm_ridge: f64,
}

impl ClassifierSpec {
    pub fn fit(&self, data: &LabeledFrameDataset, seed: u64) -> Result<Classifier> {
        match self.kind {
            ClassifierKind::Mlp => {
                let config = TrainConfig {
                    seed: derive_seed(seed, "train"),
                    ..self.train.clone()
                };
                let trained = train(data, &self.hidden, &config)?;
                Ok(Classifier::Mlp {
                    params: trained.params,
                    log: trained.log,
                })
            }
            ClassifierKind::Elm => Ok(Classifier::Elm {
                model: elm_train(
                    data,
                    self.elm_hidden,
                    self.elm_ridge,
                    derive_seed(seed, "elm"),
                )?,
            }),
        }
    }
}

/// Cross-validation learner: fold `f` trains with a seed derived from the
/// run seed and `f`.
pub struct FoldLearner<'a> {
    pub spec: &'a ClassifierSpec,
    pub seed: u64,
}

impl Learner for FoldLearner<'_> {
    type Model = Classifier;

    fn fit(&self, data: &LabeledFrameDataset, fold: usize) -> mocap_core::Result<Classifier> {
        let seed = derive_seed(self.seed, &format!("fold{fold}"));
        self.spec.fit(data, seed).map_err(|e| match e {
            MocapError::Core(c) => c,
            other => mocap_core::Error::InvalidInput(other.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format: String,
    pub config: serde_json::Value,
    #[serde(default)]
    pub features: Option<FeatureHeader>,
    pub class_names: Vec<String>,
    pub classifier: Classifier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportArtifact {
    pub format: String,
    pub config: serde_json::Value,
    pub report: EvalReport,
}

/// Hex SHA-256 of the compact JSON form of a config.
pub fn fingerprint(config: &serde_json::Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| MocapError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| MocapError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| MocapError::Config(format!("{}: {e}", path.display())))
}

/// Pooled confusion matrix as CSV, rows = true class.
pub fn confusion_csv(report: &EvalReport) -> String {
    let mut s = String::from("true\\predicted");
    for c in &report.class_names {
        s.push(',');
        s.push_str(c);
    }
    s.push('\n');
    for (name, row) in report.class_names.iter().zip(&report.confusion) {
        s.push_str(name);
        for v in row {
            s.push_str(&format!(",{v}"));
        }
        s.push('\n');
    }
    s
}
