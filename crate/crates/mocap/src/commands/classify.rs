use std::path::PathBuf;

use clap::Args;
use mocap_core::classify::classify_sequence;
use mocap_core::eval::{merge_classes, FrameClassifier};
use serde::{Deserialize, Serialize};

use super::train::read_feature_file;
use super::{load_merge_map, require, to_value, write_text};
use crate::artifact::{read_json, Classifier, ModelArtifact};
use crate::config::load_settings;
use crate::error::{MocapError, Result};

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// TOML settings, or an artifact whose embedded config is reused
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Trained model
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Feature file to classify
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Output predictions CSV
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySettings {
    pub model: PathBuf,
    pub input: PathBuf,
}

/// Source id, true class when known, and frames of one sequence.
pub type Record = (String, Option<String>, Vec<Vec<f64>>);

/// One CSV row per sequence: source id, predicted class, true class when
/// known, then the summed log posterior of every class (empty for models
/// without posteriors).
pub fn predictions_csv(
    model: &ModelArtifact,
    records: &[Record],
    config: &serde_json::Value,
) -> Result<String> {
    let mut s = format!("# config: {config}\nsource_id,predicted_class,true_class");
    for c in &model.class_names {
        s.push_str(&format!(",log_score_{c}"));
    }
    s.push('\n');
    for (id, truth, frames) in records {
        let (label, scores) = match &model.classifier {
            Classifier::Mlp { params, .. } => {
                let post = mocap_core::classify::frame_posteriors(params, frames)?;
                let (label, scores) = classify_sequence(&post);
                (label, Some(scores))
            }
            elm @ Classifier::Elm { .. } => (elm.predict(frames)?.sequence_label()?, None),
        };
        let name = model
            .class_names
            .get(label)
            .ok_or_else(|| MocapError::Config(format!("model predicted unknown class {label}")))?;
        s.push_str(&format!("{id},{name},{}", truth.as_deref().unwrap_or("")));
        for k in 0..model.class_names.len() {
            s.push(',');
            if let Some(sc) = &scores {
                s.push_str(&format!("{:?}", sc[k]));
            }
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn run(args: &ClassifyArgs, _seed: Option<u64>) -> Result<()> {
    let mut s: ClassifySettings = load_settings(args.config.as_deref())?;
    if let Some(v) = &args.model {
        s.model = v.clone();
    }
    if let Some(v) = &args.input {
        s.input = v.clone();
    }
    require(&s.model, "--model")?;
    require(&s.input, "--in")?;

    let model: ModelArtifact = read_json(&s.model)?;
    let file = read_feature_file(&s.input)?;
    if let Some(bad) = file
        .records
        .iter()
        .flat_map(|r| &r.frames)
        .find(|f| f.len() != model.classifier.input_dim())
    {
        return Err(MocapError::Config(format!(
            "{}: feature dimension {} does not match the model ({})",
            s.input.display(),
            bad.len(),
            model.classifier.input_dim()
        )));
    }
    // True labels go through the same merge map the model was trained with.
    let merge_spec = model
        .config
        .get("merge_map")
        .and_then(|v| v.as_str())
        .map(str::to_string);
    let merge = load_merge_map(merge_spec.as_deref())?;
    let truths: Vec<Option<String>> = file
        .records
        .iter()
        .map(|r| match (&r.label, &merge) {
            (Some(l), Some(m)) => merge_classes(std::slice::from_ref(l), m)
                .ok()
                .map(|mut v| v.remove(0)),
            (l, _) => l.clone(),
        })
        .collect();
    let rows: Vec<Record> = file
        .records
        .into_iter()
        .zip(truths)
        .map(|(r, t)| (r.source_id, t, r.frames))
        .collect();
    let csv = predictions_csv(&model, &rows, &to_value(&s)?)?;
    write_text(&args.out, &csv)?;
    log::info!("wrote {} predictions to {}", rows.len(), args.out.display());
    Ok(())
}
