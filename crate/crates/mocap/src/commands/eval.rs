use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use mocap_core::eval::{assemble_report, run_fold, stratified_kfold, EvalReport, FeatureDataset};
use mocap_core::seed::derive_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::train::{load_dataset, ModelFlags, ModelSettings};
use super::{require, sibling, to_value, write_text};
use crate::artifact::{
    confusion_csv, fingerprint, write_json, FoldLearner, ReportArtifact, REPORT_FORMAT,
};
use crate::config::load_settings;
use crate::error::{MocapError, Result};

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// TOML settings, or an artifact whose embedded config is reused
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Labeled feature file
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Class merge map file, or builtin:hdm05_65
    #[arg(long)]
    pub merge_map: Option<String>,
    /// Number of folds
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub model: ModelFlags,
    /// Output report JSON
    #[arg(long)]
    pub report: PathBuf,
    /// Confusion matrix CSV; defaults to the report path with a .csv extension
    #[arg(long)]
    pub confusion: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub features: PathBuf,
    pub merge_map: Option<String>,
    pub k: usize,
    pub seed: u64,
    pub model: ModelSettings,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            features: PathBuf::new(),
            merge_map: None,
            k: 10,
            seed: 1,
            model: ModelSettings::default(),
        }
    }
}

/// Stratified cross-validation with folds trained in parallel.
pub fn cross_validate(
    data: &FeatureDataset,
    s: &EvalSettings,
    config: &serde_json::Value,
) -> Result<EvalReport> {
    let labels: Vec<usize> = data.sequences.iter().map(|q| q.label).collect();
    let folds = stratified_kfold(&labels, s.k, derive_seed(s.seed, "folds"))?;
    let spec = s.model.spec();
    let learner = FoldLearner {
        spec: &spec,
        seed: s.seed,
    };
    let results = (0..s.k)
        .into_par_iter()
        .map(|f| {
            let r = run_fold(&learner, data, &folds, f);
            if let Ok(r) = &r {
                log::info!(
                    "fold {f}: frame accuracy {:.4}, sequence accuracy {:.4}",
                    r.frame_accuracy,
                    r.sequence_accuracy
                );
            }
            r
        })
        .collect::<mocap_core::Result<Vec<_>>>()?;
    Ok(assemble_report(
        results,
        data.class_names.clone(),
        fingerprint(config),
    ))
}

pub fn run(args: &EvalArgs, seed: Option<u64>) -> Result<()> {
    let mut s: EvalSettings = load_settings(args.config.as_deref())?;
    if let Some(v) = &args.features {
        s.features = v.clone();
    }
    if args.merge_map.is_some() {
        s.merge_map = args.merge_map.clone();
    }
    if let Some(v) = args.k {
        s.k = v;
    }
    if let Some(v) = seed {
        s.seed = v;
    }
    args.model.apply(&mut s.model);
    require(&s.features, "--features")?;

    let (_, data) = load_dataset(&s.features, s.merge_map.as_deref())?;
    let config = to_value(&s)?;
    let report = cross_validate(&data, &s, &config)?;
    write_json(
        &args.report,
        &ReportArtifact {
            format: REPORT_FORMAT.into(),
            config,
            report: report.clone(),
        },
    )?;
    let confusion = args
        .confusion
        .clone()
        .unwrap_or_else(|| sibling(&args.report, "csv"));
    write_text(&confusion, &confusion_csv(&report))?;
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "frame accuracy {:.4} ± {:.4}\nsequence accuracy {:.4} ± {:.4}",
        report.frame_accuracy_mean,
        report.frame_accuracy_std,
        report.sequence_accuracy_mean,
        report.sequence_accuracy_std
    )
    .map_err(|e| MocapError::io("<stdout>", e))?;
    Ok(())
}
