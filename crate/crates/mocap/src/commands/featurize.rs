use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use mocap_core::features::{assemble_features, td_offset_frames, FeatureConfig};
use mocap_core::linalg::Vec3;
use mocap_core::skeleton::MotionSequence;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::parse::load_asf_amc;
use super::{create_writer, open_reader, to_value};
use crate::config::load_settings;
use crate::error::{MocapError, Result};
use crate::featfile::{write_features, FeatureFile, FeatureHeader, FeatureRecord, FEATURE_FORMAT};
use crate::jsonl::load_jsonl;

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    /// TOML settings, or an artifact whose embedded config is reused
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Motion inputs: JSONL files, or AMC files together with --asf
    #[arg(long = "in", num_args = 1..)]
    pub inputs: Option<Vec<PathBuf>>,
    /// Skeleton for AMC inputs
    #[arg(long)]
    pub asf: Option<PathBuf>,
    /// Frame rate of AMC inputs
    #[arg(long)]
    pub fps: Option<f64>,
    /// Joints used for the posture and displacement blocks
    #[arg(long, value_delimiter = ',')]
    pub joints: Option<Vec<String>>,
    /// Displacement window in seconds
    #[arg(long)]
    pub td_seconds: Option<f64>,
    /// Leave out the trajectory block
    #[arg(long)]
    pub no_nt: bool,
    /// JSONL file whose first frame is the reference pose for inputs without root orientation
    #[arg(long)]
    pub template: Option<PathBuf>,
    /// Output feature JSONL file
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturizeSettings {
    pub inputs: Vec<PathBuf>,
    pub asf: Option<PathBuf>,
    pub fps: Option<f64>,
    pub joints: Vec<String>,
    pub td_seconds: f64,
    pub include_nt: bool,
    pub template: Option<PathBuf>,
}

impl Default for FeaturizeSettings {
    fn default() -> Self {
        let f = FeatureConfig::default();
        Self {
            inputs: Vec::new(),
            asf: None,
            fps: None,
            joints: f.po_joints,
            td_seconds: f.td_offset_seconds,
            include_nt: f.include_nt,
            template: None,
        }
    }
}

impl FeaturizeSettings {
    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            po_joints: self.joints.clone(),
            td_offset_seconds: self.td_seconds,
            include_nt: self.include_nt,
        }
    }
}

fn is_amc(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("amc"))
}

fn load_jsonl_file(path: &Path) -> Result<Vec<MotionSequence>> {
    load_jsonl(open_reader(path)?).map_err(|e| e.in_file(path))
}

/// Loads every input in order; AMC files share one skeleton.
pub fn load_inputs(s: &FeaturizeSettings) -> Result<Vec<MotionSequence>> {
    let mut seqs = Vec::new();
    let amc: Vec<PathBuf> = s.inputs.iter().filter(|p| is_amc(p)).cloned().collect();
    let mut parsed_amc = if amc.is_empty() {
        Vec::new()
    } else {
        let asf = s
            .asf
            .as_deref()
            .ok_or_else(|| MocapError::Config("AMC inputs need --asf".into()))?;
        load_asf_amc(asf, &amc, s.fps, None)?
    }
    .into_iter();
    for path in &s.inputs {
        if is_amc(path) {
            seqs.extend(parsed_amc.next());
        } else {
            seqs.extend(load_jsonl_file(path)?);
        }
    }
    Ok(seqs)
}

fn template_for(s: &FeaturizeSettings, seqs: &[MotionSequence]) -> Result<Option<Vec<Vec3>>> {
    if !seqs.iter().any(|q| q.needs_alignment) {
        return Ok(None);
    }
    let from = match &s.template {
        Some(path) => load_jsonl_file(path)?
            .into_iter()
            .find(|q| !q.is_empty())
            .ok_or_else(|| {
                MocapError::Config(format!("{}: no frames for a template", path.display()))
            })?,
        None => seqs
            .iter()
            .find(|q| q.needs_alignment && !q.is_empty())
            .cloned()
            .ok_or_else(|| MocapError::Config("no frames to take a template from".into()))?,
    };
    Ok(Some(from.frames[0].joint_positions.clone()))
}

/// Feature records for each sequence, in input order.
pub fn featurize(
    seqs: &[MotionSequence],
    config: &FeatureConfig,
    template: Option<&[Vec3]>,
) -> Result<Vec<FeatureRecord>> {
    config.validate()?;
    seqs.par_iter()
        .map(|q| {
            let feats = assemble_features(q, config, template)?;
            Ok(FeatureRecord {
                source_id: q.source_id.clone(),
                label: q.label.clone(),
                frame_rate: Some(q.frame_rate),
                td_offset_frames: (q.len() >= 2)
                    .then(|| td_offset_frames(config.td_offset_seconds, q.frame_rate, q.len())),
                frames: feats.iter().map(|f| f.to_vec()).collect(),
            })
        })
        .collect()
}

pub fn run(args: &FeaturizeArgs, _seed: Option<u64>) -> Result<()> {
    let mut s: FeaturizeSettings = load_settings(args.config.as_deref())?;
    if let Some(v) = &args.inputs {
        s.inputs = v.clone();
    }
    if args.asf.is_some() {
        s.asf = args.asf.clone();
    }
    if args.fps.is_some() {
        s.fps = args.fps;
    }
    if let Some(v) = &args.joints {
        s.joints = v.clone();
    }
    if let Some(v) = args.td_seconds {
        s.td_seconds = v;
    }
    if args.no_nt {
        s.include_nt = false;
    }
    if args.template.is_some() {
        s.template = args.template.clone();
    }
    if s.inputs.is_empty() {
        return Err(MocapError::Config("missing --in".into()));
    }
    let seqs = load_inputs(&s)?;
    let template = template_for(&s, &seqs)?;
    let feature_config = s.feature_config();
    let records = featurize(&seqs, &feature_config, template.as_deref())?;
    let file = FeatureFile {
        header: Some(FeatureHeader {
            format: FEATURE_FORMAT.into(),
            config: to_value(&s)?,
            dimension: feature_config.dimension(),
            feature_config,
            template,
        }),
        records,
    };
    let mut w = create_writer(&args.out)?;
    write_features(&mut w, &file)?;
    w.flush().map_err(|e| MocapError::io(&args.out, e))?;
    log::info!(
        "wrote features of {} sequences to {}",
        file.records.len(),
        args.out.display()
    );
    Ok(())
}
