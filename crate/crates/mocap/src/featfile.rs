//! Feature files: JSONL, one sequence per line, after an optional header
//! line `{"header": {...}}` describing how the features were made.

use std::io::{BufRead, Write};

use mocap_core::eval::{merge_classes, ClassMergeMap, FeatureDataset};
use mocap_core::features::FeatureConfig;
use mocap_core::linalg::Vec3;
use serde::{Deserialize, Serialize};

use crate::error::{MocapError, ParseError, Result};
use crate::jsonl::is_header_line;

pub const FEATURE_FORMAT: &str = "mocap-features";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureHeader {
    pub format: String,
    /// Resolved settings of the run that wrote the file.
    pub config: serde_json::Value,
    pub feature_config: FeatureConfig,
    pub dimension: usize,
    /// Reference frame used to orient sequences without stored rotations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<Vec<Vec3>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub source_id: String,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub td_offset_frames: Option<usize>,
    pub frames: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureFile {
    pub header: Option<FeatureHeader>,
    pub records: Vec<FeatureRecord>,
}

#[derive(Deserialize)]
struct HeaderLine {
    header: FeatureHeader,
}

#[derive(Serialize)]
struct HeaderLineRef<'a> {
    header: &'a FeatureHeader,
}

pub fn read_features<R: BufRead>(reader: R) -> Result<FeatureFile> {
    let mut file = FeatureFile::default();
    let mut dim: Option<usize> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| MocapError::Syntax(ParseError::new(line_no, e.to_string())))?;
        if line.trim().is_empty() {
            continue;
        }
        if is_header_line(&line) {
            let h: HeaderLine =
                serde_json::from_str(&line).map_err(|e| ParseError::new(line_no, e.to_string()))?;
            file.header = Some(h.header);
            continue;
        }
        let rec: FeatureRecord =
            serde_json::from_str(&line).map_err(|e| ParseError::new(line_no, e.to_string()))?;
        if rec.frames.is_empty() {
            return Err(ParseError::new(line_no, "sequence has no frames").into());
        }
        for f in &rec.frames {
            let d = *dim.get_or_insert(f.len());
            if f.len() != d || d == 0 {
                return Err(ParseError::new(
                    line_no,
                    format!("frame has {} components, expected {d}", f.len()),
                )
                .into());
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(ParseError::new(line_no, "non-finite feature value").into());
            }
        }
        file.records.push(rec);
    }
    if file.records.is_empty() {
        return Err(ParseError::new(1, "no feature records").into());
    }
    Ok(file)
}

pub fn write_features<W: Write>(mut w: W, file: &FeatureFile) -> Result<()> {
    let io = |e: std::io::Error| MocapError::io("<output>", e);
    if let Some(h) = &file.header {
        serde_json::to_writer(&mut w, &HeaderLineRef { header: h })?;
        w.write_all(b"\n").map_err(io)?;
    }
    for r in &file.records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(io)?;
    }
    Ok(())
}

impl FeatureFile {
    pub fn dimension(&self) -> usize {
        self.records
            .first()
            .and_then(|r| r.frames.first())
            .map_or(0, Vec::len)
    }

    /// Labeled dataset, optionally renaming labels through a merge map.
    pub fn to_dataset(&self, merge: Option<&ClassMergeMap>) -> Result<FeatureDataset> {
        let labels = self
            .records
            .iter()
            .map(|r| {
                r.label.clone().ok_or_else(|| {
                    MocapError::Config(format!("sequence `{}` has no label", r.source_id))
                })
            })
            .collect::<Result<Vec<String>>>()?;
        let labels = match merge {
            Some(map) => merge_classes(&labels, map)?,
            None => labels,
        };
        Ok(FeatureDataset::from_named(
            self.records
                .iter()
                .zip(labels)
                .map(|(r, l)| (r.source_id.clone(), l, r.frames.clone()))
                .collect(),
        ))
    }
}
