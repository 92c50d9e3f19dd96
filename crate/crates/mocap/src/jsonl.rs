//! Line-delimited motion records for position-only skeleton data.
//!
//! Each line is one sequence:
//!
//! ```json
//! {"joints": ["root", "head"], "fps": 30, "frames": [[[0,1,0], [0,2,0]]],
//!  "root_orientation": [[1,0,0, 0,1,0, 0,0,1]], "label": "wave"}
//! ```
//!
//! `root_orientation` (row-major, one per frame), `label`, `parents` and
//! `source_id` are optional. Joint 0 is the root and its position is the
//! root position. Without `parents` every joint hangs off the root.
//! A line of the form `{"header": {...}}` carries file metadata and is
//! skipped by [`load_jsonl`].

use std::io::{BufRead, Write};
use std::sync::Arc;

use mocap_core::linalg::{Mat3, Vec3, IDENTITY3};
use mocap_core::skeleton::{MotionSequence, PoseFrame, SkeletonDefinition};
use serde::{Deserialize, Serialize};

use crate::error::{MocapError, ParseError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionRecord {
    pub joints: Vec<String>,
    pub fps: f64,
    pub frames: Vec<Vec<Vec3>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_orientation: Option<Vec<[f64; 9]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parents: Option<Vec<Option<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
}

fn to_mat3(v: &[f64; 9]) -> Mat3 {
    [[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]]
}

fn from_mat3(m: &Mat3) -> [f64; 9] {
    [
        m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
    ]
}

impl MotionRecord {
    pub fn into_sequence(self, line: usize) -> std::result::Result<MotionSequence, ParseError> {
        let err = |msg: String| ParseError::new(line, msg);
        let n = self.joints.len();
        if n == 0 {
            return Err(err("record has no joints".into()));
        }
        if self.frames.is_empty() {
            return Err(err("record has no frames".into()));
        }
        for (i, f) in self.frames.iter().enumerate() {
            if f.len() != n {
                return Err(err(format!(
                    "frame {} has {} joints, expected {n}",
                    i + 1,
                    f.len()
                )));
            }
            if f.iter().flatten().any(|v| !v.is_finite()) {
                return Err(err(format!("frame {} has a non-finite coordinate", i + 1)));
            }
        }
        let parents = self.parents.clone().unwrap_or_else(|| {
            (0..n)
                .map(|j| if j == 0 { None } else { Some(0) })
                .collect()
        });
        let skel = SkeletonDefinition::from_positions(&self.joints, &parents, &self.frames[0])
            .map_err(|e| err(e.to_string()))?;
        let orientations: Option<Vec<Mat3>> = match &self.root_orientation {
            Some(r) if r.len() != self.frames.len() => {
                return Err(err(format!(
                    "{} root orientations for {} frames",
                    r.len(),
                    self.frames.len()
                )))
            }
            Some(r) => Some(r.iter().map(to_mat3).collect()),
            None => None,
        };
        let needs_alignment = orientations.is_none();
        let frames = self
            .frames
            .into_iter()
            .enumerate()
            .map(|(i, joints)| PoseFrame {
                root_position: joints[0],
                joint_positions: joints,
                root_orientation: orientations.as_ref().map_or(IDENTITY3, |o| o[i]),
            })
            .collect();
        let seq = MotionSequence {
            skeleton: Arc::new(skel),
            frames,
            frame_rate: self.fps,
            label: self.label,
            source_id: self.source_id.unwrap_or_else(|| format!("line{line}")),
            needs_alignment,
        };
        seq.validate().map_err(|e| err(e.to_string()))?;
        Ok(seq)
    }

    pub fn from_sequence(seq: &MotionSequence) -> Self {
        Self {
            joints: seq.skeleton.joints.iter().map(|j| j.name.clone()).collect(),
            fps: seq.frame_rate,
            frames: seq
                .frames
                .iter()
                .map(|f| f.joint_positions.clone())
                .collect(),
            root_orientation: if seq.needs_alignment {
                None
            } else {
                Some(
                    seq.frames
                        .iter()
                        .map(|f| from_mat3(&f.root_orientation))
                        .collect(),
                )
            },
            label: seq.label.clone(),
            parents: Some(seq.skeleton.joints.iter().map(|j| j.parent).collect()),
            source_id: Some(seq.source_id.clone()),
        }
    }
}

/// Whether a line is a metadata header rather than a record.
pub fn is_header_line(line: &str) -> bool {
    line.trim_start().starts_with("{\"header\"")
}

pub fn load_jsonl<R: BufRead>(reader: R) -> Result<Vec<MotionSequence>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| MocapError::Syntax(ParseError::new(line_no, e.to_string())))?;
        if line.trim().is_empty() || is_header_line(&line) {
            continue;
        }
        let record: MotionRecord =
            serde_json::from_str(&line).map_err(|e| ParseError::new(line_no, e.to_string()))?;
        out.push(record.into_sequence(line_no)?);
    }
    if out.is_empty() {
        return Err(ParseError::new(1, "no motion records").into());
    }
    Ok(out)
}

/// Writes an optional header line followed by one record per sequence.
pub fn write_jsonl<W: Write, H: Serialize>(
    mut writer: W,
    header: Option<&H>,
    sequences: &[MotionSequence],
) -> Result<()> {
    let io = |e: std::io::Error| MocapError::io("<output>", e);
    if let Some(h) = header {
        #[derive(Serialize)]
        struct Header<'a, H> {
            header: &'a H,
        }
        serde_json::to_writer(&mut writer, &Header { header: h })?;
        writer.write_all(b"\n").map_err(io)?;
    }
    for s in sequences {
        serde_json::to_writer(&mut writer, &MotionRecord::from_sequence(s))?;
        writer.write_all(b"\n").map_err(io)?;
    }
    Ok(())
}
