//! Sequence decisions from per-frame classifier outputs.
//!
//! Frames are treated as independent given their features, so the score of
//! class `c` for a whole sequence is `Σᵢ log p(f_{i,c} = 1 | fᵢ)`: the log of
//! the product of per-frame posteriors, which is monotone in the product and
//! cannot underflow.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::nn::{clip_probability, forward, NetworkParams};

/// Rows are frames, columns classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorMatrix {
    pub rows: Vec<Vec<f64>>,
}

impl PosteriorMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let q = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || q == 0 {
            return Err(invalid!(
                "posterior matrix needs at least one frame and one class"
            ));
        }
        if rows.iter().any(|r| r.len() != q) {
            return Err(invalid!("ragged posterior matrix"));
        }
        if rows.iter().flatten().any(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(invalid!("posteriors must lie strictly inside (0, 1)"));
        }
        Ok(Self { rows })
    }

    pub fn num_frames(&self) -> usize {
        self.rows.len()
    }

    pub fn num_classes(&self) -> usize {
        self.rows[0].len()
    }

    /// Per-frame argmax.
    pub fn frame_labels(&self) -> Vec<usize> {
        self.rows.iter().map(|r| argmax(r)).collect()
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn frame_posteriors(model: &NetworkParams, frames: &[Vec<f64>]) -> Result<PosteriorMatrix> {
    let rows = frames
        .iter()
        .map(|x| forward(model, x).map(|f| f.output.into_iter().map(clip_probability).collect()))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    PosteriorMatrix::new(rows)
}

/// Winning class and per-class log scores.
pub fn classify_sequence(posteriors: &PosteriorMatrix) -> (usize, Vec<f64>) {
    let mut scores = vec![0.0; posteriors.num_classes()];
    for row in &posteriors.rows {
        for (s, &p) in scores.iter_mut().zip(row) {
            *s += libm::log(p);
        }
    }
    (argmax(&scores), scores)
}

/// Most frequent label, ties to the lowest index.
pub fn majority_vote(frame_labels: &[usize]) -> Result<usize> {
    let Some(&max) = frame_labels.iter().max() else {
        return Err(invalid!("majority vote over no labels"));
    };
    let mut counts = vec![0usize; max + 1];
    for &l in frame_labels {
        counts[l] += 1;
    }
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    Ok(best)
}
