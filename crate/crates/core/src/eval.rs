//! Class merging, stratified k-fold splits over sequences, and accuracy
//! reports.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{argmax, classify_sequence, majority_vote, PosteriorMatrix};
use crate::error::{invalid, Error, Result};
use crate::nn::LabeledFrameDataset;

/// Raw class name → merged action name.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassMergeMap {
    pub rules: BTreeMap<String, String>,
}

impl ClassMergeMap {
    pub fn merged_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.rules.values().map(String::as_str).collect();
        names.sort_unstable();
        names.dedup();
        names
    }
}

pub fn merge_classes(labels: &[String], map: &ClassMergeMap) -> Result<Vec<String>> {
    let mut missing: Vec<String> = labels
        .iter()
        .filter(|l| !map.rules.contains_key(*l))
        .cloned()
        .collect();
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::UnmappedLabels(missing));
    }
    Ok(labels.iter().map(|l| map.rules[l].clone()).collect())
}

/// Features of one sequence, with its class index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceFeatures {
    pub source_id: String,
    pub label: usize,
    pub frames: Vec<Vec<f64>>,
}

/// Labeled sequences with the class name table.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureDataset {
    pub class_names: Vec<String>,
    pub sequences: Vec<SequenceFeatures>,
}

impl FeatureDataset {
    /// Builds a dataset from `(source_id, label name, frames)` triples; class
    /// indices follow the sorted label names.
    pub fn from_named(items: Vec<(String, String, Vec<Vec<f64>>)>) -> Self {
        let mut class_names: Vec<String> = items.iter().map(|(_, l, _)| l.clone()).collect();
        class_names.sort();
        class_names.dedup();
        let sequences = items
            .into_iter()
            .map(|(source_id, label, frames)| SequenceFeatures {
                source_id,
                label: class_names
                    .binary_search(&label)
                    .expect("label collected above"),
                frames,
            })
            .collect();
        Self {
            class_names,
            sequences,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn dim(&self) -> usize {
        self.sequences
            .iter()
            .find_map(|s| s.frames.first().map(Vec::len))
            .unwrap_or(0)
    }

    /// Frame-level rows of the chosen sequences.
    pub fn frames_of(&self, sequence_indices: &[usize]) -> LabeledFrameDataset {
        let mut out = LabeledFrameDataset {
            num_classes: self.num_classes(),
            ..Default::default()
        };
        for &s in sequence_indices {
            let seq = &self.sequences[s];
            for f in &seq.frames {
                out.inputs.push(f.clone());
                out.labels.push(seq.label);
                out.sequence_ids.push(s);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    /// Fold of each sequence, indexed like the input list.
    pub assignment: Vec<usize>,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }
}

/// Shuffles each class (seeded) and deals its sequences round-robin over the
/// folds. The dealing position carries over from one class to the next so
/// that fold sizes stay balanced too.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(invalid!("k must be at least 2, got {k}"));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0usize;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignment[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldAssignment {
        k,
        seed,
        assignment,
    })
}

/// What a trained frame classifier returns for one sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum FramePrediction {
    Posteriors(PosteriorMatrix),
    /// Hard labels only; sequences fall back to majority voting.
    Labels(Vec<usize>),
}

impl FramePrediction {
    pub fn frame_labels(&self) -> Vec<usize> {
        match self {
            FramePrediction::Posteriors(p) => p.frame_labels(),
            FramePrediction::Labels(l) => l.clone(),
        }
    }

    pub fn sequence_label(&self) -> Result<usize> {
        match self {
            FramePrediction::Posteriors(p) => Ok(classify_sequence(p).0),
            FramePrediction::Labels(l) => majority_vote(l),
        }
    }
}

pub trait FrameClassifier {
    fn predict(&self, frames: &[Vec<f64>]) -> Result<FramePrediction>;
}

/// Fits a classifier on the training sequences of one fold.
pub trait Learner {
    type Model: FrameClassifier;

    fn fit(&self, data: &LabeledFrameDataset, fold: usize) -> Result<Self::Model>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub frame_accuracy: f64,
    pub sequence_accuracy: f64,
    pub test_frames: usize,
    pub test_sequences: usize,
    /// Sequence-level counts, `[truth][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub folds: Vec<FoldResult>,
    pub frame_accuracy_mean: f64,
    pub frame_accuracy_std: f64,
    pub sequence_accuracy_mean: f64,
    pub sequence_accuracy_std: f64,
    pub class_names: Vec<String>,
    /// Pooled sequence-level counts, `[truth][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub config_fingerprint: String,
}

/// Mean and sample standard deviation (divisor `n − 1`; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, libm::sqrt(var))
}

/// Scores a trained model on held-out sequences.
pub fn evaluate_fold<M: FrameClassifier>(
    model: &M,
    data: &FeatureDataset,
    test: &[usize],
    fold: usize,
) -> Result<FoldResult> {
    if test.is_empty() {
        return Err(invalid!("fold {fold} has no test sequences"));
    }
    let q = data.num_classes();
    let mut confusion = vec![vec![0usize; q]; q];
    let (mut frames, mut frame_hits, mut seq_hits) = (0usize, 0usize, 0usize);
    for &s in test {
        let seq = &data.sequences[s];
        let pred = model.predict(&seq.frames)?;
        let labels = pred.frame_labels();
        frames += labels.len();
        frame_hits += labels.iter().filter(|&&l| l == seq.label).count();
        let decided = pred.sequence_label()?;
        if decided >= q {
            return Err(invalid!("model predicted class {decided} of {q}"));
        }
        confusion[seq.label][decided] += 1;
        seq_hits += usize::from(decided == seq.label);
    }
    Ok(FoldResult {
        fold,
        frame_accuracy: frame_hits as f64 / frames.max(1) as f64,
        sequence_accuracy: seq_hits as f64 / test.len() as f64,
        test_frames: frames,
        test_sequences: test.len(),
        confusion,
    })
}

/// Trains on `k − 1` folds and tests on the remaining one.
pub fn run_fold<L: Learner>(
    learner: &L,
    data: &FeatureDataset,
    folds: &FoldAssignment,
    fold: usize,
) -> Result<FoldResult> {
    let train = data.frames_of(&folds.train_indices(fold));
    if train.is_empty() {
        return Err(invalid!("fold {fold} has no training frames"));
    }
    let model = learner.fit(&train, fold)?;
    evaluate_fold(&model, data, &folds.test_indices(fold), fold)
}

/// Combines fold results (in fold order) into a report.
pub fn assemble_report(
    mut folds: Vec<FoldResult>,
    class_names: Vec<String>,
    config_fingerprint: String,
) -> EvalReport {
    folds.sort_by_key(|f| f.fold);
    let q = class_names.len();
    let mut confusion = vec![vec![0usize; q]; q];
    for f in &folds {
        for (row, frow) in confusion.iter_mut().zip(&f.confusion) {
            for (c, v) in row.iter_mut().zip(frow) {
                *c += v;
            }
        }
    }
    let frame: Vec<f64> = folds.iter().map(|f| f.frame_accuracy).collect();
    let seq: Vec<f64> = folds.iter().map(|f| f.sequence_accuracy).collect();
    let (frame_accuracy_mean, frame_accuracy_std) = mean_std(&frame);
    let (sequence_accuracy_mean, sequence_accuracy_std) = mean_std(&seq);
    EvalReport {
        folds,
        frame_accuracy_mean,
        frame_accuracy_std,
        sequence_accuracy_mean,
        sequence_accuracy_std,
        class_names,
        confusion,
        config_fingerprint,
    }
}

/// Sequential k-fold cross-validation.
pub fn run_cv<L: Learner>(
    learner: &L,
    data: &FeatureDataset,
    k: usize,
    seed: u64,
    config_fingerprint: String,
) -> Result<EvalReport> {
    let labels: Vec<usize> = data.sequences.iter().map(|s| s.label).collect();
    let folds = stratified_kfold(&labels, k, seed)?;
    let results = (0..k)
        .map(|f| run_fold(learner, data, &folds, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_report(
        results,
        data.class_names.clone(),
        config_fingerprint,
    ))
}

/// Frame-level accuracy of argmax posteriors against labels.
pub fn frame_accuracy(posteriors: &PosteriorMatrix, label: usize) -> f64 {
    let hits = posteriors
        .rows
        .iter()
        .filter(|r| argmax(r) == label)
        .count();
    hits as f64 / posteriors.num_frames() as f64
}
