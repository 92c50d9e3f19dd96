//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion. Exits non-zero on any hard failure.
//!
//! `MOCAP_HDM05_DIR` (a directory of HDM05 cut AMC files plus the actors'
//! ASF files) enables the full-scale reproduction; it is skipped otherwise.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use mocap::cli::run_from;
use mocap::commands::embed::{embed_sequences, EmbedMethod, EmbedSettings};
use mocap::commands::eval::{cross_validate, EvalSettings};
use mocap::commands::featurize::featurize;
use mocap::commands::parse::{hdm05_label, load_asf_amc};
use mocap::commands::train::ModelSettings;
use mocap::mergemap::{parse_merge_map, HDM05_65};
use mocap_core::classify::{classify_sequence, PosteriorMatrix};
use mocap_core::embed::{nearest_neighbor_purity, pca_fit};
use mocap_core::eval::{merge_classes, EvalReport, FeatureDataset};
use mocap_core::features::{assemble_features, td_offset_frames, FeatureConfig};
use mocap_core::linalg::{euler_extrinsic, Mat3, Vec3};
use mocap_core::nn::{
    gradients, loss_hybrid, loss_supervised, loss_unsupervised, Batch, NetworkParams, Parameters,
};
use mocap_core::skeleton::{MotionSequence, PoseFrame, SkeletonDefinition};
use mocap_core::synth::{synth_generate, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Hard,
    /// Failure is reported but does not fail the run.
    Warn,
    /// Needs external data; skipped when absent.
    Optional,
}

type Criterion = (usize, &'static str, Kind, fn() -> Option<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "gradient oracle", Kind::Hard, || Some(gradient_oracle())),
        (2, "hybrid endpoints", Kind::Hard, || {
            Some(hybrid_endpoints())
        }),
        (3, "feature invariance", Kind::Hard, || {
            Some(feature_invariance())
        }),
        (4, "feature dimension", Kind::Hard, || {
            Some(feature_dimension())
        }),
        (5, "sequence-rule oracle", Kind::Hard, || {
            Some(sequence_rule_oracle())
        }),
        (6, "PCA oracle", Kind::Hard, || Some(pca_oracle())),
        (7, "synthetic benchmark", Kind::Hard, || {
            Some(synthetic_benchmark())
        }),
        (8, "hybrid vs plain trend", Kind::Warn, || {
            Some(hybrid_trend())
        }),
        (9, "embedding purity", Kind::Hard, || {
            Some(embedding_purity())
        }),
        (10, "determinism", Kind::Hard, || Some(determinism())),
        (11, "HDM05 reproduction", Kind::Optional, hdm05_reproduction),
    ];
    // Plain arguments act as name filters; harness flags are ignored.
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = false;
    for (n, name, kind, run) in criteria {
        if !filters.is_empty()
            && !filters
                .iter()
                .any(|f| name.contains(f.as_str()) || *f == n.to_string())
        {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let status = match (&outcome, kind) {
            (None, _) => "SKIP",
            (Some(o), _) if o.pass => "PASS",
            (Some(_), Kind::Warn) => "WARN",
            (Some(_), _) => {
                failed = true;
                "FAIL"
            }
        };
        let detail = outcome.map_or_else(|| "set MOCAP_HDM05_DIR to run".to_string(), |o| o.detail);
        println!("criterion {n:>2} {status} {name}: {detail} [{secs:.1}s]");
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

// ----- 1, 2: network objective -----

fn random_net(rng: &mut ChaCha8Rng, input: usize, hidden: &[usize], q: usize) -> NetworkParams {
    let mut p = NetworkParams::glorot(input, hidden, q, rng).unwrap();
    for b in p.blocks_mut() {
        for v in b.iter_mut() {
            *v += rng.random_range(-0.1..0.1);
        }
    }
    p
}

fn random_inputs(
    rng: &mut ChaCha8Rng,
    n: usize,
    d: usize,
    q: usize,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let xs = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    (xs, (0..n).map(|_| rng.random_range(0..q)).collect())
}

fn gradient_oracle() -> Outcome {
    const STEP: f64 = 1e-5;
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..20 {
        let p = random_net(&mut rng, 33, &[16, 8], 5);
        let (xs, ys) = random_inputs(&mut rng, 6, 33, 5);
        let batch = Batch::new(xs.iter().map(|x| &x[..]).collect(), ys, 5).unwrap();
        for lambda in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let (g, _) = gradients(&p, &batch, lambda, &[]).unwrap();
            let mut probe = p.clone();
            let lens: Vec<usize> = p.blocks().iter().map(|b| b.len()).collect();
            for (bi, &len) in lens.iter().enumerate() {
                let (mut diff, mut scale) = (0.0, 0.0);
                for k in 0..len {
                    let orig = probe.blocks()[bi][k];
                    probe.blocks_mut()[bi][k] = orig + STEP;
                    let up = loss_hybrid(&probe, &batch, lambda, &[]).unwrap().total;
                    probe.blocks_mut()[bi][k] = orig - STEP;
                    let down = loss_hybrid(&probe, &batch, lambda, &[]).unwrap().total;
                    probe.blocks_mut()[bi][k] = orig;
                    let fd = (up - down) / (2.0 * STEP);
                    let an = g.blocks()[bi][k];
                    diff += (fd - an) * (fd - an);
                    scale += fd * fd + an * an;
                }
                if scale > 0.0 {
                    worst = worst.max(diff.sqrt() / scale.sqrt());
                }
            }
        }
    }
    Outcome::check(
        worst <= 1e-4,
        format!("max per-block relative error {worst:.2e} (limit 1e-4)"),
    )
}

fn hybrid_endpoints() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let p = random_net(&mut rng, 33, &[16, 8], 5);
        let n = rng.random_range(1..32);
        let (xs, ys) = random_inputs(&mut rng, n, 33, 5);
        let batch = Batch::new(xs.iter().map(|x| &x[..]).collect(), ys, 5).unwrap();
        let sup = loss_supervised(&p, &batch).unwrap();
        let uns = loss_unsupervised(&p.stack, &batch.inputs).unwrap();
        worst = worst.max((loss_hybrid(&p, &batch, 0.0, &[]).unwrap().total - sup).abs());
        worst = worst.max((loss_hybrid(&p, &batch, 1.0, &[]).unwrap().total - uns).abs());
    }
    Outcome::check(
        worst == 0.0,
        format!("max endpoint deviation {worst:e} over 50 batches"),
    )
}

// ----- 3, 4: features -----

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v: Vec3 = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3 {
    let pi = std::f64::consts::PI;
    euler_extrinsic(&[
        (2, rng.random_range(-pi..pi)),
        (1, rng.random_range(-pi..pi)),
        (0, rng.random_range(-pi..pi)),
    ])
}

fn random_sequence(rng: &mut ChaCha8Rng, id: usize) -> MotionSequence {
    let n = rng.random_range(6..12);
    let names: Vec<String> = (0..n).map(|i| format!("j{i}")).collect();
    let parents: Vec<Option<usize>> = (0..n)
        .map(|i| (i > 0).then(|| rng.random_range(0..i)))
        .collect();
    let mut rest = vec![[0.0; 3]; n];
    for i in 1..n {
        let (p, b) = (parents[i].unwrap(), random_unit(rng));
        rest[i] = [rest[p][0] + b[0], rest[p][1] + b[1], rest[p][2] + b[2]];
    }
    let skel = Arc::new(SkeletonDefinition::from_positions(&names, &parents, &rest).unwrap());
    let mut root = [0.0; 3];
    let frames = (0..rng.random_range(2..60))
        .map(|_| {
            for r in &mut root {
                *r += rng.random_range(-0.3..0.3);
            }
            let mut pos = vec![root; n];
            for i in 1..n {
                let (p, b, len) = (
                    parents[i].unwrap(),
                    random_unit(rng),
                    rng.random_range(0.2..1.5),
                );
                pos[i] = [
                    pos[p][0] + b[0] * len,
                    pos[p][1] + b[1] * len,
                    pos[p][2] + b[2] * len,
                ];
            }
            PoseFrame {
                joint_positions: pos,
                root_position: root,
                root_orientation: random_rotation(rng),
            }
        })
        .collect();
    MotionSequence::new(skel, frames, 120.0, None, format!("r{id}")).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn feature_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let config = FeatureConfig {
        po_joints: ["j1", "j2", "j3", "j4", "j5"].map(String::from).to_vec(),
        td_offset_seconds: 0.1,
        include_nt: true,
    };
    let (mut po, mut td, mut nt) = (0.0f64, 0.0f64, 0.0f64);
    let (mut unit_err, mut nt_out) = (0.0f64, 0usize);
    for s in 0..100 {
        let seq = random_sequence(&mut rng, s);
        let base = assemble_features(&seq, &config, None).unwrap();
        let m = td_offset_frames(config.td_offset_seconds, seq.frame_rate, seq.len());
        for f in base.iter().skip(m - 1) {
            let norm = f.td.iter().map(|v| v * v).sum::<f64>().sqrt();
            unit_err = unit_err.max((norm - 1.0).abs());
        }
        nt_out += base
            .iter()
            .flat_map(|f| &f.nt)
            .filter(|v| !(-1.0..=1.0).contains(*v))
            .count();
        for _ in 0..10 {
            let r = random_rotation(&mut rng);
            let t = [
                rng.random_range(-50.0..50.0),
                rng.random_range(-50.0..50.0),
                rng.random_range(-50.0..50.0),
            ];
            let mut moved = seq.clone();
            moved.frames = seq.frames.iter().map(|f| f.transformed(&r, t)).collect();
            for (a, b) in base
                .iter()
                .zip(assemble_features(&moved, &config, None).unwrap())
            {
                po = po.max(max_abs_diff(&a.po, &b.po));
                td = td.max(max_abs_diff(&a.td, &b.td));
                nt = nt.max(max_abs_diff(&a.nt, &b.nt));
            }
        }
    }
    Outcome::check(
        po <= 1e-9 && td <= 1e-9 && nt <= 1e-9 && unit_err <= 1e-9 && nt_out == 0,
        format!("max deviation PO {po:.1e}, TD {td:.1e}, NT {nt:.1e}; TD unit error {unit_err:.1e}; NT out of range {nt_out}"),
    )
}

fn feature_dimension() -> Outcome {
    let seqs = synth_generate(&SynthConfig {
        sequences_per_class: 1,
        ..SynthConfig::default()
    })
    .unwrap();
    let with = featurize(&seqs, &FeatureConfig::default(), None).unwrap();
    let without = featurize(
        &seqs,
        &FeatureConfig {
            include_nt: false,
            ..FeatureConfig::default()
        },
        None,
    )
    .unwrap();
    let dims = |r: &[mocap::featfile::FeatureRecord]| {
        let mut d: Vec<usize> = r
            .iter()
            .flat_map(|r| r.frames.iter().map(Vec::len))
            .collect();
        d.dedup();
        d
    };
    let (a, b) = (dims(&with), dims(&without));
    Outcome::check(
        a == [33] && b == [30],
        format!("with NT {a:?}, without NT {b:?}"),
    )
}

// ----- 5, 6: oracles -----

/// Argmax of the literal product of posteriors, kept as a mantissa in
/// [0.5, 1) and a separate binary exponent so it cannot underflow.
fn product_argmax(rows: &[Vec<f64>]) -> usize {
    let q = rows[0].len();
    let mut best: Option<(usize, f64, i64)> = None;
    for c in 0..q {
        let (mut m, mut e) = (1.0f64, 0i64);
        for r in rows {
            m *= r[c];
            while m < 0.5 {
                m *= 2.0;
                e -= 1;
            }
        }
        let better = match best {
            None => true,
            Some((_, bm, be)) => e > be || (e == be && m > bm),
        };
        if better {
            best = Some((c, m, e));
        }
    }
    best.unwrap().0
}

fn sequence_rule_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut agree = 0;
    for _ in 0..1000 {
        let (n, q) = (rng.random_range(1..=20), rng.random_range(1..=10));
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..q).map(|_| rng.random_range(1e-6..1.0 - 1e-6)).collect())
            .collect();
        let (w, _) = classify_sequence(&PosteriorMatrix::new(rows.clone()).unwrap());
        agree += usize::from(w == product_argmax(&rows));
    }
    Outcome::check(agree == 1000, format!("{agree}/1000 agree"))
}

fn pca_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = 33;
        let n = rng.random_range(100..300);
        let mix = nalgebra::DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let frames: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let z = nalgebra::DVector::from_fn(d, |j, _| {
                    rng.random_range(-1.0..1.0) * 6.0 / (1.0 + j as f64)
                });
                (&mix * z).iter().map(|v| v + 2.0).collect()
            })
            .collect();
        let model = pca_fit(&frames).unwrap();
        let x = nalgebra::DMatrix::from_fn(n, d, |r, c| frames[r][c]);
        let mean = x.row_mean();
        let centered = nalgebra::DMatrix::from_fn(n, d, |r, c| x[(r, c)] - mean[c]);
        let eig =
            nalgebra::SymmetricEigen::new(centered.transpose() * &centered / (n as f64 - 1.0));
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let oracle = nalgebra::DMatrix::from_fn(d, 2, |i, k| eig.eigenvectors[(i, order[k])]);
        let ours = nalgebra::DMatrix::from_fn(d, 2, |i, k| model.components[k][i]);
        // Largest principal angle from the part of `ours` outside the oracle subspace.
        let residual = &ours - &oracle * (oracle.transpose() * &ours);
        worst = worst.max(residual.singular_values().max().min(1.0).asin());
    }
    Outcome::check(
        worst <= 1e-6,
        format!("largest principal angle {worst:.2e} rad (limit 1e-6)"),
    )
}

// ----- 7, 8, 9: synthetic benchmark -----

const LEFT: &str = "jogLeftCircle";
const RIGHT: &str = "jogRightCircle";

fn synthetic_dataset(seed: u64, include_nt: bool) -> FeatureDataset {
    let seqs = synth_generate(&SynthConfig {
        seed,
        ..SynthConfig::default()
    })
    .unwrap();
    let config = FeatureConfig {
        include_nt,
        ..FeatureConfig::default()
    };
    let records = featurize(&seqs, &config, None).unwrap();
    FeatureDataset::from_named(
        records
            .into_iter()
            .map(|r| (r.source_id, r.label.unwrap(), r.frames))
            .collect(),
    )
}

fn benchmark_run(data: &FeatureDataset, seed: u64, lambda: f64) -> EvalReport {
    let settings = EvalSettings {
        k: 2,
        seed,
        model: ModelSettings {
            arch: vec![64, 32],
            lambda,
            epochs: 20,
            ..ModelSettings::default()
        },
        ..EvalSettings::default()
    };
    let config = serde_json::to_value(&settings).unwrap();
    cross_validate(data, &settings, &config).unwrap()
}

/// Share of left- and right-circle sequences assigned their own class.
fn circle_pair_accuracy(report: &EvalReport) -> f64 {
    let idx = |name: &str| report.class_names.iter().position(|c| c == name).unwrap();
    let (l, r) = (idx(LEFT), idx(RIGHT));
    let hits = report.confusion[l][l] + report.confusion[r][r];
    let total: usize = report.confusion[l].iter().chain(&report.confusion[r]).sum();
    hits as f64 / total as f64
}

fn synthetic_benchmark() -> Outcome {
    let with = benchmark_run(&synthetic_dataset(1, true), 1, 0.1);
    let without = benchmark_run(&synthetic_dataset(1, false), 1, 0.1);
    let (acc, pair) = (with.sequence_accuracy_mean, circle_pair_accuracy(&without));
    Outcome::check(
        acc >= 0.95 && pair <= 0.60,
        format!(
            "with NT sequence accuracy {acc:.4} (need >= 0.95); without NT circle-pair accuracy {pair:.4} (need <= 0.60), overall {:.4}",
            without.sequence_accuracy_mean
        ),
    )
}

fn hybrid_trend() -> Outcome {
    let lambdas = [0.0, 0.1, 0.5, 0.9];
    let mut sums = [0.0; 4];
    for seed in 1..=5u64 {
        let data = synthetic_dataset(seed, true);
        for (s, &l) in sums.iter_mut().zip(&lambdas) {
            *s += benchmark_run(&data, seed, l).sequence_accuracy_mean;
        }
    }
    let means: Vec<f64> = sums.iter().map(|s| s / 5.0).collect();
    let best = means[1..].iter().copied().fold(f64::MIN, f64::max);
    Outcome::check(
        best >= means[0],
        format!(
            "mean sequence accuracy λ=0: {:.4}, λ=0.1: {:.4}, λ=0.5: {:.4}, λ=0.9: {:.4}",
            means[0], means[1], means[2], means[3]
        ),
    )
}

fn embedding_purity() -> Outcome {
    let data = synthetic_dataset(1, true);
    let mut settings = EmbedSettings {
        arch: vec![64, 32, 16, 2],
        epochs: 60,
        sequences_per_class: Some(10),
        classes: Some(vec![LEFT.into(), RIGHT.into()]),
        ..EmbedSettings::default()
    };
    let ae = nearest_neighbor_purity(&embed_sequences(&data, &settings).unwrap()).unwrap();
    settings.method = EmbedMethod::Pca;
    let pca = nearest_neighbor_purity(&embed_sequences(&data, &settings).unwrap()).unwrap();
    Outcome::check(
        ae >= pca,
        format!("1-NN purity autoencoder {ae:.4}, PCA {pca:.4}"),
    )
}

// ----- 10: determinism -----

fn cli(args: &[&str]) {
    let mut argv = vec!["mocap"];
    argv.extend_from_slice(args);
    run_from(argv).unwrap_or_else(|e| panic!("mocap {}: {e}", args.join(" ")));
}

fn same_bytes(a: &Path, b: &Path) -> bool {
    std::fs::read(a).unwrap() == std::fs::read(b).unwrap()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let asf = data.join("tiny.asf").to_string_lossy().into_owned();
    let amc: Vec<String> = ["HDM_bd_walk_001_120.amc", "HDM_bd_turn_001_120.amc"]
        .iter()
        .map(|f| data.join(f).to_string_lossy().into_owned())
        .collect();
    let tiny = ["--arch", "12,6", "--epochs", "3", "--minibatch-size", "64"];

    cli(&[
        "parse",
        "--asf",
        &asf,
        "--amc",
        &amc[0],
        &amc[1],
        "--out",
        &p("parsed.jsonl"),
    ]);
    cli(&[
        "synth",
        "--sequences-per-class",
        "4",
        "--out",
        &p("motion.jsonl"),
    ]);
    cli(&[
        "featurize",
        "--in",
        &p("motion.jsonl"),
        "--out",
        &p("features.jsonl"),
    ]);
    cli(&[
        &[
            "train",
            "--features",
            &p("features.jsonl"),
            "--out",
            &p("model.json"),
        ][..],
        &tiny,
    ]
    .concat());
    cli(&[
        "classify",
        "--model",
        &p("model.json"),
        "--in",
        &p("features.jsonl"),
        "--out",
        &p("pred.csv"),
    ]);
    cli(&[
        &[
            "eval",
            "--features",
            &p("features.jsonl"),
            "--k",
            "2",
            "--report",
            &p("report.json"),
        ][..],
        &tiny,
    ]
    .concat());
    cli(&[
        "embed",
        "--features",
        &p("features.jsonl"),
        "--arch",
        "8,2",
        "--epochs",
        "2",
        "--out",
        &p("embed.svg"),
    ]);
    cli(&[
        "embed",
        "--features",
        &p("features.jsonl"),
        "--method",
        "pca",
        "--out",
        &p("pca.svg"),
        "--csv",
        &p("pca_points.csv"),
    ]);

    // (artifact, subcommand, extra output flags of the re-run, outputs to compare)
    #[allow(clippy::type_complexity)]
    let reruns: [(&str, &str, Vec<String>, Vec<(&str, &str)>); 8] = [
        (
            "parsed.jsonl",
            "parse",
            vec!["--out".into(), p("parsed2.jsonl")],
            vec![("parsed.jsonl", "parsed2.jsonl")],
        ),
        (
            "motion.jsonl",
            "synth",
            vec!["--out".into(), p("motion2.jsonl")],
            vec![("motion.jsonl", "motion2.jsonl")],
        ),
        (
            "features.jsonl",
            "featurize",
            vec!["--out".into(), p("features2.jsonl")],
            vec![("features.jsonl", "features2.jsonl")],
        ),
        (
            "model.json",
            "train",
            vec!["--out".into(), p("model2.json")],
            vec![("model.json", "model2.json")],
        ),
        (
            "pred.csv",
            "classify",
            vec!["--out".into(), p("pred2.csv")],
            vec![("pred.csv", "pred2.csv")],
        ),
        (
            "report.json",
            "eval",
            vec!["--report".into(), p("report2.json")],
            vec![
                ("report.json", "report2.json"),
                ("report.csv", "report2.csv"),
            ],
        ),
        (
            "embed.svg",
            "embed",
            vec!["--out".into(), p("embed2.svg")],
            vec![("embed.svg", "embed2.svg"), ("embed.csv", "embed2.csv")],
        ),
        (
            "pca_points.csv",
            "embed",
            vec![
                "--out".into(),
                p("pca2.svg"),
                "--csv".into(),
                p("pca2_points.csv"),
            ],
            vec![
                ("pca.svg", "pca2.svg"),
                ("pca_points.csv", "pca2_points.csv"),
            ],
        ),
    ];
    let mut mismatched = Vec::new();
    let mut compared = 0;
    for (artifact, cmd, extra, pairs) in &reruns {
        let mut args = vec![cmd.to_string(), "--config".into(), p(artifact)];
        args.extend(extra.iter().cloned());
        cli(&args.iter().map(String::as_str).collect::<Vec<_>>());
        for (a, b) in pairs {
            compared += 1;
            if !same_bytes(&PathBuf::from(p(a)), &PathBuf::from(p(b))) {
                mismatched.push(format!("{cmd}:{a}"));
            }
        }
    }
    // Thread count must not change results either.
    cli(&[
        "--threads",
        "2",
        "eval",
        "--config",
        &p("report.json"),
        "--report",
        &p("report3.json"),
    ]);
    compared += 1;
    if !same_bytes(
        &PathBuf::from(p("report.json")),
        &PathBuf::from(p("report3.json")),
    ) {
        mismatched.push("eval:--threads 2".into());
    }
    Outcome::check(
        mismatched.is_empty(),
        format!(
            "{} of {compared} re-run outputs bit-identical{}",
            compared - mismatched.len(),
            if mismatched.is_empty() {
                String::new()
            } else {
                format!("; differing: {}", mismatched.join(", "))
            }
        ),
    )
}

// ----- 11: full HDM05 -----

fn hdm05_reproduction() -> Option<Outcome> {
    let dir = PathBuf::from(std::env::var_os("MOCAP_HDM05_DIR")?);
    let mut by_actor: std::collections::BTreeMap<String, Vec<PathBuf>> = Default::default();
    for entry in std::fs::read_dir(&dir).ok()? {
        let path = entry.ok()?.path();
        if path.extension().is_some_and(|e| e == "amc") && hdm05_label(&path).is_some() {
            let stem = path.file_stem()?.to_string_lossy().into_owned();
            let actor = stem.split('_').nth(1)?.to_string();
            by_actor.entry(actor).or_default().push(path);
        }
    }
    let mut seqs = Vec::new();
    for (actor, mut files) in by_actor {
        files.sort();
        let asf = dir.join(format!("HDM_{actor}.asf"));
        match load_asf_amc(&asf, &files, None, None) {
            Ok(s) => seqs.extend(s),
            Err(e) => return Some(Outcome::check(false, format!("loading actor {actor}: {e}"))),
        }
    }
    let records = featurize(&seqs, &FeatureConfig::default(), None).ok()?;
    let map = parse_merge_map(HDM05_65).ok()?;
    let raw: Vec<String> = records.iter().map(|r| r.label.clone().unwrap()).collect();
    let merged = match merge_classes(&raw, &map) {
        Ok(m) => m,
        Err(e) => return Some(Outcome::check(false, e.to_string())),
    };
    let data = FeatureDataset::from_named(
        records
            .into_iter()
            .zip(merged)
            .map(|(r, l)| (r.source_id, l, r.frames))
            .collect(),
    );
    let settings = EvalSettings {
        k: 10,
        seed: 1,
        model: ModelSettings {
            arch: vec![1000, 500],
            lambda: 0.1,
            ..ModelSettings::default()
        },
        ..EvalSettings::default()
    };
    let config = serde_json::to_value(&settings).ok()?;
    let report = cross_validate(&data, &settings, &config).ok()?;
    let acc = report.sequence_accuracy_mean;
    Some(Outcome::check(
        (acc - 0.9521).abs() <= 0.025,
        format!(
            "{} sequences, {} classes: sequence accuracy {acc:.4} ± {:.4} (target 0.9521 ± 0.025)",
            data.sequences.len(),
            data.num_classes(),
            report.sequence_accuracy_std
        ),
    ))
}
