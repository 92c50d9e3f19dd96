//! Labeled synthetic gestures on a small humanoid.
//!
//! Conventions: `y` is up, the body faces `+z` at rest, and its left side is
//! `+x`. Each class moves joints with sinusoidal offsets in the body frame
//! while the root follows a straight line or a circle with the body turned
//! along the path.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{add3, axis_rotation, mat3_mul, mat3_vec, Mat3, Vec3};
use crate::skeleton::{MotionSequence, PoseFrame, SkeletonDefinition};

/// `(name, parent, rest position)`; joint 0 is the pelvis root.
const HUMANOID: [(&str, Option<usize>, Vec3); 16] = [
    ("root", None, [0.0, 1.0, 0.0]),
    ("spine", Some(0), [0.0, 1.25, 0.0]),
    ("neck", Some(1), [0.0, 1.5, 0.0]),
    ("head", Some(2), [0.0, 1.7, 0.0]),
    ("lshoulder", Some(2), [0.2, 1.45, 0.0]),
    ("lelbow", Some(4), [0.22, 1.15, 0.0]),
    ("lhand", Some(5), [0.24, 0.9, 0.0]),
    ("rshoulder", Some(2), [-0.2, 1.45, 0.0]),
    ("relbow", Some(7), [-0.22, 1.15, 0.0]),
    ("rhand", Some(8), [-0.24, 0.9, 0.0]),
    ("lhip", Some(0), [0.1, 0.95, 0.0]),
    ("lknee", Some(10), [0.1, 0.5, 0.0]),
    ("lfoot", Some(11), [0.1, 0.05, 0.0]),
    ("rhip", Some(0), [-0.1, 0.95, 0.0]),
    ("rknee", Some(13), [-0.1, 0.5, 0.0]),
    ("rfoot", Some(14), [-0.1, 0.05, 0.0]),
];

/// Skeleton used by the generator.
pub fn humanoid_skeleton() -> SkeletonDefinition {
    let names: Vec<String> = HUMANOID.iter().map(|j| String::from(j.0)).collect();
    let parents: Vec<Option<usize>> = HUMANOID.iter().map(|j| j.1).collect();
    let rest: Vec<Vec3> = HUMANOID.iter().map(|j| j.2).collect();
    SkeletonDefinition::from_positions(&names, &parents, &rest).expect("built-in skeleton is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trajectory {
    Straight,
    LeftCircle,
    RightCircle,
}

/// Offset `amplitude · sin(2π·frequency·t + phase)` along one body axis,
/// applied to a joint and everything below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointMotion {
    pub joint: String,
    pub axis: usize,
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub name: String,
    #[serde(default)]
    pub motions: Vec<JointMotion>,
    pub trajectory: Trajectory,
    /// Root speed along the path in units per second.
    #[serde(default)]
    pub speed: f64,
    /// Circle radius; ignored for straight paths.
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_radius() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub class_specs: Vec<ClassSpec>,
    pub sequences_per_class: usize,
    pub frames_range: (usize, usize),
    pub noise_sigma: f64,
    pub frame_rate: f64,
    /// Relative per-sequence jitter of amplitudes, frequencies and speed.
    pub jitter: f64,
    pub seed: u64,
}

fn motion(joint: &str, axis: usize, amplitude: f64, frequency: f64, phase: f64) -> JointMotion {
    JointMotion {
        joint: String::from(joint),
        axis,
        amplitude,
        frequency,
        phase,
    }
}

/// Limb swing shared by the jogging classes.
fn jog() -> Vec<JointMotion> {
    vec![
        motion("lknee", 2, 0.25, 2.5, 0.0),
        motion("rknee", 2, 0.25, 2.5, PI),
        motion("lelbow", 2, 0.15, 2.5, PI),
        motion("relbow", 2, 0.15, 2.5, 0.0),
        motion("root", 1, 0.04, 5.0, 0.0),
    ]
}

fn class(name: &str, motions: Vec<JointMotion>, trajectory: Trajectory, speed: f64) -> ClassSpec {
    ClassSpec {
        name: String::from(name),
        motions,
        trajectory,
        speed,
        radius: default_radius(),
    }
}

impl Default for SynthConfig {
    /// Six classes; the two circle classes differ only in turning direction.
    fn default() -> Self {
        Self {
            class_specs: vec![
                class("jogLeftCircle", jog(), Trajectory::LeftCircle, 1.5),
                class("jogRightCircle", jog(), Trajectory::RightCircle, 1.5),
                class(
                    "walk",
                    vec![
                        motion("lknee", 2, 0.15, 1.2, 0.0),
                        motion("rknee", 2, 0.15, 1.2, PI),
                        motion("lhand", 2, 0.1, 1.2, PI),
                        motion("rhand", 2, 0.1, 1.2, 0.0),
                    ],
                    Trajectory::Straight,
                    0.8,
                ),
                class(
                    "wave",
                    vec![
                        motion("relbow", 1, 0.35, 0.0, PI / 2.0),
                        motion("rhand", 1, 0.5, 0.0, PI / 2.0),
                        motion("rhand", 0, 0.2, 1.5, 0.0),
                    ],
                    Trajectory::Straight,
                    0.0,
                ),
                class(
                    "squat",
                    vec![
                        motion("root", 1, 0.2, 0.6, 0.0),
                        motion("lknee", 2, 0.15, 0.6, -PI / 2.0),
                        motion("rknee", 2, 0.15, 0.6, -PI / 2.0),
                        motion("lhand", 2, 0.2, 0.6, 0.0),
                        motion("rhand", 2, 0.2, 0.6, 0.0),
                    ],
                    Trajectory::Straight,
                    0.0,
                ),
                class(
                    "kick",
                    vec![
                        motion("rknee", 2, 0.3, 1.0, 0.0),
                        motion("rfoot", 2, 0.3, 1.0, 0.0),
                        motion("lhand", 0, 0.1, 1.0, PI),
                    ],
                    Trajectory::Straight,
                    0.0,
                ),
            ],
            sequences_per_class: 40,
            frames_range: (60, 90),
            noise_sigma: 0.005,
            frame_rate: 30.0,
            jitter: 0.1,
            seed: 1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.class_specs.is_empty() {
            return Err(invalid!("no classes configured"));
        }
        if self.sequences_per_class < 1 {
            return Err(invalid!("sequences_per_class must be at least 1"));
        }
        let (lo, hi) = self.frames_range;
        if lo < 2 || hi < lo {
            return Err(invalid!(
                "frames_range must satisfy 2 <= min <= max, got ({lo}, {hi})"
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(invalid!("noise_sigma must be non-negative"));
        }
        if !(self.frame_rate > 0.0 && self.frame_rate.is_finite()) {
            return Err(invalid!("frame_rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(invalid!("jitter must lie in [0, 1)"));
        }
        let skel = humanoid_skeleton();
        for spec in &self.class_specs {
            for m in &spec.motions {
                if skel.joint_index(&m.joint).is_none() {
                    return Err(invalid!(
                        "class `{}` moves unknown joint `{}`",
                        spec.name,
                        m.joint
                    ));
                }
                if m.axis > 2 {
                    return Err(invalid!(
                        "class `{}` uses axis {} (expected 0..=2)",
                        spec.name,
                        m.axis
                    ));
                }
            }
            if spec.trajectory != Trajectory::Straight && !(spec.radius > 0.0) {
                return Err(invalid!(
                    "class `{}` needs a positive circle radius",
                    spec.name
                ));
            }
            if !(spec.speed >= 0.0) {
                return Err(invalid!("class `{}` has negative speed", spec.name));
            }
        }
        Ok(())
    }
}

/// Root position (relative to the start) and heading angle about `+y` at
/// time `t`.
fn path(kind: Trajectory, speed: f64, radius: f64, t: f64) -> (Vec3, f64) {
    match kind {
        Trajectory::Straight => ([0.0, 0.0, speed * t], 0.0),
        Trajectory::LeftCircle | Trajectory::RightCircle => {
            let theta = speed / radius * t;
            let side = if kind == Trajectory::LeftCircle {
                1.0
            } else {
                -1.0
            };
            (
                [
                    side * radius * (1.0 - libm::cos(theta)),
                    0.0,
                    radius * libm::sin(theta),
                ],
                side * theta,
            )
        }
    }
}

fn jittered<R: Rng>(rng: &mut R, value: f64, jitter: f64) -> f64 {
    if jitter == 0.0 {
        value
    } else {
        value * (1.0 + rng.random_range(-jitter..=jitter))
    }
}

/// Generates `sequences_per_class` sequences per class, classes in order.
pub fn synth_generate(config: &SynthConfig) -> Result<Vec<MotionSequence>> {
    config.validate()?;
    let skel = Arc::new(humanoid_skeleton());
    let n_joints = skel.len();
    // Descendant sets, so an offset on a joint carries its subtree along.
    let mut subtree = vec![vec![false; n_joints]; n_joints];
    #[allow(clippy::needless_range_loop)]
    for j in 0..n_joints {
        let mut k = Some(j);
        while let Some(a) = k {
            subtree[a][j] = true;
            k = skel.joints[a].parent;
        }
    }
    let noise = Normal::new(0.0, config.noise_sigma).map_err(|_| invalid!("bad noise_sigma"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::with_capacity(config.class_specs.len() * config.sequences_per_class);
    let dt = 1.0 / config.frame_rate;
    for spec in &config.class_specs {
        for s in 0..config.sequences_per_class {
            let n = rng.random_range(config.frames_range.0..=config.frames_range.1);
            let yaw = rng.random_range(-PI..PI);
            let start: Vec3 = [
                rng.random_range(-3.0..3.0),
                0.0,
                rng.random_range(-3.0..3.0),
            ];
            let speed = jittered(&mut rng, spec.speed, config.jitter);
            let t0 = rng.random_range(0.0..1.0);
            let motions: Vec<(usize, usize, f64, f64, f64)> = spec
                .motions
                .iter()
                .map(|m| {
                    (
                        skel.joint_index(&m.joint).expect("validated"),
                        m.axis,
                        jittered(&mut rng, m.amplitude, config.jitter),
                        jittered(&mut rng, m.frequency, config.jitter),
                        m.phase,
                    )
                })
                .collect();
            let global = axis_rotation(1, yaw);
            let mut frames = Vec::with_capacity(n);
            for i in 0..n {
                let t = i as f64 * dt;
                let (offset, heading) = path(spec.trajectory, speed, spec.radius, t);
                let mut local: Vec<Vec3> = HUMANOID.iter().map(|j| j.2).collect();
                for &(joint, axis, amp, freq, phase) in &motions {
                    let d = amp * libm::sin(2.0 * PI * freq * (t + t0) + phase);
                    for (k, p) in local.iter_mut().enumerate() {
                        if subtree[joint][k] {
                            p[axis] += d;
                        }
                    }
                }
                let orientation: Mat3 = mat3_mul(&global, &axis_rotation(1, heading));
                let base = add3(start, mat3_vec(&global, offset));
                // Body-frame coordinates are taken relative to the rest root.
                let body_origin = [0.0, HUMANOID[0].2[1], 0.0];
                let mut joints: Vec<Vec3> = local
                    .iter()
                    .map(|&p| {
                        let rel = [
                            p[0] - body_origin[0],
                            p[1] - body_origin[1],
                            p[2] - body_origin[2],
                        ];
                        add3(add3(base, body_origin), mat3_vec(&orientation, rel))
                    })
                    .collect();
                if config.noise_sigma > 0.0 {
                    for p in &mut joints {
                        for c in p.iter_mut() {
                            *c += noise.sample(&mut rng);
                        }
                    }
                }
                frames.push(PoseFrame {
                    root_position: joints[0],
                    joint_positions: joints,
                    root_orientation: orientation,
                });
            }
            out.push(MotionSequence::new(
                Arc::clone(&skel),
                frames,
                config.frame_rate,
                Some(spec.name.clone()),
                format!("{}_{:03}", spec.name, s + 1),
            )?);
        }
    }
    Ok(out)
}
