//! Per-frame feature extraction.
//!
//! Each frame becomes `[PO | TD | NT]`:
//! - PO: selected joint coordinates after moving the root to the origin,
//!   undoing the root orientation and rescaling every bone to unit length;
//! - TD: unit-normalized change of PO over a fixed frame offset `m`;
//! - NT: root displacement from the first frame, expressed in the first
//!   frame's root axes and scaled per dimension into `[-1, 1]`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::align::estimate_template_rotation;
use crate::error::{invalid, Error, Result};
use crate::linalg::{add3, mat3_t_vec, norm3, scale3, sub3, transpose3, Mat3, Vec3};
use crate::skeleton::{resolve_joints, MotionSequence, PoseFrame, SkeletonDefinition};

/// Below this norm a PO difference counts as no motion.
pub const TD_ZERO_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub po_joints: Vec<String>,
    pub td_offset_seconds: f64,
    pub include_nt: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            po_joints: ["head", "lhand", "rhand", "lfoot", "rfoot"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            td_offset_seconds: 0.3,
            include_nt: true,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.po_joints.is_empty() {
            return Err(invalid!("po_joints must not be empty"));
        }
        if !(self.td_offset_seconds > 0.0) {
            return Err(invalid!("td_offset_seconds must be positive"));
        }
        Ok(())
    }

    /// `3·n·2 + 3` with NT, `3·n·2` without.
    pub fn dimension(&self) -> usize {
        6 * self.po_joints.len() + if self.include_nt { 3 } else { 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameFeature {
    pub po: Vec<f64>,
    pub td: Vec<f64>,
    /// Empty when NT is disabled.
    pub nt: Vec<f64>,
    /// 1-based.
    pub frame_index: usize,
}

impl FrameFeature {
    pub fn dim(&self) -> usize {
        self.po.len() + self.td.len() + self.nt.len()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(&self.po);
        v.extend_from_slice(&self.td);
        v.extend_from_slice(&self.nt);
        v
    }
}

/// Joint positions with the root at the origin, identity root orientation
/// and unit bone lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPose {
    pub joint_positions: Vec<Vec3>,
}

pub fn normalize_pose(frame: &PoseFrame, skel: &SkeletonDefinition) -> Result<NormalizedPose> {
    normalize_pose_with(frame, skel, &frame.root_orientation)
}

/// As [`normalize_pose`], with the root orientation supplied by the caller
/// (estimated orientation for position-only data).
pub fn normalize_pose_with(
    frame: &PoseFrame,
    skel: &SkeletonDefinition,
    root_orientation: &Mat3,
) -> Result<NormalizedPose> {
    if frame.joint_positions.len() != skel.len() {
        return Err(invalid!(
            "frame has {} joints, skeleton has {}",
            frame.joint_positions.len(),
            skel.len()
        ));
    }
    let local: Vec<Vec3> = frame
        .joint_positions
        .iter()
        .map(|&p| mat3_t_vec(root_orientation, sub3(p, frame.root_position)))
        .collect();
    let mut out = vec![[0.0; 3]; skel.len()];
    for (j, joint) in skel.joints.iter().enumerate() {
        let Some(p) = joint.parent else {
            continue;
        };
        let bone = sub3(local[j], local[p]);
        let len = norm3(bone);
        if !(len > 0.0) {
            return Err(Error::ZeroLengthBone {
                joint: joint.name.clone(),
            });
        }
        out[j] = add3(out[p], scale3(bone, 1.0 / len));
    }
    Ok(NormalizedPose {
        joint_positions: out,
    })
}

/// Concatenated coordinates of the given joints, in order.
pub fn extract_po(pose: &NormalizedPose, joints: &[usize]) -> Result<Vec<f64>> {
    let mut v = Vec::with_capacity(3 * joints.len());
    for &j in joints {
        let p = pose
            .joint_positions
            .get(j)
            .ok_or_else(|| invalid!("joint index {j} out of range"))?;
        v.extend_from_slice(p);
    }
    Ok(v)
}

/// Frame offset `m` for a TD window of `seconds` at `frame_rate`:
/// `round(seconds · fps)` clamped to `[2, n − 1]` (lower bound only when
/// `n < 3`).
pub fn td_offset_frames(seconds: f64, frame_rate: f64, n: usize) -> usize {
    let raw = libm::round(seconds * frame_rate).max(2.0) as usize;
    if n >= 3 {
        raw.min(n - 1)
    } else {
        raw
    }
}

/// Temporal differences with 1-based frame `i`: PO itself for `i < m`,
/// otherwise `(po_i − po_{i−m+1}) / ‖·‖`, and the zero vector when that
/// norm is below [`TD_ZERO_NORM`].
pub fn extract_td(po_seq: &[Vec<f64>], m: usize) -> Result<Vec<Vec<f64>>> {
    if po_seq.len() < 2 {
        return Err(invalid!("TD needs at least 2 frames, got {}", po_seq.len()));
    }
    if m < 2 {
        return Err(invalid!("TD offset must be at least 2, got {m}"));
    }
    let out = po_seq
        .iter()
        .enumerate()
        .map(|(k, po)| {
            // k is 0-based, so frame i = k + 1 and i < m  <=>  k + 1 < m.
            if k + 1 < m {
                return po.clone();
            }
            let earlier = &po_seq[k + 1 - m];
            let diff: Vec<f64> = po.iter().zip(earlier).map(|(a, b)| a - b).collect();
            let norm = libm::sqrt(diff.iter().map(|d| d * d).sum::<f64>());
            if norm < TD_ZERO_NORM {
                vec![0.0; diff.len()]
            } else {
                diff.into_iter().map(|d| d / norm).collect()
            }
        })
        .collect();
    Ok(out)
}

/// Root trajectory relative to the first frame, in the first frame's root
/// axes, scaled per dimension by the largest absolute value.
pub fn extract_nt(roots: &[Vec3], first_orientation: &Mat3) -> Vec<Vec3> {
    let Some(&origin) = roots.first() else {
        return Vec::new();
    };
    let raw: Vec<Vec3> = roots
        .iter()
        .map(|&r| mat3_t_vec(first_orientation, sub3(r, origin)))
        .collect();
    let mut max_abs = [0.0f64; 3];
    for r in &raw {
        for d in 0..3 {
            max_abs[d] = max_abs[d].max(r[d].abs());
        }
    }
    raw.into_iter()
        .map(|r| {
            let mut out = [0.0; 3];
            for d in 0..3 {
                if max_abs[d] > 0.0 {
                    out[d] = r[d] / max_abs[d];
                }
            }
            out
        })
        .collect()
}

/// Root orientation of every frame: stored matrices, or Kabsch estimates
/// against `template` when the sequence needs alignment.
pub fn root_orientations(seq: &MotionSequence, template: Option<&[Vec3]>) -> Result<Vec<Mat3>> {
    if !seq.needs_alignment {
        return Ok(seq.frames.iter().map(|f| f.root_orientation).collect());
    }
    let template = template.ok_or_else(|| {
        invalid!(
            "sequence `{}` has no root orientation and no template frame was given",
            seq.source_id
        )
    })?;
    seq.frames
        .iter()
        .map(|f| {
            // R maps the frame onto the template, so the frame's orientation
            // relative to the template is Rᵀ.
            estimate_template_rotation(&f.joint_positions, template).map(|r| transpose3(&r))
        })
        .collect()
}

pub fn assemble_features(
    seq: &MotionSequence,
    config: &FeatureConfig,
    template: Option<&[Vec3]>,
) -> Result<Vec<FrameFeature>> {
    config.validate()?;
    seq.validate()?;
    let skel = &seq.skeleton;
    let joints = resolve_joints(skel, &config.po_joints)?;
    let orientations = root_orientations(seq, template)?;
    let po: Vec<Vec<f64>> = seq
        .frames
        .iter()
        .zip(&orientations)
        .map(|(f, r)| normalize_pose_with(f, skel, r).and_then(|p| extract_po(&p, &joints)))
        .collect::<Result<_>>()?;
    let n = po.len();
    let td = if n < 2 {
        po.clone()
    } else {
        extract_td(
            &po,
            td_offset_frames(config.td_offset_seconds, seq.frame_rate, n),
        )?
    };
    let nt = if config.include_nt {
        let roots: Vec<Vec3> = seq.frames.iter().map(|f| f.root_position).collect();
        extract_nt(&roots, &orientations[0])
            .into_iter()
            .map(|v| v.to_vec())
            .collect()
    } else {
        vec![Vec::new(); n]
    };
    let feats = po
        .into_iter()
        .zip(td)
        .zip(nt)
        .enumerate()
        .map(|(k, ((po, td), nt))| FrameFeature {
            po,
            td,
            nt,
            frame_index: k + 1,
        })
        .collect::<Vec<_>>();
    for f in &feats {
        if f.po
            .iter()
            .chain(&f.td)
            .chain(&f.nt)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite(alloc::format!(
                "feature of frame {} in `{}`",
                f.frame_index,
                seq.source_id
            )));
        }
    }
    Ok(feats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{euler_extrinsic, mat3_vec, IDENTITY3};
    use crate::skeleton::tests::{joint, root};
    use crate::skeleton::RootSpec;
    use alloc::sync::Arc;

    fn line_skel() -> SkeletonDefinition {
        SkeletonDefinition {
            joints: vec![
                root(),
                joint("a", 0, [1.0, 0.0, 0.0], 2.0),
                joint("b", 1, [1.0, 0.0, 0.0], 0.5),
            ],
            root: RootSpec::default(),
        }
    }

    fn frame(points: Vec<Vec3>) -> PoseFrame {
        PoseFrame {
            root_position: points[0],
            joint_positions: points,
            root_orientation: IDENTITY3,
        }
    }

    #[test]
    fn unit_bone_rescaling_on_collinear_chain() {
        let f = frame(vec![[0.0; 3], [2.0, 0.0, 0.0], [2.5, 0.0, 0.0]]);
        let p = normalize_pose(&f, &line_skel()).unwrap();
        assert_eq!(p.joint_positions[1], [1.0, 0.0, 0.0]);
        assert_eq!(p.joint_positions[2], [2.0, 0.0, 0.0]);
    }

    #[test]
    fn normalized_pose_is_a_fixed_point() {
        let f = frame(vec![[0.0; 3], [0.6, 0.8, 0.0], [0.6, 0.8, 1.0]]);
        let p = normalize_pose(&f, &line_skel()).unwrap();
        for (a, b) in p.joint_positions.iter().zip(&f.joint_positions) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalization_undoes_rigid_motion() {
        let f = frame(vec![[0.0; 3], [1.3, 0.2, -0.4], [1.0, 1.1, 0.3]]);
        let rot = euler_extrinsic(&[(0, 0.7), (1, -1.2), (2, 2.5)]);
        let g = f.transformed(&rot, [4.0, -2.0, 7.5]);
        let a = normalize_pose(&f, &line_skel()).unwrap();
        let b = normalize_pose(&g, &line_skel()).unwrap();
        for (x, y) in a.joint_positions.iter().zip(&b.joint_positions) {
            for k in 0..3 {
                assert!((x[k] - y[k]).abs() < 1e-9);
            }
        }
        assert_eq!(b.joint_positions[0], [0.0; 3]);
    }

    #[test]
    fn zero_length_bone_names_the_joint() {
        let f = frame(vec![[0.0; 3], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        let err = normalize_pose(&f, &line_skel()).unwrap_err();
        assert_eq!(
            err,
            Error::ZeroLengthBone {
                joint: "b".to_string()
            }
        );
    }

    #[test]
    fn po_concatenates_in_config_order() {
        let pose = NormalizedPose {
            joint_positions: vec![[0.0; 3], [1.0, 2.0, 3.0], [4.0, 5.0, 6.0]],
        };
        assert_eq!(
            extract_po(&pose, &[2, 1]).unwrap(),
            vec![4.0, 5.0, 6.0, 1.0, 2.0, 3.0]
        );
        assert_eq!(extract_po(&pose, &[0]).unwrap(), vec![0.0, 0.0, 0.0]);
        assert!(extract_po(&pose, &[3]).is_err());
    }

    #[test]
    fn td_first_branch_copies_po() {
        let po: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let td = extract_td(&po, 3).unwrap();
        // frames 1 and 2 (i < m = 3)
        assert_eq!(td[0], po[0]);
        assert_eq!(td[1], po[1]);
        // frame 3: (po_3 − po_1)/‖·‖ = (2, 4)/√20
        let s = libm::sqrt(20.0);
        assert!((td[2][0] - 2.0 / s).abs() < 1e-15 && (td[2][1] - 4.0 / s).abs() < 1e-15);
        for t in &td[2..] {
            let n: f64 = t.iter().map(|v| v * v).sum();
            assert!((libm::sqrt(n) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn td_constant_sequence_is_zero_after_offset() {
        let po = vec![vec![0.3, -0.2, 1.0]; 6];
        let td = extract_td(&po, 3).unwrap();
        assert_eq!(td[1], po[1]);
        for t in &td[2..] {
            assert_eq!(t, &vec![0.0; 3]);
        }
    }

    #[test]
    fn td_rejects_short_input() {
        assert!(extract_td(&[vec![1.0]], 2).is_err());
        assert!(extract_td(&[vec![1.0], vec![2.0]], 1).is_err());
    }

    #[test]
    fn td_offset_rounding_and_clamping() {
        assert_eq!(td_offset_frames(0.3, 120.0, 500), 36);
        assert_eq!(td_offset_frames(0.3, 120.0, 20), 19);
        assert_eq!(td_offset_frames(0.001, 120.0, 20), 2);
        assert_eq!(td_offset_frames(0.3, 120.0, 1), 36);
    }

    #[test]
    fn nt_first_frame_zero_and_stationary_zero() {
        let roots = vec![[1.0, 2.0, 3.0]; 4];
        for v in extract_nt(&roots, &IDENTITY3) {
            assert_eq!(v, [0.0; 3]);
        }
    }

    #[test]
    fn nt_straight_walk_along_local_x() {
        // First-frame orientation turns local +x into world +z.
        let r1 = euler_extrinsic(&[(1, -core::f64::consts::FRAC_PI_2)]);
        let fwd = mat3_vec(&r1, [1.0, 0.0, 0.0]);
        let roots: Vec<Vec3> = (0..5).map(|i| scale3(fwd, i as f64)).collect();
        let nt = extract_nt(&roots, &r1);
        let expected = [0.0, 0.25, 0.5, 0.75, 1.0];
        for (v, e) in nt.iter().zip(expected) {
            assert!((v[0] - e).abs() < 1e-12);
            assert!(v[1].abs() < 1e-12 && v[2].abs() < 1e-12);
        }
    }

    fn seq(frames: Vec<PoseFrame>) -> MotionSequence {
        MotionSequence::new(Arc::new(line_skel()), frames, 10.0, None, "s").unwrap()
    }

    fn cfg(include_nt: bool) -> FeatureConfig {
        FeatureConfig {
            po_joints: vec!["a".into(), "b".into()],
            td_offset_seconds: 0.3,
            include_nt,
        }
    }

    #[test]
    fn assembled_dimension_with_and_without_nt() {
        let frames: Vec<PoseFrame> = (0..6)
            .map(|i| {
                let t = i as f64 * 0.1;
                frame(vec![
                    [t, 0.0, 0.0],
                    [t + 1.0, 0.2 * t, 0.0],
                    [t + 1.0, 1.0, t],
                ])
            })
            .collect();
        let s = seq(frames);
        let with = assemble_features(&s, &cfg(true), None).unwrap();
        assert!(with.iter().all(|f| f.dim() == 15));
        let without = assemble_features(&s, &cfg(false), None).unwrap();
        assert!(without.iter().all(|f| f.dim() == 12 && f.nt.is_empty()));
        assert_eq!(with[3].frame_index, 4);
    }

    #[test]
    fn single_frame_sequence_uses_boundary_branches() {
        let s = seq(vec![frame(vec![
            [0.0; 3],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
        ])]);
        let f = assemble_features(&s, &cfg(true), None).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].td, f[0].po);
        assert_eq!(f[0].nt, vec![0.0; 3]);
    }

    #[test]
    fn unknown_po_joint_is_an_error() {
        let s = seq(vec![frame(vec![
            [0.0; 3],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
        ])]);
        let mut c = cfg(true);
        c.po_joints.push("nope".into());
        assert_eq!(
            assemble_features(&s, &c, None).unwrap_err(),
            Error::UnknownJoint("nope".into())
        );
    }

    #[test]
    fn alignment_requires_template() {
        let mut s = seq(vec![frame(vec![
            [0.0; 3],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
        ])]);
        s.needs_alignment = true;
        assert!(assemble_features(&s, &cfg(true), None).is_err());
        let template = s.frames[0].joint_positions.clone();
        let f = assemble_features(&s, &cfg(true), Some(&template)).unwrap();
        let direct = {
            let mut t = s.clone();
            t.needs_alignment = false;
            assemble_features(&t, &cfg(true), None).unwrap()
        };
        for (a, b) in f[0].po.iter().zip(&direct[0].po) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
