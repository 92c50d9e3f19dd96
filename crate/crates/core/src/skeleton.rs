//! Skeleton hierarchy, pose frames and forward kinematics.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    add3, euler_extrinsic, is_rotation, mat3_mul, mat3_vec, norm3, scale3, sub3, transpose3, Mat3,
    Vec3, IDENTITY3,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngleUnit {
    Degrees,
    Radians,
}

impl AngleUnit {
    pub fn to_radians(self, v: f64) -> f64 {
        match self {
            AngleUnit::Degrees => v.to_radians(),
            AngleUnit::Radians => v,
        }
    }
}

/// One motion channel of the root or a bone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    Tx,
    Ty,
    Tz,
    Rx,
    Ry,
    Rz,
}

impl Channel {
    /// Coordinate axis (0, 1, 2) and whether the channel is a rotation.
    pub fn axis(self) -> (usize, bool) {
        match self {
            Channel::Tx => (0, false),
            Channel::Ty => (1, false),
            Channel::Tz => (2, false),
            Channel::Rx => (0, true),
            Channel::Ry => (1, true),
            Channel::Rz => (2, true),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub name: String,
    pub parent: Option<usize>,
    /// Unit bone direction in the rest pose, world coordinates.
    pub direction: Vec3,
    pub length: f64,
    /// Rotation channels in the order they appear in motion data.
    pub dofs: Vec<Channel>,
    /// Local axis frame angles, radians.
    pub axis: Vec3,
    /// Order in which the axis angles are applied (extrinsic).
    pub axis_order: [usize; 3],
}

impl Joint {
    fn axis_frame(&self) -> Mat3 {
        euler_extrinsic(&[
            (self.axis_order[0], self.axis[self.axis_order[0]]),
            (self.axis_order[1], self.axis[self.axis_order[1]]),
            (self.axis_order[2], self.axis[self.axis_order[2]]),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSpec {
    /// Channel order of the six root values in motion data.
    pub order: Vec<Channel>,
    pub axis_order: [usize; 3],
    pub position: Vec3,
    /// Root axis frame angles, radians.
    pub orientation: Vec3,
    pub angle_unit: AngleUnit,
}

impl Default for RootSpec {
    fn default() -> Self {
        Self {
            order: alloc::vec![
                Channel::Tx,
                Channel::Ty,
                Channel::Tz,
                Channel::Rx,
                Channel::Ry,
                Channel::Rz
            ],
            axis_order: [0, 1, 2],
            position: [0.0; 3],
            orientation: [0.0; 3],
            angle_unit: AngleUnit::Degrees,
        }
    }
}

/// Joint hierarchy. Index 0 is the root; parents always precede children.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonDefinition {
    pub joints: Vec<Joint>,
    pub root: RootSpec,
}

impl SkeletonDefinition {
    pub fn validate(&self) -> Result<()> {
        if self.joints.is_empty() {
            return Err(invalid!("skeleton has no joints"));
        }
        let roots = self.joints.iter().filter(|j| j.parent.is_none()).count();
        if roots != 1 || self.joints[0].parent.is_some() {
            return Err(invalid!("skeleton must have exactly one root at index 0"));
        }
        for (i, j) in self.joints.iter().enumerate() {
            if let Some(p) = j.parent {
                if p >= i {
                    return Err(invalid!(
                        "joint `{}` has parent {p} not preceding it",
                        j.name
                    ));
                }
            }
            if (norm3(j.direction) - 1.0).abs() > 1e-9 {
                return Err(invalid!("joint `{}` direction is not unit length", j.name));
            }
            if !(j.length >= 0.0) {
                return Err(invalid!("joint `{}` has negative length", j.name));
            }
        }
        Ok(())
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    /// Builds a skeleton from names, parent indices and one set of joint
    /// positions that define rest-pose bone directions and lengths. Used for
    /// position-only data where no hierarchy file exists.
    pub fn from_positions(
        names: &[String],
        parents: &[Option<usize>],
        rest: &[Vec3],
    ) -> Result<Self> {
        if names.len() != parents.len() || names.len() != rest.len() {
            return Err(invalid!("names, parents and positions differ in length"));
        }
        let joints = names
            .iter()
            .zip(parents)
            .enumerate()
            .map(|(i, (name, &parent))| {
                let (direction, length) = match parent {
                    Some(p) => unit_or_default(sub3(rest[i], rest[p])),
                    None => ([0.0, 1.0, 0.0], 0.0),
                };
                Joint {
                    name: name.clone(),
                    parent,
                    direction,
                    length,
                    dofs: Vec::new(),
                    axis: [0.0; 3],
                    axis_order: [0, 1, 2],
                }
            })
            .collect();
        let skel = Self {
            joints,
            root: RootSpec::default(),
        };
        skel.validate()?;
        Ok(skel)
    }
}

/// Unit direction and length of `v`; zero vectors get +y and length 0.
pub(crate) fn unit_or_default(v: Vec3) -> (Vec3, f64) {
    let n = norm3(v);
    if n > 0.0 {
        (scale3(v, 1.0 / n), n)
    } else {
        ([0.0, 1.0, 0.0], 0.0)
    }
}

/// Per-frame pose in world space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseFrame {
    pub joint_positions: Vec<Vec3>,
    pub root_position: Vec3,
    pub root_orientation: Mat3,
}

impl PoseFrame {
    /// Applies `x ↦ R x + t` to joints and the root transform.
    pub fn transformed(&self, rotation: &Mat3, translation: Vec3) -> PoseFrame {
        let tf = |p: Vec3| add3(mat3_vec(rotation, p), translation);
        PoseFrame {
            joint_positions: self.joint_positions.iter().map(|&p| tf(p)).collect(),
            root_position: tf(self.root_position),
            root_orientation: mat3_mul(rotation, &self.root_orientation),
        }
    }
}

/// A labeled sequence of pose frames sharing one skeleton.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence {
    pub skeleton: Arc<SkeletonDefinition>,
    pub frames: Vec<PoseFrame>,
    pub frame_rate: f64,
    pub label: Option<String>,
    pub source_id: String,
    /// Root orientations are unknown and must be estimated against a
    /// template frame before features are extracted.
    pub needs_alignment: bool,
}

impl MotionSequence {
    pub fn new(
        skeleton: Arc<SkeletonDefinition>,
        frames: Vec<PoseFrame>,
        frame_rate: f64,
        label: Option<String>,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        let seq = Self {
            skeleton,
            frames,
            frame_rate,
            label,
            source_id: source_id.into(),
            needs_alignment: false,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames.is_empty() {
            return Err(invalid!("sequence `{}` has no frames", self.source_id));
        }
        if !(self.frame_rate > 0.0 && self.frame_rate.is_finite()) {
            return Err(invalid!(
                "frame rate must be positive, got {}",
                self.frame_rate
            ));
        }
        let n = self.skeleton.len();
        for (i, f) in self.frames.iter().enumerate() {
            if f.joint_positions.len() != n {
                return Err(invalid!(
                    "frame {} of `{}` has {} joints, skeleton has {n}",
                    i + 1,
                    self.source_id,
                    f.joint_positions.len()
                ));
            }
            if !self.needs_alignment && !is_rotation(&f.root_orientation, 1e-6) {
                return Err(invalid!(
                    "frame {} of `{}` root orientation is not a rotation",
                    i + 1,
                    self.source_id
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Converts angle channels (in the skeleton's angle unit) into a rotation.
fn channel_rotation(dofs: &[Channel], values: &[f64], unit: AngleUnit) -> Mat3 {
    let rots: Vec<(usize, f64)> = dofs
        .iter()
        .zip(values)
        .map(|(c, &v)| (c.axis().0, unit.to_radians(v)))
        .collect();
    euler_extrinsic(&rots)
}

/// Forward kinematics from raw motion channels.
///
/// `channels[j]` holds the angle values of joint `j` in the order of its
/// `dofs` (the entry for the root is ignored); `root_channels` holds the six
/// root values in `skel.root.order`. Angles are in the skeleton's unit.
pub fn forward_kinematics(
    skel: &SkeletonDefinition,
    channels: &[Vec<f64>],
    root_channels: &[f64],
) -> Result<PoseFrame> {
    if root_channels.len() != skel.root.order.len() {
        return Err(invalid!(
            "root expects {} channels, got {}",
            skel.root.order.len(),
            root_channels.len()
        ));
    }
    let mut translation = [0.0; 3];
    let mut rotation_channels = Vec::new();
    let mut rotation_values = Vec::new();
    for (&c, &v) in skel.root.order.iter().zip(root_channels) {
        match c.axis() {
            (axis, false) => translation[axis] = v,
            (_, true) => {
                rotation_channels.push(c);
                rotation_values.push(v);
            }
        }
    }
    let motion = channel_rotation(&rotation_channels, &rotation_values, skel.root.angle_unit);
    let frame = euler_extrinsic(&[
        (
            skel.root.axis_order[0],
            skel.root.orientation[skel.root.axis_order[0]],
        ),
        (
            skel.root.axis_order[1],
            skel.root.orientation[skel.root.axis_order[1]],
        ),
        (
            skel.root.axis_order[2],
            skel.root.orientation[skel.root.axis_order[2]],
        ),
    ]);
    let orientation = mat3_mul(&mat3_mul(&frame, &motion), &transpose3(&frame));
    forward_kinematics_with_root(skel, channels, translation, orientation)
}

/// Forward kinematics with an explicit root transform.
///
/// Each joint's global rotation is its parent's global rotation composed
/// with its own local rotation `C · M · Cᵀ` (axis frame `C`, channel rotation
/// `M`); its position is the parent position plus that rotation applied to
/// the rest bone vector.
pub fn forward_kinematics_with_root(
    skel: &SkeletonDefinition,
    channels: &[Vec<f64>],
    root_position: Vec3,
    root_orientation: Mat3,
) -> Result<PoseFrame> {
    let n = skel.len();
    if channels.len() != n {
        return Err(invalid!(
            "expected channels for {n} joints, got {}",
            channels.len()
        ));
    }
    let mut rotations: Vec<Mat3> = Vec::with_capacity(n);
    let mut positions: Vec<Vec3> = Vec::with_capacity(n);
    for (j, joint) in skel.joints.iter().enumerate() {
        let Some(p) = joint.parent else {
            rotations.push(root_orientation);
            positions.push(root_position);
            continue;
        };
        let values = &channels[j];
        if values.len() != joint.dofs.len() {
            return Err(invalid!(
                "joint `{}` expects {} channels, got {}",
                joint.name,
                joint.dofs.len(),
                values.len()
            ));
        }
        let local = if joint.dofs.is_empty() {
            IDENTITY3
        } else {
            let c = joint.axis_frame();
            let m = channel_rotation(&joint.dofs, values, skel.root.angle_unit);
            mat3_mul(&mat3_mul(&c, &m), &transpose3(&c))
        };
        let global = mat3_mul(&rotations[p], &local);
        let offset = mat3_vec(&global, scale3(joint.direction, joint.length));
        positions.push(add3(positions[p], offset));
        rotations.push(global);
    }
    Ok(PoseFrame {
        joint_positions: positions,
        root_position,
        root_orientation,
    })
}

/// Rest-pose channels (all zeros) for every joint.
pub fn zero_channels(skel: &SkeletonDefinition) -> Vec<Vec<f64>> {
    skel.joints
        .iter()
        .map(|j| alloc::vec![0.0; j.dofs.len()])
        .collect()
}

/// Looks up joints by name, failing on the first unknown one.
pub fn resolve_joints(skel: &SkeletonDefinition, names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            skel.joint_index(n)
                .ok_or_else(|| Error::UnknownJoint(n.to_string()))
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::linalg::axis_rotation;
    use alloc::string::ToString;
    use alloc::vec;

    pub(crate) fn joint(name: &str, parent: usize, dir: Vec3, len: f64) -> Joint {
        Joint {
            name: name.to_string(),
            parent: Some(parent),
            direction: dir,
            length: len,
            dofs: vec![Channel::Rx, Channel::Ry, Channel::Rz],
            axis: [0.0; 3],
            axis_order: [0, 1, 2],
        }
    }

    pub(crate) fn root() -> Joint {
        Joint {
            name: "root".to_string(),
            parent: None,
            direction: [0.0, 1.0, 0.0],
            length: 0.0,
            dofs: vec![],
            axis: [0.0; 3],
            axis_order: [0, 1, 2],
        }
    }

    fn chain() -> SkeletonDefinition {
        SkeletonDefinition {
            joints: vec![
                root(),
                joint("a", 0, [0.0, 1.0, 0.0], 2.0),
                joint("b", 1, [1.0, 0.0, 0.0], 1.5),
                joint("c", 0, [0.0, 0.0, -1.0], 0.5),
            ],
            root: RootSpec::default(),
        }
    }

    #[test]
    fn zero_angles_give_cumulative_bone_sums() {
        let skel = chain();
        let f = forward_kinematics(&skel, &zero_channels(&skel), &[0.0; 6]).unwrap();
        assert_eq!(f.joint_positions[1], [0.0, 2.0, 0.0]);
        assert_eq!(f.joint_positions[2], [1.5, 2.0, 0.0]);
        assert_eq!(f.joint_positions[3], [0.0, 0.0, -0.5]);
    }

    #[test]
    fn root_translation_shifts_every_joint() {
        let skel = chain();
        let mut ch = zero_channels(&skel);
        ch[1] = vec![10.0, -20.0, 5.0];
        let base = forward_kinematics(&skel, &ch, &[0.0; 6]).unwrap();
        let moved = forward_kinematics(&skel, &ch, &[1.0, 2.0, 3.0, 0.0, 0.0, 0.0]).unwrap();
        for (a, b) in base.joint_positions.iter().zip(&moved.joint_positions) {
            let d = sub3(*b, *a);
            assert!((d[0] - 1.0).abs() < 1e-12);
            assert!((d[1] - 2.0).abs() < 1e-12);
            assert!((d[2] - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn root_rotation_about_z_swings_bone_to_minus_x() {
        let skel = SkeletonDefinition {
            joints: vec![root(), joint("a", 0, [0.0, 1.0, 0.0], 2.0)],
            root: RootSpec::default(),
        };
        let f = forward_kinematics(
            &skel,
            &zero_channels(&skel),
            &[0.0, 0.0, 0.0, 0.0, 0.0, 90.0],
        )
        .unwrap();
        let p = f.joint_positions[1];
        assert!((p[0] + 2.0).abs() < 1e-9 && p[1].abs() < 1e-9 && p[2].abs() < 1e-9);
    }

    #[test]
    fn joint_rotation_moves_its_own_bone_end() {
        // Rotating `a` by 90° about z swings a's own end to -x, and its child
        // follows.
        let skel = chain();
        let mut ch = zero_channels(&skel);
        ch[1] = vec![0.0, 0.0, 90.0];
        let f = forward_kinematics(&skel, &ch, &[0.0; 6]).unwrap();
        let a = f.joint_positions[1];
        assert!((a[0] + 2.0).abs() < 1e-12 && a[1].abs() < 1e-12);
        let b = f.joint_positions[2];
        assert!((b[0] + 2.0).abs() < 1e-12 && (b[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn axis_frame_conjugates_local_rotation() {
        // A bone whose axis frame is rotated 90° about z: its local rx acts
        // like a world ry rotation about the rotated x axis.
        let mut skel = chain();
        skel.joints[1].axis = [0.0, 0.0, core::f64::consts::FRAC_PI_2];
        let mut ch = zero_channels(&skel);
        ch[1] = vec![30.0, 0.0, 0.0];
        let f = forward_kinematics(&skel, &ch, &[0.0; 6]).unwrap();
        let c = axis_rotation(2, core::f64::consts::FRAC_PI_2);
        let m = axis_rotation(0, 30f64.to_radians());
        let g = mat3_mul(&mat3_mul(&c, &m), &transpose3(&c));
        let expect = mat3_vec(&g, [0.0, 2.0, 0.0]);
        for (got, want) in f.joint_positions[1].iter().zip(expect) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_count_mismatch_is_rejected() {
        let skel = chain();
        let mut ch = zero_channels(&skel);
        ch[2] = vec![0.0];
        assert!(forward_kinematics(&skel, &ch, &[0.0; 6]).is_err());
        assert!(forward_kinematics(&skel, &zero_channels(&skel), &[0.0; 5]).is_err());
    }

    #[test]
    fn validate_rejects_bad_topology() {
        let mut skel = chain();
        skel.joints[1].parent = Some(2);
        assert!(skel.validate().is_err());
        let mut skel = chain();
        skel.joints[2].parent = None;
        assert!(skel.validate().is_err());
        assert!(chain().validate().is_ok());
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let skel = Arc::new(chain());
        assert!(MotionSequence::new(skel, vec![], 120.0, None, "x").is_err());
    }
}
