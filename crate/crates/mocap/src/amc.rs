//! Acclaim motion (`.amc`) parsing.

use std::collections::HashMap;
use std::sync::Arc;

use mocap_core::skeleton::{
    forward_kinematics, zero_channels, AngleUnit, MotionSequence, SkeletonDefinition,
};

use crate::error::ParseError;

pub const DEFAULT_FRAME_RATE: f64 = 120.0;

struct RawFrame {
    line: usize,
    root: Option<Vec<f64>>,
    channels: Vec<Option<Vec<f64>>>,
}

/// Parses an AMC document against its skeleton and runs forward kinematics
/// on every frame.
///
/// Frame numbers must increase by exactly one. A `:RADIANS` or `:DEGREES`
/// header overrides the skeleton's angle unit for the motion values.
pub fn parse_amc(
    text: &str,
    skel: &SkeletonDefinition,
    frame_rate: Option<f64>,
    source_id: &str,
) -> Result<MotionSequence, ParseError> {
    let names: HashMap<&str, usize> = skel
        .joints
        .iter()
        .enumerate()
        .map(|(i, j)| (j.name.as_str(), i))
        .collect();
    let mut unit = skel.root.angle_unit;
    let mut frames: Vec<RawFrame> = Vec::new();
    let mut last_number: Option<i64> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix(':') {
            match header.to_ascii_uppercase().as_str() {
                "DEGREES" => unit = AngleUnit::Degrees,
                "RADIANS" => unit = AngleUnit::Radians,
                _ => {}
            }
            continue;
        }
        let mut toks = content.split_whitespace();
        let head = toks.next().expect("non-empty line");
        if let Ok(number) = head.parse::<i64>() {
            if toks.next().is_some() {
                return Err(ParseError::new(line, "frame number line has extra tokens"));
            }
            if let Some(prev) = last_number {
                if number <= prev {
                    return Err(ParseError::new(
                        line,
                        format!("frame {number} does not follow frame {prev}"),
                    ));
                }
                if number != prev + 1 {
                    return Err(ParseError::new(
                        line,
                        format!("frames {} to {} are missing", prev + 1, number - 1),
                    ));
                }
            }
            last_number = Some(number);
            frames.push(RawFrame {
                line,
                root: None,
                channels: vec![None; skel.len()],
            });
            continue;
        }
        let Some(frame) = frames.last_mut() else {
            return Err(ParseError::new(
                line,
                "joint data before the first frame number",
            ));
        };
        let &j = names.get(head).ok_or_else(|| {
            ParseError::new(line, format!("joint `{head}` is not in the skeleton"))
        })?;
        let values = toks
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| ParseError::new(line, format!("expected a number, found `{t}`")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let expected = if j == 0 {
            skel.root.order.len()
        } else {
            skel.joints[j].dofs.len()
        };
        if values.len() != expected {
            return Err(ParseError::new(
                line,
                format!(
                    "joint `{head}` has {} values, expected {expected}",
                    values.len()
                ),
            ));
        }
        let slot = if j == 0 {
            &mut frame.root
        } else {
            &mut frame.channels[j]
        };
        if slot.replace(values).is_some() {
            return Err(ParseError::new(
                line,
                format!("joint `{head}` repeated within a frame"),
            ));
        }
    }
    if frames.is_empty() {
        return Err(ParseError::new(text.lines().count().max(1), "no frames"));
    }
    let mut skel = skel.clone();
    skel.root.angle_unit = unit;
    let template = zero_channels(&skel);
    let mut poses = Vec::with_capacity(frames.len());
    for f in frames {
        let root = f
            .root
            .ok_or_else(|| ParseError::new(f.line, "frame has no root values"))?;
        let mut channels = template.clone();
        for (j, joint) in skel.joints.iter().enumerate().skip(1) {
            match &f.channels[j] {
                Some(v) => channels[j] = v.clone(),
                None if joint.dofs.is_empty() => {}
                None => {
                    return Err(ParseError::new(
                        f.line,
                        format!("frame has no values for joint `{}`", joint.name),
                    ))
                }
            }
        }
        poses.push(
            forward_kinematics(&skel, &channels, &root)
                .map_err(|e| ParseError::new(f.line, e.to_string()))?,
        );
    }
    MotionSequence::new(
        Arc::new(skel),
        poses,
        frame_rate.unwrap_or(DEFAULT_FRAME_RATE),
        None,
        source_id,
    )
    .map_err(|e| ParseError::new(1, e.to_string()))
}
