//! Acclaim skeleton (`.asf`) parsing.

use std::collections::HashMap;

use mocap_core::skeleton::{AngleUnit, Channel, Joint, RootSpec, SkeletonDefinition};

use crate::error::ParseError;

type PResult<T> = std::result::Result<T, ParseError>;

fn parse_f64(tok: &str, line: usize) -> PResult<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ParseError::new(line, format!("expected a number, found `{tok}`")))
}

fn parse_vec3(toks: &[&str], line: usize) -> PResult<[f64; 3]> {
    if toks.len() < 3 {
        return Err(ParseError::new(line, "expected three numbers"));
    }
    Ok([
        parse_f64(toks[0], line)?,
        parse_f64(toks[1], line)?,
        parse_f64(toks[2], line)?,
    ])
}

pub(crate) fn parse_channel(tok: &str, line: usize) -> PResult<Channel> {
    match tok.to_ascii_lowercase().as_str() {
        "tx" => Ok(Channel::Tx),
        "ty" => Ok(Channel::Ty),
        "tz" => Ok(Channel::Tz),
        "rx" => Ok(Channel::Rx),
        "ry" => Ok(Channel::Ry),
        "rz" => Ok(Channel::Rz),
        _ => Err(ParseError::new(line, format!("unknown channel `{tok}`"))),
    }
}

fn parse_axis_order(tok: &str, line: usize) -> PResult<[usize; 3]> {
    let mut order = [0; 3];
    let chars: Vec<char> = tok.to_ascii_uppercase().chars().collect();
    if chars.len() != 3 {
        return Err(ParseError::new(line, format!("bad axis order `{tok}`")));
    }
    for (slot, c) in order.iter_mut().zip(&chars) {
        *slot = match c {
            'X' => 0,
            'Y' => 1,
            'Z' => 2,
            _ => return Err(ParseError::new(line, format!("bad axis order `{tok}`"))),
        };
    }
    let mut sorted = order;
    sorted.sort_unstable();
    if sorted != [0, 1, 2] {
        return Err(ParseError::new(line, format!("bad axis order `{tok}`")));
    }
    Ok(order)
}

#[derive(Default)]
struct Bone {
    line: usize,
    name: Option<String>,
    direction: Option<[f64; 3]>,
    length: Option<f64>,
    axis: [f64; 3],
    axis_order: [usize; 3],
    dofs: Vec<Channel>,
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    Preamble,
    Units,
    Root,
    Bonedata,
    Hierarchy,
    Other,
}

/// Parses an ASF document.
///
/// Joint 0 is the root. Bones keep document order unless a bone is listed
/// before its parent, in which case a stable topological order is used.
/// Angles in the `axis` and `orientation` fields follow the `units` section
/// (degrees when absent).
pub fn parse_asf(text: &str) -> PResult<SkeletonDefinition> {
    let mut section = Section::Preamble;
    let mut unit = AngleUnit::Degrees;
    let mut root = RootSpec::default();
    let mut root_raw_orientation = [0.0; 3];
    let mut bones: Vec<Bone> = Vec::new();
    let mut current: Option<Bone> = None;
    let mut in_limits = false;
    let mut links: Vec<(usize, String, String)> = Vec::new();
    let mut saw_root = false;
    let mut saw_hierarchy = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(keyword) = content.strip_prefix(':') {
            if current.is_some() {
                return Err(ParseError::new(
                    line,
                    "section starts inside an unterminated bone",
                ));
            }
            let name = keyword.split_whitespace().next().unwrap_or("");
            section = match name {
                "units" => Section::Units,
                "root" => {
                    saw_root = true;
                    Section::Root
                }
                "bonedata" => Section::Bonedata,
                "hierarchy" => {
                    saw_hierarchy = true;
                    Section::Hierarchy
                }
                _ => Section::Other,
            };
            in_limits = false;
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match section {
            Section::Preamble | Section::Other => {}
            Section::Units => {
                if toks[0] == "angle" {
                    unit = match toks.get(1).map(|s| s.to_ascii_lowercase()) {
                        Some(u) if u.starts_with("deg") => AngleUnit::Degrees,
                        Some(u) if u.starts_with("rad") => AngleUnit::Radians,
                        _ => return Err(ParseError::new(line, "angle unit must be deg or rad")),
                    };
                }
            }
            Section::Root => match toks[0] {
                "order" => {
                    root.order = toks[1..]
                        .iter()
                        .map(|t| parse_channel(t, line))
                        .collect::<PResult<_>>()?;
                }
                "axis" => {
                    root.axis_order = parse_axis_order(toks.get(1).copied().unwrap_or(""), line)?;
                }
                "position" => root.position = parse_vec3(&toks[1..], line)?,
                "orientation" => root_raw_orientation = parse_vec3(&toks[1..], line)?,
                _ => {
                    return Err(ParseError::new(
                        line,
                        format!("unknown root field `{}`", toks[0]),
                    ))
                }
            },
            Section::Bonedata => {
                if toks[0] == "begin" {
                    if current.is_some() {
                        return Err(ParseError::new(line, "nested `begin`"));
                    }
                    current = Some(Bone {
                        line,
                        axis_order: [0, 1, 2],
                        ..Default::default()
                    });
                    in_limits = false;
                    continue;
                }
                let Some(bone) = current.as_mut() else {
                    return Err(ParseError::new(line, "bone field outside begin/end"));
                };
                if toks[0] == "end" {
                    bones.push(current.take().expect("checked above"));
                    continue;
                }
                if in_limits && toks[0].starts_with('(') {
                    continue;
                }
                in_limits = false;
                match toks[0] {
                    "id" | "bodymass" | "cofmass" => {}
                    "name" => {
                        let name = toks
                            .get(1)
                            .ok_or_else(|| ParseError::new(line, "bone without a name"))?;
                        bone.name = Some((*name).to_string());
                    }
                    "direction" => bone.direction = Some(parse_vec3(&toks[1..], line)?),
                    "length" => {
                        let len = parse_f64(toks.get(1).copied().unwrap_or(""), line)?;
                        if len < 0.0 {
                            return Err(ParseError::new(line, "negative bone length"));
                        }
                        bone.length = Some(len);
                    }
                    "axis" => {
                        bone.axis = parse_vec3(&toks[1..], line)?;
                        bone.axis_order =
                            parse_axis_order(toks.get(4).copied().unwrap_or("XYZ"), line)?;
                    }
                    "dof" => {
                        bone.dofs = toks[1..]
                            .iter()
                            .map(|t| parse_channel(t, line))
                            .collect::<PResult<_>>()?;
                        if bone.dofs.iter().any(|c| !c.axis().1) {
                            return Err(ParseError::new(
                                line,
                                "translation channels on bones are not supported",
                            ));
                        }
                    }
                    "limits" => in_limits = true,
                    other => {
                        return Err(ParseError::new(
                            line,
                            format!("unknown bone field `{other}`"),
                        ))
                    }
                }
            }
            Section::Hierarchy => {
                if toks[0] == "begin" || toks[0] == "end" {
                    continue;
                }
                for child in &toks[1..] {
                    links.push((line, toks[0].to_string(), (*child).to_string()));
                }
            }
        }
    }
    if current.is_some() {
        return Err(ParseError::new(text.lines().count(), "bone missing `end`"));
    }
    if !saw_root {
        return Err(ParseError::new(1, "missing :root section"));
    }
    if !saw_hierarchy {
        return Err(ParseError::new(
            text.lines().count().max(1),
            "missing :hierarchy section",
        ));
    }
    root.angle_unit = unit;
    root.orientation = root_raw_orientation.map(|v| unit.to_radians(v));
    let rot_count = root.order.iter().filter(|c| c.axis().1).count();
    if root.order.len() != 6 || rot_count != 3 {
        return Err(ParseError::new(
            1,
            "root order must list three translations and three rotations",
        ));
    }
    build(bones, links, root, unit)
}

fn build(
    bones: Vec<Bone>,
    links: Vec<(usize, String, String)>,
    root: RootSpec,
    unit: AngleUnit,
) -> PResult<SkeletonDefinition> {
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, b) in bones.iter().enumerate() {
        let name = b
            .name
            .clone()
            .ok_or_else(|| ParseError::new(b.line, "bone without a name"))?;
        if name == "root" || index.insert(name.clone(), i).is_some() {
            return Err(ParseError::new(b.line, format!("duplicate bone `{name}`")));
        }
    }
    // Parent of each bone as a bone index, or None for the root.
    let mut parent: Vec<Option<Option<usize>>> = vec![None; bones.len()];
    for (line, p, c) in &links {
        let pi = if p == "root" {
            None
        } else {
            Some(
                *index
                    .get(p)
                    .ok_or_else(|| ParseError::new(*line, format!("unknown parent `{p}`")))?,
            )
        };
        let ci = *index
            .get(c)
            .ok_or_else(|| ParseError::new(*line, format!("unknown bone `{c}` in hierarchy")))?;
        if parent[ci].is_some() {
            return Err(ParseError::new(
                *line,
                format!("bone `{c}` has two parents"),
            ));
        }
        parent[ci] = Some(pi);
    }
    // Stable topological order: repeatedly take the earliest bone whose
    // parent is already placed.
    let mut placed: Vec<Option<usize>> = vec![None; bones.len()];
    let mut order: Vec<usize> = Vec::with_capacity(bones.len());
    while order.len() < bones.len() {
        let next = (0..bones.len()).find(|&i| {
            placed[i].is_none()
                && match parent[i] {
                    Some(None) => true,
                    Some(Some(p)) => placed[p].is_some(),
                    None => false,
                }
        });
        match next {
            Some(i) => {
                placed[i] = Some(order.len() + 1);
                order.push(i);
            }
            None => {
                let stuck = (0..bones.len())
                    .find(|&i| placed[i].is_none())
                    .expect("unplaced bone");
                let b = &bones[stuck];
                let reason = if parent[stuck].is_none() {
                    format!(
                        "bone `{}` is not attached in the hierarchy",
                        b.name.as_deref().unwrap_or("")
                    )
                } else {
                    format!(
                        "cyclic hierarchy involving `{}`",
                        b.name.as_deref().unwrap_or("")
                    )
                };
                return Err(ParseError::new(b.line, reason));
            }
        }
    }
    let mut joints = vec![Joint {
        name: "root".into(),
        parent: None,
        direction: [0.0, 1.0, 0.0],
        length: 0.0,
        dofs: Vec::new(),
        axis: [0.0; 3],
        axis_order: root.axis_order,
    }];
    let mut bones: Vec<Option<Bone>> = bones.into_iter().map(Some).collect();
    for &i in &order {
        let b = bones[i].take().expect("each bone placed once");
        let name = b.name.expect("checked above");
        let raw = b
            .direction
            .ok_or_else(|| ParseError::new(b.line, format!("bone `{name}` has no direction")))?;
        let length = b
            .length
            .ok_or_else(|| ParseError::new(b.line, format!("bone `{name}` has no length")))?;
        let norm = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt();
        let direction = if norm > 0.0 {
            raw.map(|v| v / norm)
        } else if length == 0.0 {
            [0.0, 1.0, 0.0]
        } else {
            return Err(ParseError::new(
                b.line,
                format!("bone `{name}` has a zero direction"),
            ));
        };
        joints.push(Joint {
            name,
            parent: Some(
                parent[i]
                    .expect("placed")
                    .map_or(0, |p| placed[p].expect("placed before child")),
            ),
            direction,
            length,
            dofs: b.dofs,
            axis: b.axis.map(|v| unit.to_radians(v)),
            axis_order: b.axis_order,
        });
    }
    let skel = SkeletonDefinition { joints, root };
    skel.validate()
        .map_err(|e| ParseError::new(1, e.to_string()))?;
    Ok(skel)
}
