//! Class merge maps: one `rawName -> mergedName` rule per line, `#` comments.

use mocap_core::eval::ClassMergeMap;

use crate::error::ParseError;

/// The 65-action grouping of the HDM05 motion classes.
pub const HDM05_65: &str = include_str!("../data/hdm05_65.map");

pub fn parse_merge_map(text: &str) -> Result<ClassMergeMap, ParseError> {
    let mut map = ClassMergeMap::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (from, to) = content
            .split_once("->")
            .ok_or_else(|| ParseError::new(line, "expected `rawName -> mergedName`"))?;
        let (from, to) = (from.trim(), to.trim());
        if from.is_empty()
            || to.is_empty()
            || from.contains(char::is_whitespace)
            || to.contains(char::is_whitespace)
        {
            return Err(ParseError::new(
                line,
                "class names must be single non-empty tokens",
            ));
        }
        if let Some(prev) = map.rules.insert(from.to_string(), to.to_string()) {
            if prev != to {
                return Err(ParseError::new(
                    line,
                    format!("`{from}` already maps to `{prev}`"),
                ));
            }
        }
    }
    Ok(map)
}
