pub mod classify;
pub mod embed;
pub mod eval;
pub mod featurize;
pub mod parse;
pub mod synth;
pub mod train;

use std::fs;
use std::path::{Path, PathBuf};

use mocap_core::eval::ClassMergeMap;
use serde::Serialize;

use crate::error::{MocapError, Result};
use crate::mergemap::{parse_merge_map, HDM05_65};

/// Value of `--merge-map` that selects the built-in HDM05 grouping.
pub const BUILTIN_HDM05: &str = "builtin:hdm05_65";

pub(crate) fn require(path: &Path, flag: &str) -> Result<()> {
    if path.as_os_str().is_empty() {
        Err(MocapError::Config(format!("missing {flag}")))
    } else {
        Ok(())
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| MocapError::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| MocapError::io(path, e))
}

pub(crate) fn open_reader(path: &Path) -> Result<std::io::BufReader<fs::File>> {
    fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(|e| MocapError::io(path, e))
}

pub(crate) fn create_writer(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| MocapError::io(path, e))
}

pub(crate) fn to_value<S: Serialize>(settings: &S) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(settings)?)
}

pub(crate) fn load_merge_map(spec: Option<&str>) -> Result<Option<ClassMergeMap>> {
    match spec {
        None => Ok(None),
        Some(BUILTIN_HDM05) => Ok(Some(parse_merge_map(HDM05_65)?)),
        Some(path) => {
            let path = PathBuf::from(path);
            let text = read_text(&path)?;
            parse_merge_map(&text)
                .map(Some)
                .map_err(|e| MocapError::from(e).in_file(path))
        }
    }
}

/// `out` with its extension replaced, for companion files.
pub(crate) fn sibling(out: &Path, extension: &str) -> PathBuf {
    out.with_extension(extension)
}

/// Applies each `Some` flag value over the loaded settings.
macro_rules! override_settings {
    ($settings:expr, $args:expr, $($field:ident),+ $(,)?) => {
        $(
            if let Some(v) = $args.$field.clone() {
                $settings.$field = v.into();
            }
        )+
    };
}
pub(crate) use override_settings;
