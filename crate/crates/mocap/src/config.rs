//! Loading run settings from TOML files or from the config embedded in a
//! previously written artifact.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{MocapError, Result};
use crate::jsonl::is_header_line;

fn unescape_xml(s: &str) -> String {
    s.replace("&quot;", "\"")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&amp;", "&")
}

/// Settings as a JSON value, from any of:
/// - a TOML file;
/// - a JSON artifact with a top-level `config` field;
/// - a JSONL file whose header line has a `config` field;
/// - a CSV written by this tool (`# config: ...` first line);
/// - an SVG written by this tool (`<metadata>` element).
pub fn load_config_value(path: &Path) -> Result<serde_json::Value> {
    let text = fs::read_to_string(path).map_err(|e| MocapError::io(path, e))?;
    let bad = |what: &str| MocapError::Config(format!("{}: {what}", path.display()));
    let trimmed = text.trim_start();
    let embedded = |v: serde_json::Value| -> Result<serde_json::Value> {
        v.get("config")
            .cloned()
            .ok_or_else(|| bad("no embedded `config` field"))
    };
    if trimmed.starts_with('{') {
        if let Ok(v) = serde_json::from_str::<serde_json::Value>(trimmed) {
            return embedded(v);
        }
        let first = trimmed.lines().next().unwrap_or("");
        if is_header_line(first) {
            let v: serde_json::Value = serde_json::from_str(first)?;
            return embedded(v["header"].clone());
        }
        return Err(bad("JSON file without an embedded config"));
    }
    if let Some(rest) = trimmed.strip_prefix("# config: ") {
        let line = rest.lines().next().unwrap_or("");
        return Ok(serde_json::from_str(line)?);
    }
    if trimmed.starts_with("<svg") || trimmed.starts_with("<?xml") {
        let start = text
            .find("<metadata>")
            .ok_or_else(|| bad("SVG without metadata"))?
            + "<metadata>".len();
        let end = text
            .find("</metadata>")
            .ok_or_else(|| bad("SVG without metadata"))?;
        return Ok(serde_json::from_str(&unescape_xml(&text[start..end]))?);
    }
    let value: toml::Value = toml::from_str(&text).map_err(|e| bad(&e.to_string()))?;
    serde_json::to_value(value).map_err(Into::into)
}

/// Settings from `path`, or defaults when no path is given.
pub fn load_settings<S: DeserializeOwned + Default>(path: Option<&Path>) -> Result<S> {
    match path {
        None => Ok(S::default()),
        Some(p) => {
            let v = load_config_value(p)?;
            serde_json::from_value(v)
                .map_err(|e| MocapError::Config(format!("{}: {e}", p.display())))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Default, Deserialize, PartialEq)]
    #[serde(default, deny_unknown_fields)]
    struct S {
        k: usize,
        name: String,
    }

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn all_sources_agree() {
        let dir = tempfile::tempdir().unwrap();
        let want = S {
            k: 3,
            name: "a&b".into(),
        };
        let sources = [
            write(&dir, "c.toml", "k = 3\nname = \"a&b\"\n"),
            write(&dir, "m.json", "{\"format\":\"x\",\"config\":{\"k\":3,\"name\":\"a&b\"}}"),
            write(&dir, "f.jsonl", "{\"header\":{\"config\":{\"k\":3,\"name\":\"a&b\"}}}\n{\"x\":1}\n"),
            write(&dir, "p.csv", "# config: {\"k\":3,\"name\":\"a&b\"}\na,b\n"),
            write(&dir, "p.svg", "<svg>\n<metadata>{&quot;k&quot;:3,&quot;name&quot;:&quot;a&amp;b&quot;}</metadata></svg>"),
        ];
        for p in &sources {
            assert_eq!(
                load_settings::<S>(Some(p)).unwrap(),
                want,
                "{}",
                p.display()
            );
        }
        assert_eq!(load_settings::<S>(None).unwrap(), S::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "c.toml", "kk = 3\n");
        assert!(load_settings::<S>(Some(&p)).is_err());
    }
}
