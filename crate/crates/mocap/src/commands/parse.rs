use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use mocap_core::skeleton::MotionSequence;
use serde::{Deserialize, Serialize};

use super::{create_writer, override_settings, read_text, require, to_value};
use crate::amc::parse_amc;
use crate::asf::parse_asf;
use crate::config::load_settings;
use crate::error::{MocapError, Result};
use crate::jsonl::write_jsonl;

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// TOML settings, or an artifact whose embedded config is reused
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Skeleton file
    #[arg(long)]
    pub asf: Option<PathBuf>,
    /// Motion files (repeatable)
    #[arg(long, num_args = 1..)]
    pub amc: Option<Vec<PathBuf>>,
    /// Frame rate; defaults to 120
    #[arg(long)]
    pub fps: Option<f64>,
    /// Label for every sequence; defaults to the HDM05 class in the file name
    #[arg(long)]
    pub label: Option<String>,
    /// Write the sequences as JSONL motion records; prints a summary otherwise
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParseSettings {
    pub asf: PathBuf,
    pub amc: Vec<PathBuf>,
    pub fps: Option<f64>,
    pub label: Option<String>,
}

/// Class name of an HDM05 cut file such as `HDM_bd_walk2StepsLstart_001_120.amc`.
pub fn hdm05_label(path: &Path) -> Option<String> {
    let stem = path.file_stem()?.to_str()?;
    let parts: Vec<&str> = stem.split('_').collect();
    (parts.len() >= 4 && parts[0] == "HDM").then(|| parts[2].to_string())
}

pub(crate) fn source_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Parses an ASF file and its AMC motions.
pub fn load_asf_amc(
    asf: &Path,
    amc: &[PathBuf],
    fps: Option<f64>,
    label: Option<&str>,
) -> Result<Vec<MotionSequence>> {
    let skel = parse_asf(&read_text(asf)?).map_err(|e| MocapError::from(e).in_file(asf))?;
    amc.iter()
        .map(|path| {
            let mut seq = parse_amc(&read_text(path)?, &skel, fps, &source_id(path))
                .map_err(|e| MocapError::from(e).in_file(path))?;
            seq.label = label.map(str::to_string).or_else(|| hdm05_label(path));
            Ok(seq)
        })
        .collect()
}

#[derive(Serialize)]
struct MotionHeader<'a> {
    format: &'a str,
    config: serde_json::Value,
}

pub fn run(args: &ParseArgs, _seed: Option<u64>) -> Result<()> {
    let mut s: ParseSettings = load_settings(args.config.as_deref())?;
    override_settings!(s, args, asf, amc, label);
    if args.fps.is_some() {
        s.fps = args.fps;
    }
    require(&s.asf, "--asf")?;
    if s.amc.is_empty() {
        return Err(MocapError::Config("missing --amc".into()));
    }
    let seqs = load_asf_amc(&s.asf, &s.amc, s.fps, s.label.as_deref())?;
    match &args.out {
        Some(out) => {
            let header = MotionHeader {
                format: "mocap-motion",
                config: to_value(&s)?,
            };
            let mut w = create_writer(out)?;
            write_jsonl(&mut w, Some(&header), &seqs)?;
            w.flush().map_err(|e| MocapError::io(out, e))?;
            log::info!("wrote {} sequences to {}", seqs.len(), out.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for q in &seqs {
                writeln!(
                    lock,
                    "{}\tframes={}\tfps={}\tjoints={}\tlabel={}",
                    q.source_id,
                    q.len(),
                    q.frame_rate,
                    q.skeleton.len(),
                    q.label.as_deref().unwrap_or("-")
                )
                .map_err(|e| MocapError::io("<stdout>", e))?;
            }
        }
    }
    Ok(())
}
