//! Command-line interface.

use std::ffi::OsString;

use clap::{Parser, Subcommand};
use log::LevelFilter;

use crate::commands::{classify, embed, eval, featurize, parse, synth, train};
use crate::error::{MocapError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "mocap",
    version,
    about = "Gesture recognition from skeletal motion capture"
)]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Log verbosity: off, error, warn, info, debug, trace
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: LevelFilter,
    /// Master random seed; overrides the seed in a config file
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read ASF/AMC files and print a summary or write JSONL motion records
    Parse(parse::ParseArgs),
    /// Generate synthetic labeled motion
    Synth(synth::SynthArgs),
    /// Compute per-frame feature vectors
    Featurize(featurize::FeaturizeArgs),
    /// Train a frame classifier
    Train(train::TrainArgs),
    /// Classify sequences with a trained model
    Classify(classify::ClassifyArgs),
    /// Stratified k-fold cross-validation
    Eval(eval::EvalArgs),
    /// Project sequences to 2-D and plot them
    Embed(embed::EmbedArgs),
}

impl Cli {
    pub fn execute(&self) -> Result<()> {
        let _ = env_logger::Builder::new()
            .filter_level(self.log_level)
            .try_init();
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(MocapError::Config("--threads must be at least 1".into()));
            }
            pool = pool.num_threads(n);
        }
        let pool = pool
            .build()
            .map_err(|e| MocapError::Config(format!("thread pool: {e}")))?;
        pool.install(|| self.dispatch())
    }

    fn dispatch(&self) -> Result<()> {
        let seed = self.seed;
        match &self.command {
            Command::Parse(a) => parse::run(a, seed),
            Command::Synth(a) => synth::run(a, seed),
            Command::Featurize(a) => featurize::run(a, seed),
            Command::Train(a) => train::run(a, seed),
            Command::Classify(a) => classify::run(a, seed),
            Command::Eval(a) => eval::run(a, seed),
            Command::Embed(a) => embed::run(a, seed),
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| MocapError::Config(e.to_string()))?;
    cli.execute()
}
