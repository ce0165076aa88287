use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cogload::crossmodal::{Alignment, Standardization};
use cogload::dataset::{SignalFormat, Task};
use cogload::features::FeatureSet;
use cogload::ml::{ModelKind, SplitMode};
use cogload::synth::Preset;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "cogload", version, about = "Cognitive-load estimation from ECG and EEG")]
pub struct Cli {
    /// JSON file of flag values (keys are flag names); explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a coupled synthetic ECG/EEG dataset.
    Synth(SynthArgs),
    /// Extract per-trial feature tables from a dataset.
    Features(FeaturesArgs),
    /// Hold-out training and evaluation on a feature table.
    TrainEval(TrainEvalArgs),
    /// Cross-modal transfer in both directions.
    Transfer(TransferArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub subjects: usize,
    /// Trials per condition and subject.
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value = "moderate")]
    pub preset: Preset,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Add per-subject parameter noise.
    #[arg(long)]
    pub subject_noise: bool,
    #[arg(long, default_value = "bsig")]
    pub format: SignalFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModalitySel {
    Ecg,
    Eeg,
    Both,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct FeaturesArgs {
    /// Dataset directory or its manifest.json.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub modality: ModalitySel,
    /// ECG feature set.
    #[arg(long, default_value = "both")]
    pub feature_set: FeatureSet,
    /// Add pNN40 to the HRV block.
    #[arg(long)]
    pub pnn40: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct TrainEvalArgs {
    /// Feature CSV written by `features`.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "mc")]
    pub task: Task,
    #[arg(long, default_value = "both")]
    pub feature_set: FeatureSet,
    #[arg(long, default_value = "gb")]
    pub model: ModelKind,
    #[arg(long, default_value = "trial_stratified")]
    pub split_mode: SplitMode,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Leave the generation timestamp out of SVG output.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct TransferArgs {
    /// ECG feature CSV (must contain the catch22 columns).
    #[arg(long)]
    pub ecg: PathBuf,
    /// EEG feature CSV.
    #[arg(long)]
    pub eeg: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "mc")]
    pub task: Task,
    #[arg(long, default_value = "channel_mean")]
    pub alignment: Alignment,
    #[arg(long, default_value = "per_domain")]
    pub standardization: Standardization,
    #[arg(long, default_value = "gb")]
    pub model: ModelKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_timestamp: bool,
}

/// Splice the contents of a `--config` JSON file into the argument list,
/// right after the subcommand, so that flags given on the command line
/// (which come later) override them.
pub fn expand_config(args: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            match it.next() {
                Some(p) => config = Some(PathBuf::from(p)),
                None => bail!("--config needs a file"),
            }
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let serde_json::Value::Object(map) = value else {
        bail!("config {} must be a JSON object", path.display());
    };
    let mut injected = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            serde_json::Value::Bool(true) => injected.push(OsString::from(flag)),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::String(s) => {
                injected.push(flag.into());
                injected.push(s.into());
            }
            serde_json::Value::Number(n) => {
                injected.push(flag.into());
                injected.push(n.to_string().into());
            }
            other => bail!("config key {key}: unsupported value {other}"),
        }
    }
    // argv[0] and the subcommand stay in front.
    let cut = rest
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, a)| !a.to_string_lossy().starts_with('-'))
        .map(|(i, _)| i + 1)
        .unwrap_or(rest.len());
    rest.splice(cut..cut, injected);
    Ok(rest)
}
