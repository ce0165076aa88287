//! Cross-modal transfer: train on one modality's catch22 space and test on
//! the other's.
//!
//! ECG trials carry one 22-dim catch22 vector; EEG trials carry one per
//! channel (110 columns, `"Fz.f1"` … `"P4.f22"`). Two alignments reconcile
//! the spaces, and both are interpretations:
//!
//! * `channel_mean`: average the five channel blocks into one 22-dim row.
//! * `per_channel_instances`: each channel block becomes its own row.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::catch22::{compute_catch22, CATCH22_NAMES, N_FEATURES};
use crate::dataset::{Task, TrialTensor, EEG_CHANNELS};
use crate::features::{FeatureFrame, FrameRow};
use crate::ml::{evaluate, train, EvalReport, FeatureTable, MedianImputer, ModelParams, RobustScaler};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    EcgToEeg,
    EegToEcg,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::EcgToEeg => "ECG->EEG",
            Direction::EegToEcg => "EEG->ECG",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    #[default]
    ChannelMean,
    PerChannelInstances,
}

impl FromStr for Alignment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "channel_mean" => Ok(Alignment::ChannelMean),
            "per_channel_instances" => Ok(Alignment::PerChannelInstances),
            other => Err(Error::InvalidArgument(format!("unknown alignment {other}"))),
        }
    }
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alignment::ChannelMean => "channel_mean",
            Alignment::PerChannelInstances => "per_channel_instances",
        })
    }
}

/// Robust (median/IQR) standardization applied before training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Standardization {
    /// Source and target are each scaled by their own statistics. No labels
    /// are used, so nothing about target classes reaches the model.
    #[default]
    PerDomain,
    /// Both sides use the source's statistics. Trees are invariant to this,
    /// so it behaves like no standardization.
    SourceFitted,
    None,
}

impl FromStr for Standardization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_domain" => Ok(Standardization::PerDomain),
            "source_fitted" => Ok(Standardization::SourceFitted),
            "none" => Ok(Standardization::None),
            other => Err(Error::InvalidArgument(format!("unknown standardization {other}"))),
        }
    }
}

impl fmt::Display for Standardization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Standardization::PerDomain => "per_domain",
            Standardization::SourceFitted => "source_fitted",
            Standardization::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferSpec {
    pub direction: Direction,
    pub alignment: Alignment,
    pub standardization: Standardization,
    pub task: Task,
    pub model: ModelParams,
}

/// EEG column name of catch22 feature `k` (0-based) on `channel`.
pub fn eeg_column(channel: &str, k: usize) -> String {
    format!("{channel}.f{}", k + 1)
}

pub fn eeg_feature_names() -> Vec<String> {
    EEG_CHANNELS
        .iter()
        .flat_map(|c| (0..N_FEATURES).map(move |k| eeg_column(c, k)))
        .collect()
}

/// EEG flag columns: per trial, the number of catch22 values that came out
/// undefined across all channels.
pub const EEG_FLAGS: [&str; 1] = ["n_undefined"];

/// catch22 on each of the five required channels, concatenated in
/// `EEG_CHANNELS` order. Trials with non-finite or flat channel data are
/// excluded and logged.
pub fn build_eeg_features(tensor: &TrialTensor) -> Result<FeatureFrame> {
    let chan: Vec<usize> = EEG_CHANNELS
        .iter()
        .map(|c| {
            tensor
                .channel_names()
                .iter()
                .position(|n| n == c)
                .ok_or_else(|| Error::Channel(c.to_string()))
        })
        .collect::<Result<_>>()?;
    let trials: Vec<_> = tensor.iter().collect();
    if trials.is_empty() {
        return Err(Error::InsufficientData("no trials".into()));
    }
    let rows: Vec<Option<FrameRow>> = trials
        .par_iter()
        .map(|(subject, label, trial)| {
            let mut values = Vec::with_capacity(EEG_CHANNELS.len() * N_FEATURES);
            for (&c, name) in chan.iter().zip(EEG_CHANNELS) {
                let x = trial.channel_f64(c);
                let flat = x.iter().all(|&v| v == x[0]);
                if flat || x.iter().any(|v| !v.is_finite()) {
                    log::warn!(
                        "excluding EEG trial {subject}/{}/{}: channel {name} is {}",
                        label.name(),
                        trial.trial_index,
                        if flat { "flat" } else { "non-finite" }
                    );
                    return None;
                }
                values.extend(compute_catch22(&x).values);
            }
            let undefined = values.iter().filter(|v| v.is_nan()).count();
            Some(FrameRow {
                subject: subject.to_string(),
                label: *label,
                trial: trial.trial_index,
                values,
                flags: vec![undefined as f64],
            })
        })
        .collect();
    let mut frame = FeatureFrame::new(eeg_feature_names(), EEG_FLAGS.iter().map(|s| s.to_string()).collect());
    frame.rows = rows.into_iter().flatten().collect();
    Ok(frame)
}

pub fn build_eeg_feature_table(tensor: &TrialTensor, task: Task) -> Result<FeatureTable> {
    build_eeg_features(tensor)?.to_table(task, None)
}

fn catch22_names() -> Vec<String> {
    CATCH22_NAMES.iter().map(|s| s.to_string()).collect()
}

/// Reduce the ECG table to its 22 catch22 columns and the 110-column EEG
/// table to the same 22 names under `alignment`.
pub fn align_feature_spaces(
    ecg: &FeatureTable,
    eeg: &FeatureTable,
    alignment: Alignment,
) -> Result<(FeatureTable, FeatureTable)> {
    if ecg.n_rows() == 0 || eeg.n_rows() == 0 {
        return Err(Error::InvalidArgument("empty feature table".into()));
    }
    let names = catch22_names();
    let ecg = ecg.select_columns(&names)?;
    let eeg = eeg.align_to(&eeg_feature_names())?;
    let nc = EEG_CHANNELS.len();
    let eeg = match alignment {
        Alignment::ChannelMean => eeg.map_columns(names, |row| {
            (0..N_FEATURES)
                .map(|k| {
                    let v: Vec<f64> = (0..nc).map(|c| row[c * N_FEATURES + k]).filter(|v| !v.is_nan()).collect();
                    if v.is_empty() {
                        f64::NAN
                    } else {
                        v.iter().sum::<f64>() / v.len() as f64
                    }
                })
                .collect()
        })?,
        Alignment::PerChannelInstances => {
            let n = eeg.n_rows();
            let mut rows = Vec::with_capacity(n * nc);
            let (mut labels, mut groups, mut ids) = (Vec::new(), Vec::new(), Vec::new());
            for i in 0..n {
                for (c, ch) in EEG_CHANNELS.iter().enumerate() {
                    rows.push(eeg.row(i)[c * N_FEATURES..(c + 1) * N_FEATURES].to_vec());
                    labels.push(eeg.labels()[i]);
                    groups.push(eeg.groups()[i].clone());
                    ids.push(format!("{}#{ch}", eeg.ids()[i]));
                }
            }
            FeatureTable::with_ids(names, rows, labels, eeg.class_names().to_vec(), groups, ids)?
        }
    };
    Ok((ecg, eeg))
}

/// Train on the source modality, evaluate on the target modality.
///
/// Standardization and imputation statistics never see target labels; the
/// fitted model depends on source rows only.
pub fn run_transfer(spec: &TransferSpec, ecg: &FeatureTable, eeg: &FeatureTable) -> Result<EvalReport> {
    if ecg.class_names() != eeg.class_names() {
        return Err(Error::Task(format!(
            "label sets differ: ECG {:?}, EEG {:?}",
            ecg.class_names(),
            eeg.class_names()
        )));
    }
    let expected = spec.task.class_names();
    if ecg.class_names() != expected.as_slice() {
        return Err(Error::Task(format!(
            "tables carry classes {:?}, task {} expects {expected:?}",
            ecg.class_names(),
            spec.task
        )));
    }
    let (ecg_a, eeg_a) = align_feature_spaces(ecg, eeg, spec.alignment)?;
    let (source, target) = match spec.direction {
        Direction::EcgToEeg => (ecg_a, eeg_a),
        Direction::EegToEcg => (eeg_a, ecg_a),
    };
    let (source, target) = match spec.standardization {
        Standardization::PerDomain => (
            RobustScaler::fit(&source).transform(&source)?,
            RobustScaler::fit(&target).transform(&target)?,
        ),
        Standardization::SourceFitted => {
            let s = RobustScaler::fit(&source);
            (s.transform(&source)?, s.transform(&target)?)
        }
        Standardization::None => (source, target),
    };
    let imputer = MedianImputer::fit(&source);
    let source = imputer.transform(&source)?;
    let target = imputer.transform(&target)?;

    let model = train(&source, &spec.model)?;
    let mut report = evaluate(&model, &target)?;
    report.protocol = transfer_protocol(spec, source.n_rows(), target.n_rows());
    Ok(report)
}

fn transfer_protocol(spec: &TransferSpec, n_source: usize, n_target: usize) -> BTreeMap<String, serde_json::Value> {
    BTreeMap::from([
        ("evaluation".into(), json!("cross_modal_transfer")),
        ("direction".into(), json!(spec.direction)),
        ("alignment".into(), json!(spec.alignment)),
        ("standardization".into(), json!(spec.standardization)),
        ("task".into(), json!(spec.task)),
        ("model".into(), serde_json::to_value(&spec.model).unwrap_or_default()),
        ("n_source_rows".into(), json!(n_source)),
        ("n_target_rows".into(), json!(n_target)),
    ])
}

/// Both directions from one invocation, ECG→EEG first.
pub fn run_transfer_pair(
    alignment: Alignment,
    standardization: Standardization,
    task: Task,
    model: &ModelParams,
    ecg: &FeatureTable,
    eeg: &FeatureTable,
) -> Result<[EvalReport; 2]> {
    let spec = |direction| TransferSpec {
        direction,
        alignment,
        standardization,
        task,
        model: model.clone(),
    };
    let (a, b) = rayon::join(
        || run_transfer(&spec(Direction::EcgToEeg), ecg, eeg),
        || run_transfer(&spec(Direction::EegToEcg), ecg, eeg),
    );
    Ok([a?, b?])
}
