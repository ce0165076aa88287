use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::io::{read_bsig, read_signal, write_bsig};
use super::manifest::Manifest;
use super::{ConditionLabel, Modality};
use crate::signal::{baseline_correct, design_filter, filter_series, resample_series, BaselineWindow, FilterSpec, SignalRecord};
use crate::{Error, Result};

/// Channels kept for EEG, in storage order.
pub const EEG_CHANNELS: [&str; 5] = ["Fz", "Pz", "Cz", "P3", "P4"];
pub const EEG_TARGET_FS: f64 = 128.0;

const INDEX_FILE: &str = "index.json";
const TENSOR_VERSION: u32 = 1;

/// Optional per-epoch stage run on the resampled EEG before baseline
/// correction (e.g. an artifact-removal step). Must preserve the shape.
pub type EpochStage = fn(&SignalRecord) -> Result<SignalRecord>;

#[derive(Debug, Clone)]
pub struct EpochConfig {
    pub epoch_seconds: f64,
    /// EEG band-pass edges in Hz.
    pub eeg_band: (f64, f64),
    pub eeg_filter_order: usize,
    /// Mains notch; `None` disables it.
    pub notch_hz: Option<f64>,
    pub eeg_target_fs: f64,
    /// `None` subtracts the mean over the whole epoch.
    pub baseline: Option<BaselineWindow>,
    pub eeg_stage: Option<EpochStage>,
}

impl Default for EpochConfig {
    fn default() -> Self {
        Self {
            epoch_seconds: 3.0,
            eeg_band: (1.0, 45.0),
            eeg_filter_order: 2,
            notch_hz: Some(50.0),
            eeg_target_fs: EEG_TARGET_FS,
            baseline: None,
            eeg_stage: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub trial_index: u32,
    /// Channel-major samples, each exactly `epoch_len` long.
    pub data: Vec<Vec<f32>>,
}

impl Trial {
    pub fn channel_f64(&self, c: usize) -> Vec<f64> {
        self.data[c].iter().map(|&v| f64::from(v)).collect()
    }
}

/// Ragged store indexed by subject, condition label and trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTensor {
    modality: Modality,
    fs: f64,
    channel_names: Vec<String>,
    epoch_len: usize,
    cells: BTreeMap<(String, ConditionLabel), Vec<Trial>>,
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    version: u32,
    modality: Modality,
    fs: f64,
    channel_names: Vec<String>,
    epoch_len: usize,
    cells: Vec<IndexCell>,
}

#[derive(Serialize, Deserialize)]
struct IndexCell {
    subject: String,
    label: ConditionLabel,
    file: String,
    trial_indices: Vec<u32>,
}

impl TrialTensor {
    pub fn new(modality: Modality, fs: f64, channel_names: Vec<String>, epoch_len: usize) -> Self {
        Self {
            modality,
            fs,
            channel_names,
            epoch_len,
            cells: BTreeMap::new(),
        }
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn epoch_len(&self) -> usize {
        self.epoch_len
    }

    /// Add a trial, keeping each cell sorted by trial index.
    pub fn insert(&mut self, subject: &str, label: ConditionLabel, trial: Trial) -> Result<()> {
        if trial.data.len() != self.channel_names.len()
            || trial.data.iter().any(|c| c.len() != self.epoch_len)
        {
            return Err(Error::InvalidArgument(format!(
                "trial shape does not match {}×{}",
                self.channel_names.len(),
                self.epoch_len
            )));
        }
        let cell = self.cells.entry((subject.to_string(), label)).or_default();
        match cell.binary_search_by_key(&trial.trial_index, |t| t.trial_index) {
            Ok(_) => Err(Error::InvalidArgument(format!(
                "duplicate trial {} for subject {subject} {label}",
                trial.trial_index
            ))),
            Err(pos) => {
                cell.insert(pos, trial);
                Ok(())
            }
        }
    }

    pub fn cell(&self, subject: &str, label: ConditionLabel) -> &[Trial] {
        self.cells
            .get(&(subject.to_string(), label))
            .map_or(&[], Vec::as_slice)
    }

    pub fn fetch(&self, subject: &str, label: ConditionLabel, trial_index: u32) -> Option<&Trial> {
        let cell = self.cell(subject, label);
        cell.binary_search_by_key(&trial_index, |t| t.trial_index)
            .ok()
            .map(|i| &cell[i])
    }

    pub fn subjects(&self) -> Vec<&str> {
        let mut s: Vec<&str> = self.cells.keys().map(|(s, _)| s.as_str()).collect();
        s.dedup();
        s
    }

    /// All epochs in (subject, label, trial) order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, ConditionLabel, &Trial)> {
        self.cells
            .iter()
            .flat_map(|((s, l), ts)| ts.iter().map(move |t| (s.as_str(), *l, t)))
    }

    pub fn n_epochs(&self) -> usize {
        self.cells.values().map(Vec::len).sum()
    }

    /// One BSIG per cell (trials concatenated along time) plus `index.json`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut cells = Vec::new();
        for (i, ((subject, label), trials)) in self.cells.iter().enumerate() {
            let file = format!("cell_{i:05}.bsig");
            let data: Vec<Vec<f32>> = (0..self.channel_names.len())
                .map(|c| trials.iter().flat_map(|t| t.data[c].iter().copied()).collect())
                .collect();
            write_bsig(&dir.join(&file), self.fs, &data)?;
            cells.push(IndexCell {
                subject: subject.clone(),
                label: *label,
                file,
                trial_indices: trials.iter().map(|t| t.trial_index).collect(),
            });
        }
        let index = IndexFile {
            version: TENSOR_VERSION,
            modality: self.modality,
            fs: self.fs,
            channel_names: self.channel_names.clone(),
            epoch_len: self.epoch_len,
            cells,
        };
        let path = dir.join(INDEX_FILE);
        let text = serde_json::to_string_pretty(&index).map_err(|e| Error::Serde(e.to_string()))?;
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(INDEX_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let index: IndexFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.clone(),
            message: format!("line {} column {}: {e}", e.line(), e.column()),
        })?;
        if index.version != TENSOR_VERSION {
            return Err(Error::Format(format!("unsupported tensor version {}", index.version)));
        }
        let mut t = Self::new(index.modality, index.fs, index.channel_names, index.epoch_len);
        for cell in index.cells {
            let (h, data) = read_bsig(&dir.join(&cell.file))?;
            let n_trials = cell.trial_indices.len();
            if h.n_channels != t.channel_names.len() || h.n_samples != n_trials * t.epoch_len {
                return Err(Error::Format(format!(
                    "{}: shape {}×{} does not match index",
                    cell.file, h.n_channels, h.n_samples
                )));
            }
            for (k, &trial_index) in cell.trial_indices.iter().enumerate() {
                let span = k * t.epoch_len..(k + 1) * t.epoch_len;
                let trial = Trial {
                    trial_index,
                    data: data.iter().map(|c| c[span.clone()].to_vec()).collect(),
                };
                t.insert(&cell.subject, cell.label, trial)?;
            }
        }
        Ok(t)
    }
}

fn to_f32(x: &[f64]) -> Vec<f32> {
    x.iter().map(|&v| v as f32).collect()
}

/// Cut one epoch per event for `modality`.
///
/// ECG epochs are raw slices at the native rate. EEG recordings are reduced
/// to [`EEG_CHANNELS`], band-passed and notch-filtered over the whole
/// recording (zero phase), sliced, resampled to the target rate and
/// baseline-corrected.
pub fn epoch_trials(manifest: &Manifest, modality: Modality, cfg: &EpochConfig) -> Result<TrialTensor> {
    let mut cache: HashMap<(String, String), SignalRecord> = HashMap::new();
    let mut tensor: Option<TrialTensor> = None;

    for ev in &manifest.events {
        for rec in manifest.event_recordings(ev) {
            if rec.modality != modality {
                continue;
            }
            let key = (ev.subject.clone(), rec.id.clone());
            if !cache.contains_key(&key) {
                let path = manifest.resolve(rec);
                let raw = read_signal(&path, manifest.format_of(rec)?, rec.fs, &rec.channel_names)?;
                let prepared = match modality {
                    Modality::Ecg => raw,
                    Modality::Eeg => prepare_eeg(&raw, cfg)?,
                };
                cache.insert(key.clone(), prepared);
            }
            let signal = &cache[&key];
            let len = (cfg.epoch_seconds * signal.fs()).round() as usize;
            let onset = ev.onset_sample as usize;
            if onset + len > signal.n_samples() {
                return Err(Error::Validation(vec![format!(
                    "subject {:?} {} trial {}: epoch [{onset}, {}) exceeds {} samples",
                    ev.subject,
                    ev.label(),
                    ev.trial_index,
                    onset + len,
                    signal.n_samples()
                )]));
            }
            let epoch = signal.slice(onset, len)?;
            let epoch = match modality {
                Modality::Ecg => epoch,
                Modality::Eeg => finish_eeg(&epoch, cfg)?,
            };

            let t = tensor.get_or_insert_with(|| {
                TrialTensor::new(
                    modality,
                    epoch.fs(),
                    epoch.channel_names().to_vec(),
                    epoch.n_samples(),
                )
            });
            if epoch.channel_names() != t.channel_names() || epoch.fs() != t.fs() {
                return Err(Error::InvalidArgument(format!(
                    "recording {:?} of subject {:?} differs in channels or rate from earlier {modality} recordings",
                    rec.id, ev.subject
                )));
            }
            let data = epoch.samples().iter().map(|c| to_f32(c)).collect();
            t.insert(
                &ev.subject,
                ev.label(),
                Trial {
                    trial_index: ev.trial_index,
                    data,
                },
            )?;
        }
    }
    tensor.ok_or_else(|| Error::InsufficientData(format!("no {modality} epochs in manifest")))
}

fn prepare_eeg(raw: &SignalRecord, cfg: &EpochConfig) -> Result<SignalRecord> {
    if let Some(missing) = EEG_CHANNELS.iter().find(|c| raw.channel_by_name(c).is_none()) {
        return Err(Error::Channel(missing.to_string()));
    }
    let sel = raw.select_channels(&EEG_CHANNELS)?;
    let fs = sel.fs();
    let band = design_filter(&FilterSpec::bandpass(cfg.eeg_band.0, cfg.eeg_band.1, cfg.eeg_filter_order), fs)?;
    let notch = match cfg.notch_hz {
        Some(f0) if f0 < fs / 2.0 => Some(design_filter(&FilterSpec::notch(f0, 30.0), fs)?),
        _ => None,
    };
    sel.map_channels(fs, |c| {
        let y = filter_series(c, &band, true)?;
        match &notch {
            Some(n) => filter_series(&y, n, true),
            None => Ok(y),
        }
    })
}

fn finish_eeg(epoch: &SignalRecord, cfg: &EpochConfig) -> Result<SignalRecord> {
    let target_len = (cfg.epoch_seconds * cfg.eeg_target_fs).round() as usize;
    let res = epoch.map_channels(cfg.eeg_target_fs, |c| {
        let mut y = resample_series(c, epoch.fs(), cfg.eeg_target_fs)?;
        y.resize(target_len, *y.last().unwrap_or(&0.0));
        Ok(y)
    })?;
    let res = match cfg.eeg_stage {
        Some(stage) => stage(&res)?,
        None => res,
    };
    let window = cfg
        .baseline
        .unwrap_or(BaselineWindow::new(0.0, res.duration()));
    baseline_correct(&res, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{write_signal, Condition, Event, Recording, SignalFormat, Subcondition, Subject};

    fn ecg_manifest(dir: &Path) -> (Manifest, Vec<f32>) {
        let raw: Vec<f32> = (0..2500).map(|i| (i as f32 * 0.37).sin() * 100.0 + 0.1).collect();
        write_bsig(&dir.join("ecg.bsig"), 250.0, std::slice::from_ref(&raw)).unwrap();
        let events = vec![
            Event {
                subject: "s1".into(),
                recordings: vec![],
                onset_sample: 123,
                condition: Condition::Memory,
                subcondition: Subcondition::Nine,
                trial_index: 4,
            },
            Event {
                subject: "s1".into(),
                recordings: vec![],
                onset_sample: 1000,
                condition: Condition::JustListen,
                subcondition: Subcondition::None,
                trial_index: 0,
            },
        ];
        let rec = Recording {
            id: "ecg".into(),
            modality: Modality::Ecg,
            signal_path: "ecg.bsig".into(),
            format: None,
            fs: 250.0,
            channel_names: vec!["ECG".into()],
        };
        let mut m = Manifest::new(
            vec![Subject {
                id: "s1".into(),
                recordings: vec![rec],
            }],
            events,
            dir,
        );
        m.validate().unwrap();
        (m, raw)
    }

    #[test]
    fn ecg_epochs_are_raw_slices() {
        let dir = tempfile::tempdir().unwrap();
        let (m, raw) = ecg_manifest(dir.path());
        let t = epoch_trials(&m, Modality::Ecg, &EpochConfig::default()).unwrap();
        assert_eq!(t.n_epochs(), 2);
        assert_eq!(t.epoch_len(), 750);
        let tr = t.fetch("s1", ConditionLabel::memory(Subcondition::Nine), 4).unwrap();
        assert_eq!(tr.data[0], raw[123..873].to_vec());
    }

    #[test]
    fn tensor_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (m, _) = ecg_manifest(dir.path());
        let t = epoch_trials(&m, Modality::Ecg, &EpochConfig::default()).unwrap();
        let out = dir.path().join("tensor");
        t.save(&out).unwrap();
        assert_eq!(TrialTensor::load(&out).unwrap(), t);
    }

    fn eeg_manifest(dir: &Path, names: &[&str]) -> Manifest {
        let fs = 256.0;
        let samples: Vec<Vec<f64>> = (0..names.len())
            .map(|c| {
                (0..1024)
                    .map(|i| (2.0 * std::f64::consts::PI * 10.0 * i as f64 / fs).sin() + c as f64)
                    .collect()
            })
            .collect();
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let rec = SignalRecord::new(samples, fs, names.clone()).unwrap();
        write_signal(&dir.join("eeg.bsig"), &rec, SignalFormat::Bsig).unwrap();
        let mut m = Manifest::new(
            vec![Subject {
                id: "s1".into(),
                recordings: vec![Recording {
                    id: "eeg".into(),
                    modality: Modality::Eeg,
                    signal_path: "eeg.bsig".into(),
                    format: Some(SignalFormat::Bsig),
                    fs,
                    channel_names: names,
                }],
            }],
            vec![Event {
                subject: "s1".into(),
                recordings: vec!["eeg".into()],
                onset_sample: 100,
                condition: Condition::Memory,
                subcondition: Subcondition::Five,
                trial_index: 0,
            }],
            dir,
        );
        m.validate().unwrap();
        m
    }

    #[test]
    fn eeg_epoch_shape_and_baseline() {
        let dir = tempfile::tempdir().unwrap();
        let m = eeg_manifest(dir.path(), &["Oz", "P4", "P3", "Cz", "Pz", "Fz"]);
        let t = epoch_trials(&m, Modality::Eeg, &EpochConfig::default()).unwrap();
        assert_eq!(t.fs(), 128.0);
        assert_eq!(t.epoch_len(), 384);
        assert_eq!(t.channel_names(), &EEG_CHANNELS.map(String::from));
        let tr = t.fetch("s1", ConditionLabel::memory(Subcondition::Five), 0).unwrap();
        for c in 0..5 {
            let mean: f64 = tr.channel_f64(c).iter().sum::<f64>() / 384.0;
            assert!(mean.abs() < 1e-5, "{mean}");
        }
    }

    #[test]
    fn eeg_missing_channel() {
        let dir = tempfile::tempdir().unwrap();
        let m = eeg_manifest(dir.path(), &["Fz", "Cz", "P3", "P4"]);
        match epoch_trials(&m, Modality::Eeg, &EpochConfig::default()) {
            Err(Error::Channel(c)) => assert_eq!(c, "Pz"),
            other => panic!("{other:?}"),
        }
    }
}
