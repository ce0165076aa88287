use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::io::{read_bsig_header, read_signal, SignalFormat};
use super::{Condition, ConditionLabel, Modality, Subcondition};
use crate::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

fn default_version() -> u32 {
    MANIFEST_VERSION
}

fn default_epoch_seconds() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recording {
    pub id: String,
    pub modality: Modality,
    /// Relative paths resolve against the manifest's directory.
    pub signal_path: PathBuf,
    /// Inferred from the extension when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<SignalFormat>,
    pub fs: f64,
    pub channel_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subject {
    pub id: String,
    pub recordings: Vec<Recording>,
}

/// One retention-phase onset. `onset_sample` is counted in each referenced
/// recording's own samples; an empty `recordings` list means every recording
/// of the subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub subject: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub recordings: Vec<String>,
    pub onset_sample: u64,
    pub condition: Condition,
    pub subcondition: Subcondition,
    pub trial_index: u32,
}

impl Event {
    pub fn label(&self) -> ConditionLabel {
        ConditionLabel {
            condition: self.condition,
            subcondition: self.subcondition,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default = "default_version")]
    pub version: u32,
    /// Epoch length used for bounds checking.
    #[serde(default = "default_epoch_seconds")]
    pub epoch_seconds: f64,
    pub subjects: Vec<Subject>,
    pub events: Vec<Event>,
    #[serde(skip)]
    root: PathBuf,
    #[serde(skip)]
    lengths: HashMap<(String, String), usize>,
}

/// Read, parse and fully validate a manifest, including signal bounds.
pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {} column {}: {e}", e.line(), e.column()),
    })?;
    m.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    m.validate()?;
    Ok(m)
}

impl Manifest {
    /// Build in memory; call [`Manifest::validate`] (or save and reload)
    /// before epoching.
    pub fn new(subjects: Vec<Subject>, events: Vec<Event>, root: impl Into<PathBuf>) -> Self {
        Self {
            version: MANIFEST_VERSION,
            epoch_seconds: default_epoch_seconds(),
            subjects,
            events,
            root: root.into(),
            lengths: HashMap::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn subject(&self, id: &str) -> Option<&Subject> {
        self.subjects.iter().find(|s| s.id == id)
    }

    pub fn recording(&self, subject: &str, id: &str) -> Option<&Recording> {
        self.subject(subject)?.recordings.iter().find(|r| r.id == id)
    }

    pub fn resolve(&self, rec: &Recording) -> PathBuf {
        if rec.signal_path.is_absolute() {
            rec.signal_path.clone()
        } else {
            self.root.join(&rec.signal_path)
        }
    }

    pub fn format_of(&self, rec: &Recording) -> Result<SignalFormat> {
        rec.format
            .or_else(|| SignalFormat::from_path(&rec.signal_path))
            .ok_or_else(|| {
                Error::Format(format!(
                    "cannot infer format of {}",
                    rec.signal_path.display()
                ))
            })
    }

    /// Recordings an event applies to.
    pub fn event_recordings<'a>(&'a self, ev: &'a Event) -> Vec<&'a Recording> {
        let Some(s) = self.subject(&ev.subject) else {
            return Vec::new();
        };
        if ev.recordings.is_empty() {
            s.recordings.iter().collect()
        } else {
            s.recordings
                .iter()
                .filter(|r| ev.recordings.contains(&r.id))
                .collect()
        }
    }

    /// Sample count of a recording, known after validation.
    pub fn n_samples(&self, subject: &str, recording: &str) -> Option<usize> {
        self.lengths
            .get(&(subject.to_string(), recording.to_string()))
            .copied()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Check every invariant, collecting all offenders into one error.
    pub fn validate(&mut self) -> Result<()> {
        let mut errs = Vec::new();
        if self.version != MANIFEST_VERSION {
            errs.push(format!("unsupported manifest version {}", self.version));
        }
        if !(self.epoch_seconds.is_finite() && self.epoch_seconds > 0.0) {
            errs.push(format!("epoch_seconds must be positive, got {}", self.epoch_seconds));
        }

        let mut seen_subjects = HashSet::new();
        self.lengths.clear();
        for s in &self.subjects {
            if s.id.is_empty() {
                errs.push("subject with empty id".into());
            }
            if !seen_subjects.insert(s.id.as_str()) {
                errs.push(format!("duplicate subject id {:?}", s.id));
            }
            let mut seen_recs = HashSet::new();
            for r in &s.recordings {
                let tag = format!("subject {:?} recording {:?}", s.id, r.id);
                if !seen_recs.insert(r.id.as_str()) {
                    errs.push(format!("{tag}: duplicate recording id"));
                }
                if !(r.fs.is_finite() && r.fs > 0.0) {
                    errs.push(format!("{tag}: fs must be positive, got {}", r.fs));
                    continue;
                }
                if r.channel_names.is_empty() {
                    errs.push(format!("{tag}: no channel names"));
                    continue;
                }
                match self.probe_length(r) {
                    Ok(n) => {
                        self.lengths.insert((s.id.clone(), r.id.clone()), n);
                    }
                    Err(e) => errs.push(format!("{tag}: {e}")),
                }
            }
        }

        let mut cells: BTreeMap<(String, ConditionLabel, Modality, u32), usize> = BTreeMap::new();
        for (i, ev) in self.events.iter().enumerate() {
            let tag = format!(
                "event #{i} (subject {:?}, {} trial {}, onset {})",
                ev.subject,
                ev.label(),
                ev.trial_index,
                ev.onset_sample
            );
            if !ev.label().is_valid() {
                errs.push(format!(
                    "{tag}: invalid condition/subcondition {:?}/{:?}",
                    ev.condition, ev.subcondition
                ));
            }
            let Some(subject) = self.subject(&ev.subject) else {
                errs.push(format!("{tag}: unknown subject"));
                continue;
            };
            for id in &ev.recordings {
                if !subject.recordings.iter().any(|r| &r.id == id) {
                    errs.push(format!("{tag}: unknown recording {id:?}"));
                }
            }
            let recs = self.event_recordings(ev);
            if recs.is_empty() {
                errs.push(format!("{tag}: references no recording"));
            }
            for r in recs {
                if let Some(&n) = self.lengths.get(&(ev.subject.clone(), r.id.clone())) {
                    let len = (self.epoch_seconds * r.fs).round() as u64;
                    if ev.onset_sample + len > n as u64 {
                        errs.push(format!(
                            "{tag}: epoch [{}, {}) exceeds recording {:?} of {n} samples",
                            ev.onset_sample,
                            ev.onset_sample + len,
                            r.id
                        ));
                    }
                }
                let key = (ev.subject.clone(), ev.label(), r.modality, ev.trial_index);
                if let Some(prev) = cells.insert(key, i) {
                    errs.push(format!(
                        "{tag}: duplicate trial_index {} for {} in cell (also event #{prev})",
                        ev.trial_index, r.modality
                    ));
                }
            }
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    fn probe_length(&self, r: &Recording) -> Result<usize> {
        let path = self.resolve(r);
        let n = match self.format_of(r)? {
            SignalFormat::Bsig => {
                let h = read_bsig_header(&path)?;
                if h.n_channels != r.channel_names.len() {
                    return Err(Error::Format(format!(
                        "{} channels on disk, {} names",
                        h.n_channels,
                        r.channel_names.len()
                    )));
                }
                h.n_samples
            }
            SignalFormat::Csv => read_signal(&path, SignalFormat::Csv, r.fs, &r.channel_names)?.n_samples(),
        };
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::write_bsig;

    fn setup(events: &str) -> (tempfile::TempDir, Result<Manifest>) {
        let dir = tempfile::tempdir().unwrap();
        write_bsig(&dir.path().join("ecg.bsig"), 250.0, &[vec![0.0; 1000]]).unwrap();
        let text = format!(
            r#"{{
  "subjects": [{{"id": "s01", "recordings": [
    {{"id": "ecg", "modality": "ECG", "signal_path": "ecg.bsig", "fs": 250.0, "channel_names": ["ECG"]}}
  ]}}],
  "events": [{events}]
}}"#
        );
        let p = dir.path().join("manifest.json");
        fs::write(&p, text).unwrap();
        let m = load_manifest(&p);
        (dir, m)
    }

    const EV: &str = r#"{"subject": "s01", "onset_sample": 100, "condition": "Memory", "subcondition": "Five", "trial_index": 0}"#;

    #[test]
    fn minimal_manifest_loads() {
        let (_d, m) = setup(EV);
        let m = m.unwrap();
        assert_eq!(m.events.len(), 1);
        assert_eq!(m.n_samples("s01", "ecg"), Some(1000));
    }

    #[test]
    fn onset_past_end_names_event() {
        let ev = EV.replace("100", "400");
        let (_d, m) = setup(&ev);
        match m {
            Err(Error::Validation(v)) => {
                assert_eq!(v.len(), 1);
                assert!(v[0].contains("event #0") && v[0].contains("exceeds"), "{v:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_trial_index_rejected() {
        let (_d, m) = setup(&format!("{EV}, {}", EV.replace("100", "0")));
        match m {
            Err(Error::Validation(v)) => assert!(v[0].contains("duplicate trial_index"), "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dangling_references_listed() {
        let bad = EV.replace("s01", "s99");
        let bad2 = EV.replace("\"Five\"", "\"None\"");
        let (_d, m) = setup(&format!("{bad}, {bad2}"));
        match m {
            Err(Error::Validation(v)) => {
                assert!(v.iter().any(|e| e.contains("unknown subject")));
                assert!(v.iter().any(|e| e.contains("invalid condition")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        fs::write(&p, "{\n  \"subjects\": [,]\n}").unwrap();
        match load_manifest(&p) {
            Err(Error::Parse { message, .. }) => assert!(message.starts_with("line 2 column"), "{message}"),
            other => panic!("{other:?}"),
        }
    }
}
