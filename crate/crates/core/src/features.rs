//! Per-trial feature extraction and the labelled feature frame that sits
//! between epoched signals and the classifiers.
//!
//! A [`FeatureFrame`] keeps condition labels rather than class ids, so one
//! frame serves every task; [`FeatureFrame::to_table`] maps it onto a task.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catch22::{compute_catch22, CATCH22_NAMES};
use crate::dataset::{ConditionLabel, Task, TrialTensor};
use crate::ecg::{compute_rr, detect_r_peaks, mad_correct, DEFAULT_MAD_MULTIPLIER};
use crate::hrv::{poincare, time_domain, HRV5_NAMES};
use crate::ml::FeatureTable;
use crate::signal::{design_filter, filter_series, FilterSpec};
use crate::{Error, Result};

/// Metadata columns leading every feature CSV.
pub const META_COLUMNS: [&str; 3] = ["subject", "condition", "trial"];
/// Prefix of companion reliability columns; these are never model inputs.
pub const FLAG_PREFIX: &str = "flag_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    Hrv,
    Catch22,
    Both,
}

impl FeatureSet {
    /// ECG feature columns of this set, without the optional pNN40.
    pub fn ecg_names(&self) -> Vec<String> {
        let hrv = HRV5_NAMES.iter().map(|s| s.to_string());
        let c22 = CATCH22_NAMES.iter().map(|s| s.to_string());
        match self {
            FeatureSet::Hrv => hrv.collect(),
            FeatureSet::Catch22 => c22.collect(),
            FeatureSet::Both => hrv.chain(c22).collect(),
        }
    }
}

impl FromStr for FeatureSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hrv" => Ok(FeatureSet::Hrv),
            "catch22" => Ok(FeatureSet::Catch22),
            "both" => Ok(FeatureSet::Both),
            other => Err(Error::InvalidArgument(format!("unknown feature set {other}"))),
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSet::Hrv => "hrv",
            FeatureSet::Catch22 => "catch22",
            FeatureSet::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcgFeatureConfig {
    pub band: (f64, f64),
    pub filter_order: usize,
    pub mad_multiplier: f64,
    /// Append pNN40 after the HRV columns.
    pub pnn40: bool,
}

impl Default for EcgFeatureConfig {
    fn default() -> Self {
        Self {
            band: (0.5, 40.0),
            filter_order: 2,
            mad_multiplier: DEFAULT_MAD_MULTIPLIER,
            pnn40: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRow {
    pub subject: String,
    pub label: ConditionLabel,
    pub trial: u32,
    pub values: Vec<f64>,
    pub flags: Vec<f64>,
}

impl FrameRow {
    pub fn id(&self) -> String {
        format!("{}/{}/{:03}", self.subject, self.label.name(), self.trial)
    }
}

/// Named feature columns plus companion flag columns, one row per trial.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrame {
    pub names: Vec<String>,
    pub flag_names: Vec<String>,
    pub rows: Vec<FrameRow>,
}

impl FeatureFrame {
    pub fn new(names: Vec<String>, flag_names: Vec<String>) -> Self {
        Self {
            names,
            flag_names,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows whose condition belongs to `task`, as a table over `columns`
    /// (all feature columns when `None`). Row ids are `subject/label/trial`.
    pub fn to_table(&self, task: Task, columns: Option<&[String]>) -> Result<FeatureTable> {
        let idx: Vec<usize> = match columns {
            None => (0..self.names.len()).collect(),
            Some(cols) => {
                let missing: Vec<String> = cols.iter().filter(|c| !self.names.contains(c)).cloned().collect();
                if !missing.is_empty() {
                    return Err(Error::FeatureAlignment {
                        missing,
                        extra: Vec::new(),
                    });
                }
                cols.iter()
                    .map(|c| self.names.iter().position(|n| n == c).unwrap())
                    .collect()
            }
        };
        let (mut rows, mut labels, mut groups, mut ids) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for r in &self.rows {
            if let Some(class) = task.class_of(&r.label) {
                rows.push(idx.iter().map(|&j| r.values[j]).collect());
                labels.push(class);
                groups.push(r.subject.clone());
                ids.push(r.id());
            }
        }
        if rows.is_empty() {
            return Err(Error::Task(format!("no trials belong to task {task}")));
        }
        let names = idx.iter().map(|&j| self.names[j].clone()).collect();
        FeatureTable::with_ids(names, rows, labels, task.class_names(), groups, ids)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.write_csv_with_comments(path, &[])
    }

    /// Like [`write_csv`](Self::write_csv), preceded by `# `-prefixed lines.
    pub fn write_csv_with_comments(&self, path: &Path, comments: &[String]) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        for c in comments {
            writeln!(file, "# {c}").map_err(|e| Error::io(path, e))?;
        }
        let mut w = csv::Writer::from_writer(file);
        let header = META_COLUMNS
            .iter()
            .map(|s| s.to_string())
            .chain(self.names.iter().cloned())
            .chain(self.flag_names.iter().map(|f| format!("{FLAG_PREFIX}{f}")));
        w.write_record(header).map_err(|e| csv_err(path, e))?;
        for r in &self.rows {
            let rec = [r.subject.clone(), r.label.name().to_string(), r.trial.to_string()]
                .into_iter()
                .chain(r.values.iter().chain(&r.flags).map(|v| fmt_value(*v)));
            w.write_record(rec).map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
        let header: Vec<String> = r.headers().map_err(|e| csv_err(path, e))?.iter().map(String::from).collect();
        let bad = |m: String| Error::Parse {
            path: path.to_path_buf(),
            message: m,
        };
        if header.len() < 3 || header[..3] != META_COLUMNS {
            return Err(bad(format!("header must start with {META_COLUMNS:?}")));
        }
        let mut names = Vec::new();
        let mut flag_names = Vec::new();
        for h in &header[3..] {
            match h.strip_prefix(FLAG_PREFIX) {
                Some(f) => flag_names.push(f.to_string()),
                None if flag_names.is_empty() => names.push(h.clone()),
                None => return Err(bad(format!("feature column {h:?} after flag columns"))),
            }
        }
        let mut frame = FeatureFrame::new(names, flag_names);
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            let line = i + 2;
            let label = ConditionLabel::from_name(&rec[1])
                .ok_or_else(|| bad(format!("line {line}: unknown condition {:?}", &rec[1])))?;
            let trial = rec[2]
                .parse()
                .map_err(|_| bad(format!("line {line}: bad trial {:?}", &rec[2])))?;
            let nums: Vec<f64> = rec
                .iter()
                .skip(3)
                .map(|s| s.parse::<f64>().map_err(|_| bad(format!("line {line}: bad number {s:?}"))))
                .collect::<Result<_>>()?;
            let nf = frame.names.len();
            frame.rows.push(FrameRow {
                subject: rec[0].to_string(),
                label,
                trial,
                values: nums[..nf].to_vec(),
                flags: nums[nf..].to_vec(),
            });
        }
        Ok(frame)
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        v.to_string()
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// ECG flag columns, in order.
pub const ECG_FLAGS: [&str; 4] = ["n_peaks", "mad_skipped", "n_corrected", "sd2_clamped"];

/// HRV and catch22 features of one ECG epoch.
///
/// The epoch is bandpassed (zero phase), R-peaks are detected, and the RR
/// series is MAD-corrected when it has at least four intervals; shorter
/// series are used as they are and `mad_skipped` is set. HRV values that
/// cannot be computed are NaN. catch22 runs on the filtered epoch.
pub fn ecg_trial_features(x: &[f64], fs: f64, set: FeatureSet, cfg: &EcgFeatureConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let coeffs = design_filter(&FilterSpec::bandpass(cfg.band.0, cfg.band.1, cfg.filter_order), fs)?;
    let filtered = filter_series(x, &coeffs, true)?;
    let mut values = Vec::with_capacity(28);
    let mut flags = vec![0.0; ECG_FLAGS.len()];

    if set != FeatureSet::Catch22 {
        let n_hrv = 5 + usize::from(cfg.pnn40);
        let rec = crate::signal::SignalRecord::single("ECG", filtered.clone(), fs)?;
        let rr = detect_r_peaks(&rec).and_then(|p| {
            flags[0] = p.len() as f64;
            compute_rr(&p)
        });
        let rr = rr.and_then(|rr| {
            if rr.len() < 4 {
                flags[1] = 1.0;
                Ok(rr)
            } else {
                mad_correct(&rr, cfg.mad_multiplier)
            }
        });
        match rr.and_then(|rr| {
            flags[2] = rr.n_corrected() as f64;
            time_domain(&rr)
        }) {
            Ok(td) => {
                let pc = poincare(td.sdnn, td.rmssd);
                flags[3] = f64::from(u8::from(pc.clamped));
                values.extend([td.mean_nn, td.sdnn, td.rmssd, pc.sd1, pc.sd2]);
                if cfg.pnn40 {
                    values.push(td.pnn40);
                }
            }
            Err(e) => {
                log::debug!("HRV unavailable: {e}");
                values.extend(std::iter::repeat_n(f64::NAN, n_hrv));
            }
        }
    }
    if set != FeatureSet::Hrv {
        values.extend(compute_catch22(&filtered).values);
    }
    Ok((values, flags))
}

/// Feature frame of every trial in an ECG tensor (first channel).
pub fn build_ecg_features(tensor: &TrialTensor, set: FeatureSet, cfg: &EcgFeatureConfig) -> Result<FeatureFrame> {
    let mut names = set.ecg_names();
    if cfg.pnn40 && set != FeatureSet::Catch22 {
        names.insert(5, "pnn40".into());
    }
    let trials: Vec<_> = tensor.iter().collect();
    if trials.is_empty() {
        return Err(Error::InsufficientData("no trials".into()));
    }
    let rows = trials
        .par_iter()
        .map(|(subject, label, trial)| {
            let (values, flags) = ecg_trial_features(&trial.channel_f64(0), tensor.fs(), set, cfg)?;
            Ok(FrameRow {
                subject: subject.to_string(),
                label: *label,
                trial: trial.trial_index,
                values,
                flags,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut frame = FeatureFrame::new(names, ECG_FLAGS.iter().map(|s| s.to_string()).collect());
    frame.rows = rows;
    Ok(frame)
}

/// Rows of `a` and `b` that share `(subject, condition, trial)`, in `a`'s
/// order. Used to pair modalities trial by trial.
pub fn common_trials(a: &FeatureFrame, b: &FeatureFrame) -> (FeatureFrame, FeatureFrame) {
    let keys: HashSet<String> = b.rows.iter().map(FrameRow::id).collect();
    let keep_a: Vec<FrameRow> = a.rows.iter().filter(|r| keys.contains(&r.id())).cloned().collect();
    let order: std::collections::HashMap<String, usize> =
        keep_a.iter().enumerate().map(|(i, r)| (r.id(), i)).collect();
    let mut keep_b: Vec<FrameRow> = b.rows.iter().filter(|r| order.contains_key(&r.id())).cloned().collect();
    keep_b.sort_by_key(|r| order[&r.id()]);
    (
        FeatureFrame {
            rows: keep_a,
            ..FeatureFrame::new(a.names.clone(), a.flag_names.clone())
        },
        FeatureFrame {
            rows: keep_b,
            ..FeatureFrame::new(b.names.clone(), b.flag_names.clone())
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gen_ecg, EcgSynthSpec};

    #[test]
    fn ecg_schema_and_values() {
        let (rec, _) = gen_ecg(&EcgSynthSpec {
            duration: 3.0,
            mean_hr: 80.0,
            noise_snr_db: Some(20.0),
            seed: 3,
            ..Default::default()
        })
        .unwrap();
        let cfg = EcgFeatureConfig::default();
        let (v, flags) = ecg_trial_features(rec.channel(0), 250.0, FeatureSet::Both, &cfg).unwrap();
        assert_eq!(v.len(), 27);
        assert!((v[0] - 750.0).abs() < 10.0, "mean_nn {}", v[0]);
        assert_eq!(flags[0], 4.0);
        assert_eq!(flags[1], 1.0);
        let (h, _) = ecg_trial_features(rec.channel(0), 250.0, FeatureSet::Hrv, &cfg).unwrap();
        assert_eq!(h[..], v[..5]);
        let (c, _) = ecg_trial_features(rec.channel(0), 250.0, FeatureSet::Catch22, &cfg).unwrap();
        assert_eq!(c[..], v[5..]);
    }

    #[test]
    fn csv_round_trip_keeps_bits_and_nan() {
        let mut f = FeatureFrame::new(vec!["a".into(), "b".into()], vec!["x".into()]);
        f.rows.push(FrameRow {
            subject: "S01".into(),
            label: ConditionLabel::JUST_LISTEN,
            trial: 4,
            values: vec![0.1 + 0.2, f64::NAN],
            flags: vec![1.0],
        });
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        f.write_csv_with_comments(&p, &["provenance".into()]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("# provenance\nsubject,condition,trial,a,b,flag_x\nS01,JustListen,4,"));
        let g = FeatureFrame::read_csv(&p).unwrap();
        assert_eq!(g.names, f.names);
        assert_eq!(g.rows[0].values[0].to_bits(), f.rows[0].values[0].to_bits());
        assert!(g.rows[0].values[1].is_nan());
        assert_eq!(g.rows[0].flags, vec![1.0]);
    }

    #[test]
    fn task_mapping_drops_foreign_conditions() {
        let mut f = FeatureFrame::new(vec!["a".into()], vec![]);
        for (i, l) in ConditionLabel::all().into_iter().enumerate() {
            f.rows.push(FrameRow {
                subject: "S01".into(),
                label: l,
                trial: 0,
                values: vec![i as f64],
                flags: vec![],
            });
        }
        let mc = f.to_table(Task::Mc, None).unwrap();
        assert_eq!(mc.n_rows(), 3);
        assert_eq!(mc.labels(), &[0, 1, 2]);
        assert_eq!(mc.ids()[0], "S01/Five/000");
        assert_eq!(f.to_table(Task::Fc, None).unwrap().n_rows(), 4);
        assert!(matches!(
            f.to_table(Task::Fc, Some(&["zz".to_string()])),
            Err(Error::FeatureAlignment { .. })
        ));
    }
}
