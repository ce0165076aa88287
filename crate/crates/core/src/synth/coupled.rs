use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gen_ecg, gen_eeg, EcgSynthSpec, EegSynthSpec};
use crate::dataset::{
    write_signal, ConditionLabel, Event, Manifest, Modality, Recording, SignalFormat, Subject,
    EEG_CHANNELS,
};
use crate::seed;
use crate::{Error, Result};

/// Generator parameters a load class can shift. Used both for class offsets
/// and for the standard deviations of trial and subject variability.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub hr_bpm: f64,
    pub hrv_sd_ms: f64,
    pub t_wave_gain: f64,
    /// ECG beat-morphology time scale.
    pub wave_scale: f64,
    /// log2 of the theta/alpha power ratio.
    pub theta_alpha_log2: f64,
    /// log2 gain on the EEG beta power.
    pub beta_log2: f64,
}

pub type Variability = ClassParams;

/// Relative cardiac-field gain on Fz, Pz, Cz, P3, P4.
const CARDIAC_WEIGHTS: [f64; 5] = [1.0, 0.7, 0.85, 0.6, 0.6];

impl ClassParams {
    fn fields(&self) -> [f64; 6] {
        [
            self.hr_bpm,
            self.hrv_sd_ms,
            self.t_wave_gain,
            self.wave_scale,
            self.theta_alpha_log2,
            self.beta_log2,
        ]
    }

    fn from_fields(f: [f64; 6]) -> Self {
        Self {
            hr_bpm: f[0],
            hrv_sd_ms: f[1],
            t_wave_gain: f[2],
            wave_scale: f[3],
            theta_alpha_log2: f[4],
            beta_log2: f[5],
        }
    }

    fn scaled(&self, k: f64) -> Self {
        Self::from_fields(self.fields().map(|v| v * k))
    }

    fn plus(&self, o: &Self) -> Self {
        let (a, b) = (self.fields(), o.fields());
        Self::from_fields(std::array::from_fn(|i| a[i] + b[i]))
    }

    fn jitter<R: rand::Rng>(&self, rng: &mut R) -> Self {
        Self::from_fields(self.fields().map(|sd| { let z: f64 = StandardNormal.sample(rng); sd * z }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// No class offsets: labels carry no information.
    Null,
    Moderate,
    Large,
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "null" => Ok(Preset::Null),
            "moderate" => Ok(Preset::Moderate),
            "large" => Ok(Preset::Large),
            other => Err(Error::InvalidArgument(format!("unknown preset {other}"))),
        }
    }
}

/// A latent load class (JustListen, Five, Nine, Thirteen) shifts both
/// modalities' generator parameters.
///
/// Direction convention (synthetic, not a physiological claim): with load,
/// heart rate rises, RR jitter and T-wave amplitude fall, and EEG power moves
/// from theta toward alpha. Both signals therefore get faster with load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledLoadSpec {
    pub subjects: usize,
    pub trials_per_class: usize,
    pub seed: u64,
    /// Parameters of the JustListen class before offsets.
    pub base: ClassParams,
    /// Added to `base`, in label order JustListen, Five, Nine, Thirteen.
    pub offsets: [ClassParams; 4],
    pub trial_sd: Variability,
    /// Per-subject parameter noise; all zero disables it.
    pub subject_sd: Variability,
    pub epoch_seconds: f64,
    pub ecg_fs: f64,
    pub ecg_snr_db: f64,
    pub lf_mod_ms: f64,
    pub hf_mod_ms: f64,
    pub eeg_fs: f64,
    /// Combined theta + alpha variance, µV².
    pub eeg_theta_alpha_power: f64,
    pub eeg_beta_power: f64,
    pub eeg_background_power: f64,
    pub eeg_slope: f64,
    /// Peak amplitude (µV per mV of ECG) of the cardiac field picked up by
    /// the EEG electrodes; 0 disables it.
    pub eeg_cardiac_uv: f64,
    pub format: SignalFormat,
}

impl CoupledLoadSpec {
    pub fn preset(preset: Preset, subjects: usize, trials_per_class: usize, seed: u64) -> Self {
        let step = match preset {
            Preset::Null => ClassParams::default(),
            Preset::Moderate => ClassParams {
                hr_bpm: 4.0,
                hrv_sd_ms: -4.0,
                t_wave_gain: -0.12,
                wave_scale: -0.1,
                theta_alpha_log2: -0.8,
                beta_log2: 1.2,
            },
            Preset::Large => ClassParams {
                hr_bpm: 8.0,
                hrv_sd_ms: -8.0,
                t_wave_gain: -0.18,
                wave_scale: -0.13,
                theta_alpha_log2: -1.6,
                beta_log2: 1.6,
            },
        };
        Self {
            subjects,
            trials_per_class,
            seed,
            base: ClassParams {
                hr_bpm: 72.0,
                hrv_sd_ms: 40.0,
                t_wave_gain: 1.0,
                wave_scale: 1.0,
                theta_alpha_log2: 1.0,
                beta_log2: 0.0,
            },
            offsets: std::array::from_fn(|l| step.scaled(l as f64)),
            trial_sd: ClassParams {
                hr_bpm: 2.0,
                hrv_sd_ms: 5.0,
                t_wave_gain: 0.05,
                wave_scale: 0.03,
                theta_alpha_log2: 0.3,
                beta_log2: 0.2,
            },
            subject_sd: ClassParams::default(),
            epoch_seconds: 3.0,
            ecg_fs: 250.0,
            ecg_snr_db: 20.0,
            lf_mod_ms: 20.0,
            hf_mod_ms: 15.0,
            eeg_fs: 256.0,
            eeg_theta_alpha_power: 20.0,
            eeg_beta_power: 3.0,
            eeg_background_power: 5.0,
            eeg_slope: 1.0,
            eeg_cardiac_uv: 0.0,
            format: SignalFormat::Bsig,
        }
    }

    /// Enable per-subject parameter noise of a typical size.
    pub fn with_subject_noise(mut self) -> Self {
        self.subject_sd = ClassParams {
            hr_bpm: 6.0,
            hrv_sd_ms: 6.0,
            t_wave_gain: 0.1,
            wave_scale: 0.05,
            theta_alpha_log2: 0.6,
            beta_log2: 0.3,
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.subjects == 0 || self.trials_per_class == 0 {
            return bad("need at least one subject and one trial per class".into());
        }
        let seq: Vec<[f64; 6]> = self.offsets[1..].iter().map(ClassParams::fields).collect();
        for f in 0..6 {
            let (a, b, c) = (seq[0][f], seq[1][f], seq[2][f]);
            if !((a <= b && b <= c) || (a >= b && b >= c)) {
                return bad(format!(
                    "offset field {f} is not monotone across Five, Nine, Thirteen: {a}, {b}, {c}"
                ));
            }
        }
        let all = self
            .offsets
            .iter()
            .chain([&self.base, &self.trial_sd, &self.subject_sd])
            .flat_map(ClassParams::fields);
        if all.into_iter().any(|v| !v.is_finite()) {
            return bad("non-finite generator parameter".into());
        }
        if self.trial_sd.fields().iter().chain(&self.subject_sd.fields()).any(|&v| v < 0.0) {
            return bad("variability SDs must be non-negative".into());
        }
        Ok(())
    }

    fn n_events(&self) -> usize {
        4 * self.trials_per_class * self.subjects
    }
}

struct TrialJob {
    subject: usize,
    label: ConditionLabel,
    class: usize,
    trial: usize,
}

fn subject_id(s: usize) -> String {
    format!("S{:02}", s + 1)
}

fn trial_params(spec: &CoupledLoadSpec, job: &TrialJob) -> ClassParams {
    let mut srng = seed::rng(spec.seed, &[seed::str_key("subject"), job.subject as u64]);
    let subj = spec.subject_sd.jitter(&mut srng);
    let mut trng = seed::rng(
        spec.seed,
        &[seed::str_key("trial"), job.subject as u64, job.class as u64, job.trial as u64],
    );
    let p = spec
        .base
        .plus(&spec.offsets[job.class])
        .plus(&subj)
        .plus(&spec.trial_sd.jitter(&mut trng));
    ClassParams {
        hr_bpm: p.hr_bpm.clamp(40.0, 180.0),
        hrv_sd_ms: p.hrv_sd_ms.max(0.0),
        t_wave_gain: p.t_wave_gain.max(0.0),
        wave_scale: p.wave_scale.clamp(0.5, 2.0),
        theta_alpha_log2: p.theta_alpha_log2,
        beta_log2: p.beta_log2,
    }
}

/// Write a complete dataset tree under `out`: one ECG and one five-channel
/// EEG file per trial, plus `manifest.json`. Returns the validated manifest.
pub fn gen_coupled_dataset(spec: &CoupledLoadSpec, out: &Path) -> Result<Manifest> {
    spec.validate()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let mut jobs = Vec::with_capacity(spec.n_events());
    for subject in 0..spec.subjects {
        for (class, label) in ConditionLabel::all().into_iter().enumerate() {
            for trial in 0..spec.trials_per_class {
                jobs.push(TrialJob {
                    subject,
                    label,
                    class,
                    trial,
                });
            }
        }
    }
    for s in 0..spec.subjects {
        let dir = out.join(subject_id(s));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }

    let ext = spec.format.extension();
    let recordings: Vec<(Recording, Recording)> = jobs
        .par_iter()
        .map(|job| {
            let p = trial_params(spec, job);
            let sid = subject_id(job.subject);
            let stem = format!("{}_{:03}", job.label.name(), job.trial);
            let key = [job.subject as u64, job.class as u64, job.trial as u64];

            let ecg_spec = EcgSynthSpec {
                fs: spec.ecg_fs,
                duration: spec.epoch_seconds,
                mean_hr: p.hr_bpm,
                hrv_sd: p.hrv_sd_ms,
                lf_mod: spec.lf_mod_ms,
                hf_mod: spec.hf_mod_ms,
                noise_snr_db: Some(spec.ecg_snr_db),
                t_wave_gain: p.t_wave_gain,
                wave_scale: p.wave_scale,
                seed: seed::derive(spec.seed, &[&key[..], &[1]].concat()),
            };
            let (ecg, _) = gen_ecg(&ecg_spec)?;
            let ratio = p.theta_alpha_log2.exp2();
            let eeg = gen_eeg(&EegSynthSpec {
                fs: spec.eeg_fs,
                duration: spec.epoch_seconds,
                theta: spec.eeg_theta_alpha_power * ratio / (1.0 + ratio),
                alpha: spec.eeg_theta_alpha_power / (1.0 + ratio),
                beta: spec.eeg_beta_power * p.beta_log2.exp2(),
                one_over_f_slope: spec.eeg_slope,
                background: spec.eeg_background_power,
                n_channels: EEG_CHANNELS.len(),
                seed: seed::derive(spec.seed, &[&key[..], &[2]].concat()),
            })?;

            let eeg = if spec.eeg_cardiac_uv > 0.0 {
                let (field, _) = gen_ecg(&EcgSynthSpec {
                    fs: spec.eeg_fs,
                    noise_snr_db: None,
                    ..ecg_spec.clone()
                })?;
                let field = field.channel(0);
                let samples = (0..eeg.n_channels())
                    .map(|c| {
                        let g = spec.eeg_cardiac_uv * CARDIAC_WEIGHTS[c];
                        eeg.channel(c).iter().zip(field).map(|(v, f)| v + g * f).collect()
                    })
                    .collect();
                crate::signal::SignalRecord::new(samples, eeg.fs(), eeg.channel_names().to_vec())?
            } else {
                eeg
            };
            let ecg_rel = Path::new(&sid).join(format!("{stem}_ecg.{ext}"));
            let eeg_rel = Path::new(&sid).join(format!("{stem}_eeg.{ext}"));
            write_signal(&out.join(&ecg_rel), &ecg, spec.format)?;
            write_signal(&out.join(&eeg_rel), &eeg, spec.format)?;
            let rec = |id: String, modality, path: std::path::PathBuf, r: &crate::signal::SignalRecord| Recording {
                id,
                modality,
                signal_path: path,
                format: Some(spec.format),
                fs: r.fs(),
                channel_names: r.channel_names().to_vec(),
            };
            Ok((
                rec(format!("{stem}_ecg"), Modality::Ecg, ecg_rel, &ecg),
                rec(format!("{stem}_eeg"), Modality::Eeg, eeg_rel, &eeg),
            ))
        })
        .collect::<Result<_>>()?;

    let mut subjects: Vec<Subject> = (0..spec.subjects)
        .map(|s| Subject {
            id: subject_id(s),
            recordings: Vec::new(),
        })
        .collect();
    let mut events = Vec::with_capacity(jobs.len());
    for (job, (ecg, eeg)) in jobs.iter().zip(recordings) {
        events.push(Event {
            subject: subject_id(job.subject),
            recordings: vec![ecg.id.clone(), eeg.id.clone()],
            onset_sample: 0,
            condition: job.label.condition,
            subcondition: job.label.subcondition,
            trial_index: job.trial as u32,
        });
        subjects[job.subject].recordings.extend([ecg, eeg]);
    }

    let mut manifest = Manifest::new(subjects, events, out);
    manifest.epoch_seconds = spec.epoch_seconds;
    manifest.save(&out.join("manifest.json"))?;
    manifest.validate()?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_determinism() {
        let spec = CoupledLoadSpec::preset(Preset::Moderate, 2, 3, 11);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let m = gen_coupled_dataset(&spec, a.path()).unwrap();
        gen_coupled_dataset(&spec, b.path()).unwrap();
        assert_eq!(m.events.len(), 24);
        let files: usize = m.subjects.iter().map(|s| s.recordings.len()).sum();
        assert_eq!(files, 48);
        for s in &m.subjects {
            for r in &s.recordings {
                let x = fs::read(a.path().join(&r.signal_path)).unwrap();
                let y = fs::read(b.path().join(&r.signal_path)).unwrap();
                assert_eq!(x, y);
            }
        }
        assert_eq!(
            fs::read(a.path().join("manifest.json")).unwrap(),
            fs::read(b.path().join("manifest.json")).unwrap()
        );
    }

    #[test]
    fn rejects_non_monotone_offsets() {
        let mut spec = CoupledLoadSpec::preset(Preset::Moderate, 1, 1, 0);
        spec.offsets[2].hr_bpm = 100.0;
        assert!(matches!(spec.validate(), Err(Error::InvalidArgument(_))));
    }
}
