//! Ground-truth synthetic ECG and EEG, and a coupled generator in which a
//! latent load class drives both modalities.
//!
//! Every random stream is derived from the spec's seed, so identical specs
//! give identical samples (and identical files).

mod coupled;

pub use coupled::{gen_coupled_dataset, ClassParams, CoupledLoadSpec, Preset, Variability};

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::ecg::RPeakList;
use crate::seed;
use crate::signal::{design_filter, filter_series, FilterSpec, SignalRecord};
use crate::{Error, Result};

/// AR(1) coefficient of the RR jitter process.
pub const RR_AR_COEF: f64 = 0.5;
pub const LF_MOD_HZ: f64 = 0.1;
pub const HF_MOD_HZ: f64 = 0.25;

/// Default montage; the first five are the channels the pipeline keeps.
pub const EEG_MONTAGE: [&str; 12] = [
    "Fz", "Pz", "Cz", "P3", "P4", "Oz", "O1", "O2", "F3", "F4", "C3", "C4",
];

pub const THETA_BAND: (f64, f64) = (4.0, 8.0);
pub const ALPHA_BAND: (f64, f64) = (8.0, 13.0);
pub const BETA_BAND: (f64, f64) = (13.0, 30.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcgSynthSpec {
    pub fs: f64,
    pub duration: f64,
    pub mean_hr: f64,
    /// Stationary SD of the AR(1) RR jitter, ms.
    pub hrv_sd: f64,
    /// Amplitude of the 0.1 Hz RR modulation, ms.
    pub lf_mod: f64,
    /// Amplitude of the 0.25 Hz RR modulation, ms.
    pub hf_mod: f64,
    /// `None` for a clean waveform.
    pub noise_snr_db: Option<f64>,
    /// Multiplier on the T-wave amplitude.
    pub t_wave_gain: f64,
    /// Multiplier on every bump's latency and width; below 1 compresses the
    /// beat morphology in time.
    pub wave_scale: f64,
    pub seed: u64,
}

impl Default for EcgSynthSpec {
    fn default() -> Self {
        Self {
            fs: 250.0,
            duration: 10.0,
            mean_hr: 60.0,
            hrv_sd: 0.0,
            lf_mod: 0.0,
            hf_mod: 0.0,
            noise_snr_db: None,
            t_wave_gain: 1.0,
            wave_scale: 1.0,
            seed: 0,
        }
    }
}

impl EcgSynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.fs.is_finite() && self.fs >= 50.0) {
            return bad(format!("ECG fs must be at least 50 Hz, got {}", self.fs));
        }
        if !(30.0..=220.0).contains(&self.mean_hr) {
            return bad(format!("mean_hr {} outside [30, 220] bpm", self.mean_hr));
        }
        if !(self.duration.is_finite() && self.duration * self.mean_hr / 60.0 >= 2.0) {
            return bad(format!(
                "{} s at {} bpm holds fewer than 2 beats",
                self.duration, self.mean_hr
            ));
        }
        for (name, v) in [
            ("hrv_sd", self.hrv_sd),
            ("lf_mod", self.lf_mod),
            ("hf_mod", self.hf_mod),
            ("t_wave_gain", self.t_wave_gain),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if !(self.wave_scale.is_finite() && (0.5..=2.0).contains(&self.wave_scale)) {
            return bad(format!("wave_scale {} outside [0.5, 2]", self.wave_scale));
        }
        if let Some(snr) = self.noise_snr_db {
            if !snr.is_finite() {
                return bad(format!("noise_snr_db must be finite, got {snr}"));
            }
        }
        Ok(())
    }
}

/// (offset s, amplitude mV, width s) of the P, Q, R, S and T bumps at 60 bpm.
const BUMPS: [(f64, f64, f64); 5] = [
    (-0.200, 0.12, 0.025),
    (-0.030, -0.10, 0.010),
    (0.000, 1.00, 0.011),
    (0.030, -0.20, 0.010),
    (0.280, 0.30, 0.050),
];

/// Beat-to-beat RR sequence in ms for beats starting at `t0_s`, until the
/// beat times pass `end_s`.
fn rr_process<R: Rng>(spec: &EcgSynthSpec, rng: &mut R, t0_s: f64, end_s: f64) -> Vec<f64> {
    let mean_rr = 60_000.0 / spec.mean_hr;
    let phi_lf = rng.random::<f64>() * 2.0 * PI;
    let phi_hf = rng.random::<f64>() * 2.0 * PI;
    let innov = spec.hrv_sd * (1.0 - RR_AR_COEF * RR_AR_COEF).sqrt();
    let z0: f64 = StandardNormal.sample(rng);
    let mut e = spec.hrv_sd * z0;
    let mut t = t0_s;
    let mut out = Vec::new();
    while t <= end_s {
        let rr = mean_rr
            + e
            + spec.lf_mod * (2.0 * PI * LF_MOD_HZ * t + phi_lf).sin()
            + spec.hf_mod * (2.0 * PI * HF_MOD_HZ * t + phi_hf).sin();
        let rr = rr.clamp(crate::ecg::RR_MIN_MS, crate::ecg::RR_MAX_MS);
        out.push(rr);
        t += rr / 1000.0;
        let z: f64 = StandardNormal.sample(rng);
        e = RR_AR_COEF * e + innov * z;
    }
    out
}

/// Synthetic ECG plus the exact R-apex samples.
///
/// Beats are placed on an integer-sample grid (each RR is rounded to whole
/// samples), starting one beat before the window so the first visible beat
/// has its predecessor's T wave. The T wave's latency scales with the square
/// root of the preceding RR.
pub fn gen_ecg(spec: &EcgSynthSpec) -> Result<(SignalRecord, RPeakList)> {
    spec.validate()?;
    let fs = spec.fs;
    let n = (spec.duration * fs).round() as usize;
    let mut rng = seed::rng(spec.seed, &[seed::str_key("ecg")]);

    let mean_rr_s = 60.0 / spec.mean_hr;
    let first = -rng.random::<f64>() * mean_rr_s;
    let rr = rr_process(spec, &mut rng, first, spec.duration + 1.0);

    let mut clean = vec![0.0; n];
    let mut peaks = Vec::new();
    let mut r = (first * fs).round() as i64;
    let mut prev_rr_s = mean_rr_s;
    for &rr_ms in &rr {
        let rr_scale = prev_rr_s.sqrt();
        for (k, &(off, amp, width)) in BUMPS.iter().enumerate() {
            let (off, amp, width) = if k == 4 {
                (off * rr_scale, amp * spec.t_wave_gain, width * rr_scale)
            } else {
                (off, amp, width)
            };
            let (off, width) = (off * spec.wave_scale, width * spec.wave_scale);
            let centre = r as f64 + off * fs;
            let w = width * fs;
            let lo = ((centre - 5.0 * w).floor().max(0.0)) as usize;
            let hi = ((centre + 5.0 * w).ceil().min(n as f64 - 1.0)).max(-1.0);
            if hi < 0.0 {
                continue;
            }
            for i in lo..=(hi as usize) {
                let d = (i as f64 - centre) / w;
                clean[i] += amp * (-0.5 * d * d).exp();
            }
        }
        if r >= 0 && (r as usize) < n {
            peaks.push(r as usize);
        }
        let step = (rr_ms * fs / 1000.0).round() as i64;
        r += step;
        prev_rr_s = step as f64 / fs;
    }

    let signal = match spec.noise_snr_db {
        None => clean,
        Some(snr) => {
            let m = clean.iter().sum::<f64>() / n as f64;
            let p = clean.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
            let sd = (p / 10f64.powf(snr / 10.0)).sqrt();
            let mut nrng = seed::rng(spec.seed, &[seed::str_key("ecg-noise")]);
            clean
                .iter()
                .map(|v| {
                    let z: f64 = StandardNormal.sample(&mut nrng);
                    v + sd * z
                })
                .collect()
        }
    };
    let rec = SignalRecord::single("ECG", signal, fs)?;
    Ok((rec, RPeakList::new(peaks, fs)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EegSynthSpec {
    pub fs: f64,
    pub duration: f64,
    /// Band powers (variance, µV²) of the theta, alpha and beta components.
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Exponent of the 1/f^slope background.
    pub one_over_f_slope: f64,
    /// Variance of the background component, µV².
    pub background: f64,
    pub n_channels: usize,
    pub seed: u64,
}

impl Default for EegSynthSpec {
    fn default() -> Self {
        Self {
            fs: 256.0,
            duration: 3.0,
            theta: 1.0,
            alpha: 1.0,
            beta: 1.0,
            one_over_f_slope: 1.0,
            background: 1.0,
            n_channels: 5,
            seed: 0,
        }
    }
}

impl EegSynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.fs.is_finite() && self.fs > 60.0) {
            return bad(format!("EEG fs must exceed 60 Hz, got {}", self.fs));
        }
        if !(self.duration.is_finite() && self.duration * self.fs >= 16.0) {
            return bad(format!("duration {} s is too short", self.duration));
        }
        for (name, v) in [
            ("theta", self.theta),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("background", self.background),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} power must be finite and non-negative, got {v}"));
            }
        }
        if !self.one_over_f_slope.is_finite() {
            return bad("one_over_f_slope must be finite".into());
        }
        if self.n_channels == 0 || self.n_channels > EEG_MONTAGE.len() {
            return bad(format!(
                "n_channels must be in 1..={}, got {}",
                EEG_MONTAGE.len(),
                self.n_channels
            ));
        }
        Ok(())
    }
}

fn rescale(mut x: Vec<f64>, power: f64) -> Vec<f64> {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
    let g = if var > 0.0 { (power / var).sqrt() } else { 0.0 };
    for v in &mut x {
        *v = (*v - m) * g;
    }
    x
}

fn white<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Gaussian noise with a 1/f^slope power spectrum (zero mean, unit scale).
fn pink<R: Rng>(rng: &mut R, n: usize, slope: f64) -> Vec<f64> {
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..=n / 2 {
        let amp = (k as f64).powf(-slope / 2.0);
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        spec[k] = Complex64::new(re, im) * amp;
        if k == n - k {
            spec[k].im = 0.0;
        } else {
            spec[n - k] = spec[k].conj();
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    spec.into_iter().map(|c| c.re).collect()
}

/// Multichannel EEG: per channel, band-limited noise in theta, alpha and beta
/// (white noise through a zero-phase band-pass, scaled to the requested
/// variance) plus a 1/f background. Channels draw from independent streams.
pub fn gen_eeg(spec: &EegSynthSpec) -> Result<SignalRecord> {
    spec.validate()?;
    let fs = spec.fs;
    let n = (spec.duration * fs).round() as usize;
    let margin = fs.round() as usize;
    let bands = [
        (THETA_BAND, spec.theta),
        (ALPHA_BAND, spec.alpha),
        (BETA_BAND, spec.beta),
    ];
    let filters = bands
        .iter()
        .map(|&((lo, hi), _)| design_filter(&FilterSpec::bandpass(lo, hi, 4), fs))
        .collect::<Result<Vec<_>>>()?;

    let mut channels = Vec::with_capacity(spec.n_channels);
    for c in 0..spec.n_channels {
        let mut rng = seed::rng(spec.seed, &[seed::str_key("eeg"), c as u64]);
        let mut x = rescale(pink(&mut rng, n, spec.one_over_f_slope), spec.background);
        for ((_, power), coeffs) in bands.iter().zip(&filters) {
            let w = white(&mut rng, n + 2 * margin);
            if *power == 0.0 {
                continue;
            }
            let y = filter_series(&w, coeffs, true)?;
            let y = rescale(y[margin..margin + n].to_vec(), *power);
            for (a, b) in x.iter_mut().zip(&y) {
                *a += b;
            }
        }
        channels.push(x);
    }
    let names = EEG_MONTAGE[..spec.n_channels]
        .iter()
        .map(|s| s.to_string())
        .collect();
    SignalRecord::new(channels, fs, names)
}
