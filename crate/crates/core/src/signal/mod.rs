//! Shared signal-processing primitives for both modalities.
//!
//! Everything here is a pure function of its inputs. [`SignalRecord`] is
//! immutable once built; operations return new records.

mod filter;
mod resample;
mod spectrum;

pub use filter::{
    apply_filter, design_filter, filter_series, Biquad, FilterCoefficients, FilterKind, FilterSpec,
};
pub use resample::{resample, resample_series};
pub use spectrum::{welch_psd, PowerSpectrum, WelchConfig, Window};

use crate::{Error, Result};

/// Uniformly sampled multichannel time series.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    samples: Vec<Vec<f64>>,
    fs: f64,
    channel_names: Vec<String>,
    start_time: f64,
}

impl SignalRecord {
    pub fn new(samples: Vec<Vec<f64>>, fs: f64, channel_names: Vec<String>) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sampling rate must be positive, got {fs}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::InvalidArgument("record has no channels".into()));
        }
        if channel_names.len() != samples.len() {
            return Err(Error::InvalidArgument(format!(
                "{} channel names for {} channels",
                channel_names.len(),
                samples.len()
            )));
        }
        let n = samples[0].len();
        if let Some(bad) = samples.iter().position(|c| c.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "channel {} has {} samples, expected {n}",
                channel_names[bad],
                samples[bad].len()
            )));
        }
        for (i, name) in channel_names.iter().enumerate() {
            if channel_names[..i].contains(name) {
                return Err(Error::InvalidArgument(format!("duplicate channel name {name}")));
            }
        }
        Ok(Self {
            samples,
            fs,
            channel_names,
            start_time: 0.0,
        })
    }

    /// Single-channel convenience constructor.
    pub fn single(name: &str, samples: Vec<f64>, fs: f64) -> Result<Self> {
        Self::new(vec![samples], fs, vec![name.to_string()])
    }

    pub fn with_start_time(mut self, start_time: f64) -> Self {
        self.start_time = start_time;
        self
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn n_channels(&self) -> usize {
        self.samples.len()
    }

    pub fn n_samples(&self) -> usize {
        self.samples[0].len()
    }

    pub fn duration(&self) -> f64 {
        self.n_samples() as f64 / self.fs
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Vec<f64>> {
        self.samples
    }

    pub fn channel(&self, idx: usize) -> &[f64] {
        &self.samples[idx]
    }

    pub fn channel_by_name(&self, name: &str) -> Option<&[f64]> {
        self.channel_names
            .iter()
            .position(|c| c == name)
            .map(|i| self.samples[i].as_slice())
    }

    /// Keep only `names`, in the given order.
    pub fn select_channels<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let mut samples = Vec::with_capacity(names.len());
        for name in names {
            let ch = self
                .channel_by_name(name.as_ref())
                .ok_or_else(|| Error::Channel(name.as_ref().to_string()))?;
            samples.push(ch.to_vec());
        }
        let names = names.iter().map(|n| n.as_ref().to_string()).collect();
        Ok(Self::new(samples, self.fs, names)?.with_start_time(self.start_time))
    }

    /// Samples `[start, start + len)` of every channel.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        let end = start.saturating_add(len);
        if end > self.n_samples() {
            return Err(Error::InvalidArgument(format!(
                "slice [{start}, {end}) exceeds {} samples",
                self.n_samples()
            )));
        }
        let samples = self.samples.iter().map(|c| c[start..end].to_vec()).collect();
        Ok(Self {
            samples,
            fs: self.fs,
            channel_names: self.channel_names.clone(),
            start_time: self.start_time + start as f64 / self.fs,
        })
    }

    /// Apply `f` to every channel, keeping names and start time. `f` may change
    /// the length (uniformly) and the caller supplies the resulting rate.
    pub fn map_channels<F>(&self, fs: f64, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let samples = self
            .samples
            .iter()
            .map(|c| f(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(samples, fs, self.channel_names.clone())?.with_start_time(self.start_time))
    }
}

/// Baseline interval in seconds, relative to the first sample of the epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineWindow {
    pub start_s: f64,
    pub end_s: f64,
}

impl BaselineWindow {
    pub fn new(start_s: f64, end_s: f64) -> Self {
        Self { start_s, end_s }
    }
}

/// Subtract each channel's mean over `window` from the whole epoch.
pub fn baseline_correct(epoch: &SignalRecord, window: BaselineWindow) -> Result<SignalRecord> {
    let n = epoch.n_samples();
    let eps = 0.5 / epoch.fs;
    if window.start_s < -eps || window.end_s > epoch.duration() + eps {
        return Err(Error::InvalidArgument(format!(
            "baseline window [{}, {}] s outside epoch of {} s",
            window.start_s,
            window.end_s,
            epoch.duration()
        )));
    }
    let i0 = ((window.start_s * epoch.fs).round().max(0.0) as usize).min(n);
    let i1 = ((window.end_s * epoch.fs).round().max(0.0) as usize).min(n);
    if i1 <= i0 {
        return Err(Error::InvalidArgument(format!(
            "baseline window [{}, {}] s contains no samples",
            window.start_s, window.end_s
        )));
    }
    epoch.map_channels(epoch.fs, |c| {
        let mean = c[i0..i1].iter().sum::<f64>() / (i1 - i0) as f64;
        Ok(c.iter().map(|v| v - mean).collect())
    })
}

/// Odd (point-symmetric) extension by `pad` samples on each side.
pub(crate) fn odd_extend(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    debug_assert!(pad < n);
    let mut out = Vec::with_capacity(n + 2 * pad);
    out.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
    out.extend_from_slice(x);
    out.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
    out
}
