//! Welch power spectral density.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    Hann,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            // periodic Hann, the usual choice for spectral estimation
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }
}

/// `None` fields fall back to segment = min(256, n/2) and 50% overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchConfig {
    pub segment_len: Option<usize>,
    pub overlap: Option<usize>,
    pub window: Window,
}

impl Default for WelchConfig {
    fn default() -> Self {
        Self {
            segment_len: None,
            overlap: None,
            window: Window::Rectangular,
        }
    }
}

impl WelchConfig {
    pub fn hann() -> Self {
        Self {
            window: Window::Hann,
            ..Self::default()
        }
    }

    pub fn with_segment(mut self, segment_len: usize) -> Self {
        self.segment_len = Some(segment_len);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub freqs_hz: Vec<f64>,
    pub power: Vec<f64>,
    pub segment_len: usize,
    pub overlap: usize,
    pub window: Window,
    pub n_segments: usize,
}

impl PowerSpectrum {
    pub fn resolution(&self) -> f64 {
        if self.freqs_hz.len() > 1 {
            self.freqs_hz[1] - self.freqs_hz[0]
        } else {
            0.0
        }
    }

    /// Rectangle-rule integral over bins with `lo <= f < hi`.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        let df = self.resolution();
        self.freqs_hz
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| **f >= lo && **f < hi)
            .map(|(_, p)| p * df)
            .sum()
    }

    /// Integral over the whole one-sided spectrum.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.resolution()
    }

    pub fn peak_frequency(&self) -> f64 {
        let i = self
            .power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.freqs_hz[i]
    }
}

/// One-sided Welch estimate with per-segment mean removal.
pub fn welch_psd(series: &[f64], fs: f64, cfg: &WelchConfig) -> Result<PowerSpectrum> {
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::InvalidArgument(format!("sampling rate must be positive, got {fs}")));
    }
    let n = series.len();
    let seg = cfg.segment_len.unwrap_or_else(|| 256.min(n / 2));
    if seg < 8 {
        if cfg.segment_len.is_none() {
            return Err(Error::TooShort { needed: 16, got: n });
        }
        return Err(Error::InvalidArgument(format!("segment length {seg} below minimum 8")));
    }
    if n < seg {
        return Err(Error::TooShort { needed: seg, got: n });
    }
    let overlap = cfg.overlap.unwrap_or(seg / 2);
    if overlap >= seg {
        return Err(Error::InvalidArgument(format!(
            "overlap {overlap} must be smaller than segment {seg}"
        )));
    }
    let step = seg - overlap;
    let n_segments = (n - seg) / step + 1;

    let w = cfg.window.coefficients(seg);
    let wss: f64 = w.iter().map(|v| v * v).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(seg);
    let n_bins = seg / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];

    for s in 0..n_segments {
        let chunk = &series[s * step..s * step + seg];
        let mean = chunk.iter().sum::<f64>() / seg as f64;
        for ((b, x), wi) in buf.iter_mut().zip(chunk).zip(&w) {
            *b = Complex64::new((x - mean) * wi, 0.0);
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
    }

    let scale = 1.0 / (fs * wss * n_segments as f64);
    let power = acc
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let one_sided = if i == 0 || (seg.is_multiple_of(2) && i == seg / 2) { 1.0 } else { 2.0 };
            p * scale * one_sided
        })
        .collect();
    let freqs_hz = (0..n_bins).map(|i| i as f64 * fs / seg as f64).collect();
    Ok(PowerSpectrum {
        freqs_hz,
        power,
        segment_len: seg,
        overlap,
        window: cfg.window,
        n_segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn white_noise_integrates_to_variance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..8192).map(|_| StandardNormal.sample(&mut rng)).collect();
        let psd = welch_psd(&x, 100.0, &WelchConfig::default()).unwrap();
        let total = psd.total_power();
        assert!((0.9..=1.1).contains(&total), "integral {total}");
        // flat: each quarter of the band carries about a quarter of the power
        for q in 0..4 {
            let lo = q as f64 * 12.5;
            let part = psd.band_power(lo, lo + 12.5);
            assert!((0.18..0.32).contains(&part), "quarter {q}: {part}");
        }
    }

    #[test]
    fn tone_peak_location() {
        let fs = 200.0;
        let x: Vec<f64> = (0..2000).map(|i| (2.0 * PI * 50.0 * i as f64 / fs).sin()).collect();
        for cfg in [WelchConfig::default(), WelchConfig::hann()] {
            let psd = welch_psd(&x, fs, &cfg).unwrap();
            assert_eq!(psd.peak_frequency(), 50.0);
        }
    }

    #[test]
    fn zero_signal_has_zero_power() {
        let psd = welch_psd(&[0.0; 64], 10.0, &WelchConfig::default()).unwrap();
        assert!(psd.power.iter().all(|&p| p == 0.0));
        assert_eq!(psd.freqs_hz[0], 0.0);
    }

    #[test]
    fn default_segment_and_errors() {
        let psd = welch_psd(&[1.0; 100], 1.0, &WelchConfig::default()).unwrap();
        assert_eq!(psd.segment_len, 50);
        assert_eq!(psd.overlap, 25);
        assert!(matches!(
            welch_psd(&[1.0; 20], 1.0, &WelchConfig::default().with_segment(32)),
            Err(Error::TooShort { .. })
        ));
        assert!(matches!(
            welch_psd(&[1.0; 20], 1.0, &WelchConfig::default().with_segment(4)),
            Err(Error::InvalidArgument(_))
        ));
    }
}
