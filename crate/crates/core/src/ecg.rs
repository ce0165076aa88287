//! R-peak detection, RR intervals and MAD-based artifact correction.

use serde::{Deserialize, Serialize};

use crate::signal::{design_filter, filter_series, FilterSpec, SignalRecord};
use crate::stats::median;
use crate::{Error, Result};

/// Scale factor turning a MAD into a Gaussian σ estimate.
pub const MAD_TO_SIGMA: f64 = 1.4826;
pub const DEFAULT_MAD_MULTIPLIER: f64 = 3.5;
/// Physiological RR guard, ms.
pub const RR_MIN_MS: f64 = 250.0;
pub const RR_MAX_MS: f64 = 3000.0;
const MAD_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RPeakList {
    pub indices: Vec<usize>,
    pub fs: f64,
    /// Per-peak margin over the local threshold, in [0, 1].
    pub confidence: Vec<f64>,
}

impl RPeakList {
    /// Peaks without confidence scores (e.g. ground truth or hand labels).
    pub fn new(indices: Vec<usize>, fs: f64) -> Self {
        let confidence = vec![1.0; indices.len()];
        Self {
            indices,
            fs,
            confidence,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Band isolating QRS energy, Hz.
    pub qrs_band: (f64, f64),
    pub smoothing_s: f64,
    /// Threshold = median + k · MAD of the energy in a sliding window.
    pub k: f64,
    /// Threshold never drops below this fraction of the window's energy maximum.
    pub relative_floor: f64,
    pub window_s: f64,
    pub hop_s: f64,
    pub refractory_s: f64,
    pub search_s: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            qrs_band: (5.0, 15.0),
            smoothing_s: 0.150,
            k: 2.0,
            relative_floor: 0.25,
            window_s: 2.0,
            hop_s: 0.25,
            refractory_s: 0.200,
            search_s: 0.050,
        }
    }
}

pub fn detect_r_peaks(ecg: &SignalRecord) -> Result<RPeakList> {
    detect_r_peaks_with(ecg, &DetectorConfig::default())
}

/// Squared-derivative energy detector with a sliding robust threshold.
pub fn detect_r_peaks_with(ecg: &SignalRecord, cfg: &DetectorConfig) -> Result<RPeakList> {
    if ecg.n_channels() != 1 {
        return Err(Error::InvalidArgument(format!(
            "R-peak detection expects one channel, got {}",
            ecg.n_channels()
        )));
    }
    let fs = ecg.fs();
    let x = ecg.channel(0);
    let n = x.len();
    let min_len = (2.0 * fs).ceil() as usize;
    if n < min_len {
        return Err(Error::TooShort {
            needed: min_len,
            got: n,
        });
    }
    let m = x.iter().sum::<f64>() / n as f64;
    if x.iter().all(|v| (v - m).abs() == 0.0) || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoPeaks("signal has zero variance".into()));
    }

    let energy = energy_signal(x, fs, cfg)?;
    let thr = sliding_threshold(&energy, fs, cfg);

    // Candidates are energy maxima within supra-threshold runs. At high
    // heart rates neighbouring beats can share one run, so every point that
    // dominates its ±refractory neighbourhood inside the run counts.
    let search = (cfg.search_s * fs).round() as usize;
    let refractory = (cfg.refractory_s * fs).round() as usize;
    let mut cands: Vec<(usize, f64)> = Vec::new();
    let mut i = 0;
    while i < n {
        if energy[i] > thr[i] {
            let start = i;
            while i < n && energy[i] > thr[i] {
                i += 1;
            }
            let run = &energy[start..i];
            for (k, &e) in run.iter().enumerate() {
                let a = k.saturating_sub(refractory);
                let b = (k + refractory + 1).min(run.len());
                if argmax(&run[a..b]) + a != k {
                    continue;
                }
                let apex = start + k;
                let lo = apex.saturating_sub(search);
                let hi = (apex + search + 1).min(n);
                let peak = argmax(&x[lo..hi]) + lo;
                let conf = (1.0 - thr[apex] / e).clamp(0.0, 1.0);
                cands.push((peak, conf));
            }
        } else {
            i += 1;
        }
    }

    let mut kept: Vec<(usize, f64)> = Vec::new();
    for (idx, conf) in cands {
        match kept.last_mut() {
            Some(last) if idx < last.0 + refractory => {
                if x[idx] > x[last.0] {
                    *last = (idx, conf);
                }
            }
            _ => kept.push((idx, conf)),
        }
    }
    // A maximum on the record boundary cannot be told apart from the tail of
    // a beat just outside the window.
    kept.retain(|k| k.0 != 0 && k.0 != n - 1);
    if kept.is_empty() {
        return Err(Error::NoPeaks("no supra-threshold QRS energy".into()));
    }
    Ok(RPeakList {
        indices: kept.iter().map(|k| k.0).collect(),
        fs,
        confidence: kept.iter().map(|k| k.1).collect(),
    })
}

fn argmax(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if *v > x[best] {
            best = i;
        }
    }
    best
}

fn energy_signal(x: &[f64], fs: f64, cfg: &DetectorConfig) -> Result<Vec<f64>> {
    let (lo, hi) = cfg.qrs_band;
    let coeffs = design_filter(&FilterSpec::bandpass(lo, hi.min(0.45 * fs), 2), fs)?;
    let band = filter_series(x, &coeffs, true)?;
    let n = band.len();
    let sq: Vec<f64> = (0..n)
        .map(|i| {
            let d = band[(i + 1).min(n - 1)] - band[i.saturating_sub(1)];
            d * d
        })
        .collect();
    // centred moving average
    let w = ((cfg.smoothing_s * fs).round() as usize).max(1);
    let half = w / 2;
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + sq[i];
    }
    Ok((0..n)
        .map(|i| {
            let a = i.saturating_sub(half);
            let b = (i + half + 1).min(n);
            (prefix[b] - prefix[a]) / (b - a) as f64
        })
        .collect())
}

fn sliding_threshold(e: &[f64], fs: f64, cfg: &DetectorConfig) -> Vec<f64> {
    let n = e.len();
    let win = ((cfg.window_s * fs).round() as usize).min(n);
    let hop = ((cfg.hop_s * fs).round() as usize).max(1);
    let mut thr = vec![0.0; n];
    let mut centre: usize = 0;
    loop {
        let a = centre.saturating_sub(win / 2).min(n - win);
        let seg = &e[a..a + win];
        let med = median(seg);
        let dev: Vec<f64> = seg.iter().map(|v| (v - med).abs()).collect();
        let mad = median(&dev);
        let peak = seg.iter().fold(0.0f64, |m, v| m.max(*v));
        let t = (med + cfg.k * mad).max(cfg.relative_floor * peak);
        let lo = centre.saturating_sub(hop / 2);
        let hi = (centre + hop - hop / 2).min(n);
        thr[lo..hi].iter_mut().for_each(|v| *v = t);
        if hi >= n {
            break;
        }
        centre += hop;
    }
    thr
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RRSeries {
    pub intervals_ms: Vec<f64>,
    /// Index (into the peak list) of the peak that opens each interval.
    pub source_peak_index: Vec<usize>,
    pub corrected_mask: Vec<bool>,
}

impl RRSeries {
    pub fn from_intervals(intervals_ms: Vec<f64>) -> Self {
        let n = intervals_ms.len();
        Self {
            intervals_ms,
            source_peak_index: (0..n).collect(),
            corrected_mask: vec![false; n],
        }
    }

    pub fn len(&self) -> usize {
        self.intervals_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals_ms.is_empty()
    }

    pub fn n_corrected(&self) -> usize {
        self.corrected_mask.iter().filter(|&&c| c).count()
    }

    pub fn total_ms(&self) -> f64 {
        self.intervals_ms.iter().sum()
    }
}

/// `RR_i = (R_{i+1} - R_i) · 1000 / fs`.
pub fn compute_rr(peaks: &RPeakList) -> Result<RRSeries> {
    if peaks.len() < 2 {
        return Err(Error::InsufficientPeaks(peaks.len()));
    }
    let intervals_ms = peaks
        .indices
        .windows(2)
        .map(|w| (w[1] - w[0]) as f64 * 1000.0 / peaks.fs)
        .collect();
    Ok(RRSeries::from_intervals(intervals_ms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactMode {
    /// Replace flagged intervals by linear interpolation of clean neighbours.
    #[default]
    Interpolate,
    /// Drop flagged intervals.
    Remove,
}

pub fn mad_correct(rr: &RRSeries, threshold_multiplier: f64) -> Result<RRSeries> {
    mad_correct_with(rr, threshold_multiplier, ArtifactMode::Interpolate)
}

/// Flag intervals further than `multiplier · 1.4826 · MAD` from the median
/// (or outside 250–3000 ms), recomputing the statistics over the remaining
/// intervals until nothing new is flagged. Entries already marked as
/// corrected are treated as flagged from the start.
pub fn mad_correct_with(rr: &RRSeries, multiplier: f64, mode: ArtifactMode) -> Result<RRSeries> {
    let n = rr.len();
    if n < 4 {
        return Err(Error::InsufficientData(format!(
            "MAD correction needs at least 4 intervals, got {n}"
        )));
    }
    if !(multiplier > 0.0) {
        return Err(Error::InvalidArgument(format!("MAD multiplier {multiplier}")));
    }
    let v = &rr.intervals_ms;
    let mut flagged: Vec<bool> = (0..n)
        .map(|i| rr.corrected_mask[i] || !(RR_MIN_MS..=RR_MAX_MS).contains(&v[i]))
        .collect();
    loop {
        let good: Vec<f64> = (0..n).filter(|&i| !flagged[i]).map(|i| v[i]).collect();
        if good.is_empty() {
            return Err(Error::AllArtifact);
        }
        let med = median(&good);
        let dev: Vec<f64> = good.iter().map(|x| (x - med).abs()).collect();
        let bound = multiplier * MAD_TO_SIGMA * median(&dev).max(MAD_EPS);
        let mut changed = false;
        for i in 0..n {
            if !flagged[i] && (v[i] - med).abs() > bound {
                flagged[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if flagged.iter().all(|&f| f) {
        return Err(Error::AllArtifact);
    }

    match mode {
        ArtifactMode::Remove => {
            let keep: Vec<usize> = (0..n).filter(|&i| !flagged[i]).collect();
            Ok(RRSeries {
                intervals_ms: keep.iter().map(|&i| v[i]).collect(),
                source_peak_index: keep.iter().map(|&i| rr.source_peak_index[i]).collect(),
                corrected_mask: vec![false; keep.len()],
            })
        }
        ArtifactMode::Interpolate => {
            let mut out = v.clone();
            for i in (0..n).filter(|&i| flagged[i]) {
                let prev = (0..i).rev().find(|&j| !flagged[j]);
                let next = (i + 1..n).find(|&j| !flagged[j]);
                out[i] = match (prev, next) {
                    (Some(a), Some(b)) => v[a] + (v[b] - v[a]) * (i - a) as f64 / (b - a) as f64,
                    (Some(a), None) => v[a],
                    (None, Some(b)) => v[b],
                    (None, None) => unreachable!(),
                };
            }
            Ok(RRSeries {
                intervals_ms: out,
                source_peak_index: rr.source_peak_index.clone(),
                corrected_mask: flagged,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rr_from_peaks() {
        let rr = compute_rr(&RPeakList::new(vec![0, 250, 500], 250.0)).unwrap();
        assert_eq!(rr.intervals_ms, vec![1000.0, 1000.0]);
        let rr = compute_rr(&RPeakList::new(vec![0, 200, 450], 250.0)).unwrap();
        assert_eq!(rr.intervals_ms, vec![800.0, 1000.0]);
        assert!(matches!(
            compute_rr(&RPeakList::new(vec![10], 250.0)),
            Err(Error::InsufficientPeaks(1))
        ));
    }

    #[test]
    fn mad_replaces_single_outlier() {
        let rr = RRSeries::from_intervals(vec![800.0, 802.0, 798.0, 1500.0, 801.0]);
        let out = mad_correct(&rr, 3.5).unwrap();
        assert_eq!(out.intervals_ms, vec![800.0, 802.0, 798.0, 799.5, 801.0]);
        assert_eq!(out.corrected_mask, vec![false, false, false, true, false]);
    }

    #[test]
    fn mad_leaves_clean_series() {
        let rr = RRSeries::from_intervals(vec![800.0; 10]);
        let out = mad_correct(&rr, 3.5).unwrap();
        assert_eq!(out, rr);
        let rr = RRSeries::from_intervals(vec![800.0, 810.0, 790.0, 805.0]);
        assert_eq!(mad_correct(&rr, 3.5).unwrap(), rr);
    }

    #[test]
    fn mad_remove_mode_and_edges() {
        let rr = RRSeries::from_intervals(vec![2000.0, 800.0, 805.0, 795.0, 800.0, 100.0]);
        let out = mad_correct(&rr, 3.5).unwrap();
        assert_eq!(out.intervals_ms[0], 800.0);
        assert_eq!(out.intervals_ms[5], 800.0);
        let removed = mad_correct_with(&rr, 3.5, ArtifactMode::Remove).unwrap();
        assert_eq!(removed.intervals_ms, vec![800.0, 805.0, 795.0, 800.0]);
        assert_eq!(removed.source_peak_index, vec![1, 2, 3, 4]);
    }

    #[test]
    fn mad_all_artifact() {
        let rr = RRSeries::from_intervals(vec![100.0, 120.0, 4000.0, 90.0]);
        assert!(matches!(mad_correct(&rr, 3.5), Err(Error::AllArtifact)));
    }

    #[test]
    fn detector_rejects_flat_and_short() {
        let flat = SignalRecord::single("ecg", vec![0.0; 2500], 250.0).unwrap();
        assert!(matches!(detect_r_peaks(&flat), Err(Error::NoPeaks(_))));
        let short = SignalRecord::single("ecg", vec![0.0; 400], 250.0).unwrap();
        assert!(matches!(detect_r_peaks(&short), Err(Error::TooShort { .. })));
    }

    #[test]
    fn detector_finds_spikes() {
        let fs = 250.0;
        let mut x = vec![0.0; 2500];
        let truth: Vec<usize> = (0..10).map(|k| 100 + 230 * k).collect();
        for &t in &truth {
            for d in -5i64..=5 {
                let v = (-(d * d) as f64 / 8.0).exp();
                x[(t as i64 + d) as usize] += v;
            }
        }
        let rec = SignalRecord::single("ecg", x, fs).unwrap();
        let peaks = detect_r_peaks(&rec).unwrap();
        assert_eq!(peaks.indices, truth);
        assert!(peaks.confidence.iter().all(|c| (0.0..=1.0).contains(c)));
    }
}
