//! Heart-rate-variability features: time domain, Poincaré descriptors and
//! LF/HF spectral power of the interpolated tachogram.

use serde::{Deserialize, Serialize};

use crate::ecg::RRSeries;
use crate::signal::{welch_psd, WelchConfig};
use crate::stats::{mean, sample_std};
use crate::{Error, Result};

pub const LF_BAND: (f64, f64) = (0.04, 0.15);
pub const HF_BAND: (f64, f64) = (0.15, 0.40);
pub const TACHOGRAM_FS: f64 = 4.0;
pub const PNN_THRESHOLD_MS: f64 = 40.0;

/// The five baseline HRV measures, in column order.
pub const HRV5_NAMES: [&str; 5] = ["mean_nn", "sdnn", "rmssd", "sd1", "sd2"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeDomain {
    pub mean_nn: f64,
    pub sdnn: f64,
    pub rmssd: f64,
    pub pnn40: f64,
}

/// Mean NN, SDNN (`n - 1` denominator), RMSSD (mean over the `n - 1`
/// successive differences) and the fraction of differences above 40 ms.
pub fn time_domain(rr: &RRSeries) -> Result<TimeDomain> {
    let x = &rr.intervals_ms;
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "time-domain HRV needs at least 2 intervals, got {}",
            x.len()
        )));
    }
    let diffs: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let nd = diffs.len() as f64;
    Ok(TimeDomain {
        mean_nn: mean(x),
        sdnn: sample_std(x),
        rmssd: (diffs.iter().map(|d| d * d).sum::<f64>() / nd).sqrt(),
        pnn40: diffs.iter().filter(|d| d.abs() > PNN_THRESHOLD_MS).count() as f64 / nd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Poincare {
    pub sd1: f64,
    pub sd2: f64,
    /// Set when `2·sdnn² − 0.5·rmssd²` was negative and SD2 was clamped to 0.
    pub clamped: bool,
}

pub fn poincare(sdnn: f64, rmssd: f64) -> Poincare {
    let sd1 = 0.5f64.sqrt() * rmssd;
    let radicand = 2.0 * sdnn * sdnn - 0.5 * rmssd * rmssd;
    Poincare {
        sd1,
        sd2: radicand.max(0.0).sqrt(),
        clamped: radicand < 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reliability {
    /// At least 60 s of RR data.
    Reliable,
    /// 10–60 s: computed from a single spectral segment.
    Short,
    /// Under 10 s.
    Unreliable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyDomain {
    pub lf: f64,
    pub hf: f64,
    /// `+inf` when `hf == 0` (see `hf_zero`).
    pub lf_hf: f64,
    pub hf_zero: bool,
    pub reliability: Reliability,
    pub duration_s: f64,
}

/// LF and HF power (ms²) of the RR tachogram, cubic-spline interpolated to
/// 4 Hz and estimated with a Hann-windowed Welch periodogram.
pub fn frequency_domain(rr: &RRSeries) -> Result<FrequencyDomain> {
    let x = &rr.intervals_ms;
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "spectral HRV needs at least 2 intervals, got {}",
            x.len()
        )));
    }
    let mut t = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    for v in x {
        acc += v / 1000.0;
        t.push(acc);
    }
    let duration_s = acc;
    let reliability = if duration_s >= 60.0 {
        Reliability::Reliable
    } else if duration_s >= 10.0 {
        Reliability::Short
    } else {
        Reliability::Unreliable
    };

    let spline = NaturalSpline::new(&t, x);
    let n = ((t[t.len() - 1] - t[0]) * TACHOGRAM_FS).floor() as usize + 1;
    let mut tach: Vec<f64> = (0..n).map(|i| spline.eval(t[0] + i as f64 / TACHOGRAM_FS)).collect();
    let m = mean(&tach);
    tach.iter_mut().for_each(|v| *v -= m);

    let constant = x.iter().all(|v| *v == x[0]);
    let (lf, hf) = if n < 8 || constant {
        (0.0, 0.0)
    } else {
        let mut cfg = WelchConfig::hann();
        if reliability != Reliability::Reliable {
            cfg = cfg.with_segment(n);
        }
        let psd = welch_psd(&tach, TACHOGRAM_FS, &cfg)?;
        (psd.band_power(LF_BAND.0, LF_BAND.1), psd.band_power(HF_BAND.0, HF_BAND.1))
    };
    let hf_zero = hf <= 0.0;
    Ok(FrequencyDomain {
        lf,
        hf,
        lf_hf: if hf_zero { f64::INFINITY } else { lf / hf },
        hf_zero,
        reliability: if n < 8 { Reliability::Unreliable } else { reliability },
        duration_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HrvFeatures {
    pub mean_nn: f64,
    pub sdnn: f64,
    pub rmssd: f64,
    pub sd1: f64,
    pub sd2: f64,
    pub pnn40: f64,
    pub lf: f64,
    pub hf: f64,
    pub lf_hf: f64,
    pub sd2_clamped: bool,
    pub hf_zero: bool,
    pub reliability: Reliability,
}

impl HrvFeatures {
    pub fn hrv5(&self) -> [f64; 5] {
        [self.mean_nn, self.sdnn, self.rmssd, self.sd1, self.sd2]
    }
}

pub fn compute_hrv(rr: &RRSeries) -> Result<HrvFeatures> {
    let td = time_domain(rr)?;
    let pc = poincare(td.sdnn, td.rmssd);
    let fd = frequency_domain(rr)?;
    Ok(HrvFeatures {
        mean_nn: td.mean_nn,
        sdnn: td.sdnn,
        rmssd: td.rmssd,
        sd1: pc.sd1,
        sd2: pc.sd2,
        pnn40: td.pnn40,
        lf: fd.lf,
        hf: fd.hf,
        lf_hf: fd.lf_hf,
        sd2_clamped: pc.clamped,
        hf_zero: fd.hf_zero,
        reliability: fd.reliability,
    })
}

/// Natural cubic spline through strictly increasing knots.
struct NaturalSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl NaturalSpline {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal system for the interior second derivatives
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            let mut upper = vec![0.0; k];
            for i in 0..k {
                let h0 = x[i + 1] - x[i];
                let h1 = x[i + 2] - x[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
            }
            for i in 1..k {
                let lower = x[i + 1] - x[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a.powi(3) - a) * self.m[i] + (b.powi(3) - b) * self.m[i + 1]) * h * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rr(v: &[f64]) -> RRSeries {
        RRSeries::from_intervals(v.to_vec())
    }

    #[test]
    fn time_domain_examples() {
        let td = time_domain(&rr(&[800.0, 800.0, 800.0])).unwrap();
        assert_eq!((td.mean_nn, td.sdnn, td.rmssd, td.pnn40), (800.0, 0.0, 0.0, 0.0));
        let td = time_domain(&rr(&[790.0, 810.0])).unwrap();
        assert_eq!(td.mean_nn, 800.0);
        assert!((td.sdnn - 14.142135623730951).abs() < 1e-12);
        let td = time_domain(&rr(&[800.0, 810.0, 790.0])).unwrap();
        assert!((td.rmssd - 250f64.sqrt()).abs() < 1e-12);
        assert_eq!(td.pnn40, 0.0);
        assert!(matches!(time_domain(&rr(&[800.0])), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn pnn40_is_strict() {
        let td = time_domain(&rr(&[800.0, 840.0, 881.0])).unwrap();
        assert_eq!(td.pnn40, 0.5);
    }

    #[test]
    fn poincare_examples() {
        assert_eq!(poincare(0.0, 0.0), Poincare { sd1: 0.0, sd2: 0.0, clamped: false });
        let p = poincare(8.1650, 15.8114);
        assert!((p.sd1 - 11.1803).abs() < 1e-4);
        assert!((p.sd2 - 2.8868).abs() < 1e-3, "{}", p.sd2);
        let p = poincare(1.0, 10.0);
        assert_eq!(p.sd2, 0.0);
        assert!(p.clamped);
    }

    fn modulated(freq: f64, seconds: f64) -> RRSeries {
        let mut v = Vec::new();
        let mut t = 0.0;
        while t < seconds {
            let r = 1000.0 + 50.0 * (2.0 * PI * freq * t).sin();
            v.push(r);
            t += r / 1000.0;
        }
        rr(&v)
    }

    #[test]
    fn lf_and_hf_modulation() {
        let lf = frequency_domain(&modulated(0.1, 300.0)).unwrap();
        assert!(lf.lf_hf > 10.0, "{lf:?}");
        assert_eq!(lf.reliability, Reliability::Reliable);
        let hf = frequency_domain(&modulated(0.3, 300.0)).unwrap();
        assert!(hf.lf_hf < 0.1, "{hf:?}");
    }

    #[test]
    fn constant_rr_is_flagged() {
        let fd = frequency_domain(&rr(&[800.0; 100])).unwrap();
        assert_eq!((fd.lf, fd.hf), (0.0, 0.0));
        assert!(fd.hf_zero);
        assert!(fd.lf_hf.is_infinite());
    }

    #[test]
    fn short_windows_flagged() {
        let fd = frequency_domain(&rr(&[800.0, 820.0, 790.0, 805.0])).unwrap();
        assert_eq!(fd.reliability, Reliability::Unreliable);
        let fd = frequency_domain(&modulated(0.1, 30.0)).unwrap();
        assert_eq!(fd.reliability, Reliability::Short);
    }

    #[test]
    fn spline_interpolates_knots_and_cubics() {
        let x = [0.0, 1.0, 2.5, 3.0, 5.0];
        let y = [1.0, -2.0, 0.5, 4.0, 3.0];
        let s = NaturalSpline::new(&x, &y);
        for (a, b) in x.iter().zip(&y) {
            assert!((s.eval(*a) - b).abs() < 1e-12);
        }
        // a straight line is reproduced everywhere
        let s = NaturalSpline::new(&x, &x.map(|v| 2.0 * v + 1.0));
        assert!((s.eval(3.7) - 8.4).abs() < 1e-12);
    }
}
