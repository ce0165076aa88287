use std::f64::consts::PI;

use cogload::signal::{
    baseline_correct, design_filter, filter_series, resample_series, welch_psd, BaselineWindow, FilterSpec,
    SignalRecord, WelchConfig,
};
use proptest::prelude::*;

fn sine(f: f64, fs: f64, n: usize, phase: f64) -> Vec<f64> {
    (0..n).map(|i| (2.0 * PI * f * i as f64 / fs + phase).sin()).collect()
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn passband_sines_keep_amplitude(f in 3.0f64..15.0, phase in 0.0f64..std::f64::consts::TAU, fs in prop::sample::select(vec![250.0, 256.0, 500.0])) {
        let c = design_filter(&FilterSpec::bandpass(0.5, 40.0, 2), fs).unwrap();
        let n = (8.0 * fs) as usize;
        let x = sine(f, fs, n, phase);
        let y = filter_series(&x, &c, true).unwrap();
        prop_assert_eq!(y.len(), n);
        let mid = n / 4..3 * n / 4;
        let ratio = rms(&y[mid.clone()]) / rms(&x[mid]);
        prop_assert!((ratio - 1.0).abs() < 0.05, "gain {} at {} Hz", ratio, f);
    }

    #[test]
    fn zero_phase_filtering_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let c = design_filter(&FilterSpec::bandpass(1.0, 45.0, 2), 256.0).unwrap();
        let mut s = seed | 1;
        let mut next = || { s ^= s << 13; s ^= s >> 7; s ^= s << 17; (s % 2000) as f64 / 1000.0 - 1.0 };
        let x: Vec<f64> = (0..600).map(|_| next()).collect();
        let y: Vec<f64> = (0..600).map(|_| next()).collect();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (fx, fy, fm) = (
            filter_series(&x, &c, true).unwrap(),
            filter_series(&y, &c, true).unwrap(),
            filter_series(&mix, &c, true).unwrap(),
        );
        for i in 0..600 {
            prop_assert!((fm[i] - (a * fx[i] + b * fy[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn resampled_length_and_tone(f in 2.0f64..20.0, n in 512usize..4096) {
        let x = sine(f, 256.0, n, 0.3);
        let y = resample_series(&x, 256.0, 128.0).unwrap();
        prop_assert_eq!(y.len(), (n as f64 / 2.0).round() as usize);
        let mid = y.len() / 4..3 * y.len() / 4;
        let expect = sine(f, 128.0, y.len(), 0.3);
        let err = rms(&y[mid.clone()].iter().zip(&expect[mid]).map(|(p, q)| p - q).collect::<Vec<_>>());
        prop_assert!(err < 0.02, "rms error {}", err);
    }

    #[test]
    fn baseline_window_mean_becomes_zero(offset in -100.0f64..100.0, start in 0.0f64..1.0) {
        let x: Vec<f64> = sine(5.0, 128.0, 384, 0.0).iter().map(|v| v + offset).collect();
        let rec = SignalRecord::single("Fz", x, 128.0).unwrap();
        let w = BaselineWindow::new(start, start + 1.0);
        let out = baseline_correct(&rec, w).unwrap();
        let a = (start * 128.0).round() as usize;
        let win = &out.channel(0)[a..a + 128];
        prop_assert!((win.iter().sum::<f64>() / 128.0).abs() < 1e-9);
    }

    #[test]
    fn welch_peak_sits_at_the_tone(f in 4.0f64..40.0) {
        let fs = 128.0;
        let x = sine(f, fs, 1024, 0.0);
        let psd = welch_psd(&x, fs, &WelchConfig::hann().with_segment(256)).unwrap();
        prop_assert!((psd.peak_frequency() - f).abs() <= psd.resolution());
    }
}

#[test]
fn notch_leaves_neighbouring_band() {
    let fs = 500.0;
    let c = design_filter(&FilterSpec::notch(50.0, 30.0), fs).unwrap();
    assert!(c.gain(50.0, fs) < 1e-6);
    assert!(c.gain(40.0, fs) > 0.95);
    assert!(c.gain(60.0, fs) > 0.95);
}
