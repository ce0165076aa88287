use cogload::catch22::{compute_catch22, N_FEATURES};
use cogload::ecg::{compute_rr, mad_correct, mad_correct_with, ArtifactMode, RPeakList, RRSeries};
use cogload::hrv::{poincare, time_domain};
use proptest::prelude::*;

fn rr_series() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(400.0f64..1400.0, 2..200)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn poincare_identity(rr in rr_series()) {
        let td = time_domain(&RRSeries::from_intervals(rr)).unwrap();
        let p = poincare(td.sdnn, td.rmssd);
        prop_assert!(p.sd1 >= 0.0 && p.sd2 >= 0.0);
        if !p.clamped {
            let lhs = p.sd1 * p.sd1 + p.sd2 * p.sd2;
            let rhs = 2.0 * td.sdnn * td.sdnn;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }
    }

    #[test]
    fn offsets_leave_spread_unchanged(rr in rr_series(), shift in -300.0f64..300.0) {
        let a = time_domain(&RRSeries::from_intervals(rr.clone())).unwrap();
        let b = time_domain(&RRSeries::from_intervals(rr.iter().map(|v| v + shift).collect())).unwrap();
        prop_assert!((a.mean_nn + shift - b.mean_nn).abs() < 1e-9);
        prop_assert!((a.sdnn - b.sdnn).abs() < 1e-8);
        prop_assert!((a.rmssd - b.rmssd).abs() < 1e-8);
    }

    #[test]
    fn rr_from_peaks(gaps in prop::collection::vec(60usize..400, 1..60), fs in prop::sample::select(vec![250.0, 256.0, 500.0])) {
        let mut idx = vec![10usize];
        for g in &gaps {
            idx.push(idx.last().unwrap() + g);
        }
        let rr = compute_rr(&RPeakList::new(idx, fs)).unwrap();
        prop_assert_eq!(rr.len(), gaps.len());
        for (r, g) in rr.intervals_ms.iter().zip(&gaps) {
            prop_assert!((r - *g as f64 * 1000.0 / fs).abs() < 1e-9);
        }
    }

    #[test]
    fn single_ectopic_interval_is_flagged(base in 600.0f64..1000.0, n in 8usize..60, pos in 0usize..1000) {
        // small deterministic jitter around a steady rhythm
        let mut rr: Vec<f64> = (0..n).map(|i| base + 10.0 * ((i * 7 % 5) as f64 - 2.0)).collect();
        let k = pos % n;
        rr[k] = base * 1.9;
        let series = RRSeries::from_intervals(rr);
        let fixed = mad_correct(&series, 3.5).unwrap();
        prop_assert_eq!(fixed.len(), n);
        prop_assert!(fixed.corrected_mask[k]);
        prop_assert_eq!(fixed.n_corrected(), 1);
        prop_assert!((fixed.intervals_ms[k] - base).abs() < 40.0);
        let removed = mad_correct_with(&series, 3.5, ArtifactMode::Remove).unwrap();
        prop_assert_eq!(removed.len(), n - 1);
    }

    #[test]
    fn catch22_affine_invariance(
        x in prop::collection::vec(-10.0f64..10.0, 40..300),
        a in 0.001f64..1000.0,
        b in -1000.0f64..1000.0,
    ) {
        let fx = compute_catch22(&x);
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let fy = compute_catch22(&y);
        prop_assert_eq!(fx.values.len(), N_FEATURES);
        for k in 0..N_FEATURES {
            prop_assert_eq!(fx.values[k].to_bits(), fy.values[k].to_bits(), "feature {}", k);
            prop_assert_eq!(fx.valid[k], fy.valid[k]);
        }
    }
}

#[test]
fn constant_series_is_invalid_not_zero() {
    let f = compute_catch22(&[3.0; 100]);
    assert!(f.valid.iter().all(|v| !v));
    assert!(f.values.iter().all(|v| v.is_nan()));
}
