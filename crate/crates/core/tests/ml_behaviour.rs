#![allow(clippy::needless_range_loop)]

use cogload::ml::{
    evaluate, feature_importance, report_from_confusion, split, train_gradient_boosting, train_random_forest,
    FeatureTable, GradientBoostingParams, RandomForestParams, SplitMode, TrainedEnsemble,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn table(rows: Vec<Vec<f64>>, labels: Vec<usize>, k: usize) -> FeatureTable {
    let d = rows[0].len();
    let n = rows.len();
    FeatureTable::new(
        (0..d).map(|j| format!("f{j}")).collect(),
        rows,
        labels,
        (0..k).map(|c| format!("c{c}")).collect(),
        (0..n).map(|i| format!("S{}", i % 4)).collect(),
    )
    .unwrap()
}

/// Two 2-d Gaussian blobs whose means are `sep` standard deviations apart.
fn blobs(n: usize, sep: f64, seed: u64) -> FeatureTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let c = i % 2;
        let off = if c == 0 { -sep / 2.0 } else { sep / 2.0 };
        rows.push(vec![gauss(&mut rng) + off, gauss(&mut rng)]);
        labels.push(c);
    }
    table(rows, labels, 2)
}

fn small_rf(seed: u64) -> RandomForestParams {
    RandomForestParams {
        n_trees: 50,
        seed,
        ..Default::default()
    }
}

fn small_gb(seed: u64) -> GradientBoostingParams {
    GradientBoostingParams {
        n_rounds: 30,
        max_depth: 3,
        seed,
        ..Default::default()
    }
}

#[test]
fn separated_blobs_are_learned() {
    let train = blobs(200, 6.0, 1);
    let test = blobs(400, 6.0, 2);
    let rf = train_random_forest(&train, &small_rf(3)).unwrap();
    let gb = train_gradient_boosting(&train, &small_gb(3)).unwrap();
    assert!(evaluate(&rf, &test).unwrap().accuracy >= 0.99);
    assert!(evaluate(&gb, &test).unwrap().accuracy >= 0.99);
}

#[test]
fn permuted_labels_give_chance() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rows: Vec<Vec<f64>> = (0..1000).map(|_| (0..5).map(|_| gauss(&mut rng)).collect()).collect();
    let labels: Vec<usize> = (0..1000).map(|_| rng.random_range(0..4)).collect();
    let t = table(rows, labels, 4);
    let (train, test) = split(&t, SplitMode::TrialStratified, 0.4, 1).unwrap();
    let rf = train_random_forest(&train, &small_rf(1)).unwrap();
    let acc = evaluate(&rf, &test).unwrap().accuracy;
    assert!((acc - 0.25).abs() <= 0.1, "{acc}");
}

#[test]
fn stump_cannot_express_xor() {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..200 {
        let (a, b) = ((i % 2) as f64, ((i / 2) % 2) as f64);
        rows.push(vec![a + 0.01 * (i as f64 / 200.0), b]);
        labels.push(((i % 2) ^ ((i / 2) % 2)) as usize);
    }
    let t = table(rows, labels, 2);
    let stump = train_random_forest(
        &t,
        &RandomForestParams {
            n_trees: 1,
            max_depth: Some(1),
            features_per_split: Some(2),
            seed: 0,
            ..Default::default()
        },
    )
    .unwrap();
    let acc = evaluate(&stump, &t).unwrap().accuracy;
    assert!((acc - 0.5).abs() <= 0.05, "{acc}");
    let deep = train_random_forest(&t, &small_rf(0)).unwrap();
    assert_eq!(evaluate(&deep, &t).unwrap().accuracy, 1.0);
}

#[test]
fn boosting_loss_decreases() {
    let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64]).collect();
    let labels: Vec<usize> = (0..60).map(|i| usize::from(i >= 30)).collect();
    let m = train_gradient_boosting(&table(rows, labels, 2), &small_gb(0)).unwrap();
    assert!(m.train_loss.len() >= 10);
    for w in m.train_loss.windows(2).take(10) {
        assert!(w[1] < w[0], "{:?}", &m.train_loss[..11]);
    }
}

#[test]
fn huge_lambda_gives_uniform_prior() {
    let train = blobs(100, 4.0, 5);
    let m = train_gradient_boosting(
        &train,
        &GradientBoostingParams {
            lambda_l2: 1e9,
            ..small_gb(0)
        },
    )
    .unwrap();
    for p in m.predict_proba(&train).unwrap() {
        for v in p {
            assert!((v - 0.5).abs() < 1e-6);
        }
    }
}

fn single_informative(seed: u64) -> FeatureTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..400 {
        let c = i % 2;
        let mut r: Vec<f64> = (0..6).map(|_| gauss(&mut rng)).collect();
        r[3] += if c == 0 { -2.0 } else { 2.0 };
        rows.push(r);
        labels.push(c);
    }
    table(rows, labels, 2)
}

#[test]
fn importance_concentrates_on_signal() {
    let t = single_informative(11);
    for m in [
        train_gradient_boosting(&t, &small_gb(0)).unwrap(),
        train_random_forest(
            &t,
            &RandomForestParams {
                max_depth: Some(3),
                ..small_rf(0)
            },
        )
        .unwrap(),
    ] {
        let ranked = feature_importance(&m);
        assert_eq!(ranked[0].0, "f3");
        assert!(ranked[0].1 > 0.8, "{ranked:?}");
        let total: f64 = ranked.iter().map(|r| r.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn noise_importance_is_spread() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let d = 10;
    let rows: Vec<Vec<f64>> = (0..600).map(|_| (0..d).map(|_| gauss(&mut rng)).collect()).collect();
    let labels: Vec<usize> = (0..600).map(|_| rng.random_range(0..2)).collect();
    let m = train_random_forest(&table(rows, labels, 2), &small_rf(2)).unwrap();
    let max = m.importances.iter().cloned().fold(0.0, f64::max);
    assert!(max < 3.0 / d as f64, "{:?}", m.importances);
}

#[test]
fn duplicated_columns_share_weight() {
    let t = single_informative(13);
    let dup = t
        .map_columns(
            t.names().iter().cloned().chain(["f3_copy".to_string()]).collect(),
            |r| r.iter().copied().chain([r[3]]).collect(),
        )
        .unwrap();
    let single = train_gradient_boosting(&t, &small_gb(0)).unwrap();
    let double = train_gradient_boosting(&dup, &small_gb(0)).unwrap();
    let w = |m: &TrainedEnsemble, name: &str| {
        m.feature_names.iter().position(|n| n == name).map_or(0.0, |j| m.importances[j])
    };
    let combined = w(&double, "f3") + w(&double, "f3_copy");
    assert!((combined - w(&single, "f3")).abs() < 0.05);

    // with every feature a candidate, bagged trees split the same way
    let bagging = RandomForestParams {
        features_per_split: Some(usize::MAX),
        ..small_rf(4)
    };
    let single = train_random_forest(&t, &bagging).unwrap();
    let double = train_random_forest(&dup, &bagging).unwrap();
    let combined = w(&double, "f3") + w(&double, "f3_copy");
    assert!((combined - w(&single, "f3")).abs() < 0.05, "{combined} vs {}", w(&single, "f3"));

    // feature subsampling offers the signal more often once it is duplicated
    let single = train_random_forest(&t, &small_rf(4)).unwrap();
    let double = train_random_forest(&dup, &small_rf(4)).unwrap();
    assert!(w(&double, "f3_copy") > 0.1 && w(&double, "f3") > 0.1);
    assert!(w(&double, "f3") + w(&double, "f3_copy") >= w(&single, "f3"));
}

#[test]
fn serialized_models_predict_bitwise() {
    let train = blobs(150, 2.0, 21);
    let test = blobs(100, 2.0, 22);
    for m in [
        train_random_forest(&train, &small_rf(5)).unwrap(),
        train_gradient_boosting(&train, &small_gb(5)).unwrap(),
    ] {
        let back = TrainedEnsemble::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let a = m.predict_proba(&test).unwrap();
        let b = back.predict_proba(&test).unwrap();
        for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn training_is_deterministic() {
    let train = blobs(150, 1.0, 31);
    assert_eq!(
        train_random_forest(&train, &small_rf(9)).unwrap(),
        train_random_forest(&train, &small_rf(9)).unwrap()
    );
    assert_eq!(
        train_gradient_boosting(&train, &small_gb(9)).unwrap(),
        train_gradient_boosting(&train, &small_gb(9)).unwrap()
    );
}

#[test]
fn monotone_transform_keeps_confusion() {
    let train = blobs(200, 1.5, 41);
    let test = blobs(200, 1.5, 42);
    let warp = |t: &FeatureTable| {
        t.map_columns(t.names().to_vec(), |r| vec![r[0].exp(), r[1].powi(3) + 2.0 * r[1]])
            .unwrap()
    };
    for (a, b) in [
        (
            train_random_forest(&train, &small_rf(1)).unwrap(),
            train_random_forest(&warp(&train), &small_rf(1)).unwrap(),
        ),
        (
            train_gradient_boosting(&train, &small_gb(1)).unwrap(),
            train_gradient_boosting(&warp(&train), &small_gb(1)).unwrap(),
        ),
    ] {
        assert_eq!(
            evaluate(&a, &test).unwrap().confusion_matrix,
            evaluate(&b, &warp(&test)).unwrap().confusion_matrix
        );
    }
}

#[test]
fn schema_mismatch_is_reported() {
    let train = blobs(50, 3.0, 1);
    let m = train_random_forest(&train, &small_rf(0)).unwrap();
    let other = train.map_columns(vec!["f0".into(), "g".into()], |r| r.to_vec()).unwrap();
    let err = evaluate(&m, &other).unwrap_err().to_string();
    assert!(err.contains("missing: [f1]") && err.contains("extra: [g]"), "{err}");
}

#[test]
fn single_class_training_is_degenerate() {
    let t = table(vec![vec![1.0], vec![2.0]], vec![1, 1], 2);
    assert!(matches!(
        train_random_forest(&t, &small_rf(0)),
        Err(cogload::Error::DegenerateFit(_))
    ));
}

proptest! {
    #[test]
    fn metric_identities(cells in prop::collection::vec(0usize..20, 9)) {
        let k = 3;
        let m: Vec<Vec<usize>> = cells.chunks(k).map(|c| c.to_vec()).collect();
        let total: usize = cells.iter().sum();
        prop_assume!(total > 0);
        let r = report_from_confusion(m.clone(), vec!["a".into(), "b".into(), "c".into()]);
        let trace: usize = (0..k).map(|i| m[i][i]).sum();
        prop_assert!((r.accuracy - trace as f64 / total as f64).abs() <= 1e-12);

        let mut f1s = Vec::new();
        let mut supports = Vec::new();
        for c in 0..k {
            let tp = m[c][c] as f64;
            let fp: f64 = (0..k).filter(|&r| r != c).map(|r| m[r][c] as f64).sum();
            let fn_: f64 = (0..k).filter(|&j| j != c).map(|j| m[c][j] as f64).sum();
            let f1 = if tp == 0.0 { 0.0 } else { 2.0 * tp / (2.0 * tp + fp + fn_) };
            f1s.push(f1);
            supports.push(tp + fn_);
        }
        let macro_f1 = f1s.iter().sum::<f64>() / k as f64;
        let weighted: f64 = f1s.iter().zip(&supports).map(|(f, s)| f * s).sum::<f64>() / total as f64;
        prop_assert!((r.macro_f1 - macro_f1).abs() <= 1e-12);
        prop_assert!((r.weighted_f1 - weighted).abs() <= 1e-12);
        for (c, row) in m.iter().enumerate() {
            prop_assert_eq!(r.per_class[c].support, row.iter().sum::<usize>());
        }
        for v in [r.accuracy, r.macro_f1, r.weighted_f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
