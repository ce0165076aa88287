use cogload::crossmodal::{build_eeg_features, EEG_FLAGS};
use cogload::dataset::{epoch_trials, load_manifest, EpochConfig, Modality, Task, EEG_CHANNELS};
use cogload::features::{build_ecg_features, common_trials, EcgFeatureConfig, FeatureFrame, FeatureSet};
use cogload::synth::{gen_coupled_dataset, CoupledLoadSpec, Preset};

#[test]
fn dataset_to_task_tables() {
    let dir = tempfile::tempdir().unwrap();
    let spec = CoupledLoadSpec::preset(Preset::Moderate, 2, 3, 5);
    gen_coupled_dataset(&spec, dir.path()).unwrap();
    let manifest = load_manifest(&dir.path().join("manifest.json")).unwrap();

    let cfg = EpochConfig::default();
    let ecg = epoch_trials(&manifest, Modality::Ecg, &cfg).unwrap();
    let eeg = epoch_trials(&manifest, Modality::Eeg, &cfg).unwrap();
    assert_eq!(ecg.n_epochs(), 24);
    assert_eq!(eeg.channel_names(), EEG_CHANNELS);
    assert_eq!(eeg.fs(), 128.0);
    assert_eq!(eeg.epoch_len(), 384);

    let ef = build_ecg_features(&ecg, FeatureSet::Both, &EcgFeatureConfig::default()).unwrap();
    let gf = build_eeg_features(&eeg).unwrap();
    assert_eq!(ef.names.len(), 27);
    assert_eq!(gf.names.len(), 110);
    assert_eq!(gf.flag_names, EEG_FLAGS);
    assert_eq!(ef.len(), 24);
    assert_eq!(gf.len(), 24);

    // 3 s at ~72-84 bpm: HRV comes from a handful of beats but is defined.
    assert!(ef.rows.iter().all(|r| r.values[..5].iter().all(|v| v.is_finite())));

    let path = dir.path().join("ecg.csv");
    ef.write_csv(&path).unwrap();
    let back = FeatureFrame::read_csv(&path).unwrap();
    assert_eq!(back.names, ef.names);
    assert_eq!(back.len(), ef.len());
    for (a, b) in back.rows.iter().zip(&ef.rows) {
        assert_eq!(a.id(), b.id());
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
        }
    }

    for (task, n) in [(Task::Mc, 18), (Task::Bc, 24), (Task::Fc, 24)] {
        let t = ef.to_table(task, None).unwrap();
        assert_eq!(t.n_rows(), n, "{task}");
        assert_eq!(t.class_names(), task.class_names().as_slice());
        assert_eq!(t.groups().iter().filter(|g| *g == "S01").count(), n / 2);
    }
    let hrv_only = ef.to_table(Task::Mc, Some(&FeatureSet::Hrv.ecg_names())).unwrap();
    assert_eq!(hrv_only.n_features(), 5);

    let (a, b) = common_trials(&ef, &gf);
    assert_eq!(a.len(), 24);
    assert!(a.rows.iter().zip(&b.rows).all(|(x, y)| x.id() == y.id()));
}

#[test]
fn regeneration_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = CoupledLoadSpec::preset(Preset::Null, 1, 2, 9);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    gen_coupled_dataset(&spec, &a).unwrap();
    gen_coupled_dataset(&spec, &b).unwrap();
    for entry in std::fs::read_dir(a.join("S01")).unwrap() {
        let p = entry.unwrap().path();
        let q = b.join("S01").join(p.file_name().unwrap());
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&q).unwrap(), "{}", p.display());
    }
}
