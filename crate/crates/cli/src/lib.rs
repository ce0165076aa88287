//! Batch front end: `synth`, `features`, `train-eval` and `transfer`.
//!
//! Each command writes its artifacts into an output directory. JSON and CSV
//! outputs embed a [`Provenance`] record and are byte-identical across runs
//! with the same inputs and seed; SVG plots differ at most in a timestamp
//! comment, which `--no-timestamp` removes.

pub mod args;
pub mod provenance;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use cogload::crossmodal::{build_eeg_features, eeg_feature_names, run_transfer_pair, Direction};
use cogload::dataset::{epoch_trials, load_manifest, EpochConfig, Modality, Task};
use cogload::features::{build_ecg_features, EcgFeatureConfig, FeatureFrame, FeatureSet};
use cogload::ml::{feature_importance, holdout, EvalReport, FeatureTable, ModelParams, SplitMode, TrainedEnsemble};
use cogload::seed;
use cogload::synth::{gen_coupled_dataset, CoupledLoadSpec};
use serde_json::json;

pub use args::{Cli, Command, FeaturesArgs, ModalitySel, SynthArgs, TrainEvalArgs, TransferArgs};
pub use provenance::Provenance;

pub const ECG_FEATURES_CSV: &str = "ecg_features.csv";
pub const EEG_FEATURES_CSV: &str = "eeg_features.csv";

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a).map(|_| ()),
        Command::Features(a) => cmd_features(&a),
        Command::TrainEval(a) => cmd_train_eval(&a).map(|_| ()),
        Command::Transfer(a) => cmd_transfer(&a).map(|_| ()),
    }
}

fn create_out(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn timestamp(suppress: bool) -> Option<u64> {
    if suppress {
        return None;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
}

pub fn cmd_synth(a: &SynthArgs) -> anyhow::Result<CoupledLoadSpec> {
    let mut spec = CoupledLoadSpec::preset(a.preset, a.subjects, a.trials, a.seed);
    if a.subject_noise {
        spec = spec.with_subject_noise();
    }
    spec.format = a.format;
    spec.validate()?;
    create_out(&a.out)?;
    gen_coupled_dataset(&spec, &a.out).context("generating dataset")?;
    let prov = Provenance::new("synth", a, a.seed)?;
    provenance::write_json(&a.out.join("synth.json"), &json!({ "provenance": prov, "spec": spec }))?;
    Ok(spec)
}

fn manifest_path(dataset: &Path) -> PathBuf {
    if dataset.is_dir() {
        dataset.join("manifest.json")
    } else {
        dataset.to_path_buf()
    }
}

pub fn cmd_features(a: &FeaturesArgs) -> anyhow::Result<()> {
    let path = manifest_path(&a.dataset);
    let manifest = load_manifest(&path).with_context(|| format!("loading dataset {}", path.display()))?;
    if manifest.events.is_empty() {
        bail!("no trials in dataset {}", path.display());
    }
    let mut prov = Provenance::new("features", a, 0)?;
    prov.add_dataset(&path, &manifest)?;
    create_out(&a.out)?;
    let cfg = EpochConfig::default();
    let comments = prov.comment_lines();
    let mut summary = serde_json::Map::new();

    if matches!(a.modality, ModalitySel::Ecg | ModalitySel::Both) {
        let tensor = epoch_trials(&manifest, Modality::Ecg, &cfg)?;
        let ecg_cfg = EcgFeatureConfig {
            pnn40: a.pnn40,
            ..Default::default()
        };
        let frame = build_ecg_features(&tensor, a.feature_set, &ecg_cfg)?;
        let out = a.out.join(ECG_FEATURES_CSV);
        frame.write_csv_with_comments(&out, &comments)?;
        summary.insert(
            "ecg".into(),
            json!({
                "file": ECG_FEATURES_CSV,
                "n_epochs": tensor.n_epochs(),
                "n_rows": frame.len(),
                "fs": tensor.fs(),
                "features": frame.names,
                "flags": frame.flag_names,
            }),
        );
    }
    if matches!(a.modality, ModalitySel::Eeg | ModalitySel::Both) {
        let tensor = epoch_trials(&manifest, Modality::Eeg, &cfg)?;
        let frame = build_eeg_features(&tensor)?;
        if frame.is_empty() {
            bail!("no trials with usable EEG");
        }
        let out = a.out.join(EEG_FEATURES_CSV);
        frame.write_csv_with_comments(&out, &comments)?;
        summary.insert(
            "eeg".into(),
            json!({
                "file": EEG_FEATURES_CSV,
                "n_epochs": tensor.n_epochs(),
                "n_rows": frame.len(),
                "n_excluded": tensor.n_epochs() - frame.len(),
                "fs": tensor.fs(),
                "features": frame.names,
                "flags": frame.flag_names,
            }),
        );
    }
    provenance::write_json(&a.out.join("features.json"), &json!({ "provenance": prov, "outputs": summary }))
}

fn read_frame(path: &Path, what: &str) -> anyhow::Result<FeatureFrame> {
    FeatureFrame::read_csv(path).with_context(|| format!("reading {what} features {}", path.display()))
}

fn is_eeg(frame: &FeatureFrame) -> bool {
    frame.names == eeg_feature_names()
}

/// Feature columns for `set` as present in an ECG frame (pNN40 joins the
/// HRV block when the frame has it).
fn ecg_columns(frame: &FeatureFrame, set: FeatureSet) -> Vec<String> {
    let mut cols = set.ecg_names();
    if set != FeatureSet::Catch22 && frame.names.iter().any(|n| n == "pnn40") {
        cols.insert(5, "pnn40".to_string());
    }
    cols
}

/// Build the task table; two-class baseline-vs-memory is balanced so chance
/// stays at 0.5.
fn task_table(frame: &FeatureFrame, task: Task, columns: &[String], root_seed: u64) -> anyhow::Result<FeatureTable> {
    let table = frame.to_table(task, Some(columns))?;
    Ok(if task == Task::Bc {
        table.balance_classes(seed::derive(root_seed, &[seed::str_key("balance")]))
    } else {
        table
    })
}

pub struct TrainEvalOutcome {
    pub model: TrainedEnsemble,
    pub report: EvalReport,
    /// Accuracy under each split mode, or the error that prevented it.
    pub split_comparison: Vec<(SplitMode, Result<EvalReport, String>)>,
}

fn other_mode(mode: SplitMode) -> SplitMode {
    match mode {
        SplitMode::TrialStratified => SplitMode::SubjectGrouped,
        SplitMode::SubjectGrouped => SplitMode::TrialStratified,
    }
}

fn summary(r: &EvalReport) -> serde_json::Value {
    json!({
        "accuracy": r.accuracy,
        "macro_f1": r.macro_f1,
        "weighted_f1": r.weighted_f1,
        "n_test": r.n_test,
    })
}

pub fn cmd_train_eval(a: &TrainEvalArgs) -> anyhow::Result<TrainEvalOutcome> {
    if !(a.test_fraction > 0.0 && a.test_fraction < 1.0) {
        bail!("--test-fraction must lie in (0, 1), got {}", a.test_fraction);
    }
    let frame = read_frame(&a.features, "input")?;
    let columns = if is_eeg(&frame) {
        if a.feature_set == FeatureSet::Hrv {
            bail!("feature set hrv is not available for EEG features ({})", a.features.display());
        }
        frame.names.clone()
    } else {
        ecg_columns(&frame, a.feature_set)
    };
    let table = task_table(&frame, a.task, &columns, a.seed)?;
    let mut prov = Provenance::new("train-eval", a, a.seed)?;
    prov.add_file(&a.features)?;

    let params = ModelParams::defaults(a.model, seed::derive(a.seed, &[seed::str_key("model")]));
    let split_seed = seed::derive(a.seed, &[seed::str_key("split")]);
    let (model, report) = holdout(&table, &params, a.split_mode, a.test_fraction, split_seed)?;
    let other = other_mode(a.split_mode);
    let other_result = holdout(&table, &params, other, a.test_fraction, split_seed)
        .map(|(_, r)| r)
        .map_err(|e| e.to_string());
    let mut split_comparison = vec![(a.split_mode, Ok(report.clone())), (other, other_result)];
    split_comparison.sort_by_key(|(m, _)| *m != SplitMode::TrialStratified);

    create_out(&a.out)?;
    let importance = feature_importance(&model);
    let comparison: serde_json::Map<String, serde_json::Value> = split_comparison
        .iter()
        .map(|(m, r)| {
            let v = match r {
                Ok(r) => summary(r),
                Err(e) => json!({ "error": e }),
            };
            (m.to_string(), v)
        })
        .collect();
    provenance::write_json(
        &a.out.join("metrics.json"),
        &json!({
            "provenance": prov,
            "task": a.task,
            "feature_set": a.feature_set,
            "n_rows": table.n_rows(),
            "class_counts": table.class_counts(),
            "report": report,
            "split_comparison": comparison,
            "feature_importance": importance
                .iter()
                .map(|(n, w)| json!({ "feature": n, "weight": w }))
                .collect::<Vec<_>>(),
        }),
    )?;
    model.save(&a.out.join("model.json"))?;
    write_confusion_csv(&a.out.join("confusion.csv"), &prov, &report)?;
    provenance::write_csv(
        &a.out.join("importance.csv"),
        &prov,
        &["feature".into(), "weight".into()],
        &importance.iter().map(|(n, w)| vec![n.clone(), w.to_string()]).collect::<Vec<_>>(),
    )?;
    let ts = timestamp(a.no_timestamp);
    let title = format!("{} {} {} ({})", a.task, a.feature_set, a.model, a.split_mode);
    provenance::write_text(
        &a.out.join("confusion.svg"),
        &svg::confusion_heatmap(&title, &report.class_names, &report.confusion_matrix, ts),
    )?;
    let top: Vec<(String, f64)> = importance.iter().take(20).cloned().collect();
    provenance::write_text(
        &a.out.join("importance.svg"),
        &svg::bar_chart(&format!("feature importance: {title}"), &top, ts),
    )?;
    Ok(TrainEvalOutcome {
        model,
        report,
        split_comparison,
    })
}

fn write_confusion_csv(path: &Path, prov: &Provenance, r: &EvalReport) -> anyhow::Result<()> {
    let mut header = vec!["true\\predicted".to_string()];
    header.extend(r.class_names.iter().cloned());
    let rows: Vec<Vec<String>> = r
        .class_names
        .iter()
        .zip(&r.confusion_matrix)
        .map(|(name, row)| std::iter::once(name.clone()).chain(row.iter().map(|n| n.to_string())).collect())
        .collect();
    provenance::write_csv(path, prov, &header, &rows)
}

fn direction_slug(d: Direction) -> &'static str {
    match d {
        Direction::EcgToEeg => "ecg_to_eeg",
        Direction::EegToEcg => "eeg_to_ecg",
    }
}

pub fn cmd_transfer(a: &TransferArgs) -> anyhow::Result<[EvalReport; 2]> {
    let ecg_frame = read_frame(&a.ecg, "ECG")?;
    let eeg_frame = read_frame(&a.eeg, "EEG")?;
    if is_eeg(&ecg_frame) {
        bail!("{} holds EEG features; --ecg needs an ECG feature table", a.ecg.display());
    }
    let ecg = task_table(&ecg_frame, a.task, &FeatureSet::Catch22.ecg_names(), a.seed)
        .with_context(|| format!("ECG table {}", a.ecg.display()))?;
    let eeg = task_table(&eeg_frame, a.task, &eeg_feature_names(), a.seed)
        .with_context(|| format!("EEG table {}", a.eeg.display()))?;
    let mut prov = Provenance::new("transfer", a, a.seed)?;
    prov.add_file(&a.ecg)?;
    prov.add_file(&a.eeg)?;

    let params = ModelParams::defaults(a.model, seed::derive(a.seed, &[seed::str_key("model")]));
    let reports = run_transfer_pair(a.alignment, a.standardization, a.task, &params, &ecg, &eeg)?;

    create_out(&a.out)?;
    let ts = timestamp(a.no_timestamp);
    let mut rows = Vec::new();
    for (dir, r) in [Direction::EcgToEeg, Direction::EegToEcg].into_iter().zip(&reports) {
        let slug = direction_slug(dir);
        provenance::write_json(
            &a.out.join(format!("transfer_{slug}.json")),
            &json!({ "provenance": prov, "direction": dir.to_string(), "report": r }),
        )?;
        write_confusion_csv(&a.out.join(format!("confusion_{slug}.csv")), &prov, r)?;
        provenance::write_text(
            &a.out.join(format!("confusion_{slug}.svg")),
            &svg::confusion_heatmap(&format!("{dir} {} ({})", a.task, a.alignment), &r.class_names, &r.confusion_matrix, ts),
        )?;
        rows.push(vec![
            dir.to_string(),
            r.accuracy.to_string(),
            r.macro_f1.to_string(),
            r.weighted_f1.to_string(),
            r.n_test.to_string(),
            (1.0 / r.class_names.len() as f64).to_string(),
        ]);
    }
    provenance::write_csv(
        &a.out.join("transfer_comparison.csv"),
        &prov,
        &["direction", "accuracy", "macro_f1", "weighted_f1", "n_test", "chance"].map(String::from),
        &rows,
    )?;
    Ok(reports)
}
