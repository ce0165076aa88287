use serde_json::json;

use super::{evaluate, split, train, EvalReport, FeatureTable, MedianImputer, ModelParams, SplitMode, TrainedEnsemble};
use crate::Result;

/// Single hold-out evaluation: split, impute with training medians, fit,
/// and score the held-out rows. The report's `protocol` records every
/// choice needed to rerun it.
pub fn holdout(
    table: &FeatureTable,
    params: &ModelParams,
    mode: SplitMode,
    test_fraction: f64,
    split_seed: u64,
) -> Result<(TrainedEnsemble, EvalReport)> {
    let (train_t, test_t) = split(table, mode, test_fraction, split_seed)?;
    let imputer = MedianImputer::fit(&train_t);
    let train_t = imputer.transform(&train_t)?;
    let test_t = imputer.transform(&test_t)?;
    let model = train(&train_t, params)?;
    let mut report = evaluate(&model, &test_t)?;
    report.protocol.extend([
        ("evaluation".into(), json!("holdout")),
        ("split_mode".into(), json!(mode)),
        ("test_fraction".into(), json!(test_fraction)),
        ("split_seed".into(), json!(split_seed)),
        ("n_train".into(), json!(train_t.n_rows())),
        ("n_test".into(), json!(test_t.n_rows())),
        ("n_features".into(), json!(table.n_features())),
        ("imputation".into(), json!("training-set median")),
        ("model".into(), serde_json::to_value(params).unwrap_or_default()),
    ]);
    Ok((model, report))
}
