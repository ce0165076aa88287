use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ensemble::TrainedEnsemble;
use super::FeatureTable;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    /// Two-class tasks only, and only when both classes occur in the test set.
    pub roc_auc: Option<f64>,
    pub class_names: Vec<String>,
    /// Rows are true classes, columns predicted.
    pub confusion_matrix: Vec<Vec<usize>>,
    pub per_class: Vec<ClassMetrics>,
    pub n_test: usize,
    /// Free-form description of how the numbers were produced.
    #[serde(default)]
    pub protocol: BTreeMap<String, serde_json::Value>,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Metrics from a confusion matrix. Precision, recall and F1 of a class with
/// an empty denominator are 0.
pub fn report_from_confusion(confusion: Vec<Vec<usize>>, class_names: Vec<String>) -> EvalReport {
    let k = confusion.len();
    let total: usize = confusion.iter().flatten().sum();
    let trace: usize = (0..k).map(|i| confusion[i][i]).sum();
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = confusion[c][c];
            let support: usize = confusion[c].iter().sum();
            let predicted: usize = (0..k).map(|r| confusion[r][c]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                class: class_names[c].clone(),
                precision,
                recall,
                f1,
                support,
            }
        })
        .collect();
    let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / k as f64;
    let weighted_f1 = per_class
        .iter()
        .map(|m| m.f1 * m.support as f64)
        .sum::<f64>()
        / total.max(1) as f64;
    EvalReport {
        accuracy: ratio(trace, total),
        macro_f1,
        weighted_f1,
        roc_auc: None,
        class_names,
        confusion_matrix: confusion,
        per_class,
        n_test: total,
        protocol: BTreeMap::new(),
    }
}

pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; n_classes]; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        m[t][p] += 1;
    }
    m
}

/// Area under the ROC curve of `scores` for positives (`y == 1`), computed
/// as the Mann-Whitney statistic with midranks for ties.
pub fn roc_auc(y_true: &[usize], scores: &[f64]) -> Option<f64> {
    let n_pos = y_true.iter().filter(|&&y| y == 1).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &t in &idx[i..=j] {
            ranks[t] = r;
        }
        i = j + 1;
    }
    let rank_sum: f64 = (0..scores.len()).filter(|&t| y_true[t] == 1).map(|t| ranks[t]).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos * n_neg) as f64)
}

/// Evaluate `model` on `test`, whose columns must match the training
/// schema by name.
pub fn evaluate(model: &TrainedEnsemble, test: &FeatureTable) -> Result<EvalReport> {
    if test.n_rows() == 0 {
        return Err(Error::InvalidArgument("empty test table".into()));
    }
    if test.class_names() != model.class_names.as_slice() {
        return Err(Error::Task(format!(
            "test classes {:?} differ from model classes {:?}",
            test.class_names(),
            model.class_names
        )));
    }
    let proba = model.predict_proba(test)?;
    let pred: Vec<usize> = proba.iter().map(|p| super::ensemble::argmax(p)).collect();
    let k = model.n_classes();
    let mut report = report_from_confusion(confusion_matrix(test.labels(), &pred, k), model.class_names.clone());
    if k == 2 {
        let s: Vec<f64> = proba.iter().map(|p| p[1]).collect();
        report.roc_auc = roc_auc(test.labels(), &s);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_binary() {
        let r = report_from_confusion(vec![vec![8, 2], vec![3, 7]], vec!["a".into(), "b".into()]);
        assert_eq!(r.accuracy, 0.75);
        let f0 = 2.0 * (8.0 / 11.0) * 0.8 / (8.0 / 11.0 + 0.8);
        assert!((r.per_class[0].f1 - f0).abs() < 1e-15);
        assert!((r.per_class[0].f1 - 0.7619).abs() < 1e-4);
        assert!((r.per_class[1].f1 - 0.7368).abs() < 1e-4);
        assert!((r.macro_f1 - 0.7494).abs() < 1e-4);
    }

    #[test]
    fn all_one_class_predictions() {
        let y = [0, 0, 1, 1, 2, 2];
        let p = [1; 6];
        let r = report_from_confusion(confusion_matrix(&y, &p, 3), vec!["a".into(), "b".into(), "c".into()]);
        assert_eq!(r.per_class[1].recall, 1.0);
        assert_eq!(r.per_class[0].f1, 0.0);
        assert_eq!(r.per_class[2].f1, 0.0);
    }

    #[test]
    fn auc_with_ties() {
        assert_eq!(roc_auc(&[0, 0, 1, 1], &[0.1, 0.2, 0.8, 0.9]), Some(1.0));
        assert_eq!(roc_auc(&[0, 1], &[0.5, 0.5]), Some(0.5));
        assert_eq!(roc_auc(&[1, 0, 1, 0], &[0.1, 0.2, 0.3, 0.4]), Some(0.25));
        assert_eq!(roc_auc(&[1, 1], &[0.1, 0.2]), None);
    }
}
