use serde::{Deserialize, Serialize};

use super::FeatureTable;
use crate::stats::{median_sorted, quantile_sorted};
use crate::Result;

fn sorted_present(table: &FeatureTable, j: usize) -> Vec<f64> {
    let mut v: Vec<f64> = table.column(j).into_iter().filter(|x| !x.is_nan()).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Replaces missing values with per-column medians learned from the
/// training table only. A column with no observed values imputes 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianImputer {
    pub names: Vec<String>,
    pub medians: Vec<f64>,
}

impl MedianImputer {
    pub fn fit(train: &FeatureTable) -> Self {
        let medians = (0..train.n_features())
            .map(|j| {
                let v = sorted_present(train, j);
                if v.is_empty() {
                    0.0
                } else {
                    median_sorted(&v)
                }
            })
            .collect();
        Self {
            names: train.names().to_vec(),
            medians,
        }
    }

    pub fn transform(&self, table: &FeatureTable) -> Result<FeatureTable> {
        let t = table.align_to(&self.names)?;
        t.map_columns(self.names.clone(), |row| {
            row.iter()
                .zip(&self.medians)
                .map(|(&v, &m)| if v.is_nan() { m } else { v })
                .collect()
        })
    }
}

/// Per-feature `(x - median) / IQR`. A zero IQR leaves the column
/// centred but unscaled. Missing values stay missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustScaler {
    pub names: Vec<String>,
    pub centers: Vec<f64>,
    pub scales: Vec<f64>,
}

impl RobustScaler {
    pub fn fit(table: &FeatureTable) -> Self {
        let (centers, scales) = (0..table.n_features())
            .map(|j| {
                let v = sorted_present(table, j);
                if v.is_empty() {
                    return (0.0, 1.0);
                }
                let iqr = quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25);
                (median_sorted(&v), if iqr > 0.0 { iqr } else { 1.0 })
            })
            .unzip();
        Self {
            names: table.names().to_vec(),
            centers,
            scales,
        }
    }

    pub fn transform(&self, table: &FeatureTable) -> Result<FeatureTable> {
        let t = table.align_to(&self.names)?;
        t.map_columns(self.names.clone(), |row| {
            row.iter()
                .zip(self.centers.iter().zip(&self.scales))
                .map(|(&v, (&c, &s))| (v - c) / s)
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(rows: Vec<Vec<f64>>) -> FeatureTable {
        let n = rows.len();
        FeatureTable::new(
            vec!["a".into(), "b".into()],
            rows,
            vec![0; n],
            vec!["c".into()],
            vec!["g".into(); n],
        )
        .unwrap()
    }

    #[test]
    fn imputer_uses_training_medians_only() {
        let train = t(vec![vec![1.0, f64::NAN], vec![3.0, 10.0], vec![100.0, f64::NAN]]);
        let imp = MedianImputer::fit(&train);
        assert_eq!(imp.medians, vec![3.0, 10.0]);
        let test_a = t(vec![vec![f64::NAN, f64::NAN]]);
        let test_b = t(vec![vec![f64::NAN, f64::NAN], vec![1e9, -1e9]]);
        assert_eq!(imp.transform(&test_a).unwrap().row(0), &[3.0, 10.0]);
        assert_eq!(imp.transform(&test_b).unwrap().row(0), &[3.0, 10.0]);
        assert!(!imp.transform(&train).unwrap().has_missing());
    }

    #[test]
    fn robust_scaling() {
        let tab = t(vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0], vec![4.0, 5.0], vec![5.0, 5.0]]);
        let s = RobustScaler::fit(&tab);
        assert_eq!(s.centers, vec![3.0, 5.0]);
        assert_eq!(s.scales, vec![2.0, 1.0]);
        let out = s.transform(&tab).unwrap();
        assert_eq!(out.column(0), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(out.column(1), vec![0.0; 5]);
    }
}
