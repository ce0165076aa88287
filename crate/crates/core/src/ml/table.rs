use std::collections::HashSet;

use rand::seq::SliceRandom;

use crate::seed;
use crate::{Error, Result};

/// Row-major feature matrix with labels, subject groups and row ids.
/// Missing values are stored as NaN; nothing else may be NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    names: Vec<String>,
    data: Vec<f64>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    groups: Vec<String>,
    ids: Vec<String>,
}

impl FeatureTable {
    pub fn new(
        names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        groups: Vec<String>,
    ) -> Result<Self> {
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::with_ids(names, rows, labels, class_names, groups, ids)
    }

    pub fn with_ids(
        names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        groups: Vec<String>,
        ids: Vec<String>,
    ) -> Result<Self> {
        let n = rows.len();
        let d = names.len();
        let mut seen = HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::InvalidArgument(format!("duplicate feature name {dup:?}")));
        }
        if labels.len() != n || groups.len() != n || ids.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{n} rows but {} labels, {} groups, {} ids",
                labels.len(),
                groups.len(),
                ids.len()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidArgument(format!(
                "label {l} out of range for {} classes",
                class_names.len()
            )));
        }
        let mut data = Vec::with_capacity(n * d);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != d {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has {} values for {d} features",
                    r.len()
                )));
            }
            if r.iter().any(|v| v.is_infinite()) {
                return Err(Error::InvalidArgument(format!("row {i} contains an infinite value")));
            }
            data.extend(r);
        }
        Ok(Self {
            names,
            data,
            labels,
            class_names,
            groups,
            ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.data[i * d..(i + 1) * d]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_features() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.value(i, j)).collect()
    }

    /// Column-major copy of the data.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.n_features()).map(|j| self.column(j)).collect()
    }

    /// `true` where a value is missing.
    pub fn missing_mask(&self) -> Vec<bool> {
        self.data.iter().map(|v| v.is_nan()).collect()
    }

    pub fn has_missing(&self) -> bool {
        self.data.iter().any(|v| v.is_nan())
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let d = self.n_features();
        let mut data = Vec::with_capacity(idx.len() * d);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            names: self.names.clone(),
            data,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            groups: idx.iter().map(|&i| self.groups[i].clone()).collect(),
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
        }
    }

    /// Reorder columns to `names`, failing with the full missing/extra lists
    /// when the schemas differ.
    pub fn align_to(&self, names: &[String]) -> Result<Self> {
        if names == self.names.as_slice() {
            return Ok(self.clone());
        }
        let have: HashSet<&str> = self.names.iter().map(String::as_str).collect();
        let want: HashSet<&str> = names.iter().map(String::as_str).collect();
        let missing: Vec<String> = names.iter().filter(|n| !have.contains(n.as_str())).cloned().collect();
        let extra: Vec<String> = self.names.iter().filter(|n| !want.contains(n.as_str())).cloned().collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(Error::FeatureAlignment { missing, extra });
        }
        let pos: Vec<usize> = names
            .iter()
            .map(|n| self.names.iter().position(|m| m == n).unwrap())
            .collect();
        self.map_columns(names.to_vec(), |row| pos.iter().map(|&j| row[j]).collect())
    }

    /// Keep only the named columns, in the given order.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let pos = names
            .iter()
            .map(|n| {
                self.names
                    .iter()
                    .position(|m| m == n.as_ref())
                    .ok_or_else(|| Error::FeatureAlignment {
                        missing: vec![n.as_ref().to_string()],
                        extra: vec![],
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let new_names = pos.iter().map(|&j| self.names[j].clone()).collect();
        self.map_columns(new_names, |row| pos.iter().map(|&j| row[j]).collect())
    }

    /// Same rows with new columns computed per row.
    pub fn map_columns<F>(&self, names: Vec<String>, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let rows = (0..self.n_rows()).map(|i| f(self.row(i))).collect();
        Self::with_ids(
            names,
            rows,
            self.labels.clone(),
            self.class_names.clone(),
            self.groups.clone(),
            self.ids.clone(),
        )
    }

    /// Same features, labels replaced.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n_rows() || labels.iter().any(|&l| l >= self.n_classes()) {
            return Err(Error::InvalidArgument("label vector does not fit table".into()));
        }
        Ok(Self {
            labels,
            ..self.clone()
        })
    }

    /// Subsample every class down to the smallest class count (seeded,
    /// original row order preserved).
    pub fn balance_classes(&self, seed_root: u64) -> Self {
        let counts = self.class_counts();
        let target = counts.iter().copied().filter(|&c| c > 0).min().unwrap_or(0);
        let mut keep = Vec::new();
        for class in 0..self.n_classes() {
            let mut idx: Vec<usize> = (0..self.n_rows()).filter(|&i| self.labels[i] == class).collect();
            let mut rng = seed::rng(seed_root, &[seed::str_key("balance"), class as u64]);
            idx.shuffle(&mut rng);
            idx.truncate(target);
            keep.extend(idx);
        }
        keep.sort_unstable();
        self.select_rows(&keep)
    }

    /// Row-wise concatenation; schemas and class lists must match.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.names != other.names || self.class_names != other.class_names {
            return Err(Error::InvalidArgument("cannot concatenate tables with different schemas".into()));
        }
        let mut out = self.clone();
        out.data.extend_from_slice(&other.data);
        out.labels.extend_from_slice(&other.labels);
        out.groups.extend(other.groups.iter().cloned());
        out.ids.extend(other.ids.iter().cloned());
        Ok(out)
    }
}
