use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::FeatureTable;
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Per-class shuffle; class proportions preserved within one instance.
    TrialStratified,
    /// Whole subjects go to one side.
    SubjectGrouped,
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitMode::TrialStratified => "trial_stratified",
            SplitMode::SubjectGrouped => "subject_grouped",
        })
    }
}

impl std::str::FromStr for SplitMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trial_stratified" | "stratified" => Ok(SplitMode::TrialStratified),
            "subject_grouped" | "grouped" => Ok(SplitMode::SubjectGrouped),
            other => Err(Error::InvalidArgument(format!("unknown split mode {other}"))),
        }
    }
}

/// Train and test row indices, each ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn split_indices(table: &FeatureTable, mode: SplitMode, test_fraction: f64, seed_root: u64) -> Result<SplitIndices> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Split(format!("test fraction {test_fraction} not in (0, 1)")));
    }
    let counts = table.class_counts();
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::Split("need at least two classes".into()));
    }
    let mut test = match mode {
        SplitMode::TrialStratified => stratified(table, &counts, test_fraction, seed_root)?,
        SplitMode::SubjectGrouped => grouped(table, test_fraction, seed_root)?,
    };
    test.sort_unstable();
    let in_test: BTreeSet<usize> = test.iter().copied().collect();
    let train = (0..table.n_rows()).filter(|i| !in_test.contains(i)).collect();
    Ok(SplitIndices { train, test })
}

/// Materialized `(train, test)` tables.
pub fn split(table: &FeatureTable, mode: SplitMode, test_fraction: f64, seed_root: u64) -> Result<(FeatureTable, FeatureTable)> {
    let s = split_indices(table, mode, test_fraction, seed_root)?;
    Ok((table.select_rows(&s.train), table.select_rows(&s.test)))
}

fn stratified(table: &FeatureTable, counts: &[usize], frac: f64, seed_root: u64) -> Result<Vec<usize>> {
    let mut test = Vec::new();
    for (class, &n) in counts.iter().enumerate() {
        if n == 0 {
            continue;
        }
        if n < 2 {
            return Err(Error::Split(format!(
                "class {:?} has {n} instance; stratification needs at least 2",
                table.class_names()[class]
            )));
        }
        let mut idx: Vec<usize> = (0..table.n_rows()).filter(|&i| table.labels()[i] == class).collect();
        let mut rng = seed::rng(seed_root, &[seed::str_key("stratified"), class as u64]);
        idx.shuffle(&mut rng);
        let k = ((n as f64 * frac).round() as usize).clamp(1, n - 1);
        test.extend_from_slice(&idx[..k]);
    }
    Ok(test)
}

fn grouped(table: &FeatureTable, frac: f64, seed_root: u64) -> Result<Vec<usize>> {
    let mut class_subjects: BTreeMap<usize, BTreeSet<&str>> = BTreeMap::new();
    for (l, g) in table.labels().iter().zip(table.groups()) {
        class_subjects.entry(*l).or_default().insert(g.as_str());
    }
    for (class, subs) in &class_subjects {
        if subs.len() < 2 {
            return Err(Error::Split(format!(
                "class {:?} appears in {} subject(s); grouping needs at least 2",
                table.class_names()[*class],
                subs.len()
            )));
        }
    }
    let mut subjects: Vec<&str> = table
        .groups()
        .iter()
        .map(String::as_str)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut rng = seed::rng(seed_root, &[seed::str_key("grouped")]);
    subjects.shuffle(&mut rng);
    let k = ((subjects.len() as f64 * frac).round() as usize).clamp(1, subjects.len() - 1);
    let test_subjects: BTreeSet<&str> = subjects[..k].iter().copied().collect();
    Ok((0..table.n_rows())
        .filter(|&i| test_subjects.contains(table.groups()[i].as_str()))
        .collect())
}
