//! The catch22 feature set.
//!
//! Output order is fixed to [`CATCH22_NAMES`]; downstream tables refer to
//! features by name. Each feature is computed on the z-scored series
//! (mean 0, sample standard deviation 1), matching the reference
//! implementation.
//!
//! To make the set exactly invariant under `a·x + b` (`a > 0`), the z-scored
//! values are rounded to a grid of 2⁻²⁴ before any feature sees them. That
//! perturbs each value by at most 3·10⁻⁸, well inside the tolerance used
//! against the reference vectors.
//!
//! Under a sign flip (`a < 0`) the two histogram modes and `CO_trev_1_num`
//! change sign (up to binning), the two `DN_OutlierInclude` features swap, and
//! the remaining features are unchanged except where they threshold on the
//! sign of a difference (`SB_BinaryStats_*`, `SB_MotifThree_quantile_hh`,
//! `SB_TransitionMatrix_3ac_sumdiagcov`).
//!
//! Features that cannot be evaluated (too few samples for the fluctuation
//! scales, constant input, non-finite results) are reported as NaN with the
//! corresponding `valid` flag cleared; they are never silently zeroed.

mod features;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};
use features as f;

pub const N_FEATURES: usize = 22;

pub const CATCH22_NAMES: [&str; N_FEATURES] = [
    "DN_HistogramMode_5",
    "DN_HistogramMode_10",
    "CO_f1ecac",
    "CO_FirstMin_ac",
    "CO_HistogramAMI_even_2_5",
    "CO_trev_1_num",
    "MD_hrv_classic_pnn40",
    "SB_BinaryStats_mean_longstretch1",
    "SB_TransitionMatrix_3ac_sumdiagcov",
    "PD_PeriodicityWang_th0_01",
    "CO_Embed2_Dist_tau_d_expfit_meandiff",
    "IN_AutoMutualInfoStats_40_gaussian_fmmi",
    "FC_LocalSimple_mean1_tauresrat",
    "DN_OutlierInclude_p_001_mdrmd",
    "DN_OutlierInclude_n_001_mdrmd",
    "SP_Summaries_welch_rect_area_5_1",
    "SB_BinaryStats_diff_longstretch0",
    "SB_MotifThree_quantile_hh",
    "SC_FluctAnal_2_rsrangefit_50_1_logi_prop_r1",
    "SC_FluctAnal_2_dfa_50_1_2_logi_prop_r1",
    "SP_Summaries_welch_rect_centroid",
    "FC_LocalSimple_mean3_stderr",
];

/// Minimum length at which every feature is defined.
pub const FULL_LENGTH: usize = 32;
const MIN_LENGTH: usize = 5;
const GRID: f64 = (1u64 << 24) as f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catch22Vector {
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

impl Catch22Vector {
    pub fn names() -> &'static [&'static str; N_FEATURES] {
        &CATCH22_NAMES
    }

    pub fn invalid() -> Self {
        Self {
            values: vec![f64::NAN; N_FEATURES],
            valid: vec![false; N_FEATURES],
        }
    }

    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        CATCH22_NAMES.iter().position(|n| *n == name).map(|i| self.values[i])
    }

    /// Value if valid, else `None`.
    pub fn checked(&self, idx: usize) -> Option<f64> {
        self.valid[idx].then_some(self.values[idx])
    }
}

/// `(x - mean) / sd` with the `n - 1` standard deviation.
pub fn zscore(series: &[f64]) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 2 {
        return Err(Error::DegenerateSeries(format!("length {n} is too short to standardize")));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSeries("series contains non-finite values".into()));
    }
    let m = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if !(sd > 0.0) || series.iter().all(|&v| v == series[0]) {
        return Err(Error::DegenerateSeries("zero variance".into()));
    }
    Ok(series.iter().map(|v| (v - m) / sd).collect())
}

/// Autocorrelation at lags `0..=max_lag` (mean removed, normalized to lag 0).
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag >= series.len() {
        return Err(Error::InvalidArgument(format!(
            "max lag {max_lag} must be below series length {}",
            series.len()
        )));
    }
    let mut ac = f::autocorrs(series);
    if ac[0].is_nan() {
        return Err(Error::DegenerateSeries("zero variance".into()));
    }
    ac.truncate(max_lag + 1);
    ac[0] = 1.0;
    Ok(ac)
}

fn snap(z: Vec<f64>) -> Vec<f64> {
    z.into_iter().map(|v| (v * GRID).round() / GRID).collect()
}

/// Evaluate the 22 features on `series`.
pub fn compute_catch22(series: &[f64]) -> Catch22Vector {
    let y = match zscore(series) {
        Ok(z) => snap(z),
        Err(_) => return Catch22Vector::invalid(),
    };
    if y.len() < MIN_LENGTH || y.iter().all(|&v| v == y[0]) {
        return Catch22Vector::invalid();
    }
    let y = y.as_slice();
    let values: Vec<f64> = vec![
        f::histogram_mode(y, 5),
        f::histogram_mode(y, 10),
        f::co_f1ecac(y),
        f::co_first_min_ac(y),
        f::co_histogram_ami_even_2_5(y),
        f::co_trev_1_num(y),
        f::md_hrv_classic_pnn40(y),
        f::sb_binary_stats_mean_longstretch1(y),
        f::sb_transition_matrix_3ac_sumdiagcov(y),
        f::pd_periodicity_wang_th0_01(y),
        f::co_embed2_dist_tau_d_expfit_meandiff(y),
        f::in_auto_mutual_info_stats_40_gaussian_fmmi(y),
        f::fc_local_simple_mean1_tauresrat(y),
        f::dn_outlier_include_001_mdrmd(y, 1.0),
        f::dn_outlier_include_001_mdrmd(y, -1.0),
        f::sp_summaries_welch_rect_area_5_1(y),
        f::sb_binary_stats_diff_longstretch0(y),
        f::sb_motif_three_quantile_hh(y),
        f::sc_fluct_anal_2_50_1_logi_prop_r1(y, 1, false),
        f::sc_fluct_anal_2_50_1_logi_prop_r1(y, 2, true),
        f::sp_summaries_welch_rect_centroid(y),
        f::fc_local_simple_mean3_stderr(y),
    ];
    let valid: Vec<bool> = values.iter().map(|v| v.is_finite()).collect();
    let values = values
        .into_iter()
        .zip(&valid)
        .map(|(v, &ok)| if ok { v } else { f64::NAN })
        .collect();
    Catch22Vector { values, valid }
}
