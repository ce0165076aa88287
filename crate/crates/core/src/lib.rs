//! Cognitive-load estimation from synchronized ECG and EEG.
//!
//! The crate covers the whole offline pipeline:
//!
//! * [`signal`]: Butterworth/notch filtering, polyphase resampling, baseline
//!   correction and Welch spectra.
//! * [`ecg`]: R-peak detection, RR intervals and MAD artifact correction.
//! * [`hrv`]: time-domain, Poincaré and LF/HF heart-rate-variability measures.
//! * [`catch22`]: the 22 canonical time-series features.
//! * [`dataset`]: manifests, signal files and the 5-D trial tensor.
//! * [`ml`]: random forests, second-order gradient boosting and metrics.
//! * [`crossmodal`]: ECG→EEG / EEG→ECG transfer evaluation.
//! * [`features`]: per-trial ECG features and labelled feature frames.
//! * [`synth`]: ground-truth ECG/EEG generators and a coupled load dataset.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod catch22;
pub mod crossmodal;
pub mod dataset;
pub mod ecg;
mod error;
pub mod features;
pub mod hrv;
pub mod ml;
pub mod seed;
pub mod signal;
mod stats;
pub mod synth;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
