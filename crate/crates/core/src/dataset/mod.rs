//! Ingestion, trial epoching and the subject × condition × subcondition ×
//! trial × time store.

mod io;
mod manifest;
mod tensor;

pub use io::{read_bsig, read_bsig_header, read_signal, write_bsig, write_signal, BsigHeader, SignalFormat};
pub use manifest::{load_manifest, Event, Manifest, Recording, Subject, MANIFEST_VERSION};
pub use tensor::{epoch_trials, EpochConfig, Trial, TrialTensor, EEG_CHANNELS, EEG_TARGET_FS};

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Modality {
    #[serde(rename = "ECG")]
    Ecg,
    #[serde(rename = "EEG")]
    Eeg,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::Ecg => "ECG",
            Modality::Eeg => "EEG",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    JustListen,
    Memory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subcondition {
    None,
    Five,
    Nine,
    Thirteen,
}

/// Condition plus digit load. `JustListen` always carries `None`; `Memory`
/// carries one of the three loads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConditionLabel {
    pub condition: Condition,
    pub subcondition: Subcondition,
}

impl ConditionLabel {
    pub const JUST_LISTEN: Self = Self {
        condition: Condition::JustListen,
        subcondition: Subcondition::None,
    };

    pub fn memory(load: Subcondition) -> Self {
        Self {
            condition: Condition::Memory,
            subcondition: load,
        }
    }

    /// The four labels in load order.
    pub fn all() -> [Self; 4] {
        [
            Self::JUST_LISTEN,
            Self::memory(Subcondition::Five),
            Self::memory(Subcondition::Nine),
            Self::memory(Subcondition::Thirteen),
        ]
    }

    pub fn is_valid(&self) -> bool {
        match self.condition {
            Condition::JustListen => self.subcondition == Subcondition::None,
            Condition::Memory => self.subcondition != Subcondition::None,
        }
    }

    /// Short name: `JustListen`, `Five`, `Nine` or `Thirteen`.
    pub fn name(&self) -> &'static str {
        match (self.condition, self.subcondition) {
            (Condition::JustListen, _) => "JustListen",
            (_, Subcondition::Five) => "Five",
            (_, Subcondition::Nine) => "Nine",
            (_, Subcondition::Thirteen) => "Thirteen",
            (Condition::Memory, Subcondition::None) => "Memory",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::all().into_iter().find(|l| l.name() == name)
    }
}

impl fmt::Display for ConditionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The three classification tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Memory load: Five vs Nine vs Thirteen (memory trials only).
    Mc,
    /// Baseline vs any memory load.
    Bc,
    /// All four conditions.
    Fc,
}

impl Task {
    pub fn class_names(&self) -> Vec<String> {
        let names: &[&str] = match self {
            Task::Mc => &["Five", "Nine", "Thirteen"],
            Task::Bc => &["JustListen", "Memory"],
            Task::Fc => &["JustListen", "Five", "Nine", "Thirteen"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    /// Class index of `label` under this task, or `None` if the task
    /// excludes it.
    pub fn class_of(&self, label: &ConditionLabel) -> Option<usize> {
        let load = match label.subcondition {
            Subcondition::None => None,
            Subcondition::Five => Some(0),
            Subcondition::Nine => Some(1),
            Subcondition::Thirteen => Some(2),
        };
        match (self, label.condition) {
            (Task::Mc, Condition::Memory) => load,
            (Task::Mc, Condition::JustListen) => None,
            (Task::Bc, Condition::JustListen) => Some(0),
            (Task::Bc, Condition::Memory) => Some(1),
            (Task::Fc, Condition::JustListen) => Some(0),
            (Task::Fc, Condition::Memory) => load.map(|l| l + 1),
        }
    }

    pub fn n_classes(&self) -> usize {
        self.class_names().len()
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Mc => "mc",
            Task::Bc => "bc",
            Task::Fc => "fc",
        })
    }
}

impl std::str::FromStr for Task {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mc" => Ok(Task::Mc),
            "bc" => Ok(Task::Bc),
            "fc" => Ok(Task::Fc),
            other => Err(crate::Error::InvalidArgument(format!("unknown task {other}"))),
        }
    }
}
