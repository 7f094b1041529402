use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    JustListen,
    Memorize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Subcondition {
    Five,
    Nine,
    Thirteen,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::JustListen, Condition::Memorize];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::JustListen => "JustListen",
            Condition::Memorize => "Memorize",
        }
    }
}

impl Subcondition {
    pub const ALL: [Subcondition; 3] = [Subcondition::Five, Subcondition::Nine, Subcondition::Thirteen];

    pub fn as_str(self) -> &'static str {
        match self {
            Subcondition::Five => "Five",
            Subcondition::Nine => "Nine",
            Subcondition::Thirteen => "Thirteen",
        }
    }

    /// Digit count of the span task.
    pub fn digits(self) -> u32 {
        match self {
            Subcondition::Five => 5,
            Subcondition::Nine => 9,
            Subcondition::Thirteen => 13,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Subcondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "JustListen" | "justlisten" | "just_listen" => Ok(Condition::JustListen),
            "Memorize" | "memorize" | "Memory" | "memory" => Ok(Condition::Memorize),
            other => Err(Error::InvalidMeta(format!("unknown condition {other:?}"))),
        }
    }
}

impl FromStr for Subcondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Five" | "five" | "5" => Ok(Subcondition::Five),
            "Nine" | "nine" | "9" => Ok(Subcondition::Nine),
            "Thirteen" | "thirteen" | "13" => Ok(Subcondition::Thirteen),
            other => Err(Error::InvalidMeta(format!("unknown subcondition {other:?}"))),
        }
    }
}

/// Identity of one trial within a store.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrialKey {
    pub subject_id: String,
    pub condition: Condition,
    pub subcondition: Subcondition,
    pub trial_index: i64,
}

impl fmt::Display for TrialKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}/{}", self.subject_id, self.condition, self.subcondition, self.trial_index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMeta {
    pub subject_id: String,
    pub condition: Condition,
    pub subcondition: Subcondition,
    pub trial_index: i64,
    /// Seconds relative to recording start.
    #[serde(default)]
    pub event_onsets: Vec<f64>,
}

impl TrialMeta {
    pub fn new(
        subject_id: impl Into<String>,
        condition: Condition,
        subcondition: Subcondition,
        trial_index: i64,
    ) -> Self {
        Self { subject_id: subject_id.into(), condition, subcondition, trial_index, event_onsets: Vec::new() }
    }

    pub fn key(&self) -> TrialKey {
        TrialKey {
            subject_id: self.subject_id.clone(),
            condition: self.condition,
            subcondition: self.subcondition,
            trial_index: self.trial_index,
        }
    }
}

/// Checks key uniqueness and onset ordering across a metadata list.
pub fn validate_meta(meta: &[TrialMeta]) -> Result<()> {
    let mut seen = HashSet::with_capacity(meta.len());
    for m in meta {
        if !seen.insert(m.key()) {
            return Err(Error::InvalidMeta(format!("duplicate trial key {}", m.key())));
        }
        if m.event_onsets.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::EventsNotIncreasing);
        }
        if m.event_onsets.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeta(format!("non-finite onset in {}", m.key())));
        }
    }
    Ok(())
}
