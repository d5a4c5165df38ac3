use std::fmt;

use serde::{Deserialize, Serialize};

/// Path directness crossed with gaze fixation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TrialType {
    DG,
    IG,
    DN,
    IN,
}

impl TrialType {
    pub const ALL: [TrialType; 4] = [TrialType::DG, TrialType::IG, TrialType::DN, TrialType::IN];

    pub fn new(direct: bool, gaze: bool) -> TrialType {
        match (direct, gaze) {
            (true, true) => TrialType::DG,
            (false, true) => TrialType::IG,
            (true, false) => TrialType::DN,
            (false, false) => TrialType::IN,
        }
    }

    pub fn is_direct(self) -> bool {
        matches!(self, TrialType::DG | TrialType::DN)
    }

    pub fn is_gaze(self) -> bool {
        matches!(self, TrialType::DG | TrialType::IG)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            TrialType::DG => "DG",
            TrialType::IG => "IG",
            TrialType::DN => "DN",
            TrialType::IN => "IN",
        }
    }
}

impl fmt::Display for TrialType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why a trial did not make it into the trajectory analysis. These are tallied,
/// not raised.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrajectoryError {
    TooFewSamples(usize),
    NoSelection,
}

impl fmt::Display for TrajectoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrajectoryError::TooFewSamples(n) => write!(f, "fewer than two valid samples ({n})"),
            TrajectoryError::NoSelection => f.write_str("no selection"),
        }
    }
}

/// Proportions of a session's trials in DG, IG, DN, IN order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionProfile(pub [f64; 4]);

impl SessionProfile {
    pub fn get(&self, t: TrialType) -> f64 {
        self.0[t.index()]
    }
}
