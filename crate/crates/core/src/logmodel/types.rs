use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::taskengine::{BbStimulus, DdTrial, Game, NkStimulus, PatternBlock};

/// Milliseconds since session start.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub fn ms(self) -> u64 {
        self.0
    }

    /// Seconds elapsed from `earlier` to `self` (negative if `self` is earlier).
    pub fn secs_since(self, earlier: Timestamp) -> f64 {
        (self.0 as f64 - earlier.0 as f64) / 1000.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ms", self.0)
    }
}

/// A position in blocks, stored as an integer count of 1e-4 blocks so that the
/// four-decimal text form round-trips exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Blocks(i64);

impl Blocks {
    pub const SCALE: f64 = 1e4;

    pub fn from_f64(v: f64) -> Self {
        Blocks((v * Self::SCALE).round() as i64)
    }

    pub fn from_raw(raw: i64) -> Self {
        Blocks(raw)
    }

    pub fn raw(self) -> i64 {
        self.0
    }

    pub fn get(self) -> f64 {
        self.0 as f64 / Self::SCALE
    }
}

/// An angle in degrees, stored as hundredths of a degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Degrees(i32);

impl Degrees {
    pub const SCALE: f64 = 100.0;

    pub fn from_f64(v: f64) -> Self {
        Degrees((v * Self::SCALE).round() as i32)
    }

    /// Wraps into the yaw range [-180, 180) before quantizing.
    pub fn yaw(v: f64) -> Self {
        let mut d = Self::from_f64(v.rem_euclid(360.0)).0;
        if d >= 18_000 {
            d -= 36_000;
        }
        Degrees(d)
    }

    pub fn from_raw(raw: i32) -> Self {
        Degrees(raw)
    }

    pub fn raw(self) -> i32 {
        self.0
    }

    pub fn get(self) -> f64 {
        self.0 as f64 / Self::SCALE
    }

    pub fn is_valid_yaw(self) -> bool {
        (-18_000..18_000).contains(&self.0)
    }

    pub fn is_valid_pitch(self) -> bool {
        (-9_000..=9_000).contains(&self.0)
    }
}

/// High-frequency player state. Yaw 0 faces +z and positive yaw turns toward +x,
/// so the facing direction in the (x, z) plane is `(sin yaw, cos yaw)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSample {
    pub t: Timestamp,
    pub x: Blocks,
    pub y: Blocks,
    pub z: Blocks,
    pub yaw: Degrees,
    pub pitch: Degrees,
    /// Entity or block under the crosshair, if any.
    pub view: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvBlock {
    pub pos: [i32; 3],
    pub kind: String,
}

/// Low-frequency environment snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvSample {
    pub t: Timestamp,
    pub blocks: Vec<EnvBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ClickSelect,
    DoorEnter,
    Shot,
    BlockPlace,
    BlockBreak,
    TrialFeedback,
    SkipPhase,
}

impl EventKind {
    /// The exact payload key set each kind carries.
    pub fn payload_keys(self) -> &'static [&'static str] {
        match self {
            EventKind::ClickSelect => &["target"],
            EventKind::DoorEnter => &["door"],
            EventKind::Shot => &["target"],
            EventKind::BlockPlace => &["cell", "color"],
            EventKind::BlockBreak => &["cell"],
            EventKind::TrialFeedback => &["outcome", "trial"],
            EventKind::SkipPhase => &["phase"],
        }
    }

    /// Events that carry the player's choice for a trial.
    pub fn is_response(self) -> bool {
        matches!(
            self,
            EventKind::ClickSelect | EventKind::DoorEnter | EventKind::Shot
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameEvent {
    pub t: Timestamp,
    pub kind: EventKind,
    pub payload: BTreeMap<String, String>,
}

impl GameEvent {
    pub fn new<const N: usize>(t: Timestamp, kind: EventKind, pairs: [(&str, String); N]) -> Self {
        GameEvent {
            t,
            kind,
            payload: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    /// The selected target of a response event.
    pub fn selected(&self) -> Option<&str> {
        match self.kind {
            EventKind::ClickSelect | EventKind::Shot => self.payload.get("target"),
            EventKind::DoorEnter => self.payload.get("door"),
            _ => None,
        }
        .map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RrStimulus {
    pub size: u8,
    pub target: Vec<PatternBlock>,
    pub built: Vec<PatternBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stimulus {
    Nk(NkStimulus),
    Dd(DdTrial),
    Bb(BbStimulus),
    Rr(RrStimulus),
}

impl Stimulus {
    pub fn game(&self) -> Game {
        match self {
            Stimulus::Nk(_) => Game::NetherKnight,
            Stimulus::Dd(_) => Game::DoorDecipher,
            Stimulus::Bb(_) => Game::BarnyardBlast,
            Stimulus::Rr(_) => Game::RainbowRandom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Correct,
    Incorrect,
    Timeout,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Correct => "correct",
            Outcome::Incorrect => "incorrect",
            Outcome::Timeout => "timeout",
        }
    }
}

/// One trial of the summary. `end_t` is the response (feedback onset) time; the
/// feedback period itself lies outside the window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub game: Game,
    pub trial_index: u32,
    pub start_t: Timestamp,
    pub end_t: Timestamp,
    pub stimulus: Stimulus,
    pub correct_answer: String,
    pub response: Option<String>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub session: String,
    pub player: String,
    pub game: Game,
    pub state_hz: u32,
    pub env_period_ms: u64,
    pub seed: u64,
    /// Whether the `view` channel was recorded.
    pub gaze: bool,
}

impl Header {
    pub fn state_period_ms(&self) -> u64 {
        1000 / u64::from(self.state_hz.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogEntry {
    State(StateSample),
    Env(EnvSample),
    Event(GameEvent),
}

impl LogEntry {
    pub fn t(&self) -> Timestamp {
        match self {
            LogEntry::State(s) => s.t,
            LogEntry::Env(e) => e.t,
            LogEntry::Event(e) => e.t,
        }
    }

    /// Tie-break order for records sharing a timestamp: state < env < event.
    pub fn rank(&self) -> u8 {
        match self {
            LogEntry::State(_) => 0,
            LogEntry::Env(_) => 1,
            LogEntry::Event(_) => 2,
        }
    }

    pub fn sort_key(&self) -> (Timestamp, u8) {
        (self.t(), self.rank())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogFile {
    pub header: Header,
    pub log: Vec<LogEntry>,
    pub trials: Vec<TrialRecord>,
}

impl LogFile {
    pub fn states(&self) -> impl Iterator<Item = &StateSample> {
        self.log.iter().filter_map(|e| match e {
            LogEntry::State(s) => Some(s),
            _ => None,
        })
    }

    pub fn events(&self) -> impl Iterator<Item = &GameEvent> {
        self.log.iter().filter_map(|e| match e {
            LogEntry::Event(ev) => Some(ev),
            _ => None,
        })
    }

    pub fn env_samples(&self) -> impl Iterator<Item = &EnvSample> {
        self.log.iter().filter_map(|e| match e {
            LogEntry::Env(s) => Some(s),
            _ => None,
        })
    }

    pub fn trial(&self, trial_index: u32) -> Option<&TrialRecord> {
        self.trials.iter().find(|t| t.trial_index == trial_index)
    }
}
