//! Stimulus generation, correctness rules, and trial scheduling for the four
//! minigames.
//!
//! Every schedule is a pure function of its parameters and a seed.

mod bb;
mod dd;
mod nk;
mod rr;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use bb::{bb_correct_side, bb_schedule, BbStimulus, Species, BB_CELL_TRIALS, BB_TRIALS};
pub use dd::{
    dd_correct_door, dd_generate_trial, dd_schedule, DdCard, DdRule, DdTrial, Shape, DD_BLOCK_LEN,
    DD_TRIALS,
};
pub use nk::{nk_correct_target, nk_schedule, NkRule, NkStimulus, NK_TRIALS};
pub use rr::{rr_judge, rr_step, Judgement, PatternBlock, RrState, RR_MAX_SIZE};

/// Time the NK word stimulus stays on screen.
pub const NK_STIMULUS_MS: u64 = 5000;
/// Feedback period after a response, excluded from the trial window.
pub const FEEDBACK_MS: u64 = 1500;
/// Hard response limit; trials without a response by then are recorded as timeouts.
pub const RESPONSE_LIMIT_MS: u64 = 30_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Game {
    #[serde(rename = "NK")]
    NetherKnight,
    #[serde(rename = "DD")]
    DoorDecipher,
    #[serde(rename = "BB")]
    BarnyardBlast,
    #[serde(rename = "RR")]
    RainbowRandom,
}

impl Game {
    pub const ALL: [Game; 4] = [
        Game::NetherKnight,
        Game::DoorDecipher,
        Game::BarnyardBlast,
        Game::RainbowRandom,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Game::NetherKnight => "NK",
            Game::DoorDecipher => "DD",
            Game::BarnyardBlast => "BB",
            Game::RainbowRandom => "RR",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Game::NetherKnight => "Nether Knight",
            Game::DoorDecipher => "Door Decipher",
            Game::BarnyardBlast => "Barnyard Blast",
            Game::RainbowRandom => "Rainbow Random",
        }
    }

    pub fn from_code(code: &str) -> Option<Game> {
        Game::ALL.into_iter().find(|g| g.code() == code)
    }

    /// Speeded forced-choice games produce response times; RR produces a threshold.
    pub fn is_forced_choice(self) -> bool {
        !matches!(self, Game::RainbowRandom)
    }
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Color {
    Red,
    Blue,
    Green,
    Yellow,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::Red, Color::Blue, Color::Green, Color::Yellow];

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "RED",
            Color::Blue => "BLUE",
            Color::Green => "GREEN",
            Color::Yellow => "YELLOW",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    /// +1 for right, -1 for left, in the arena's x axis.
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

/// Target identifiers used in logs (`viewed_target`, event payloads, trial answers).
pub mod target {
    use super::{Color, Side};

    pub fn knight(color: Color) -> String {
        format!("knight:{}", color.name())
    }

    pub fn door(index: usize) -> String {
        format!("door:{index}")
    }

    pub fn bb_target(side: Side) -> String {
        format!("target:{}", side.name())
    }

    pub const RR_PASS: &str = "pass";
    pub const RR_FAIL: &str = "fail";
}

/// Arena layout for the choice games, in blocks relative to the trial origin.
/// The player spawns at the origin facing +z.
pub mod layout {
    pub const KNIGHT_X: f64 = 3.0;
    pub const KNIGHT_Z: f64 = 10.0;
    pub const DOOR_XS: [f64; 4] = [-4.5, -1.5, 1.5, 4.5];
    pub const DOOR_Z: f64 = 8.0;
    pub const BB_TARGET_X: f64 = 4.0;
    pub const BB_TARGET_Z: f64 = 8.0;
    /// Successive trial areas are laid out along +x.
    pub const AREA_SPACING: f64 = 32.0;
    pub const EYE_Y: f64 = 64.0;
}
