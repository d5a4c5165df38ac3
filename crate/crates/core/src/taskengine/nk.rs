use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Color, Side};
use crate::rng;

pub const NK_TRIALS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NkRule {
    /// Respond to what the word says.
    Semantic,
    /// Respond to the ink the word is printed in.
    Color,
}

/// An incongruent color word plus the two knights flanking it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NkStimulus {
    pub word: Color,
    pub ink: Color,
    pub rule: NkRule,
    pub left: Color,
    pub right: Color,
}

impl NkStimulus {
    /// Side of the knight wearing `color`, if either does.
    pub fn side_of(&self, color: Color) -> Option<Side> {
        if self.left == color {
            Some(Side::Left)
        } else if self.right == color {
            Some(Side::Right)
        } else {
            None
        }
    }

    pub fn color_at(&self, side: Side) -> Color {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }
}

pub fn nk_correct_target(stimulus: &NkStimulus) -> Color {
    match stimulus.rule {
        NkRule::Semantic => stimulus.word,
        NkRule::Color => stimulus.ink,
    }
}

/// 40 incongruent stimuli; the two knights always wear the word color and the ink color.
pub fn nk_schedule(rule: NkRule, seed: u64) -> Vec<NkStimulus> {
    let mut rng = rng::seeded(seed);
    (0..NK_TRIALS)
        .map(|_| {
            let mut pair = Color::ALL;
            pair.shuffle(&mut rng);
            let (word, ink) = (pair[0], pair[1]);
            let (left, right) = if rng.random_bool(0.5) {
                (word, ink)
            } else {
                (ink, word)
            };
            NkStimulus {
                word,
                ink,
                rule,
                left,
                right,
            }
        })
        .collect()
}
