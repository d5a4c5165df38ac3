use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::Side;
use crate::rng;

pub const BB_TRIALS: usize = 48;
pub const BB_CELL_TRIALS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Cow,
    Pig,
}

/// Five animals in a row; `congruent` means the flankers face the same way as the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BbStimulus {
    pub species: Species,
    pub center_dir: Side,
    pub congruent: bool,
}

/// Cows: shoot the side the center faces. Pigs: the opposite side. Flankers never matter.
pub fn bb_correct_side(stimulus: &BbStimulus) -> Side {
    match stimulus.species {
        Species::Cow => stimulus.center_dir,
        Species::Pig => stimulus.center_dir.opposite(),
    }
}

pub fn bb_schedule(seed: u64) -> Vec<BbStimulus> {
    let mut rng = rng::seeded(seed);
    let mut out = Vec::with_capacity(BB_TRIALS);
    for species in [Species::Cow, Species::Pig] {
        for congruent in [true, false] {
            for _ in 0..BB_CELL_TRIALS {
                let center_dir = if rng.random_bool(0.5) {
                    Side::Left
                } else {
                    Side::Right
                };
                out.push(BbStimulus {
                    species,
                    center_dir,
                    congruent,
                });
            }
        }
    }
    out.shuffle(&mut rng);
    out
}
