use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::Color;
use crate::rng::{self, Rng};

pub const DD_TRIALS: usize = 42;
pub const DD_BLOCK_LEN: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Circle,
    Square,
    Triangle,
    Plus,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Circle, Shape::Square, Shape::Triangle, Shape::Plus];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DdRule {
    Color,
    Shape,
    Quantity,
}

impl DdRule {
    pub const ALL: [DdRule; 3] = [DdRule::Color, DdRule::Shape, DdRule::Quantity];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DdCard {
    pub color: Color,
    pub shape: Shape,
    pub quantity: u8,
}

impl DdCard {
    pub fn matches_on(&self, other: &DdCard, rule: DdRule) -> bool {
        match rule {
            DdRule::Color => self.color == other.color,
            DdRule::Shape => self.shape == other.shape,
            DdRule::Quantity => self.quantity == other.quantity,
        }
    }

    pub fn is_valid(&self) -> bool {
        (1..=4).contains(&self.quantity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DdTrial {
    pub key: DdCard,
    pub doors: [DdCard; 4],
    pub active_rule: DdRule,
}

/// Index of the unique door matching the key on the active rule.
pub fn dd_correct_door(trial: &DdTrial) -> usize {
    trial
        .doors
        .iter()
        .position(|d| d.matches_on(&trial.key, trial.active_rule))
        .expect("generated trials always contain a matching door")
}

fn other<T: Copy + PartialEq>(rng: &mut Rng, all: &[T], avoid: T) -> T {
    let choices: Vec<T> = all.iter().copied().filter(|v| *v != avoid).collect();
    *choices.choose(rng).expect("at least one alternative")
}

fn random_card(rng: &mut Rng) -> DdCard {
    DdCard {
        color: *Color::ALL.choose(rng).expect("non-empty"),
        shape: *Shape::ALL.choose(rng).expect("non-empty"),
        quantity: rng.random_range(1..=4),
    }
}

fn build_trial(rng: &mut Rng, active_rule: DdRule) -> DdTrial {
    const QUANTITIES: [u8; 4] = [1, 2, 3, 4];
    let key = random_card(rng);
    // slot order: color-match, shape-match, quantity-match, null door
    let mut slots = [0usize, 1, 2, 3];
    slots.shuffle(rng);
    let mut doors = [key; 4];
    for (role, &slot) in slots.iter().enumerate() {
        let keep_color = role == 0;
        let keep_shape = role == 1;
        let keep_quantity = role == 2;
        doors[slot] = DdCard {
            color: if keep_color {
                key.color
            } else {
                other(rng, &Color::ALL, key.color)
            },
            shape: if keep_shape {
                key.shape
            } else {
                other(rng, &Shape::ALL, key.shape)
            },
            quantity: if keep_quantity {
                key.quantity
            } else {
                other(rng, &QUANTITIES, key.quantity)
            },
        };
    }
    DdTrial {
        key,
        doors,
        active_rule,
    }
}

/// One trial: three single-attribute match doors (pairwise distinct) and one door
/// matching the key on nothing.
pub fn dd_generate_trial(active_rule: DdRule, seed: u64) -> DdTrial {
    build_trial(&mut rng::seeded(seed), active_rule)
}

/// 42 trials in six blocks of seven; the rule changes at every block boundary.
pub fn dd_schedule(seed: u64) -> Vec<DdTrial> {
    let mut rng = rng::seeded(seed);
    let mut rule = *DdRule::ALL.choose(&mut rng).expect("non-empty");
    let mut out = Vec::with_capacity(DD_TRIALS);
    for block in 0..DD_TRIALS / DD_BLOCK_LEN {
        if block > 0 {
            rule = other(&mut rng, &DdRule::ALL, rule);
        }
        for _ in 0..DD_BLOCK_LEN {
            out.push(build_trial(&mut rng, rule));
        }
    }
    out
}
