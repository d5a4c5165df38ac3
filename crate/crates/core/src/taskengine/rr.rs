use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Color;
use crate::{Error, Result};

pub const RR_MAX_SIZE: u8 = 10;
pub const RR_PASS_ACCURACY: f64 = 0.80;
const FAILS_TO_FINISH: u32 = 2;

/// Staircase state. Failures are counted cumulatively per size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RrState {
    pub current_size: u8,
    pub fail_counts: BTreeMap<u8, u32>,
    pub finished: bool,
    pub history: Vec<(u8, bool)>,
}

impl Default for RrState {
    fn default() -> Self {
        Self::new()
    }
}

impl RrState {
    /// The pattern starts with a single block.
    pub fn new() -> Self {
        RrState {
            current_size: 1,
            fail_counts: BTreeMap::new(),
            finished: false,
            history: Vec::new(),
        }
    }
}

pub fn rr_step(state: &RrState, passed: bool) -> Result<RrState> {
    if state.finished {
        return Err(Error::InvalidInput(
            "staircase already finished".to_string(),
        ));
    }
    let size = state.current_size;
    let mut next = state.clone();
    next.history.push((size, passed));
    if passed {
        if size >= RR_MAX_SIZE {
            next.finished = true;
        } else {
            next.current_size = size + 1;
        }
    } else {
        let fails = next.fail_counts.entry(size).or_insert(0);
        *fails += 1;
        if *fails >= FAILS_TO_FINISH {
            next.finished = true;
        } else {
            next.current_size = size.saturating_sub(1).max(1);
        }
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatternBlock {
    pub x: i32,
    pub y: i32,
    pub color: Color,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Judgement {
    pub accuracy: f64,
    pub matched: usize,
    pub pass: bool,
}

/// Accuracy is matched blocks over the larger of the two patterns, so extra blocks
/// cost as much as missing ones. Passing requires strictly more than 80%.
pub fn rr_judge(target: &[PatternBlock], built: &[PatternBlock]) -> Result<Judgement> {
    let target: BTreeSet<_> = target.iter().copied().collect();
    let built: BTreeSet<_> = built.iter().copied().collect();
    if target.is_empty() {
        return Err(Error::InvalidInput("empty target pattern".to_string()));
    }
    let matched = target.intersection(&built).count();
    let accuracy = matched as f64 / target.len().max(built.len()) as f64;
    Ok(Judgement {
        accuracy,
        matched,
        pass: accuracy > RR_PASS_ACCURACY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn run(outcomes: &[bool]) -> RrState {
        outcomes
            .iter()
            .fold(RrState::new(), |s, &o| rr_step(&s, o).unwrap())
    }

    #[test]
    fn pass_pass_fail_goes_back_to_two() {
        let s = run(&[true, true, false]);
        assert_eq!(s.current_size, 2);
        assert_eq!(s.history, vec![(1, true), (2, true), (3, false)]);
        assert!(!s.finished);
    }

    #[test]
    fn passing_size_ten_finishes() {
        let s = run(&[true; 10]);
        assert!(s.finished);
        assert_eq!(s.current_size, 10);
        assert!(rr_step(&s, true).is_err());
    }

    #[test]
    fn two_failures_at_one_size_finish() {
        // 1 P, 2 F (back to 1), 1 P, 2 F -> second failure at size 2
        let s = run(&[true, false, true, false]);
        assert!(s.finished);
        assert_eq!(s.fail_counts[&2], 2);
    }

    #[test]
    fn failure_at_size_one_stays_at_one() {
        let s = run(&[false]);
        assert_eq!(s.current_size, 1);
        assert!(!s.finished);
    }

    fn blocks(n: i32) -> Vec<PatternBlock> {
        (0..n)
            .map(|i| PatternBlock {
                x: i,
                y: 0,
                color: Color::Red,
            })
            .collect()
    }

    #[test]
    fn judge_boundaries() {
        let target = blocks(5);
        let j = rr_judge(&target, &target).unwrap();
        assert_eq!(j.accuracy, 1.0);
        assert!(j.pass);

        let j = rr_judge(&target, &target[..4]).unwrap();
        assert_eq!(j.accuracy, 0.8);
        assert!(!j.pass);

        let mut built = target.clone();
        built.push(PatternBlock {
            x: 9,
            y: 9,
            color: Color::Blue,
        });
        let j = rr_judge(&target, &built).unwrap();
        assert!((j.accuracy - 5.0 / 6.0).abs() < 1e-12);
        assert!(j.pass);

        assert!(rr_judge(&[], &built).is_err());
    }

    #[test]
    fn wrong_color_does_not_match() {
        let target = blocks(1);
        let built = vec![PatternBlock {
            color: Color::Green,
            ..target[0]
        }];
        assert_eq!(rr_judge(&target, &built).unwrap().matched, 0);
    }

    proptest! {
        #[test]
        fn staircase_stays_in_range_and_terminates(outcomes in proptest::collection::vec(any::<bool>(), 0..200)) {
            let mut s = RrState::new();
            let mut steps = 0;
            for o in outcomes {
                if s.finished { break; }
                s = rr_step(&s, o).unwrap();
                steps += 1;
                prop_assert!((1..=10).contains(&s.current_size));
            }
            prop_assert!(steps <= 40);
        }
    }
}
