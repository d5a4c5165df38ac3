use std::collections::BTreeSet;

use super::types::*;
use crate::{Error, Result};

const PERIOD_TOLERANCE_MS: u64 = 1;

fn fail(msg: String) -> Result<()> {
    Err(Error::Validation(msg))
}

/// Checks every invariant of a log file. Stops at the first violation.
pub fn validate(file: &LogFile) -> Result<()> {
    let h = &file.header;
    if h.state_hz == 0 {
        return fail("state_hz must be positive".into());
    }
    if h.env_period_ms < 1000 {
        return fail(format!(
            "env_period_ms {} below the 1000 ms minimum",
            h.env_period_ms
        ));
    }
    let period = h.state_period_ms();

    let mut prev_key: Option<(Timestamp, u8)> = None;
    let mut prev_state: Option<Timestamp> = None;
    let mut prev_env: Option<Timestamp> = None;
    for (i, entry) in file.log.iter().enumerate() {
        let key = entry.sort_key();
        if let Some(pk) = prev_key {
            if key < pk {
                return fail(format!(
                    "log record {i} at {} breaks time order (previous at {})",
                    key.0, pk.0
                ));
            }
        }
        prev_key = Some(key);
        match entry {
            LogEntry::State(s) => {
                if !s.yaw.is_valid_yaw() {
                    return fail(format!("yaw {} out of range at {}", s.yaw.get(), s.t));
                }
                if !s.pitch.is_valid_pitch() {
                    return fail(format!("pitch {} out of range at {}", s.pitch.get(), s.t));
                }
                if let Some(p) = prev_state {
                    let gap = s.t.0 - p.0;
                    if gap.abs_diff(period) > PERIOD_TOLERANCE_MS {
                        return fail(format!(
                            "state samples at {} and {} are {gap} ms apart (expected {period} ± 1)",
                            p, s.t
                        ));
                    }
                }
                prev_state = Some(s.t);
            }
            LogEntry::Env(e) => {
                if let Some(p) = prev_env {
                    if e.t.0 - p.0 < h.env_period_ms {
                        return fail(format!(
                            "environment samples at {} and {} closer than {} ms",
                            p, e.t, h.env_period_ms
                        ));
                    }
                }
                prev_env = Some(e.t);
            }
            LogEntry::Event(e) => {
                let keys: Vec<&str> = e.payload.keys().map(String::as_str).collect();
                let mut expected: Vec<&str> = e.kind.payload_keys().to_vec();
                expected.sort_unstable();
                if keys != expected {
                    return fail(format!(
                        "event {:?} at {} has payload keys {keys:?}, expected {expected:?}",
                        e.kind, e.t
                    ));
                }
            }
        }
    }

    let first_state = file.states().next().map(|s| s.t);
    let last_state = file.states().last().map(|s| s.t);
    let mut seen = BTreeSet::new();
    let mut prev_trial: Option<&TrialRecord> = None;
    for t in &file.trials {
        if t.game != h.game || t.stimulus.game() != h.game {
            return fail(format!(
                "trial {} belongs to {} but the session is {}",
                t.trial_index, t.game, h.game
            ));
        }
        if !seen.insert(t.trial_index) {
            return fail(format!("duplicate trial index {}", t.trial_index));
        }
        if t.start_t >= t.end_t {
            return fail(format!(
                "trial {} has start {} not before end {}",
                t.trial_index, t.start_t, t.end_t
            ));
        }
        let consistent = match (&t.response, t.outcome) {
            (None, Outcome::Timeout) => true,
            (Some(r), Outcome::Correct) => *r == t.correct_answer,
            (Some(r), Outcome::Incorrect) => *r != t.correct_answer,
            _ => false,
        };
        if !consistent {
            return fail(format!(
                "trial {} outcome {:?} disagrees with response {:?} / answer {:?}",
                t.trial_index, t.outcome, t.response, t.correct_answer
            ));
        }
        if let Some(p) = prev_trial {
            if t.trial_index <= p.trial_index || t.start_t <= p.end_t {
                return fail(format!(
                    "trial {} is out of order or overlaps trial {}",
                    t.trial_index, p.trial_index
                ));
            }
        }
        let covered = matches!((first_state, last_state), (Some(a), Some(b)) if a <= t.start_t && b >= t.end_t);
        if !covered {
            return fail(format!(
                "trial {} window [{}, {}] not covered by state samples",
                t.trial_index, t.start_t, t.end_t
            ));
        }
        prev_trial = Some(t);
    }
    Ok(())
}
