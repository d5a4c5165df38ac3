use super::types::*;
use crate::{Error, Result};

/// The slice of a session belonging to one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSegment {
    pub trial: TrialRecord,
    pub states: Vec<StateSample>,
    pub events: Vec<GameEvent>,
    /// Copied from the header: whether `StateSample::view` was recorded.
    pub gaze_logged: bool,
}

impl TrialSegment {
    /// The response event, if the trial has one.
    pub fn response_event(&self) -> Option<&GameEvent> {
        self.events.iter().find(|e| e.kind.is_response())
    }
}

/// All samples and events with `start_t <= t <= end_t`, in log order.
pub fn extract_trial_segment(file: &LogFile, trial_index: u32) -> Result<TrialSegment> {
    let trial = file
        .trial(trial_index)
        .ok_or_else(|| Error::NotFound(format!("trial {trial_index}")))?
        .clone();
    let lo = file.log.partition_point(|e| e.t() < trial.start_t);
    let hi = file.log.partition_point(|e| e.t() <= trial.end_t);
    let mut states = Vec::new();
    let mut events = Vec::new();
    for entry in &file.log[lo..hi] {
        match entry {
            LogEntry::State(s) => states.push(s.clone()),
            LogEntry::Event(e) => events.push(e.clone()),
            LogEntry::Env(_) => {}
        }
    }
    Ok(TrialSegment {
        trial,
        states,
        events,
        gaze_logged: file.header.gaze,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskengine::{BbStimulus, Game, Side, Species};

    fn file_with_trials(windows: &[(u64, u64)], end: u64) -> LogFile {
        let mut log: Vec<LogEntry> = (0..=end / 50)
            .map(|i| {
                LogEntry::State(StateSample {
                    t: Timestamp(i * 50),
                    x: Blocks::default(),
                    y: Blocks::from_f64(64.0),
                    z: Blocks::default(),
                    yaw: Degrees::default(),
                    pitch: Degrees::default(),
                    view: None,
                })
            })
            .collect();
        let mut trials = Vec::new();
        for (i, &(s, e)) in windows.iter().enumerate() {
            log.push(LogEntry::Event(GameEvent::new(
                Timestamp(e),
                EventKind::Shot,
                [("target", "target:left".to_string())],
            )));
            trials.push(TrialRecord {
                game: Game::BarnyardBlast,
                trial_index: i as u32,
                start_t: Timestamp(s),
                end_t: Timestamp(e),
                stimulus: Stimulus::Bb(BbStimulus {
                    species: Species::Cow,
                    center_dir: Side::Left,
                    congruent: true,
                }),
                correct_answer: "target:left".into(),
                response: Some("target:left".into()),
                outcome: Outcome::Correct,
            });
        }
        log.sort_by_key(LogEntry::sort_key);
        LogFile {
            header: Header {
                session: "s".into(),
                player: "p".into(),
                game: Game::BarnyardBlast,
                state_hz: 20,
                env_period_ms: 1000,
                seed: 0,
                gaze: true,
            },
            log,
            trials,
        }
    }

    #[test]
    fn window_1000_to_3000_has_41_states() {
        let f = file_with_trials(&[(1000, 3000)], 5000);
        super::super::validate(&f).unwrap();
        let seg = extract_trial_segment(&f, 0).unwrap();
        assert_eq!(seg.states.len(), 41);
        assert_eq!(seg.states[0].t, Timestamp(1000));
        assert_eq!(seg.states.last().unwrap().t, Timestamp(3000));
        assert_eq!(seg.events.len(), 1);
    }

    #[test]
    fn last_trial_has_no_trailing_samples() {
        let f = file_with_trials(&[(500, 1800), (4000, 6130)], 9000);
        let seg = extract_trial_segment(&f, 1).unwrap();
        assert_eq!(seg.states.last().unwrap().t, Timestamp(6100));
        assert!(seg.states.iter().all(|s| s.t.0 >= 4000 && s.t.0 <= 6130));
        assert_eq!(seg.events.last().unwrap().t, Timestamp(6130));
    }

    #[test]
    fn trial_without_events_has_empty_event_list() {
        let mut f = file_with_trials(&[(1000, 3000)], 5000);
        f.log.retain(|e| !matches!(e, LogEntry::Event(_)));
        let seg = extract_trial_segment(&f, 0).unwrap();
        assert!(seg.events.is_empty());
    }

    #[test]
    fn unknown_trial_is_not_found() {
        let f = file_with_trials(&[(1000, 3000)], 5000);
        assert!(matches!(
            extract_trial_segment(&f, 9),
            Err(Error::NotFound(_))
        ));
    }
}
