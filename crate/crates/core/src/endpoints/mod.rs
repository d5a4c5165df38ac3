//! Per-trial and per-session endpoints: response time (RT), gaze response
//! time (gRT), and the psychometric threshold for the span game.

mod external;
mod psych;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cleaning::{SessionValues, TrialValue};
use crate::logmodel::{
    extract_trial_segment, LogFile, Outcome, Stimulus, TrialRecord, TrialSegment,
};
use crate::taskengine::Game;
use crate::{Error, Result};

pub use external::{ingest_external_scores, IngestReport, RejectedRow};
pub use psych::{
    aggregate, empirical_midpoint, fit_2pl, fit_levels, grid_search, logistic, LevelData, PsychFit,
    SIGMA_MIN, THETA_MARGIN,
};

/// Responses faster than this are flagged (not dropped).
pub const IMPLAUSIBLE_RT_S: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rt {
    pub seconds: f64,
    pub implausible: bool,
}

/// Response time of one trial: response event minus trial start.
pub fn trial_rt(trial: &TrialRecord) -> Result<Rt> {
    if trial.outcome == Outcome::Timeout {
        return Err(Error::InvalidInput(format!(
            "trial {} timed out and has no response time",
            trial.trial_index
        )));
    }
    if trial.end_t < trial.start_t {
        return Err(Error::InvalidInput(format!(
            "trial {} ends before it starts",
            trial.trial_index
        )));
    }
    let seconds = trial.end_t.secs_since(trial.start_t);
    Ok(Rt {
        seconds,
        implausible: seconds < IMPLAUSIBLE_RT_S,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeRt {
    pub seconds: f64,
    /// False when the view never settled on the selected target; `seconds` is then the RT.
    pub fixated: bool,
}

/// Earliest sample from which the view stays on `selected` through the response.
pub fn gaze_rt(segment: &TrialSegment, selected: &str) -> Result<GazeRt> {
    let trial = &segment.trial;
    if !segment.gaze_logged {
        return Err(Error::InvalidInput(format!(
            "trial {}: log has no view channel",
            trial.trial_index
        )));
    }
    let rt = trial_rt(trial)?;
    let run_start = segment
        .states
        .iter()
        .rev()
        .filter(|s| s.t <= trial.end_t)
        .take_while(|s| s.view.as_deref() == Some(selected))
        .last();
    Ok(match run_start {
        Some(s) => GazeRt {
            seconds: s.t.secs_since(trial.start_t),
            fixated: true,
        },
        None => GazeRt {
            seconds: rt.seconds,
            fixated: false,
        },
    })
}

/// Everything measured on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMeasures {
    pub trial_index: u32,
    pub outcome: Outcome,
    pub rt: Option<f64>,
    pub grt: Option<f64>,
    pub fixated: Option<bool>,
    pub implausible: bool,
}

pub fn trial_measures(file: &LogFile) -> Result<Vec<TrialMeasures>> {
    let mut out = Vec::with_capacity(file.trials.len());
    for trial in &file.trials {
        let mut m = TrialMeasures {
            trial_index: trial.trial_index,
            outcome: trial.outcome,
            rt: None,
            grt: None,
            fixated: None,
            implausible: false,
        };
        if trial.outcome != Outcome::Timeout {
            let rt = trial_rt(trial)?;
            m.rt = Some(rt.seconds);
            m.implausible = rt.implausible;
            if file.header.gaze && trial.game.is_forced_choice() {
                let segment = extract_trial_segment(file, trial.trial_index)?;
                let selected = segment
                    .response_event()
                    .and_then(|e| e.selected())
                    .or(trial.response.as_deref())
                    .ok_or_else(|| {
                        Error::Validation(format!(
                            "trial {} has an outcome but no selection",
                            trial.trial_index
                        ))
                    })?
                    .to_string();
                let g = gaze_rt(&segment, &selected)?;
                m.grt = Some(g.seconds);
                m.fixated = Some(g.fixated);
            }
        }
        out.push(m);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EndpointKind {
    #[serde(rename = "RT")]
    Rt,
    #[serde(rename = "gRT")]
    Grt,
    #[serde(rename = "theta")]
    Theta,
    /// Scores from external instruments that are neither times nor thresholds.
    #[serde(rename = "score")]
    Score,
}

impl EndpointKind {
    pub fn name(self) -> &'static str {
        match self {
            EndpointKind::Rt => "RT",
            EndpointKind::Grt => "gRT",
            EndpointKind::Theta => "theta",
            EndpointKind::Score => "score",
        }
    }

    pub fn is_time(self) -> bool {
        matches!(self, EndpointKind::Rt | EndpointKind::Grt)
    }
}

impl fmt::Display for EndpointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EndpointKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "RT" | "rt" => Ok(EndpointKind::Rt),
            "gRT" | "grt" => Ok(EndpointKind::Grt),
            "theta" => Ok(EndpointKind::Theta),
            "score" => Ok(EndpointKind::Score),
            other => Err(Error::InvalidInput(format!(
                "unknown endpoint kind `{other}`"
            ))),
        }
    }
}

/// Per-trial values for one session, ready for cleaning. Timeouts never enter;
/// error trials only with `include_errors`.
pub fn session_trial_values(
    file: &LogFile,
    measures: &[TrialMeasures],
    kind: EndpointKind,
    include_errors: bool,
) -> Result<SessionValues> {
    let mut trials = Vec::new();
    for m in measures {
        let eligible = match m.outcome {
            Outcome::Correct => true,
            Outcome::Incorrect => include_errors,
            Outcome::Timeout => false,
        };
        if !eligible {
            continue;
        }
        let value = match kind {
            EndpointKind::Rt => m.rt,
            EndpointKind::Grt => m.grt,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "{kind} is not a per-trial time"
                )))
            }
        };
        if let Some(v) = value {
            // a zero time cannot be log-transformed; cleaning requires positive values
            trials.push(TrialValue {
                trial_index: m.trial_index,
                value: v.max(1e-3),
            });
        }
    }
    Ok(SessionValues {
        participant: file.header.player.clone(),
        session: file.header.session.clone(),
        trials,
    })
}

/// Difficulty levels and pass/fail outcomes of the span game, one per trial.
pub fn rr_levels(file: &LogFile) -> Result<(Vec<f64>, Vec<bool>)> {
    let mut levels = Vec::new();
    let mut passed = Vec::new();
    for t in &file.trials {
        match &t.stimulus {
            Stimulus::Rr(s) => {
                levels.push(f64::from(s.size));
                passed.push(t.outcome == Outcome::Correct);
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "trial {} is not a span trial",
                    t.trial_index
                )))
            }
        }
    }
    Ok((levels, passed))
}

/// One summary value for (participant, session, measure, kind).
/// `measure` is a game code for game endpoints and the task name for external scores;
/// `session` holds the form name for external scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointRow {
    pub participant: String,
    pub session: String,
    pub measure: String,
    pub kind: EndpointKind,
    pub value: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EndpointTable {
    pub rows: Vec<EndpointRow>,
}

pub const ENDPOINT_HEADER: [&str; 6] = [
    "participant",
    "session",
    "measure",
    "kind",
    "value",
    "n_trials",
];

impl EndpointTable {
    pub fn push(&mut self, row: EndpointRow) -> Result<()> {
        if row.kind.is_time() && !(row.value > 0.0) {
            return Err(Error::InvalidInput(format!(
                "{} {} for {} must be positive, got {}",
                row.measure, row.kind, row.participant, row.value
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Stable ordering used for every written table.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (&a.measure, a.kind, &a.participant, &a.session).cmp(&(
                &b.measure,
                b.kind,
                &b.participant,
                &b.session,
            ))
        });
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        if self.rows.is_empty() {
            w.write_record(ENDPOINT_HEADER)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn from_csv(text: &str) -> Result<EndpointTable> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut table = EndpointTable::default();
        for row in r.deserialize() {
            table.push(row?)?;
        }
        Ok(table)
    }

    /// participant → mean value over that participant's sessions.
    pub fn participant_means(&self, measure: &str, kind: EndpointKind) -> BTreeMap<String, f64> {
        let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for r in self
            .rows
            .iter()
            .filter(|r| r.measure == measure && r.kind == kind)
        {
            let e = acc.entry(r.participant.clone()).or_insert((0.0, 0));
            e.0 += r.value;
            e.1 += 1;
        }
        acc.into_iter()
            .map(|(k, (s, n))| (k, s / n as f64))
            .collect()
    }

    /// participant → session → value.
    pub fn by_session(
        &self,
        measure: &str,
        kind: EndpointKind,
    ) -> BTreeMap<String, BTreeMap<String, f64>> {
        let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for r in self
            .rows
            .iter()
            .filter(|r| r.measure == measure && r.kind == kind)
        {
            out.entry(r.participant.clone())
                .or_default()
                .insert(r.session.clone(), r.value);
        }
        out
    }

    pub fn measures(&self) -> Vec<(String, EndpointKind)> {
        let mut v: Vec<(String, EndpointKind)> = self
            .rows
            .iter()
            .map(|r| (r.measure.clone(), r.kind))
            .collect();
        v.sort();
        v.dedup();
        v
    }
}

/// Mean of the kept trial values as a session-level endpoint row.
pub fn summarize_session(
    game: Game,
    kind: EndpointKind,
    kept: &SessionValues,
) -> Option<EndpointRow> {
    if kept.trials.is_empty() {
        return None;
    }
    let n = kept.trials.len();
    let mean = kept.trials.iter().map(|t| t.value).sum::<f64>() / n as f64;
    Some(EndpointRow {
        participant: kept.participant.clone(),
        session: kept.session.clone(),
        measure: game.code().to_string(),
        kind,
        value: mean,
        n_trials: n,
    })
}

/// Threshold row for a span-game session.
pub fn rr_session_row(file: &LogFile) -> Result<(EndpointRow, PsychFit)> {
    let (levels, passed) = rr_levels(file)?;
    let fit = fit_2pl(&levels, &passed)?;
    Ok((
        EndpointRow {
            participant: file.header.player.clone(),
            session: file.header.session.clone(),
            measure: Game::RainbowRandom.code().to_string(),
            kind: EndpointKind::Theta,
            value: fit.theta,
            n_trials: levels.len(),
        },
        fit,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logmodel::*;
    use crate::taskengine::{target, Color, NkRule, NkStimulus, Side};

    fn nk_trial(start: u64, end: u64, outcome: Outcome) -> TrialRecord {
        let stim = NkStimulus {
            word: Color::Blue,
            ink: Color::Red,
            rule: NkRule::Semantic,
            left: Color::Blue,
            right: Color::Red,
        };
        TrialRecord {
            game: Game::NetherKnight,
            trial_index: 0,
            start_t: Timestamp(start),
            end_t: Timestamp(end),
            stimulus: Stimulus::Nk(stim),
            correct_answer: target::knight(Color::Blue),
            response: (outcome != Outcome::Timeout).then(|| target::knight(Color::Blue)),
            outcome,
        }
    }

    fn segment(views: &[Option<&str>], start: u64, end: u64) -> TrialSegment {
        let states = views
            .iter()
            .enumerate()
            .map(|(i, v)| StateSample {
                t: Timestamp(start + 50 * i as u64),
                x: Blocks::default(),
                y: Blocks::from_f64(64.0),
                z: Blocks::default(),
                yaw: Degrees::default(),
                pitch: Degrees::default(),
                view: v.map(str::to_string),
            })
            .collect();
        TrialSegment {
            trial: nk_trial(start, end, Outcome::Correct),
            states,
            events: vec![],
            gaze_logged: true,
        }
    }

    #[test]
    fn rt_is_response_minus_start() {
        let r = trial_rt(&nk_trial(1000, 2500, Outcome::Correct)).unwrap();
        assert_eq!(r.seconds, 1.5);
        assert!(!r.implausible);
        let r = trial_rt(&nk_trial(1000, 1000, Outcome::Correct)).unwrap();
        assert_eq!(r.seconds, 0.0);
        assert!(r.implausible);
        assert!(trial_rt(&nk_trial(1000, 31000, Outcome::Timeout)).is_err());
    }

    #[test]
    fn grt_takes_the_final_run() {
        let k = "knight:BLUE";
        let o = "knight:RED";
        let seg = segment(&[Some(o), Some(o), Some(k), Some(k), Some(k)], 1000, 1200);
        assert_eq!(
            gaze_rt(&seg, k).unwrap(),
            GazeRt {
                seconds: 0.1,
                fixated: true
            }
        );

        let seg = segment(&[Some(k), Some(o), Some(k), Some(k), Some(k)], 1000, 1200);
        assert_eq!(gaze_rt(&seg, k).unwrap().seconds, 0.1);

        let seg = segment(&[Some(k); 5], 1000, 1200);
        assert_eq!(gaze_rt(&seg, k).unwrap().seconds, 0.0);

        let seg = segment(&[Some(o), None, Some(o), None, None], 1000, 1200);
        assert_eq!(
            gaze_rt(&seg, k).unwrap(),
            GazeRt {
                seconds: 0.2,
                fixated: false
            }
        );
    }

    #[test]
    fn grt_needs_the_view_channel() {
        let mut seg = segment(&[None; 3], 0, 100);
        seg.gaze_logged = false;
        assert!(gaze_rt(&seg, "knight:BLUE").is_err());
    }

    #[test]
    fn table_csv_round_trip() {
        let mut t = EndpointTable::default();
        t.push(EndpointRow {
            participant: "p01".into(),
            session: "s1".into(),
            measure: "NK".into(),
            kind: EndpointKind::Grt,
            value: 1.25,
            n_trials: 38,
        })
        .unwrap();
        t.push(EndpointRow {
            participant: "p01".into(),
            session: "s1".into(),
            measure: "RR".into(),
            kind: EndpointKind::Theta,
            value: 6.4,
            n_trials: 14,
        })
        .unwrap();
        let csv = t.to_csv().unwrap();
        assert!(csv.starts_with("participant,session,measure,kind,value,n_trials\n"));
        assert!(csv.contains("p01,s1,NK,gRT,1.25,38"));
        assert_eq!(EndpointTable::from_csv(&csv).unwrap(), t);
    }

    #[test]
    fn time_rows_must_be_positive() {
        let mut t = EndpointTable::default();
        let row = EndpointRow {
            participant: "p".into(),
            session: "s".into(),
            measure: "BB".into(),
            kind: EndpointKind::Rt,
            value: 0.0,
            n_trials: 1,
        };
        assert!(t.push(row).is_err());
    }

    #[test]
    fn side_names_are_the_bb_targets() {
        assert_eq!(target::bb_target(Side::Left), "target:left");
    }
}
