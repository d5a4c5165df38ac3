//! Parameterised agents that play the four games and emit valid logs together
//! with the ground truth they were generated from.

mod motion;
mod params;

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::logmodel::*;
use crate::rng::{self, derive_seed};
use crate::taskengine::{
    bb_correct_side, bb_schedule, dd_correct_door, dd_schedule, layout, nk_correct_target,
    nk_schedule, rr_judge, rr_step, target, Color, Game, NkRule, PatternBlock, RrState, Side,
    FEEDBACK_MS, RESPONSE_LIMIT_MS,
};
use crate::trajectory::TrialType;
use crate::{Error, Result};

pub use motion::{bearing, plan_path, viewed, wrap_deg, Entity, Path, Point, VIEW_CONE_DEG};
pub use params::{AgentParams, GazePolicy, PathStyle};

pub const STATE_HZ: u32 = 20;
pub const ENV_PERIOD_MS: u64 = 1000;
/// Time from session start to the first trial.
pub const LEAD_IN_MS: u64 = 1000;
/// Distance from which a knight can be clicked.
pub const KNIGHT_REACH: f64 = 2.5;
/// Shooting: time to aim after deciding.
pub const AIM_MS: u64 = 300;
/// Late fixation turns toward the target this long before responding.
pub const LATE_FIX_LEAD_MS: u64 = 400;
/// Early fixation settles on the target at this fraction of the decision latency.
pub const EARLY_COMMIT_FRACTION: f64 = 0.6;
/// Span game: viewing and per-block build times.
pub const RR_BLOCK_MS: u64 = 600;
pub const RR_SUBMIT_MS: u64 = 200;
const RR_GRID: i32 = 4;
/// Lapse stalls are drawn uniformly from this range (ms).
pub const LAPSE_RANGE_MS: (u64, u64) = (10_500, 18_000);

/// What the agent actually did on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTruth {
    pub trial_index: u32,
    /// Stall (if any) plus decision latency.
    pub decision_ms: u64,
    /// Walking, aiming or building time after the decision.
    pub motor_ms: u64,
    /// Response time; equals `decision_ms + motor_ms` unless the trial timed out.
    pub rt_ms: u64,
    /// Start of the final uninterrupted view of the selected target, ms from trial start.
    pub gaze_commit_ms: Option<u64>,
    pub path_style: Option<PathStyle>,
    pub gaze_policy: Option<GazePolicy>,
    /// NK only.
    pub planted_type: Option<TrialType>,
    pub correct: bool,
    pub lapse: bool,
    pub timeout: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub session: String,
    pub player: String,
    pub game: Game,
    pub seed: u64,
    pub trials: Vec<TrialTruth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSession {
    pub log: LogFile,
    pub truth: GroundTruth,
}

/// What one trial looks like from the arena's point of view, before timing.
struct Choice {
    entities: Vec<Entity>,
    selected: usize,
    other: usize,
    correct_answer: String,
    stimulus: Stimulus,
    /// Walk up to the selected entity, stopping this far short; None = stay put.
    reach: Option<f64>,
}

struct Scheduled {
    record: TrialRecord,
    truth: TrialTruth,
    origin: Point,
    entities: Vec<Entity>,
    /// yaw and position at every ms of the trial window
    yaw: Vec<f64>,
    positions: Vec<Point>,
    events: Vec<GameEvent>,
    env_blocks: Vec<(u64, EnvBlock)>,
    static_blocks: Vec<EnvBlock>,
}

fn area_origin(trial_index: u32) -> Point {
    (layout::AREA_SPACING * f64::from(trial_index), 0.0)
}

fn ceil_to_grid(t: u64, period: u64) -> u64 {
    t.div_ceil(period) * period
}

fn choice_for(
    game: Game,
    stimulus_index: usize,
    schedules: &Schedules,
    wrong: bool,
    rng: &mut rng::Rng,
) -> Choice {
    match game {
        Game::NetherKnight => {
            let s = &schedules.nk[stimulus_index];
            let correct = nk_correct_target(s);
            let correct_side = s.side_of(correct).expect("correct knight is on the field");
            let side = if wrong {
                correct_side.opposite()
            } else {
                correct_side
            };
            let entities: Vec<Entity> = [Side::Left, Side::Right]
                .iter()
                .map(|&sd| Entity {
                    id: target::knight(s.color_at(sd)),
                    pos: (sd.sign() * layout::KNIGHT_X, layout::KNIGHT_Z),
                })
                .collect();
            let idx = |sd: Side| if sd == Side::Left { 0 } else { 1 };
            Choice {
                entities,
                selected: idx(side),
                other: idx(side.opposite()),
                correct_answer: target::knight(correct),
                stimulus: Stimulus::Nk(*s),
                reach: Some(KNIGHT_REACH),
            }
        }
        Game::DoorDecipher => {
            let s = &schedules.dd[stimulus_index];
            let correct = dd_correct_door(s);
            let entities: Vec<Entity> = layout::DOOR_XS
                .iter()
                .enumerate()
                .map(|(i, &x)| Entity {
                    id: target::door(i),
                    pos: (x, layout::DOOR_Z),
                })
                .collect();
            let others: Vec<usize> = (0..4).filter(|&i| i != correct).collect();
            let selected = if wrong {
                *others.choose(rng).expect("three doors")
            } else {
                correct
            };
            let other = *(0..4)
                .filter(|&i| i != selected)
                .collect::<Vec<_>>()
                .choose(rng)
                .expect("three doors");
            Choice {
                entities,
                selected,
                other,
                correct_answer: target::door(correct),
                stimulus: Stimulus::Dd(*s),
                reach: Some(0.0),
            }
        }
        Game::BarnyardBlast => {
            let s = &schedules.bb[stimulus_index];
            let correct = bb_correct_side(s);
            let side = if wrong { correct.opposite() } else { correct };
            let entities: Vec<Entity> = [Side::Left, Side::Right]
                .iter()
                .map(|&sd| Entity {
                    id: target::bb_target(sd),
                    pos: (sd.sign() * layout::BB_TARGET_X, layout::BB_TARGET_Z),
                })
                .collect();
            let idx = |sd: Side| if sd == Side::Left { 0 } else { 1 };
            Choice {
                entities,
                selected: idx(side),
                other: idx(side.opposite()),
                correct_answer: target::bb_target(correct),
                stimulus: Stimulus::Bb(*s),
                reach: None,
            }
        }
        Game::RainbowRandom => unreachable!("span trials are built separately"),
    }
}

struct Schedules {
    nk: Vec<crate::taskengine::NkStimulus>,
    dd: Vec<crate::taskengine::DdTrial>,
    bb: Vec<crate::taskengine::BbStimulus>,
}

fn logistic(d: f64, theta: f64, sigma: f64) -> f64 {
    1.0 / (1.0 + ((d - theta) / sigma).exp())
}

struct TrialDraws {
    stall: u64,
    latency: u64,
    wrong: bool,
    style: PathStyle,
    policy: GazePolicy,
}

fn draw_trial(params: &AgentParams, latency: &LogNormal<f64>, rng: &mut rng::Rng) -> TrialDraws {
    let lapse = rng.random::<f64>() < params.lapse_rate;
    let stall = if lapse {
        rng.random_range(LAPSE_RANGE_MS.0..=LAPSE_RANGE_MS.1)
    } else {
        0
    };
    let latency_ms = latency.sample(rng).round().max(1.0) as u64;
    let wrong = rng.random::<f64>() < params.error_rate;
    let style = if rng.random::<f64>() < params.off_style_rate {
        match params.path_style {
            PathStyle::Direct => PathStyle::Indirect,
            PathStyle::Indirect => PathStyle::Direct,
        }
    } else {
        params.path_style
    };
    let policy = if rng.random::<f64>() < params.off_gaze_rate {
        match params.gaze_policy {
            GazePolicy::EarlyFix | GazePolicy::LateFix => GazePolicy::NoFix,
            GazePolicy::NoFix => GazePolicy::EarlyFix,
        }
    } else {
        params.gaze_policy
    };
    TrialDraws {
        stall,
        latency: latency_ms,
        wrong,
        style,
        policy,
    }
}

fn choice_trial(
    game: Game,
    trial_index: u32,
    start: u64,
    choice: Choice,
    draws: &TrialDraws,
    params: &AgentParams,
) -> Scheduled {
    let sel = choice.entities[choice.selected].pos;
    let other = choice.entities[choice.other].pos;
    let (path, motor) = match choice.reach {
        Some(reach) => {
            let amp = (draws.style == PathStyle::Indirect).then_some(params.lateral_amplitude);
            let path = plan_path(sel, reach, amp);
            let ms = (path.length() / params.move_speed * 1000.0).ceil() as u64;
            (path, ms.max(1))
        }
        None => (Path::new(vec![(0.0, 0.0)]), AIM_MS),
    };
    let decision = draws.stall + draws.latency;
    let planned = decision + motor;
    let timeout = planned > RESPONSE_LIMIT_MS;
    let end_rel = if timeout { RESPONSE_LIMIT_MS } else { planned };
    let commit = match draws.policy {
        GazePolicy::EarlyFix => {
            draws.stall + (EARLY_COMMIT_FRACTION * draws.latency as f64).round() as u64
        }
        GazePolicy::LateFix => planned.saturating_sub(LATE_FIX_LEAD_MS).max(draws.stall),
        GazePolicy::NoFix => u64::MAX,
    };
    let m = motion::TrialMotion {
        path,
        move_start: decision,
        speed: params.move_speed,
        policy: draws.policy,
        stall: draws.stall,
        commit,
        selected: sel,
        other,
        turn_rate: params.turn_rate,
    };
    let trace = m.trace(end_rel);

    let selected_id = choice.entities[choice.selected].id.clone();
    let gaze_commit_ms = if timeout {
        None
    } else {
        let mut start_of_run = None;
        for ms in (0..=end_rel).rev() {
            let v = viewed(
                trace.positions[ms as usize],
                trace.yaw[ms as usize],
                &choice.entities,
            );
            if v.map(|e| e.id.as_str()) == Some(selected_id.as_str()) {
                start_of_run = Some(ms);
            } else {
                break;
            }
        }
        start_of_run
    };

    let end_t = Timestamp(start + end_rel);
    let response = (!timeout).then(|| selected_id.clone());
    let correct = response.as_deref() == Some(choice.correct_answer.as_str());
    let outcome = match (&response, correct) {
        (None, _) => Outcome::Timeout,
        (Some(_), true) => Outcome::Correct,
        (Some(_), false) => Outcome::Incorrect,
    };
    let mut events = Vec::new();
    if let Some(r) = &response {
        let ev = match game {
            Game::NetherKnight => {
                GameEvent::new(end_t, EventKind::ClickSelect, [("target", r.clone())])
            }
            Game::DoorDecipher => {
                GameEvent::new(end_t, EventKind::DoorEnter, [("door", r.clone())])
            }
            _ => GameEvent::new(end_t, EventKind::Shot, [("target", r.clone())]),
        };
        events.push(ev);
    }
    events.push(feedback_event(end_t, outcome, trial_index));
    let origin = area_origin(trial_index);
    let static_blocks = choice
        .entities
        .iter()
        .map(|e| EnvBlock {
            pos: [
                (origin.0 + e.pos.0).floor() as i32,
                layout::EYE_Y as i32 - 1,
                (origin.1 + e.pos.1).floor() as i32,
            ],
            kind: match game {
                Game::NetherKnight => "obsidian",
                Game::DoorDecipher => "oak_door",
                _ => "target",
            }
            .to_string(),
        })
        .collect();
    let planted_type = (game == Game::NetherKnight)
        .then(|| TrialType::new(draws.style == PathStyle::Direct, draws.policy.fixates()));
    Scheduled {
        record: TrialRecord {
            game,
            trial_index,
            start_t: Timestamp(start),
            end_t,
            stimulus: choice.stimulus,
            correct_answer: choice.correct_answer,
            response,
            outcome,
        },
        truth: TrialTruth {
            trial_index,
            decision_ms: decision,
            motor_ms: motor,
            rt_ms: end_rel,
            gaze_commit_ms,
            path_style: choice.reach.is_some().then_some(draws.style),
            gaze_policy: Some(draws.policy),
            planted_type,
            correct,
            lapse: draws.stall > 0,
            timeout,
        },
        origin,
        entities: choice.entities,
        yaw: trace.yaw,
        positions: trace.positions,
        events,
        env_blocks: Vec::new(),
        static_blocks,
    }
}

fn feedback_event(t: Timestamp, outcome: Outcome, trial_index: u32) -> GameEvent {
    GameEvent::new(
        t,
        EventKind::TrialFeedback,
        [
            ("outcome", outcome.name().to_string()),
            ("trial", trial_index.to_string()),
        ],
    )
}

fn random_pattern(size: u8, rng: &mut rng::Rng) -> Vec<PatternBlock> {
    let mut cells: Vec<(i32, i32)> = (0..RR_GRID)
        .flat_map(|x| (0..RR_GRID).map(move |y| (x, y)))
        .collect();
    cells.shuffle(rng);
    cells
        .into_iter()
        .take(usize::from(size))
        .map(|(x, y)| PatternBlock {
            x,
            y,
            color: *Color::ALL.choose(rng).expect("palette"),
        })
        .collect()
}

fn span_trial(
    trial_index: u32,
    start: u64,
    size: u8,
    draws: &TrialDraws,
    params: &AgentParams,
    rng: &mut rng::Rng,
) -> Result<Scheduled> {
    let pattern = random_pattern(size, rng);
    let succeed =
        rng.random::<f64>() < logistic(f64::from(size), params.span_theta, params.span_sigma);
    let mut built = pattern.clone();
    if !succeed {
        // recolor enough blocks to land at or below the 80% pass line
        let k = ((0.2 * f64::from(size)).ceil() as usize).max(1);
        for b in built.iter_mut().take(k) {
            let others: Vec<Color> = Color::ALL.into_iter().filter(|c| *c != b.color).collect();
            b.color = *others.choose(rng).expect("three other colors");
        }
    }
    let judged = rr_judge(&pattern, &built)?;
    let decision = draws.stall + draws.latency;
    let motor = RR_BLOCK_MS * u64::from(size) + RR_SUBMIT_MS;
    let planned = decision + motor;
    let timeout = planned > RESPONSE_LIMIT_MS;
    let end_rel = planned.min(RESPONSE_LIMIT_MS);
    let end_t = Timestamp(start + end_rel);
    let origin = area_origin(trial_index);
    let mut events = Vec::new();
    let mut env_blocks = Vec::new();
    for (j, b) in built.iter().enumerate() {
        let t = start + decision + RR_BLOCK_MS * (j as u64 + 1);
        if t > start + end_rel {
            break;
        }
        events.push(GameEvent::new(
            Timestamp(t),
            EventKind::BlockPlace,
            [
                ("cell", format!("{},{}", b.x, b.y)),
                ("color", b.color.name().to_string()),
            ],
        ));
        env_blocks.push((
            t,
            EnvBlock {
                pos: [origin.0 as i32 + b.x, layout::EYE_Y as i32 + b.y, 6],
                kind: format!("wool_{}", b.color.name()),
            },
        ));
    }
    let answer = if judged.pass {
        target::RR_PASS
    } else {
        target::RR_FAIL
    };
    let response = (!timeout).then(|| answer.to_string());
    let outcome = match &response {
        None => Outcome::Timeout,
        Some(_) if judged.pass => Outcome::Correct,
        Some(_) => Outcome::Incorrect,
    };
    if !timeout {
        events.push(GameEvent::new(
            end_t,
            EventKind::SkipPhase,
            [("phase", "submit".to_string())],
        ));
    }
    events.push(feedback_event(end_t, outcome, trial_index));
    let n = end_rel as usize + 1;
    Ok(Scheduled {
        record: TrialRecord {
            game: Game::RainbowRandom,
            trial_index,
            start_t: Timestamp(start),
            end_t,
            stimulus: Stimulus::Rr(RrStimulus {
                size,
                target: pattern,
                built,
            }),
            correct_answer: target::RR_PASS.to_string(),
            response,
            outcome,
        },
        truth: TrialTruth {
            trial_index,
            decision_ms: decision,
            motor_ms: motor,
            rt_ms: end_rel,
            gaze_commit_ms: None,
            path_style: None,
            gaze_policy: None,
            planted_type: None,
            correct: judged.pass,
            lapse: draws.stall > 0,
            timeout,
        },
        origin,
        entities: Vec::new(),
        yaw: vec![0.0; n],
        positions: vec![(0.0, 0.0); n],
        events,
        env_blocks,
        static_blocks: Vec::new(),
    })
}

/// Identifies a simulated session in its header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionIds {
    pub player: String,
    pub session: String,
}

/// Simulates one session with a generic player/session id.
pub fn simulate_session(
    game: Game,
    params: &AgentParams,
    seed: u64,
) -> Result<(LogFile, GroundTruth)> {
    let ids = SessionIds {
        player: "player".to_string(),
        session: format!("{}-{seed}", game.code()),
    };
    simulate_session_as(&ids, game, params, seed)
}

pub fn simulate_session_as(
    ids: &SessionIds,
    game: Game,
    params: &AgentParams,
    seed: u64,
) -> Result<(LogFile, GroundTruth)> {
    params.validate()?;
    let mut rng = rng::seeded(derive_seed(seed, &[0]));
    let latency = LogNormal::new(params.latency_mu, params.latency_sigma)
        .map_err(|e| Error::InvalidInput(format!("latency distribution: {e}")))?;
    let rule = if rng.random::<bool>() {
        NkRule::Semantic
    } else {
        NkRule::Color
    };
    let schedules = Schedules {
        nk: if game == Game::NetherKnight {
            nk_schedule(rule, derive_seed(seed, &[1]))
        } else {
            vec![]
        },
        dd: if game == Game::DoorDecipher {
            dd_schedule(derive_seed(seed, &[2]))
        } else {
            vec![]
        },
        bb: if game == Game::BarnyardBlast {
            bb_schedule(derive_seed(seed, &[3]))
        } else {
            vec![]
        },
    };
    let period = 1000 / u64::from(STATE_HZ);

    let mut trials: Vec<Scheduled> = Vec::new();
    let mut start = LEAD_IN_MS;
    let mut rr_state = RrState::new();
    let mut index = 0u32;
    loop {
        let draws = draw_trial(params, &latency, &mut rng);
        let s = match game {
            Game::RainbowRandom => {
                if rr_state.finished {
                    break;
                }
                let size = rr_state.current_size;
                let s = span_trial(index, start, size, &draws, params, &mut rng)?;
                rr_state = rr_step(&rr_state, s.record.outcome == Outcome::Correct)?;
                s
            }
            _ => {
                let n = match game {
                    Game::NetherKnight => schedules.nk.len(),
                    Game::DoorDecipher => schedules.dd.len(),
                    _ => schedules.bb.len(),
                };
                if index as usize >= n {
                    break;
                }
                let choice = choice_for(game, index as usize, &schedules, draws.wrong, &mut rng);
                choice_trial(game, index, start, choice, &draws, params)
            }
        };
        start = ceil_to_grid(s.record.end_t.0 + FEEDBACK_MS, period);
        trials.push(s);
        index += 1;
    }
    let session_end = trials
        .last()
        .map(|s| ceil_to_grid(s.record.end_t.0 + FEEDBACK_MS, period))
        .unwrap_or(LEAD_IN_MS);

    let mut log = Vec::new();
    // state samples
    let mut k = 0usize;
    for t in (0..=session_end).step_by(period as usize) {
        while k + 1 < trials.len() && trials[k + 1].record.start_t.0 <= t {
            k += 1;
        }
        let sample = match trials.get(k) {
            Some(s) => {
                let start = s.record.start_t.0;
                let rel = if t < start {
                    0
                } else {
                    (t - start).min(s.yaw.len() as u64 - 1)
                } as usize;
                let (lx, lz) = s.positions[rel];
                let yaw = s.yaw[rel];
                let view = viewed((lx, lz), yaw, &s.entities).map(|e| e.id.clone());
                (s.origin.0 + lx, s.origin.1 + lz, yaw, view)
            }
            None => (0.0, 0.0, 0.0, None),
        };
        log.push(LogEntry::State(StateSample {
            t: Timestamp(t),
            x: Blocks::from_f64(sample.0),
            y: Blocks::from_f64(layout::EYE_Y),
            z: Blocks::from_f64(sample.1),
            yaw: Degrees::yaw(sample.2),
            pitch: Degrees::from_f64(0.0),
            view: sample.3,
        }));
    }
    // environment snapshots
    let mut k = 0usize;
    for t in (0..=session_end).step_by(ENV_PERIOD_MS as usize) {
        while k + 1 < trials.len() && trials[k + 1].record.start_t.0 <= t {
            k += 1;
        }
        let blocks = match trials.get(k) {
            Some(s) => {
                let mut b = s.static_blocks.clone();
                b.extend(
                    s.env_blocks
                        .iter()
                        .filter(|(pt, _)| *pt <= t)
                        .map(|(_, blk)| blk.clone()),
                );
                b
            }
            None => Vec::new(),
        };
        log.push(LogEntry::Env(EnvSample {
            t: Timestamp(t),
            blocks,
        }));
    }
    for s in &trials {
        log.extend(s.events.iter().cloned().map(LogEntry::Event));
    }
    log.sort_by_key(LogEntry::sort_key);

    let file = LogFile {
        header: Header {
            session: ids.session.clone(),
            player: ids.player.clone(),
            game,
            state_hz: STATE_HZ,
            env_period_ms: ENV_PERIOD_MS,
            seed,
            gaze: true,
        },
        log,
        trials: trials.iter().map(|s| s.record.clone()).collect(),
    };
    validate(&file)?;
    let truth = GroundTruth {
        session: ids.session.clone(),
        player: ids.player.clone(),
        game,
        seed,
        trials: trials.into_iter().map(|s| s.truth).collect(),
    };
    Ok((file, truth))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSpec {
    pub id: String,
    #[serde(default)]
    pub params: AgentParams,
    pub sessions: u32,
}

/// Cohort description, usually read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    #[serde(default = "default_games")]
    pub games: Vec<Game>,
    pub players: Vec<PlayerSpec>,
}

fn default_games() -> Vec<Game> {
    vec![Game::NetherKnight]
}

impl CohortSpec {
    pub fn from_json(text: &str) -> Result<CohortSpec> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn session_id(player: &str, game: Game, session: u32) -> String {
    format!("{player}-{}-s{}", game.code(), session + 1)
}

/// Every (player, session, game) of the cohort, in that order. Seeds derive from
/// the master seed and the (player index, session, game) path.
pub fn simulate_cohort(spec: &CohortSpec, seed: u64) -> Result<Vec<SimulatedSession>> {
    if spec.players.is_empty() {
        return Err(Error::InvalidInput("cohort has no players".to_string()));
    }
    let mut ids = std::collections::BTreeSet::new();
    for p in &spec.players {
        if !ids.insert(p.id.as_str()) {
            return Err(Error::InvalidInput(format!("duplicate player id {}", p.id)));
        }
        p.params.validate()?;
    }
    let mut out = Vec::new();
    for (pi, p) in spec.players.iter().enumerate() {
        for s in 0..p.sessions {
            for g in &spec.games {
                let game_index = Game::ALL.iter().position(|x| x == g).expect("known game") as u64;
                let session_seed = derive_seed(seed, &[pi as u64, u64::from(s), game_index]);
                let ids = SessionIds {
                    player: p.id.clone(),
                    session: session_id(&p.id, *g, s),
                };
                let (log, truth) = simulate_session_as(&ids, *g, &p.params, session_seed)?;
                out.push(SimulatedSession { log, truth });
            }
        }
    }
    Ok(out)
}

/// Ground truth of a whole cohort, keyed by session id.
pub fn truth_index(sessions: &[SimulatedSession]) -> BTreeMap<String, GroundTruth> {
    sessions
        .iter()
        .map(|s| (s.truth.session.clone(), s.truth.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_agent_is_always_correct() {
        let p = AgentParams {
            error_rate: 0.0,
            lapse_rate: 0.0,
            ..AgentParams::default()
        };
        for game in Game::ALL {
            if game == Game::RainbowRandom {
                continue;
            }
            let (log, truth) = simulate_session(game, &p, 5).unwrap();
            assert!(
                log.trials.iter().all(|t| t.outcome == Outcome::Correct),
                "{game}"
            );
            assert!(truth.trials.iter().all(|t| t.correct));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let p = AgentParams {
            lapse_rate: 0.1,
            ..AgentParams::default()
        };
        let a = simulate_session(Game::NetherKnight, &p, 9).unwrap();
        let b = simulate_session(Game::NetherKnight, &p, 9).unwrap();
        assert_eq!(a, b);
        let c = simulate_session(Game::NetherKnight, &p, 10).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn rt_is_decision_plus_motor() {
        let p = AgentParams {
            lapse_rate: 0.2,
            ..AgentParams::default()
        };
        let (log, truth) = simulate_session(Game::DoorDecipher, &p, 1).unwrap();
        for (rec, t) in log.trials.iter().zip(&truth.trials) {
            assert_eq!(rec.end_t.0 - rec.start_t.0, t.rt_ms);
            assert_eq!(t.rt_ms, t.decision_ms + t.motor_ms);
        }
    }

    #[test]
    fn span_sessions_follow_the_staircase() {
        let (log, truth) =
            simulate_session(Game::RainbowRandom, &AgentParams::default(), 4).unwrap();
        let mut state = RrState::new();
        for (rec, t) in log.trials.iter().zip(&truth.trials) {
            let Stimulus::Rr(s) = &rec.stimulus else {
                panic!()
            };
            assert_eq!(s.size, state.current_size);
            assert_eq!(rr_judge(&s.target, &s.built).unwrap().pass, t.correct);
            state = rr_step(&state, rec.outcome == Outcome::Correct).unwrap();
        }
        assert!(state.finished);
    }

    #[test]
    fn cohort_sizes_and_ids() {
        let spec = CohortSpec {
            games: vec![Game::NetherKnight],
            players: (0..10)
                .map(|i| PlayerSpec {
                    id: format!("p{i:02}"),
                    params: AgentParams::default(),
                    sessions: 2,
                })
                .collect(),
        };
        let c = simulate_cohort(&spec, 77).unwrap();
        assert_eq!(c.len(), 20);
        assert_eq!(c[0].log.header.player, c[1].log.header.player);
        assert_eq!(c[1].log.header.session, "p00-NK-s2");
    }

    #[test]
    fn gaze_commit_is_recovered_from_the_log() {
        use crate::endpoints::trial_measures;
        let mut hits = 0;
        let mut total = 0;
        for (policy, seed) in [(GazePolicy::EarlyFix, 1), (GazePolicy::LateFix, 2)] {
            let p = AgentParams {
                gaze_policy: policy,
                path_style: PathStyle::Indirect,
                ..AgentParams::default()
            };
            let (log, truth) = simulate_session(Game::NetherKnight, &p, seed).unwrap();
            let m = trial_measures(&log).unwrap();
            for (m, t) in m.iter().zip(&truth.trials) {
                let commit = t.gaze_commit_ms.expect("fixating policy") as f64 / 1000.0;
                total += 1;
                if m.fixated == Some(true) && (m.grt.unwrap() - commit).abs() <= 0.05 {
                    hits += 1;
                }
            }
        }
        assert!(hits as f64 >= 0.95 * total as f64, "{hits}/{total}");
    }

    #[test]
    fn no_fix_never_views_the_choice() {
        let p = AgentParams {
            gaze_policy: GazePolicy::NoFix,
            ..AgentParams::default()
        };
        let (_, truth) = simulate_session(Game::NetherKnight, &p, 3).unwrap();
        assert!(truth.trials.iter().all(|t| t.gaze_commit_ms.is_none()));
    }
}
