#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use cogplay::synthplayer::{
    simulate_cohort, AgentParams, CohortSpec, GazePolicy, PathStyle, PlayerSpec, SimulatedSession,
};
use cogplay::taskengine::Game;
use cogplay::trajectory::TrialType;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
}

pub fn fixture_paths() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(fixtures_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "pxlog"))
        .collect();
    v.sort();
    v
}

/// Ten players spanning the four trial types: each mixes path style and
/// fixation at its own rates, so session profiles differ between players.
pub fn style_mix_players(sessions: u32) -> Vec<PlayerSpec> {
    let mut rates = Vec::new();
    for s in [0.05, 0.5, 0.95] {
        for g in [0.05, 0.5, 0.95] {
            rates.push((s, g));
        }
    }
    rates.push((0.25, 0.75));
    rates
        .into_iter()
        .enumerate()
        .map(|(i, (off_style, off_gaze))| PlayerSpec {
            id: format!("p{:02}", i + 1),
            sessions,
            params: AgentParams {
                path_style: PathStyle::Direct,
                gaze_policy: GazePolicy::EarlyFix,
                off_style_rate: off_style,
                off_gaze_rate: off_gaze,
                error_rate: 0.0,
                ..AgentParams::default()
            },
        })
        .collect()
}

pub fn nk_cohort(sessions: u32, seed: u64) -> Vec<SimulatedSession> {
    let spec = CohortSpec {
        games: vec![Game::NetherKnight],
        players: style_mix_players(sessions),
    };
    simulate_cohort(&spec, seed).unwrap()
}

/// Planted type of every NK trial, keyed by (session, trial index).
pub fn planted_types(sims: &[SimulatedSession]) -> BTreeMap<(String, u32), TrialType> {
    let mut out = BTreeMap::new();
    for s in sims {
        for t in &s.truth.trials {
            if let Some(pt) = t.planted_type {
                out.insert((s.truth.session.clone(), t.trial_index), pt);
            }
        }
    }
    out
}
