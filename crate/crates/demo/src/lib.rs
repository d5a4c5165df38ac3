//! Browser bindings for a few cogplay operations. Build with
//! `wasm-pack build crates/demo --target web --out-dir www/pkg` and serve `www/`.

use wasm_bindgen::prelude::*;

use cogplay::endpoints::{fit_2pl, logistic};
use cogplay::stats::{bayes_factor, p_two_tailed, CorrelationPrior};
use cogplay::synthplayer::{simulate_cohort, AgentParams, CohortSpec, PlayerSpec};
use cogplay::taskengine::Game;
use cogplay::trajectory::{analyze, TrajectoryConfig};

fn js_err(e: cogplay::Error) -> String {
    e.to_string()
}

/// `[θ, σ, rmse, capped]` for pass (non-zero) / fail outcomes at each level.
#[wasm_bindgen]
pub fn fit_psychometric(levels: &[f64], passed: &[u8]) -> Result<Vec<f64>, String> {
    let passed: Vec<bool> = passed.iter().map(|&p| p != 0).collect();
    let f = fit_2pl(levels, &passed).map_err(js_err)?;
    Ok(vec![
        f.theta,
        f.sigma,
        f.rmse,
        f64::from(u8::from(f.capped)),
    ])
}

/// Success probability at `points` evenly spaced levels in [from, to].
#[wasm_bindgen]
pub fn psychometric_curve(theta: f64, sigma: f64, from: f64, to: f64, points: usize) -> Vec<f64> {
    let step = if points > 1 {
        (to - from) / (points - 1) as f64
    } else {
        0.0
    };
    (0..points)
        .map(|i| logistic(from + step * i as f64, theta, sigma))
        .collect()
}

/// `[p, BF10 uniform prior on ρ, BF10 JZS regression prior]` for r on n pairs.
#[wasm_bindgen]
pub fn correlation_evidence(r: f64, n: usize) -> Result<Vec<f64>, String> {
    let p = p_two_tailed(r, n).map_err(js_err)?.p;
    let uniform = bayes_factor(r, n, CorrelationPrior::default()).map_err(js_err)?;
    let jzs = bayes_factor(r, n, CorrelationPrior::jzs_medium()).map_err(js_err)?;
    Ok(vec![p, uniform, jzs])
}

#[wasm_bindgen]
pub struct Embedding {
    points: Vec<f64>,
    n_clusters: usize,
    diagonal: f64,
}

#[wasm_bindgen]
impl Embedding {
    /// Flat `[x, y, trial type 0..3 (DG, IG, DN, IN), cluster or -1]` per trial.
    #[wasm_bindgen(getter)]
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    /// Mean diagonal of the identification confusion matrix, percent.
    #[wasm_bindgen(getter)]
    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }
}

/// Simulates Nether Knight sessions for `players` players whose detour and
/// fixation habits spread across the four trial types, then embeds and clusters.
#[wasm_bindgen]
pub fn embed_cohort(players: u32, sessions: u32, seed: u32) -> Result<Embedding, String> {
    if !(2..=40).contains(&players) || !(1..=8).contains(&sessions) {
        return Err("players must be 2..40 and sessions 1..8".into());
    }
    let spec = CohortSpec {
        games: vec![Game::NetherKnight],
        players: (0..players)
            .map(|i| {
                // low-discrepancy spread over the (detour, no-fixation) rate square
                let a = (0.5 + f64::from(i) * 0.618_034) % 1.0;
                let b = (0.5 + f64::from(i) * 0.754_878) % 1.0;
                PlayerSpec {
                    id: format!("p{:02}", i + 1),
                    sessions,
                    params: AgentParams {
                        off_style_rate: 0.05 + 0.9 * a,
                        off_gaze_rate: 0.05 + 0.9 * b,
                        error_rate: 0.0,
                        ..AgentParams::default()
                    },
                }
            })
            .collect(),
    };
    let seed = u64::from(seed);
    let sims = simulate_cohort(&spec, seed).map_err(js_err)?;
    let logs: Vec<_> = sims.into_iter().map(|s| s.log).collect();
    let mut cfg = TrajectoryConfig::default();
    // small cohorts are too sparse for the desk-scale density threshold
    let trials = logs.iter().map(|l| l.trials.len()).sum::<usize>();
    cfg.cluster.min_samples = (trials / 30).clamp(5, cfg.cluster.min_samples);
    let a = analyze(&logs, &cfg, seed).map_err(js_err)?;
    let points = a
        .trials
        .iter()
        .flat_map(|t| {
            [
                t.embedding[0],
                t.embedding[1],
                t.trial_type.index() as f64,
                t.cluster as f64,
            ]
        })
        .collect();
    Ok(Embedding {
        points,
        n_clusters: a.n_clusters,
        diagonal: a.identification.mean_diagonal(),
    })
}
