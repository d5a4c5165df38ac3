//! Whole-cohort trajectory analysis over Nether Knight session logs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::canon::{canonicalize, extract_nk_trajectory, resample, DEFAULT_LENGTH};
use super::dbscan::{dbscan, n_clusters, ClusterParams};
use super::features::{classify_trial, features27, max_lateral_deviation, FEATURE_NAMES};
use super::profile::{identify, session_profile, Identification, SessionEntry};
use super::types::{TrajectoryError, TrialType};
use super::umap::{embed_2d, zscore, EmbedParams};
use crate::endpoints::trial_measures;
use crate::logmodel::LogFile;
use crate::taskengine::Game;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryConfig {
    pub embed: EmbedParams,
    pub cluster: ClusterParams,
    /// Blocks.
    pub lateral_threshold: f64,
    pub resample_length: usize,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            embed: EmbedParams::default(),
            cluster: ClusterParams::default(),
            lateral_threshold: 0.5,
            resample_length: DEFAULT_LENGTH,
        }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        self.embed.validate()?;
        self.cluster.validate()?;
        if !(self.lateral_threshold >= 0.0 && self.lateral_threshold.is_finite()) {
            return Err(Error::InvalidInput("lateral_threshold must be >= 0".into()));
        }
        if self.resample_length < 2 {
            return Err(Error::InvalidInput(
                "resample_length must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub participant: String,
    pub session: String,
    pub trial_index: u32,
    pub trial_type: TrialType,
    pub fixated: bool,
    pub max_lateral_deviation: f64,
    pub features: Vec<f64>,
    pub embedding: [f64; 2],
    pub cluster: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryAnalysis {
    pub trials: Vec<TrialRow>,
    /// Dropped trials by reason.
    pub rejected: BTreeMap<String, usize>,
    pub n_clusters: usize,
    pub profiles: Vec<SessionEntry>,
    pub identification: Identification,
}

impl TrajectoryAnalysis {
    pub fn features_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        let mut header: Vec<&str> = vec!["participant", "session", "trial"];
        header.extend(FEATURE_NAMES);
        w.write_record(&header)?;
        for t in &self.trials {
            let mut rec = vec![
                t.participant.clone(),
                t.session.clone(),
                t.trial_index.to_string(),
            ];
            rec.extend(t.features.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        finish(w)
    }

    pub fn embedding_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record([
            "participant",
            "session",
            "trial",
            "x",
            "y",
            "cluster",
            "type",
            "fixated",
        ])?;
        for t in &self.trials {
            w.write_record([
                t.participant.clone(),
                t.session.clone(),
                t.trial_index.to_string(),
                t.embedding[0].to_string(),
                t.embedding[1].to_string(),
                t.cluster.to_string(),
                t.trial_type.to_string(),
                t.fixated.to_string(),
            ])?;
        }
        finish(w)
    }

    pub fn profiles_json(&self) -> Result<String> {
        let rows: Vec<serde_json::Value> = self
            .profiles
            .iter()
            .map(|p| {
                let mut m = serde_json::Map::new();
                m.insert("participant".into(), p.player.clone().into());
                m.insert("session".into(), p.session.clone().into());
                for t in TrialType::ALL {
                    m.insert(t.name().into(), p.profile.get(t).into());
                }
                serde_json::Value::Object(m)
            })
            .collect();
        Ok(serde_json::to_string_pretty(&rows)?)
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Canonicalizes, types and featurizes every Nether Knight trial with a
/// selection, embeds and clusters the features, then profiles sessions and
/// runs player identification. Other games are ignored.
pub fn analyze(
    files: &[LogFile],
    config: &TrajectoryConfig,
    seed: u64,
) -> Result<TrajectoryAnalysis> {
    config.validate()?;
    let mut trials = Vec::new();
    let mut rejected: BTreeMap<String, usize> = BTreeMap::new();
    let mut per_session: BTreeMap<(String, String), Vec<TrialType>> = BTreeMap::new();
    for file in files.iter().filter(|f| f.header.game == Game::NetherKnight) {
        if !file.header.gaze {
            return Err(Error::Precondition(format!(
                "session {} has no gaze channel; trial typing needs it",
                file.header.session
            )));
        }
        let measures = trial_measures(file)?;
        for m in measures {
            let Some(raw) = extract_nk_trajectory(file, m.trial_index)? else {
                *rejected
                    .entry(TrajectoryError::NoSelection.to_string())
                    .or_default() += 1;
                continue;
            };
            let canon = match canonicalize(&raw) {
                Ok(c) => c,
                Err(e) => {
                    let key = match e {
                        TrajectoryError::TooFewSamples(_) => {
                            "fewer than two valid samples".to_string()
                        }
                        other => other.to_string(),
                    };
                    *rejected.entry(key).or_default() += 1;
                    continue;
                }
            };
            let fixated = m.fixated.unwrap_or(false);
            let trial_type = classify_trial(&canon, config.lateral_threshold, fixated);
            let r = resample(&canon, config.resample_length);
            per_session
                .entry((file.header.player.clone(), file.header.session.clone()))
                .or_default()
                .push(trial_type);
            trials.push(TrialRow {
                participant: file.header.player.clone(),
                session: file.header.session.clone(),
                trial_index: m.trial_index,
                trial_type,
                fixated,
                max_lateral_deviation: max_lateral_deviation(&canon),
                features: features27(&r).to_vec(),
                embedding: [0.0; 2],
                cluster: -1,
            });
        }
    }
    let rows = zscore(
        &trials
            .iter()
            .map(|t| t.features.clone())
            .collect::<Vec<_>>(),
    );
    let points = embed_2d(&rows, &config.embed, seed)?;
    let labels = dbscan(&points, &config.cluster);
    for ((t, p), l) in trials.iter_mut().zip(&points).zip(&labels) {
        t.embedding = *p;
        t.cluster = *l;
    }
    let profiles = per_session
        .into_iter()
        .map(|((player, session), types)| {
            Ok(SessionEntry {
                player,
                session,
                profile: session_profile(&types)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let identification = identify(&profiles)?;
    Ok(TrajectoryAnalysis {
        trials,
        rejected,
        n_clusters: n_clusters(&labels),
        profiles,
        identification,
    })
}
