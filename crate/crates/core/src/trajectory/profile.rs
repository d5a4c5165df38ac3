//! Session profiles over trial types, Jensen-Shannon distance, and player identification.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::types::{SessionProfile, TrialType};
use crate::{Error, Result};

pub fn session_profile(types: &[TrialType]) -> Result<SessionProfile> {
    if types.is_empty() {
        return Err(Error::Precondition(
            "session profile needs at least one classified trial".into(),
        ));
    }
    let mut counts = [0.0; 4];
    for t in types {
        counts[t.index()] += 1.0;
    }
    let n = types.len() as f64;
    Ok(SessionProfile(counts.map(|c| c / n)))
}

fn kl2(p: &[f64; 4], m: &[f64; 4]) -> f64 {
    p.iter()
        .zip(m)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, mi)| pi * (pi / mi).log2())
        .sum()
}

/// Square root of the base-2 Jensen-Shannon divergence.
pub fn jsd(p: &SessionProfile, q: &SessionProfile) -> f64 {
    let m: [f64; 4] = std::array::from_fn(|i| 0.5 * (p.0[i] + q.0[i]));
    let div = 0.5 * kl2(&p.0, &m) + 0.5 * kl2(&q.0, &m);
    div.clamp(0.0, 1.0).sqrt()
}

/// Partial votes for the true player landing at rank 2 and 3.
pub const RANK_VOTES: [f64; 2] = [0.5, 0.3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEntry {
    pub player: String,
    pub session: String,
    pub profile: SessionProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    /// Sorted player ids; row and column order of the matrices.
    pub players: Vec<String>,
    /// Raw votes, rows are true players.
    pub votes: Vec<Vec<f64>>,
    /// Votes normalized to 100 per row.
    pub percent: Vec<Vec<f64>>,
    /// Sessions whose top-three ranking involved an exact JSD tie.
    pub tied_sessions: Vec<String>,
    /// Players with a single session, whose own average had to include it.
    pub self_inclusive: Vec<String>,
}

impl Identification {
    pub fn mean_diagonal(&self) -> f64 {
        let n = self.players.len();
        if n == 0 {
            return 0.0;
        }
        (0..n).map(|i| self.percent[i][i]).sum::<f64>() / n as f64
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        let mut header = vec!["true_player".to_string()];
        header.extend(self.players.iter().cloned());
        w.write_record(&header)?;
        for (p, row) in self.players.iter().zip(&self.percent) {
            let mut rec = vec![p.clone()];
            rec.extend(row.iter().map(|v| format!("{v:.2}")));
            w.write_record(&rec)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn average(profiles: &[&SessionProfile]) -> SessionProfile {
    let n = profiles.len() as f64;
    SessionProfile(std::array::from_fn(|i| {
        profiles.iter().map(|p| p.0[i]).sum::<f64>() / n
    }))
}

/// Ranks every player's average profile against each session by ascending JSD
/// and tallies weighted votes. A session's own player is represented by the
/// average of that player's other sessions.
pub fn identify(sessions: &[SessionEntry]) -> Result<Identification> {
    let mut by_player: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in sessions.iter().enumerate() {
        by_player.entry(s.player.as_str()).or_default().push(i);
    }
    if by_player.is_empty() {
        return Err(Error::Precondition(
            "identification needs at least one session".into(),
        ));
    }
    let players: Vec<String> = by_player.keys().map(|s| s.to_string()).collect();
    let col: BTreeMap<&str, usize> = by_player.keys().enumerate().map(|(i, p)| (*p, i)).collect();
    let full: Vec<SessionProfile> = by_player
        .values()
        .map(|idx| {
            average(
                &idx.iter()
                    .map(|&i| &sessions[i].profile)
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let self_inclusive: Vec<String> = by_player
        .iter()
        .filter(|(_, idx)| idx.len() == 1)
        .map(|(p, _)| p.to_string())
        .collect();

    let np = players.len();
    let mut votes = vec![vec![0.0; np]; np];
    let mut tied_sessions = Vec::new();
    for (si, s) in sessions.iter().enumerate() {
        let own = col[s.player.as_str()];
        let mut ranked: Vec<(f64, usize)> = (0..np)
            .map(|c| {
                let avg = if c == own && by_player[s.player.as_str()].len() > 1 {
                    let others: Vec<&SessionProfile> = by_player[s.player.as_str()]
                        .iter()
                        .filter(|&&i| i != si)
                        .map(|&i| &sessions[i].profile)
                        .collect();
                    average(&others)
                } else {
                    full[c]
                };
                (jsd(&s.profile, &avg), c)
            })
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if ranked.windows(2).take(2).any(|w| w[0].0 == w[1].0) {
            tied_sessions.push(s.session.clone());
        }
        votes[own][ranked[0].1] += 1.0;
        for (rank, bonus) in RANK_VOTES.iter().enumerate() {
            if ranked.get(rank + 1).is_some_and(|r| r.1 == own) {
                votes[own][own] += bonus;
            }
        }
    }
    let percent = votes
        .iter()
        .map(|row| {
            let total: f64 = row.iter().sum();
            row.iter()
                .map(|v| if total > 0.0 { 100.0 * v / total } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(Identification {
        players,
        votes,
        percent,
        tied_sessions,
        self_inclusive,
    })
}

/// Maps each cluster to the planted type most common in it and returns the
/// fraction of non-noise points whose mapped type matches, with the mapping.
pub fn majority_mapping_accuracy(
    labels: &[i64],
    truth: &[TrialType],
) -> (f64, BTreeMap<i64, TrialType>) {
    let mut counts: BTreeMap<i64, [usize; 4]> = BTreeMap::new();
    for (&l, t) in labels.iter().zip(truth) {
        if l >= 0 {
            counts.entry(l).or_default()[t.index()] += 1;
        }
    }
    let mut mapping = BTreeMap::new();
    let (mut hit, mut total) = (0, 0);
    for (l, c) in &counts {
        let best = (0..4)
            .max_by_key(|&i| (c[i], std::cmp::Reverse(i)))
            .unwrap();
        mapping.insert(*l, TrialType::ALL[best]);
        hit += c[best];
        total += c.iter().sum::<usize>();
    }
    let acc = if total > 0 {
        hit as f64 / total as f64
    } else {
        0.0
    };
    (acc, mapping)
}
