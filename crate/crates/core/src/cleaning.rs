//! Multi-step outlier exclusion for per-trial endpoint values (seconds).
//!
//! 1. Drop trials above a hard cutoff.
//! 2. Drop whole sessions where too many trials exceeded that cutoff.
//! 3. Within each remaining session, drop trials far from the session median in log space.
//!
//! A separate participant-level filter works on summary values.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Normal-consistency constant for the MAD.
pub const MAD_SCALE: f64 = 1.4826;
/// Normal-consistency constant for the mean absolute deviation fallback (√(π/2)).
pub const MEAN_AD_SCALE: f64 = 1.253_314;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CleaningConfig {
    /// Seconds.
    pub max_cutoff: f64,
    pub session_loss_threshold: f64,
    pub log_mad_multiplier: f64,
    pub participant_mad_ratio: f64,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig {
            max_cutoff: 10.0,
            session_loss_threshold: 0.25,
            log_mad_multiplier: 3.0,
            participant_mad_ratio: 3.5,
        }
    }
}

impl CleaningConfig {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [
            self.max_cutoff,
            self.session_loss_threshold,
            self.log_mad_multiplier,
            self.participant_mad_ratio,
        ]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite());
        if all_positive {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "cleaning parameters must be positive: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialValue {
    pub trial_index: u32,
    pub value: f64,
}

/// One session's per-trial endpoint values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionValues {
    pub participant: String,
    pub session: String,
    pub trials: Vec<TrialValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionDisposition {
    Kept,
    Dropped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionOutcome {
    pub participant: String,
    pub session: String,
    pub trials: usize,
    pub over_cutoff: usize,
    pub log_mad_removed: usize,
    pub disposition: SessionDisposition,
}

/// Exclusion accounting for one assessment, in the layout of the exclusion tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub assessment: String,
    pub trials_total: usize,
    /// Step 1: trials above the cutoff (in any session).
    pub lost_cutoff: usize,
    /// Step 2: remaining trials of dropped sessions.
    pub lost_session: usize,
    /// Step 3: log-MAD removals in kept sessions.
    pub lost_log_mad: usize,
    pub sessions_total: usize,
    pub sessions_lost: usize,
    pub sessions: Vec<SessionOutcome>,
}

impl ExclusionReport {
    pub fn trials_lost(&self) -> usize {
        self.lost_cutoff + self.lost_session + self.lost_log_mad
    }

    pub fn trials_lost_pct(&self) -> f64 {
        pct(self.trials_lost(), self.trials_total)
    }

    pub fn sessions_lost_pct(&self) -> f64 {
        pct(self.sessions_lost, self.sessions_total)
    }

    /// Merges reports for the same assessment (e.g. computed in parallel).
    pub fn merge(mut self, other: ExclusionReport) -> ExclusionReport {
        self.trials_total += other.trials_total;
        self.lost_cutoff += other.lost_cutoff;
        self.lost_session += other.lost_session;
        self.lost_log_mad += other.lost_log_mad;
        self.sessions_total += other.sessions_total;
        self.sessions_lost += other.sessions_lost;
        self.sessions.extend(other.sessions);
        self
    }
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn group_thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

pub const REPORT_HEADER: [&str; 7] = [
    "Assessment",
    "Trials Found",
    "Trials Lost",
    "Trials Lost %",
    "Sessions Total",
    "Sessions Lost",
    "Sessions Lost %",
];

/// Exclusion table as CSV: assessment name followed by the six count/percent columns.
pub fn report_csv(reports: &[ExclusionReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        w.write_record([
            r.assessment.clone(),
            group_thousands(r.trials_total),
            group_thousands(r.trials_lost()),
            format!("{:.1}%", r.trials_lost_pct()),
            r.sessions_total.to_string(),
            r.sessions_lost.to_string(),
            format!("{:.0}%", r.sessions_lost_pct()),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Robust center and scale: median and 1.4826·MAD, falling back to
/// 1.2533·(mean absolute deviation from the median) when the MAD is zero.
/// A zero scale means the values carry no spread at all.
pub fn robust_center_scale(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let med = median(&v);
    let mut dev: Vec<f64> = v.iter().map(|x| (x - med).abs()).collect();
    dev.sort_by(f64::total_cmp);
    let mad = median(&dev);
    let scale = if mad > 0.0 {
        MAD_SCALE * mad
    } else {
        MEAN_AD_SCALE * dev.iter().sum::<f64>() / dev.len() as f64
    };
    Some((med, scale))
}

/// Flags values with |v − median| > `limit` × robust scale. Nothing is flagged
/// when the scale is zero.
fn robust_outliers(values: &[f64], limit: f64) -> Vec<bool> {
    match robust_center_scale(values) {
        Some((med, scale)) if scale > 0.0 => values
            .iter()
            .map(|v| (v - med).abs() > limit * scale)
            .collect(),
        _ => vec![false; values.len()],
    }
}

pub fn clean_sessions(
    assessment: &str,
    sessions: &[SessionValues],
    config: &CleaningConfig,
) -> Result<(Vec<SessionValues>, ExclusionReport)> {
    if sessions.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no sessions to clean for {assessment}"
        )));
    }
    config.validate()?;
    let mut report = ExclusionReport {
        assessment: assessment.to_string(),
        trials_total: 0,
        lost_cutoff: 0,
        lost_session: 0,
        lost_log_mad: 0,
        sessions_total: sessions.len(),
        sessions_lost: 0,
        sessions: Vec::with_capacity(sessions.len()),
    };
    let mut kept = Vec::new();
    for s in sessions {
        if let Some(bad) = s.trials.iter().find(|t| !(t.value > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "non-positive endpoint {} in session {} trial {}",
                bad.value, s.session, bad.trial_index
            )));
        }
        let n = s.trials.len();
        report.trials_total += n;
        let under: Vec<TrialValue> = s
            .trials
            .iter()
            .copied()
            .filter(|t| t.value <= config.max_cutoff)
            .collect();
        let over = n - under.len();
        report.lost_cutoff += over;
        let mut outcome = SessionOutcome {
            participant: s.participant.clone(),
            session: s.session.clone(),
            trials: n,
            over_cutoff: over,
            log_mad_removed: 0,
            disposition: SessionDisposition::Kept,
        };
        if n > 0 && over as f64 / n as f64 > config.session_loss_threshold {
            report.lost_session += under.len();
            report.sessions_lost += 1;
            outcome.disposition = SessionDisposition::Dropped;
            report.sessions.push(outcome);
            continue;
        }
        let logs: Vec<f64> = under.iter().map(|t| t.value.ln()).collect();
        let flags = robust_outliers(&logs, config.log_mad_multiplier);
        let survivors: Vec<TrialValue> = under
            .iter()
            .zip(&flags)
            .filter(|(_, &f)| !f)
            .map(|(t, _)| *t)
            .collect();
        outcome.log_mad_removed = under.len() - survivors.len();
        report.lost_log_mad += outcome.log_mad_removed;
        report.sessions.push(outcome);
        kept.push(SessionValues {
            participant: s.participant.clone(),
            session: s.session.clone(),
            trials: survivors,
        });
    }
    Ok((kept, report))
}

/// Keep-mask for the participant-level filter: drops values with
/// |v − median| / scale > `ratio`.
pub fn participant_outlier_mask(values: &[f64], ratio: f64) -> Vec<bool> {
    robust_outliers(values, ratio)
        .into_iter()
        .map(|outlier| !outlier)
        .collect()
}

pub fn participant_outlier_filter(values: &[f64], ratio: f64) -> Vec<f64> {
    values
        .iter()
        .zip(participant_outlier_mask(values, ratio))
        .filter(|(_, keep)| *keep)
        .map(|(v, _)| *v)
        .collect()
}

/// Short human-readable summary of one report.
pub fn describe(report: &ExclusionReport) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{}: {} of {} trials lost ({:.1}%: cutoff {}, session {}, log-MAD {}); {} of {} sessions lost",
        report.assessment,
        report.trials_lost(),
        report.trials_total,
        report.trials_lost_pct(),
        report.lost_cutoff,
        report.lost_session,
        report.lost_log_mad,
        report.sessions_lost,
        report.sessions_total
    );
    s
}
