//! Canonical `.pxlog` text form: one JSON object per line, discriminated by
//! `"rec"`. Header first, then the time-ordered log sequence, then the trial
//! summary. Positions carry exactly four decimals and angles two.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::types::*;
use super::validate::validate;
use crate::{Error, Result};

#[derive(Deserialize)]
struct RawState {
    t: Timestamp,
    x: f64,
    y: f64,
    z: f64,
    yaw: f64,
    pitch: f64,
    view: Option<String>,
}

#[derive(Deserialize)]
#[serde(tag = "rec")]
enum RawRecord {
    #[serde(rename = "hdr")]
    Hdr(Header),
    #[serde(rename = "state")]
    State(RawState),
    #[serde(rename = "env")]
    Env(EnvSample),
    #[serde(rename = "event")]
    Event(GameEvent),
    #[serde(rename = "trial")]
    Trial(TrialRecord),
}

#[derive(Serialize)]
#[serde(tag = "rec")]
enum RecordRef<'a> {
    #[serde(rename = "hdr")]
    Hdr(&'a Header),
    #[serde(rename = "env")]
    Env(&'a EnvSample),
    #[serde(rename = "event")]
    Event(&'a GameEvent),
    #[serde(rename = "trial")]
    Trial(&'a TrialRecord),
}

fn fixed(out: &mut String, raw: i64, decimals: u32) {
    let scale = 10i64.pow(decimals);
    let sign = if raw < 0 { "-" } else { "" };
    let abs = raw.unsigned_abs();
    let scale = scale as u64;
    let _ = write!(
        out,
        "{sign}{}.{:0width$}",
        abs / scale,
        abs % scale,
        width = decimals as usize
    );
}

fn check_range(line: usize, ok: bool, what: &str, v: f64) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "line {line}: {what} {v} out of range"
        )))
    }
}

/// Parses and validates a canonical log file.
pub fn parse_logfile(bytes: &[u8]) -> Result<LogFile> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 0,
        message: format!("not UTF-8: {e}"),
    })?;
    let mut header: Option<Header> = None;
    let mut log = Vec::new();
    let mut trials = Vec::new();

    let mut lines = text.split('\n').enumerate().peekable();
    while let Some((i, line)) = lines.next() {
        let lineno = i + 1;
        if line.is_empty() && lines.peek().is_none() {
            break;
        }
        let rec: RawRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let parse_err = |message: &str| Error::Parse {
            line: lineno,
            message: message.to_string(),
        };
        match rec {
            RawRecord::Hdr(h) => {
                if header.is_some() || lineno != 1 {
                    return Err(parse_err("header must be the first and only hdr record"));
                }
                header = Some(h);
                continue;
            }
            _ if header.is_none() => return Err(parse_err("missing header record")),
            RawRecord::Trial(t) => trials.push(t),
            _ if !trials.is_empty() => {
                return Err(parse_err("log record after the trial summary"));
            }
            RawRecord::State(s) => {
                let yaw = Degrees::from_f64(s.yaw);
                let pitch = Degrees::from_f64(s.pitch);
                check_range(lineno, yaw.is_valid_yaw(), "yaw", s.yaw)?;
                check_range(lineno, pitch.is_valid_pitch(), "pitch", s.pitch)?;
                log.push(LogEntry::State(StateSample {
                    t: s.t,
                    x: Blocks::from_f64(s.x),
                    y: Blocks::from_f64(s.y),
                    z: Blocks::from_f64(s.z),
                    yaw,
                    pitch,
                    view: s.view,
                }));
            }
            RawRecord::Env(e) => log.push(LogEntry::Env(e)),
            RawRecord::Event(e) => log.push(LogEntry::Event(e)),
        }
    }

    let header = header.ok_or_else(|| Error::Parse {
        line: 1,
        message: "empty file".to_string(),
    })?;
    let file = LogFile {
        header,
        log,
        trials,
    };
    validate(&file)?;
    Ok(file)
}

fn write_state(out: &mut String, s: &StateSample) -> Result<()> {
    let _ = write!(out, "{{\"rec\":\"state\",\"t\":{},\"x\":", s.t.0);
    fixed(out, s.x.raw(), 4);
    out.push_str(",\"y\":");
    fixed(out, s.y.raw(), 4);
    out.push_str(",\"z\":");
    fixed(out, s.z.raw(), 4);
    out.push_str(",\"yaw\":");
    fixed(out, i64::from(s.yaw.raw()), 2);
    out.push_str(",\"pitch\":");
    fixed(out, i64::from(s.pitch.raw()), 2);
    out.push_str(",\"view\":");
    match &s.view {
        Some(v) => out.push_str(&serde_json::to_string(v)?),
        None => out.push_str("null"),
    }
    out.push('}');
    Ok(())
}

/// Serializes a valid log file to its canonical bytes. Invalid files are refused.
pub fn write_logfile(file: &LogFile) -> Result<Vec<u8>> {
    validate(file)?;
    let mut out = String::with_capacity(64 + file.log.len() * 110);
    out.push_str(&serde_json::to_string(&RecordRef::Hdr(&file.header))?);
    out.push('\n');
    for entry in &file.log {
        match entry {
            LogEntry::State(s) => write_state(&mut out, s)?,
            LogEntry::Env(e) => out.push_str(&serde_json::to_string(&RecordRef::Env(e))?),
            LogEntry::Event(e) => out.push_str(&serde_json::to_string(&RecordRef::Event(e))?),
        }
        out.push('\n');
    }
    for t in &file.trials {
        out.push_str(&serde_json::to_string(&RecordRef::Trial(t))?);
        out.push('\n');
    }
    Ok(out.into_bytes())
}
