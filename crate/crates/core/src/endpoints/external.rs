//! Scores from external instruments, read from CSV with columns
//! `participant,task,form,kind,value`.

use std::collections::BTreeSet;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{EndpointKind, EndpointRow};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// 1-based line number in the input, counting the header.
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows: Vec<EndpointRow>,
    pub rejected: Vec<RejectedRow>,
}

#[derive(Debug, Deserialize)]
struct RawScore {
    participant: String,
    task: String,
    form: String,
    kind: String,
    value: Option<String>,
}

/// Reads external scores. Rows with a missing or unparsable value are rejected
/// with a message; a repeated (participant, task, form) fails the whole read.
pub fn ingest_external_scores<R: Read>(reader: R) -> Result<IngestReport> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    for col in ["participant", "task", "form", "kind", "value"] {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::InvalidInput(format!(
                "external scores: missing column `{col}`"
            )));
        }
    }
    let mut report = IngestReport::default();
    let mut seen = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let raw: RawScore = rec.deserialize(Some(&headers))?;
        let key = (raw.participant.clone(), raw.task.clone(), raw.form.clone());
        if !seen.insert(key) {
            return Err(Error::InvalidInput(format!(
                "external scores line {line}: duplicate entry for participant {}, task {}, form {}",
                raw.participant, raw.task, raw.form
            )));
        }
        let reject = |message: String| RejectedRow { line, message };
        let kind = match raw.kind.parse::<EndpointKind>() {
            Ok(k) => k,
            Err(e) => {
                report.rejected.push(reject(e.to_string()));
                continue;
            }
        };
        let value = match raw.value.as_deref().map(str::trim) {
            None | Some("") => {
                report.rejected.push(reject(format!(
                    "missing value for participant {}, task {}",
                    raw.participant, raw.task
                )));
                continue;
            }
            Some(v) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => x,
                _ => {
                    report
                        .rejected
                        .push(reject(format!("value `{v}` is not a number")));
                    continue;
                }
            },
        };
        if kind.is_time() && value <= 0.0 {
            report
                .rejected
                .push(reject(format!("{kind} value {value} must be positive")));
            continue;
        }
        report.rows.push(EndpointRow {
            participant: raw.participant,
            session: raw.form,
            measure: raw.task,
            kind,
            value,
            n_trials: 1,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_rows() {
        let mut csv = String::from("participant,task,form,kind,value\n");
        for i in 0..16 {
            csv.push_str(&format!("p{i:02},LSWM,Form 1,score,{}\n", 90 + i));
        }
        let r = ingest_external_scores(csv.as_bytes()).unwrap();
        assert_eq!(r.rows.len(), 16);
        assert!(r.rejected.is_empty());
        assert_eq!(r.rows[3].measure, "LSWM");
        assert_eq!(r.rows[3].session, "Form 1");
    }

    #[test]
    fn missing_value_is_rejected_with_message() {
        let csv = "participant,task,form,kind,value\np1,Flanker,A,RT,0.62\np2,Flanker,A,RT,\n";
        let r = ingest_external_scores(csv.as_bytes()).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rejected.len(), 1);
        assert_eq!(r.rejected[0].line, 3);
        assert!(r.rejected[0].message.contains("missing value"));
    }

    #[test]
    fn kinds_are_preserved() {
        let csv = "participant,task,form,kind,value\np1,Flanker,A,RT,0.62\np1,Span,A,theta,5.5\n";
        let r = ingest_external_scores(csv.as_bytes()).unwrap();
        assert_eq!(r.rows[0].kind, EndpointKind::Rt);
        assert_eq!(r.rows[1].kind, EndpointKind::Theta);
    }

    #[test]
    fn duplicates_fail() {
        let csv = "participant,task,form,kind,value\np1,LSWM,1,score,3\np1,LSWM,1,score,4\n";
        assert!(ingest_external_scores(csv.as_bytes()).is_err());
    }
}
