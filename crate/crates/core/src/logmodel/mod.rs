//! The dual-structured session log: a time-ordered behavior stream (20 Hz
//! player state, ≥1 s environment snapshots, discrete events) plus a per-trial
//! summary.

mod codec;
mod segment;
mod types;
mod validate;

pub use codec::{parse_logfile, write_logfile};
pub use segment::{extract_trial_segment, TrialSegment};
pub use types::*;
pub use validate::validate;

use std::path::Path;

use crate::{Error, Result};

pub const LOG_EXTENSION: &str = "pxlog";

pub fn read_logfile(path: &Path) -> Result<LogFile> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_logfile(&bytes)
}

pub fn save_logfile(path: &Path, file: &LogFile) -> Result<()> {
    let bytes = write_logfile(file)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
