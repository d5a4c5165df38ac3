//! Telemetry logs, task rules, synthetic players, and the analysis pipeline
//! for game-based cognitive assessment.
//!
//! The crate is organised bottom-up:
//!
//! * [`logmodel`] – the dual-structured `.pxlog` file (behavior stream + trial summary).
//! * [`taskengine`] – stimulus schedules and correctness rules for the four minigames.
//! * [`synthplayer`] – parameterised agents that play the games and emit logs plus ground truth.
//! * [`cleaning`] – multi-step outlier exclusion with exclusion accounting.
//! * [`endpoints`] – response time, gaze response time, and psychometric threshold fitting.
//! * [`stats`] – correlation, p-values, Bayes factors, and ICC(2,1).
//! * [`trajectory`] – trajectory features, UMAP embedding, DBSCAN, trial typing, player identification.
//! * [`pipeline`] – end-to-end orchestration behind the `cogplay` CLI.

pub mod cleaning;
pub mod endpoints;
mod error;
pub mod logmodel;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod synthplayer;
pub mod taskengine;
pub mod trajectory;

pub use error::{Error, Result};
