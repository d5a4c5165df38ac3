use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStyle {
    Direct,
    Indirect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GazePolicy {
    /// Glance at the alternative, then settle on the chosen target early in the decision.
    EarlyFix,
    /// Look ahead and turn to the chosen target only just before responding.
    LateFix,
    /// Keep facing forward; the chosen target never enters the view cone.
    NoFix,
}

impl GazePolicy {
    pub fn fixates(self) -> bool {
        !matches!(self, GazePolicy::NoFix)
    }
}

/// Behavioral parameters of one simulated player. All fields have defaults so
/// cohort files only need to list what differs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentParams {
    /// Decision latency is lognormal with these parameters, in log-milliseconds.
    pub latency_mu: f64,
    pub latency_sigma: f64,
    pub error_rate: f64,
    /// Blocks per second.
    pub move_speed: f64,
    pub path_style: PathStyle,
    /// Perpendicular offset of the detour waypoint, in blocks.
    pub lateral_amplitude: f64,
    pub gaze_policy: GazePolicy,
    /// Probability of a stall longer than 10 s before deciding.
    pub lapse_rate: f64,
    /// Per-trial probability of using the other path style.
    pub off_style_rate: f64,
    /// Per-trial probability of switching between fixating and not fixating.
    pub off_gaze_rate: f64,
    /// Degrees per second.
    pub turn_rate: f64,
    /// Span game: pattern size at 50% success, and the logistic spread.
    pub span_theta: f64,
    pub span_sigma: f64,
}

impl Default for AgentParams {
    fn default() -> Self {
        AgentParams {
            latency_mu: 900f64.ln(),
            latency_sigma: 0.4,
            error_rate: 0.05,
            move_speed: 4.3,
            path_style: PathStyle::Direct,
            lateral_amplitude: 2.0,
            gaze_policy: GazePolicy::EarlyFix,
            lapse_rate: 0.0,
            off_style_rate: 0.0,
            off_gaze_rate: 0.0,
            turn_rate: 300.0,
            span_theta: 6.0,
            span_sigma: 1.0,
        }
    }
}

impl AgentParams {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("error_rate", self.error_rate),
            ("lapse_rate", self.lapse_rate),
            ("off_style_rate", self.off_style_rate),
            ("off_gaze_rate", self.off_gaze_rate),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidInput(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        let positive = [
            ("latency_sigma", self.latency_sigma),
            ("move_speed", self.move_speed),
            ("turn_rate", self.turn_rate),
            ("span_sigma", self.span_sigma),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        if !(self.lateral_amplitude >= 0.0 && self.lateral_amplitude.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "lateral_amplitude = {} must be >= 0",
                self.lateral_amplitude
            )));
        }
        if !self.latency_mu.is_finite() || !self.span_theta.is_finite() {
            return Err(Error::InvalidInput(
                "latency_mu and span_theta must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        AgentParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_probabilities_and_amplitudes() {
        let p = AgentParams {
            error_rate: 1.5,
            ..AgentParams::default()
        };
        assert!(p.validate().is_err());
        let p = AgentParams {
            lateral_amplitude: -1.0,
            ..AgentParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn json_fields_default_individually() {
        let p: AgentParams =
            serde_json::from_str(r#"{"path_style":"indirect","gaze_policy":"no_fix"}"#).unwrap();
        assert_eq!(p.path_style, PathStyle::Indirect);
        assert_eq!(p.gaze_policy, GazePolicy::NoFix);
        assert_eq!(p.move_speed, 4.3);
    }
}
