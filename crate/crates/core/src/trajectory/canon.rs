//! Trajectory extraction, canonical orientation, and fixed-length resampling.

use serde::{Deserialize, Serialize};

use super::types::TrajectoryError;
use crate::logmodel::{extract_trial_segment, LogFile, Stimulus};
use crate::taskengine::{layout, target, Side};
use crate::{Error, Result};

pub const DEFAULT_LENGTH: usize = 120;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajSample {
    /// Seconds from trial start.
    pub t: f64,
    pub x: f64,
    pub z: f64,
    /// Degrees, unwrapped (continuous across ±180).
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajSample>,
    /// Selected target, in the same frame as the samples.
    pub target: (f64, f64),
    pub side: Side,
    /// Per-sample viewed target.
    pub views: Vec<Option<String>>,
    pub selected: String,
    /// Set once left-side selections have been mirrored.
    pub reflected: bool,
}

/// Positions, yaw, and view for one NK trial, relative to where the player spawned.
/// Timeouts (no selection) yield `Ok(None)`.
pub fn extract_nk_trajectory(file: &LogFile, trial_index: u32) -> Result<Option<Trajectory>> {
    let segment = extract_trial_segment(file, trial_index)?;
    let Stimulus::Nk(stim) = &segment.trial.stimulus else {
        return Err(Error::InvalidInput(format!(
            "trial {trial_index} is not a Nether Knight trial"
        )));
    };
    let Some(selected) = segment
        .response_event()
        .and_then(|e| e.selected())
        .or(segment.trial.response.as_deref())
    else {
        return Ok(None);
    };
    let side = [Side::Left, Side::Right]
        .into_iter()
        .find(|&s| target::knight(stim.color_at(s)) == selected)
        .ok_or_else(|| {
            Error::Validation(format!(
                "trial {trial_index}: selection {selected} is not on the field"
            ))
        })?;
    let Some(first) = segment.states.first() else {
        return Ok(Some(Trajectory {
            samples: vec![],
            target: (0.0, 0.0),
            side,
            views: vec![],
            selected: selected.to_string(),
            reflected: false,
        }));
    };
    let (x0, z0) = (first.x.get(), first.z.get());
    let start = segment.trial.start_t;
    let mut samples = Vec::with_capacity(segment.states.len());
    let mut prev_yaw: Option<f64> = None;
    for s in &segment.states {
        let raw = s.yaw.get();
        let yaw = match prev_yaw {
            Some(p) => p + crate::synthplayer::wrap_deg(raw - p),
            None => raw,
        };
        prev_yaw = Some(yaw);
        samples.push(TrajSample {
            t: s.t.secs_since(start),
            x: s.x.get() - x0,
            z: s.z.get() - z0,
            yaw,
        });
    }
    Ok(Some(Trajectory {
        samples,
        target: (side.sign() * layout::KNIGHT_X, layout::KNIGHT_Z),
        side,
        views: segment.states.iter().map(|s| s.view.clone()).collect(),
        selected: selected.to_string(),
        reflected: false,
    }))
}

/// Mirror about the z axis: x → −x, yaw → −yaw, target x → −target x.
pub fn reflect(traj: &Trajectory) -> Trajectory {
    let mut out = traj.clone();
    for s in &mut out.samples {
        s.x = -s.x;
        s.yaw = -s.yaw;
    }
    out.target.0 = -out.target.0;
    out.side = out.side.opposite();
    out.reflected = !out.reflected;
    out
}

/// Drops non-finite or out-of-order samples, re-bases time and position on the
/// first sample, and mirrors left-side selections so every target is on the right.
pub fn canonicalize(traj: &Trajectory) -> std::result::Result<Trajectory, TrajectoryError> {
    let mut samples = Vec::with_capacity(traj.samples.len());
    let mut views = Vec::with_capacity(traj.samples.len());
    for (i, s) in traj.samples.iter().enumerate() {
        let finite = s.t.is_finite() && s.x.is_finite() && s.z.is_finite() && s.yaw.is_finite();
        let increasing = samples.last().is_none_or(|p: &TrajSample| s.t > p.t);
        if finite && increasing {
            samples.push(*s);
            views.push(traj.views.get(i).cloned().flatten());
        }
    }
    if samples.len() < 2 {
        return Err(TrajectoryError::TooFewSamples(samples.len()));
    }
    let base = samples[0];
    for s in &mut samples {
        s.t -= base.t;
        s.x -= base.x;
        s.z -= base.z;
    }
    let mut out = Trajectory {
        samples,
        target: (traj.target.0 - base.x, traj.target.1 - base.z),
        side: traj.side,
        views,
        selected: traj.selected.clone(),
        reflected: traj.reflected,
    };
    if out.side == Side::Left {
        out = reflect(&out);
    }
    Ok(out)
}

/// `length` samples uniformly spaced in time, each channel linearly interpolated;
/// the view channel takes the latest sample at or before each point.
pub fn resample(traj: &Trajectory, length: usize) -> Trajectory {
    let s = &traj.samples;
    assert!(
        s.len() >= 2 && length >= 2,
        "resample needs at least two samples"
    );
    let (t0, t1) = (s[0].t, s[s.len() - 1].t);
    let mut out_s = Vec::with_capacity(length);
    let mut out_v = Vec::with_capacity(length);
    let mut j = 0;
    for i in 0..length {
        let t = if i == length - 1 {
            t1
        } else {
            t0 + (t1 - t0) * i as f64 / (length - 1) as f64
        };
        while j + 2 < s.len() && s[j + 1].t <= t {
            j += 1;
        }
        let (a, b) = (s[j], s[j + 1]);
        let sample = if i == 0 {
            a
        } else if i == length - 1 {
            s[s.len() - 1]
        } else {
            let f = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
            TrajSample {
                t,
                x: a.x + f * (b.x - a.x),
                z: a.z + f * (b.z - a.z),
                yaw: a.yaw + f * (b.yaw - a.yaw),
            }
        };
        out_s.push(sample);
        let v = if i == length - 1 || t >= b.t {
            j + 1
        } else {
            j
        };
        out_v.push(traj.views.get(v).cloned().flatten());
    }
    Trajectory {
        samples: out_s,
        target: traj.target,
        side: traj.side,
        views: out_v,
        selected: traj.selected.clone(),
        reflected: traj.reflected,
    }
}

/// Signed angle from the facing direction to the direction of the target, per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadingSeries {
    pub heading: Vec<f64>,
    pub sin: Vec<f64>,
    pub cos: Vec<f64>,
}

pub fn heading_series(traj: &Trajectory) -> HeadingSeries {
    let mut heading = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        let to_target = crate::synthplayer::bearing((s.x, s.z), traj.target);
        heading.push(crate::synthplayer::wrap_deg(to_target - s.yaw));
    }
    let sin = heading.iter().map(|h| h.to_radians().sin()).collect();
    let cos = heading.iter().map(|h| h.to_radians().cos()).collect();
    HeadingSeries { heading, sin, cos }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn traj(points: &[(f64, f64, f64, f64)], side: Side) -> Trajectory {
        Trajectory {
            samples: points
                .iter()
                .map(|&(t, x, z, yaw)| TrajSample { t, x, z, yaw })
                .collect(),
            target: (side.sign() * 3.0, 10.0),
            side,
            views: vec![None; points.len()],
            selected: "knight:RED".into(),
            reflected: false,
        }
    }

    #[test]
    fn right_selection_is_unchanged() {
        let t = traj(&[(0.0, 0.0, 0.0, 0.0), (0.5, 1.0, 3.0, 10.0)], Side::Right);
        assert_eq!(canonicalize(&t).unwrap().samples, t.samples);
    }

    #[test]
    fn left_trial_ends_on_the_right() {
        let t = traj(&[(0.0, 0.0, 0.0, 0.0), (1.0, -2.0, 7.0, -15.0)], Side::Left);
        let c = canonicalize(&t).unwrap();
        assert_eq!(c.samples[1].x, 2.0);
        assert_eq!(c.samples[1].yaw, 15.0);
        assert_eq!(c.target, (3.0, 10.0));
        assert_eq!(c.side, Side::Right);
    }

    #[test]
    fn too_few_samples_are_rejected() {
        let t = traj(&[(0.0, 0.0, 0.0, 0.0)], Side::Right);
        assert_eq!(canonicalize(&t), Err(TrajectoryError::TooFewSamples(1)));
        let t = traj(&[(0.0, 0.0, 0.0, 0.0), (0.0, 1.0, 1.0, 0.0)], Side::Right);
        assert!(canonicalize(&t).is_err());
    }

    #[test]
    fn resample_examples() {
        let t = traj(
            &[
                (0.0, 4.0, 1.0, 5.0),
                (2.0, 4.0, 1.0, 5.0),
                (3.0, 4.0, 1.0, 5.0),
            ],
            Side::Right,
        );
        let r = resample(&t, 120);
        assert!(r
            .samples
            .iter()
            .all(|s| s.x == 4.0 && s.z == 1.0 && s.yaw == 5.0));

        let ramp = traj(&[(0.0, 0.0, 0.0, 0.0), (1.0, 1.0, 0.0, 0.0)], Side::Right);
        let r = resample(&ramp, 120);
        for (i, s) in r.samples.iter().enumerate() {
            assert!((s.x - i as f64 / 119.0).abs() < 1e-12);
        }

        let pts: Vec<(f64, f64, f64, f64)> = (0..120)
            .map(|i| (i as f64 * 0.05, (i as f64).sin(), i as f64, 0.0))
            .collect();
        let t = traj(&pts, Side::Right);
        let r = resample(&t, 120);
        for (a, b) in r.samples.iter().zip(&t.samples) {
            assert!((a.x - b.x).abs() < 1e-9 && (a.z - b.z).abs() < 1e-9);
        }
    }

    fn arb_traj() -> impl Strategy<Value = Trajectory> {
        (
            proptest::collection::vec(
                (0.01f64..0.2, -5.0f64..5.0, -5.0f64..15.0, -90.0f64..90.0),
                2..60,
            ),
            any::<bool>(),
        )
            .prop_map(|(steps, left)| {
                let mut t = 0.0;
                let pts: Vec<(f64, f64, f64, f64)> = steps
                    .iter()
                    .map(|&(dt, x, z, y)| {
                        t += dt;
                        (t, x, z, y)
                    })
                    .collect();
                traj(&pts, if left { Side::Left } else { Side::Right })
            })
    }

    proptest! {
        #[test]
        fn reflection_is_an_involution(t in arb_traj()) {
            let back = reflect(&reflect(&t));
            prop_assert_eq!(back, t);
        }

        #[test]
        fn resampling_keeps_endpoints_and_is_idempotent(t in arb_traj()) {
            let r = resample(&t, 120);
            prop_assert_eq!(r.samples[0], t.samples[0]);
            prop_assert_eq!(r.samples[119], *t.samples.last().unwrap());
            let rr = resample(&r, 120);
            for (a, b) in rr.samples.iter().zip(&r.samples) {
                prop_assert!((a.x - b.x).abs() < 1e-9 && (a.z - b.z).abs() < 1e-9 && (a.yaw - b.yaw).abs() < 1e-9);
            }
        }

        #[test]
        fn heading_components_are_unit(t in arb_traj()) {
            let h = heading_series(&t);
            for (s, c) in h.sin.iter().zip(&h.cos) {
                prop_assert!((s * s + c * c - 1.0).abs() < 1e-9);
            }
        }
    }
}
