//! Fixed-order trajectory features and rule-based trial typing.

use super::canon::{heading_series, Trajectory};
use super::types::TrialType;

pub const N_FEATURES: usize = 27;

/// Alignment threshold for heading-based features, in degrees.
pub const ALIGNED_DEG: f64 = 10.0;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "min_x",
    "max_x",
    "final_x",
    "min_z",
    "max_z",
    "final_z",
    "net_displacement",
    "path_length",
    "straightness",
    "max_lateral_deviation",
    "t_max_lateral_deviation",
    "mean_speed",
    "sd_speed",
    "max_speed",
    "t_max_speed",
    "mean_abs_heading",
    "sd_heading",
    "max_abs_heading",
    "t_peak_abs_heading",
    "mean_sin_heading",
    "mean_cos_heading",
    "heading_sign_changes",
    "frac_aligned",
    "t_first_aligned",
    "final_aligned_run",
    "mean_abs_yaw_velocity",
    "max_abs_yaw_velocity",
];

pub type FeatureVector = [f64; N_FEATURES];

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

/// Index of the first maximum.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Signed distance of each sample from the start→target line. Positive values
/// lie on the side away from the target (the −x side once canonicalized).
pub fn lateral_deviations(traj: &Trajectory) -> Vec<f64> {
    let (tx, tz) = traj.target;
    let len = (tx * tx + tz * tz).sqrt();
    if len == 0.0 {
        return vec![0.0; traj.samples.len()];
    }
    let (ux, uz) = (tx / len, tz / len);
    // unit normal pointing away from the target's side
    let mut n = (-uz, ux);
    if n.0 * tx > 0.0 {
        n = (-n.0, -n.1);
    }
    traj.samples.iter().map(|s| s.x * n.0 + s.z * n.1).collect()
}

pub fn max_lateral_deviation(traj: &Trajectory) -> f64 {
    lateral_deviations(traj).into_iter().fold(0.0, f64::max)
}

/// The 27 features of a canonicalized, resampled trajectory. Time indices are
/// fractions of the resampled length.
pub fn features27(traj: &Trajectory) -> FeatureVector {
    let s = &traj.samples;
    let n = s.len();
    let frac = |i: usize| {
        if n > 1 {
            i as f64 / (n - 1) as f64
        } else {
            0.0
        }
    };
    let xs: Vec<f64> = s.iter().map(|p| p.x).collect();
    let zs: Vec<f64> = s.iter().map(|p| p.z).collect();
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let first = s[0];
    let last = s[n - 1];
    let net = ((last.x - first.x).powi(2) + (last.z - first.z).powi(2)).sqrt();
    let mut steps = Vec::with_capacity(n.saturating_sub(1));
    let mut speeds = Vec::with_capacity(n.saturating_sub(1));
    let mut yaw_vel = Vec::with_capacity(n.saturating_sub(1));
    for w in s.windows(2) {
        let d = ((w[1].x - w[0].x).powi(2) + (w[1].z - w[0].z).powi(2)).sqrt();
        let dt = w[1].t - w[0].t;
        steps.push(d);
        speeds.push(if dt > 0.0 { d / dt } else { 0.0 });
        yaw_vel.push(if dt > 0.0 {
            ((w[1].yaw - w[0].yaw) / dt).abs()
        } else {
            0.0
        });
    }
    let path: f64 = steps.iter().sum();
    let straightness = if path > 0.0 {
        (net / path).min(1.0)
    } else {
        0.0
    };

    let lateral = lateral_deviations(traj);
    let i_lat = argmax(&lateral);
    let max_lat = lateral[i_lat].max(0.0);

    let i_speed = argmax(&speeds);
    let h = heading_series(traj);
    let abs_h: Vec<f64> = h.heading.iter().map(|v| v.abs()).collect();
    let i_peak = argmax(&abs_h);
    let mut sign_changes = 0.0;
    let mut last_sign = 0.0;
    for v in &h.heading {
        let sg = if *v > 0.0 {
            1.0
        } else if *v < 0.0 {
            -1.0
        } else {
            0.0
        };
        if sg != 0.0 {
            if last_sign != 0.0 && sg != last_sign {
                sign_changes += 1.0;
            }
            last_sign = sg;
        }
    }
    let aligned: Vec<bool> = abs_h.iter().map(|v| *v < ALIGNED_DEG).collect();
    let frac_aligned = aligned.iter().filter(|a| **a).count() as f64 / n as f64;
    let t_first = aligned.iter().position(|a| *a).map(frac).unwrap_or(1.0);
    let final_run = aligned.iter().rev().take_while(|a| **a).count() as f64 / n as f64;

    [
        min(&xs),
        max(&xs),
        last.x,
        min(&zs),
        max(&zs),
        last.z,
        net,
        path,
        straightness,
        max_lat,
        frac(i_lat),
        mean(&speeds),
        sd(&speeds),
        speeds.get(i_speed).copied().unwrap_or(0.0),
        frac(i_speed),
        mean(&abs_h),
        sd(&h.heading),
        abs_h[i_peak],
        frac(i_peak),
        mean(&h.sin),
        mean(&h.cos),
        sign_changes,
        frac_aligned,
        t_first,
        final_run,
        mean(&yaw_vel),
        max(&yaw_vel).max(0.0),
    ]
}

/// Direct iff the path never strays more than `lateral_threshold` blocks to the
/// far side of the start→target line; gaze iff the view was fixated on the target.
pub fn classify_trial(traj: &Trajectory, lateral_threshold: f64, fixated: bool) -> TrialType {
    TrialType::new(max_lateral_deviation(traj) <= lateral_threshold, fixated)
}

#[cfg(test)]
mod tests {
    use super::super::canon::{resample, TrajSample};
    use super::*;
    use crate::taskengine::Side;
    use proptest::prelude::*;

    fn traj(points: Vec<(f64, f64, f64, f64)>) -> Trajectory {
        Trajectory {
            views: vec![None; points.len()],
            samples: points
                .into_iter()
                .map(|(t, x, z, yaw)| TrajSample { t, x, z, yaw })
                .collect(),
            target: (3.0, 10.0),
            side: Side::Right,
            selected: "knight:RED".into(),
            reflected: false,
        }
    }

    #[test]
    fn stationary_trajectory() {
        let f = features27(&resample(
            &traj(vec![(0.0, 0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0)]),
            120,
        ));
        assert_eq!(f[6], 0.0);
        assert_eq!(f[7], 0.0);
        assert_eq!(f[8], 0.0);
        assert!(f.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn straight_run_at_the_target() {
        let pts: Vec<_> = (0..=20)
            .map(|i| {
                let u = i as f64 / 20.0;
                (u * 2.0, 3.0 * u * 0.75, 10.0 * u * 0.75, 16.7)
            })
            .collect();
        let f = features27(&resample(&traj(pts), 120));
        assert!((f[8] - 1.0).abs() < 1e-12);
        assert!(f[9].abs() < 1e-12);
    }

    #[test]
    fn detour_deviation_and_classification() {
        // waypoint 2 blocks off the line toward -x, then on to the stop point
        let len = 109f64.sqrt();
        let n = (-10.0 / len, 3.0 / len);
        let wp = (1.0 + 2.0 * n.0, 10.0 / 3.0 + 2.0 * n.1);
        let t = traj(vec![
            (0.0, 0.0, 0.0, 0.0),
            (1.0, wp.0, wp.1, 0.0),
            (2.0, 2.0, 20.0 / 3.0, 0.0),
        ]);
        assert!((max_lateral_deviation(&t) - 2.0).abs() < 1e-12);
        assert_eq!(classify_trial(&t, 0.5, false), TrialType::IN);
        let straight = traj(vec![(0.0, 0.0, 0.0, 0.0), (1.0, 2.0, 20.0 / 3.0, 0.0)]);
        assert_eq!(classify_trial(&straight, 0.5, true), TrialType::DG);
    }

    #[test]
    fn names_match_length() {
        assert_eq!(FEATURE_NAMES.len(), N_FEATURES);
    }

    proptest! {
        #[test]
        fn classification_ignores_speed(
            pts in proptest::collection::vec((-3.0f64..3.0, 0.0f64..10.0), 2..30),
            scale in 0.1f64..10.0,
            fixated in any::<bool>(),
        ) {
            let a: Vec<_> = pts.iter().enumerate().map(|(i, p)| (i as f64, p.0, p.1, 0.0)).collect();
            let b: Vec<_> = pts.iter().enumerate().map(|(i, p)| (i as f64 * scale, p.0, p.1, 0.0)).collect();
            prop_assert_eq!(classify_trial(&traj(a), 0.5, fixated), classify_trial(&traj(b), 0.5, fixated));
        }

        #[test]
        fn features_are_finite(pts in proptest::collection::vec((-3.0f64..3.0, 0.0f64..10.0, -60.0f64..60.0), 2..30)) {
            let t: Vec<_> = pts.iter().enumerate().map(|(i, p)| (i as f64 * 0.05, p.0, p.1, p.2)).collect();
            let f = features27(&resample(&traj(t), 120));
            prop_assert!(f.iter().all(|v| v.is_finite()));
        }
    }
}
