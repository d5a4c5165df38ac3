//! Millisecond-resolution movement and head-turn model for one trial.

use super::params::GazePolicy;

/// (x, z) in blocks.
pub type Point = (f64, f64);

/// Half-angle of the cone within which an entity counts as viewed.
pub const VIEW_CONE_DEG: f64 = 10.0;

/// Heading from `from` to `to`: 0 is +z, positive toward +x.
pub fn bearing(from: Point, to: Point) -> f64 {
    (to.0 - from.0).atan2(to.1 - from.1).to_degrees()
}

/// Wraps an angle into [-180, 180).
pub fn wrap_deg(a: f64) -> f64 {
    let w = (a + 180.0).rem_euclid(360.0) - 180.0;
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

#[derive(Debug, Clone)]
pub struct Entity {
    pub id: String,
    pub pos: Point,
}

/// The entity closest to the line of sight, if any lies inside the view cone.
pub fn viewed(pos: Point, yaw: f64, entities: &[Entity]) -> Option<&Entity> {
    entities
        .iter()
        .map(|e| (e, wrap_deg(bearing(pos, e.pos) - yaw).abs()))
        .filter(|(_, off)| *off <= VIEW_CONE_DEG)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(e, _)| e)
}

/// Polyline walked at constant speed.
#[derive(Debug, Clone)]
pub struct Path {
    points: Vec<Point>,
    cumulative: Vec<f64>,
}

impl Path {
    pub fn new(points: Vec<Point>) -> Path {
        let mut cumulative = vec![0.0];
        for w in points.windows(2) {
            let d = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
            cumulative.push(cumulative.last().unwrap() + d);
        }
        Path { points, cumulative }
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn end(&self) -> Point {
        *self.points.last().unwrap()
    }

    pub fn at(&self, dist: f64) -> Point {
        if dist <= 0.0 {
            return self.points[0];
        }
        for i in 1..self.points.len() {
            if dist <= self.cumulative[i] {
                let seg = self.cumulative[i] - self.cumulative[i - 1];
                let f = if seg > 0.0 {
                    (dist - self.cumulative[i - 1]) / seg
                } else {
                    1.0
                };
                let (a, b) = (self.points[i - 1], self.points[i]);
                return (a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1));
            }
        }
        self.end()
    }
}

/// Direct path to a stop point `reach` blocks short of the target, or the same
/// with a detour waypoint at the midpoint pushed `amplitude` blocks sideways,
/// away from the target's side.
pub fn plan_path(target: Point, reach: f64, amplitude: Option<f64>) -> Path {
    let len = (target.0 * target.0 + target.1 * target.1).sqrt();
    let (ux, uz) = (target.0 / len, target.1 / len);
    let stop = (target.0 - reach * ux, target.1 - reach * uz);
    match amplitude {
        Some(a) if a > 0.0 => {
            // left-hand normal of the travel direction; flip so it points away from the target side
            let mut n = (-uz, ux);
            if n.0 * target.0.signum() > 0.0 {
                n = (-n.0, -n.1);
            }
            let mid = (0.5 * stop.0, 0.5 * stop.1);
            Path::new(vec![(0.0, 0.0), (mid.0 + a * n.0, mid.1 + a * n.1), stop])
        }
        _ => Path::new(vec![(0.0, 0.0), stop]),
    }
}

/// Timing and targets of one simulated trial, all times in ms from trial start.
#[derive(Debug, Clone)]
pub struct TrialMotion {
    pub path: Path,
    pub move_start: u64,
    pub speed: f64,
    pub policy: GazePolicy,
    pub stall: u64,
    /// Early fixation: when the gaze switches to the chosen target.
    pub commit: u64,
    pub selected: Point,
    pub other: Point,
    pub turn_rate: f64,
}

/// Position, yaw and view at every millisecond from 0 to `end` inclusive.
pub struct MotionTrace {
    pub yaw: Vec<f64>,
    pub positions: Vec<Point>,
}

impl TrialMotion {
    pub fn position(&self, ms: u64) -> Point {
        if ms <= self.move_start {
            return self.path.at(0.0);
        }
        let walked = (ms - self.move_start) as f64 * self.speed / 1000.0;
        self.path.at(walked.min(self.path.length()))
    }

    fn desired_yaw(&self, ms: u64, pos: Point) -> f64 {
        match self.policy {
            GazePolicy::EarlyFix => {
                if ms < self.stall {
                    0.0
                } else if ms < self.commit {
                    bearing(pos, self.other)
                } else {
                    bearing(pos, self.selected)
                }
            }
            GazePolicy::LateFix => {
                if ms < self.commit {
                    0.0
                } else {
                    bearing(pos, self.selected)
                }
            }
            GazePolicy::NoFix => 0.0,
        }
    }

    pub fn trace(&self, end: u64) -> MotionTrace {
        let step = self.turn_rate / 1000.0;
        let mut yaw = Vec::with_capacity(end as usize + 1);
        let mut positions = Vec::with_capacity(end as usize + 1);
        let mut current = 0.0;
        for ms in 0..=end {
            let pos = self.position(ms);
            if ms > 0 {
                let diff = wrap_deg(self.desired_yaw(ms, pos) - current);
                current = wrap_deg(current + diff.clamp(-step, step));
            }
            yaw.push(current);
            positions.push(pos);
        }
        MotionTrace { yaw, positions }
    }
}
