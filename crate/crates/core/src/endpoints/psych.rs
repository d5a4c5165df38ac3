//! Two-parameter logistic psychometric fit by Levenberg–Marquardt.
//!
//! p(d) = 1 / (1 + exp((d − θ) / σ)), fitted to per-level success proportions
//! with unweighted least squares.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SIGMA_MIN: f64 = 0.05;
/// θ may not move further than this beyond the tested range.
pub const THETA_MARGIN: f64 = 0.5;

const MAX_ITER: usize = 500;
const GRAD_TOL: f64 = 1e-12;
const STEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsychFit {
    pub theta: f64,
    pub sigma: f64,
    pub rmse: f64,
    /// θ sits at one of the range limits (max + 0.5 or min − 0.5).
    pub capped: bool,
}

impl PsychFit {
    pub fn predict(&self, d: f64) -> f64 {
        logistic(d, self.theta, self.sigma)
    }
}

pub fn logistic(d: f64, theta: f64, sigma: f64) -> f64 {
    1.0 / (1.0 + ((d - theta) / sigma).exp())
}

/// Per-level success proportions, ordered by level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelData {
    pub levels: Vec<f64>,
    pub proportions: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn aggregate(levels: &[f64], passed: &[bool]) -> Result<LevelData> {
    if levels.len() != passed.len() {
        return Err(Error::InvalidInput(format!(
            "{} levels but {} outcomes",
            levels.len(),
            passed.len()
        )));
    }
    let mut by_level: BTreeMap<u64, (f64, usize, usize)> = BTreeMap::new();
    for (&d, &p) in levels.iter().zip(passed) {
        if !d.is_finite() {
            return Err(Error::InvalidInput(format!("difficulty {d} is not finite")));
        }
        // order-preserving key for finite floats
        let bits = d.to_bits();
        let key = if d.is_sign_negative() {
            !bits
        } else {
            bits | (1 << 63)
        };
        let e = by_level.entry(key).or_insert((d, 0, 0));
        e.1 += 1;
        if p {
            e.2 += 1;
        }
    }
    let mut out = LevelData {
        levels: Vec::new(),
        proportions: Vec::new(),
        counts: Vec::new(),
    };
    for (d, n, k) in by_level.into_values() {
        out.levels.push(d);
        out.proportions.push(k as f64 / n as f64);
        out.counts.push(n);
    }
    Ok(out)
}

fn sse(data: &LevelData, theta: f64, sigma: f64) -> f64 {
    data.levels
        .iter()
        .zip(&data.proportions)
        .map(|(&d, &y)| (y - logistic(d, theta, sigma)).powi(2))
        .sum()
}

/// Interpolated difficulty where the observed proportion first crosses 0.5.
pub fn empirical_midpoint(data: &LevelData) -> f64 {
    let (d, p) = (&data.levels, &data.proportions);
    for i in 1..d.len() {
        if (p[i - 1] >= 0.5) != (p[i] >= 0.5) {
            let w = (p[i - 1] - 0.5) / (p[i - 1] - p[i]);
            return d[i - 1] + w * (d[i] - d[i - 1]);
        }
    }
    if p.iter().all(|&v| v >= 0.5) {
        d[d.len() - 1]
    } else if p.iter().all(|&v| v < 0.5) {
        d[0]
    } else {
        0.5 * (d[0] + d[d.len() - 1])
    }
}

struct Bounds {
    theta_lo: f64,
    theta_hi: f64,
}

impl Bounds {
    fn clamp(&self, theta: f64, sigma: f64) -> (f64, f64) {
        (
            theta.clamp(self.theta_lo, self.theta_hi),
            sigma.max(SIGMA_MIN),
        )
    }
}

struct LmOutcome {
    theta: f64,
    sigma: f64,
    sse: f64,
    converged: bool,
}

/// Box-constrained LM: steps are projected back into the feasible region.
fn levenberg_marquardt(data: &LevelData, theta0: f64, sigma0: f64, bounds: &Bounds) -> LmOutcome {
    let (mut theta, mut sigma) = bounds.clamp(theta0, sigma0);
    let mut cost = sse(data, theta, sigma);
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITER {
        // J^T J and J^T r for residual r = y − f
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&d, &y) in data.levels.iter().zip(&data.proportions) {
            let f = logistic(d, theta, sigma);
            let s = f * (1.0 - f);
            let dtheta = s / sigma;
            let dsigma = s * (d - theta) / (sigma * sigma);
            let r = y - f;
            a11 += dtheta * dtheta;
            a12 += dtheta * dsigma;
            a22 += dsigma * dsigma;
            g1 += dtheta * r;
            g2 += dsigma * r;
        }
        if g1.abs().max(g2.abs()) < GRAD_TOL {
            return LmOutcome {
                theta,
                sigma,
                sse: cost,
                converged: true,
            };
        }
        let mut improved = false;
        while lambda < 1e12 {
            let b11 = a11 * (1.0 + lambda) + 1e-300;
            let b22 = a22 * (1.0 + lambda) + 1e-300;
            let det = b11 * b22 - a12 * a12;
            if det.abs() < 1e-300 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let st = (b22 * g1 - a12 * g2) / det;
            let ss = (b11 * g2 - a12 * g1) / det;
            let (nt, ns) = bounds.clamp(theta + st, sigma + ss);
            let new_cost = sse(data, nt, ns);
            if new_cost.is_finite() && new_cost <= cost {
                let moved = (nt - theta).abs().max((ns - sigma).abs());
                let gain = cost - new_cost;
                theta = nt;
                sigma = ns;
                cost = new_cost;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if moved < STEP_TOL || gain <= 1e-15 * cost.max(1e-300) {
                    return LmOutcome {
                        theta,
                        sigma,
                        sse: cost,
                        converged: true,
                    };
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no descent direction left within the box: a constrained stationary point
            return LmOutcome {
                theta,
                sigma,
                sse: cost,
                converged: true,
            };
        }
    }
    LmOutcome {
        theta,
        sigma,
        sse: cost,
        converged: false,
    }
}

/// Fit θ and σ to pass/fail outcomes at the given difficulty levels.
pub fn fit_2pl(levels: &[f64], passed: &[bool]) -> Result<PsychFit> {
    let data = aggregate(levels, passed)?;
    fit_levels(&data)
}

pub fn fit_levels(data: &LevelData) -> Result<PsychFit> {
    let n = data.levels.len();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 distinct difficulty levels, got {n}"
        )));
    }
    let (lo, hi) = (data.levels[0], data.levels[n - 1]);
    let bounds = Bounds {
        theta_lo: lo - THETA_MARGIN,
        theta_hi: hi + THETA_MARGIN,
    };
    let finish = |theta: f64, sigma: f64| {
        let rmse = (sse(data, theta, sigma) / n as f64).sqrt();
        PsychFit {
            theta,
            sigma,
            rmse,
            capped: theta >= bounds.theta_hi || theta <= bounds.theta_lo,
        }
    };
    // no information about the crossing: pin θ to the range limit
    if data.proportions.iter().all(|&p| p == 1.0) {
        return Ok(finish(bounds.theta_hi, SIGMA_MIN));
    }
    if data.proportions.iter().all(|&p| p == 0.0) {
        return Ok(finish(bounds.theta_lo, SIGMA_MIN));
    }

    let midpoint = empirical_midpoint(data);
    let first = levenberg_marquardt(data, 0.5 * (lo + hi), 1.0, &bounds);
    let mut best = first;
    if !best.converged {
        // restart near the empirical 50% point
        let retry = levenberg_marquardt(data, midpoint, 1.0, &bounds);
        if retry.converged || retry.sse < best.sse {
            best = retry;
        }
    } else {
        // a second start from the empirical midpoint guards against a poor basin
        let alt = levenberg_marquardt(data, midpoint, 1.0, &bounds);
        if alt.converged && alt.sse < best.sse {
            best = alt;
        }
    }
    if !best.converged {
        return Err(Error::Numerical(format!(
            "psychometric fit did not converge (θ = {}, σ = {}, SSE = {})",
            best.theta, best.sigma, best.sse
        )));
    }
    Ok(finish(best.theta, best.sigma))
}

/// Exhaustive search over a (θ, σ) grid, coarse then fine. Slow; used as a
/// cross-check of the LM solution.
pub fn grid_search(data: &LevelData, theta_step: f64, sigma_max: f64) -> (f64, f64) {
    let n = data.levels.len();
    let (lo, hi) = (
        data.levels[0] - THETA_MARGIN,
        data.levels[n - 1] + THETA_MARGIN,
    );
    let scan = |t0: f64, t1: f64, s0: f64, s1: f64, step: f64| {
        let mut best = (f64::INFINITY, t0, s0);
        let nt = ((t1 - t0) / step).round() as usize;
        let ns = ((s1 - s0) / step).round() as usize;
        for i in 0..=nt {
            let t = (t0 + i as f64 * step).min(hi);
            for j in 0..=ns {
                let s = s0 + j as f64 * step;
                let c = sse(data, t, s);
                if c < best.0 {
                    best = (c, t, s);
                }
            }
        }
        best
    };
    let coarse_step = (theta_step * 10.0).max(0.05);
    let c = scan(lo, hi, SIGMA_MIN, sigma_max, coarse_step);
    let f = scan(
        (c.1 - coarse_step).max(lo),
        (c.1 + coarse_step).min(hi),
        (c.2 - coarse_step).max(SIGMA_MIN),
        c.2 + coarse_step,
        theta_step,
    );
    (f.1, f.2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn staircase(theta: f64, sigma: f64, per_level: usize, seed: u64) -> (Vec<f64>, Vec<bool>) {
        let mut rng = rng::seeded(seed);
        let mut d = Vec::new();
        let mut o = Vec::new();
        for level in 1..=10 {
            let p = logistic(level as f64, theta, sigma);
            for _ in 0..per_level {
                d.push(level as f64);
                o.push(rng.random::<f64>() < p);
            }
        }
        (d, o)
    }

    #[test]
    fn all_pass_caps_at_max_plus_half() {
        let d: Vec<f64> = (1..=10).map(f64::from).collect();
        let f = fit_2pl(&d, &[true; 10]).unwrap();
        assert_eq!(f.theta, 10.5);
        assert!(f.capped);
    }

    #[test]
    fn all_fail_is_floored() {
        let f = fit_2pl(&[1.0, 2.0, 3.0], &[false; 3]).unwrap();
        assert_eq!(f.theta, 0.5);
        assert!(f.capped);
    }

    #[test]
    fn recovers_planted_threshold() {
        let (d, o) = staircase(5.0, 1.0, 50, 3);
        let f = fit_2pl(&d, &o).unwrap();
        assert!((4.7..=5.3).contains(&f.theta), "theta = {}", f.theta);
        assert!(!f.capped);
        assert!((f.predict(f.theta) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn step_data_threshold_between_levels() {
        let mut d = Vec::new();
        let mut o = Vec::new();
        for level in 1..=10 {
            for _ in 0..20 {
                d.push(level as f64);
                o.push(level <= 3);
            }
        }
        let f = fit_2pl(&d, &o).unwrap();
        assert!(f.theta > 3.0 && f.theta < 4.0, "theta = {}", f.theta);
        let (gt, _) = grid_search(&aggregate(&d, &o).unwrap(), 0.005, 5.0);
        assert!((f.theta - gt).abs() < 0.1);
        assert!((f.sigma - SIGMA_MIN).abs() < 1e-9);
    }

    #[test]
    fn needs_two_levels() {
        assert!(matches!(
            fit_2pl(&[3.0, 3.0], &[true, false]),
            Err(Error::Precondition(_))
        ));
        assert!(fit_2pl(&[1.0], &[true, false]).is_err());
    }

    #[test]
    fn matches_grid_oracle_on_seeded_fixtures() {
        for seed in 0..8 {
            let theta = 2.0 + seed as f64 * 0.9;
            let (d, o) = staircase(theta, 0.5 + 0.2 * seed as f64, 20, seed);
            let data = aggregate(&d, &o).unwrap();
            let f = fit_levels(&data).unwrap();
            let (gt, gs) = grid_search(&data, 0.005, 6.0);
            assert!(
                (f.theta - gt).abs() < 0.1,
                "seed {seed}: lm {} grid {gt}",
                f.theta
            );
            assert!(sse(&data, f.theta, f.sigma) <= sse(&data, gt, gs) + 1e-9);
        }
    }

    #[test]
    fn duplicating_trials_leaves_the_fit_unchanged() {
        let (d, o) = staircase(6.0, 1.5, 10, 11);
        let f1 = fit_2pl(&d, &o).unwrap();
        let d2: Vec<f64> = d.iter().chain(&d).copied().collect();
        let o2: Vec<bool> = o.iter().chain(&o).copied().collect();
        let f2 = fit_2pl(&d2, &o2).unwrap();
        assert_eq!(f1, f2);
    }
}
