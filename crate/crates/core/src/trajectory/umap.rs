//! Two-dimensional neighbor embedding (UMAP construction) over exact k-NN.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedParams {
    /// Neighborhood size, counting the point itself.
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub n_epochs: usize,
    pub negative_sample_rate: usize,
    pub learning_rate: f64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams {
            n_neighbors: 5,
            min_dist: 0.005,
            spread: 1.0,
            n_epochs: 200,
            negative_sample_rate: 5,
            learning_rate: 1.0,
        }
    }
}

impl EmbedParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_neighbors < 2 {
            return Err(Error::InvalidInput("n_neighbors must be at least 2".into()));
        }
        if !(self.min_dist > 0.0 && self.spread > 0.0 && self.learning_rate > 0.0) {
            return Err(Error::InvalidInput(
                "min_dist, spread and learning_rate must be positive".into(),
            ));
        }
        if self.min_dist > self.spread {
            return Err(Error::InvalidInput(
                "min_dist must not exceed spread".into(),
            ));
        }
        if self.n_epochs == 0 || self.negative_sample_rate == 0 {
            return Err(Error::InvalidInput(
                "n_epochs and negative_sample_rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Per-column standardization; constant columns become zero.
pub fn zscore(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(first) = rows.first() else {
        return vec![];
    };
    let n = rows.len() as f64;
    let d = first.len();
    let mut out = rows.to_vec();
    for c in 0..d {
        let mean = rows.iter().map(|r| r[c]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        for r in &mut out {
            r[c] = if sd > 1e-12 { (r[c] - mean) / sd } else { 0.0 };
        }
    }
    out
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Each point's k nearest neighbors, itself first, then ascending distance with
/// ties broken by index.
pub fn knn(rows: &[Vec<f64>], k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = rows.len();
    (0..n)
        .map(|i| {
            let mut d: Vec<(usize, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (j, dist(&rows[i], &rows[j])))
                .collect();
            let take = (k - 1).min(d.len());
            if take < d.len() {
                d.select_nth_unstable_by(take, |a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            }
            d.truncate(take);
            d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            let mut row = vec![(i, 0.0)];
            row.extend(d);
            row
        })
        .collect()
}

const SMOOTH_TOL: f64 = 1e-5;
const MIN_K_DIST_SCALE: f64 = 1e-3;

/// Bandwidth calibration: (rho, sigma) per point so that the neighbor
/// memberships sum to log2(k).
pub fn smooth_knn(neighbors: &[Vec<(usize, f64)>], k: usize) -> Vec<(f64, f64)> {
    let target = (k as f64).log2();
    let all_mean = {
        let (s, c) = neighbors
            .iter()
            .flat_map(|r| r.iter().map(|p| p.1))
            .fold((0.0, 0usize), |(s, c), d| (s + d, c + 1));
        if c > 0 {
            s / c as f64
        } else {
            0.0
        }
    };
    neighbors
        .iter()
        .map(|row| {
            let others: Vec<f64> = row.iter().skip(1).map(|p| p.1).collect();
            let rho = others.iter().copied().find(|d| *d > 0.0).unwrap_or(0.0);
            let (mut lo, mut hi, mut mid) = (0.0, f64::INFINITY, 1.0);
            for _ in 0..64 {
                let psum: f64 = others
                    .iter()
                    .map(|d| {
                        let x = d - rho;
                        if x > 0.0 {
                            (-x / mid).exp()
                        } else {
                            1.0
                        }
                    })
                    .sum();
                if (psum - target).abs() < SMOOTH_TOL {
                    break;
                }
                if psum > target {
                    hi = mid;
                    mid = (lo + hi) / 2.0;
                } else {
                    lo = mid;
                    mid = if hi.is_infinite() {
                        mid * 2.0
                    } else {
                        (lo + hi) / 2.0
                    };
                }
            }
            let mean_i = if others.is_empty() {
                0.0
            } else {
                others.iter().sum::<f64>() / others.len() as f64
            };
            let floor = if rho > 0.0 {
                MIN_K_DIST_SCALE * mean_i
            } else {
                MIN_K_DIST_SCALE * all_mean
            };
            (rho, mid.max(floor))
        })
        .collect()
}

/// Symmetric fuzzy graph as (i, j, weight) with both directions present,
/// sorted by (i, j).
pub fn fuzzy_graph(neighbors: &[Vec<(usize, f64)>], k: usize) -> Vec<(usize, usize, f64)> {
    use std::collections::BTreeMap;
    let calib = smooth_knn(neighbors, k);
    let mut directed: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, row) in neighbors.iter().enumerate() {
        let (rho, sigma) = calib[i];
        for &(j, d) in row.iter().skip(1) {
            let x = d - rho;
            let w = if x <= 0.0 || sigma == 0.0 {
                1.0
            } else {
                (-x / sigma).exp()
            };
            directed.insert((i, j), w);
        }
    }
    let mut sym: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(i, j), &w) in &directed {
        let wt = directed.get(&(j, i)).copied().unwrap_or(0.0);
        let v = w + wt - w * wt;
        sym.insert((i, j), v);
        sym.insert((j, i), v);
    }
    sym.into_iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|((i, j), w)| (i, j, w))
        .collect()
}

/// Fits 1 / (1 + a·d^(2b)) to the target membership curve with the given
/// min_dist and spread, by damped Gauss-Newton least squares.
pub fn find_ab(spread: f64, min_dist: f64) -> (f64, f64) {
    let xs: Vec<f64> = (0..300).map(|i| 3.0 * spread * i as f64 / 299.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| {
            if x < min_dist {
                1.0
            } else {
                (-(x - min_dist) / spread).exp()
            }
        })
        .collect();
    let sse = |a: f64, b: f64| -> f64 {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| (1.0 / (1.0 + a * x.powf(2.0 * b)) - y).powi(2))
            .sum()
    };
    let (mut a, mut b) = (1.0, 1.0);
    let mut lambda = 1e-3;
    let mut cur = sse(a, b);
    for _ in 0..500 {
        let (mut jtj, mut jtr) = ([[0.0; 2]; 2], [0.0; 2]);
        for (&x, &y) in xs.iter().zip(&ys) {
            if x == 0.0 {
                continue;
            }
            let p = x.powf(2.0 * b);
            let den = 1.0 + a * p;
            let f = 1.0 / den;
            let da = -p / (den * den);
            let db = -a * p * 2.0 * x.ln() / (den * den);
            let r = f - y;
            let g = [da, db];
            for u in 0..2 {
                jtr[u] += g[u] * r;
                for v in 0..2 {
                    jtj[u][v] += g[u] * g[v];
                }
            }
        }
        let m = [
            [jtj[0][0] * (1.0 + lambda), jtj[0][1]],
            [jtj[1][0], jtj[1][1] * (1.0 + lambda)],
        ];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let step_a = -(m[1][1] * jtr[0] - m[0][1] * jtr[1]) / det;
        let step_b = -(m[0][0] * jtr[1] - m[1][0] * jtr[0]) / det;
        let (na, nb) = (a + step_a, b + step_b);
        let next = if na > 0.0 && nb > 0.0 {
            sse(na, nb)
        } else {
            f64::INFINITY
        };
        if next < cur {
            let done = (cur - next) < 1e-15 * cur.max(1e-300);
            a = na;
            b = nb;
            cur = next;
            lambda = (lambda / 10.0).max(1e-12);
            if done {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    (a, b)
}

/// Top-two principal component scores, scaled so the largest absolute
/// coordinate is 10.
fn pca_init(rows: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let n = rows.len();
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for u in 0..d {
            let du = r[u] - mean[u];
            for v in u..d {
                cov[u][v] += du * (r[v] - mean[v]);
            }
        }
    }
    for u in 0..d {
        for v in 0..u {
            cov[u][v] = cov[v][u];
        }
    }
    let mut comps: Vec<Vec<f64>> = Vec::new();
    for c in 0..2 {
        // deterministic start vector, deflated against earlier components
        let mut v: Vec<f64> = (0..d).map(|i| 1.0 + 0.1 * ((i + c) % 7) as f64).collect();
        for _ in 0..500 {
            let mut w: Vec<f64> = (0..d)
                .map(|u| (0..d).map(|x| cov[u][x] * v[x]).sum())
                .collect();
            for p in &comps {
                let dot: f64 = w.iter().zip(p).map(|(a, b)| a * b).sum();
                for (wi, pi) in w.iter_mut().zip(p) {
                    *wi -= dot * pi;
                }
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-300 {
                // degenerate direction: any unit vector orthogonal to the rest
                w = vec![0.0; d];
                w[c.min(d - 1)] = 1.0;
                v = w;
                break;
            }
            let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
            let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            v = next;
            if delta < 1e-12 {
                break;
            }
        }
        // fix the sign so the largest loading is positive
        let big = v
            .iter()
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if big < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        comps.push(v);
    }
    let mut out: Vec<[f64; 2]> = rows
        .iter()
        .map(|r| {
            let mut p = [0.0; 2];
            for (c, comp) in comps.iter().enumerate() {
                p[c] = r
                    .iter()
                    .zip(&mean)
                    .zip(comp)
                    .map(|((x, m), w)| (x - m) * w)
                    .sum();
            }
            p
        })
        .collect();
    let max = out
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if max > 0.0 {
        for p in &mut out {
            p[0] *= 10.0 / max;
            p[1] *= 10.0 / max;
        }
    }
    out
}

fn clip(g: f64) -> f64 {
    g.clamp(-4.0, 4.0)
}

/// Embeds the rows in two dimensions. Rows should already be standardized.
/// The result depends only on the input order and the seed.
pub fn embed_2d(rows: &[Vec<f64>], params: &EmbedParams, seed: u64) -> Result<Vec<[f64; 2]>> {
    params.validate()?;
    let n = rows.len();
    if n < params.n_neighbors + 1 {
        return Err(Error::Precondition(format!(
            "embedding needs at least {} points, got {n}",
            params.n_neighbors + 1
        )));
    }
    let dim = rows[0].len();
    if rows
        .iter()
        .any(|r| r.len() != dim || r.iter().any(|x| !x.is_finite()))
    {
        return Err(Error::InvalidInput(
            "embedding input rows must be finite and equal-length".into(),
        ));
    }
    let k = params.n_neighbors;
    let graph = fuzzy_graph(&knn(rows, k), k);
    let (a, b) = find_ab(params.spread, params.min_dist);
    let mut y = pca_init(rows);

    let max_w = graph.iter().map(|e| e.2).fold(0.0, f64::max);
    let n_epochs = params.n_epochs as f64;
    let edges: Vec<(usize, usize, f64)> = graph
        .into_iter()
        .filter(|e| e.2 >= max_w / n_epochs)
        .map(|(i, j, w)| (i, j, max_w / w))
        .collect();
    let neg_rate = params.negative_sample_rate as f64;
    let mut next_sample: Vec<f64> = edges.iter().map(|e| e.2).collect();
    let mut next_negative: Vec<f64> = edges.iter().map(|e| e.2 / neg_rate).collect();

    let mut rng = seeded(seed);
    for epoch in 0..params.n_epochs {
        let alpha = params.learning_rate * (1.0 - epoch as f64 / n_epochs);
        let e_f = epoch as f64;
        for (idx, &(j, kk, eps)) in edges.iter().enumerate() {
            if next_sample[idx] > e_f {
                continue;
            }
            let diff = [y[j][0] - y[kk][0], y[j][1] - y[kk][1]];
            let d2 = diff[0] * diff[0] + diff[1] * diff[1];
            let coeff = if d2 > 0.0 {
                -2.0 * a * b * d2.powf(b - 1.0) / (a * d2.powf(b) + 1.0)
            } else {
                0.0
            };
            for c in 0..2 {
                let g = clip(coeff * diff[c]) * alpha;
                y[j][c] += g;
                y[kk][c] -= g;
            }
            next_sample[idx] += eps;

            let eps_neg = eps / neg_rate;
            let n_neg = ((e_f - next_negative[idx]) / eps_neg).floor().max(0.0) as usize;
            for _ in 0..n_neg {
                let other = rng.random_range(0..n);
                if other == j {
                    continue;
                }
                let diff = [y[j][0] - y[other][0], y[j][1] - y[other][1]];
                let d2 = diff[0] * diff[0] + diff[1] * diff[1];
                for c in 0..2 {
                    let g = if d2 > 0.0 {
                        clip(2.0 * b / ((0.001 + d2) * (a * d2.powf(b) + 1.0)) * diff[c])
                    } else {
                        4.0
                    };
                    y[j][c] += g * alpha;
                }
            }
            next_negative[idx] += n_neg as f64 * eps_neg;
        }
    }
    Ok(y)
}
