//! Density clustering of embedded points.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const NOISE: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    pub eps: f64,
    /// Neighborhood size for a core point, the point itself included.
    pub min_samples: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            eps: 1.1,
            min_samples: 30,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) || self.min_samples == 0 {
            return Err(Error::InvalidInput(
                "eps and min_samples must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Labels each point with a cluster id (0, 1, ... in order of discovery) or
/// [`NOISE`]. Border points join the first cluster that reaches them.
pub fn dbscan(points: &[[f64; 2]], params: &ClusterParams) -> Vec<i64> {
    let n = points.len();
    let eps2 = params.eps * params.eps;
    // sort by x so each neighborhood query only scans a strip
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(a.cmp(&b)));
    let xs: Vec<f64> = order.iter().map(|&i| points[i][0]).collect();
    let neighbors = |i: usize| -> Vec<usize> {
        let p = points[i];
        let lo = xs.partition_point(|&x| x < p[0] - params.eps);
        let mut out = Vec::new();
        for &j in &order[lo..] {
            let q = points[j];
            if q[0] > p[0] + params.eps {
                break;
            }
            if (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) <= eps2 {
                out.push(j);
            }
        }
        out.sort_unstable();
        out
    };

    const UNSEEN: i64 = -2;
    let mut labels = vec![UNSEEN; n];
    let mut next = 0;
    for i in 0..n {
        if labels[i] != UNSEEN {
            continue;
        }
        let nb = neighbors(i);
        if nb.len() < params.min_samples {
            labels[i] = NOISE;
            continue;
        }
        let id = next;
        next += 1;
        labels[i] = id;
        let mut queue: std::collections::VecDeque<usize> = nb.into_iter().collect();
        while let Some(j) = queue.pop_front() {
            if labels[j] == NOISE {
                labels[j] = id;
            }
            if labels[j] != UNSEEN {
                continue;
            }
            labels[j] = id;
            let nb = neighbors(j);
            if nb.len() >= params.min_samples {
                queue.extend(nb);
            }
        }
    }
    labels
}

pub fn n_clusters(labels: &[i64]) -> usize {
    labels
        .iter()
        .copied()
        .max()
        .map_or(0, |m| (m + 1).max(0) as usize)
}
