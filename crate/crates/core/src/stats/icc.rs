use serde::{Deserialize, Serialize};

use super::special::f_upper_tail;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IccResult {
    pub icc: f64,
    /// Subjects.
    pub n: usize,
    /// Sessions (raters).
    pub k: usize,
    pub f: f64,
    pub p: f64,
    pub msr: f64,
    pub msc: f64,
    pub mse: f64,
}

/// ICC(2,1): two-way random effects, absolute agreement, single measurement.
///
/// `matrix` is subjects × sessions. p comes from F = MSR / MSE on
/// (n − 1, (n − 1)(k − 1)) degrees of freedom.
pub fn icc_2_1(matrix: &[Vec<Option<f64>>]) -> Result<IccResult> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::Precondition(format!("need >= 2 subjects, got {n}")));
    }
    let k = matrix[0].len();
    if k < 2 {
        return Err(Error::Precondition(format!("need >= 2 sessions, got {k}")));
    }
    let mut data = Vec::with_capacity(n * k);
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != k {
            return Err(Error::Precondition(format!(
                "subject {i} has {} sessions, expected {k}",
                row.len()
            )));
        }
        for (j, cell) in row.iter().enumerate() {
            match cell {
                Some(v) if v.is_finite() => data.push(*v),
                _ => {
                    return Err(Error::Precondition(format!(
                        "missing cell (subject {i}, session {j}); complete rows required"
                    )))
                }
            }
        }
    }
    let at = |i: usize, j: usize| data[i * k + j];
    let (nf, kf) = (n as f64, k as f64);
    let grand = data.iter().sum::<f64>() / (nf * kf);
    let row_means: Vec<f64> = (0..n)
        .map(|i| (0..k).map(|j| at(i, j)).sum::<f64>() / kf)
        .collect();
    let col_means: Vec<f64> = (0..k)
        .map(|j| (0..n).map(|i| at(i, j)).sum::<f64>() / nf)
        .collect();
    let ssr = kf * row_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ssc = nf * col_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    // residual sum of squares computed directly rather than by subtraction
    let mut sse = 0.0;
    for i in 0..n {
        for j in 0..k {
            sse += (at(i, j) - row_means[i] - col_means[j] + grand).powi(2);
        }
    }
    let msr = ssr / (nf - 1.0);
    let msc = ssc / (kf - 1.0);
    let dfe = (nf - 1.0) * (kf - 1.0);
    let mse = sse / dfe;
    let denom = msr + (kf - 1.0) * mse + (kf / nf) * (msc - mse);
    if denom == 0.0 {
        return Err(Error::Precondition(
            "ICC undefined: no variance in the table".to_string(),
        ));
    }
    let icc = (msr - mse) / denom;
    let f = if mse == 0.0 { f64::INFINITY } else { msr / mse };
    let p = f_upper_tail(f, nf - 1.0, dfe);
    Ok(IccResult {
        icc,
        n,
        k,
        f,
        p,
        msr,
        msc,
        mse,
    })
}

/// Convenience for complete tables.
pub fn icc_2_1_complete(matrix: &[Vec<f64>]) -> Result<IccResult> {
    let wrapped: Vec<Vec<Option<f64>>> = matrix
        .iter()
        .map(|r| r.iter().copied().map(Some).collect())
        .collect();
    icc_2_1(&wrapped)
}
