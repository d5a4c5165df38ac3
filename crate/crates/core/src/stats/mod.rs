//! Correlation, significance, Bayes factors, and test-retest reliability.

mod bayes;
mod correlation;
mod icc;
pub mod special;

use std::collections::BTreeMap;

pub use bayes::{bayes_factor, jzs_bf, CorrelationPrior, BF_REL_TOL};
pub use correlation::{
    correlate, linfit_rmse, p_two_tailed, pearson, CorrResult, LinearFit, PValue,
};
pub use icc::{icc_2_1, icc_2_1_complete, IccResult};

/// Inner join of two per-participant measures: participants missing either side
/// are dropped. Output is ordered by participant id.
pub fn pair_by_participant(
    a: &BTreeMap<String, f64>,
    b: &BTreeMap<String, f64>,
) -> (Vec<String>, Vec<f64>, Vec<f64>) {
    let mut ids = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (id, x) in a {
        if let Some(y) = b.get(id) {
            ids.push(id.clone());
            xs.push(*x);
            ys.push(*y);
        }
    }
    (ids, xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_is_an_inner_join() {
        let a: BTreeMap<String, f64> = [("p1", 1.0), ("p2", 2.0), ("p3", 3.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let b: BTreeMap<String, f64> = [("p2", 20.0), ("p3", 30.0), ("p4", 40.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let (ids, x, y) = pair_by_participant(&a, &b);
        assert_eq!(ids, vec!["p2", "p3"]);
        assert_eq!(x, vec![2.0, 3.0]);
        assert_eq!(y, vec![20.0, 30.0]);
    }
}
