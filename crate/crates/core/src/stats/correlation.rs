use serde::{Deserialize, Serialize};

use super::bayes::{bayes_factor, CorrelationPrior};
use super::special::student_t_two_tailed;
use crate::{Error, Result};

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Precondition(format!(
            "paired samples differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::Precondition(format!(
            "need at least 3 pairs, got {}",
            x.len()
        )));
    }
    Ok(())
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Precondition(
            "correlation undefined: zero variance".to_string(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValue {
    pub p: f64,
    /// Set when |r| = 1 and the p = 0 limit was returned.
    pub limit: bool,
}

/// Two-tailed p for H0: ρ = 0 via t = r√(n−2)/√(1−r²) on n−2 degrees of freedom.
pub fn p_two_tailed(r: f64, n: usize) -> Result<PValue> {
    if n < 3 {
        return Err(Error::Precondition(format!("need n >= 3, got {n}")));
    }
    if !(-1.0..=1.0).contains(&r) {
        return Err(Error::InvalidInput(format!("r = {r} outside [-1, 1]")));
    }
    if r.abs() == 1.0 {
        return Ok(PValue {
            p: 0.0,
            limit: true,
        });
    }
    let df = (n - 2) as f64;
    let t = r * df.sqrt() / (1.0 - r * r).sqrt();
    Ok(PValue {
        p: student_t_two_tailed(t, df).min(1.0),
        limit: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub rmse: f64,
}

/// Ordinary least squares; rmse is √(mean squared residual).
pub fn linfit_rmse(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    check_pair(x, y)?;
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("zero variance in x".to_string()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mse = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (intercept + slope * a)).powi(2))
        .sum::<f64>()
        / x.len() as f64;
    Ok(LinearFit {
        slope,
        intercept,
        rmse: mse.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrResult {
    pub r: f64,
    pub n: usize,
    pub p: f64,
    pub bf10: f64,
    pub rmse: f64,
    pub slope: f64,
    pub intercept: f64,
}

/// Everything reported for one pairing: r, p, BF10, and the regression RMSE.
pub fn correlate(x: &[f64], y: &[f64], prior: CorrelationPrior) -> Result<CorrResult> {
    let r = pearson(x, y)?;
    let n = x.len();
    let p = p_two_tailed(r, n)?.p;
    let bf10 = bayes_factor(r, n, prior)?;
    let fit = linfit_rmse(x, y)?;
    Ok(CorrResult {
        r,
        n,
        p,
        bf10,
        rmse: fit.rmse,
        slope: fit.slope,
        intercept: fit.intercept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_lines() {
        assert!((pearson(&[1., 2., 3., 4.], &[2., 4., 6., 8.]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1., 2., 3.], &[-1., -2., -3.]).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn extended_precision_fixture() {
        // 40-digit mpmath evaluation of the product-moment formula
        let r = pearson(&[0., 1., 2., 3.], &[0., 1., 2., 7.]).unwrap();
        assert!((r - 0.913_500_278_391_139_7).abs() < 1e-15);
    }

    #[test]
    fn zero_variance_is_an_error() {
        assert!(matches!(
            pearson(&[1., 1., 1.], &[1., 2., 3.]),
            Err(Error::Precondition(_))
        ));
        assert!(pearson(&[1., 2.], &[1., 2.]).is_err());
    }

    #[test]
    fn p_value_fixtures() {
        assert_eq!(p_two_tailed(0.0, 10).unwrap().p, 1.0);
        let lim = p_two_tailed(1.0, 10).unwrap();
        assert!(lim.limit && lim.p == 0.0);
        // mpmath regularized incomplete beta
        for &(r, n, oracle) in &[
            (0.58, 20, 0.007_346_531_583_439_73),
            (0.93, 16, 1.832_645_341_536_65e-7),
            (0.3, 50, 0.034_286_180_032_93),
        ] {
            let p = p_two_tailed(r, n).unwrap().p;
            assert!(((p - oracle) / oracle).abs() < 1e-9, "{r} {n}: {p}");
        }
    }

    #[test]
    fn linear_fit_fixtures() {
        let x = [0., 1., 2., 3., 4.];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let f = linfit_rmse(&x, &y).unwrap();
        assert!(
            f.rmse < 1e-12 && (f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12
        );

        assert!(linfit_rmse(&[1., 1., 1.], &[1., 2., 3.]).is_err());
    }

    #[test]
    fn alternating_residuals_give_rmse_point_one() {
        // y = x + (+0.1, -0.1, -0.1, +0.1): residual pattern orthogonal to [1, x],
        // so OLS recovers y = x exactly and every residual is ±0.1.
        let x = [1., 2., 3., 4.];
        let y = [1.1, 1.9, 2.9, 4.1];
        let f = linfit_rmse(&x, &y).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert!(f.intercept.abs() < 1e-12);
        assert!((f.rmse - 0.1).abs() < 1e-12);
    }

    #[test]
    fn single_outlier_fixture() {
        let f = linfit_rmse(&[1., 2., 3., 4., 5., 6.], &[2.1, 3.9, 6.2, 7.8, 10.1, 30.0]).unwrap();
        assert!((f.slope - 4.562_857_142_857_143).abs() < 1e-12);
        assert!((f.intercept + 5.953_333_333_333_333).abs() < 1e-12);
        assert!((f.rmse - 5.075_499_819_002_894).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn affine_invariance(
            pts in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
            a in 0.1f64..10.0, b in -50.0f64..50.0,
        ) {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            if let Ok(r) = pearson(&x, &y) {
                let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
                let r2 = pearson(&xs, &y).unwrap();
                prop_assert!((r - r2).abs() < 1e-9);
                let neg: Vec<f64> = y.iter().map(|v| -a * v).collect();
                let r3 = pearson(&x, &neg).unwrap();
                prop_assert!((r + r3).abs() < 1e-9);
            }
        }

        #[test]
        fn p_monotone(r in 0.01f64..0.98, dr in 0.001f64..0.01, n in 4usize..200) {
            let p = p_two_tailed(r, n).unwrap().p;
            let p_r = p_two_tailed((r + dr).min(0.999), n).unwrap().p;
            let p_n = p_two_tailed(r, n + 1).unwrap().p;
            prop_assert!(p_r < p);
            prop_assert!(p_n < p);
        }
    }
}
