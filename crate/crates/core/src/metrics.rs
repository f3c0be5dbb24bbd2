//! Accuracy, linearity and consistency metrics between subjective MOS and
//! model predictions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MappingCoefficients, MosLabel};

/// Denominator used inside the RMSE square root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RmseDenominator {
    /// `N - 1`, as used for challenge scoring.
    #[default]
    NMinusOne,
    /// Classical `N`, for comparisons against other tools.
    N,
}

/// Per-dataset evaluation result for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub dataset: String,
    pub model_id: String,
    pub pcc: f64,
    pub rmse: f64,
    pub rmse_map: f64,
    pub outlier_ratio: f64,
    pub n: usize,
    pub mapping: MappingCoefficients,
    /// Polynomial order actually fitted (3 unless the predictions had too
    /// few distinct values).
    pub mapping_order: usize,
}

fn check_aligned(labels: &[f64], preds: &[f64]) -> Result<()> {
    if labels.len() != preds.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: preds.len(),
        });
    }
    if labels.iter().chain(preds).any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite score".into()));
    }
    Ok(())
}

/// `MOS(i) - MOS_p(i)` for every clip.
pub fn perror(labels: &[f64], preds: &[f64]) -> Result<Vec<f64>> {
    check_aligned(labels, preds)?;
    if labels.is_empty() {
        return Err(Error::TooFew { needed: 1, got: 0 });
    }
    Ok(labels.iter().zip(preds).map(|(m, p)| m - p).collect())
}

/// Root mean squared prediction error with the `N - 1` denominator.
pub fn rmse(labels: &[f64], preds: &[f64]) -> Result<f64> {
    rmse_with(labels, preds, RmseDenominator::NMinusOne)
}

pub fn rmse_with(labels: &[f64], preds: &[f64], denom: RmseDenominator) -> Result<f64> {
    let errors = perror(labels, preds)?;
    let n = errors.len();
    if n < 2 {
        return Err(Error::TooFew { needed: 2, got: n });
    }
    let sse: f64 = errors.iter().map(|e| e * e).sum();
    let d = match denom {
        RmseDenominator::NMinusOne => (n - 1) as f64,
        RmseDenominator::N => n as f64,
    };
    Ok((sse / d).sqrt())
}

/// Pearson correlation. Zero variance on either side is an error, never NaN.
pub fn pcc(labels: &[f64], preds: &[f64]) -> Result<f64> {
    check_aligned(labels, preds)?;
    let n = labels.len();
    if n < 2 {
        return Err(Error::TooFew { needed: 2, got: n });
    }
    let mx = labels.iter().sum::<f64>() / n as f64;
    let my = preds.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in labels.iter().zip(preds) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate(format!(
            "zero variance in {}",
            if sxx == 0.0 { "labels" } else { "predictions" }
        )));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Fraction of clips whose absolute prediction error is strictly larger
/// than the clip's 95% CI half-width.
pub fn outlier_ratio(labels: &[MosLabel], preds: &[f64]) -> Result<f64> {
    let mos: Vec<f64> = labels.iter().map(|l| l.mos).collect();
    let ci: Vec<f64> = labels.iter().map(|l| l.ci95).collect();
    outlier_ratio_raw(&mos, &ci, preds)
}

pub fn outlier_ratio_raw(mos: &[f64], ci95: &[f64], preds: &[f64]) -> Result<f64> {
    let errors = perror(mos, preds)?;
    if ci95.len() != mos.len() {
        return Err(Error::Invalid(format!(
            "{} confidence intervals for {} clips",
            ci95.len(),
            mos.len()
        )));
    }
    if ci95.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(Error::Invalid(
            "ci95 must be finite and non-negative".into(),
        ));
    }
    let outliers = errors
        .iter()
        .zip(ci95)
        .filter(|(e, ci)| e.abs() > **ci)
        .count();
    Ok(outliers as f64 / errors.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perror_examples() {
        assert_eq!(perror(&[3.0], &[3.0]).unwrap(), vec![0.0]);
        assert_eq!(perror(&[4.0, 2.0], &[3.5, 2.5]).unwrap(), vec![0.5, -0.5]);
        assert_eq!(
            perror(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap(),
            vec![-1.0, 0.0, 1.0]
        );
        assert!(matches!(
            perror(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn rmse_examples() {
        let v = [1.0, 2.5, 3.0, 4.5, 5.0];
        assert_eq!(rmse(&v, &v).unwrap(), 0.0);
        assert_eq!(rmse(&[3.0, 3.0], &[4.0, 4.0]).unwrap(), 2f64.sqrt());
        assert_eq!(rmse(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(
            rmse_with(&[3.0, 3.0], &[4.0, 4.0], RmseDenominator::N).unwrap(),
            1.0
        );
        assert!(matches!(rmse(&[3.0], &[3.0]), Err(Error::TooFew { .. })));
        assert!(rmse(&[3.0, f64::NAN], &[3.0, 3.0]).is_err());
    }

    #[test]
    fn pcc_examples() {
        let x = [1.0, 2.0, 4.0, 3.5];
        let pos: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pcc(&x, &pos).unwrap() - 1.0).abs() < 1e-12);
        assert!((pcc(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert!((pcc(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            pcc(&[1.0, 2.0], &[3.0, 3.0]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn outlier_examples() {
        let mos = [3.0; 4];
        let ci = [0.5; 4];
        let p = [2.8, 3.2, 2.8, 3.2];
        assert_eq!(outlier_ratio_raw(&mos, &ci, &p).unwrap(), 0.0);
        let p = [3.6, 3.2, 2.8, 3.2];
        assert_eq!(outlier_ratio_raw(&mos, &ci, &p).unwrap(), 0.25);
        // Errors exactly equal to the CI are not outliers.
        let mos = [3.0, 2.0];
        let ci = [0.5, 0.25];
        let p = [3.5, 1.75];
        assert_eq!(outlier_ratio_raw(&mos, &ci, &p).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn rmse_symmetric_nonnegative(pairs in prop::collection::vec((1.0f64..5.0, 1.0f64..5.0), 2..30)) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let r1 = rmse(&a, &b).unwrap();
            let r2 = rmse(&b, &a).unwrap();
            prop_assert!(r1 >= 0.0);
            prop_assert_eq!(r1, r2);
            prop_assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        }

        #[test]
        fn pcc_affine_invariance(
            pairs in prop::collection::vec((1.0f64..5.0, 1.0f64..5.0), 3..30),
            scale in 0.1f64..10.0,
            shift in -5.0f64..5.0,
        ) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let Ok(r) = pcc(&a, &b) {
                let pos: Vec<f64> = b.iter().map(|v| scale * v + shift).collect();
                let neg: Vec<f64> = b.iter().map(|v| -scale * v + shift).collect();
                prop_assert!((pcc(&a, &pos).unwrap() - r).abs() < 1e-9);
                prop_assert!((pcc(&a, &neg).unwrap() + r).abs() < 1e-9);
            }
        }

        #[test]
        fn outlier_ratio_monotone_in_ci(
            rows in prop::collection::vec((1.0f64..5.0, 1.0f64..5.0, 0.0f64..1.0), 1..30),
            bump in 0.0f64..1.0,
        ) {
            let mos: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let pred: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let ci: Vec<f64> = rows.iter().map(|r| r.2).collect();
            let wider: Vec<f64> = ci.iter().map(|c| c + bump).collect();
            let base = outlier_ratio_raw(&mos, &ci, &pred).unwrap();
            let relaxed = outlier_ratio_raw(&mos, &wider, &pred).unwrap();
            prop_assert!(relaxed <= base);
            prop_assert!((0.0..=1.0).contains(&base));
        }
    }
}
