//! Accuracy metrics used to rank models: MAPE, R², adjusted R² and the
//! three-way MAPE categorization.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapeCategory {
    /// 0 ≤ MAPE ≤ 10
    Below10,
    /// 10 < MAPE ≤ 20
    Below20,
    /// MAPE > 20
    Unacceptable,
}

impl MapeCategory {
    pub fn label(&self) -> &'static str {
        match self {
            MapeCategory::Below10 => "below 10",
            MapeCategory::Below20 => "below 20",
            MapeCategory::Unacceptable => "unacceptable",
        }
    }
}

impl fmt::Display for MapeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn check_lengths(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() || actual.is_empty() {
        return Err(Error::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    Ok(())
}

/// Mean absolute percentage error, relative to the actual values.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted)?;
    let mut sum = 0.0;
    for (index, (&y, &p)) in actual.iter().zip(predicted).enumerate() {
        if !(y > 0.0) {
            return Err(Error::NonpositiveActual { index });
        }
        sum += (y - p).abs() / y;
    }
    Ok(sum / actual.len() as f64 * 100.0)
}

pub fn categorize(mape_pct: f64) -> Result<MapeCategory> {
    if !(mape_pct >= 0.0) {
        return Err(Error::NegativeMape(mape_pct));
    }
    Ok(if mape_pct <= 10.0 {
        MapeCategory::Below10
    } else if mape_pct <= 20.0 {
        MapeCategory::Below20
    } else {
        MapeCategory::Unacceptable
    })
}

/// Coefficient of determination, 1 − SSE/SST. Negative for models worse
/// than the mean.
pub fn r_squared(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted)?;
    let n = actual.len() as f64;
    let mean = actual.iter().sum::<f64>() / n;
    let sst: f64 = actual.iter().map(|y| (y - mean).powi(2)).sum();
    if actual.len() < 2 || sst == 0.0 {
        return Err(Error::ZeroSst);
    }
    let sse: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p).powi(2))
        .sum();
    Ok(1.0 - sse / sst)
}

pub fn adjusted_r_squared(r2: f64, k_predictors: usize, n: usize) -> Result<f64> {
    if n <= k_predictors + 1 {
        return Err(Error::DegenerateDof { n, k: k_predictors });
    }
    let k = k_predictors as f64;
    Ok(r2 - (1.0 - r2) * k / (n as f64 - (k + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn mape_examples() {
        assert_eq!(mape(&[100.0], &[100.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(mape(&[100.0], &[110.0]).unwrap(), 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mape(&[100.0, 200.0], &[90.0, 240.0]).unwrap(), 15.0, epsilon = 1e-12);
    }

    #[test]
    fn mape_errors() {
        assert_eq!(mape(&[0.0], &[1.0]).unwrap_err().class(), "NONPOSITIVE_ACTUAL");
        assert_eq!(mape(&[1.0, 2.0], &[1.0]).unwrap_err().class(), "LENGTH_MISMATCH");
    }

    #[test]
    fn categorize_examples() {
        assert_eq!(categorize(9.091).unwrap(), MapeCategory::Below10);
        assert_eq!(categorize(10.0).unwrap(), MapeCategory::Below10);
        assert_eq!(categorize(15.0).unwrap(), MapeCategory::Below20);
        assert_eq!(categorize(20.0).unwrap(), MapeCategory::Below20);
        assert_eq!(categorize(21.217).unwrap(), MapeCategory::Unacceptable);
        assert_eq!(categorize(0.0).unwrap(), MapeCategory::Below10);
        assert_eq!(categorize(-0.1).unwrap_err().class(), "NEGATIVE_MAPE");
    }

    #[test]
    fn r_squared_examples() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(r_squared(&y, &y).unwrap(), 1.0);
        assert_abs_diff_eq!(r_squared(&y, &[2.0, 2.0, 2.0]).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r_squared(&y, &[1.0, 2.0, 4.0]).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(r_squared(&[5.0, 5.0], &[5.0, 5.0]).unwrap_err(), Error::ZeroSst);
    }

    #[test]
    fn adjusted_examples() {
        assert_eq!(adjusted_r_squared(1.0, 4, 33).unwrap(), 1.0);
        let adj = adjusted_r_squared(0.931, 4, 144).unwrap();
        assert_abs_diff_eq!(adj, 0.931 - 0.069 * 4.0 / 139.0, epsilon = 1e-12);
        assert!((adj - 0.929).abs() <= 0.0005);
        assert_abs_diff_eq!(adjusted_r_squared(0.5, 4, 6).unwrap(), -1.5, epsilon = 1e-12);
        assert_eq!(adjusted_r_squared(0.5, 4, 5).unwrap_err().class(), "DEGENERATE_DOF");
    }

    proptest! {
        #[test]
        fn mape_is_scale_invariant(
            pairs in prop::collection::vec((1.0f64..1e6, 0.0f64..2e6), 1..20),
            c in 1e-3f64..1e3,
        ) {
            let (a, p): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let base = mape(&a, &p).unwrap();
            let sa: Vec<f64> = a.iter().map(|v| v * c).collect();
            let sp: Vec<f64> = p.iter().map(|v| v * c).collect();
            let scaled = mape(&sa, &sp).unwrap();
            prop_assert!((base - scaled).abs() <= 1e-9 * base.max(1.0));
        }

        #[test]
        fn r_squared_at_most_one(
            pairs in prop::collection::vec((1.0f64..1e3, -1e3f64..1e3), 2..30),
        ) {
            let (a, p): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let Ok(r2) = r_squared(&a, &p) {
                prop_assert!(r2 <= 1.0);
            }
        }

        #[test]
        fn adjusted_never_exceeds_r2(r2 in -5.0f64..=1.0, k in 1usize..10, extra in 2usize..200) {
            let n = k + extra;
            let adj = adjusted_r_squared(r2, k, n).unwrap();
            prop_assert!(adj <= r2);
            if r2 < 1.0 {
                prop_assert!(adj < r2);
            }
        }
    }
}
