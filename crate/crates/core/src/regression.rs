//! Multiple regression on the four cost drivers with a transformed target.
//!
//! Five target transforms are supported: plain, square root ("quadratic"),
//! natural log ("semilog"), reciprocal and square ("power 2"). Each model is
//! fitted by least squares in the transformed space and inverts the
//! transform when predicting.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::data::{FeatureVector, N_FEATURES};
use crate::error::{Error, Result};

/// Condition numbers above this are treated as rank deficient.
pub const MAX_CONDITION: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinearTransform {
    Plain,
    QuadraticSqrt,
    Semilog,
    Reciprocal,
    Power2,
}

impl LinearTransform {
    pub fn name(&self) -> &'static str {
        match self {
            LinearTransform::Plain => "plain",
            LinearTransform::QuadraticSqrt => "quadratic_sqrt",
            LinearTransform::Semilog => "semilog",
            LinearTransform::Reciprocal => "reciprocal",
            LinearTransform::Power2 => "power2",
        }
    }

    /// Maps a cost into the space the linear model is fitted in.
    pub fn forward(&self, y: f64) -> Result<f64> {
        let domain = |ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(Error::TransformDomain {
                    transform: self.name(),
                    value: y,
                })
            }
        };
        match self {
            LinearTransform::Plain => Ok(y),
            LinearTransform::QuadraticSqrt => domain(y > 0.0).map(|_| y.sqrt()),
            LinearTransform::Semilog => domain(y > 0.0).map(|_| y.ln()),
            LinearTransform::Reciprocal => domain(y > 0.0).map(|_| 1.0 / y),
            LinearTransform::Power2 => Ok(y * y),
        }
    }

    /// Maps a linear output back to a cost.
    pub fn inverse(&self, z: f64) -> Result<f64> {
        let out = match self {
            LinearTransform::Plain => z,
            LinearTransform::QuadraticSqrt => {
                if z < 0.0 {
                    return Err(Error::NegativeSqrtDomain(z));
                }
                z * z
            }
            LinearTransform::Semilog => z.exp(),
            LinearTransform::Reciprocal => 1.0 / z,
            LinearTransform::Power2 => {
                if z < 0.0 {
                    return Err(Error::NegativeSqrtDomain(z));
                }
                z.sqrt()
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::NonConvergence(format!(
                "{} inverse of {z} is not finite",
                self.name()
            )))
        }
    }
}

impl fmt::Display for LinearTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: [f64; N_FEATURES],
    pub transform: LinearTransform,
    /// Condition number of the column-equilibrated design, when fitted.
    pub condition_number: Option<f64>,
}

impl LinearModel {
    /// The published square-root cost model:
    /// √Y = −37032.81 + 2.21·P1 + 0.1691·P2 + 2.265·P3 + 18.594·P4.
    pub fn eq6_reference() -> Self {
        LinearModel {
            intercept: -37032.81,
            coefficients: [2.21, 0.1691, 2.265, 18.594],
            transform: LinearTransform::QuadraticSqrt,
            condition_number: None,
        }
    }

    /// Output in the transformed space.
    pub fn linear_output(&self, x: &[f64; N_FEATURES]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(b, v)| b * v)
                .sum::<f64>()
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<f64> {
        let values = x.complete()?;
        self.transform.inverse(self.linear_output(&values))
    }
}

/// Least squares fit of the transformed target on the four drivers.
///
/// Features are centred and equilibrated before an SVD solve; the condition
/// number of that design decides rank deficiency.
pub fn fit_ols(x: &[FeatureVector], y: &[f64], transform: LinearTransform) -> Result<LinearModel> {
    if x.is_empty() {
        return Err(Error::EmptyTrain);
    }
    assert_eq!(x.len(), y.len(), "feature and target counts differ");
    let rows: Vec<[f64; N_FEATURES]> = x.iter().map(|f| f.complete()).collect::<Result<_>>()?;
    let z: Vec<f64> = y.iter().map(|&v| transform.forward(v)).collect::<Result<_>>()?;

    let n = rows.len();
    let p = N_FEATURES + 1;
    if n < p {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    let mut means = [0.0; N_FEATURES];
    for r in &rows {
        for (m, v) in means.iter_mut().zip(r) {
            *m += v / n as f64;
        }
    }
    let mut scales = [0.0; N_FEATURES];
    for r in &rows {
        for j in 0..N_FEATURES {
            scales[j] += (r[j] - means[j]).powi(2);
        }
    }
    for s in scales.iter_mut() {
        *s = s.sqrt();
        if *s == 0.0 {
            return Err(Error::RankDeficient {
                condition: f64::INFINITY,
            });
        }
    }

    let root_n = (n as f64).sqrt();
    let design = DMatrix::from_fn(n, p, |i, j| {
        if j == 0 {
            1.0 / root_n
        } else {
            (rows[i][j - 1] - means[j - 1]) / scales[j - 1]
        }
    });
    let svd = design.svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::RankDeficient { condition });
    }
    let rhs = DVector::from_vec(z);
    let beta = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::NonConvergence(e.to_string()))?;

    let mut coefficients = [0.0; N_FEATURES];
    for j in 0..N_FEATURES {
        coefficients[j] = beta[j + 1] / scales[j];
    }
    let intercept = beta[0] / root_n
        - coefficients
            .iter()
            .zip(&means)
            .map(|(b, m)| b * m)
            .sum::<f64>();
    Ok(LinearModel {
        intercept,
        coefficients,
        transform,
        condition_number: Some(condition),
    })
}
