//! Case-based reasoning: score every stored project against a query with a
//! min/max attribute similarity, then reuse the cost of the best match(es).

use std::cmp::Ordering;

use crate::data::{Dataset, FeatureVector, ProjectRecord, N_FEATURES};
use crate::error::{Error, Result};

/// Min/max ratio of two nonnegative attribute values.
///
/// Two zeros count as identical (1); a single zero as dissimilar (0).
pub fn attribute_similarity(av_new: f64, av_retrieved: f64) -> Result<f64> {
    for v in [av_new, av_retrieved] {
        if !(v >= 0.0) {
            return Err(Error::NegativeAttribute(v));
        }
    }
    let hi = av_new.max(av_retrieved);
    if hi == 0.0 {
        return Ok(1.0);
    }
    Ok(av_new.min(av_retrieved) / hi)
}

pub fn attribute_similarities(
    new: &FeatureVector,
    stored: &FeatureVector,
) -> Result<[f64; N_FEATURES]> {
    let a = new.complete()?;
    let b = stored.complete()?;
    let mut out = [0.0; N_FEATURES];
    for i in 0..N_FEATURES {
        out[i] = attribute_similarity(a[i], b[i])?;
    }
    Ok(out)
}

/// Weighted mean of attribute similarities.
pub fn weighted_similarity(per_attribute: &[f64; N_FEATURES], weights: &[f64; N_FEATURES]) -> Result<f64> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroWeightSum);
    }
    Ok(per_attribute
        .iter()
        .zip(weights)
        .map(|(s, w)| s * w)
        .sum::<f64>()
        / total)
}

pub fn case_similarity(
    new: &FeatureVector,
    stored: &FeatureVector,
    weights: &[f64; N_FEATURES],
) -> Result<f64> {
    weighted_similarity(&attribute_similarities(new, stored)?, weights)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    pub best_case: ProjectRecord,
    pub case_similarity: f64,
    pub per_attribute: [f64; N_FEATURES],
    /// Indices into the case base of the reused cases, best first.
    pub neighbours: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseBase {
    cases: Vec<ProjectRecord>,
    weights: [f64; N_FEATURES],
}

impl CaseBase {
    pub fn new(cases: Vec<ProjectRecord>, weights: [f64; N_FEATURES]) -> Result<Self> {
        if cases.is_empty() {
            return Err(Error::EmptyTrain);
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "attribute weights must be finite and nonnegative: {weights:?}"
            )));
        }
        if !(weights.iter().sum::<f64>() > 0.0) {
            return Err(Error::ZeroWeightSum);
        }
        for c in &cases {
            attribute_similarities(&c.features, &c.features)?;
        }
        Ok(CaseBase { cases, weights })
    }

    pub fn from_dataset(d: &Dataset, weights: [f64; N_FEATURES]) -> Result<Self> {
        CaseBase::new(d.records().to_vec(), weights)
    }

    pub fn cases(&self) -> &[ProjectRecord] {
        &self.cases
    }

    pub fn weights(&self) -> &[f64; N_FEATURES] {
        &self.weights
    }

    /// Adds a solved case to the store.
    pub fn retain(&mut self, case: ProjectRecord) -> Result<()> {
        attribute_similarities(&case.features, &case.features)?;
        self.cases.push(case);
        Ok(())
    }

    /// Every case scored against `x`, sorted by similarity descending and
    /// then by case id ascending.
    pub fn rank(&self, x: &FeatureVector) -> Result<Vec<(usize, f64)>> {
        let mut scored = self
            .cases
            .iter()
            .enumerate()
            .map(|(i, c)| case_similarity(x, &c.features, &self.weights).map(|s| (i, s)))
            .collect::<Result<Vec<_>>>()?;
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.cases[a.0].id.cmp(&self.cases[b.0].id))
        });
        Ok(scored)
    }

    /// Similarity-weighted mean cost of the `k` most similar cases.
    pub fn retrieve_and_predict(&self, x: &FeatureVector, k: usize) -> Result<(f64, RetrievalResult)> {
        if k == 0 || k > self.cases.len() {
            return Err(Error::KTooLarge {
                k,
                available: self.cases.len(),
            });
        }
        let ranked = self.rank(x)?;
        let top = &ranked[..k];
        let weight: f64 = top.iter().map(|(_, s)| s).sum();
        let cost = if weight > 0.0 {
            top.iter().map(|&(i, s)| s * self.cases[i].cost_le).sum::<f64>() / weight
        } else {
            top.iter().map(|&(i, _)| self.cases[i].cost_le).sum::<f64>() / k as f64
        };
        let (best, cs) = top[0];
        let best_case = self.cases[best].clone();
        let per_attribute = attribute_similarities(x, &best_case.features)?;
        Ok((
            cost,
            RetrievalResult {
                best_case,
                case_similarity: cs,
                per_attribute,
                neighbours: top.to_vec(),
            },
        ))
    }
}
