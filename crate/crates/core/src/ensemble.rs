//! Tree ensembles over CART base learners.
//!
//! - bagging, random forest and extra trees combine by mean;
//! - AdaBoost.R2 combines by weighted median;
//! - gradient boosting (plain and stochastic) and the regularized
//!   second-order booster are additive: base score plus shrunken tree sums.
//!
//! Only the regularized booster learns default directions for missing
//! values; every other family rejects incomplete rows.

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::cart::{complete_rows, grow_on, Node, Randomization, RegressionTree, TreeParams};
use crate::data::{FeatureVector, N_FEATURES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleFamily {
    Bagging,
    RandomForest,
    ExtraTrees,
    AdaBoostR2,
    GradientBoosting,
    RegularizedBoosting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    Mean,
    WeightedMedian,
    /// base score + learning rate × Σ member outputs
    Additive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub family: EnsembleFamily,
    pub members: Vec<(RegressionTree, f64)>,
    pub combine: Combine,
    pub base_score: f64,
    pub learning_rate: f64,
}

impl EnsembleModel {
    pub fn member_predictions(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        self.members.iter().map(|(t, _)| t.predict(x)).collect()
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<f64> {
        if x.has_missing() && self.family != EnsembleFamily::RegularizedBoosting {
            return Err(Error::UnsupportedMissing);
        }
        let preds = self.member_predictions(x)?;
        Ok(match self.combine {
            Combine::Mean => preds.iter().sum::<f64>() / preds.len() as f64,
            Combine::WeightedMedian => {
                let pairs: Vec<(f64, f64)> = preds
                    .iter()
                    .zip(&self.members)
                    .map(|(&p, (_, w))| (p, *w))
                    .collect();
                weighted_median(&pairs)
            }
            Combine::Additive => self.base_score + self.learning_rate * preds.iter().sum::<f64>(),
        })
    }
}

/// Smallest prediction whose cumulative weight reaches half the total.
pub fn weighted_median(pairs: &[(f64, f64)]) -> f64 {
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = sorted.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for &(p, w) in &sorted {
        acc += w;
        if acc >= 0.5 * total {
            return p;
        }
    }
    sorted.last().map(|p| p.0).unwrap_or(f64::NAN)
}

/// `n` indices drawn uniformly with replacement from `0..n`.
pub fn bootstrap_sample<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

/// Rows never drawn into `sample`.
pub fn out_of_bag(n: usize, sample: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; n];
    for &i in sample {
        seen[i] = true;
    }
    (0..n).filter(|&i| !seen[i]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaggingConfig {
    pub n_members: usize,
    pub tree: TreeParams,
    pub seed: u64,
}

impl Default for BaggingConfig {
    fn default() -> Self {
        BaggingConfig {
            n_members: 100,
            tree: TreeParams::fully_grown(),
            seed: 0,
        }
    }
}

/// Features tried per split by random forests and extra trees: ⌈√4⌉ = 2.
pub const SUBSPACE_FEATURES: usize = 2;

fn fit_mean_ensemble(
    x: &[FeatureVector],
    y: &[f64],
    cfg: &BaggingConfig,
    family: EnsembleFamily,
    bootstrap: bool,
    random: Randomization,
) -> Result<EnsembleModel> {
    if x.is_empty() {
        return Err(Error::EmptyTrain);
    }
    let rows = complete_rows(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let all: Vec<usize> = (0..rows.len()).collect();
    let mut members = Vec::with_capacity(cfg.n_members);
    for _ in 0..cfg.n_members.max(1) {
        let sample = if bootstrap {
            bootstrap_sample(rows.len(), &mut rng)
        } else {
            all.clone()
        };
        members.push((grow_on(&rows, y, &sample, &cfg.tree, random, &mut rng)?, 1.0));
    }
    Ok(EnsembleModel {
        family,
        members,
        combine: Combine::Mean,
        base_score: 0.0,
        learning_rate: 1.0,
    })
}

pub fn fit_bagging(x: &[FeatureVector], y: &[f64], cfg: &BaggingConfig) -> Result<EnsembleModel> {
    fit_mean_ensemble(x, y, cfg, EnsembleFamily::Bagging, true, Randomization::default())
}

pub fn fit_random_forest(x: &[FeatureVector], y: &[f64], cfg: &BaggingConfig) -> Result<EnsembleModel> {
    let random = Randomization {
        max_features: Some(SUBSPACE_FEATURES),
        random_thresholds: false,
    };
    fit_mean_ensemble(x, y, cfg, EnsembleFamily::RandomForest, true, random)
}

pub fn fit_extra_trees(x: &[FeatureVector], y: &[f64], cfg: &BaggingConfig) -> Result<EnsembleModel> {
    let random = Randomization {
        max_features: Some(SUBSPACE_FEATURES),
        random_thresholds: true,
    };
    fit_mean_ensemble(x, y, cfg, EnsembleFamily::ExtraTrees, false, random)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaBoostConfig {
    pub n_members: usize,
    pub tree: TreeParams,
    pub seed: u64,
}

impl Default for AdaBoostConfig {
    fn default() -> Self {
        AdaBoostConfig {
            n_members: 100,
            tree: TreeParams {
                max_depth: Some(4),
                min_samples_leaf: 1,
                min_samples_split: 2,
            },
            seed: 0,
        }
    }
}

/// AdaBoost.R2 with the linear loss.
///
/// Each round grows a tree on a weight-proportional resample, scores every
/// row by |error| / max |error|, and stops once the weighted mean loss
/// reaches 0.5. A round that fits every row exactly ends training.
pub fn fit_adaboost_r2(x: &[FeatureVector], y: &[f64], cfg: &AdaBoostConfig) -> Result<EnsembleModel> {
    if x.is_empty() {
        return Err(Error::EmptyTrain);
    }
    let rows = complete_rows(x)?;
    let n = rows.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut weights = vec![1.0 / n as f64; n];
    let mut members: Vec<(RegressionTree, f64)> = Vec::new();
    for _ in 0..cfg.n_members.max(1) {
        let dist = WeightedIndex::new(&weights).map_err(|e| Error::NonConvergence(e.to_string()))?;
        let sample: Vec<usize> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        let tree = grow_on(&rows, y, &sample, &cfg.tree, Randomization::default(), &mut rng)?;
        let errors: Vec<f64> = rows
            .iter()
            .zip(y)
            .map(|(r, t)| (tree.predict_values(r) - t).abs())
            .collect();
        let max_err = errors.iter().cloned().fold(0.0, f64::max);
        if max_err == 0.0 {
            members.push((tree, 1.0));
            break;
        }
        let losses: Vec<f64> = errors.iter().map(|e| e / max_err).collect();
        let avg: f64 = losses.iter().zip(&weights).map(|(l, w)| l * w).sum();
        if avg >= 0.5 {
            if members.is_empty() {
                members.push((tree, 1.0));
            }
            break;
        }
        let beta = avg / (1.0 - avg);
        for (w, l) in weights.iter_mut().zip(&losses) {
            *w *= beta.powf(1.0 - l);
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        members.push((tree, (1.0 / beta).ln()));
    }
    Ok(EnsembleModel {
        family: EnsembleFamily::AdaBoostR2,
        members,
        combine: Combine::WeightedMedian,
        base_score: 0.0,
        learning_rate: 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostConfig {
    pub n_rounds: usize,
    pub learning_rate: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Penalty per leaf.
    pub gamma: f64,
    /// Fraction of rows drawn without replacement each round.
    pub subsample: f64,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            n_rounds: 100,
            learning_rate: 0.1,
            lambda: 1.0,
            gamma: 0.0,
            subsample: 1.0,
            max_depth: Some(3),
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

impl BoostConfig {
    /// Stochastic gradient boosting defaults: 80% row subsampling.
    pub fn stochastic() -> Self {
        BoostConfig {
            subsample: 0.8,
            ..BoostConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.learning_rate >= 0.0 && self.learning_rate <= 1.0) {
            return bad(format!("learning_rate {} not in [0, 1]", self.learning_rate));
        }
        if !(self.lambda >= 0.0) || !(self.gamma >= 0.0) {
            return bad("lambda and gamma must be >= 0".into());
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad(format!("subsample {} not in (0, 1]", self.subsample));
        }
        Ok(())
    }

    fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf.max(1),
            min_samples_split: 2 * self.min_samples_leaf.max(1),
        }
    }
}

fn round_sample<R: Rng>(n: usize, fraction: f64, rng: &mut R) -> Vec<usize> {
    if fraction >= 1.0 {
        return (0..n).collect();
    }
    let k = ((n as f64 * fraction).round() as usize).clamp(1, n);
    let mut idx = rand::seq::index::sample(rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}

/// Squared-loss gradient boosting. `subsample < 1` gives the stochastic
/// variant.
pub fn fit_gradient_boosting(x: &[FeatureVector], y: &[f64], cfg: &BoostConfig) -> Result<EnsembleModel> {
    if x.is_empty() {
        return Err(Error::EmptyTrain);
    }
    cfg.validate()?;
    let rows = complete_rows(x)?;
    let n = rows.len();
    let base = y.iter().sum::<f64>() / n as f64;
    let mut fitted = vec![base; n];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let params = cfg.tree_params();
    let mut members = Vec::with_capacity(cfg.n_rounds);
    for _ in 0..cfg.n_rounds {
        let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(t, f)| t - f).collect();
        let sample = round_sample(n, cfg.subsample, &mut rng);
        let tree = grow_on(&rows, &residuals, &sample, &params, Randomization::default(), &mut rng)?;
        for (f, r) in fitted.iter_mut().zip(&rows) {
            *f += cfg.learning_rate * tree.predict_values(r);
        }
        members.push((tree, 1.0));
    }
    Ok(EnsembleModel {
        family: EnsembleFamily::GradientBoosting,
        members,
        combine: Combine::Additive,
        base_score: base,
        learning_rate: cfg.learning_rate,
    })
}

/// Split score ½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ.
pub fn regularized_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, gamma: f64) -> f64 {
    let score = |g: f64, h: f64| if h + lambda > 0.0 { g * g / (h + lambda) } else { 0.0 };
    0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr)) - gamma
}

/// Optimal leaf weight −G/(H+λ).
pub fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    if h + lambda > 0.0 {
        -g / (h + lambda)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SecondOrderSplit {
    feature: usize,
    threshold: f64,
    default_left: bool,
    gain: f64,
}

fn second_order_split(
    x: &[FeatureVector],
    g: &[f64],
    h: &[f64],
    rows: &[usize],
    cfg: &BoostConfig,
) -> Option<SecondOrderSplit> {
    let min_leaf = cfg.min_samples_leaf.max(1);
    let g_total: f64 = rows.iter().map(|&r| g[r]).sum();
    let h_total: f64 = rows.iter().map(|&r| h[r]).sum();
    let tol = 1e-12 * rows.iter().map(|&r| g[r] * g[r]).sum::<f64>();
    let mut best: Option<SecondOrderSplit> = None;
    for f in 0..N_FEATURES {
        let mut present: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
        let (mut gm, mut hm, mut nm) = (0.0, 0.0, 0usize);
        for &r in rows {
            match x[r].get(f) {
                Some(v) => present.push((v, r)),
                None => {
                    gm += g[r];
                    hm += h[r];
                    nm += 1;
                }
            }
        }
        present.sort_by(|a, b| a.0.total_cmp(&b.0));
        let np = present.len();
        let (mut gl, mut hl) = (0.0, 0.0);
        for i in 0..np.saturating_sub(1) {
            gl += g[present[i].1];
            hl += h[present[i].1];
            let (lo, hi) = (present[i].0, present[i + 1].0);
            if lo == hi {
                continue;
            }
            let left_n = i + 1;
            // Missing rows tried on each side; left is preferred on ties.
            for default_left in [true, false] {
                let (gl2, hl2, ln) = if default_left {
                    (gl + gm, hl + hm, left_n + nm)
                } else {
                    (gl, hl, left_n)
                };
                let rn = rows.len() - ln;
                if ln < min_leaf || rn < min_leaf {
                    continue;
                }
                let gain = regularized_gain(gl2, hl2, g_total - gl2, h_total - hl2, cfg.lambda, cfg.gamma);
                let better = match best {
                    None => gain > tol,
                    Some(b) => gain > b.gain + tol,
                };
                if better {
                    best = Some(SecondOrderSplit {
                        feature: f,
                        threshold: lo + (hi - lo) / 2.0,
                        default_left,
                        gain,
                    });
                }
            }
        }
    }
    best
}

/// Exact greedy tree on gradients `g` and hessians `h`.
pub fn grow_second_order(
    x: &[FeatureVector],
    g: &[f64],
    h: &[f64],
    sample: &[usize],
    cfg: &BoostConfig,
) -> Result<RegressionTree> {
    if sample.is_empty() {
        return Err(Error::EmptyTrain);
    }
    let mut nodes = vec![Node::Leaf {
        value: 0.0,
        n_samples: 0,
    }];
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, sample.to_vec(), 0)];
    while let Some((slot, rows, depth)) = stack.pop() {
        let gs: f64 = rows.iter().map(|&r| g[r]).sum();
        let hs: f64 = rows.iter().map(|&r| h[r]).sum();
        let can_split = rows.len() >= 2 * cfg.min_samples_leaf.max(1)
            && cfg.max_depth.map_or(true, |d| depth < d);
        let split = if can_split {
            second_order_split(x, g, h, &rows, cfg)
        } else {
            None
        };
        match split {
            None => {
                nodes[slot] = Node::Leaf {
                    value: leaf_weight(gs, hs, cfg.lambda),
                    n_samples: rows.len(),
                }
            }
            Some(s) => {
                let (left, right): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| match x[r].get(s.feature) {
                    Some(v) => v <= s.threshold,
                    None => s.default_left,
                });
                let l = nodes.len();
                nodes.push(Node::Leaf { value: 0.0, n_samples: 0 });
                nodes.push(Node::Leaf { value: 0.0, n_samples: 0 });
                nodes[slot] = Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    default_left: Some(s.default_left),
                    left: l,
                    right: l + 1,
                };
                stack.push((l + 1, right, depth + 1));
                stack.push((l, left, depth + 1));
            }
        }
    }
    Ok(RegressionTree::from_nodes(nodes, true))
}

/// Regularized second-order boosting on squared loss (g = ŷ − y, h = 1).
/// Accepts missing feature values.
pub fn fit_regularized_booster(x: &[FeatureVector], y: &[f64], cfg: &BoostConfig) -> Result<EnsembleModel> {
    if x.is_empty() {
        return Err(Error::EmptyTrain);
    }
    cfg.validate()?;
    let n = x.len();
    let base = y.iter().sum::<f64>() / n as f64;
    let mut fitted = vec![base; n];
    let hess = vec![1.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut members = Vec::with_capacity(cfg.n_rounds);
    for _ in 0..cfg.n_rounds {
        let grad: Vec<f64> = fitted.iter().zip(y).map(|(f, t)| f - t).collect();
        let sample = round_sample(n, cfg.subsample, &mut rng);
        let tree = grow_second_order(x, &grad, &hess, &sample, cfg)?;
        for (f, xi) in fitted.iter_mut().zip(x) {
            *f += cfg.learning_rate * tree.predict(xi)?;
        }
        members.push((tree, 1.0));
    }
    Ok(EnsembleModel {
        family: EnsembleFamily::RegularizedBoosting,
        members,
        combine: Combine::Additive,
        base_score: base,
        learning_rate: cfg.learning_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cart::grow;
    use crate::data::synthesize;

    fn line(n: usize) -> (Vec<FeatureVector>, Vec<f64>) {
        let x: Vec<FeatureVector> = (0..n)
            .map(|i| FeatureVector::new(i as f64, (i * 7 % 5) as f64, 1.0, 2012.0))
            .collect();
        let y: Vec<f64> = (0..n).map(|i| 10.0 + (i as f64).powi(2)).collect();
        (x, y)
    }

    #[test]
    fn weighted_median_example() {
        assert_eq!(weighted_median(&[(10.0, 1.0), (20.0, 3.0)]), 20.0);
        assert_eq!(weighted_median(&[(10.0, 3.0), (20.0, 1.0)]), 10.0);
        assert_eq!(weighted_median(&[(30.0, 1.0), (10.0, 1.0), (20.0, 1.0)]), 20.0);
    }

    #[test]
    fn bootstrap_of_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            assert_eq!(bootstrap_sample(1, &mut rng), vec![0]);
        }
    }

    #[test]
    fn bootstrap_is_seeded() {
        let a = bootstrap_sample(50, &mut ChaCha8Rng::seed_from_u64(1));
        let b = bootstrap_sample(50, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        let oob = out_of_bag(50, &a);
        assert!(oob.iter().all(|i| !a.contains(i)));
    }

    #[test]
    fn single_member_equals_its_tree() {
        let (x, y) = line(20);
        let cfg = BaggingConfig {
            n_members: 1,
            ..BaggingConfig::default()
        };
        let m = fit_bagging(&x, &y, &cfg).unwrap();
        for xi in &x {
            assert_eq!(m.predict(xi).unwrap(), m.members[0].0.predict(xi).unwrap());
        }
    }

    #[test]
    fn constant_target_every_family() {
        let (x, _) = line(15);
        let y = vec![5.0; 15];
        let q = FeatureVector::new(3.3, 1.0, 1.0, 2012.0);
        let cfg = BaggingConfig { n_members: 5, ..Default::default() };
        for m in [
            fit_bagging(&x, &y, &cfg).unwrap(),
            fit_random_forest(&x, &y, &cfg).unwrap(),
            fit_extra_trees(&x, &y, &cfg).unwrap(),
            fit_adaboost_r2(&x, &y, &AdaBoostConfig::default()).unwrap(),
            fit_gradient_boosting(&x, &y, &BoostConfig::default()).unwrap(),
            fit_regularized_booster(&x, &y, &BoostConfig::default()).unwrap(),
        ] {
            assert!((m.predict(&q).unwrap() - 5.0).abs() < 1e-12, "{:?}", m.family);
        }
    }

    #[test]
    fn adaboost_perfect_round_stops() {
        let (x, _) = line(8);
        let y: Vec<f64> = (0..8).map(|i| if i < 4 { 1.0 } else { 2.0 }).collect();
        let m = fit_adaboost_r2(&x, &y, &AdaBoostConfig::default()).unwrap();
        // A depth-4 tree on a weighted resample may miss rows, but when it
        // fits exactly the ensemble stops at one member.
        if m.members.len() == 1 {
            for (xi, yi) in x.iter().zip(&y) {
                assert_eq!(m.predict(xi).unwrap(), *yi);
            }
        }
        let exact = fit_adaboost_r2(&x, &vec![4.0; 8], &AdaBoostConfig::default()).unwrap();
        assert_eq!(exact.members.len(), 1);
    }

    #[test]
    fn gradient_boosting_one_full_round_fits_residuals() {
        let (x, y) = line(12);
        let cfg = BoostConfig {
            n_rounds: 1,
            learning_rate: 1.0,
            max_depth: None,
            ..BoostConfig::default()
        };
        let m = fit_gradient_boosting(&x, &y, &cfg).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((m.predict(xi).unwrap() - yi).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_learning_rate_predicts_mean() {
        let (x, y) = line(12);
        let mean = y.iter().sum::<f64>() / 12.0;
        let cfg = BoostConfig {
            learning_rate: 0.0,
            n_rounds: 5,
            ..BoostConfig::default()
        };
        for m in [
            fit_gradient_boosting(&x, &y, &cfg).unwrap(),
            fit_regularized_booster(&x, &y, &cfg).unwrap(),
        ] {
            for xi in &x {
                assert_eq!(m.predict(xi).unwrap(), mean);
            }
        }
    }

    #[test]
    fn leaf_weight_example() {
        assert_eq!(leaf_weight(6.0, 2.0, 2.0), -1.5);
    }

    #[test]
    fn unregularized_first_tree_matches_cart_on_residuals() {
        let d = synthesize(60, 4, 5.0).unwrap();
        let (x, y) = (d.features(), d.targets());
        let cfg = BoostConfig {
            n_rounds: 1,
            learning_rate: 1.0,
            lambda: 0.0,
            gamma: 0.0,
            max_depth: Some(3),
            min_samples_leaf: 1,
            ..BoostConfig::default()
        };
        let xgb = fit_regularized_booster(&x, &y, &cfg).unwrap();
        let gb = fit_gradient_boosting(&x, &y, &cfg).unwrap();
        let base = xgb.base_score;
        let residuals: Vec<f64> = y.iter().map(|t| t - base).collect();
        let cart = grow(&x, &residuals, &cfg.tree_params()).unwrap();
        for xi in &x {
            let a = xgb.members[0].0.predict(xi).unwrap();
            let b = gb.members[0].0.predict(xi).unwrap();
            let c = cart.predict(xi).unwrap();
            assert!((a - b).abs() < 1e-6 * b.abs().max(1.0));
            assert!((a - c).abs() < 1e-6 * c.abs().max(1.0));
        }
    }

    #[test]
    fn booster_handles_missing_and_others_refuse() {
        let d = synthesize(50, 6, 5.0).unwrap();
        let mut x = d.features();
        let y = d.targets();
        for (i, xi) in x.iter_mut().enumerate() {
            if i % 10 < 3 {
                xi.set_missing(1);
            }
        }
        let m = fit_regularized_booster(&x, &y, &BoostConfig::default()).unwrap();
        let mut q = FeatureVector::new(100.0, 1000.0, 10.0, 2013.0);
        q.set_missing(1);
        assert!(m.predict(&q).unwrap().is_finite());
        let cfg = BaggingConfig { n_members: 3, ..Default::default() };
        assert_eq!(fit_bagging(&x, &y, &cfg).unwrap_err(), Error::UnsupportedMissing);
        assert_eq!(fit_random_forest(&x, &y, &cfg).unwrap_err(), Error::UnsupportedMissing);
        assert_eq!(fit_extra_trees(&x, &y, &cfg).unwrap_err(), Error::UnsupportedMissing);
        assert_eq!(fit_adaboost_r2(&x, &y, &AdaBoostConfig::default()).unwrap_err(), Error::UnsupportedMissing);
        assert_eq!(fit_gradient_boosting(&x, &y, &BoostConfig::default()).unwrap_err(), Error::UnsupportedMissing);
    }

    #[test]
    fn gain_shrinks_with_regularization() {
        let (gl, hl, gr, hr) = (-12.0, 4.0, 9.0, 5.0);
        let mut prev = f64::INFINITY;
        for lambda in [0.0, 0.5, 1.0, 4.0, 20.0] {
            let g = regularized_gain(gl, hl, gr, hr, lambda, 0.0);
            assert!(g <= prev);
            prev = g;
        }
        assert!(regularized_gain(gl, hl, gr, hr, 1.0, 2.0) < regularized_gain(gl, hl, gr, hr, 1.0, 1.0));
    }
}
