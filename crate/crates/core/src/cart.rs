//! CART regression trees with sum-of-squared-error (variance) reduction
//! splits. Used directly as the decision tree model and as the base learner
//! of every ensemble.

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::data::{FeatureVector, FEATURE_NAMES, N_FEATURES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    /// `None` grows until the other stopping rules apply.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: Some(6),
            min_samples_leaf: 2,
            min_samples_split: 4,
        }
    }
}

impl TreeParams {
    pub fn fully_grown() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            min_samples_split: 2,
        }
    }

    pub fn with_max_depth(self, max_depth: Option<usize>) -> Self {
        TreeParams { max_depth, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Leaf {
        value: f64,
        n_samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Branch taken by a missing value; `None` when the tree cannot
        /// route missing values.
        default_left: Option<bool>,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    allows_missing: bool,
}

impl RegressionTree {
    /// Node 0 is the root. Child indices must point inside `nodes`.
    pub fn from_nodes(nodes: Vec<Node>, allows_missing: bool) -> Self {
        debug_assert!(!nodes.is_empty());
        RegressionTree {
            nodes,
            allows_missing,
        }
    }

    pub fn leaf(value: f64, n_samples: usize) -> Self {
        RegressionTree::from_nodes(vec![Node::Leaf { value, n_samples }], false)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn allows_missing(&self) -> bool {
        self.allows_missing
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<f64> {
        if !self.allows_missing && x.has_missing() {
            return Err(Error::UnsupportedMissing);
        }
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value, .. } => return Ok(value),
                Node::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                } => {
                    let go_left = match x.get(feature) {
                        Some(v) => v <= threshold,
                        None => default_left.ok_or(Error::UnsupportedMissing)?,
                    };
                    at = if go_left { left } else { right };
                }
            }
        }
    }

    /// Prediction for a row already known to be complete.
    pub(crate) fn predict_values(&self, x: &[f64; N_FEATURES]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value, .. } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// (value, n_samples) for every leaf.
    pub fn leaves(&self) -> Vec<(f64, usize)> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Leaf { value, n_samples } => Some((value, n_samples)),
                Node::Split { .. } => None,
            })
            .collect()
    }

    /// Indented IF/ELSE listing of the tree.
    pub fn dump(&self) -> String {
        fn walk(nodes: &[Node], at: usize, indent: usize, out: &mut String) {
            let pad = "  ".repeat(indent);
            match nodes[at] {
                Node::Leaf { value, n_samples } => {
                    let _ = writeln!(out, "{pad}cost = {value:.3} (n = {n_samples})");
                }
                Node::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                } => {
                    let missing = match default_left {
                        Some(true) => " [missing: left]",
                        Some(false) => " [missing: right]",
                        None => "",
                    };
                    let name = FEATURE_NAMES[feature];
                    let _ = writeln!(out, "{pad}if {name} <= {threshold}{missing}:");
                    walk(nodes, left, indent + 1, out);
                    let _ = writeln!(out, "{pad}else:");
                    walk(nodes, right, indent + 1, out);
                }
            }
        }
        let mut out = String::new();
        walk(&self.nodes, 0, 0, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

fn sse_of(y: &[f64], rows: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let mean = rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64;
    rows.iter().map(|&r| (y[r] - mean).powi(2)).sum()
}

/// Relative slack below which two gains are considered equal.
const GAIN_TOL: f64 = 1e-12;

/// Best SSE-reducing split of `rows` over `features`.
///
/// Candidate thresholds are midpoints between consecutive distinct values.
/// Ties go to the lowest feature index, then the lowest threshold. Returns
/// `None` when no candidate leaves `min_samples_leaf` rows on both sides
/// with a positive gain.
pub fn best_split(
    x: &[[f64; N_FEATURES]],
    y: &[f64],
    rows: &[usize],
    features: &[usize],
    min_samples_leaf: usize,
) -> Option<Split> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let min_leaf = min_samples_leaf.max(1);
    let mean = rows.iter().map(|&r| y[r]).sum::<f64>() / n as f64;
    let parent_sse: f64 = rows.iter().map(|&r| (y[r] - mean).powi(2)).sum();
    let tol = GAIN_TOL * parent_sse;

    let mut best: Option<Split> = None;
    let mut order: Vec<usize> = rows.to_vec();
    let mut feats = features.to_vec();
    feats.sort_unstable();
    for &f in &feats {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]));
        // Sums of centred targets on the left side.
        let total: f64 = order.iter().map(|&r| y[r] - mean).sum();
        let total_sq: f64 = order.iter().map(|&r| (y[r] - mean).powi(2)).sum();
        let (mut s, mut sq) = (0.0, 0.0);
        for i in 0..n - 1 {
            let d = y[order[i]] - mean;
            s += d;
            sq += d * d;
            let left_n = i + 1;
            let right_n = n - left_n;
            let (lo, hi) = (x[order[i]][f], x[order[i + 1]][f]);
            if lo == hi || left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let left_sse = sq - s * s / left_n as f64;
            let rs = total - s;
            let right_sse = (total_sq - sq) - rs * rs / right_n as f64;
            let gain = parent_sse - left_sse - right_sse;
            let better = match best {
                None => gain > tol,
                Some(b) => gain > b.gain + tol,
            };
            if better {
                best = Some(Split {
                    feature: f,
                    threshold: lo + (hi - lo) / 2.0,
                    gain,
                });
            }
        }
    }
    best
}

/// One uniformly random threshold per candidate feature; the best of those
/// by SSE reduction wins.
fn random_split<R: Rng>(
    x: &[[f64; N_FEATURES]],
    y: &[f64],
    rows: &[usize],
    features: &[usize],
    min_samples_leaf: usize,
    rng: &mut R,
) -> Option<Split> {
    let parent_sse = sse_of(y, rows);
    let tol = GAIN_TOL * parent_sse;
    let mut best: Option<Split> = None;
    let mut feats = features.to_vec();
    feats.sort_unstable();
    for &f in &feats {
        let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
            (lo.min(x[r][f]), hi.max(x[r][f]))
        });
        if !(hi > lo) {
            continue;
        }
        let threshold = rng.gen_range(lo..hi);
        let (left, right): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| x[r][f] <= threshold);
        if left.len() < min_samples_leaf.max(1) || right.len() < min_samples_leaf.max(1) {
            continue;
        }
        let gain = parent_sse - sse_of(y, &left) - sse_of(y, &right);
        let better = match best {
            None => gain > tol,
            Some(b) => gain > b.gain + tol,
        };
        if better {
            best = Some(Split {
                feature: f,
                threshold,
                gain,
            });
        }
    }
    best
}

/// Randomisation applied while growing ensemble members.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Randomization {
    /// Size of the random feature subset drawn at every node.
    pub max_features: Option<usize>,
    /// Draw one random cut-point per feature instead of scanning midpoints.
    pub random_thresholds: bool,
}

pub(crate) fn complete_rows(x: &[FeatureVector]) -> Result<Vec<[f64; N_FEATURES]>> {
    x.iter().map(FeatureVector::complete).collect()
}

/// Grows a deterministic CART tree.
pub fn grow(x: &[FeatureVector], y: &[f64], params: &TreeParams) -> Result<RegressionTree> {
    let rows = complete_rows(x)?;
    let idx: Vec<usize> = (0..rows.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    grow_on(&rows, y, &idx, params, Randomization::default(), &mut rng)
}

/// Grows a tree on the multiset `sample` of row indices.
pub fn grow_on<R: Rng>(
    x: &[[f64; N_FEATURES]],
    y: &[f64],
    sample: &[usize],
    params: &TreeParams,
    random: Randomization,
    rng: &mut R,
) -> Result<RegressionTree> {
    if sample.is_empty() {
        return Err(Error::EmptyTrain);
    }
    let all_features: Vec<usize> = (0..N_FEATURES).collect();
    let mut nodes: Vec<Node> = Vec::new();
    // (node slot, rows, depth)
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, sample.to_vec(), 0)];
    nodes.push(Node::Leaf {
        value: 0.0,
        n_samples: 0,
    });
    while let Some((slot, rows, depth)) = stack.pop() {
        let n = rows.len();
        let value = rows.iter().map(|&r| y[r]).sum::<f64>() / n as f64;
        let can_split = n >= params.min_samples_split.max(2)
            && params.max_depth.map_or(true, |d| depth < d);
        let split = if can_split {
            let features = match random.max_features {
                Some(k) if k < N_FEATURES => {
                    rand::seq::index::sample(rng, N_FEATURES, k.max(1)).into_vec()
                }
                _ => all_features.clone(),
            };
            if random.random_thresholds {
                random_split(x, y, &rows, &features, params.min_samples_leaf, rng)
            } else {
                best_split(x, y, &rows, &features, params.min_samples_leaf)
            }
        } else {
            None
        };
        match split {
            None => nodes[slot] = Node::Leaf { value, n_samples: n },
            Some(s) => {
                let (left, right): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&r| x[r][s.feature] <= s.threshold);
                let l = nodes.len();
                nodes.push(Node::Leaf { value: 0.0, n_samples: 0 });
                nodes.push(Node::Leaf { value: 0.0, n_samples: 0 });
                nodes[slot] = Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    default_left: None,
                    left: l,
                    right: l + 1,
                };
                stack.push((l + 1, right, depth + 1));
                stack.push((l, left, depth + 1));
            }
        }
    }
    Ok(RegressionTree::from_nodes(nodes, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(v: f64) -> FeatureVector {
        FeatureVector::new(v, 0.0, 0.0, 2012.0)
    }

    #[test]
    fn step_split_example() {
        let x = [[1.0, 0.0, 0.0, 0.0], [2.0, 0.0, 0.0, 0.0], [3.0, 0.0, 0.0, 0.0], [4.0, 0.0, 0.0, 0.0]];
        let y = [0.0, 0.0, 10.0, 10.0];
        let s = best_split(&x, &y, &[0, 1, 2, 3], &[0], 1).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 2.5);
        assert!((s.gain - 100.0).abs() < 1e-12);
    }

    #[test]
    fn constant_target_has_no_split() {
        let x = [[1.0, 5.0, 0.0, 0.0], [2.0, 6.0, 0.0, 0.0], [3.0, 7.0, 0.0, 0.0]];
        assert_eq!(best_split(&x, &[4.0; 3], &[0, 1, 2], &[0, 1], 1), None);
    }

    #[test]
    fn min_samples_leaf_blocks_splits() {
        let x = [[1.0, 0.0, 0.0, 0.0], [2.0, 0.0, 0.0, 0.0], [3.0, 0.0, 0.0, 0.0]];
        let y = [0.0, 0.0, 10.0];
        assert_eq!(best_split(&x, &y, &[0, 1, 2], &[0], 2), None);
    }

    #[test]
    fn constant_target_grows_single_leaf() {
        let x: Vec<FeatureVector> = (0..10).map(|i| fv(i as f64)).collect();
        let t = grow(&x, &[7.0; 10], &TreeParams::default()).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict(&fv(123.0)).unwrap(), 7.0);
    }

    #[test]
    fn depth_zero_is_mean_leaf() {
        let x: Vec<FeatureVector> = (0..4).map(|i| fv(i as f64)).collect();
        let params = TreeParams::default().with_max_depth(Some(0));
        let t = grow(&x, &[1.0, 2.0, 3.0, 6.0], &params).unwrap();
        assert_eq!(t.leaves(), vec![(3.0, 4)]);
    }

    #[test]
    fn step_function_gives_two_leaves() {
        let x: Vec<FeatureVector> = (0..12).map(|i| fv(i as f64)).collect();
        let y: Vec<f64> = (0..12).map(|i| if i < 5 { 3.0 } else { 8.0 }).collect();
        let t = grow(&x, &y, &TreeParams::default()).unwrap();
        assert_eq!(t.nodes().len(), 3);
        match t.nodes()[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 4.5);
            }
            _ => panic!("root should split"),
        }
        assert_eq!(t.leaves(), vec![(3.0, 5), (8.0, 7)]);
    }

    #[test]
    fn threshold_ties_go_left() {
        let x: Vec<FeatureVector> = (0..12).map(|i| fv(i as f64)).collect();
        let y: Vec<f64> = (0..12).map(|i| if i < 5 { 3.0 } else { 8.0 }).collect();
        let t = grow(&x, &y, &TreeParams::default()).unwrap();
        let tree = RegressionTree::from_nodes(
            vec![
                Node::Split { feature: 0, threshold: 4.0, default_left: None, left: 1, right: 2 },
                Node::Leaf { value: 1.0, n_samples: 1 },
                Node::Leaf { value: 2.0, n_samples: 1 },
            ],
            false,
        );
        assert_eq!(tree.predict(&fv(4.0)).unwrap(), 1.0);
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(t.predict(xi).unwrap(), *yi);
        }
    }

    #[test]
    fn missing_rejected_without_default_direction() {
        let t = RegressionTree::leaf(5.0, 3);
        let mut q = fv(1.0);
        q.set_missing(0);
        assert_eq!(t.predict(&q).unwrap_err(), Error::UnsupportedMissing);
        assert_eq!(grow(&[q], &[1.0], &TreeParams::default()).unwrap_err(), Error::UnsupportedMissing);
    }

    #[test]
    fn dump_lists_rules() {
        let x: Vec<FeatureVector> = (0..12).map(|i| fv(i as f64)).collect();
        let y: Vec<f64> = (0..12).map(|i| if i < 5 { 3.0 } else { 8.0 }).collect();
        let text = grow(&x, &y, &TreeParams::default()).unwrap().dump();
        assert!(text.starts_with("if area_served <= 4.5:\n"), "{text}");
        assert!(text.contains("cost = 8.000 (n = 7)"));
    }
}
