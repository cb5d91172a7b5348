//! Mamdani fuzzy inference over seven triangular membership functions per
//! variable.
//!
//! Rules AND their antecedents with `min`, clip the consequent with `min`,
//! aggregate with `max` and defuzzify by centroid. The centroid is a
//! trapezoidal quadrature over [`CENTROID_SAMPLES`] uniform points of the
//! output universe.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::data::{Dataset, FeatureVector, FEATURE_NAMES, N_FEATURES};
use crate::error::{Error, Result};

pub const N_MFS: usize = 7;

/// 1200 intervals, so every default MF peak falls on a sample.
pub const CENTROID_SAMPLES: usize = 1201;

pub const OUTPUT_NAME: &str = "cost_le";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangularMf {
    pub left: f64,
    pub peak: f64,
    pub right: f64,
}

impl TriangularMf {
    pub fn new(left: f64, peak: f64, right: f64) -> Self {
        debug_assert!(left <= peak && peak <= right);
        TriangularMf { left, peak, right }
    }

    pub fn membership(&self, x: f64) -> f64 {
        if x < self.left || x > self.right {
            return 0.0;
        }
        if x == self.peak {
            return 1.0;
        }
        let degree = if x < self.peak {
            (x - self.left) / (self.peak - self.left)
        } else {
            (self.right - x) / (self.right - self.peak)
        };
        degree.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyVariable {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub mfs: [TriangularMf; N_MFS],
}

impl FuzzyVariable {
    /// Seven evenly spaced triangles whose neighbours cross at 0.5; the two
    /// end sets are half-triangles peaking on the universe bounds.
    pub fn uniform(name: impl Into<String>, min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::InvalidRuleBase(format!(
                "universe [{min}, {max}] must be a nonempty finite interval"
            )));
        }
        let step = (max - min) / (N_MFS - 1) as f64;
        let peak = |i: usize| if i == N_MFS - 1 { max } else { min + step * i as f64 };
        let mfs = std::array::from_fn(|i| {
            let left = if i == 0 { min } else { peak(i - 1) };
            let right = if i == N_MFS - 1 { max } else { peak(i + 1) };
            TriangularMf::new(left, peak(i), right)
        });
        Ok(FuzzyVariable {
            name: name.into(),
            min,
            max,
            mfs,
        })
    }

    /// Universe spanning the observed values; a constant column is widened
    /// by one unit on each side.
    fn spanning(name: &str, values: impl Iterator<Item = f64>) -> Result<Self> {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if !lo.is_finite() {
            return Err(Error::EmptyTrain);
        }
        if hi > lo {
            FuzzyVariable::uniform(name, lo, hi)
        } else {
            FuzzyVariable::uniform(name, lo - 1.0, hi + 1.0)
        }
    }

    /// Membership degrees of `x` in MF1..MF7. Inputs outside the universe
    /// are clamped onto it.
    pub fn fuzzify(&self, x: f64) -> [f64; N_MFS] {
        let x = x.clamp(self.min, self.max);
        self.mfs.map(|mf| mf.membership(x))
    }

    /// 1-based index of the MF with the highest degree (lowest index on ties).
    pub fn best_mf(&self, x: f64) -> u8 {
        let degrees = self.fuzzify(x);
        let mut best = 0;
        for i in 1..N_MFS {
            if degrees[i] > degrees[best] {
                best = i;
            }
        }
        best as u8 + 1
    }
}

/// IF P1 is MF[a1] AND .. AND P4 is MF[a4] THEN cost is MF[c]; indices 1..=7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuzzyRule {
    pub antecedent: [u8; N_FEATURES],
    pub consequent: u8,
}

impl FuzzyRule {
    pub fn new(antecedent: [u8; N_FEATURES], consequent: u8) -> Result<Self> {
        let rule = FuzzyRule {
            antecedent,
            consequent,
        };
        if !rule.is_valid() {
            return Err(Error::InvalidRuleBase(format!("MF index out of 1..=7 in {rule}")));
        }
        Ok(rule)
    }

    pub fn is_valid(&self) -> bool {
        self.antecedent
            .iter()
            .chain(std::iter::once(&self.consequent))
            .all(|&g| (1..=N_MFS as u8).contains(&g))
    }
}

impl fmt::Display for FuzzyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.antecedent;
        write!(f, "{a} {b} {c} {d} -> {}", self.consequent)
    }
}

/// Degrees of membership of a single crisp input vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fuzzified([[f64; N_MFS]; N_FEATURES]);

impl Fuzzified {
    /// `min` over the rule's four antecedent degrees.
    pub fn firing_strength(&self, rule: &FuzzyRule) -> f64 {
        rule.antecedent
            .iter()
            .enumerate()
            .map(|(v, &mf)| self.0[v][mf as usize - 1])
            .fold(1.0, f64::min)
    }

    pub fn degree(&self, variable: usize, mf: u8) -> f64 {
        self.0[variable][mf as usize - 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    /// Centroid, or `None` when no rule fired.
    pub crisp: Option<f64>,
    /// (rule index, firing strength) for every rule with strength > 0.
    pub fired: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleBase {
    inputs: [FuzzyVariable; N_FEATURES],
    output: FuzzyVariable,
    rules: Vec<FuzzyRule>,
}

impl RuleBase {
    /// Rejects empty bases, out-of-range indices, duplicates and
    /// conflicting consequents for the same antecedent.
    pub fn new(
        inputs: [FuzzyVariable; N_FEATURES],
        output: FuzzyVariable,
        rules: Vec<FuzzyRule>,
    ) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::InvalidRuleBase("rule base has no rules".into()));
        }
        let mut seen: BTreeMap<[u8; N_FEATURES], u8> = BTreeMap::new();
        for r in &rules {
            if !r.is_valid() {
                return Err(Error::InvalidRuleBase(format!("MF index out of 1..=7 in {r}")));
            }
            if let Some(prev) = seen.insert(r.antecedent, r.consequent) {
                let what = if prev == r.consequent { "duplicate" } else { "conflicting" };
                return Err(Error::InvalidRuleBase(format!("{what} rule {r}")));
            }
        }
        Ok(RuleBase {
            inputs,
            output,
            rules,
        })
    }

    pub fn inputs(&self) -> &[FuzzyVariable; N_FEATURES] {
        &self.inputs
    }

    pub fn output(&self) -> &FuzzyVariable {
        &self.output
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.rules
    }

    /// Same variables, different rules.
    pub fn with_rules(&self, rules: Vec<FuzzyRule>) -> Result<Self> {
        RuleBase::new(self.inputs.clone(), self.output.clone(), rules)
    }

    pub fn fuzzify(&self, x: &FeatureVector) -> Result<Fuzzified> {
        let v = x.complete()?;
        Ok(Fuzzified(std::array::from_fn(|i| self.inputs[i].fuzzify(v[i]))))
    }

    pub fn fire_rule(&self, rule: &FuzzyRule, x: &FeatureVector) -> Result<f64> {
        Ok(self.fuzzify(x)?.firing_strength(rule))
    }

    pub fn infer(&self, x: &FeatureVector) -> Result<Inference> {
        let fz = self.fuzzify(x)?;
        Ok(self.infer_fuzzified(&fz))
    }

    pub fn infer_fuzzified(&self, fz: &Fuzzified) -> Inference {
        let fired: Vec<(usize, f64)> = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| (i, fz.firing_strength(r)))
            .filter(|&(_, s)| s > 0.0)
            .collect();
        let clipped: Vec<(TriangularMf, f64)> = fired
            .iter()
            .map(|&(i, s)| (self.output.mfs[self.rules[i].consequent as usize - 1], s))
            .collect();
        let crisp = centroid(&clipped, self.output.min, self.output.max, CENTROID_SAMPLES);
        Inference { crisp, fired }
    }

    /// Human-readable IF-THEN form of a rule.
    pub fn describe(&self, rule: &FuzzyRule) -> String {
        let parts: Vec<String> = rule
            .antecedent
            .iter()
            .zip(&self.inputs)
            .map(|(mf, v)| format!("{} is MF{mf}", v.name))
            .collect();
        format!(
            "IF {} THEN {} is MF{}",
            parts.join(" AND "),
            self.output.name,
            rule.consequent
        )
    }

    /// One rule per training case, formed from the MFs each value belongs
    /// to most. When cases disagree on the consequent for an antecedent,
    /// the consequent with the largest summed firing strength wins.
    pub fn from_data(train: &Dataset) -> Result<Self> {
        let (inputs, output) = universes_from_data(train)?;
        let rows: Vec<[f64; N_FEATURES]> = train
            .records()
            .iter()
            .map(|r| r.features.complete())
            .collect::<Result<_>>()?;

        let mut votes: BTreeMap<[u8; N_FEATURES], [f64; N_MFS]> = BTreeMap::new();
        for (row, rec) in rows.iter().zip(train.records()) {
            let antecedent: [u8; N_FEATURES] = std::array::from_fn(|i| inputs[i].best_mf(row[i]));
            let strength = antecedent
                .iter()
                .enumerate()
                .map(|(i, &mf)| inputs[i].mfs[mf as usize - 1].membership(row[i].clamp(inputs[i].min, inputs[i].max)))
                .fold(1.0, f64::min);
            let consequent = output.best_mf(rec.cost_le);
            votes.entry(antecedent).or_insert([0.0; N_MFS])[consequent as usize - 1] += strength;
        }
        let rules = votes
            .into_iter()
            .map(|(antecedent, tally)| {
                let mut best = 0;
                for c in 1..N_MFS {
                    if tally[c] > tally[best] {
                        best = c;
                    }
                }
                FuzzyRule {
                    antecedent,
                    consequent: best as u8 + 1,
                }
            })
            .collect();
        RuleBase::new(inputs, output, rules)
    }

    /// Text form: `universe <name> <min> <max>` lines for the four inputs and
    /// the output, then one `a1 a2 a3 a4 -> c` line per rule.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# costlab fuzzy rule base\n");
        for v in self.inputs.iter().chain(std::iter::once(&self.output)) {
            out.push_str(&format!("universe {} {} {}\n", v.name, v.min, v.max));
        }
        for r in &self.rules {
            out.push_str(&format!("{r}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            row: line,
            column: String::new(),
            message: msg,
        };
        let mut universes: Vec<FuzzyVariable> = Vec::new();
        let mut rules = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens[0] == "universe" {
                if !rules.is_empty() {
                    return Err(err(line_no, "universe declared after rules".into()));
                }
                if tokens.len() != 4 {
                    return Err(err(line_no, format!("expected `universe <name> <min> <max>`, got `{line}`")));
                }
                let num = |s: &str| s.parse::<f64>().map_err(|e| err(line_no, format!("`{s}`: {e}")));
                universes.push(FuzzyVariable::uniform(tokens[1], num(tokens[2])?, num(tokens[3])?)?);
                continue;
            }
            if tokens.len() != 6 || tokens[4] != "->" {
                return Err(err(line_no, format!("expected `a1 a2 a3 a4 -> c`, got `{line}`")));
            }
            let idx = |s: &str| {
                s.parse::<u8>()
                    .ok()
                    .filter(|v| (1..=N_MFS as u8).contains(v))
                    .ok_or_else(|| err(line_no, format!("MF index `{s}` not in 1..=7")))
            };
            rules.push(FuzzyRule {
                antecedent: [idx(tokens[0])?, idx(tokens[1])?, idx(tokens[2])?, idx(tokens[3])?],
                consequent: idx(tokens[5])?,
            });
        }
        if universes.len() != N_FEATURES + 1 {
            return Err(Error::InvalidRuleBase(format!(
                "expected {} universe lines, found {}",
                N_FEATURES + 1,
                universes.len()
            )));
        }
        let output = universes.pop().expect("length checked");
        let inputs: [FuzzyVariable; N_FEATURES] = universes.try_into().expect("length checked");
        RuleBase::new(inputs, output, rules)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        RuleBase::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Input and output variables whose universes span the training data.
pub fn universes_from_data(train: &Dataset) -> Result<([FuzzyVariable; N_FEATURES], FuzzyVariable)> {
    if train.is_empty() {
        return Err(Error::EmptyTrain);
    }
    let rows: Vec<[f64; N_FEATURES]> = train
        .records()
        .iter()
        .map(|r| r.features.complete())
        .collect::<Result<_>>()?;
    let inputs: [FuzzyVariable; N_FEATURES] = (0..N_FEATURES)
        .map(|i| FuzzyVariable::spanning(FEATURE_NAMES[i], rows.iter().map(|r| r[i])))
        .collect::<Result<Vec<_>>>()?
        .try_into()
        .expect("one variable per feature");
    let output = FuzzyVariable::spanning(OUTPUT_NAME, train.records().iter().map(|r| r.cost_le))?;
    Ok((inputs, output))
}

/// Centroid of max-aggregated, min-clipped triangles on `samples` uniform
/// points of [lo, hi]. `None` when the aggregated shape has no area.
pub fn centroid(clipped: &[(TriangularMf, f64)], lo: f64, hi: f64, samples: usize) -> Option<f64> {
    if clipped.is_empty() || samples < 2 {
        return None;
    }
    let step = (hi - lo) / (samples - 1) as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..samples {
        let y = if k == samples - 1 { hi } else { lo + step * k as f64 };
        let mu = clipped
            .iter()
            .map(|(mf, s)| mf.membership(y).min(*s))
            .fold(0.0, f64::max);
        let w = if k == 0 || k == samples - 1 { 0.5 } else { 1.0 };
        num += w * y * mu;
        den += w * mu;
    }
    (den > 0.0).then(|| num / den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyPrediction {
    pub value: f64,
    /// Set when no rule fired and the fallback cost was returned.
    pub degraded: bool,
    pub fired: Vec<(usize, f64)>,
}

/// A rule base plus the fallback cost used when no rule fires.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyModel {
    pub rule_base: RuleBase,
    pub fallback: f64,
}

impl FuzzyModel {
    pub fn new(rule_base: RuleBase, train: &Dataset) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyTrain);
        }
        Ok(FuzzyModel {
            rule_base,
            fallback: train.mean_cost(),
        })
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<FuzzyPrediction> {
        let inf = self.rule_base.infer(x)?;
        Ok(self.resolve(inf))
    }

    pub fn resolve(&self, inf: Inference) -> FuzzyPrediction {
        match inf.crisp {
            Some(value) => FuzzyPrediction {
                value,
                degraded: false,
                fired: inf.fired,
            },
            None => FuzzyPrediction {
                value: self.fallback,
                degraded: true,
                fired: inf.fired,
            },
        }
    }
}
