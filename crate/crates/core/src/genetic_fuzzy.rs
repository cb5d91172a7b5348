//! Michigan-style genetic algorithm over fuzzy rules: every chromosome is one
//! rule and the whole population, after pruning, is the rule base.
//!
//! The population is scored collectively by training MAPE. Tournament
//! selection and elitism rank individual rules by a local score, the MAPE of
//! the rule acting alone on the training cases it fires on.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, N_FEATURES};
use crate::error::{Error, Result};
use crate::fuzzy::{centroid, universes_from_data, Fuzzified, FuzzyModel, FuzzyRule, FuzzyVariable, RuleBase, CENTROID_SAMPLES, N_MFS};
use crate::metrics::mape;

pub const N_GENES: usize = N_FEATURES + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chromosome {
    pub genes: [u8; N_GENES],
}

impl Chromosome {
    pub fn new(genes: [u8; N_GENES]) -> Result<Self> {
        let c = Chromosome { genes };
        c.to_rule()?;
        Ok(c)
    }

    pub fn random<R: Rng>(rng: &mut R) -> Self {
        Chromosome {
            genes: std::array::from_fn(|_| rng.gen_range(1..=N_MFS as u8)),
        }
    }

    pub fn to_rule(&self) -> Result<FuzzyRule> {
        let g = self.genes;
        FuzzyRule::new([g[0], g[1], g[2], g[3]], g[4])
    }

    pub fn antecedent(&self) -> [u8; N_FEATURES] {
        std::array::from_fn(|i| self.genes[i])
    }
}

impl From<FuzzyRule> for Chromosome {
    fn from(r: FuzzyRule) -> Self {
        let a = r.antecedent;
        Chromosome {
            genes: [a[0], a[1], a[2], a[3], r.consequent],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub elitism_count: usize,
    pub tournament_size: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 63,
            generations: 200,
            crossover_prob: 0.7,
            mutation_prob: 0.01,
            elitism_count: 2,
            tournament_size: 3,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.population_size < 2 {
            return bad(format!("population_size must be at least 2, got {}", self.population_size));
        }
        for (name, p) in [("crossover_prob", self.crossover_prob), ("mutation_prob", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.elitism_count < 1 || self.elitism_count > self.population_size {
            return bad(format!(
                "elitism_count must lie in 1..={}, got {}",
                self.population_size, self.elitism_count
            ));
        }
        if self.tournament_size < 1 {
            return bad("tournament_size must be at least 1".into());
        }
        Ok(())
    }
}

/// Single-point crossover after gene `cut` (1..=4).
pub fn crossover_at(a: &Chromosome, b: &Chromosome, cut: usize) -> (Chromosome, Chromosome) {
    assert!((1..N_GENES).contains(&cut), "cut must lie in 1..={}", N_GENES - 1);
    let mut x = *a;
    let mut y = *b;
    x.genes[cut..].copy_from_slice(&b.genes[cut..]);
    y.genes[cut..].copy_from_slice(&a.genes[cut..]);
    (x, y)
}

/// With probability `prob`, splices at a uniform cut in 1..=4; otherwise
/// returns the parents.
pub fn crossover<R: Rng>(a: &Chromosome, b: &Chromosome, prob: f64, rng: &mut R) -> (Chromosome, Chromosome) {
    if rng.gen_bool(prob) {
        crossover_at(a, b, rng.gen_range(1..N_GENES))
    } else {
        (*a, *b)
    }
}

/// Each gene is redrawn uniformly from 1..=7 with probability `prob`.
pub fn mutate<R: Rng>(c: &Chromosome, prob: f64, rng: &mut R) -> Chromosome {
    let mut out = *c;
    for g in out.genes.iter_mut() {
        if rng.gen_bool(prob) {
            *g = rng.gen_range(1..=N_MFS as u8);
        }
    }
    out
}

/// Training data fuzzified once against fixed universes.
#[derive(Debug, Clone)]
pub struct GaContext {
    inputs: [FuzzyVariable; N_FEATURES],
    output: FuzzyVariable,
    cases: Vec<Fuzzified>,
    targets: Vec<f64>,
    fallback: f64,
    local: HashMap<Chromosome, f64>,
}

impl GaContext {
    pub fn new(train: &Dataset) -> Result<Self> {
        let (inputs, output) = universes_from_data(train)?;
        // Any valid rule base over these universes fuzzifies identically.
        let probe = RuleBase::new(
            inputs.clone(),
            output.clone(),
            vec![FuzzyRule::new([1; N_FEATURES], 1)?],
        )?;
        let cases = train
            .records()
            .iter()
            .map(|r| probe.fuzzify(&r.features))
            .collect::<Result<_>>()?;
        Ok(GaContext {
            inputs,
            output,
            cases,
            targets: train.targets(),
            fallback: train.mean_cost(),
            local: HashMap::new(),
        })
    }

    /// Random rule that fires on a randomly chosen training case, with a
    /// uniform consequent.
    pub fn covering<R: Rng>(&self, rng: &mut R) -> Chromosome {
        let fz = &self.cases[rng.gen_range(0..self.cases.len())];
        let mut genes = [0u8; N_GENES];
        for (v, g) in genes.iter_mut().take(N_FEATURES).enumerate() {
            let active: Vec<u8> = (1..=N_MFS as u8).filter(|&m| fz.degree(v, m) > 0.0).collect();
            *g = active[rng.gen_range(0..active.len())];
        }
        genes[N_FEATURES] = rng.gen_range(1..=N_MFS as u8);
        Chromosome { genes }
    }

    /// MAPE of the rule acting alone on the cases it fires on; infinite if it
    /// fires on none.
    pub fn local_score(&mut self, c: &Chromosome) -> f64 {
        if let Some(&v) = self.local.get(c) {
            return v;
        }
        let rule = c.to_rule().expect("chromosome genes are valid");
        let mf = self.output.mfs[rule.consequent as usize - 1];
        let mut total = 0.0;
        let mut count = 0usize;
        for (fz, &y) in self.cases.iter().zip(&self.targets) {
            let s = fz.firing_strength(&rule);
            if s > 0.0 {
                let pred = centroid(&[(mf, s)], self.output.min, self.output.max, CENTROID_SAMPLES)
                    .unwrap_or(self.fallback);
                total += ((y - pred) / y).abs();
                count += 1;
            }
        }
        let v = if count == 0 {
            f64::INFINITY
        } else {
            100.0 * total / count as f64
        };
        self.local.insert(*c, v);
        v
    }

    /// Rule base of a population: duplicates dropped, and for each
    /// antecedent only the consequent with the best local score kept (lowest
    /// consequent on ties). Rules come out sorted by antecedent.
    pub fn decode(&mut self, population: &[Chromosome]) -> Result<RuleBase> {
        let mut chosen: BTreeMap<[u8; N_FEATURES], (f64, u8)> = BTreeMap::new();
        for c in population {
            let score = self.local_score(c);
            let cand = (score, c.genes[N_FEATURES]);
            chosen
                .entry(c.antecedent())
                .and_modify(|cur| {
                    if cand.0 < cur.0 || (cand.0 == cur.0 && cand.1 < cur.1) {
                        *cur = cand;
                    }
                })
                .or_insert(cand);
        }
        let rules = chosen
            .into_iter()
            .map(|(a, (_, c))| FuzzyRule::new(a, c))
            .collect::<Result<Vec<_>>>()?;
        RuleBase::new(self.inputs.clone(), self.output.clone(), rules)
    }

    /// Training MAPE of a rule base; cases that fire nothing get the
    /// training mean.
    pub fn rule_base_mape(&self, rb: &RuleBase) -> Result<f64> {
        let preds: Vec<f64> = self
            .cases
            .iter()
            .map(|fz| rb.infer_fuzzified(fz).crisp.unwrap_or(self.fallback))
            .collect();
        mape(&self.targets, &preds)
    }

    /// Absolute relative error of the rule base on each listed case.
    fn case_errors(&self, rb: &RuleBase, cases: impl Iterator<Item = usize>) -> Vec<f64> {
        cases
            .map(|i| {
                let pred = rb.infer_fuzzified(&self.cases[i]).crisp.unwrap_or(self.fallback);
                ((self.targets[i] - pred) / self.targets[i]).abs()
            })
            .collect()
    }

    /// Cases on which any of the given rules fires.
    fn firing_cases(&self, rules: &[Chromosome]) -> Vec<usize> {
        let rules: Vec<FuzzyRule> = rules.iter().map(|c| c.to_rule().expect("valid genes")).collect();
        (0..self.cases.len())
            .filter(|&i| rules.iter().any(|r| self.cases[i].firing_strength(r) > 0.0))
            .collect()
    }

    pub fn fitness(&mut self, population: &[Chromosome]) -> Result<f64> {
        let rb = self.decode(population)?;
        self.rule_base_mape(&rb)
    }
}

/// Collective fitness of `population` on `train`.
pub fn fitness(population: &[Chromosome], train: &Dataset) -> Result<f64> {
    GaContext::new(train)?.fitness(population)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub rule_base: RuleBase,
    pub best_population: Vec<Chromosome>,
    /// Best-so-far training MAPE; entry 0 is the initial population.
    pub history: Vec<f64>,
}

impl Evolution {
    pub fn best_fitness(&self) -> f64 {
        *self.history.last().expect("history holds the initial population")
    }

    pub fn model(&self, train: &Dataset) -> Result<FuzzyModel> {
        FuzzyModel::new(self.rule_base.clone(), train)
    }
}

fn tournament<R: Rng>(scores: &[f64], size: usize, rng: &mut R) -> usize {
    let mut best = rng.gen_range(0..scores.len());
    for _ in 1..size {
        let c = rng.gen_range(0..scores.len());
        if scores[c] < scores[best] || (scores[c] == scores[best] && c < best) {
            best = c;
        }
    }
    best
}

/// Each generation breeds `population_size − elitism_count` offspring from
/// tournament-selected parents. An offspring replaces the loser of a
/// reverse tournament among the non-elite rules, and the replacement is kept
/// only if the collective training MAPE does not rise.
pub fn evolve(cfg: &GaConfig, train: &Dataset) -> Result<Evolution> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyTrain);
    }
    let mut ctx = GaContext::new(train)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut population: Vec<Chromosome> = (0..cfg.population_size).map(|_| ctx.covering(&mut rng)).collect();

    let mut best_population = population.clone();
    let mut best_rb = ctx.decode(&population)?;
    let mut errors = ctx.case_errors(&best_rb, 0..ctx.cases.len());
    let mut best_fit = ctx.rule_base_mape(&best_rb)?;
    let mut history = Vec::with_capacity(cfg.generations + 1);
    history.push(best_fit);

    let p = cfg.population_size;
    for _ in 0..cfg.generations {
        let mut copies: HashMap<[u8; N_FEATURES], usize> = HashMap::new();
        for c in &population {
            *copies.entry(c.antecedent()).or_default() += 1;
        }
        // Rules sharing an antecedent share credit.
        let scores: Vec<f64> = population
            .iter()
            .map(|c| ctx.local_score(c) * copies[&c.antecedent()] as f64)
            .collect();
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
        let replaceable = &order[cfg.elitism_count..];

        let mut offspring = Vec::with_capacity(p - cfg.elitism_count);
        while offspring.len() < p - cfg.elitism_count {
            let a = population[tournament(&scores, cfg.tournament_size, &mut rng)];
            let b = population[tournament(&scores, cfg.tournament_size, &mut rng)];
            let (x, y) = crossover(&a, &b, cfg.crossover_prob, &mut rng);
            offspring.push(mutate(&x, cfg.mutation_prob, &mut rng));
            offspring.push(mutate(&y, cfg.mutation_prob, &mut rng));
        }
        offspring.truncate(p - cfg.elitism_count);

        for child in offspring {
            let mut target = replaceable[rng.gen_range(0..replaceable.len())];
            for _ in 1..cfg.tournament_size {
                let c = replaceable[rng.gen_range(0..replaceable.len())];
                if scores[c] > scores[target] {
                    target = c;
                }
            }
            let old = population[target];
            if old == child {
                continue;
            }
            population[target] = child;
            let rb = ctx.decode(&population)?;
            let affected = ctx.firing_cases(&[old, child]);
            let fresh = ctx.case_errors(&rb, affected.iter().copied());
            let before: f64 = affected.iter().map(|&i| errors[i]).sum();
            let after: f64 = fresh.iter().sum();
            if after <= before {
                for (&i, e) in affected.iter().zip(fresh) {
                    errors[i] = e;
                }
            } else {
                population[target] = old;
            }
        }

        let rb = ctx.decode(&population)?;
        let fit = ctx.rule_base_mape(&rb)?;
        if fit < best_fit {
            best_fit = fit;
            best_rb = rb;
            best_population = population.clone();
        }
        history.push(best_fit);
    }
    Ok(Evolution {
        rule_base: best_rb,
        best_population,
        history,
    })
}

/// `generation,best_mape` rows, generation 0 being the initial population.
pub fn write_history<W: Write>(history: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "generation,best_mape")?;
    for (g, v) in history.iter().enumerate() {
        writeln!(w, "{g},{v:.6}")?;
    }
    Ok(())
}

pub fn save_history(history: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_history(history, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}
