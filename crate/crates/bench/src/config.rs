//! Benchmark configuration, read from TOML. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use costlab_core::cart::TreeParams;
use costlab_core::data::{SplitSize, SplitSpec, N_FEATURES};
use costlab_core::fuzzy::RuleBase;
use costlab_core::neural::Activation;
use costlab_core::{Error, ModelKind, ModelSpec, Result, TargetTransform};
use serde::Deserialize;

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "COSTLAB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Markdown,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Markdown => "md",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Synthesize,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub source: Source,
    /// CSV file for `source = "csv"`; relative to the config file.
    pub path: Option<PathBuf>,
    pub n: usize,
    pub noise_pct: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            source: Source::Synthesize,
            path: None,
            n: 144,
            noise_pct: 5.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fraction: Option<f64>,
    pub train: Option<usize>,
    pub test: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    /// Sample size used in adjusted R² instead of the test-set size.
    pub n_override: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelsConfig {
    /// Model ids to run; all twenty when absent.
    pub enabled: Option<Vec<String>>,
}

/// Per-model hyperparameter overrides. Keys that do not apply to the model
/// family are rejected when the spec is built.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOverrides {
    pub target_transform: Option<String>,
    // trees
    pub max_depth: Option<usize>,
    pub min_samples_leaf: Option<usize>,
    pub min_samples_split: Option<usize>,
    // ensembles
    pub n_members: Option<usize>,
    pub n_rounds: Option<usize>,
    pub learning_rate: Option<f64>,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub subsample: Option<f64>,
    // networks
    pub hidden: Option<Vec<usize>>,
    pub activation: Option<String>,
    pub epochs: Option<usize>,
    pub momentum: Option<f64>,
    // svr
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
    pub gamma_rbf: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    // genetic fuzzy
    pub population_size: Option<usize>,
    pub generations: Option<usize>,
    pub crossover_prob: Option<f64>,
    pub mutation_prob: Option<f64>,
    pub elitism_count: Option<usize>,
    pub tournament_size: Option<usize>,
    // cbr
    pub k: Option<usize>,
    pub weights: Option<Vec<f64>>,
    // fuzzy
    pub rule_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub models: ModelsConfig,
    /// `[model.<id>]` tables.
    #[serde(default)]
    pub model: BTreeMap<String, ModelOverrides>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: BenchConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string().trim().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = BenchConfig::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let kinds = self.enabled_models()?;
        if kinds.is_empty() {
            return Err(Error::InvalidConfig("no models enabled".into()));
        }
        for id in self.model.keys() {
            id.parse::<ModelKind>()?;
        }
        if self.data.source == Source::Csv && self.data.path.is_none() {
            return Err(Error::InvalidConfig("data.source = \"csv\" requires data.path".into()));
        }
        if !(self.data.noise_pct >= 0.0) {
            return Err(Error::InvalidConfig(format!("noise_pct must be >= 0, got {}", self.data.noise_pct)));
        }
        let s = &self.split;
        if s.train_fraction.is_some() && (s.train.is_some() || s.test.is_some()) {
            return Err(Error::InvalidConfig("give either split.train_fraction or split.train/test, not both".into()));
        }
        if s.train.is_some() != s.test.is_some() {
            return Err(Error::InvalidConfig("split.train and split.test go together".into()));
        }
        Ok(())
    }

    pub fn enabled_models(&self) -> Result<Vec<ModelKind>> {
        match &self.models.enabled {
            None => Ok(ModelKind::lineup().to_vec()),
            Some(ids) => {
                let mut out: Vec<ModelKind> = Vec::new();
                for id in ids {
                    let k: ModelKind = id.parse()?;
                    if out.contains(&k) {
                        return Err(Error::InvalidConfig(format!("model `{id}` enabled twice")));
                    }
                    out.push(k);
                }
                Ok(out)
            }
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn split_spec(&self, seed: u64) -> SplitSpec {
        let size = match (self.split.train_fraction, self.split.train, self.split.test) {
            (Some(f), _, _) => SplitSize::TrainFraction(f),
            (None, Some(train), Some(test)) => SplitSize::Counts { train, test },
            _ => return SplitSpec::new(seed),
        };
        SplitSpec { size, seed }
    }

    /// Model spec with this config's overrides applied.
    pub fn model_spec(&self, kind: ModelKind) -> Result<ModelSpec> {
        let mut spec = ModelSpec::new(kind);
        if let Some(o) = self.model.get(kind.id()) {
            apply_overrides(&mut spec, o, self)?;
        }
        Ok(spec)
    }
}

/// `--seed` beats the config file, which beats `COSTLAB_SEED`, which beats
/// the default.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>, env: Option<&str>) -> Result<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match env {
        Some(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        _ => Ok(DEFAULT_SEED),
    }
}

fn apply_overrides(spec: &mut ModelSpec, o: &ModelOverrides, cfg: &BenchConfig) -> Result<()> {
    use ModelKind::*;
    let kind = spec.kind;
    macro_rules! set {
        ($field:ident, $applies:expr, |$v:ident| $body:expr) => {
            if let Some($v) = o.$field.clone() {
                if !$applies {
                    return Err(Error::InvalidConfig(format!(
                        "key `{}` does not apply to model `{}`",
                        stringify!($field),
                        kind.id()
                    )));
                }
                $body;
            }
        };
    }
    let tree_kind = matches!(kind, DecisionTree | Bagging | RandomForest | ExtraTrees | AdaBoost);
    let boost_kind = matches!(kind, Xgboost | Sgb | GradientBoosting);
    let bag_kind = matches!(kind, Bagging | RandomForest | ExtraTrees);
    let net_kind = matches!(kind, QuadraticMlp | PlainMlp | LnMlp | Dnn);
    let linear_kind = matches!(
        kind,
        QuadraticRegression | PlainRegression | SemilogRegression | ReciprocalRegression | Power2Regression | Eq6Reference
    );

    set!(target_transform, !linear_kind, |v| spec.target_transform = v.parse::<TargetTransform>()?);
    let tree: &mut TreeParams = match kind {
        Bagging | RandomForest | ExtraTrees => &mut spec.bagging.tree,
        AdaBoost => &mut spec.adaboost.tree,
        _ => &mut spec.tree,
    };
    set!(max_depth, tree_kind || boost_kind, |v| {
        tree.max_depth = Some(v);
        spec.boost.max_depth = Some(v);
    });
    set!(min_samples_leaf, tree_kind || boost_kind, |v| {
        tree.min_samples_leaf = v;
        spec.boost.min_samples_leaf = v;
    });
    set!(min_samples_split, tree_kind, |v| tree.min_samples_split = v);
    set!(n_members, bag_kind || kind == AdaBoost, |v| {
        spec.bagging.n_members = v;
        spec.adaboost.n_members = v;
    });
    set!(n_rounds, boost_kind, |v| spec.boost.n_rounds = v);
    set!(learning_rate, boost_kind || net_kind, |v| {
        spec.boost.learning_rate = v;
        spec.network.learning_rate = v;
    });
    set!(lambda, kind == Xgboost, |v| spec.boost.lambda = v);
    set!(gamma, kind == Xgboost, |v| spec.boost.gamma = v);
    set!(subsample, boost_kind, |v| spec.boost.subsample = v);
    set!(hidden, net_kind, |v| spec.network.hidden = v);
    set!(activation, net_kind, |v| {
        spec.network.activation = match v.as_str() {
            "tanh" => Activation::Tanh,
            "relu" => Activation::Relu,
            other => return Err(Error::InvalidConfig(format!("unknown activation `{other}`"))),
        }
    });
    set!(epochs, net_kind, |v| spec.network.epochs = v);
    set!(momentum, net_kind, |v| spec.network.momentum = v);
    set!(c, kind == Svr, |v| spec.svr.c = v);
    set!(epsilon, kind == Svr, |v| spec.svr.epsilon = v);
    set!(gamma_rbf, kind == Svr, |v| spec.svr.gamma = v);
    set!(tol, kind == Svr, |v| spec.svr.tol = v);
    set!(max_iter, kind == Svr, |v| spec.svr.max_iter = v);
    set!(population_size, kind == GeneticFuzzy, |v| spec.ga.population_size = v);
    set!(generations, kind == GeneticFuzzy, |v| spec.ga.generations = v);
    set!(crossover_prob, kind == GeneticFuzzy, |v| spec.ga.crossover_prob = v);
    set!(mutation_prob, kind == GeneticFuzzy, |v| spec.ga.mutation_prob = v);
    set!(elitism_count, kind == GeneticFuzzy, |v| spec.ga.elitism_count = v);
    set!(tournament_size, kind == GeneticFuzzy, |v| spec.ga.tournament_size = v);
    set!(k, kind == Cbr, |v| spec.cbr_k = v);
    set!(weights, kind == Cbr, |v| {
        spec.cbr_weights = <[f64; N_FEATURES]>::try_from(v.as_slice())
            .map_err(|_| Error::InvalidConfig(format!("weights needs {N_FEATURES} values, got {}", v.len())))?
    });
    set!(rule_file, kind == Fuzzy, |v| spec.rule_base = Some(RuleBase::load(cfg.resolve(&v))?));
    Ok(())
}
