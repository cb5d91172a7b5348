//! Uniform fit/predict contract over every model family, and the evaluation
//! report that feeds the leaderboard.

use std::fmt;
use std::str::FromStr;

use crate::cart::{grow, RegressionTree, TreeParams};
use crate::cbr::{CaseBase, RetrievalResult};
use crate::data::{Dataset, FeatureVector, N_FEATURES};
use crate::ensemble::{
    fit_adaboost_r2, fit_bagging, fit_extra_trees, fit_gradient_boosting, fit_random_forest, fit_regularized_booster,
    AdaBoostConfig, BaggingConfig, BoostConfig, EnsembleModel,
};
use crate::error::{Error, Result};
use crate::fuzzy::{FuzzyModel, FuzzyPrediction, RuleBase};
use crate::genetic_fuzzy::{evolve, GaConfig};
use crate::metrics::{adjusted_r_squared, categorize, mape, r_squared, MapeCategory};
use crate::neural::{self, NetworkSpec, NeuralModel};
use crate::regression::{fit_ols, LinearModel, LinearTransform};
use crate::svr::{fit_svr, SvrConfig, SvrModel};

/// Predictor count used in adjusted R².
pub const K_PREDICTORS: usize = N_FEATURES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TargetTransform {
    #[default]
    None,
    Sqrt,
    Ln,
}

impl TargetTransform {
    pub fn name(&self) -> &'static str {
        match self {
            TargetTransform::None => "none",
            TargetTransform::Sqrt => "sqrt",
            TargetTransform::Ln => "natural_log",
        }
    }

    pub fn forward(&self, y: f64) -> Result<f64> {
        match self {
            TargetTransform::None => Ok(y),
            TargetTransform::Sqrt if y > 0.0 => Ok(y.sqrt()),
            TargetTransform::Ln if y > 0.0 => Ok(y.ln()),
            _ => Err(Error::TransformDomain {
                transform: self.name(),
                value: y,
            }),
        }
    }

    pub fn inverse(&self, z: f64) -> Result<f64> {
        let out = match self {
            TargetTransform::None => z,
            TargetTransform::Sqrt => {
                if z < 0.0 {
                    return Err(Error::NegativeSqrtDomain(z));
                }
                z * z
            }
            TargetTransform::Ln => z.exp(),
        };
        finite(out)
    }
}

impl FromStr for TargetTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(TargetTransform::None),
            "sqrt" => Ok(TargetTransform::Sqrt),
            "natural_log" | "ln" => Ok(TargetTransform::Ln),
            _ => Err(Error::InvalidConfig(format!("unknown target transform `{s}`"))),
        }
    }
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonConvergence(format!("prediction {v} is not finite")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Xgboost,
    QuadraticRegression,
    PlainRegression,
    QuadraticMlp,
    PlainMlp,
    SemilogRegression,
    ExtraTrees,
    LnMlp,
    Bagging,
    RandomForest,
    AdaBoost,
    Sgb,
    ReciprocalRegression,
    Power2Regression,
    Dnn,
    DecisionTree,
    GeneticFuzzy,
    Cbr,
    Svr,
    Fuzzy,
    Eq6Reference,
    GradientBoosting,
}

impl ModelKind {
    pub const ALL: [ModelKind; 22] = [
        ModelKind::Xgboost,
        ModelKind::QuadraticRegression,
        ModelKind::PlainRegression,
        ModelKind::QuadraticMlp,
        ModelKind::PlainMlp,
        ModelKind::SemilogRegression,
        ModelKind::ExtraTrees,
        ModelKind::LnMlp,
        ModelKind::Bagging,
        ModelKind::RandomForest,
        ModelKind::AdaBoost,
        ModelKind::Sgb,
        ModelKind::ReciprocalRegression,
        ModelKind::Power2Regression,
        ModelKind::Dnn,
        ModelKind::DecisionTree,
        ModelKind::GeneticFuzzy,
        ModelKind::Cbr,
        ModelKind::Svr,
        ModelKind::Fuzzy,
        ModelKind::Eq6Reference,
        ModelKind::GradientBoosting,
    ];

    /// The twenty families of the published comparison.
    pub fn lineup() -> &'static [ModelKind] {
        &Self::ALL[..20]
    }

    pub fn id(&self) -> &'static str {
        match self {
            ModelKind::Xgboost => "xgboost",
            ModelKind::QuadraticRegression => "quadratic-regression",
            ModelKind::PlainRegression => "plain-regression",
            ModelKind::QuadraticMlp => "quadratic-mlp",
            ModelKind::PlainMlp => "plain-mlp",
            ModelKind::SemilogRegression => "semilog-regression",
            ModelKind::ExtraTrees => "extra-trees",
            ModelKind::LnMlp => "ln-mlp",
            ModelKind::Bagging => "bagging",
            ModelKind::RandomForest => "random-forest",
            ModelKind::AdaBoost => "adaboost",
            ModelKind::Sgb => "sgb",
            ModelKind::ReciprocalRegression => "reciprocal-regression",
            ModelKind::Power2Regression => "power2-regression",
            ModelKind::Dnn => "dnn",
            ModelKind::DecisionTree => "decision-tree",
            ModelKind::GeneticFuzzy => "genetic-fuzzy",
            ModelKind::Cbr => "cbr",
            ModelKind::Svr => "svr",
            ModelKind::Fuzzy => "fuzzy",
            ModelKind::Eq6Reference => "eq6-reference",
            ModelKind::GradientBoosting => "gradient-boosting",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            ModelKind::Xgboost => "XGBoost",
            ModelKind::QuadraticRegression => "Quadratic regression",
            ModelKind::PlainRegression => "Plain regression",
            ModelKind::QuadraticMlp => "Quadratic MLP",
            ModelKind::PlainMlp => "Plain MLP",
            ModelKind::SemilogRegression => "Semilog regression",
            ModelKind::ExtraTrees => "Extra Trees",
            ModelKind::LnMlp => "Natural log MLP",
            ModelKind::Bagging => "Bagging",
            ModelKind::RandomForest => "RF",
            ModelKind::AdaBoost => "AdaBoost",
            ModelKind::Sgb => "SGB",
            ModelKind::ReciprocalRegression => "Reciprocal regression",
            ModelKind::Power2Regression => "Power (2) regression",
            ModelKind::Dnn => "DNNs",
            ModelKind::DecisionTree => "DT",
            ModelKind::GeneticFuzzy => "Genetic-Fuzzy",
            ModelKind::Cbr => "CBR",
            ModelKind::Svr => "SVM",
            ModelKind::Fuzzy => "Fuzzy",
            ModelKind::Eq6Reference => "Reference quadratic model",
            ModelKind::GradientBoosting => "Gradient boosting",
        }
    }

    pub fn family(&self) -> &'static str {
        use ModelKind::*;
        match self {
            Xgboost | ExtraTrees | Bagging | RandomForest | AdaBoost | Sgb | GradientBoosting => "Ensemble methods",
            QuadraticRegression | PlainRegression | SemilogRegression | ReciprocalRegression | Power2Regression
            | Eq6Reference => "MRA",
            QuadraticMlp | PlainMlp | LnMlp | Dnn => "ANNs",
            DecisionTree => "Tree model",
            GeneticFuzzy => "Hybrid model",
            Cbr => "Case based",
            Svr => "Kernel based",
            Fuzzy => "Fuzzy theory",
        }
    }

    /// Only the regularized booster routes missing feature values.
    pub fn supports_missing(&self) -> bool {
        *self == ModelKind::Xgboost
    }

    fn linear_transform(&self) -> Option<LinearTransform> {
        match self {
            ModelKind::QuadraticRegression => Some(LinearTransform::QuadraticSqrt),
            ModelKind::PlainRegression => Some(LinearTransform::Plain),
            ModelKind::SemilogRegression => Some(LinearTransform::Semilog),
            ModelKind::ReciprocalRegression => Some(LinearTransform::Reciprocal),
            ModelKind::Power2Regression => Some(LinearTransform::Power2),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .iter()
            .copied()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown model `{s}`")))
    }
}

/// Hyperparameters for one model. Only the block matching `kind` is used;
/// seeds inside the blocks are replaced by the seed passed to `fit`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Applied around families without a built-in transform; the MLP
    /// variants hand it to the network.
    pub target_transform: TargetTransform,
    pub tree: TreeParams,
    pub bagging: BaggingConfig,
    pub adaboost: AdaBoostConfig,
    pub boost: BoostConfig,
    pub network: NetworkSpec,
    pub svr: SvrConfig,
    pub ga: GaConfig,
    pub cbr_k: usize,
    pub cbr_weights: [f64; N_FEATURES],
    /// Rule base for the fuzzy model; learned from the training data when absent.
    pub rule_base: Option<RuleBase>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        let target_transform = match kind {
            ModelKind::QuadraticMlp => TargetTransform::Sqrt,
            ModelKind::LnMlp => TargetTransform::Ln,
            _ => TargetTransform::None,
        };
        ModelSpec {
            kind,
            target_transform,
            tree: TreeParams::default(),
            bagging: BaggingConfig::default(),
            adaboost: AdaBoostConfig::default(),
            boost: if kind == ModelKind::Sgb {
                BoostConfig::stochastic()
            } else {
                BoostConfig::default()
            },
            network: if kind == ModelKind::Dnn {
                NetworkSpec::dnn()
            } else {
                NetworkSpec::mlp()
            },
            svr: SvrConfig::default(),
            ga: GaConfig::default(),
            cbr_k: 1,
            cbr_weights: [1.0; N_FEATURES],
            rule_base: None,
        }
    }
}

/// Per-family fitted parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Fitted {
    Linear(LinearModel),
    Tree(RegressionTree),
    Ensemble(EnsembleModel),
    Neural(NeuralModel),
    Svr(SvrModel),
    Cbr { base: CaseBase, k: usize },
    Fuzzy(FuzzyModel),
    GeneticFuzzy { model: FuzzyModel, history: Vec<f64> },
}

/// Extra context behind a single prediction.
#[derive(Debug, Clone, PartialEq)]
pub enum Trace {
    None,
    Cbr(RetrievalResult),
    Fuzzy(FuzzyPrediction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    spec: ModelSpec,
    fitted: Option<Fitted>,
}

impl Predictor {
    pub fn new(spec: ModelSpec) -> Self {
        Predictor { spec, fitted: None }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn fitted(&self) -> Option<&Fitted> {
        self.fitted.as_ref()
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted.is_some()
    }

    /// Transform wrapped around the family, if any.
    fn outer_transform(&self) -> TargetTransform {
        use ModelKind::*;
        match self.spec.kind {
            QuadraticMlp | PlainMlp | LnMlp | Dnn => TargetTransform::None,
            k if k.linear_transform().is_some() || k == Eq6Reference => TargetTransform::None,
            _ => self.spec.target_transform,
        }
    }

    pub fn fit(self, train: &Dataset, seed: u64) -> Result<Predictor> {
        if train.is_empty() {
            return Err(Error::EmptyTrain);
        }
        let kind = self.spec.kind;
        if train.has_missing() && !kind.supports_missing() {
            return Err(Error::UnsupportedMissing);
        }
        let x = train.features();
        let outer = self.outer_transform();
        let y: Vec<f64> = train
            .targets()
            .iter()
            .map(|&v| outer.forward(v))
            .collect::<Result<_>>()?;
        let s = &self.spec;
        use ModelKind::*;
        let fitted = match kind {
            Eq6Reference => Fitted::Linear(LinearModel::eq6_reference()),
            QuadraticRegression | PlainRegression | SemilogRegression | ReciprocalRegression | Power2Regression => {
                Fitted::Linear(fit_ols(&x, &y, kind.linear_transform().expect("linear kind"))?)
            }
            DecisionTree => Fitted::Tree(grow(&x, &y, &s.tree)?),
            Bagging => Fitted::Ensemble(fit_bagging(&x, &y, &BaggingConfig { seed, ..s.bagging })?),
            RandomForest => Fitted::Ensemble(fit_random_forest(&x, &y, &BaggingConfig { seed, ..s.bagging })?),
            ExtraTrees => Fitted::Ensemble(fit_extra_trees(&x, &y, &BaggingConfig { seed, ..s.bagging })?),
            AdaBoost => Fitted::Ensemble(fit_adaboost_r2(&x, &y, &AdaBoostConfig { seed, ..s.adaboost })?),
            Sgb | GradientBoosting => {
                Fitted::Ensemble(fit_gradient_boosting(&x, &y, &BoostConfig { seed, ..s.boost })?)
            }
            Xgboost => Fitted::Ensemble(fit_regularized_booster(&x, &y, &BoostConfig { seed, ..s.boost })?),
            QuadraticMlp | PlainMlp | LnMlp | Dnn => {
                let spec = NetworkSpec {
                    seed,
                    target_transform: s.target_transform,
                    ..s.network.clone()
                };
                Fitted::Neural(neural::train(&spec, &x, &y)?)
            }
            Svr => Fitted::Svr(fit_svr(&x, &y, &s.svr)?),
            Cbr | Fuzzy | GeneticFuzzy => {
                let inner = transformed(train, &y)?;
                match kind {
                    Cbr => {
                        let base = CaseBase::from_dataset(&inner, s.cbr_weights)?;
                        if s.cbr_k == 0 || s.cbr_k > base.cases().len() {
                            return Err(Error::KTooLarge {
                                k: s.cbr_k,
                                available: base.cases().len(),
                            });
                        }
                        Fitted::Cbr { base, k: s.cbr_k }
                    }
                    Fuzzy => {
                        let rb = match &s.rule_base {
                            Some(rb) => rb.clone(),
                            None => RuleBase::from_data(&inner)?,
                        };
                        Fitted::Fuzzy(FuzzyModel::new(rb, &inner)?)
                    }
                    _ => {
                        let evo = evolve(&GaConfig { seed, ..s.ga }, &inner)?;
                        Fitted::GeneticFuzzy {
                            model: evo.model(&inner)?,
                            history: evo.history,
                        }
                    }
                }
            }
        };
        Ok(Predictor {
            spec: self.spec,
            fitted: Some(fitted),
        })
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<f64> {
        self.predict_traced(x).map(|(v, _)| v)
    }

    /// Prediction plus the CBR retrieval or fuzzy firing context.
    pub fn predict_traced(&self, x: &FeatureVector) -> Result<(f64, Trace)> {
        let fitted = self.fitted.as_ref().ok_or(Error::Unfitted)?;
        if x.has_missing() && !self.spec.kind.supports_missing() {
            return Err(Error::UnsupportedMissing);
        }
        let (inner, trace) = match fitted {
            Fitted::Linear(m) => (m.predict(x)?, Trace::None),
            Fitted::Tree(t) => (t.predict(x)?, Trace::None),
            Fitted::Ensemble(e) => (e.predict(x)?, Trace::None),
            Fitted::Neural(n) => (n.predict(x)?, Trace::None),
            Fitted::Svr(m) => (m.predict(x)?, Trace::None),
            Fitted::Cbr { base, k } => {
                let (v, r) = base.retrieve_and_predict(x, *k)?;
                (v, Trace::Cbr(r))
            }
            Fitted::Fuzzy(m) | Fitted::GeneticFuzzy { model: m, .. } => {
                let p = m.predict(x)?;
                (p.value, Trace::Fuzzy(p))
            }
        };
        let v = self.outer_transform().inverse(finite(inner)?)?;
        Ok((v, trace))
    }

    pub fn predict_all(&self, d: &Dataset) -> Result<Vec<f64>> {
        d.records().iter().map(|r| self.predict(&r.features)).collect()
    }
}

/// Copy of `d` whose costs are replaced by `y`.
fn transformed(d: &Dataset, y: &[f64]) -> Result<Dataset> {
    let records = d
        .records()
        .iter()
        .zip(y)
        .map(|(r, &v)| {
            let mut r = r.clone();
            r.cost_le = v;
            r
        })
        .collect();
    Dataset::new(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub model_id: String,
    pub mape_pct: f64,
    pub mape_category: MapeCategory,
    pub r2: f64,
    pub adj_r2: f64,
    /// Sample size used for adjusted R².
    pub n: usize,
}

/// Metrics for precomputed predictions. `n_override` replaces the sample
/// size in adjusted R².
pub fn report_from_predictions(
    model_id: &str,
    actual: &[f64],
    predicted: &[f64],
    n_override: Option<usize>,
) -> Result<EvalReport> {
    if actual.is_empty() {
        return Err(Error::EmptyTest);
    }
    if let Some(row) = actual.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::NonpositiveTarget { row: row + 1 });
    }
    let mape_pct = mape(actual, predicted)?;
    let r2 = r_squared(actual, predicted)?;
    let n = n_override.unwrap_or(actual.len());
    Ok(EvalReport {
        model_id: model_id.to_string(),
        mape_pct,
        mape_category: categorize(mape_pct)?,
        r2,
        adj_r2: adjusted_r_squared(r2, K_PREDICTORS, n)?,
        n,
    })
}

pub fn evaluate(p: &Predictor, test: &Dataset) -> Result<EvalReport> {
    evaluate_with(p, test, None)
}

pub fn evaluate_with(p: &Predictor, test: &Dataset, n_override: Option<usize>) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyTest);
    }
    let predicted = p.predict_all(test)?;
    report_from_predictions(p.kind().id(), &test.targets(), &predicted, n_override)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthesize, ProjectRecord};

    fn constant_set(n: usize, cost: f64) -> Dataset {
        let recs = (0..n)
            .map(|i| ProjectRecord {
                id: format!("c{i}"),
                features: FeatureVector::new(10.0 + i as f64, 100.0 + 3.0 * i as f64, 5.0, 2012.0),
                cost_le: cost,
            })
            .collect();
        Dataset::new(recs).unwrap()
    }

    #[test]
    fn ids_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.id().parse::<ModelKind>().unwrap(), k);
        }
        assert_eq!(ModelKind::lineup().len(), 20);
        assert!("nope".parse::<ModelKind>().is_err());
    }

    #[test]
    fn constant_target_cart_is_single_leaf() {
        let d = constant_set(12, 4200.0);
        let p = Predictor::new(ModelSpec::new(ModelKind::DecisionTree)).fit(&d, 1).unwrap();
        match p.fitted().unwrap() {
            Fitted::Tree(t) => assert_eq!(t.nodes().len(), 1),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(p.predict(&FeatureVector::new(1.0, 1.0, 1.0, 2010.0)).unwrap(), 4200.0);
    }

    #[test]
    fn unfitted_rejects_predict() {
        let p = Predictor::new(ModelSpec::new(ModelKind::Cbr));
        assert_eq!(p.predict(&FeatureVector::new(1.0, 1.0, 1.0, 2010.0)).unwrap_err(), Error::Unfitted);
    }

    #[test]
    fn transform_inverses() {
        let v = TargetTransform::Sqrt.inverse(809.662).unwrap();
        assert!((v - 655_552.6).abs() <= 0.5);
        assert_eq!(TargetTransform::Ln.inverse(0.0).unwrap(), 1.0);
        assert_eq!(TargetTransform::Ln.inverse(1e6).unwrap_err().class(), "NONCONVERGENCE");
        assert_eq!(TargetTransform::Sqrt.forward(-1.0).unwrap_err().class(), "TRANSFORM_DOMAIN");
    }

    #[test]
    fn report_examples() {
        let y = [100.0, 200.0, 300.0, 400.0, 500.0, 600.0];
        let r = report_from_predictions("x", &y, &y, None).unwrap();
        assert_eq!(r.mape_pct, 0.0);
        assert_eq!(r.mape_category, MapeCategory::Below10);
        assert_eq!(r.r2, 1.0);
        let mean = [350.0; 6];
        assert_eq!(report_from_predictions("x", &y, &mean, None).unwrap().r2, 0.0);
        assert_eq!(categorize(15.0).unwrap(), MapeCategory::Below20);
        assert_eq!(report_from_predictions("x", &[], &[], None).unwrap_err(), Error::EmptyTest);
        assert_eq!(
            report_from_predictions("x", &[1.0, 0.0], &[1.0, 1.0], None).unwrap_err().class(),
            "NONPOSITIVE_TARGET"
        );
    }

    #[test]
    fn missing_only_for_booster() {
        let mut d = synthesize(30, 2, 5.0).unwrap();
        let recs: Vec<ProjectRecord> = d
            .records()
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut r = r.clone();
                if i % 3 == 0 {
                    r.features.set_missing(1);
                }
                r
            })
            .collect();
        d = Dataset::new(recs).unwrap();
        for k in ModelKind::lineup() {
            let res = Predictor::new(ModelSpec::new(*k)).fit(&d, 3);
            if *k == ModelKind::Xgboost {
                assert!(res.is_ok());
            } else {
                assert_eq!(res.unwrap_err(), Error::UnsupportedMissing, "{k}");
            }
        }
    }

    #[test]
    fn cbr_outer_transform_round_trip() {
        let d = synthesize(20, 4, 5.0).unwrap();
        let mut spec = ModelSpec::new(ModelKind::Cbr);
        spec.target_transform = TargetTransform::Ln;
        let p = Predictor::new(spec).fit(&d, 0).unwrap();
        let r = &d.records()[3];
        let v = p.predict(&r.features).unwrap();
        assert!((v - r.cost_le).abs() <= 1e-9 * r.cost_le);
    }
}
