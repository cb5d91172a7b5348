//! Full comparison run: data, split, fit and evaluate every enabled model.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use costlab_core::data::{check_green_rule, load_csv, split, synthesize, SampleAdequacy, N_FEATURES};
use costlab_core::genetic_fuzzy::save_history;
use costlab_core::model::{report_from_predictions, Fitted};
use costlab_core::seed::derive_seed;
use costlab_core::{Dataset, Error, ModelKind, Predictor, Result};

use crate::config::{BenchConfig, Format, Source};
use crate::render::{render, Leaderboard, Outcome};

pub const PREDICTIONS_DIR: &str = "predictions";
pub const GA_HISTORY_FILE: &str = "ga_fitness_history.csv";

/// Test-set predictions of one model: (record id, actual, predicted).
pub type Predictions = Vec<(String, f64, f64)>;

#[derive(Debug, Clone)]
pub struct BenchRun {
    pub seed: u64,
    pub train: Dataset,
    pub test: Dataset,
    pub adequacy: SampleAdequacy,
    pub leaderboard: Leaderboard,
    pub predictions: BTreeMap<ModelKind, Predictions>,
    pub ga_history: Option<Vec<f64>>,
    pub fitted: BTreeMap<ModelKind, Predictor>,
}

pub fn load_dataset(cfg: &BenchConfig, seed: u64) -> Result<Dataset> {
    match cfg.data.source {
        Source::Synthesize => synthesize(cfg.data.n, derive_seed(seed, "data"), cfg.data.noise_pct),
        Source::Csv => {
            let path = cfg.data.path.as_ref().expect("validated");
            load_csv(cfg.resolve(path))
        }
    }
}

pub fn split_dataset(cfg: &BenchConfig, data: &Dataset, seed: u64) -> Result<(Dataset, Dataset)> {
    split(data, &cfg.split_spec(derive_seed(seed, "split")))
}

/// Fits `kind` on `train` with its namespaced seed.
pub fn fit_model(cfg: &BenchConfig, kind: ModelKind, train: &Dataset, seed: u64) -> Result<Predictor> {
    Predictor::new(cfg.model_spec(kind)?).fit(train, derive_seed(seed, kind.id()))
}

fn fit_and_score(
    cfg: &BenchConfig,
    kind: ModelKind,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
) -> Result<(Predictor, costlab_core::EvalReport, Predictions)> {
    let p = fit_model(cfg, kind, train, seed)?;
    let predicted = p.predict_all(test)?;
    let report = report_from_predictions(kind.id(), &test.targets(), &predicted, cfg.metrics.n_override)?;
    let rows = test
        .records()
        .iter()
        .zip(&predicted)
        .map(|(r, &y)| (r.id.clone(), r.cost_le, y))
        .collect();
    Ok((p, report, rows))
}

/// Models are fitted in parallel; each gets its own seed stream, so results
/// do not depend on scheduling or on which other models are enabled.
pub fn run_bench(cfg: &BenchConfig, seed: u64) -> Result<BenchRun> {
    let kinds = cfg.enabled_models()?;
    // Bad overrides fail the run instead of becoming error rows.
    for id in cfg.model.keys() {
        cfg.model_spec(id.parse()?)?;
    }
    let data = load_dataset(cfg, seed)?;
    let (train, test) = split_dataset(cfg, &data, seed)?;
    let adequacy = check_green_rule(train.len(), N_FEATURES);

    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&k| {
                let (train, test) = (&train, &test);
                s.spawn(move || (k, fit_and_score(cfg, k, train, test, seed)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("model thread panicked")).collect()
    });

    let mut outcomes = Vec::new();
    let mut predictions = BTreeMap::new();
    let mut fitted = BTreeMap::new();
    let mut ga_history = None;
    for (kind, res) in results {
        match res {
            Ok((p, report, rows)) => {
                if let Some(Fitted::GeneticFuzzy { history, .. }) = p.fitted() {
                    ga_history = Some(history.clone());
                }
                predictions.insert(kind, rows);
                fitted.insert(kind, p);
                outcomes.push((kind, Outcome::Ok(report)));
            }
            Err(e) => outcomes.push((kind, Outcome::Failed(e))),
        }
    }
    Ok(BenchRun {
        seed,
        train,
        test,
        adequacy,
        leaderboard: Leaderboard::from_outcomes(outcomes),
        predictions,
        ga_history,
        fitted,
    })
}

pub fn predictions_csv(rows: &Predictions) -> String {
    let mut out = String::from("id,actual,predicted\n");
    for (id, a, p) in rows {
        let _ = writeln!(out, "{id},{a:.6},{p:.6}");
    }
    out
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes the leaderboard, per-model predictions and the GA history under
/// `dir`; returns the files written.
pub fn write_outputs(run: &BenchRun, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    let pred_dir = dir.join(PREDICTIONS_DIR);
    std::fs::create_dir_all(&pred_dir).map_err(|e| Error::Io(format!("{}: {e}", pred_dir.display())))?;
    let mut written = Vec::new();

    let lb_path = dir.join(format!("leaderboard.{}", format.extension()));
    write(&lb_path, render(&run.leaderboard, format))?;
    written.push(lb_path);
    for (kind, rows) in &run.predictions {
        let p = pred_dir.join(format!("{}.csv", kind.id()));
        write(&p, predictions_csv(rows))?;
        written.push(p);
    }
    if let Some(h) = &run.ga_history {
        let p = dir.join(GA_HISTORY_FILE);
        save_history(h, &p)?;
        written.push(p);
    }
    Ok(written)
}
