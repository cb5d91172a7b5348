use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use costlab::bench::{fit_model, load_dataset, run_bench, split_dataset, write_outputs};
use costlab::config::{resolve_seed, BenchConfig, Format, SEED_ENV};
use costlab::render::{render, Outcome};
use costlab_core::data::{synthesize, FEATURE_NAMES};
use costlab_core::model::{evaluate_with, Fitted, Trace};
use costlab_core::seed::derive_seed;
use costlab_core::{Error, FeatureVector, ModelKind, Result};

const DEFAULT_OUT: &str = "costlab-out";

#[derive(Parser)]
#[command(name = "costlab", version, about = "Conceptual cost model zoo and benchmark harness")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed; falls back to the config file, then COSTLAB_SEED, then 42.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Leaderboard format.
    #[arg(long, global = true, value_enum)]
    format: Option<CliFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliFormat {
    Csv,
    Markdown,
}

impl From<CliFormat> for Format {
    fn from(f: CliFormat) -> Self {
        match f {
            CliFormat::Csv => Format::Csv,
            CliFormat::Markdown => Format::Markdown,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic project CSV (to <out>/projects.csv, or stdout).
    Generate {
        #[arg(long)]
        n: Option<usize>,
        /// Multiplicative noise half-width in percent.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Fit and evaluate every enabled model and write the leaderboard.
    Bench,
    /// Fit one model on the training split and predict a single project.
    Predict {
        #[arg(long)]
        model: String,
        /// Area served. Omit any driver to mark it missing.
        #[arg(long, allow_negative_numbers = true)]
        p1: Option<f64>,
        /// Pipeline length (m).
        #[arg(long, allow_negative_numbers = true)]
        p2: Option<f64>,
        /// Irrigation valves.
        #[arg(long, allow_negative_numbers = true)]
        p3: Option<f64>,
        /// Construction year.
        #[arg(long, allow_negative_numbers = true)]
        p4: Option<f64>,
    },
    /// Print, save or check fuzzy rule bases.
    Rules {
        /// `fuzzy` or `genetic-fuzzy`.
        #[arg(long, default_value = "fuzzy")]
        model: String,
        /// Save the fitted rule base to this file.
        #[arg(long)]
        save: Option<PathBuf>,
        /// Parse and print an existing rule file instead of fitting.
        #[arg(long)]
        load: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => BenchConfig::load(p)?,
        None => BenchConfig::default(),
    };
    let env = std::env::var(SEED_ENV).ok();
    let seed = resolve_seed(cli.seed, cfg.seed, env.as_deref())?;
    let format: Format = cli.format.map(Into::into).or(cfg.output.format).unwrap_or_default();
    let out_dir = cli.out.clone().or_else(|| cfg.output.dir.as_ref().map(|d| cfg.resolve(d)));

    match cli.command {
        Command::Generate { n, noise } => {
            let d = synthesize(
                n.unwrap_or(cfg.data.n),
                derive_seed(seed, "data"),
                noise.unwrap_or(cfg.data.noise_pct),
            )?;
            match out_dir {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let path = dir.join("projects.csv");
                    d.save_csv(&path)?;
                    eprintln!("wrote {} records to {}", d.len(), path.display());
                }
                None => d.write_csv(std::io::stdout().lock())?,
            }
        }
        Command::Bench => {
            let run = run_bench(&cfg, seed)?;
            if !run.adequacy.is_adequate() {
                eprintln!("warning: {} training rows; {}", run.train.len(), run.adequacy);
            }
            for row in &run.leaderboard.rows {
                if let Outcome::Failed(e) = &row.outcome {
                    eprintln!("warning: model `{}` failed: [{}] {e}", row.kind.id(), e.class());
                }
            }
            let dir = out_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
            let files = write_outputs(&run, &dir, format)?;
            print!("{}", render(&run.leaderboard, format));
            eprintln!(
                "seed {seed}: {} train / {} test rows; wrote {} files under {}",
                run.train.len(),
                run.test.len(),
                files.len(),
                dir.display()
            );
        }
        Command::Predict { model, p1, p2, p3, p4 } => {
            let kind: ModelKind = model.parse()?;
            let data = load_dataset(&cfg, seed)?;
            let (train, test) = split_dataset(&cfg, &data, seed)?;
            let p = fit_model(&cfg, kind, &train, seed)?;
            let x = FeatureVector::with_missing([p1, p2, p3, p4]);
            let (cost, trace) = p.predict_traced(&x)?;
            let mut out = std::io::stdout().lock();
            writeln!(out, "model: {} ({}, {})", kind.id(), kind.display_name(), kind.family())?;
            writeln!(out, "predicted cost: {cost:.2} LE")?;
            match evaluate_with(&p, &test, cfg.metrics.n_override) {
                Ok(r) => writeln!(
                    out,
                    "held-out MAPE: {:.3} % ({}), R² {:.3}, R*² {:.3} on {} test rows",
                    r.mape_pct,
                    r.mape_category,
                    r.r2,
                    r.adj_r2,
                    test.len()
                )?,
                Err(e) => writeln!(out, "held-out evaluation unavailable: [{}] {e}", e.class())?,
            }
            match trace {
                Trace::None => {}
                Trace::Cbr(r) => {
                    writeln!(out, "best case: {} (cost {:.2}), CS = {:.6}", r.best_case.id, r.best_case.cost_le, r.case_similarity)?;
                    for (name, s) in FEATURE_NAMES.iter().zip(r.per_attribute) {
                        writeln!(out, "  AS[{name}] = {s:.6}")?;
                    }
                    if let Some(Fitted::Cbr { base, .. }) = p.fitted() {
                        for (i, s) in &r.neighbours {
                            writeln!(out, "  reused {} (CS {:.6}, cost {:.2})", base.cases()[*i].id, s, base.cases()[*i].cost_le)?;
                        }
                    }
                }
                Trace::Fuzzy(fp) => {
                    if fp.degraded {
                        writeln!(out, "DEGRADED: no rule fired; returned the training-mean fallback")?;
                    }
                    if let Some(Fitted::Fuzzy(m) | Fitted::GeneticFuzzy { model: m, .. }) = p.fitted() {
                        for (i, s) in &fp.fired {
                            let rule = &m.rule_base.rules()[*i];
                            writeln!(out, "  fired {:.6}: {}", s, m.rule_base.describe(rule))?;
                        }
                    }
                }
            }
        }
        Command::Rules { model, save, load } => {
            let rb = if let Some(path) = load {
                costlab_core::fuzzy::RuleBase::load(path)?
            } else {
                let kind: ModelKind = model.parse()?;
                if !matches!(kind, ModelKind::Fuzzy | ModelKind::GeneticFuzzy) {
                    return Err(Error::InvalidConfig(format!("model `{model}` has no rule base")));
                }
                let data = load_dataset(&cfg, seed)?;
                let (train, _) = split_dataset(&cfg, &data, seed)?;
                match fit_model(&cfg, kind, &train, seed)?.fitted() {
                    Some(Fitted::Fuzzy(m) | Fitted::GeneticFuzzy { model: m, .. }) => m.rule_base.clone(),
                    _ => unreachable!("fuzzy kinds fit fuzzy models"),
                }
            };
            if let Some(path) = save {
                rb.save(&path)?;
                eprintln!("saved {} rules to {}", rb.rules().len(), path.display());
            }
            let mut out = std::io::stdout().lock();
            for v in rb.inputs().iter().chain(std::iter::once(rb.output())) {
                writeln!(out, "# {} in [{}, {}]", v.name, v.min, v.max)?;
            }
            for r in rb.rules() {
                writeln!(out, "{}", rb.describe(r))?;
            }
        }
    }
    Ok(())
}
