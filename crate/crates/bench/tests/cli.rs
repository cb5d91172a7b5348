use std::path::Path;
use std::process::{Command, Output};

fn costlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_costlab"))
        .args(args)
        .env_remove("COSTLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn reference_model_only_bench_is_exact_at_zero_noise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "seed = 7\n[data]\nnoise_pct = 0\n[models]\nenabled = [\"eq6-reference\"]\n[output]\ndir = \"out\"\n",
    );
    let o = costlab(&["--config", &cfg, "bench"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lb = std::fs::read_to_string(dir.path().join("out/leaderboard.csv")).unwrap();
    let row = lb.lines().nth(1).unwrap();
    assert!(row.starts_with("M1,"), "{row}");
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells[3], "0.000");
    assert_eq!(cells[5], "1.000");
    assert!(dir.path().join("out/predictions/eq6-reference.csv").exists());
}

#[test]
fn bench_is_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[data]\nn = 60\n[models]\nenabled = [\"quadratic-regression\", \"random-forest\", \"cbr\"]\n",
    );
    let run = |seed: &str, out: &str| {
        let o = costlab(&["--config", &cfg, "--seed", seed, "--out", out, "bench"]);
        assert!(o.status.success());
        std::fs::read(Path::new(out).join("leaderboard.csv")).unwrap()
    };
    let base = dir.path().display().to_string();
    let a = run("3", &format!("{base}/a"));
    let b = run("3", &format!("{base}/b"));
    let c = run("4", &format!("{base}/c"));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn markdown_leaderboard_has_the_table_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[models]\nenabled = [\"plain-regression\"]\n");
    let out = dir.path().join("o").display().to_string();
    let o = costlab(&["--config", &cfg, "--out", &out, "--format", "markdown", "bench"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("| Notation | Algorithm / model | Algorithm type | MAPE %"), "{text}");
    assert!(text.contains("| M1 | Plain regression | MRA |"));
    assert!(Path::new(&out).join("leaderboard.md").exists());
}

#[test]
fn predict_reports_reference_cost_and_cbr_trace() {
    let o = costlab(&["predict", "--model", "eq6-reference", "--p1", "100", "--p2", "1000", "--p3", "10", "--p4", "2013"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("predicted cost: 655552.55 LE"), "{}", stdout(&o));

    let o = costlab(&["predict", "--model", "cbr", "--p1", "100", "--p2", "1000", "--p3", "10", "--p4", "2013"]);
    let text = stdout(&o);
    assert!(text.contains("CS = ") && text.contains("AS[") && text.contains("reused "), "{text}");
}

#[test]
fn missing_driver_is_refused_except_by_the_booster() {
    let o = costlab(&["predict", "--model", "random-forest", "--p1", "100", "--p3", "10", "--p4", "2013"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[UNSUPPORTED_MISSING]"));
    let o = costlab(&["predict", "--model", "xgboost", "--p1", "100", "--p3", "10", "--p4", "2013"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn generate_then_bench_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data").display().to_string();
    let o = costlab(&["--seed", "9", "--out", &data, "generate", "--n", "50", "--noise", "2"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("data/projects.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
    let cfg = write_config(
        dir.path(),
        "[data]\nsource = \"csv\"\npath = \"data/projects.csv\"\n[split]\ntrain = 40\ntest = 10\n[models]\nenabled = [\"decision-tree\"]\n",
    );
    let out = dir.path().join("o").display().to_string();
    let o = costlab(&["--config", &cfg, "--out", &out, "bench"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pred = std::fs::read_to_string(dir.path().join("o/predictions/decision-tree.csv")).unwrap();
    assert_eq!(pred.lines().count(), 11);
}

#[test]
fn rule_file_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("rules.txt").display().to_string();
    let o = costlab(&["rules", "--save", &rules]);
    assert!(o.status.success());
    let loaded = costlab(&["rules", "--load", &rules]);
    assert!(loaded.status.success());
    assert_eq!(stdout(&o), stdout(&loaded));
}

#[test]
fn bad_config_is_a_classified_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[model.svr]\nmax_depth = 3\n");
    let o = costlab(&["--config", &cfg, "bench"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[INVALID_CONFIG]"));
}
