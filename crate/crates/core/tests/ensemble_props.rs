use costlab_core::cart::{grow, TreeParams};
use costlab_core::data::{split, synthesize, FeatureVector, SplitSpec};
use costlab_core::ensemble::*;
use costlab_core::metrics::mape;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn data(n: usize, seed: u64) -> (Vec<FeatureVector>, Vec<f64>) {
    let d = synthesize(n, seed, 5.0).unwrap();
    (d.features(), d.targets())
}

#[test]
fn mean_ensembles_stay_inside_member_range() {
    let (x, y) = data(60, 1);
    let cfg = BaggingConfig { n_members: 15, seed: 3, ..BaggingConfig::default() };
    for m in [
        fit_bagging(&x, &y, &cfg).unwrap(),
        fit_random_forest(&x, &y, &cfg).unwrap(),
        fit_extra_trees(&x, &y, &cfg).unwrap(),
    ] {
        for f in &x {
            let p = m.predict(f).unwrap();
            let members = m.member_predictions(f).unwrap();
            let lo = members.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = members.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(p >= lo - 1e-9 && p <= hi + 1e-9);
        }
    }
}

#[test]
fn bootstrap_covers_about_63_percent() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let n = 1000;
    let mut total = 0.0;
    for _ in 0..50 {
        let s = bootstrap_sample(n, &mut rng);
        assert_eq!(s.len(), n);
        let oob = out_of_bag(n, &s);
        total += 1.0 - oob.len() as f64 / n as f64;
    }
    let frac = total / 50.0;
    assert!((frac - 0.632).abs() <= 0.03, "{frac}");
}

#[test]
fn gradient_boosting_training_error_never_rises() {
    let (x, y) = data(80, 2);
    let mut last = f64::INFINITY;
    for rounds in [0, 1, 2, 5, 10, 20, 50] {
        let cfg = BoostConfig { n_rounds: rounds, ..BoostConfig::default() };
        let m = fit_gradient_boosting(&x, &y, &cfg).unwrap();
        let sse: f64 = x.iter().zip(&y).map(|(f, t)| (m.predict(f).unwrap() - t).powi(2)).sum();
        assert!(sse <= last * (1.0 + 1e-12), "{rounds} rounds: {sse} > {last}");
        last = sse;
    }
}

#[test]
fn missing_values_take_the_lower_error_branch() {
    // Feature 0 separates low from high targets. Rows with P1 missing have
    // high targets, so routing them right is the smaller squared error.
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..10 {
        x.push(FeatureVector::from_values([i as f64, 1.0, 1.0, 1.0]));
        y.push(if i < 5 { 10.0 } else { 20.0 });
    }
    for _ in 0..3 {
        x.push(FeatureVector::with_missing([None, Some(1.0), Some(1.0), Some(1.0)]));
        y.push(20.0);
    }
    let cfg = BoostConfig { lambda: 0.0, max_depth: Some(1), ..BoostConfig::default() };
    let g: Vec<f64> = y.iter().map(|t| 15.0 - t).collect();
    let h = vec![1.0; y.len()];
    let rows: Vec<usize> = (0..y.len()).collect();
    let tree = grow_second_order(&x, &g, &h, &rows, &cfg).unwrap();

    let sse = |left_missing: bool| {
        let (mut l, mut r) = (Vec::new(), Vec::new());
        for (f, t) in x.iter().zip(&y) {
            let left = match f.get(0) {
                Some(v) => v <= 4.5,
                None => left_missing,
            };
            if left { l.push(*t) } else { r.push(*t) }
        }
        let s = |v: &Vec<f64>| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|t| (t - m).powi(2)).sum::<f64>()
        };
        s(&l) + s(&r)
    };
    assert!(sse(false) < sse(true));
    let missing = &x[10];
    let high = FeatureVector::from_values([9.0, 1.0, 1.0, 1.0]);
    assert_eq!(tree.predict(missing).unwrap(), tree.predict(&high).unwrap());
    assert!((15.0 + tree.predict(missing).unwrap() - 20.0).abs() < 1e-9);
}

#[test]
fn every_family_is_deterministic() {
    let (x, y) = data(50, 4);
    let bag = BaggingConfig { n_members: 10, seed: 9, ..BaggingConfig::default() };
    let ada = AdaBoostConfig { n_members: 10, seed: 9, ..AdaBoostConfig::default() };
    let boost = BoostConfig { n_rounds: 10, seed: 9, ..BoostConfig::stochastic() };
    type Fit<'a> = Box<dyn Fn() -> EnsembleModel + 'a>;
    let fits: Vec<Fit> = vec![
        Box::new(|| fit_bagging(&x, &y, &bag).unwrap()),
        Box::new(|| fit_random_forest(&x, &y, &bag).unwrap()),
        Box::new(|| fit_extra_trees(&x, &y, &bag).unwrap()),
        Box::new(|| fit_adaboost_r2(&x, &y, &ada).unwrap()),
        Box::new(|| fit_gradient_boosting(&x, &y, &boost).unwrap()),
        Box::new(|| fit_regularized_booster(&x, &y, &boost).unwrap()),
    ];
    for f in &fits {
        assert_eq!(f(), f());
    }
}

#[test]
fn regularized_gain_monotonicity() {
    let (gl, hl, gr, hr) = (-12.0, 5.0, 7.0, 4.0);
    let mut last = f64::INFINITY;
    for gamma in [0.0, 0.5, 1.0, 5.0] {
        let g = regularized_gain(gl, hl, gr, hr, 1.0, gamma);
        assert!(g < last);
        last = g;
    }
    // Opposite-sign gradient sums: more shrinkage, smaller gain.
    let mut last = f64::INFINITY;
    for lambda in [0.0, 0.5, 1.0, 5.0, 50.0] {
        let g = regularized_gain(gl, hl, gr, hr, lambda, 0.0);
        assert!(g <= last);
        last = g;
    }
    assert!((leaf_weight(6.0, 2.0, 1.0) + 2.0).abs() < 1e-12);
}

#[test]
fn forest_beats_single_tree_out_of_sample() {
    let d = synthesize(144, 42, 5.0).unwrap();
    let (tr, te) = split(&d, &SplitSpec::new(42)).unwrap();
    let (x, y) = (tr.features(), tr.targets());
    let tree = grow(&x, &y, &TreeParams::default()).unwrap();
    let rf = fit_random_forest(&x, &y, &BaggingConfig { seed: 1, ..BaggingConfig::default() }).unwrap();
    let pt: Vec<f64> = te.features().iter().map(|f| tree.predict(f).unwrap()).collect();
    let pr: Vec<f64> = te.features().iter().map(|f| rf.predict(f).unwrap()).collect();
    let (et, er) = (mape(&te.targets(), &pt).unwrap(), mape(&te.targets(), &pr).unwrap());
    assert!(er < et, "forest {er} vs tree {et}");
}
