use std::collections::HashSet;

use lcforecast::al_simulator::{average_curves, run_simulation, SimError, SimulationConfig, Strategy};
use lcforecast::forecast_eval::Metric;
use lcforecast::learners::{train_linear, LearnerConfig, LearnerKind, LinearParams};
use lcforecast::synth::{generate_corpus, SynthConfig};
use lcforecast::text_pipeline::{build_vocabulary, default_stopwords, vectorize, Document, Split};

fn corpus(size: usize, seed: u64) -> Vec<Document> {
    generate_corpus(&SynthConfig {
        size,
        positive_fraction: 0.3,
        seed,
        ..Default::default()
    })
}

#[test]
fn same_seed_gives_identical_record() {
    let docs = corpus(300, 1);
    for strategy in [Strategy::Random, Strategy::ClosestToHyperplane] {
        let cfg = SimulationConfig {
            bp: 5.0,
            strategy,
            seed: 11,
            ..Default::default()
        };
        let a = run_simulation(&docs, &cfg).unwrap();
        let b = run_simulation(&docs, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn final_iteration_independent_of_strategy() {
    let docs = corpus(300, 2);
    let run = |strategy| {
        let cfg = SimulationConfig {
            bp: 10.0,
            strategy,
            seed: 4,
            ..Default::default()
        };
        run_simulation(&docs, &cfg).unwrap().remove(0)
    };
    let passive = run(Strategy::Random);
    let active = run(Strategy::ClosestToHyperplane);
    assert_ne!(passive.stop_set_predictions, active.stop_set_predictions);
    assert_eq!(passive.reports.last(), active.reports.last());
    assert_eq!(passive.stop_set_predictions.last(), active.stop_set_predictions.last());
}

#[test]
fn pool_accounting_and_grid() {
    let docs = corpus(250, 3);
    let cfg = SimulationConfig {
        bp: 3.0,
        seed: 9,
        ..Default::default()
    };
    let rec = run_simulation(&docs, &cfg).unwrap().remove(0);
    let pool = docs.iter().filter(|d| d.split == Split::Train).count();
    let test = docs.len() - pool;
    assert_eq!((rec.pool_size, rec.test_size), (pool, test));
    assert_eq!(rec.final_labeled + rec.final_unlabeled, pool);
    assert_eq!(rec.final_unlabeled, 0);

    let batch = cfg.batch_size(pool);
    let xs: Vec<f64> = rec.accuracy_curve.points().iter().map(|p| p.x).collect();
    let fx: Vec<f64> = rec.f_measure_curve.points().iter().map(|p| p.x).collect();
    assert_eq!(xs, fx);
    for (k, &x) in xs.iter().enumerate() {
        let labeled = ((k + 1) * batch).min(pool);
        assert_eq!(x, 100.0 * labeled as f64 / pool as f64);
    }
    assert_eq!(*xs.last().unwrap(), 100.0);
    assert!(rec.reports.iter().all(|r| r.total() == test));

    let test_ids: HashSet<&str> = docs.iter().filter(|d| d.split == Split::Test).map(|d| d.id.as_str()).collect();
    assert_eq!(rec.stop_set_ids.len(), pool.min(cfg.stop_set_size));
    assert!(rec.stop_set_ids.iter().all(|id| !test_ids.contains(id.as_str())));
    assert!(rec.stop_set_predictions.iter().all(|row| row.len() == rec.stop_set_ids.len()));
}

#[test]
fn vocabulary_excludes_test_only_terms() {
    let mut docs = corpus(120, 4);
    let marker = "zzqtestonlyterm";
    for d in docs.iter_mut().filter(|d| d.split == Split::Test) {
        d.text = format!("{} {marker} {marker} {marker}", d.text);
    }
    let pool: Vec<&Document> = docs.iter().filter(|d| d.split == Split::Train).collect();
    let vocab = build_vocabulary(pool.iter().copied(), &default_stopwords(), 3).unwrap();
    assert!(vocab.index_of(marker).is_none());
    let rec = run_simulation(&docs, &SimulationConfig { bp: 10.0, ..Default::default() }).unwrap();
    assert_eq!(rec[0].vocabulary_size, vocab.len());
}

#[test]
fn linear_training_is_deterministic() {
    let docs = corpus(100, 5);
    let vocab = build_vocabulary(&docs, &default_stopwords(), 3).unwrap();
    let data: Vec<_> = docs.iter().map(|d| (vectorize(d, &vocab), d.label)).collect();
    let params = LinearParams::default();
    let a = train_linear(&data, vocab.len(), &params, 17).unwrap();
    let b = train_linear(&data, vocab.len(), &params, 17).unwrap();
    let bits = |m: &lcforecast::learners::LinearModel| {
        data.iter().map(|(v, _)| m.decision_value(v).to_bits()).collect::<Vec<_>>()
    };
    assert_eq!(bits(&a), bits(&b));
    assert!(a.weights.iter().all(|w| w.is_finite()));
    assert_eq!(a.weights.len(), vocab.len());
}

#[test]
fn folds_run_in_parallel_and_average() {
    let docs = corpus(200, 6);
    let cfg = SimulationConfig {
        bp: 5.0,
        folds: 4,
        seed: 2,
        ..Default::default()
    };
    let recs = run_simulation(&docs, &cfg).unwrap();
    assert_eq!(recs.len(), 4);
    assert_eq!(recs, run_simulation(&docs, &cfg).unwrap());
    assert_eq!(recs.iter().map(|r| r.test_size).sum::<usize>(), docs.len());
    assert_eq!(recs.iter().map(|r| r.fold).collect::<Vec<_>>(), vec![Some(0), Some(1), Some(2), Some(3)]);

    let avg = average_curves(&recs, Metric::Accuracy).unwrap();
    let shortest = recs.iter().map(|r| r.accuracy_curve.points().len()).min().unwrap();
    assert_eq!(avg.points().len(), shortest);
    let want = recs.iter().map(|r| r.accuracy_curve.points()[0].y).sum::<f64>() / 4.0;
    assert!((avg.points()[0].y - want).abs() <= 1e-12);
}

#[test]
fn tree_learner_runs_passive_only() {
    let docs = corpus(150, 7);
    let tree = LearnerConfig {
        kind: LearnerKind::Tree,
        ..Default::default()
    };
    let ok = SimulationConfig {
        bp: 10.0,
        learner: tree,
        ..Default::default()
    };
    let rec = run_simulation(&docs, &ok).unwrap();
    assert!(rec[0].accuracy_curve.points().len() >= 2);
    let bad = SimulationConfig {
        strategy: Strategy::ClosestToHyperplane,
        ..ok
    };
    assert!(matches!(run_simulation(&docs, &bad), Err(SimError::ConfigInvalid(_))));
}

#[test]
fn rejects_empty_test_split() {
    let mut docs = corpus(50, 8);
    for d in &mut docs {
        d.split = Split::Train;
    }
    let err = run_simulation(&docs, &SimulationConfig::default()).unwrap_err();
    assert!(matches!(err, SimError::EmptyTest));
}
