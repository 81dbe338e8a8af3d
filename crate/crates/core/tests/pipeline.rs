mod common;

use canbench_core::bench::{FULL_SCALE_ADV_EXAMPLES, FULL_SCALE_AT_ROWS};
use canbench_core::candata::{read_dataset, split_dataset, DEFAULT_SPLIT_RATIOS};
use canbench_core::forest::{fit_model, EnsembleModel, ForestParams, ModelKind, ModelSpec};
use canbench_core::manifest::Manifest;
use canbench_core::pipeline::*;
use canbench_core::zoo::ZooConfig;
use canbench_core::FakeClock;

fn quick(kind: ModelKind) -> PipelineConfig {
    PipelineConfig {
        model: ModelSpec::default_for(kind).with_n_estimators(10),
        zoo: ZooConfig {
            max_iter: 10,
            ..ZooConfig::default()
        },
        ..PipelineConfig::default()
    }
}

#[test]
fn full_scale_split_sizes() {
    // 92270 adversarial examples come from a B of the same size, and the
    // adversarial training set is A + B + B'
    let (a, b) = (276_810, 92_270);
    assert_eq!(b, FULL_SCALE_ADV_EXAMPLES);
    assert_eq!(a + 2 * b, FULL_SCALE_AT_ROWS);
    let total = a + 2 * b;
    assert_eq!((total as f64 * DEFAULT_SPLIT_RATIOS[1]).round() as usize, b);
}

#[test]
fn desk_scale_cardinalities() {
    let ds = common::synthetic(1000, 1.0, 42);
    for kind in ModelKind::ALL {
        let art = run_pipeline(&ds, &quick(kind), &FakeClock::new()).unwrap();
        assert_eq!(art.splits.sizes(), (600, 200, 200));
        assert_eq!(art.b_prime.len(), 200);
        assert_eq!(art.c_prime.as_ref().unwrap().len(), 200);
        assert_eq!(art.report_abb.training_rows, 1000);
        assert_eq!(art.b_prime.labels().collect::<Vec<_>>(), art.splits.b.labels().collect::<Vec<_>>());
        assert_eq!(art.c_prime.as_ref().unwrap().labels().collect::<Vec<_>>(), art.splits.c.labels().collect::<Vec<_>>());
        assert!(art.summary.acc_a_on_b_prime < art.summary.acc_a_on_b, "{kind}: {:?}", art.summary);
    }
}

#[test]
fn skipping_c_prime() {
    let ds = common::synthetic(200, 1.0, 42);
    let cfg = PipelineConfig {
        generate_c_prime: false,
        ..quick(ModelKind::RandomForest)
    };
    let art = run_pipeline(&ds, &cfg, &FakeClock::new()).unwrap();
    assert!(art.c_prime.is_none() && art.c_stats.is_none());
    assert!(art.summary.evasion_abb_on_c_prime.is_none());
}

#[test]
fn cross_validation_on_a_thousand_rows() {
    // 1667 rows split 0.6/0.2/0.2 leaves exactly 1000 in A
    let ds = common::synthetic(1667, 4.0, 42);
    let splits = split_dataset(&ds, DEFAULT_SPLIT_RATIOS, 42).unwrap();
    assert_eq!(splits.a.len(), 1000);
    let cfg = quick(ModelKind::RandomForest);
    let (_, _, cv) = run_phase1_train_a(&splits, &cfg).unwrap();
    assert_eq!(cv.len(), 5);
    assert!(cv.iter().sum::<f64>() / 5.0 >= 0.9, "{cv:?}");
    let (_, _, again) = run_phase1_train_a(&splits, &cfg).unwrap();
    assert_eq!(cv, again);
}

#[test]
fn pipeline_is_reproducible() {
    let ds = common::synthetic(300, 1.0, 7);
    let cfg = quick(ModelKind::GradientBoosting);
    let a = run_pipeline(&ds, &cfg, &FakeClock::new()).unwrap();
    let b = run_pipeline(&ds, &cfg, &FakeClock::new()).unwrap();
    assert_eq!(a.b_prime, b.b_prime);
    assert_eq!(a.c_prime, b.c_prime);
    assert_eq!(a.model_abb, b.model_abb);
    assert_eq!(a.cv_scores, b.cv_scores);
}

#[test]
fn evaluation_examples() {
    let ds = common::synthetic(400, 4.0, 1);
    // memorizing forest predicts every training label
    let spec = ModelSpec::RandomForest(ForestParams {
        n_trees: 1,
        bootstrap: false,
        max_features: canbench_core::forest::MaxFeatures::All,
        ..ForestParams::default()
    });
    let (m, _) = fit_model(&ds, &spec).unwrap();
    assert_eq!(evaluate_model(&m, &ds).unwrap().accuracy, 1.0);

    // constant-class predictor on balanced 4-class data
    let mut flat = ds.empty_like();
    for (i, r) in ds.rows().iter().enumerate() {
        let mut x = r.x.clone();
        x.iter_mut().for_each(|v| *v = 0.5);
        flat.push(x, if i % 3 == 0 { 1 } else { 2 }).unwrap();
    }
    let (constant, _) = fit_model(&flat, &spec).unwrap();
    let e = evaluate_model(&constant, &ds).unwrap();
    assert_eq!(ds.class_counts(), vec![100; 4]);
    assert_eq!(e.accuracy, 0.25);
    assert_eq!(e.per_class[2].recall, 1.0);
    assert_eq!(e.per_class[0].support, 100);
}

#[test]
fn run_directory_contents() {
    let ds = common::synthetic(200, 1.0, 42);
    let art = run_pipeline(&ds, &quick(ModelKind::Xgb), &FakeClock::new()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    art.write_to_dir(dir.path()).unwrap();
    for f in ["model_a.json", "model_abb.json", "b_prime.csv", "c_prime.csv", "metrics.txt"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let bp = read_dataset::<f64, _>(std::io::BufReader::new(std::fs::File::open(dir.path().join("b_prime.csv")).unwrap())).unwrap();
    assert_eq!(bp, art.b_prime);
    let m = EnsembleModel::<f64>::load(std::fs::File::open(dir.path().join("model_a.json")).unwrap()).unwrap();
    assert_eq!(m, art.model_a);
    let metrics = Manifest::load(&dir.path().join("metrics.txt")).unwrap();
    assert_eq!(metrics.get("size.b_prime"), Some("40"));
    assert_eq!(metrics.get("size.train_abb"), Some("200"));
}
