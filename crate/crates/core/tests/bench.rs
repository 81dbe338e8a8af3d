mod common;

use canbench_core::bench::*;
use canbench_core::candata::{split_dataset, FeatureVector, Sample};
use canbench_core::forest::{ModelKind, ModelSpec};
use canbench_core::zoo::{FnOracle, ZooConfig};
use canbench_core::{FakeClock, SteppingClock};
use proptest::prelude::*;

#[test]
fn one_second_per_attack_reproduces_the_workload() {
    let clock = FakeClock::new();
    let oracle = FnOracle(|_: &[f64]| {
        clock.advance(1.0);
        Ok(vec![0.0, 1.0])
    });
    let rows: Vec<Sample<f64>> = (0..400)
        .map(|_| Sample {
            x: FeatureVector::new(vec![0.5; 10]),
            y: 0,
        })
        .collect();
    let t = measure_oracle_throughput(&oracle, &rows, DEFAULT_BUDGET_S, DEFAULT_N_TARGET, &ZooConfig::default(), &clock).unwrap();
    assert_eq!((t.n_done, t.elapsed), (300, 300.0));
    assert_eq!(extrapolate_total_time(t.n_done, t.elapsed, DEFAULT_N_TARGET).unwrap(), 92270.0);
}

#[test]
fn sweeps_are_exact_under_a_stepping_clock() {
    let ds = common::synthetic(100, 1.0, 42);
    let splits = split_dataset(&ds, [0.6, 0.2, 0.2], 42).unwrap();
    let zoo = ZooConfig {
        max_iter: 3,
        ..ZooConfig::default()
    };
    let spec = ModelSpec::default_for(ModelKind::RandomForest);
    let run = || {
        let clock = SteppingClock::new(0.25);
        run_attack_time_sweep(&splits, &spec, &[2, 4, 6], &zoo, 5.0, 1000, &clock).unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a, b);
    assert_eq!(a.records.iter().map(|r| r.value).collect::<Vec<_>>(), vec![2, 4, 6]);
    for r in &a.records {
        assert_eq!(r.param, "n_trees");
        // every clock read is a multiple of the step
        assert_eq!((r.elapsed / 0.25).fract(), 0.0);
        assert!(r.elapsed >= 5.0);
        assert_eq!(r.est_total, extrapolate_total_time(r.n_done, r.elapsed, 1000).unwrap());
    }
    assert_eq!(a.fit.unwrap().n_points, 3);
}

#[test]
fn training_sweep_records_fit_time() {
    let ds = common::synthetic(100, 1.0, 42);
    let splits = split_dataset(&ds, [0.6, 0.2, 0.2], 42).unwrap();
    let clock = SteppingClock::new(1.0);
    let spec = ModelSpec::default_for(ModelKind::GradientBoosting);
    let r = run_at_time_sweep(&splits, &spec, &[1, 3], |_| Ok(splits.b.clone()), &clock).unwrap();
    assert_eq!(r.records.len(), 2);
    for rec in &r.records {
        assert_eq!(rec.at_time, Some(1.0));
        assert_eq!(rec.param, "n_rounds");
    }
    let f = r.fit.unwrap();
    assert_eq!((f.slope, f.r2), (0.0, 1.0));
}

#[test]
fn timing_refuses_parallel_models_and_bad_grids() {
    let ds = common::synthetic(60, 1.0, 1);
    let splits = split_dataset(&ds, [0.6, 0.2, 0.2], 1).unwrap();
    let clock = FakeClock::new();
    let zoo = ZooConfig::default();
    let par = ModelSpec::default_for(ModelKind::RandomForest).with_parallel(true);
    assert!(run_attack_time_sweep(&splits, &par, &[1], &zoo, 1.0, 10, &clock).is_err());
    assert!(run_at_time_sweep(&splits, &par, &[1], |_| Ok(splits.b.clone()), &clock).is_err());
    let seq = ModelSpec::default_for(ModelKind::RandomForest);
    for grid in [&[][..], &[0, 1], &[5, 3], &[2, 2]] {
        assert!(run_attack_time_sweep(&splits, &seq, grid, &zoo, 1.0, 10, &clock).is_err());
    }
}

#[test]
fn single_point_sweep_has_no_fit() {
    let ds = common::synthetic(60, 1.0, 1);
    let splits = split_dataset(&ds, [0.6, 0.2, 0.2], 1).unwrap();
    let clock = SteppingClock::new(1.0);
    let spec = ModelSpec::default_for(ModelKind::Xgb);
    let r = run_attack_time_sweep(&splits, &spec, &[2], &ZooConfig { max_iter: 1, ..ZooConfig::default() }, 1.0, 10, &clock).unwrap();
    assert_eq!(r.records.len(), 1);
    assert!(r.fit.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn extrapolation_identity_and_linearity(n in 1usize..1_000_000, e in 0.0f64..1e6, t in 1usize..1_000_000) {
        prop_assert_eq!(extrapolate_total_time(n, e, n).unwrap(), e);
        let one = extrapolate_total_time(n, e, t).unwrap();
        prop_assert_eq!(extrapolate_total_time(n, e, 2 * t).unwrap(), 2.0 * one);
        if n <= t {
            prop_assert!(one >= e);
        }
    }

    #[test]
    fn ols_recovers_exact_lines(
        a in -100.0f64..100.0,
        b in -1000.0f64..1000.0,
        xs in prop::collection::btree_set(0u32..500, 2..30),
    ) {
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x as f64, a * x as f64 + b)).collect();
        let f = fit_linear_regression(&pts).unwrap();
        prop_assert!((f.slope - a).abs() <= 1e-9 * (1.0 + a.abs()));
        prop_assert!((f.intercept - b).abs() <= 1e-9 * (1.0 + b.abs() + 500.0 * a.abs()));
        prop_assert!((f.r2 - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn r2_stays_in_the_unit_interval(pts in prop::collection::vec((0.0f64..100.0, -1e3f64..1e3), 2..40)) {
        if let Ok(f) = fit_linear_regression(&pts) {
            prop_assert!((0.0..=1.0).contains(&f.r2));
        }
    }

    #[test]
    fn fake_clock_throughput_is_exact(step in 1u32..20, budget in 1u32..200, n in 1usize..500) {
        let clock = FakeClock::new();
        let t = measure_throughput(n, budget as f64, &clock, |_| {
            clock.advance(step as f64);
            Ok(())
        })
        .unwrap();
        let needed = budget.div_ceil(step) as usize;
        let want = needed.min(n);
        prop_assert_eq!(t.n_done, want);
        prop_assert_eq!(t.elapsed, (want as u32 * step) as f64);
    }
}
