use canbench_core::bench::SweepRecord;
use canbench_core::forest::ModelKind;
use canbench_core::report::*;
use proptest::prelude::*;

fn meta(model: ModelKind) -> TableMeta {
    TableMeta {
        model,
        grid: vec![],
        budget_s: Some(2.0),
        n_target: Some(92270),
        hardware: "test".into(),
        seed: 42,
    }
}

fn table_strategy() -> impl Strategy<Value = (SweepTable, bool)> {
    (
        prop_oneof![
            Just(ModelKind::RandomForest),
            Just(ModelKind::GradientBoosting),
            Just(ModelKind::Xgb)
        ],
        prop::collection::btree_set(1usize..200, 1..25),
        prop::collection::vec((1usize..100_000, 1e-3f64..1e4, 1e-3f64..1e7), 25),
        any::<bool>(),
    )
        .prop_map(|(model, values, nums, training)| {
            let records = values
                .into_iter()
                .zip(nums)
                .map(|(value, (n_done, elapsed, est))| SweepRecord {
                    model,
                    param: model.estimator_param().to_string(),
                    value,
                    n_done: if training { 0 } else { n_done },
                    elapsed,
                    est_total: if training { elapsed } else { est },
                    at_time: training.then_some(elapsed),
                })
                .collect();
            (SweepTable::new(meta(model), records), training)
        })
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 5e-6 * b.abs().max(1e-300)
}

fn attr(tag: &str, name: &str) -> f64 {
    let key = format!(" {name}=\"");
    let start = tag.find(&key).expect("attribute") + key.len();
    let end = start + tag[start..].find('"').unwrap();
    tag[start..end].parse().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn csv_is_deterministic_and_round_trips((table, _) in table_strategy()) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        let n = emit_sweep_csv(&table, &mut a).unwrap();
        emit_sweep_csv(&table, &mut b).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(n, a.len());
        let text = String::from_utf8(a.clone()).unwrap();
        prop_assert!(!text.contains('\r'));
        prop_assert_eq!(text.lines().count(), table.records().len() + 1);
        let rows = parse_sweep_csv(&a[..]).unwrap();
        for (row, rec) in rows.iter().zip(table.records()) {
            prop_assert_eq!(row.model, rec.model);
            prop_assert_eq!(row.value, rec.value);
            prop_assert_eq!(row.n_done, rec.n_done);
            prop_assert!(rel_close(row.elapsed_s, rec.elapsed));
            prop_assert!(rel_close(row.est_total_s, rec.est_total));
            prop_assert_eq!(row.at_time_s.is_some(), rec.at_time.is_some());
            match table.fit() {
                Some(f) => {
                    prop_assert!(rel_close(row.slope.unwrap(), f.slope) || f.slope.abs() < 1e-300);
                    prop_assert!(rel_close(row.r2.unwrap(), f.r2) || f.r2 == 0.0);
                }
                None => prop_assert!(row.slope.is_none() && row.r2.is_none()),
            }
        }
    }

    #[test]
    fn svg_structure((table, training) in table_strategy()) {
        let kind = if training { PlotKind::AtTime } else { PlotKind::AttackTime };
        let mut buf = Vec::new();
        emit_svg_plot(&table, kind, &mut buf).unwrap();
        let svg = String::from_utf8(buf).unwrap();
        prop_assert!(svg.starts_with("<?xml"));
        prop_assert!(svg.trim_end().ends_with("</svg>"));
        prop_assert_eq!(svg.matches("<circle").count(), table.records().len());
        let y_label = format!(">{}</text>", kind.y_label());
        let x_label = format!(">{}</text>", x_label(table.meta().model));
        prop_assert!(svg.contains(&y_label));
        prop_assert!(svg.contains(&x_label));
        let lines: Vec<&str> = svg.lines().filter(|l| l.starts_with("<line")).collect();
        match table.fit() {
            None => prop_assert!(lines.is_empty()),
            Some(f) => {
                prop_assert_eq!(lines.len(), 1);
                let frame = plot_frame(&table, kind).unwrap();
                let lo = table.records().iter().map(|r| r.value).min().unwrap() as f64;
                let hi = table.records().iter().map(|r| r.value).max().unwrap() as f64;
                let (ax, ay) = frame.map(lo, f.predict(lo));
                let (bx, by) = frame.map(hi, f.predict(hi));
                let l = lines[0];
                prop_assert!((attr(l, "x1") - ax).abs() <= 1e-6);
                prop_assert!((attr(l, "y1") - ay).abs() <= 1e-6);
                prop_assert!((attr(l, "x2") - bx).abs() <= 1e-6);
                prop_assert!((attr(l, "y2") - by).abs() <= 1e-6);
                prop_assert!(svg.contains("Lin. Reg."));
            }
        }
    }
}

#[test]
fn markers_sit_inside_the_plot_area() {
    let records = (1..=4)
        .map(|v| SweepRecord {
            model: ModelKind::GradientBoosting,
            param: "n_rounds".into(),
            value: v * 10,
            n_done: 5,
            elapsed: 2.0,
            est_total: 100.0 * v as f64,
            at_time: None,
        })
        .collect();
    let table = SweepTable::new(meta(ModelKind::GradientBoosting), records);
    let mut buf = Vec::new();
    emit_svg_plot(&table, PlotKind::AttackTime, &mut buf).unwrap();
    let svg = String::from_utf8(buf).unwrap();
    for l in svg.lines().filter(|l| l.starts_with("<circle")) {
        let (cx, cy) = (attr(l, "cx"), attr(l, "cy"));
        assert!(cx > 0.0 && cx < SVG_WIDTH && cy > 0.0 && cy < SVG_HEIGHT);
    }
    assert!(svg.contains(X_LABEL_ROUNDS));
}
