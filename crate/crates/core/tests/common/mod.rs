#![allow(dead_code)]

use canbench_core::candata::{generate_synthetic, FeatureVector, LabeledDataset, SyntheticConfig};

pub fn names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("c{i}")).collect()
}

pub fn synthetic(n: usize, separation: f64, seed: u64) -> LabeledDataset<f64> {
    generate_synthetic(&SyntheticConfig {
        n,
        class_separation: separation,
        seed,
        ..SyntheticConfig::default()
    })
    .expect("synthetic data")
}

/// Two-class, one-feature dataset: x = 0, 1, 2, 3 labelled 0, 0, 1, 1.
pub fn four_points() -> LabeledDataset<f64> {
    LabeledDataset::from_rows(
        names(2),
        1,
        [(0.0, 0), (1.0, 0), (2.0, 1), (3.0, 1)].map(|(x, y)| (FeatureVector::new(vec![x]), y)),
    )
    .unwrap()
}
