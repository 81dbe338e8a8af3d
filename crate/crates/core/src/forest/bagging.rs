use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::model::{accuracy, EnsembleModel, ModelKind, TrainReport};
use super::params::{ForestParams, ModelSpec};
use super::tree::{fit_tree_on_sample, TreeParams};
use crate::candata::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;

/// Bagged random forest: `n_trees` CART trees, each on its own bootstrap
/// resample (when enabled) with per-split feature subsampling. Tree `t`
/// draws its randomness from stream `t` of the seed, so sequential and
/// parallel fits are identical.
pub fn fit_random_forest<S: Scalar>(
    ds: &LabeledDataset<S>,
    params: &ForestParams,
) -> Result<(EnsembleModel<S>, TrainReport)> {
    let spec = ModelSpec::RandomForest(params.clone());
    spec.validate()?;
    if ds.is_empty() {
        return Err(Error::invalid("cannot fit a forest on an empty dataset"));
    }
    let started = Instant::now();
    let n = ds.len();
    let max_features = params.max_features.resolve(ds.n_features());

    let fit_one = |t: usize| -> Result<_> {
        let mut rng = seed::stream_rng(params.seed, t as u64);
        let sample: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            criterion: params.criterion,
            max_features,
            seed: if params.bootstrap || max_features.is_some() {
                seed::derive_seed(params.seed, t as u64)
            } else {
                params.seed
            },
        };
        fit_tree_on_sample(ds, &sample, &tree_params)
    };

    let trees = if params.parallel {
        (0..params.n_trees)
            .into_par_iter()
            .map(fit_one)
            .collect::<Result<Vec<_>>>()?
    } else {
        (0..params.n_trees).map(fit_one).collect::<Result<Vec<_>>>()?
    };

    let model = EnsembleModel {
        kind: ModelKind::RandomForest,
        spec,
        class_names: ds.class_names().to_vec(),
        n_features: ds.n_features(),
        n_estimators: params.n_trees,
        learning_rate: S::one(),
        base_scores: Vec::new(),
        trees,
        boosters: Vec::new(),
    };
    let fit_wall_time = started.elapsed().as_secs_f64();
    let report = TrainReport {
        fit_wall_time,
        n_estimators: params.n_trees,
        training_accuracy: accuracy(&model, ds)?,
        training_rows: n,
    };
    Ok((model, report))
}
