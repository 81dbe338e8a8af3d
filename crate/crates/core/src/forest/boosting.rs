use std::time::Instant;

use rayon::prelude::*;

use super::model::{accuracy, softmax, EnsembleModel, TrainReport, PROBABILITY_FLOOR};
use super::params::{BoostingParams, ModelSpec, XgbParams};
use super::tree::{fit_regression_tree, fit_second_order_tree, Criterion, DecisionTree, TreeParams};
use crate::candata::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;

/// `ln(prior_k)` per class, priors floored so absent classes stay finite.
fn prior_log_odds<S: Scalar>(ds: &LabeledDataset<S>) -> Vec<S> {
    let n = ds.len() as f64;
    ds.class_counts()
        .iter()
        .map(|&c| S::lit((c as f64 / n).max(PROBABILITY_FLOOR).ln()))
        .collect()
}

/// Shared boosting loop. Each round turns the current softmax
/// probabilities into one tree per class via `fit_class_tree`, then adds
/// the (learning-rate scaled) tree outputs to the running scores.
fn boost<S, F>(
    ds: &LabeledDataset<S>,
    spec: ModelSpec,
    n_rounds: usize,
    learning_rate: f64,
    parallel: bool,
    fit_class_tree: F,
) -> Result<(EnsembleModel<S>, TrainReport)>
where
    S: Scalar,
    F: Fn(&[&[S]], &[Vec<S>], usize, usize) -> Result<DecisionTree<S>> + Sync,
{
    spec.validate()?;
    if ds.is_empty() {
        return Err(Error::invalid("cannot fit boosting on an empty dataset"));
    }
    let started = Instant::now();
    let k = ds.n_classes();
    let lr = S::lit(learning_rate);
    let base = prior_log_odds(ds);
    let x: Vec<&[S]> = ds.rows().iter().map(|r| &r.x[..]).collect();
    let mut scores: Vec<Vec<S>> = vec![base.clone(); ds.len()];
    let mut boosters: Vec<Vec<DecisionTree<S>>> = vec![Vec::with_capacity(n_rounds); k];

    for round in 0..n_rounds {
        let probs: Vec<Vec<S>> = scores.iter().map(|s| softmax(s)).collect();
        let fit = |class: usize| -> Result<DecisionTree<S>> {
            let mut t = fit_class_tree(&x, &probs, class, round)?;
            t.scale_leaves(lr);
            Ok(t)
        };
        let round_trees: Vec<DecisionTree<S>> = if parallel {
            (0..k).into_par_iter().map(fit).collect::<Result<_>>()?
        } else {
            (0..k).map(fit).collect::<Result<_>>()?
        };
        for (i, s) in scores.iter_mut().enumerate() {
            for (class, t) in round_trees.iter().enumerate() {
                s[class] = s[class] + t.predict_value(x[i]);
            }
        }
        for (class, t) in round_trees.into_iter().enumerate() {
            boosters[class].push(t);
        }
    }

    let model = EnsembleModel {
        kind: spec.kind(),
        spec,
        class_names: ds.class_names().to_vec(),
        n_features: ds.n_features(),
        n_estimators: n_rounds,
        learning_rate: lr,
        base_scores: base,
        trees: Vec::new(),
        boosters,
    };
    let fit_wall_time = started.elapsed().as_secs_f64();
    let report = TrainReport {
        fit_wall_time,
        n_estimators: n_rounds,
        training_accuracy: accuracy(&model, ds)?,
        training_rows: ds.len(),
    };
    Ok((model, report))
}

fn one_hot<S: Scalar>(y: usize, class: usize) -> S {
    if y == class {
        S::one()
    } else {
        S::zero()
    }
}

/// Multinomial gradient boosting: every round fits, per class, a
/// squared-error regression tree to the negative log-loss gradient
/// `y_k - p_k`; leaves hold the mean residual.
pub fn fit_gradient_boosting<S: Scalar>(
    ds: &LabeledDataset<S>,
    params: &BoostingParams,
) -> Result<(EnsembleModel<S>, TrainReport)> {
    let labels: Vec<usize> = ds.labels().collect();
    let k = ds.n_classes();
    boost(
        ds,
        ModelSpec::GradientBoosting(params.clone()),
        params.n_rounds,
        params.learning_rate,
        params.parallel,
        |x, probs, class, round| {
            let residual: Vec<S> = probs
                .iter()
                .zip(&labels)
                .map(|(p, &y)| one_hot::<S>(y, class) - p[class])
                .collect();
            let tp = TreeParams {
                max_depth: Some(params.max_depth),
                min_samples_leaf: params.min_samples_leaf,
                criterion: Criterion::SquaredError,
                max_features: None,
                seed: seed::derive_seed(params.seed, (round * k + class) as u64),
            };
            fit_regression_tree(x.to_vec(), ds.n_features(), &residual, &tp)
        },
    )
}

/// Second-order boosting on the softmax log-loss: gradients `p_k - y_k`,
/// hessians `p_k (1 - p_k)`, leaf weights `-G/(H+lambda)` and split gain
/// `0.5 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)] - gamma`.
pub fn fit_xgb_style<S: Scalar>(
    ds: &LabeledDataset<S>,
    params: &XgbParams,
) -> Result<(EnsembleModel<S>, TrainReport)> {
    let labels: Vec<usize> = ds.labels().collect();
    let k = ds.n_classes();
    let lambda = S::lit(params.lambda);
    let gamma = S::lit(params.gamma);
    boost(
        ds,
        ModelSpec::Xgb(params.clone()),
        params.n_rounds,
        params.learning_rate,
        params.parallel,
        |x, probs, class, round| {
            let grad: Vec<S> = probs
                .iter()
                .zip(&labels)
                .map(|(p, &y)| p[class] - one_hot::<S>(y, class))
                .collect();
            let hess: Vec<S> = probs
                .iter()
                .map(|p| p[class] * (S::one() - p[class]))
                .collect();
            let tp = TreeParams {
                max_depth: Some(params.max_depth),
                min_samples_leaf: 1,
                criterion: Criterion::SquaredError,
                max_features: None,
                seed: seed::derive_seed(params.seed, (round * k + class) as u64),
            };
            fit_second_order_tree(x.to_vec(), ds.n_features(), &grad, &hess, lambda, gamma, &tp)
        },
    )
}
