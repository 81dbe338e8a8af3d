//! From-scratch CART trees and the three ensembles under test: bagged
//! random forest, gradient boosting and second-order (XGB-style) boosting.

mod bagging;
mod boosting;
mod model;
mod objective;
mod params;
mod tree;

pub use bagging::fit_random_forest;
pub use boosting::{fit_gradient_boosting, fit_xgb_style};
pub use model::{accuracy, log_loss, EnsembleModel, ModelKind, TrainReport, PROBABILITY_FLOOR};
pub use objective::{leaf_weight, split_gain, HESSIAN_FLOOR};
pub use params::{BoostingParams, ForestParams, MaxFeatures, ModelSpec, XgbParams};
pub use tree::{fit_tree, Criterion, DecisionTree, Node, TreeParams};

use crate::candata::LabeledDataset;
use crate::error::Result;
use crate::scalar::Scalar;

/// Fits whichever ensemble `spec` describes.
pub fn fit_model<S: Scalar>(
    ds: &LabeledDataset<S>,
    spec: &ModelSpec,
) -> Result<(EnsembleModel<S>, TrainReport)> {
    match spec {
        ModelSpec::RandomForest(p) => fit_random_forest(ds, p),
        ModelSpec::GradientBoosting(p) => fit_gradient_boosting(ds, p),
        ModelSpec::Xgb(p) => fit_xgb_style(ds, p),
    }
}
