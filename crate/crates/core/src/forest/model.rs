use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::params::ModelSpec;
use super::tree::DecisionTree;
use crate::candata::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::{argmax, Scalar};

/// Lower clamp applied to probabilities before any logarithm.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

const MODEL_FORMAT: &str = "canbench-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    RandomForest,
    GradientBoosting,
    Xgb,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::RandomForest, ModelKind::GradientBoosting, ModelKind::Xgb];

    pub fn short_name(self) -> &'static str {
        match self {
            ModelKind::RandomForest => "rf",
            ModelKind::GradientBoosting => "gb",
            ModelKind::Xgb => "xgb",
        }
    }

    pub fn estimator_param(self) -> &'static str {
        match self {
            ModelKind::RandomForest => "n_trees",
            ModelKind::GradientBoosting | ModelKind::Xgb => "n_rounds",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rf" | "random-forest" | "randomforest" => Ok(ModelKind::RandomForest),
            "gb" | "gradient-boosting" | "gbm" => Ok(ModelKind::GradientBoosting),
            "xgb" | "xgboost" => Ok(ModelKind::Xgb),
            _ => Err(Error::config(format!("unknown model kind {s:?} (expected rf, gb or xgb)"))),
        }
    }
}

/// Fit-time measurements for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub fit_wall_time: f64,
    pub n_estimators: usize,
    pub training_accuracy: f64,
    pub training_rows: usize,
}

/// A fitted, immutable ensemble.
///
/// Random forests keep one classification tree per bagging round and
/// average their leaf distributions. Boosted models keep, for every class,
/// one regression tree per round (`boosters[class][round]`, leaves already
/// scaled by the learning rate) and apply a softmax to
/// `base_scores + sum of tree outputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct EnsembleModel<S> {
    pub(crate) kind: ModelKind,
    pub(crate) spec: ModelSpec,
    pub(crate) class_names: Vec<String>,
    pub(crate) n_features: usize,
    pub(crate) n_estimators: usize,
    pub(crate) learning_rate: S,
    pub(crate) base_scores: Vec<S>,
    pub(crate) trees: Vec<DecisionTree<S>>,
    pub(crate) boosters: Vec<Vec<DecisionTree<S>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
struct ModelFile<S> {
    format: String,
    version: u32,
    scalar: String,
    model: EnsembleModel<S>,
}

impl<S: Scalar> EnsembleModel<S> {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_estimators(&self) -> usize {
        self.n_estimators
    }

    pub fn learning_rate(&self) -> S {
        self.learning_rate
    }

    pub fn base_scores(&self) -> &[S] {
        &self.base_scores
    }

    pub fn trees(&self) -> &[DecisionTree<S>] {
        &self.trees
    }

    pub fn boosters(&self) -> &[Vec<DecisionTree<S>>] {
        &self.boosters
    }

    /// Class distribution for `x`; non-negative and summing to one.
    pub fn predict_proba(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        let k = self.n_classes();
        match self.kind {
            ModelKind::RandomForest => {
                let mut acc = vec![S::zero(); k];
                for t in &self.trees {
                    for (a, &p) in acc.iter_mut().zip(t.leaf_value(x)) {
                        *a = *a + p;
                    }
                }
                let total: S = acc.iter().copied().sum();
                if total > S::zero() {
                    for a in &mut acc {
                        *a = *a / total;
                    }
                } else {
                    acc.fill(S::one() / S::from_count(k));
                }
                Ok(acc)
            }
            ModelKind::GradientBoosting | ModelKind::Xgb => {
                let mut scores = self.base_scores.clone();
                for (s, trees) in scores.iter_mut().zip(&self.boosters) {
                    for t in trees {
                        *s = *s + t.predict_value(x);
                    }
                }
                Ok(softmax(&scores))
            }
        }
    }

    pub fn predict_class(&self, x: &[S]) -> Result<usize> {
        Ok(argmax(&self.predict_proba(x)?))
    }

    /// Boosted model restricted to its first `rounds` rounds; forests keep
    /// their first `rounds` trees.
    pub fn truncated(&self, rounds: usize) -> Self {
        let mut out = self.clone();
        match self.kind {
            ModelKind::RandomForest => out.trees.truncate(rounds.max(1)),
            _ => {
                for b in &mut out.boosters {
                    b.truncate(rounds);
                }
            }
        }
        out.n_estimators = match self.kind {
            ModelKind::RandomForest => out.trees.len(),
            _ => out.boosters.first().map_or(0, Vec::len),
        };
        out
    }

    /// Versioned JSON envelope. Floats are written in shortest round-trip
    /// form, so a reloaded model predicts bit-identically.
    pub fn save<W: Write>(&self, out: W) -> Result<()> {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            scalar: S::NAME.to_string(),
            model: self.clone(),
        };
        serde_json::to_writer(out, &file)?;
        Ok(())
    }

    pub fn load<R: Read>(input: R) -> Result<Self> {
        let file: ModelFile<S> = serde_json::from_reader(input)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::invalid(format!("not a model file (format {:?})", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::invalid(format!("unsupported model version {}", file.version)));
        }
        if file.scalar != S::NAME {
            return Err(Error::invalid(format!(
                "model was saved as {}, loading as {}",
                file.scalar,
                S::NAME
            )));
        }
        file.model.validate()?;
        Ok(file.model)
    }

    fn validate(&self) -> Result<()> {
        let k = self.n_classes();
        if self.base_scores.len() != k && self.kind != ModelKind::RandomForest {
            return Err(Error::invalid("base score count does not match classes"));
        }
        for t in &self.trees {
            if t.n_features() != self.n_features {
                return Err(Error::invalid("tree feature count mismatch"));
            }
            t.validate(k)?;
        }
        if self.kind != ModelKind::RandomForest && self.boosters.len() != k {
            return Err(Error::invalid("booster count does not match classes"));
        }
        for t in self.boosters.iter().flatten() {
            if t.n_features() != self.n_features {
                return Err(Error::invalid("tree feature count mismatch"));
            }
            t.validate(1)?;
        }
        Ok(())
    }
}

pub(crate) fn softmax<S: Scalar>(scores: &[S]) -> Vec<S> {
    let max = scores.iter().copied().fold(S::neg_infinity(), S::max);
    let mut out: Vec<S> = scores.iter().map(|&s| (s - max).exp()).collect();
    let total: S = out.iter().copied().sum();
    for p in &mut out {
        *p = *p / total;
    }
    out
}

/// Fraction of rows whose argmax prediction equals the label.
pub fn accuracy<S: Scalar>(model: &EnsembleModel<S>, ds: &LabeledDataset<S>) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::invalid("accuracy of an empty dataset"));
    }
    let mut correct = 0usize;
    for r in ds.rows() {
        if model.predict_class(&r.x)? == r.y {
            correct += 1;
        }
    }
    Ok(correct as f64 / ds.len() as f64)
}

/// Mean negative log-likelihood with probabilities floored at 1e-12.
pub fn log_loss<S: Scalar>(model: &EnsembleModel<S>, ds: &LabeledDataset<S>) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::invalid("log-loss of an empty dataset"));
    }
    let mut total = 0.0;
    for r in ds.rows() {
        let p = model.predict_proba(&r.x)?[r.y].as_f64().max(PROBABILITY_FLOOR);
        total -= p.ln();
    }
    Ok(total / ds.len() as f64)
}
