use serde::{Deserialize, Serialize};

use super::model::ModelKind;
use super::tree::Criterion;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaxFeatures {
    /// `floor(sqrt(d))`, at least one.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> Option<usize> {
        match self {
            MaxFeatures::Sqrt => Some(((n_features as f64).sqrt().floor() as usize).max(1)),
            MaxFeatures::All => None,
            MaxFeatures::Count(n) => Some(n.clamp(1, n_features.max(1))),
        }
    }
}

/// Bagged forest. Defaults: 100 trees, unlimited depth, Gini, sqrt(d)
/// features per split, bootstrap on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub criterion: Criterion,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
    /// Fit trees on the rayon pool. Results are identical either way;
    /// timing code refuses to run with this set.
    pub parallel: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 1,
            criterion: Criterion::Gini,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            seed: 42,
            parallel: false,
        }
    }
}

/// First-order gradient boosting. Defaults: 100 rounds, learning rate 0.1,
/// depth 3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostingParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for BoostingParams {
    fn default() -> Self {
        BoostingParams {
            n_rounds: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_leaf: 1,
            seed: 42,
            parallel: false,
        }
    }
}

/// Second-order boosting. Defaults: 100 rounds, learning rate 0.3, depth 6,
/// lambda 1, gamma 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XgbParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for XgbParams {
    fn default() -> Self {
        XgbParams {
            n_rounds: 100,
            learning_rate: 0.3,
            max_depth: 6,
            lambda: 1.0,
            gamma: 0.0,
            seed: 42,
            parallel: false,
        }
    }
}

/// Hyperparameters of one of the three ensemble kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelSpec {
    RandomForest(ForestParams),
    GradientBoosting(BoostingParams),
    Xgb(XgbParams),
}

impl ModelSpec {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::RandomForest => ModelSpec::RandomForest(ForestParams::default()),
            ModelKind::GradientBoosting => ModelSpec::GradientBoosting(BoostingParams::default()),
            ModelKind::Xgb => ModelSpec::Xgb(XgbParams::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::RandomForest(_) => ModelKind::RandomForest,
            ModelSpec::GradientBoosting(_) => ModelKind::GradientBoosting,
            ModelSpec::Xgb(_) => ModelKind::Xgb,
        }
    }

    /// Bagging trees (RF) or boosting rounds (GB, XGB).
    pub fn n_estimators(&self) -> usize {
        match self {
            ModelSpec::RandomForest(p) => p.n_trees,
            ModelSpec::GradientBoosting(p) => p.n_rounds,
            ModelSpec::Xgb(p) => p.n_rounds,
        }
    }

    pub fn with_n_estimators(&self, n: usize) -> Self {
        let mut out = self.clone();
        match &mut out {
            ModelSpec::RandomForest(p) => p.n_trees = n,
            ModelSpec::GradientBoosting(p) => p.n_rounds = n,
            ModelSpec::Xgb(p) => p.n_rounds = n,
        }
        out
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ModelSpec::RandomForest(p) => p.seed = seed,
            ModelSpec::GradientBoosting(p) => p.seed = seed,
            ModelSpec::Xgb(p) => p.seed = seed,
        }
        out
    }

    pub fn is_parallel(&self) -> bool {
        match self {
            ModelSpec::RandomForest(p) => p.parallel,
            ModelSpec::GradientBoosting(p) => p.parallel,
            ModelSpec::Xgb(p) => p.parallel,
        }
    }

    pub fn with_parallel(&self, parallel: bool) -> Self {
        let mut out = self.clone();
        match &mut out {
            ModelSpec::RandomForest(p) => p.parallel = parallel,
            ModelSpec::GradientBoosting(p) => p.parallel = parallel,
            ModelSpec::Xgb(p) => p.parallel = parallel,
        }
        out
    }

    /// Name of the swept hyperparameter.
    pub fn estimator_param(&self) -> &'static str {
        self.kind().estimator_param()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::RandomForest(p) => {
                if p.n_trees == 0 {
                    return Err(Error::config("random forest needs at least one tree"));
                }
            }
            ModelSpec::GradientBoosting(p) => {
                if !(p.learning_rate.is_finite() && p.learning_rate > 0.0) {
                    return Err(Error::config(format!("bad learning rate {}", p.learning_rate)));
                }
            }
            ModelSpec::Xgb(p) => {
                if !(p.learning_rate.is_finite() && p.learning_rate > 0.0) {
                    return Err(Error::config(format!("bad learning rate {}", p.learning_rate)));
                }
                if !(p.lambda.is_finite() && p.lambda >= 0.0) {
                    return Err(Error::config(format!("bad lambda {}", p.lambda)));
                }
                if !(p.gamma.is_finite() && p.gamma >= 0.0) {
                    return Err(Error::config(format!("bad gamma {}", p.gamma)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_reference_implementations() {
        let rf = ForestParams::default();
        assert_eq!(rf.n_trees, 100);
        assert_eq!(rf.max_depth, None);
        assert_eq!(rf.max_features, MaxFeatures::Sqrt);
        assert!(rf.bootstrap);
        let gb = BoostingParams::default();
        assert_eq!((gb.n_rounds, gb.learning_rate, gb.max_depth), (100, 0.1, 3));
        let x = XgbParams::default();
        assert_eq!(
            (x.n_rounds, x.learning_rate, x.max_depth, x.lambda, x.gamma),
            (100, 0.3, 6, 1.0, 0.0)
        );
    }

    #[test]
    fn sqrt_features() {
        assert_eq!(MaxFeatures::Sqrt.resolve(10), Some(3));
        assert_eq!(MaxFeatures::Sqrt.resolve(1), Some(1));
        assert_eq!(MaxFeatures::All.resolve(10), None);
        assert_eq!(MaxFeatures::Count(50).resolve(10), Some(10));
    }

    #[test]
    fn sweeps_override_only_estimators() {
        let spec = ModelSpec::default_for(ModelKind::GradientBoosting);
        let s = spec.with_n_estimators(7);
        assert_eq!(s.n_estimators(), 7);
        match (&spec, &s) {
            (ModelSpec::GradientBoosting(a), ModelSpec::GradientBoosting(b)) => {
                assert_eq!(a.learning_rate, b.learning_rate);
                assert_eq!(a.max_depth, b.max_depth);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn validation() {
        assert!(ModelSpec::default_for(ModelKind::RandomForest)
            .with_n_estimators(0)
            .validate()
            .is_err());
        let mut gb = BoostingParams::default();
        gb.learning_rate = 0.0;
        assert!(ModelSpec::GradientBoosting(gb).validate().is_err());
        let mut x = XgbParams::default();
        x.gamma = -1.0;
        assert!(ModelSpec::Xgb(x).validate().is_err());
        assert!(ModelSpec::default_for(ModelKind::Xgb).with_n_estimators(0).validate().is_ok());
    }
}
