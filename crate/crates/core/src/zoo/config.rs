use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attack hyperparameters. The defaults apply the step-size, iteration and
/// finite-difference overrides used in the CAN experiments (0.1, 50, 0.2)
/// on top of an untargeted, single-constant attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZooConfig {
    pub learning_rate: f64,
    pub max_iter: usize,
    /// Finite-difference half-width.
    pub variable_h: f64,
    /// Coordinates updated per iteration.
    pub coord_batch: usize,
    /// Confidence margin of the hinge loss.
    pub kappa: f64,
    /// Weight of the classification loss against squared distortion.
    pub c: f64,
    pub clip_min: f64,
    pub clip_max: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Check the oracle after every iteration and stop at the first
    /// misclassification.
    pub abort_early: bool,
    pub seed: u64,
}

impl Default for ZooConfig {
    fn default() -> Self {
        ZooConfig {
            learning_rate: 0.1,
            max_iter: 50,
            variable_h: 0.2,
            coord_batch: 10,
            kappa: 0.0,
            c: 1e-3,
            clip_min: 0.0,
            clip_max: 1.0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            abort_early: true,
            seed: 42,
        }
    }
}

impl ZooConfig {
    /// Checks the invariants against an input of dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.learning_rate) {
            return Err(Error::config(format!("learning_rate must be > 0, got {}", self.learning_rate)));
        }
        if !positive(self.variable_h) {
            return Err(Error::config(format!("variable_h must be > 0, got {}", self.variable_h)));
        }
        if self.coord_batch == 0 || self.coord_batch > dim {
            return Err(Error::config(format!(
                "coord_batch must be in 1..={dim}, got {}",
                self.coord_batch
            )));
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(Error::config(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::config(format!("c must be >= 0, got {}", self.c)));
        }
        if !(self.clip_min.is_finite() && self.clip_max.is_finite() && self.clip_min < self.clip_max) {
            return Err(Error::config("clip box is empty"));
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::config(format!("{name} must be in [0, 1), got {b}")));
            }
        }
        if !positive(self.adam_eps) {
            return Err(Error::config("adam_eps must be > 0"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_carry_the_three_overrides() {
        let c = ZooConfig::default();
        assert_eq!(c.learning_rate, 0.1);
        assert_eq!(c.max_iter, 50);
        assert_eq!(c.variable_h, 0.2);
        assert_eq!(c.coord_batch, 10);
        assert_eq!(c.c, 1e-3);
        assert!(c.abort_early);
        c.validate(10).unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let d = ZooConfig::default();
        assert!(ZooConfig { learning_rate: 0.0, ..d.clone() }.validate(10).is_err());
        assert!(ZooConfig { variable_h: -0.1, ..d.clone() }.validate(10).is_err());
        assert!(ZooConfig { coord_batch: 11, ..d.clone() }.validate(10).is_err());
        assert!(ZooConfig { coord_batch: 0, ..d.clone() }.validate(10).is_err());
        assert!(ZooConfig { kappa: -1.0, ..d.clone() }.validate(10).is_err());
        assert!(ZooConfig { clip_min: 1.0, ..d.clone() }.validate(10).is_err());
        assert!(ZooConfig { adam_beta1: 1.0, ..d }.validate(10).is_err());
    }
}
