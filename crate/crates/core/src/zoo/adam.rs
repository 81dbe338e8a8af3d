use serde::{Deserialize, Serialize};

use super::config::ZooConfig;
use crate::scalar::Scalar;

/// Adam moments for a single coordinate. `t` counts updates of that
/// coordinate only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct AdamState<S> {
    pub m: S,
    pub v: S,
    pub t: u32,
}

impl<S: Scalar> Default for AdamState<S> {
    fn default() -> Self {
        AdamState {
            m: S::zero(),
            v: S::zero(),
            t: 0,
        }
    }
}

/// Bias-corrected Adam step `-lr * m_hat / (sqrt(v_hat) + eps)`.
pub fn adam_coord_update<S: Scalar>(
    state: AdamState<S>,
    g: S,
    cfg: &ZooConfig,
) -> (S, AdamState<S>) {
    let b1 = S::lit(cfg.adam_beta1);
    let b2 = S::lit(cfg.adam_beta2);
    let t = state.t + 1;
    let m = b1 * state.m + (S::one() - b1) * g;
    let v = b2 * state.v + (S::one() - b2) * g * g;
    let m_hat = m / (S::one() - b1.powi(t as i32));
    let v_hat = v / (S::one() - b2.powi(t as i32));
    let delta = -S::lit(cfg.learning_rate) * m_hat / (v_hat.sqrt() + S::lit(cfg.adam_eps));
    (delta, AdamState { m, v, t })
}
