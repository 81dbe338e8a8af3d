//! Zeroth-order black-box evasion attack.
//!
//! The attacker sees only class probabilities. It minimizes
//! `||x - x0||^2 + c * loss(oracle(x))` over the unit box, estimating each
//! coordinate's derivative with a symmetric finite difference (two oracle
//! queries) and stepping that coordinate with its own Adam state.

mod adam;
mod attack;
mod config;
mod estimator;
mod oracle;

pub use adam::{adam_coord_update, AdamState};
pub use attack::{attack_batch, zoo_attack, AdversarialExample, BatchStats};
pub use config::ZooConfig;
pub use estimator::estimate_coord_gradient;
pub use oracle::{attack_loss, zoo_objective, CountingOracle, FnOracle, Oracle};
