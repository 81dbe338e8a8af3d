use std::cell::Cell;

use crate::error::{Error, Result};
use crate::forest::{EnsembleModel, PROBABILITY_FLOOR};
use crate::scalar::Scalar;

/// Black-box access to a classifier: input in, class distribution out.
pub trait Oracle<S: Scalar> {
    fn query(&self, x: &[S]) -> Result<Vec<S>>;
}

impl<S: Scalar> Oracle<S> for EnsembleModel<S> {
    fn query(&self, x: &[S]) -> Result<Vec<S>> {
        self.predict_proba(x)
    }
}

impl<S: Scalar, O: Oracle<S> + ?Sized> Oracle<S> for &O {
    fn query(&self, x: &[S]) -> Result<Vec<S>> {
        (**self).query(x)
    }
}

/// Adapts a closure into an [`Oracle`].
pub struct FnOracle<F>(pub F);

impl<S: Scalar, F: Fn(&[S]) -> Result<Vec<S>>> Oracle<S> for FnOracle<F> {
    fn query(&self, x: &[S]) -> Result<Vec<S>> {
        (self.0)(x)
    }
}

/// Wraps an oracle and counts the calls made through it.
pub struct CountingOracle<O> {
    inner: O,
    calls: Cell<u64>,
}

impl<O> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        CountingOracle {
            inner,
            calls: Cell::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.get()
    }

    pub fn reset(&self) {
        self.calls.set(0);
    }
}

impl<S: Scalar, O: Oracle<S>> Oracle<S> for CountingOracle<O> {
    fn query(&self, x: &[S]) -> Result<Vec<S>> {
        self.calls.set(self.calls.get() + 1);
        self.inner.query(x)
    }
}

/// Untargeted hinge loss `max(ln p_t - max_{j != t} ln p_j, -kappa)`.
/// Zero or below once the input is misclassified (with `kappa = 0`).
pub fn attack_loss<S: Scalar>(probs: &[S], true_class: usize, kappa: S) -> Result<S> {
    if true_class >= probs.len() {
        return Err(Error::ClassOutOfRange {
            class: true_class,
            n_classes: probs.len(),
        });
    }
    if probs.len() < 2 {
        return Err(Error::invalid("attack loss needs at least two classes"));
    }
    let floor = S::lit(PROBABILITY_FLOOR);
    let log_p = |p: S| p.max(floor).ln();
    let other = probs
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != true_class)
        .map(|(_, &p)| log_p(p))
        .fold(S::neg_infinity(), S::max);
    Ok((log_p(probs[true_class]) - other).max(-kappa))
}

/// `||x - x0||^2 + c * attack_loss(oracle(x))`. One oracle query.
pub fn zoo_objective<S: Scalar, O: Oracle<S> + ?Sized>(
    x: &[S],
    x0: &[S],
    oracle: &O,
    true_class: usize,
    c: S,
    kappa: S,
) -> Result<S> {
    if x.len() != x0.len() {
        return Err(Error::DimensionMismatch {
            expected: x0.len(),
            got: x.len(),
        });
    }
    let dist: S = x.iter().zip(x0).map(|(&a, &b)| (a - b) * (a - b)).sum();
    let probs = oracle.query(x)?;
    Ok(dist + c * attack_loss(&probs, true_class, kappa)?)
}
