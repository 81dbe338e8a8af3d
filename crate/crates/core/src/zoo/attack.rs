use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::adam::{adam_coord_update, AdamState};
use super::config::ZooConfig;
use super::estimator::estimate_coord_gradient;
use super::oracle::{zoo_objective, CountingOracle, Oracle};
use crate::candata::{FeatureVector, Sample};
use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::scalar::{argmax, Scalar};
use crate::seed;

/// Outcome of attacking one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct AdversarialExample<S> {
    pub original: FeatureVector<S>,
    pub adversarial: FeatureVector<S>,
    pub true_class: usize,
    pub predicted_class_after: usize,
    pub success: bool,
    /// Oracle calls spent on this input.
    pub queries: u64,
    pub iterations: usize,
    pub wall_time: f64,
    pub l2_distortion: S,
}

/// Aggregate over the processed prefix of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct BatchStats<S> {
    pub results: Vec<AdversarialExample<S>>,
    pub n_success: usize,
    pub success_rate: f64,
    pub total_queries: u64,
    pub mean_queries: f64,
    pub total_wall_time: f64,
}

impl<S: Scalar> BatchStats<S> {
    fn from_results(results: Vec<AdversarialExample<S>>, total_wall_time: f64) -> Self {
        let n = results.len();
        let n_success = results.iter().filter(|r| r.success).count();
        let total_queries: u64 = results.iter().map(|r| r.queries).sum();
        let (success_rate, mean_queries) = if n == 0 {
            (0.0, 0.0)
        } else {
            (n_success as f64 / n as f64, total_queries as f64 / n as f64)
        };
        BatchStats {
            results,
            n_success,
            success_rate,
            total_queries,
            mean_queries,
            total_wall_time,
        }
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }
}

/// Runs one untargeted ZOO-Adam attack on `x0` with true class `y`.
///
/// With `abort_early` the clean input is checked first (one query) and the
/// oracle's argmax is checked after every iteration, returning at the first
/// misclassification. Without it, a single query on the final iterate
/// decides success.
pub fn zoo_attack<S, O, C>(
    oracle: &O,
    x0: &FeatureVector<S>,
    y: usize,
    cfg: &ZooConfig,
    clock: &C,
) -> Result<AdversarialExample<S>>
where
    S: Scalar,
    O: Oracle<S> + ?Sized,
    C: Clock + ?Sized,
{
    let d = x0.len();
    cfg.validate(d)?;
    let lo = S::lit(cfg.clip_min);
    let hi = S::lit(cfg.clip_max);
    if x0.iter().any(|v| !(*v >= lo && *v <= hi)) {
        return Err(Error::invalid("attack input lies outside the clip box"));
    }
    let start = clock.now();
    let counted = CountingOracle::new(oracle);
    let predict = |x: &[S]| -> Result<usize> { Ok(argmax(&counted.query(x)?)) };

    let mut x = x0.to_vec();
    let mut iterations = 0;
    let mut predicted = None;
    if cfg.abort_early {
        let p = predict(&x)?;
        predicted = Some(p);
    }

    if predicted.is_none_or(|p| p == y) {
        let c = S::lit(cfg.c);
        let kappa = S::lit(cfg.kappa);
        let h = S::lit(cfg.variable_h);
        let mut rng = seed::rng(cfg.seed);
        let mut adam = vec![AdamState::<S>::default(); d];
        let mut grads = Vec::with_capacity(cfg.coord_batch);
        for it in 0..cfg.max_iter {
            let mut coords = index::sample(&mut rng, d, cfg.coord_batch).into_vec();
            coords.sort_unstable();
            grads.clear();
            for &i in &coords {
                let g = estimate_coord_gradient(
                    |z: &[S]| zoo_objective(z, x0, &counted, y, c, kappa),
                    &x,
                    i,
                    h,
                    Some((lo, hi)),
                )?;
                grads.push(g);
            }
            for (&i, &g) in coords.iter().zip(&grads) {
                let (delta, state) = adam_coord_update(adam[i], g, cfg);
                adam[i] = state;
                x[i] = (x[i] + delta).max(lo).min(hi);
            }
            iterations = it + 1;
            if cfg.abort_early {
                let p = predict(&x)?;
                predicted = Some(p);
                if p != y {
                    break;
                }
            }
        }
        if !cfg.abort_early {
            predicted = Some(predict(&x)?);
        }
    }

    let predicted_class_after = predicted.expect("prediction recorded on every path");
    let adversarial = FeatureVector::new(x);
    let l2_distortion = adversarial.l2_distance(x0);
    Ok(AdversarialExample {
        original: x0.clone(),
        adversarial,
        true_class: y,
        predicted_class_after,
        success: predicted_class_after != y,
        queries: counted.calls(),
        iterations,
        wall_time: clock.now() - start,
        l2_distortion,
    })
}

/// Attacks `examples` in order. After each completed example `stop` sees
/// the results so far and may end the batch. Example `i` is attacked with
/// a seed derived from `cfg.seed` and `i`.
pub fn attack_batch<S, O, C, F>(
    oracle: &O,
    examples: &[Sample<S>],
    cfg: &ZooConfig,
    clock: &C,
    mut stop: F,
) -> Result<BatchStats<S>>
where
    S: Scalar,
    O: Oracle<S> + ?Sized,
    C: Clock + ?Sized,
    F: FnMut(&[AdversarialExample<S>]) -> bool,
{
    let start = clock.now();
    let mut results = Vec::with_capacity(examples.len());
    for (i, s) in examples.iter().enumerate() {
        let cfg_i = ZooConfig {
            seed: seed::derive_seed(cfg.seed, i as u64),
            ..cfg.clone()
        };
        results.push(zoo_attack(oracle, &s.x, s.y, &cfg_i, clock)?);
        if stop(&results) {
            break;
        }
    }
    let total = clock.now() - start;
    Ok(BatchStats::from_results(results, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::FakeClock;
    use crate::zoo::FnOracle;

    fn threshold_oracle(x: &[f64]) -> Result<Vec<f64>> {
        Ok(if x[0] <= 0.5 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
    }

    #[test]
    fn already_misclassified_costs_one_query() {
        let o = FnOracle(|_: &[f64]| Ok(vec![0.1, 0.9]));
        let x = FeatureVector::new(vec![0.3; 10]);
        let r = zoo_attack(&o, &x, 0, &ZooConfig::default(), &FakeClock::new()).unwrap();
        assert!(r.success);
        assert_eq!(r.queries, 1);
        assert_eq!(r.adversarial, x);
        assert_eq!(r.l2_distortion, 0.0);
    }

    #[test]
    fn constant_oracle_query_accounting_without_abort() {
        let o = FnOracle(|_: &[f64]| Ok(vec![1.0, 0.0]));
        let cfg = ZooConfig {
            abort_early: false,
            ..ZooConfig::default()
        };
        let x = FeatureVector::new(vec![0.5; 10]);
        let r = zoo_attack(&o, &x, 0, &cfg, &FakeClock::new()).unwrap();
        assert!(!r.success);
        assert_eq!(r.queries, 1 + 50 * 10 * 2);
        assert_eq!(r.iterations, 50);
    }

    #[test]
    fn constant_oracle_query_accounting_with_abort() {
        let o = FnOracle(|_: &[f64]| Ok(vec![1.0, 0.0]));
        let x = FeatureVector::new(vec![0.5; 10]);
        let r = zoo_attack(&o, &x, 0, &ZooConfig::default(), &FakeClock::new()).unwrap();
        assert!(!r.success);
        assert_eq!(r.queries, 1 + 50 * (10 * 2 + 1));
    }

    #[test]
    fn crosses_a_single_threshold() {
        // the only boundary is x0 = 0.5; from 0.45 the minimal crossing
        // distortion is just over 0.05
        let o = FnOracle(|x: &[f64]| {
            Ok(if x[0] <= 0.5 { vec![0.9, 0.1] } else { vec![0.1, 0.9] })
        });
        let mut v = vec![0.5; 10];
        v[0] = 0.45;
        let x = FeatureVector::new(v);
        let r = zoo_attack(&o, &x, 0, &ZooConfig::default(), &FakeClock::new()).unwrap();
        assert!(r.success);
        assert!(r.adversarial[0] > 0.5);
        assert!(r.l2_distortion <= 0.2, "{}", r.l2_distortion);
        assert_eq!(threshold_oracle(&r.adversarial).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let o = FnOracle(threshold_oracle);
        let clock = FakeClock::new();
        let outside = FeatureVector::new(vec![1.5; 10]);
        assert!(zoo_attack(&o, &outside, 0, &ZooConfig::default(), &clock).is_err());
        let short = FeatureVector::new(vec![0.5; 4]);
        assert!(zoo_attack(&o, &short, 0, &ZooConfig::default(), &clock).is_err());
    }

    #[test]
    fn deterministic_up_to_wall_time() {
        let o = FnOracle(|x: &[f64]| {
            let s: f64 = x.iter().sum::<f64>() / x.len() as f64;
            Ok(vec![1.0 - s * 0.6, s * 0.6])
        });
        let x = FeatureVector::new(vec![0.4; 10]);
        let cfg = ZooConfig {
            coord_batch: 3,
            ..ZooConfig::default()
        };
        let a = zoo_attack(&o, &x, 0, &cfg, &FakeClock::new()).unwrap();
        let b = zoo_attack(&o, &x, 0, &cfg, &FakeClock::new()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_batch_has_zero_counts() {
        let o = FnOracle(threshold_oracle);
        let s = attack_batch(&o, &[], &ZooConfig::default(), &FakeClock::new(), |_| false).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.success_rate, 0.0);
        assert_eq!(s.total_queries, 0);
    }

    #[test]
    fn batch_totals_and_stop_hook() {
        let o = FnOracle(threshold_oracle);
        let rows: Vec<Sample<f64>> = (0..6)
            .map(|i| Sample {
                x: FeatureVector::new(vec![0.1 * i as f64; 10]),
                y: 0,
            })
            .collect();
        let cfg = ZooConfig::default();
        let all = attack_batch(&o, &rows, &cfg, &FakeClock::new(), |_| false).unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(
            all.total_queries,
            all.results.iter().map(|r| r.queries).sum::<u64>()
        );
        let part = attack_batch(&o, &rows, &cfg, &FakeClock::new(), |done| done.len() == 2).unwrap();
        assert_eq!(part.len(), 2);
        assert_eq!(part.results[..], all.results[..2]);
    }
}
