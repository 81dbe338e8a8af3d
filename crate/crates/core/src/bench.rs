//! Timing harness: budgeted attack throughput, extrapolation to the full
//! workload, estimator-count sweeps and least-squares trend fits.
//!
//! Everything here reads time through an injected [`Clock`], so tests can
//! replace wall time with a fake and get exact answers.

use serde::{Deserialize, Serialize};

use crate::candata::{DataSplits, LabeledDataset, Sample};
use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::forest::{fit_model, EnsembleModel, ModelKind, ModelSpec};
use crate::scalar::Scalar;
use crate::seed::derive_seed;
use crate::zoo::{zoo_attack, Oracle, ZooConfig};

/// Adversarial examples generated for one full-scale attack run.
pub const FULL_SCALE_ADV_EXAMPLES: usize = 92_270;
/// Rows in the full-scale adversarial training set A ∪ B ∪ B′.
pub const FULL_SCALE_AT_ROWS: usize = 461_350;
/// Measurement window per sweep point, in seconds.
pub const DEFAULT_BUDGET_S: f64 = 300.0;
pub const DEFAULT_N_TARGET: usize = FULL_SCALE_ADV_EXAMPLES;

/// `1, 5, 10, ..., 105`.
pub fn default_grid() -> Vec<usize> {
    std::iter::once(1).chain((5..=105).step_by(5)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    pub n_done: usize,
    pub elapsed: f64,
}

/// Runs work items `0..n_available` in order until the clock shows at least
/// `budget` seconds since the start. The item in flight when the budget runs
/// out completes and counts, so `elapsed` may overshoot the budget.
pub fn measure_throughput<C, F>(n_available: usize, budget: f64, clock: &C, mut run_one: F) -> Result<Throughput>
where
    C: Clock + ?Sized,
    F: FnMut(usize) -> Result<()>,
{
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::config(format!("budget must be > 0 seconds, got {budget}")));
    }
    if n_available == 0 {
        return Err(Error::invalid("nothing to measure: no examples"));
    }
    let start = clock.now();
    let mut n_done = 0;
    let mut elapsed = 0.0;
    for i in 0..n_available {
        run_one(i)?;
        n_done += 1;
        elapsed = clock.now() - start;
        if elapsed >= budget {
            break;
        }
    }
    Ok(Throughput { n_done, elapsed })
}

/// Attacks `examples` against `oracle` until `budget` seconds have passed,
/// wrapping around to the first example when the list is exhausted, for
/// at most `max_attacks` attacks. Attack `i` targets example
/// `i % examples.len()` with a seed derived from `zoo.seed` and `i`.
pub fn measure_oracle_throughput<S, O, C>(
    oracle: &O,
    examples: &[Sample<S>],
    budget: f64,
    max_attacks: usize,
    zoo: &ZooConfig,
    clock: &C,
) -> Result<Throughput>
where
    S: Scalar,
    O: Oracle<S> + ?Sized,
    C: Clock + ?Sized,
{
    if examples.is_empty() {
        return Err(Error::invalid("nothing to measure: no examples"));
    }
    measure_throughput(max_attacks, budget, clock, |i| {
        let cfg = ZooConfig {
            seed: derive_seed(zoo.seed, i as u64),
            ..zoo.clone()
        };
        let s = &examples[i % examples.len()];
        zoo_attack(oracle, &s.x, s.y, &cfg, clock).map(|_| ())
    })
}

/// [`measure_oracle_throughput`] against a fitted model, capped at the
/// full-scale workload. Models configured for parallel execution are
/// refused.
pub fn measure_attack_throughput<S, C>(
    model: &EnsembleModel<S>,
    examples: &[Sample<S>],
    budget: f64,
    zoo: &ZooConfig,
    clock: &C,
) -> Result<Throughput>
where
    S: Scalar,
    C: Clock + ?Sized,
{
    require_sequential(model.spec())?;
    measure_oracle_throughput(model, examples, budget, DEFAULT_N_TARGET, zoo, clock)
}

fn require_sequential(spec: &ModelSpec) -> Result<()> {
    if spec.is_parallel() {
        Err(Error::config("timing runs must be single-threaded; disable the parallel flag"))
    } else {
        Ok(())
    }
}

/// Scales a measured rate to `n_target` examples: `elapsed * (n_target / n_done)`.
pub fn extrapolate_total_time(n_done: usize, elapsed: f64, n_target: usize) -> Result<f64> {
    if n_done == 0 {
        return Err(Error::invalid("cannot extrapolate from zero completed examples"));
    }
    if n_target == 0 {
        return Err(Error::invalid("n_target must be >= 1"));
    }
    if !(elapsed.is_finite() && elapsed >= 0.0) {
        return Err(Error::invalid(format!("elapsed must be a finite non-negative time, got {elapsed}")));
    }
    Ok(elapsed * (n_target as f64 / n_done as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    /// Seconds per estimator.
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n_points: usize,
}

impl RegressionFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Closed-form ordinary least squares. `r2` is 1 when all `y` are equal.
pub fn fit_linear_regression(points: &[(f64, f64)]) -> Result<RegressionFit> {
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::invalid("regression points must be finite"));
    }
    let n = points.len() as f64;
    let first_x = points.first().map(|p| p.0);
    if points.len() < 2 || points.iter().all(|p| Some(p.0) == first_x) {
        return Err(Error::invalid("regression needs at least two distinct x values"));
    }
    let y0 = points[0].1;
    if points.iter().all(|p| p.1 == y0) {
        return Ok(RegressionFit {
            slope: 0.0,
            intercept: y0,
            r2: 1.0,
            n_points: points.len(),
        });
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(RegressionFit {
        slope,
        intercept,
        r2,
        n_points: points.len(),
    })
}

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub model: ModelKind,
    /// `n_trees` or `n_rounds`.
    pub param: String,
    pub value: usize,
    pub n_done: usize,
    pub elapsed: f64,
    pub est_total: f64,
    /// Adversarial-training fit time, for training sweeps.
    pub at_time: Option<f64>,
}

impl SweepRecord {
    /// The quantity a sweep regresses on its grid value.
    pub fn y(&self) -> f64 {
        self.at_time.unwrap_or(self.est_total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    /// Absent when fewer than two grid values were measured.
    pub fit: Option<RegressionFit>,
}

/// Least-squares fit of `y()` on `value`, if the records allow one.
pub fn fit_records(records: &[SweepRecord]) -> Option<RegressionFit> {
    let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.value as f64, r.y())).collect();
    fit_linear_regression(&pts).ok()
}

pub fn validate_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config("sweep grid is empty"));
    }
    if grid[0] == 0 {
        return Err(Error::config("sweep grid values must be >= 1"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("sweep grid must be strictly increasing"));
    }
    Ok(())
}

/// For each grid value: fit on A with that many estimators, attack rows of
/// B within `budget`, and extrapolate to `n_target` examples.
pub fn run_attack_time_sweep<S, C>(
    splits: &DataSplits<S>,
    spec: &ModelSpec,
    grid: &[usize],
    zoo: &ZooConfig,
    budget: f64,
    n_target: usize,
    clock: &C,
) -> Result<SweepResult>
where
    S: Scalar,
    C: Clock + ?Sized,
{
    validate_grid(grid)?;
    require_sequential(spec)?;
    let mut records = Vec::with_capacity(grid.len());
    for &value in grid {
        let spec_v = spec.with_n_estimators(value);
        let (model, _) = fit_model(&splits.a, &spec_v)?;
        let t = measure_oracle_throughput(&model, splits.b.rows(), budget, n_target, zoo, clock)?;
        log::info!(
            "{} {}={value}: {} attacks in {:.3} s",
            spec.kind(),
            spec.estimator_param(),
            t.n_done,
            t.elapsed
        );
        records.push(SweepRecord {
            model: spec.kind(),
            param: spec.estimator_param().to_string(),
            value,
            n_done: t.n_done,
            elapsed: t.elapsed,
            est_total: extrapolate_total_time(t.n_done, t.elapsed, n_target)?,
            at_time: None,
        });
    }
    let fit = fit_records(&records);
    Ok(SweepResult { records, fit })
}

/// Attacks every row of B against a model fitted on A with `value`
/// estimators and returns the adversarial set.
pub fn b_prime_for_value<S, C>(
    splits: &DataSplits<S>,
    spec: &ModelSpec,
    value: usize,
    zoo: &ZooConfig,
    clock: &C,
) -> Result<LabeledDataset<S>>
where
    S: Scalar,
    C: Clock + ?Sized,
{
    let (model, _) = fit_model(&splits.a, &spec.with_n_estimators(value))?;
    let stats = crate::zoo::attack_batch(&model, splits.b.rows(), zoo, clock, |_| false)?;
    crate::pipeline::adversarial_dataset(&stats, &splits.b)
}

/// For each grid value: time one fit on A ∪ B ∪ B′, where `b_prime(value)`
/// supplies B′.
pub fn run_at_time_sweep<S, C, F>(
    splits: &DataSplits<S>,
    spec: &ModelSpec,
    grid: &[usize],
    mut b_prime: F,
    clock: &C,
) -> Result<SweepResult>
where
    S: Scalar,
    C: Clock + ?Sized,
    F: FnMut(usize) -> Result<LabeledDataset<S>>,
{
    validate_grid(grid)?;
    require_sequential(spec)?;
    let mut records = Vec::with_capacity(grid.len());
    for &value in grid {
        let bp = b_prime(value)?;
        let train = crate::pipeline::adversarial_training_set(splits, &bp)?;
        let spec_v = spec.with_n_estimators(value);
        let t0 = clock.now();
        fit_model(&train, &spec_v)?;
        let at = clock.now() - t0;
        log::info!("{} {}={value}: training on {} rows took {at:.3} s", spec.kind(), spec.estimator_param(), train.len());
        records.push(SweepRecord {
            model: spec.kind(),
            param: spec.estimator_param().to_string(),
            value,
            n_done: 0,
            elapsed: at,
            est_total: at,
            at_time: Some(at),
        });
    }
    let fit = fit_records(&records);
    Ok(SweepResult { records, fit })
}
