//! Node statistics and split gains for the three tree flavours.

use crate::scalar::Scalar;

/// Floor applied to `H + lambda` before dividing by it.
pub const HESSIAN_FLOOR: f64 = 1e-12;

pub(crate) trait SplitObjective<S: Scalar> {
    type Stats: Clone;

    fn zero(&self) -> Self::Stats;
    fn add(&self, stats: &mut Self::Stats, row: usize);
    fn count(&self, stats: &Self::Stats) -> usize;
    /// Improvement of splitting `total` into `left` and `total - left`.
    fn split_gain(&self, total: &Self::Stats, left: &Self::Stats) -> S;
    fn accepts(&self, gain: S) -> bool;
    fn is_pure(&self, stats: &Self::Stats) -> bool;
    fn leaf(&self, stats: &Self::Stats) -> Vec<S>;
}

/// Gini impurity over class labels. Squared error on one-hot targets yields
/// the same scores (node SSE equals `n * gini`), so both criteria use it.
pub(crate) struct ClassCounts<'a> {
    pub labels: &'a [usize],
    pub n_classes: usize,
}

#[derive(Clone)]
pub(crate) struct CountStats {
    counts: Vec<usize>,
    n: usize,
}

fn sq_over<S: Scalar>(counts: impl Iterator<Item = usize>, n: usize) -> S {
    if n == 0 {
        return S::zero();
    }
    let s: S = counts.map(|c| S::from_count(c) * S::from_count(c)).sum();
    s / S::from_count(n)
}

impl<S: Scalar> SplitObjective<S> for ClassCounts<'_> {
    type Stats = CountStats;

    fn zero(&self) -> CountStats {
        CountStats {
            counts: vec![0; self.n_classes],
            n: 0,
        }
    }

    fn add(&self, stats: &mut CountStats, row: usize) {
        stats.counts[self.labels[row]] += 1;
        stats.n += 1;
    }

    fn count(&self, stats: &CountStats) -> usize {
        stats.n
    }

    fn split_gain(&self, total: &CountStats, left: &CountStats) -> S {
        let nr = total.n - left.n;
        let l: S = sq_over(left.counts.iter().copied(), left.n);
        let r: S = sq_over(
            total.counts.iter().zip(&left.counts).map(|(t, l)| t - l),
            nr,
        );
        let p: S = sq_over(total.counts.iter().copied(), total.n);
        l + r - p
    }

    fn accepts(&self, _gain: S) -> bool {
        // impure nodes always split when a threshold exists
        true
    }

    fn is_pure(&self, stats: &CountStats) -> bool {
        stats.counts.contains(&stats.n)
    }

    fn leaf(&self, stats: &CountStats) -> Vec<S> {
        let n = S::from_count(stats.n.max(1));
        stats.counts.iter().map(|&c| S::from_count(c) / n).collect()
    }
}

/// Squared error against real-valued targets; leaves hold the mean.
pub(crate) struct SquaredError<'a, S> {
    pub targets: &'a [S],
}

#[derive(Clone)]
pub(crate) struct SumStats<S> {
    sum: S,
    n: usize,
    min: S,
    max: S,
}

impl<S: Scalar> SplitObjective<S> for SquaredError<'_, S> {
    type Stats = SumStats<S>;

    fn zero(&self) -> SumStats<S> {
        SumStats {
            sum: S::zero(),
            n: 0,
            min: S::infinity(),
            max: S::neg_infinity(),
        }
    }

    fn add(&self, stats: &mut SumStats<S>, row: usize) {
        let t = self.targets[row];
        stats.sum = stats.sum + t;
        stats.n += 1;
        stats.min = stats.min.min(t);
        stats.max = stats.max.max(t);
    }

    fn count(&self, stats: &SumStats<S>) -> usize {
        stats.n
    }

    fn split_gain(&self, total: &SumStats<S>, left: &SumStats<S>) -> S {
        let nr = total.n - left.n;
        let right = total.sum - left.sum;
        left.sum * left.sum / S::from_count(left.n) + right * right / S::from_count(nr)
            - total.sum * total.sum / S::from_count(total.n)
    }

    fn accepts(&self, _gain: S) -> bool {
        true
    }

    fn is_pure(&self, stats: &SumStats<S>) -> bool {
        stats.n == 0 || stats.min == stats.max
    }

    fn leaf(&self, stats: &SumStats<S>) -> Vec<S> {
        vec![stats.sum / S::from_count(stats.n.max(1))]
    }
}

/// Second-order objective: summed gradients and hessians with L2 weight
/// penalty `lambda` and per-split cost `gamma`.
pub(crate) struct GradHess<'a, S> {
    pub grad: &'a [S],
    pub hess: &'a [S],
    pub lambda: S,
    pub gamma: S,
}

#[derive(Clone)]
pub(crate) struct GradHessStats<S> {
    g: S,
    h: S,
    n: usize,
}

impl<S: Scalar> GradHess<'_, S> {
    fn half_score(&self, g: S, h: S) -> S {
        let denom = (h + self.lambda).max(S::lit(HESSIAN_FLOOR));
        g * g / denom
    }
}

/// Optimal leaf weight `-G / (H + lambda)`, with `H + lambda` floored.
pub fn leaf_weight<S: Scalar>(g: S, h: S, lambda: S) -> S {
    -g / (h + lambda).max(S::lit(HESSIAN_FLOOR))
}

/// `0.5 * [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)] - gamma`.
pub fn split_gain<S: Scalar>(gl: S, hl: S, gr: S, hr: S, lambda: S, gamma: S) -> S {
    let obj = GradHess {
        grad: &[],
        hess: &[],
        lambda,
        gamma,
    };
    S::lit(0.5)
        * (obj.half_score(gl, hl) + obj.half_score(gr, hr) - obj.half_score(gl + gr, hl + hr))
        - gamma
}

impl<S: Scalar> SplitObjective<S> for GradHess<'_, S> {
    type Stats = GradHessStats<S>;

    fn zero(&self) -> GradHessStats<S> {
        GradHessStats {
            g: S::zero(),
            h: S::zero(),
            n: 0,
        }
    }

    fn add(&self, stats: &mut GradHessStats<S>, row: usize) {
        stats.g = stats.g + self.grad[row];
        stats.h = stats.h + self.hess[row];
        stats.n += 1;
    }

    fn count(&self, stats: &GradHessStats<S>) -> usize {
        stats.n
    }

    fn split_gain(&self, total: &GradHessStats<S>, left: &GradHessStats<S>) -> S {
        S::lit(0.5)
            * (self.half_score(left.g, left.h)
                + self.half_score(total.g - left.g, total.h - left.h)
                - self.half_score(total.g, total.h))
            - self.gamma
    }

    fn accepts(&self, gain: S) -> bool {
        gain > S::zero()
    }

    fn is_pure(&self, stats: &GradHessStats<S>) -> bool {
        stats.n < 2
    }

    fn leaf(&self, stats: &GradHessStats<S>) -> Vec<S> {
        vec![leaf_weight(stats.g, stats.h, self.lambda)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_leaf_weight() {
        assert!((leaf_weight(2.0f64, 4.0, 1.0) + 0.4).abs() < 1e-15);
        // H + lambda == 0 hits the floor instead of dividing by zero
        assert!(leaf_weight(1.0f64, 0.0, 0.0).is_finite());
    }

    #[test]
    fn identical_children_gain_is_minus_gamma() {
        // lambda = 0: the two halves exactly cancel the parent term
        assert!((split_gain(1.5f64, 2.0, 1.5, 2.0, 0.0, 0.25) + 0.25).abs() < 1e-12);
        // lambda > 0 only pushes the gain further below -gamma
        assert!(split_gain(1.5f64, 2.0, 1.5, 2.0, 1.0, 0.25) < -0.25);

        let obj = GradHess {
            grad: &[1.0f64, 1.0],
            hess: &[1.0, 1.0],
            lambda: 0.0,
            gamma: 0.3,
        };
        let mut total = SplitObjective::<f64>::zero(&obj);
        obj.add(&mut total, 0);
        obj.add(&mut total, 1);
        let mut left = SplitObjective::<f64>::zero(&obj);
        obj.add(&mut left, 0);
        let gain: f64 = obj.split_gain(&total, &left);
        assert!((gain + 0.3).abs() < 1e-12);
        assert!(!obj.accepts(gain));
        let no_gamma = GradHess { gamma: 0.0, ..obj };
        let gain: f64 = no_gamma.split_gain(&total, &left);
        assert!(gain.abs() < 1e-12);
        assert!(!no_gamma.accepts(gain));
    }

    #[test]
    fn gini_gain_of_perfect_split() {
        let labels = [0, 0, 1, 1];
        let obj = ClassCounts {
            labels: &labels,
            n_classes: 2,
        };
        let mut total = SplitObjective::<f64>::zero(&obj);
        for r in 0..4 {
            SplitObjective::<f64>::add(&obj, &mut total, r);
        }
        let mut left = SplitObjective::<f64>::zero(&obj);
        SplitObjective::<f64>::add(&obj, &mut left, 0);
        SplitObjective::<f64>::add(&obj, &mut left, 1);
        // n * gini: parent 4 * 0.5 = 2, children 0
        let gain: f64 = obj.split_gain(&total, &left);
        assert!((gain - 2.0).abs() < 1e-12);
    }
}
