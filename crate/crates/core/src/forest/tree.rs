use std::cmp::Ordering;

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::objective::{ClassCounts, GradHess, SplitObjective, SquaredError};
use crate::candata::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub enum Node<S> {
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: S,
        left: usize,
        right: usize,
    },
    /// Class distribution (classification) or a single value (regression).
    Leaf { value: Vec<S> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    Gini,
    SquaredError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub criterion: Criterion,
    /// Features considered per split; `None` considers all of them.
    pub max_features: Option<usize>,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            criterion: Criterion::Gini,
            max_features: None,
            seed: 0,
        }
    }
}

/// Binary CART tree stored as a flat node array with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct DecisionTree<S> {
    nodes: Vec<Node<S>>,
    n_features: usize,
    max_depth: Option<usize>,
}

impl<S: Scalar> DecisionTree<S> {
    pub fn nodes(&self) -> &[Node<S>] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn max_depth(&self) -> Option<usize> {
        self.max_depth
    }

    /// Leaf payload reached by `x`. `x` must have `n_features` entries.
    #[inline]
    pub fn leaf_value(&self, x: &[S]) -> &[S] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { value } => return value,
            }
        }
    }

    /// Output of a regression tree.
    #[inline]
    pub fn predict_value(&self, x: &[S]) -> S {
        self.leaf_value(x)[0]
    }

    pub fn depth(&self) -> usize {
        fn walk<S>(nodes: &[Node<S>], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub(crate) fn scale_leaves(&mut self, factor: S) {
        for n in &mut self.nodes {
            if let Node::Leaf { value } = n {
                for v in value.iter_mut() {
                    *v = *v * factor;
                }
            }
        }
    }

    /// Checks the structural invariants: every node except the root has
    /// exactly one parent, children come after their parent (so there are
    /// no cycles), features are in range and leaf payloads have `leaf_len`
    /// entries.
    pub fn validate(&self, leaf_len: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::invalid("tree has no nodes"));
        }
        let mut parents = vec![0u32; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            match n {
                Node::Split {
                    feature,
                    left,
                    right,
                    ..
                } => {
                    if *feature >= self.n_features {
                        return Err(Error::invalid(format!("node {i}: feature {feature} out of range")));
                    }
                    for &c in [left, right] {
                        if c <= i || c >= self.nodes.len() {
                            return Err(Error::invalid(format!("node {i}: bad child {c}")));
                        }
                        parents[c] += 1;
                    }
                }
                Node::Leaf { value } => {
                    if value.len() != leaf_len {
                        return Err(Error::invalid(format!("node {i}: leaf of length {}", value.len())));
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err(Error::invalid("nodes do not form a single rooted tree"));
        }
        Ok(())
    }
}

struct Candidate<S> {
    feature: usize,
    threshold: S,
    gain: S,
}

struct Builder<'a, S: Scalar, O> {
    x: Vec<&'a [S]>,
    objective: &'a O,
    max_depth: usize,
    min_leaf: usize,
    max_features: Option<usize>,
    n_features: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node<S>>,
    scratch: Vec<(S, usize)>,
}

impl<S: Scalar, O: SplitObjective<S>> Builder<'_, S, O> {
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let mut stats = self.objective.zero();
        for &r in &rows {
            self.objective.add(&mut stats, r);
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: Vec::new() });

        let splittable = depth < self.max_depth
            && rows.len() >= 2 * self.min_leaf
            && !self.objective.is_pure(&stats);
        if splittable {
            if let Some(best) = self.best_split(&rows, &stats) {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                    .into_iter()
                    .partition(|&r| self.x[r][best.feature] <= best.threshold);
                let left = self.build(left_rows, depth + 1);
                let right = self.build(right_rows, depth + 1);
                self.nodes[id] = Node::Split {
                    feature: best.feature,
                    threshold: best.threshold,
                    left,
                    right,
                };
                return id;
            }
        }
        self.nodes[id] = Node::Leaf {
            value: self.objective.leaf(&stats),
        };
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        match self.max_features {
            Some(m) if m < self.n_features => {
                let mut f = index::sample(&mut self.rng, self.n_features, m.max(1)).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..self.n_features).collect(),
        }
    }

    /// Highest-gain split; ties keep the lowest feature, then the lowest
    /// threshold.
    fn best_split(&mut self, rows: &[usize], total: &O::Stats) -> Option<Candidate<S>> {
        let n = rows.len();
        let mut best: Option<Candidate<S>> = None;
        let mut scratch = std::mem::take(&mut self.scratch);
        for feature in self.candidate_features() {
            scratch.clear();
            scratch.extend(rows.iter().map(|&r| (self.x[r][feature], r)));
            scratch.sort_unstable_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .unwrap_or(Ordering::Equal)
                    .then(a.1.cmp(&b.1))
            });
            let mut left = self.objective.zero();
            for i in 0..n - 1 {
                self.objective.add(&mut left, scratch[i].1);
                let n_left = i + 1;
                if n_left < self.min_leaf {
                    continue;
                }
                if n - n_left < self.min_leaf {
                    break;
                }
                let (lo, hi) = (scratch[i].0, scratch[i + 1].0);
                if !(lo < hi) {
                    continue;
                }
                debug_assert_eq!(self.objective.count(&left), n_left);
                let gain = self.objective.split_gain(total, &left);
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mut threshold = lo + (hi - lo) / S::lit(2.0);
                    if !(threshold < hi) {
                        threshold = lo;
                    }
                    best = Some(Candidate {
                        feature,
                        threshold,
                        gain,
                    });
                }
            }
        }
        self.scratch = scratch;
        best.filter(|b| self.objective.accepts(b.gain))
    }
}

fn grow<S: Scalar, O: SplitObjective<S>>(
    x: Vec<&[S]>,
    n_features: usize,
    objective: &O,
    params: &TreeParams,
) -> Result<DecisionTree<S>> {
    if x.is_empty() {
        return Err(Error::invalid("cannot fit a tree on an empty dataset"));
    }
    if n_features == 0 {
        return Err(Error::invalid("cannot fit a tree without features"));
    }
    let rows: Vec<usize> = (0..x.len()).collect();
    let mut b = Builder {
        x,
        objective,
        max_depth: params.max_depth.unwrap_or(usize::MAX),
        min_leaf: params.min_samples_leaf.max(1),
        max_features: params.max_features,
        n_features,
        rng: seed::rng(params.seed),
        nodes: Vec::new(),
        scratch: Vec::new(),
    };
    b.build(rows, 0);
    Ok(DecisionTree {
        nodes: b.nodes,
        n_features,
        max_depth: params.max_depth,
    })
}

/// Classification CART on `ds`. Leaves hold class frequencies.
pub fn fit_tree<S: Scalar>(ds: &LabeledDataset<S>, params: &TreeParams) -> Result<DecisionTree<S>> {
    let labels: Vec<usize> = ds.labels().collect();
    fit_tree_on(ds, &labels, params)
}

/// Classification CART on the rows of `ds` listed in `sample` (repeats
/// allowed, as in a bootstrap resample).
pub(crate) fn fit_tree_on_sample<S: Scalar>(
    ds: &LabeledDataset<S>,
    sample: &[usize],
    params: &TreeParams,
) -> Result<DecisionTree<S>> {
    let x: Vec<&[S]> = sample.iter().map(|&i| &ds.row(i).x[..]).collect();
    let labels: Vec<usize> = sample.iter().map(|&i| ds.row(i).y).collect();
    let objective = ClassCounts {
        labels: &labels,
        n_classes: ds.n_classes(),
    };
    grow(x, ds.n_features(), &objective, params)
}

fn fit_tree_on<S: Scalar>(
    ds: &LabeledDataset<S>,
    labels: &[usize],
    params: &TreeParams,
) -> Result<DecisionTree<S>> {
    let x: Vec<&[S]> = ds.rows().iter().map(|r| &r.x[..]).collect();
    let objective = ClassCounts {
        labels,
        n_classes: ds.n_classes(),
    };
    // Gini and one-hot squared error rank splits identically.
    grow(x, ds.n_features(), &objective, params)
}

/// Squared-error regression tree on `targets`; leaves hold target means.
pub(crate) fn fit_regression_tree<S: Scalar>(
    x: Vec<&[S]>,
    n_features: usize,
    targets: &[S],
    params: &TreeParams,
) -> Result<DecisionTree<S>> {
    grow(x, n_features, &SquaredError { targets }, params)
}

/// Second-order tree: leaf weights `-G/(H+lambda)`, splits kept only when
/// the regularized gain is positive.
pub(crate) fn fit_second_order_tree<S: Scalar>(
    x: Vec<&[S]>,
    n_features: usize,
    grad: &[S],
    hess: &[S],
    lambda: S,
    gamma: S,
    params: &TreeParams,
) -> Result<DecisionTree<S>> {
    let objective = GradHess {
        grad,
        hess,
        lambda,
        gamma,
    };
    grow(x, n_features, &objective, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candata::FeatureVector;

    fn ds(points: &[(&[f64], usize)], n_classes: usize) -> LabeledDataset<f64> {
        let names = (0..n_classes).map(|i| format!("c{i}")).collect();
        LabeledDataset::from_rows(
            names,
            points[0].0.len(),
            points.iter().map(|(x, y)| (FeatureVector::new(x.to_vec()), *y)),
        )
        .unwrap()
    }

    #[test]
    fn single_class_is_one_leaf() {
        let d = ds(&[(&[0.1], 1), (&[0.5], 1), (&[0.9], 1)], 2);
        let t = fit_tree(&d, &TreeParams::default()).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.leaf_value(&[0.3]), &[0.0, 1.0]);
    }

    #[test]
    fn xor_is_fit_exactly_at_depth_two() {
        // Every single axis split of XOR has zero Gini gain; the root split
        // is still taken (lowest feature, lowest threshold) and both
        // children then separate perfectly on the other feature.
        let d = ds(
            &[(&[0.0, 0.0], 0), (&[0.0, 1.0], 1), (&[1.0, 0.0], 1), (&[1.0, 1.0], 0)],
            2,
        );
        let t = fit_tree(
            &d,
            &TreeParams {
                max_depth: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        for r in d.rows() {
            let dist = t.leaf_value(&r.x);
            assert_eq!(dist[r.y], 1.0);
        }
        assert_eq!(t.depth(), 2);
        match &t.nodes()[0] {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 0.5);
            }
            _ => panic!("root should split"),
        }
    }

    #[test]
    fn depth_zero_is_global_frequencies() {
        let d = ds(&[(&[0.1], 0), (&[0.2], 0), (&[0.3], 1), (&[0.4], 2)], 3);
        let t = fit_tree(
            &d,
            &TreeParams {
                max_depth: Some(0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.leaf_value(&[0.0]), &[0.5, 0.25, 0.25]);
    }

    #[test]
    fn empty_and_featureless_inputs_fail() {
        let empty = LabeledDataset::<f64>::new(vec!["a".into()], 2).unwrap();
        assert!(fit_tree(&empty, &TreeParams::default()).is_err());
        let no_features = ds(&[(&[], 0)], 1);
        assert!(fit_tree(&no_features, &TreeParams::default()).is_err());
    }

    #[test]
    fn thresholds_are_midpoints() {
        let d = ds(&[(&[0.2], 0), (&[0.4], 0), (&[0.6], 1), (&[0.8], 1)], 2);
        let t = fit_tree(&d, &TreeParams::default()).unwrap();
        match &t.nodes()[0] {
            Node::Split { threshold, .. } => assert!((threshold - 0.5).abs() < 1e-15),
            _ => panic!(),
        }
        t.validate(2).unwrap();
    }

    #[test]
    fn min_samples_leaf_is_respected() {
        let d = ds(
            &[(&[0.1], 0), (&[0.2], 1), (&[0.3], 0), (&[0.4], 1), (&[0.5], 0), (&[0.6], 1)],
            2,
        );
        let t = fit_tree(
            &d,
            &TreeParams {
                min_samples_leaf: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(t.n_leaves() <= 2);
    }

    #[test]
    fn second_order_leaf_matches_closed_form() {
        // single split on x: left rows carry G=2,H=4; right rows G=-3,H=2
        let xs = [[0.0f64], [0.1], [0.9], [1.0]];
        let x: Vec<&[f64]> = xs.iter().map(|r| &r[..]).collect();
        let grad = [1.0, 1.0, -1.5, -1.5];
        let hess = [2.0, 2.0, 1.0, 1.0];
        let t = fit_second_order_tree(
            x,
            1,
            &grad,
            &hess,
            1.0,
            0.0,
            &TreeParams {
                max_depth: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        assert!((t.predict_value(&[0.0]) - (-2.0 / 5.0)).abs() < 1e-12);
        assert!((t.predict_value(&[1.0]) - (3.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn second_order_rejects_split_when_gamma_dominates() {
        let xs = [[0.0f64], [1.0]];
        let x: Vec<&[f64]> = xs.iter().map(|r| &r[..]).collect();
        let t = fit_second_order_tree(x, 1, &[1.0, -1.0], &[1.0, 1.0], 1.0, 10.0, &TreeParams::default())
            .unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict_value(&[0.0]), 0.0);
    }

    #[test]
    fn validate_catches_broken_structure() {
        let t = DecisionTree::<f64> {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    threshold: 0.5,
                    left: 1,
                    right: 1,
                },
                Node::Leaf { value: vec![1.0] },
            ],
            n_features: 1,
            max_depth: None,
        };
        assert!(t.validate(1).is_err());
    }
}
