use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;

/// A = 60%, B = 20%, C = 20%.
pub const DEFAULT_SPLIT_RATIOS: [f64; 3] = [0.6, 0.2, 0.2];
pub const DEFAULT_SPLIT_SEED: u64 = 42;

/// Disjoint, stratified A/B/C partition of a source dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSplits<S> {
    pub a: LabeledDataset<S>,
    pub b: LabeledDataset<S>,
    pub c: LabeledDataset<S>,
    /// Source row indices of each split, in split order.
    pub indices: [Vec<usize>; 3],
}

impl<S: Scalar> DataSplits<S> {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.a.len(), self.b.len(), self.c.len())
    }
}

/// Largest-remainder apportionment of `total` by `weights` (summing to 1).
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let ideal: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut out: Vec<usize> = ideal.iter().map(|v| (v + 1e-9).floor() as usize).collect();
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| {
        let fi = ideal[i] - out[i] as f64;
        let fj = ideal[j] - out[j] as f64;
        fj.total_cmp(&fi).then(i.cmp(&j))
    });
    for &j in order.iter().take(total.saturating_sub(assigned)) {
        out[j] += 1;
    }
    out
}

/// Augmenting-path max flow on a dense residual matrix.
struct FlowGraph {
    cap: Vec<Vec<i64>>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        FlowGraph {
            cap: vec![vec![0; n]; n],
        }
    }

    fn augment(&mut self, source: usize, sink: usize) -> i64 {
        let n = self.cap.len();
        let mut total = 0;
        loop {
            let mut parent = vec![usize::MAX; n];
            parent[source] = source;
            let mut queue = std::collections::VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                for v in 0..n {
                    if parent[v] == usize::MAX && self.cap[u][v] > 0 {
                        parent[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if parent[sink] == usize::MAX {
                return total;
            }
            let mut bottleneck = i64::MAX;
            let mut v = sink;
            while v != source {
                let u = parent[v];
                bottleneck = bottleneck.min(self.cap[u][v]);
                v = u;
            }
            let mut v = sink;
            while v != source {
                let u = parent[v];
                self.cap[u][v] -= bottleneck;
                self.cap[v][u] += bottleneck;
                v = u;
            }
            total += bottleneck;
        }
    }
}

/// Integer class-by-split allocation whose rows sum to the class sizes, whose
/// columns sum to `totals`, and whose every cell is within 1 of the
/// proportional share.
fn allocate(class_sizes: &[usize], ratios: &[f64; 3], totals: &[usize]) -> Result<Vec<[usize; 3]>> {
    let k = class_sizes.len();
    let mut alloc = vec![[0usize; 3]; k];
    let mut frac = vec![[0f64; 3]; k];
    for (c, &n) in class_sizes.iter().enumerate() {
        for j in 0..3 {
            let ideal = n as f64 * ratios[j];
            alloc[c][j] = (ideal + 1e-9).floor() as usize;
            frac[c][j] = (ideal - alloc[c][j] as f64).max(0.0);
        }
    }

    // source = 0, classes 1..=k, splits k+1..=k+3, sink = k+4
    let source = 0;
    let sink = k + 4;
    let mut g = FlowGraph::new(k + 5);
    let mut need = 0i64;
    for (c, &n) in class_sizes.iter().enumerate() {
        let floor_sum: usize = alloc[c].iter().sum();
        let deficit = n
            .checked_sub(floor_sum)
            .ok_or_else(|| Error::invalid("split ratios exceed 1"))?;
        g.cap[source][1 + c] = deficit as i64;
        need += deficit as i64;
    }
    for j in 0..3 {
        let floor_sum: usize = alloc.iter().map(|a| a[j]).sum();
        let deficit = totals[j]
            .checked_sub(floor_sum)
            .ok_or_else(|| Error::invalid("split totals inconsistent with class sizes"))?;
        g.cap[k + 1 + j][sink] = deficit as i64;
    }
    // Round up fractional cells first; fall back to exact cells only if needed.
    for c in 0..k {
        for j in 0..3 {
            if frac[c][j] > 1e-12 {
                g.cap[1 + c][k + 1 + j] = 1;
            }
        }
    }
    let mut flow = g.augment(source, sink);
    if flow < need {
        for c in 0..k {
            for j in 0..3 {
                if frac[c][j] <= 1e-12 && g.cap[k + 1 + j][1 + c] == 0 {
                    g.cap[1 + c][k + 1 + j] = 1;
                }
            }
        }
        flow += g.augment(source, sink);
    }
    if flow != need {
        return Err(Error::invalid("no stratified allocation satisfies the split sizes"));
    }
    for (c, row) in alloc.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            // reverse residual capacity holds the flow pushed through the edge
            *cell += g.cap[k + 1 + j][1 + c] as usize;
        }
    }
    Ok(alloc)
}

/// Seeded, stratified three-way split (A, B, C).
pub fn split_dataset<S: Scalar>(
    ds: &LabeledDataset<S>,
    ratios: [f64; 3],
    seed: u64,
) -> Result<DataSplits<S>> {
    if ds.is_empty() {
        return Err(Error::invalid("cannot split an empty dataset"));
    }
    if ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::invalid(format!("bad split ratios {ratios:?}")));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("split ratios sum to {sum}, not 1")));
    }

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.n_classes()];
    for (i, y) in ds.labels().enumerate() {
        by_class[y].push(i);
    }
    if let Some((c, members)) = by_class
        .iter()
        .enumerate()
        .find(|(_, m)| !m.is_empty() && m.len() < 3)
    {
        return Err(Error::invalid(format!(
            "class {:?} has {} rows; stratified splitting needs at least 3",
            ds.class_names()[c],
            members.len()
        )));
    }

    let sizes: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let totals = apportion(ds.len(), &ratios);
    let alloc = allocate(&sizes, &ratios, &totals)?;

    let mut rng = seed::rng(seed);
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (members, counts) in by_class.iter_mut().zip(&alloc) {
        members.shuffle(&mut rng);
        let mut rest = members.as_slice();
        for (part, &n) in parts.iter_mut().zip(counts) {
            let (take, tail) = rest.split_at(n);
            part.extend_from_slice(take);
            rest = tail;
        }
    }
    for part in parts.iter_mut() {
        part.shuffle(&mut rng);
    }

    Ok(DataSplits {
        a: ds.subset(&parts[0]),
        b: ds.subset(&parts[1]),
        c: ds.subset(&parts[2]),
        indices: parts,
    })
}

/// One stratified cross-validation fold.
#[derive(Debug, Clone)]
pub struct Fold<S> {
    pub train: LabeledDataset<S>,
    pub validation: LabeledDataset<S>,
    pub validation_indices: Vec<usize>,
}

/// Stratified k-fold partition. Rows of each class are dealt round-robin
/// across folds, continuing where the previous class stopped, so fold sizes
/// differ by at most one and per-fold class counts are floor or ceil of the
/// proportional share.
pub fn stratified_kfold<S: Scalar>(ds: &LabeledDataset<S>, k: usize) -> Result<Vec<Fold<S>>> {
    if k < 2 {
        return Err(Error::invalid(format!("k-fold needs k >= 2, got {k}")));
    }
    let counts = ds.class_counts();
    if let Some((c, &n)) = counts.iter().enumerate().find(|(_, &n)| n > 0 && n < k) {
        return Err(Error::invalid(format!(
            "class {:?} has {n} rows, fewer than k = {k}",
            ds.class_names()[c]
        )));
    }
    if ds.is_empty() {
        return Err(Error::invalid("cannot fold an empty dataset"));
    }

    let mut fold_of = vec![0usize; ds.len()];
    let mut offset = 0usize;
    for class in 0..ds.n_classes() {
        for (i, _) in ds.rows().iter().enumerate().filter(|(_, r)| r.y == class) {
            fold_of[i] = offset % k;
            offset += 1;
        }
    }

    Ok((0..k)
        .map(|f| {
            let (val, train): (Vec<usize>, Vec<usize>) =
                (0..ds.len()).partition(|&i| fold_of[i] == f);
            Fold {
                train: ds.subset(&train),
                validation: ds.subset(&val),
                validation_indices: val,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candata::FeatureVector;
    use proptest::prelude::*;

    fn dataset(class_sizes: &[usize]) -> LabeledDataset<f64> {
        let names = (0..class_sizes.len()).map(|i| format!("c{i}")).collect();
        let mut ds = LabeledDataset::new(names, 1).unwrap();
        let mut i = 0;
        // interleave classes so no split can rely on row order
        let max = class_sizes.iter().copied().max().unwrap_or(0);
        for r in 0..max {
            for (c, &n) in class_sizes.iter().enumerate() {
                if r < n {
                    ds.push(FeatureVector::new(vec![i as f64]), c).unwrap();
                    i += 1;
                }
            }
        }
        ds
    }

    fn assert_partition(ds: &LabeledDataset<f64>, s: &DataSplits<f64>, ratios: [f64; 3]) {
        let mut all: Vec<usize> = s.indices.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..ds.len()).collect::<Vec<_>>());
        let counts = ds.class_counts();
        for (part, r) in [&s.a, &s.b, &s.c].iter().zip(ratios) {
            for (c, &n) in part.class_counts().iter().enumerate() {
                let ideal = counts[c] as f64 * r;
                assert!((n as f64 - ideal).abs() <= 1.0 + 1e-9, "class {c}: {n} vs {ideal}");
            }
        }
    }

    #[test]
    fn balanced_ten_rows() {
        let ds = dataset(&[5, 5]);
        let s = split_dataset(&ds, DEFAULT_SPLIT_RATIOS, 42).unwrap();
        assert_eq!(s.sizes(), (6, 2, 2));
        assert_partition(&ds, &s, DEFAULT_SPLIT_RATIOS);
    }

    #[test]
    fn full_scale_sizes() {
        let totals = apportion(461_350, &DEFAULT_SPLIT_RATIOS);
        assert_eq!(totals, vec![276_810, 92_270, 92_270]);
        // four OTIDS-like classes of uneven size
        let sizes = [300_001, 80_117, 41_000, 40_232];
        let alloc = allocate(&sizes, &DEFAULT_SPLIT_RATIOS, &totals).unwrap();
        for j in 0..3 {
            assert_eq!(alloc.iter().map(|a| a[j]).sum::<usize>(), totals[j]);
        }
        for (row, &n) in alloc.iter().zip(&sizes) {
            assert_eq!(row.iter().sum::<usize>(), n);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let ds = dataset(&[40, 33, 27]);
        let a = split_dataset(&ds, DEFAULT_SPLIT_RATIOS, 7).unwrap();
        let b = split_dataset(&ds, DEFAULT_SPLIT_RATIOS, 7).unwrap();
        let c = split_dataset(&ds, DEFAULT_SPLIT_RATIOS, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.indices, c.indices);
    }

    #[test]
    fn split_errors() {
        let empty = LabeledDataset::<f64>::new(vec!["x".into()], 1).unwrap();
        assert!(split_dataset(&empty, DEFAULT_SPLIT_RATIOS, 1).is_err());
        let ds = dataset(&[10, 10]);
        assert!(split_dataset(&ds, [0.6, 0.2, 0.1], 1).is_err());
        assert!(split_dataset(&ds, [0.6, 0.6, -0.2], 1).is_err());
        assert!(split_dataset(&dataset(&[10, 2]), DEFAULT_SPLIT_RATIOS, 1).is_err());
    }

    #[test]
    fn kfold_balanced() {
        let ds = dataset(&[50, 50]);
        let folds = stratified_kfold(&ds, 5).unwrap();
        assert_eq!(folds.len(), 5);
        for f in &folds {
            assert_eq!(f.validation.len(), 20);
            assert_eq!(f.validation.class_counts(), vec![10, 10]);
            assert_eq!(f.train.len(), 80);
        }
    }

    #[test]
    fn kfold_errors() {
        let ds = dataset(&[50, 50]);
        assert!(stratified_kfold(&ds, 1).is_err());
        assert!(stratified_kfold(&dataset(&[50, 3]), 5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn split_is_a_stratified_partition(
            sizes in proptest::collection::vec(3usize..60, 1..6),
            seed in any::<u64>(),
            a in 1u32..8, b in 1u32..8, c in 1u32..8,
        ) {
            let total = (a + b + c) as f64;
            let ratios = [a as f64 / total, b as f64 / total, 1.0 - a as f64 / total - b as f64 / total];
            let ds = dataset(&sizes);
            let s = split_dataset(&ds, ratios, seed).unwrap();
            assert_partition(&ds, &s, ratios);
            prop_assert_eq!(s.a.len() + s.b.len() + s.c.len(), ds.len());
            prop_assert_eq!(split_dataset(&ds, ratios, seed).unwrap(), s);
        }

        #[test]
        fn kfold_is_a_stratified_partition(
            sizes in proptest::collection::vec(5usize..40, 1..5),
            k in 2usize..6,
        ) {
            let ds = dataset(&sizes);
            let folds = stratified_kfold(&ds, k).unwrap();
            let mut seen = vec![0u32; ds.len()];
            for f in &folds {
                for &i in &f.validation_indices {
                    seen[i] += 1;
                }
                prop_assert_eq!(f.train.len() + f.validation.len(), ds.len());
                for (c, &n) in f.validation.class_counts().iter().enumerate() {
                    let ideal = sizes[c] as f64 / k as f64;
                    prop_assert!((n as f64 - ideal).abs() < 1.0);
                }
            }
            prop_assert!(seen.iter().all(|&s| s == 1));
        }
    }
}
