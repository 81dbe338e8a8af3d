use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Width of the CAN frame feature schema: id, dlc and eight payload bytes.
pub const N_FEATURES: usize = 10;

/// Normalized numeric input to models and the attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector<S>(Vec<S>);

impl<S: Scalar> FeatureVector<S> {
    pub fn new(values: Vec<S>) -> Self {
        FeatureVector(values)
    }

    pub fn zeros(dim: usize) -> Self {
        FeatureVector(vec![S::zero(); dim])
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }

    pub fn in_unit_box(&self) -> bool {
        self.0.iter().all(|&v| v >= S::zero() && v <= S::one())
    }

    pub fn l2_distance(&self, other: &[S]) -> S {
        self.0
            .iter()
            .zip(other)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<S>()
            .sqrt()
    }
}

impl<S> Deref for FeatureVector<S> {
    type Target = [S];

    fn deref(&self) -> &[S] {
        &self.0
    }
}

impl<S> DerefMut for FeatureVector<S> {
    fn deref_mut(&mut self) -> &mut [S] {
        &mut self.0
    }
}

impl<S> From<Vec<S>> for FeatureVector<S> {
    fn from(v: Vec<S>) -> Self {
        FeatureVector(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample<S> {
    pub x: FeatureVector<S>,
    pub y: usize,
}

/// Rows of `(features, class index)` plus the ordered class list the
/// indices refer to. All rows share one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset<S> {
    rows: Vec<Sample<S>>,
    class_names: Vec<String>,
    n_features: usize,
}

impl<S: Scalar> LabeledDataset<S> {
    pub fn new(class_names: Vec<String>, n_features: usize) -> Result<Self> {
        if class_names.is_empty() {
            return Err(Error::invalid("dataset needs at least one class"));
        }
        for (i, name) in class_names.iter().enumerate() {
            if name.is_empty() || name.contains([',', '\n', '\r']) {
                return Err(Error::invalid(format!("bad class name {name:?}")));
            }
            if class_names[..i].contains(name) {
                return Err(Error::invalid(format!("duplicate class name {name:?}")));
            }
        }
        Ok(LabeledDataset {
            rows: Vec::new(),
            class_names,
            n_features,
        })
    }

    pub fn from_rows(
        class_names: Vec<String>,
        n_features: usize,
        rows: impl IntoIterator<Item = (FeatureVector<S>, usize)>,
    ) -> Result<Self> {
        let mut ds = Self::new(class_names, n_features)?;
        for (x, y) in rows {
            ds.push(x, y)?;
        }
        Ok(ds)
    }

    /// An empty dataset sharing this one's schema.
    pub fn empty_like(&self) -> Self {
        LabeledDataset {
            rows: Vec::new(),
            class_names: self.class_names.clone(),
            n_features: self.n_features,
        }
    }

    pub fn push(&mut self, x: FeatureVector<S>, y: usize) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        if y >= self.class_names.len() {
            return Err(Error::ClassOutOfRange {
                class: y,
                n_classes: self.class_names.len(),
            });
        }
        self.rows.push(Sample { x, y });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn rows(&self) -> &[Sample<S>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Sample<S> {
        &self.rows[i]
    }

    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|r| r.y)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for r in &self.rows {
            counts[r.y] += 1;
        }
        counts
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        LabeledDataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            class_names: self.class_names.clone(),
            n_features: self.n_features,
        }
    }

    /// Appends all rows of `other`, which must share the schema.
    pub fn extend_from(&mut self, other: &Self) -> Result<()> {
        if other.class_names != self.class_names {
            return Err(Error::invalid("class lists differ"));
        }
        if other.n_features != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: other.n_features,
            });
        }
        self.rows.extend(other.rows.iter().cloned());
        Ok(())
    }

    pub fn concat(parts: &[&Self]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("nothing to concatenate"))?;
        let mut out = first.empty_like();
        for p in parts {
            out.extend_from(p)?;
        }
        Ok(out)
    }

    /// Collapses every class except `normal` into a single `Attack` class.
    pub fn binarize(&self, normal: &str) -> Result<Self> {
        let normal_idx = self
            .class_names
            .iter()
            .position(|c| c == normal)
            .ok_or_else(|| Error::invalid(format!("no class named {normal:?}")))?;
        let mut out = LabeledDataset::new(
            vec![normal.to_string(), "Attack".to_string()],
            self.n_features,
        )?;
        out.rows = self
            .rows
            .iter()
            .map(|r| Sample {
                x: r.x.clone(),
                y: usize::from(r.y != normal_idx),
            })
            .collect();
        Ok(out)
    }
}
