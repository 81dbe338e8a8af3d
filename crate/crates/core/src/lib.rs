//! Tree-ensemble intrusion detectors for CAN traffic, a black-box
//! zeroth-order evasion attack against them, and the timing harness that
//! measures how ensemble size drives attack and retraining cost.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases below pin the common `f64` instantiation.

pub mod bench;
pub mod candata;
pub mod clock;
pub mod error;
pub mod forest;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod zoo;

mod seed;

pub use clock::{Clock, FakeClock, MonotonicClock, SteppingClock};
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Feature vector in double precision.
pub type FeatureVector = candata::FeatureVector<f64>;
/// Labeled dataset in double precision.
pub type LabeledDataset = candata::LabeledDataset<f64>;
/// A/B/C splits in double precision.
pub type DataSplits = candata::DataSplits<f64>;
/// Single CART tree in double precision.
pub type DecisionTree = forest::DecisionTree<f64>;
/// Fitted ensemble in double precision.
pub type EnsembleModel = forest::EnsembleModel<f64>;
/// Attack output in double precision.
pub type AdversarialExample = zoo::AdversarialExample<f64>;
/// Batch attack statistics in double precision.
pub type BatchStats = zoo::BatchStats<f64>;
/// Pipeline outputs in double precision.
pub type PipelineArtifacts = pipeline::PipelineArtifacts<f64>;


/// Single-precision instantiations.
pub mod f32 {
    pub type FeatureVector = crate::candata::FeatureVector<f32>;
    pub type LabeledDataset = crate::candata::LabeledDataset<f32>;
    pub type DataSplits = crate::candata::DataSplits<f32>;
    pub type DecisionTree = crate::forest::DecisionTree<f32>;
    pub type EnsembleModel = crate::forest::EnsembleModel<f32>;
    pub type AdversarialExample = crate::zoo::AdversarialExample<f32>;
    pub type PipelineArtifacts = crate::pipeline::PipelineArtifacts<f32>;
}
