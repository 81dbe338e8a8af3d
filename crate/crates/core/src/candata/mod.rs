//! CAN frame ingestion: OTIDS log parsing, feature extraction, synthetic
//! traffic, labeled datasets and the stratified A/B/C and k-fold splits.

mod cache;
mod dataset;
mod frame;
mod split;
mod synth;

pub use cache::{read_dataset, write_dataset, DATASET_MAGIC};
pub use dataset::{FeatureVector, LabeledDataset, Sample, N_FEATURES};
pub use frame::{
    extract_features, parse_otids_log, parse_otids_record, CanFrame, TrafficClass, MAX_CAN_ID,
};
pub use split::{split_dataset, stratified_kfold, DataSplits, Fold, DEFAULT_SPLIT_RATIOS, DEFAULT_SPLIT_SEED};
pub use synth::{dataset_from_frames, generate_synthetic, generate_synthetic_frames, SyntheticConfig};
