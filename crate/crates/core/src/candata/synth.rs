use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dataset::{LabeledDataset, N_FEATURES};
use super::frame::{extract_features, CanFrame, TrafficClass, MAX_CAN_ID};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;

/// Distance between neighbouring class prototypes along each informative
/// feature, in normalized units.
const PROTOTYPE_SPACING: f64 = 0.15;
/// Seconds between consecutive synthetic frames (2 kHz bus load).
const FRAME_PERIOD: f64 = 0.0005;

/// Parameters of the synthetic CAN traffic generator.
///
/// Each class has a prototype frame; neighbouring prototypes sit
/// `0.15` apart on every informative feature (id and the eight payload
/// bytes, in a per-feature random class order). Frames are the prototype
/// plus Gaussian noise with standard deviation `0.15 / class_separation`,
/// quantized back to id and byte values. All frames have DLC 8.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n: usize,
    pub n_classes: usize,
    pub class_separation: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    /// Separation at which a depth-8 CART fits the training data to >= 95%.
    pub const HIGH_SEPARATION: f64 = 4.0;
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n: 1000,
            n_classes: 4,
            class_separation: Self::HIGH_SEPARATION,
            seed: 42,
        }
    }
}

/// Synthetic labeled frames, classes cycling `Normal, DoS, Fuzzy, ...`.
pub fn generate_synthetic_frames(cfg: &SyntheticConfig) -> Result<Vec<CanFrame>> {
    if cfg.n_classes < 2 || cfg.n_classes > TrafficClass::ALL.len() {
        return Err(Error::invalid(format!(
            "n_classes must be in 2..=4, got {}",
            cfg.n_classes
        )));
    }
    if cfg.n < cfg.n_classes {
        return Err(Error::invalid(format!(
            "n = {} is smaller than n_classes = {}",
            cfg.n, cfg.n_classes
        )));
    }
    if !(cfg.class_separation.is_finite() && cfg.class_separation > 0.0) {
        return Err(Error::invalid("class_separation must be positive"));
    }

    let k = cfg.n_classes;
    let informative = N_FEATURES - 1; // id + 8 bytes; dlc is fixed
    let mut proto_rng = seed::stream_rng(cfg.seed, 0);
    let mut prototypes = vec![vec![0.0; informative]; k];
    for j in 0..informative {
        let center: f64 = proto_rng.random_range(0.3..0.7);
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(&mut proto_rng);
        for (class, &rank) in order.iter().enumerate() {
            prototypes[class][j] =
                center + (rank as f64 - (k as f64 - 1.0) / 2.0) * PROTOTYPE_SPACING;
        }
    }

    let sigma = PROTOTYPE_SPACING / cfg.class_separation;
    let mut noise_rng = seed::stream_rng(cfg.seed, 1);
    let mut draw = |mean: f64| -> f64 {
        let z: f64 = StandardNormal.sample(&mut noise_rng);
        (mean + sigma * z).clamp(0.0, 1.0)
    };

    let mut frames = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let class = i % k;
        let proto = &prototypes[class];
        let can_id = (draw(proto[0]) * MAX_CAN_ID as f64).round() as u16;
        let mut payload = [0u8; 8];
        for (b, &p) in payload.iter_mut().zip(&proto[1..]) {
            *b = (draw(p) * 255.0).round() as u8;
        }
        frames.push(CanFrame::new(
            i as f64 * FRAME_PERIOD,
            can_id,
            false,
            &payload,
            TrafficClass::ALL[class],
        )?);
    }
    Ok(frames)
}

/// Feature rows for `frames`, with `classes` as the ordered class list.
pub fn dataset_from_frames<S: Scalar>(
    frames: &[CanFrame],
    classes: &[TrafficClass],
) -> Result<LabeledDataset<S>> {
    let names = classes.iter().map(|c| c.to_string()).collect();
    let mut ds = LabeledDataset::new(names, N_FEATURES)?;
    for f in frames {
        let y = classes
            .iter()
            .position(|c| *c == f.label)
            .ok_or_else(|| Error::invalid(format!("frame label {} not in class list", f.label)))?;
        ds.push(extract_features(f), y)?;
    }
    Ok(ds)
}

pub fn generate_synthetic<S: Scalar>(cfg: &SyntheticConfig) -> Result<LabeledDataset<S>> {
    let frames = generate_synthetic_frames(cfg)?;
    dataset_from_frames(&frames, &TrafficClass::ALL[..cfg.n_classes])
}
