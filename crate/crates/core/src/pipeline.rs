//! The three-phase experiment: fit Model_A on split A (after stratified
//! cross-validation), attack it on B and C to obtain B′ and C′, then retrain
//! on A ∪ B ∪ B′ to obtain Model_{A+B+B′}.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::candata::{split_dataset, stratified_kfold, write_dataset, DataSplits, LabeledDataset, DEFAULT_SPLIT_RATIOS, DEFAULT_SPLIT_SEED};
use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::forest::{accuracy, fit_model, EnsembleModel, ModelKind, ModelSpec, TrainReport};
use crate::manifest::Manifest;
use crate::scalar::Scalar;
use crate::seed::derive_seed;
use crate::zoo::{attack_batch, BatchStats, ZooConfig};

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub model: ModelSpec,
    pub zoo: ZooConfig,
    pub split_ratios: [f64; 3],
    pub split_seed: u64,
    pub k: usize,
    /// Also attack split C. Only B′ is needed for adversarial training.
    pub generate_c_prime: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            model: ModelSpec::default_for(ModelKind::RandomForest),
            zoo: ZooConfig::default(),
            split_ratios: DEFAULT_SPLIT_RATIOS,
            split_seed: DEFAULT_SPLIT_SEED,
            k: DEFAULT_FOLDS,
            generate_c_prime: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::config(format!("k must be >= 2, got {}", self.k)));
        }
        self.model.validate()?;
        // the input dimension is only known once data arrives
        self.zoo.validate(usize::MAX)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Argmax-prediction metrics. Precision, recall and F1 are 0 when their
/// denominator is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    /// `confusion[true][predicted]`
    pub confusion: Vec<Vec<usize>>,
}

/// Headline numbers of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub cv_mean: f64,
    pub acc_a_on_b: f64,
    pub acc_a_on_b_prime: f64,
    pub acc_a_on_c: f64,
    pub attack_success_b: f64,
    /// Fraction of C′ misclassified by Model_A.
    pub evasion_a_on_c_prime: Option<f64>,
    /// Fraction of C′ misclassified by Model_{A+B+B′}.
    pub evasion_abb_on_c_prime: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct PipelineArtifacts<S> {
    pub splits: DataSplits<S>,
    pub model_a: EnsembleModel<S>,
    pub report_a: TrainReport,
    pub cv_scores: Vec<f64>,
    pub b_prime: LabeledDataset<S>,
    pub c_prime: Option<LabeledDataset<S>>,
    pub b_stats: BatchStats<S>,
    pub c_stats: Option<BatchStats<S>>,
    pub model_abb: EnsembleModel<S>,
    pub report_abb: TrainReport,
    pub summary: PipelineSummary,
}

/// Cross-validates on A, then fits Model_A on all of A.
pub fn run_phase1_train_a<S: Scalar>(
    splits: &DataSplits<S>,
    cfg: &PipelineConfig,
) -> Result<(EnsembleModel<S>, TrainReport, Vec<f64>)> {
    cfg.validate()?;
    let folds = stratified_kfold(&splits.a, cfg.k)?;
    let mut cv_scores = Vec::with_capacity(cfg.k);
    for fold in &folds {
        let (m, _) = fit_model(&fold.train, &cfg.model)?;
        cv_scores.push(accuracy(&m, &fold.validation)?);
    }
    let (model, report) = fit_model(&splits.a, &cfg.model)?;
    Ok((model, report, cv_scores))
}

/// One row per attacked example: the final (or first successful) iterate,
/// labeled with the source row's class.
pub fn adversarial_dataset<S: Scalar>(
    stats: &BatchStats<S>,
    template: &LabeledDataset<S>,
) -> Result<LabeledDataset<S>> {
    let mut out = template.empty_like();
    for r in &stats.results {
        out.push(r.adversarial.clone(), r.true_class)?;
    }
    Ok(out)
}

/// Attacks every row of B (and of C when requested) against Model_A.
#[allow(clippy::type_complexity)]
pub fn run_phase2_generate_adv<S, C>(
    model_a: &EnsembleModel<S>,
    splits: &DataSplits<S>,
    zoo: &ZooConfig,
    generate_c_prime: bool,
    clock: &C,
) -> Result<(LabeledDataset<S>, Option<LabeledDataset<S>>, BatchStats<S>, Option<BatchStats<S>>)>
where
    S: Scalar,
    C: Clock + ?Sized,
{
    let b_stats = attack_batch(model_a, splits.b.rows(), zoo, clock, |_| false)?;
    let b_prime = adversarial_dataset(&b_stats, &splits.b)?;
    if !generate_c_prime {
        return Ok((b_prime, None, b_stats, None));
    }
    let zoo_c = ZooConfig {
        seed: derive_seed(zoo.seed, 1 << 32),
        ..zoo.clone()
    };
    let c_stats = attack_batch(model_a, splits.c.rows(), &zoo_c, clock, |_| false)?;
    let c_prime = adversarial_dataset(&c_stats, &splits.c)?;
    Ok((b_prime, Some(c_prime), b_stats, Some(c_stats)))
}

/// Training set of the adversarially trained model.
pub fn adversarial_training_set<S: Scalar>(
    splits: &DataSplits<S>,
    b_prime: &LabeledDataset<S>,
) -> Result<LabeledDataset<S>> {
    LabeledDataset::concat(&[&splits.a, &splits.b, b_prime])
}

/// Fits Model_{A+B+B′}.
pub fn run_phase3_adv_training<S: Scalar>(
    splits: &DataSplits<S>,
    b_prime: &LabeledDataset<S>,
    cfg: &PipelineConfig,
) -> Result<(EnsembleModel<S>, TrainReport)> {
    let train = adversarial_training_set(splits, b_prime)?;
    fit_model(&train, &cfg.model)
}

pub fn evaluate_model<S: Scalar>(model: &EnsembleModel<S>, ds: &LabeledDataset<S>) -> Result<Evaluation> {
    if ds.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty dataset"));
    }
    let k = ds.n_classes();
    let mut confusion = vec![vec![0usize; k]; k];
    for r in ds.rows() {
        let p = model.predict_class(&r.x)?;
        if p >= k {
            return Err(Error::ClassOutOfRange { class: p, n_classes: k });
        }
        confusion[r.y][p] += 1;
    }
    let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let per_class = (0..k)
        .map(|c| {
            let tp = confusion[c][c];
            let support: usize = confusion[c].iter().sum();
            let predicted: usize = confusion.iter().map(|row| row[c]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                class: ds.class_names()[c].clone(),
                precision,
                recall,
                f1,
                support,
            }
        })
        .collect();
    Ok(Evaluation {
        accuracy: ratio(correct, ds.len()),
        per_class,
        confusion,
    })
}

/// Fraction of adversarial rows the model misclassifies.
pub fn evasion_rate<S: Scalar>(model: &EnsembleModel<S>, adversarial: &LabeledDataset<S>) -> Result<f64> {
    Ok(1.0 - evaluate_model(model, adversarial)?.accuracy)
}

/// Runs all three phases on `ds`.
pub fn run_pipeline<S, C>(ds: &LabeledDataset<S>, cfg: &PipelineConfig, clock: &C) -> Result<PipelineArtifacts<S>>
where
    S: Scalar,
    C: Clock + ?Sized,
{
    cfg.validate()?;
    let splits = split_dataset(ds, cfg.split_ratios, cfg.split_seed)?;
    let (model_a, report_a, cv_scores) = run_phase1_train_a(&splits, cfg)?;
    let (b_prime, c_prime, b_stats, c_stats) =
        run_phase2_generate_adv(&model_a, &splits, &cfg.zoo, cfg.generate_c_prime, clock)?;
    let (model_abb, report_abb) = run_phase3_adv_training(&splits, &b_prime, cfg)?;

    let summary = PipelineSummary {
        cv_mean: cv_scores.iter().sum::<f64>() / cv_scores.len() as f64,
        acc_a_on_b: accuracy(&model_a, &splits.b)?,
        acc_a_on_b_prime: accuracy(&model_a, &b_prime)?,
        acc_a_on_c: accuracy(&model_a, &splits.c)?,
        attack_success_b: b_stats.success_rate,
        evasion_a_on_c_prime: c_prime.as_ref().map(|c| evasion_rate(&model_a, c)).transpose()?,
        evasion_abb_on_c_prime: c_prime.as_ref().map(|c| evasion_rate(&model_abb, c)).transpose()?,
    };
    Ok(PipelineArtifacts {
        splits,
        model_a,
        report_a,
        cv_scores,
        b_prime,
        c_prime,
        b_stats,
        c_stats,
        model_abb,
        report_abb,
        summary,
    })
}

impl<S: Scalar> PipelineArtifacts<S> {
    /// Key-value metrics of the run, including fit and attack wall times.
    pub fn metrics(&self) -> Result<Manifest> {
        let mut m = Manifest::new();
        let (a, b, c) = self.splits.sizes();
        m.set("size.a", a)?;
        m.set("size.b", b)?;
        m.set("size.c", c)?;
        m.set("size.b_prime", self.b_prime.len())?;
        if let Some(cp) = &self.c_prime {
            m.set("size.c_prime", cp.len())?;
        }
        m.set("size.train_abb", self.report_abb.training_rows)?;
        for (i, s) in self.cv_scores.iter().enumerate() {
            m.set(&format!("cv.fold{i}"), s)?;
        }
        let s = &self.summary;
        m.set("cv.mean", s.cv_mean)?;
        m.set("acc.model_a.b", s.acc_a_on_b)?;
        m.set("acc.model_a.b_prime", s.acc_a_on_b_prime)?;
        m.set("acc.model_a.c", s.acc_a_on_c)?;
        m.set("attack.b.success_rate", s.attack_success_b)?;
        m.set("attack.b.mean_queries", self.b_stats.mean_queries)?;
        m.set("attack.b.total_queries", self.b_stats.total_queries)?;
        m.set("timing.attack_b_s", self.b_stats.total_wall_time)?;
        if let Some(cs) = &self.c_stats {
            m.set("attack.c.success_rate", cs.success_rate)?;
            m.set("timing.attack_c_s", cs.total_wall_time)?;
        }
        if let Some(v) = s.evasion_a_on_c_prime {
            m.set("evasion.model_a.c_prime", v)?;
        }
        if let Some(v) = s.evasion_abb_on_c_prime {
            m.set("evasion.model_abb.c_prime", v)?;
        }
        m.set("timing.fit_a_s", self.report_a.fit_wall_time)?;
        m.set("timing.fit_abb_s", self.report_abb.fit_wall_time)?;
        Ok(m)
    }

    /// Writes models, adversarial sets and metrics into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let create = |name: &str| -> Result<BufWriter<fs::File>> {
            Ok(BufWriter::new(fs::File::create(dir.join(name))?))
        };
        self.model_a.save(create("model_a.json")?)?;
        self.model_abb.save(create("model_abb.json")?)?;
        write_dataset(&self.b_prime, create("b_prime.csv")?)?;
        if let Some(cp) = &self.c_prime {
            write_dataset(cp, create("c_prime.csv")?)?;
        }
        let mut out = create("metrics.txt")?;
        self.metrics()?.write(&mut out)?;
        out.flush()?;
        Ok(())
    }
}
