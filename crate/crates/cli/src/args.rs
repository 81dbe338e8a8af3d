use std::path::PathBuf;

use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Generate a synthetic labeled CAN dataset.
    Synth,
    /// Turn raw CAN logs into a labeled dataset.
    Prepare,
    /// Cross-validate and fit a model on split A.
    Train,
    /// Attack split B with ZOO against a fitted model.
    Attack,
    /// Train Model_A, generate B'/C', retrain on A+B+B'.
    Pipeline,
    /// Measure attack or retraining time across ensemble sizes.
    Sweep,
    /// Render the impact table or re-plot a sweep CSV.
    Report,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Prepare => "prepare",
            Command::Train => "train",
            Command::Attack => "attack",
            Command::Pipeline => "pipeline",
            Command::Sweep => "sweep",
            Command::Report => "report",
        }
    }
}

/// Raw command line. Every setting is optional here; unset values fall
/// back to the config file, then to built-in defaults.
#[derive(Debug, Parser)]
#[command(name = "canbench", version, about = "Attack-cost benchmarks for tree-ensemble CAN intrusion detectors")]
pub struct Args {
    pub command: Command,

    /// Flat `key = value` config file (a previous run's manifest works too).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: $CANBENCH_OUT or ./canbench-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dataset cache to read [default: <out>/dataset.csv].
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Raw log and its traffic class, as PATH:CLASS (prepare only; repeatable).
    #[arg(long = "input", value_name = "PATH:CLASS")]
    pub inputs: Vec<String>,
    /// Collapse attack classes into one (prepare only).
    #[arg(long)]
    pub binary: bool,
    /// Previously saved model to attack (attack only).
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    /// Numeric precision of features and models.
    #[arg(long, value_parser = ["f32", "f64"])]
    pub precision: Option<String>,
    /// Seed for data generation, splitting, model fitting and the attack.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Small, fast settings: 2 s budget, grid 5:50:5, 1000 synthetic rows.
    #[arg(long)]
    pub desk: bool,

    /// Synthetic rows.
    #[arg(long)]
    pub rows: Option<usize>,
    /// Synthetic classes (2-4).
    #[arg(long)]
    pub classes: Option<usize>,
    /// Synthetic class separation; larger is easier to classify.
    #[arg(long)]
    pub separation: Option<f64>,
    /// Also write raw per-class logs (synth only).
    #[arg(long)]
    pub write_logs: bool,

    /// Model kind: rf, gb or xgb.
    #[arg(long)]
    pub model: Option<String>,
    /// Bagging trees (rf) or boosting rounds (gb, xgb).
    #[arg(long)]
    pub n_estimators: Option<usize>,
    /// Tree depth limit ("none" for unlimited, rf only).
    #[arg(long)]
    pub max_depth: Option<String>,
    /// Boosting learning rate.
    #[arg(long)]
    pub model_learning_rate: Option<f64>,
    /// XGB L2 leaf regularization.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// XGB minimum split gain.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Fit trees in parallel (not allowed for timing runs).
    #[arg(long)]
    pub parallel: bool,
    /// Cross-validation folds.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Skip generating C' (pipeline only).
    #[arg(long)]
    pub no_c_prime: bool,

    /// ZOO Adam step size.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// ZOO iterations per example.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// ZOO finite-difference step.
    #[arg(long)]
    pub variable_h: Option<f64>,
    /// ZOO coordinates per iteration.
    #[arg(long)]
    pub coord_batch: Option<usize>,
    /// ZOO confidence margin.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// ZOO loss weight.
    #[arg(long)]
    pub init_const: Option<f64>,
    /// Keep iterating after the first misclassification.
    #[arg(long)]
    pub no_abort_early: bool,
    /// Attack only the first N rows of B (attack only).
    #[arg(long)]
    pub attack_rows: Option<usize>,

    /// Estimator grid as start:stop:step (stop included) or a comma list.
    #[arg(long)]
    pub grid: Option<String>,
    /// Measurement budget per grid value, in seconds.
    #[arg(long = "budget-s")]
    pub budget_s: Option<f64>,
    /// Workload the measured attack rate is extrapolated to.
    #[arg(long)]
    pub n_target: Option<usize>,
    /// What to sweep: attack, at (adversarial training) or both.
    #[arg(long, value_parser = ["attack", "at", "both"])]
    pub sweep_kind: Option<String>,
    /// Replace wall time with a clock that advances this many seconds per read.
    #[arg(long)]
    pub fake_clock_step: Option<f64>,

    /// Write the impact table (report only).
    #[arg(long)]
    pub impact: bool,
    /// Impact table format.
    #[arg(long, value_parser = ["text", "csv"])]
    pub impact_format: Option<String>,
    /// Re-plot a sweep CSV as SVG (report only).
    #[arg(long)]
    pub from_csv: Option<PathBuf>,

    /// More logging (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}
