use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use canbench_core::bench::{b_prime_for_value, run_at_time_sweep, run_attack_time_sweep, SweepRecord};
use canbench_core::candata::{
    dataset_from_frames, generate_synthetic, generate_synthetic_frames, parse_otids_log, read_dataset, split_dataset,
    write_dataset, DataSplits, LabeledDataset, TrafficClass, DEFAULT_SPLIT_RATIOS,
};
use canbench_core::forest::EnsembleModel;
use canbench_core::manifest::{Manifest, REFERENCE_HARDWARE};
use canbench_core::pipeline::{
    adversarial_dataset, evaluate_model, run_phase1_train_a, run_pipeline, Evaluation, PipelineConfig,
};
use canbench_core::report::{emit_impact_report, emit_svg_plot, emit_sweep_csv, parse_sweep_csv, ImpactFormat, PlotKind, SweepTable, TableMeta};
use canbench_core::zoo::attack_batch;
use canbench_core::{Clock, MonotonicClock, Scalar, SteppingClock};

use crate::args::Command;
use crate::config::{DataSource, Precision, RunConfig, DATASET_FILE};
use crate::error::{CliError, CliResult, Context};

/// Runs the configured command, then writes `manifest-<command>.txt` into
/// the output directory. Returns the paths written, manifest last.
pub fn run_command(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let wall = MonotonicClock::new();
    let t0 = wall.now();
    fs::create_dir_all(&cfg.out_dir).context(|| format!("creating output directory {}", cfg.out_dir.display()))?;
    let mut written = match cfg.precision {
        Precision::F64 => dispatch::<f64>(cfg)?,
        Precision::F32 => dispatch::<f32>(cfg)?,
    };
    let mut m = cfg.to_manifest()?;
    let mut put = |k: &str, v: String| m.set(k, v).context(|| format!("recording {k}"));
    put("meta.command", cfg.command.as_str().to_string())?;
    put("meta.version", env!("CARGO_PKG_VERSION").to_string())?;
    put("meta.reference_hardware", REFERENCE_HARDWARE.to_string())?;
    put("meta.host", host_description())?;
    put("timing.total_s", format!("{:.6}", wall.now() - t0))?;
    let path = cfg.out_dir.join(format!("manifest-{}.txt", cfg.command.as_str()));
    m.save(&path).context(|| format!("writing {}", path.display()))?;
    written.push(path);
    Ok(written)
}

fn dispatch<S: Scalar>(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let clock: Box<dyn Clock> = match cfg.fake_clock_step {
        Some(step) => Box::new(SteppingClock::new(step)),
        None => Box::new(MonotonicClock::new()),
    };
    match cfg.command {
        Command::Synth => synth::<S>(cfg),
        Command::Prepare => prepare::<S>(cfg),
        Command::Train => train::<S>(cfg),
        Command::Attack => attack::<S>(cfg, &*clock),
        Command::Pipeline => pipeline::<S>(cfg, &*clock),
        Command::Sweep => sweep::<S>(cfg, &*clock),
        Command::Report => report(cfg),
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).context(|| format!("creating {}", dir.display()))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .context(|| format!("creating {}", path.display()))
}

fn save_dataset<S: Scalar>(ds: &LabeledDataset<S>, path: &Path) -> CliResult<()> {
    write_dataset(ds, create(path)?).context(|| format!("writing {}", path.display()))
}

fn save_metrics(m: &Manifest, path: &Path) -> CliResult<()> {
    m.save(path).context(|| format!("writing {}", path.display()))
}

fn load_dataset<S: Scalar>(cfg: &RunConfig) -> CliResult<LabeledDataset<S>> {
    match &cfg.data {
        DataSource::Synthetic => {
            log::info!("no dataset cache; generating {} synthetic rows", cfg.synth.n);
            generate_synthetic(&cfg.synth).context(|| "generating synthetic dataset".into())
        }
        DataSource::File(p) => {
            let f = File::open(p).context(|| format!("opening dataset {}", p.display()))?;
            read_dataset(BufReader::new(f)).context(|| format!("reading dataset {}", p.display()))
        }
    }
}

fn load_splits<S: Scalar>(cfg: &RunConfig) -> CliResult<DataSplits<S>> {
    let ds = load_dataset(cfg)?;
    split_dataset(&ds, DEFAULT_SPLIT_RATIOS, cfg.seed).context(|| "splitting dataset".into())
}

fn pipeline_config(cfg: &RunConfig) -> PipelineConfig {
    PipelineConfig {
        model: cfg.model.clone(),
        zoo: cfg.zoo.clone(),
        split_ratios: DEFAULT_SPLIT_RATIOS,
        split_seed: cfg.seed,
        k: cfg.folds,
        generate_c_prime: cfg.c_prime,
    }
}

fn synth<S: Scalar>(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let frames = generate_synthetic_frames(&cfg.synth).context(|| "generating synthetic frames".into())?;
    let classes = &TrafficClass::ALL[..cfg.synth.n_classes];
    let ds: LabeledDataset<S> = dataset_from_frames(&frames, classes).context(|| "extracting features".into())?;
    let path = cfg.out_dir.join(DATASET_FILE);
    save_dataset(&ds, &path)?;
    let mut written = vec![path];
    if cfg.write_logs {
        for class in classes {
            let path = cfg.out_dir.join("logs").join(format!("{}.log", class.as_str().to_ascii_lowercase()));
            let mut out = create(&path)?;
            for f in frames.iter().filter(|f| f.label == *class) {
                writeln!(out, "{f}").context(|| format!("writing {}", path.display()))?;
            }
            out.flush().context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
    }
    log::info!("wrote {} rows in {} classes", ds.len(), ds.n_classes());
    Ok(written)
}

fn prepare<S: Scalar>(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let mut frames = Vec::new();
    for (path, label) in &cfg.inputs {
        let f = File::open(path).context(|| format!("opening log {}", path.display()))?;
        let parsed = parse_otids_log(BufReader::new(f), *label).context(|| format!("parsing log {}", path.display()))?;
        log::info!("{}: {} {label} frames", path.display(), parsed.len());
        frames.extend(parsed);
    }
    let classes: Vec<TrafficClass> = TrafficClass::ALL
        .into_iter()
        .filter(|c| cfg.inputs.iter().any(|(_, l)| l == c))
        .collect();
    let mut ds: LabeledDataset<S> = dataset_from_frames(&frames, &classes).context(|| "extracting features".into())?;
    if cfg.binary {
        ds = ds
            .binarize(TrafficClass::Normal.as_str())
            .context(|| "collapsing attack classes".into())?;
    }
    let path = cfg.out_dir.join(DATASET_FILE);
    save_dataset(&ds, &path)?;
    Ok(vec![path])
}

fn put_evaluation(m: &mut Manifest, prefix: &str, e: &Evaluation) -> canbench_core::Result<()> {
    m.set(&format!("{prefix}.accuracy"), e.accuracy)?;
    for c in &e.per_class {
        let key = |what: &str| format!("{prefix}.class.{}.{what}", c.class);
        m.set(&key("precision"), c.precision)?;
        m.set(&key("recall"), c.recall)?;
        m.set(&key("f1"), c.f1)?;
        m.set(&key("support"), c.support)?;
    }
    Ok(())
}

fn train<S: Scalar>(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let splits = load_splits::<S>(cfg)?;
    let (model, report, cv) =
        run_phase1_train_a(&splits, &pipeline_config(cfg)).context(|| "training Model_A".into())?;
    let model_path = cfg.out_dir.join("model.json");
    model
        .save(create(&model_path)?)
        .context(|| format!("writing {}", model_path.display()))?;

    let mut m = Manifest::new();
    let metrics = (|| -> canbench_core::Result<()> {
        let (a, b, c) = splits.sizes();
        m.set("size.a", a)?;
        m.set("size.b", b)?;
        m.set("size.c", c)?;
        for (i, s) in cv.iter().enumerate() {
            m.set(&format!("cv.fold{i}"), s)?;
        }
        m.set("cv.mean", cv.iter().sum::<f64>() / cv.len() as f64)?;
        m.set("acc.train", report.training_accuracy)?;
        put_evaluation(&mut m, "eval.b", &evaluate_model(&model, &splits.b)?)?;
        put_evaluation(&mut m, "eval.c", &evaluate_model(&model, &splits.c)?)?;
        m.set("timing.fit_s", report.fit_wall_time)
    })();
    metrics.context(|| "evaluating Model_A".into())?;
    log::info!("cv mean {:.4}, training accuracy {:.4}", m.get("cv.mean").unwrap_or("?"), report.training_accuracy);
    let metrics_path = cfg.out_dir.join("metrics-train.txt");
    save_metrics(&m, &metrics_path)?;
    Ok(vec![model_path, metrics_path])
}

fn attack<S: Scalar>(cfg: &RunConfig, clock: &dyn Clock) -> CliResult<Vec<PathBuf>> {
    let splits = load_splits::<S>(cfg)?;
    let model: EnsembleModel<S> = match &cfg.model_file {
        Some(p) => {
            let f = File::open(p).context(|| format!("opening model {}", p.display()))?;
            EnsembleModel::load(BufReader::new(f)).context(|| format!("loading model {}", p.display()))?
        }
        None => run_phase1_train_a(&splits, &pipeline_config(cfg))
            .context(|| "training Model_A".into())?
            .0,
    };
    let n = cfg.attack_rows.map_or(splits.b.len(), |r| r.min(splits.b.len()));
    let targets = splits.b.subset(&(0..n).collect::<Vec<_>>());
    let stats = attack_batch(&model, targets.rows(), &cfg.zoo, clock, |_| false).context(|| "attacking split B".into())?;
    let adv = adversarial_dataset(&stats, &targets).context(|| "collecting adversarial rows".into())?;
    let adv_path = cfg.out_dir.join("adversarial.csv");
    save_dataset(&adv, &adv_path)?;

    let mut m = Manifest::new();
    let metrics = (|| -> canbench_core::Result<()> {
        m.set("attack.n", stats.len())?;
        m.set("attack.success_rate", stats.success_rate)?;
        m.set("attack.mean_queries", stats.mean_queries)?;
        m.set("attack.total_queries", stats.total_queries)?;
        m.set("acc.b", evaluate_model(&model, &targets)?.accuracy)?;
        m.set("acc.b_prime", evaluate_model(&model, &adv)?.accuracy)?;
        m.set("timing.attack_s", stats.total_wall_time)
    })();
    metrics.context(|| "evaluating the attack".into())?;
    log::info!("attacked {} rows, success rate {:.4}", stats.len(), stats.success_rate);
    let metrics_path = cfg.out_dir.join("metrics-attack.txt");
    save_metrics(&m, &metrics_path)?;
    Ok(vec![adv_path, metrics_path])
}

fn pipeline<S: Scalar>(cfg: &RunConfig, clock: &dyn Clock) -> CliResult<Vec<PathBuf>> {
    let ds = load_dataset::<S>(cfg)?;
    let art = run_pipeline(&ds, &pipeline_config(cfg), clock).context(|| "running the pipeline".into())?;
    art.write_to_dir(&cfg.out_dir)
        .context(|| format!("writing results to {}", cfg.out_dir.display()))?;
    let s = &art.summary;
    log::info!(
        "Model_A: {:.4} on B, {:.4} on B'; attack success {:.4}",
        s.acc_a_on_b,
        s.acc_a_on_b_prime,
        s.attack_success_b
    );
    let mut names = vec!["model_a.json", "model_abb.json", "b_prime.csv"];
    if art.c_prime.is_some() {
        names.push("c_prime.csv");
    }
    names.push("metrics.txt");
    Ok(names.into_iter().map(|n| cfg.out_dir.join(n)).collect())
}

fn host_description() -> String {
    let cpu = fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split_once(':'))
                .map(|(_, v)| v.trim().to_string())
        })
        .unwrap_or_else(|| std::env::consts::ARCH.to_string());
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mem = fs::read_to_string("/proc/meminfo").ok().and_then(|s| {
        s.lines()
            .find(|l| l.starts_with("MemTotal:"))
            .and_then(|l| l.split_whitespace().nth(1))
            .and_then(|kb| kb.parse::<f64>().ok())
            .map(|kb| format!(", {:.0} GB RAM", kb / (1024.0 * 1024.0)))
    });
    format!("{cpu} ({threads} threads){}", mem.unwrap_or_default())
}

fn write_table(table: &SweepTable, kind: PlotKind, stem: &Path) -> CliResult<Vec<PathBuf>> {
    let csv = stem.with_extension("csv");
    let svg = stem.with_extension("svg");
    emit_sweep_csv(table, create(&csv)?).context(|| format!("writing {}", csv.display()))?;
    emit_svg_plot(table, kind, create(&svg)?).context(|| format!("writing {}", svg.display()))?;
    if let Some(f) = table.fit() {
        log::info!("{}: slope {:.6}, intercept {:.6}, R^2 {:.4}", csv.display(), f.slope, f.intercept, f.r2);
    }
    Ok(vec![csv, svg])
}

fn sweep<S: Scalar>(cfg: &RunConfig, clock: &dyn Clock) -> CliResult<Vec<PathBuf>> {
    let splits = load_splits::<S>(cfg)?;
    let kind = cfg.model.kind();
    let meta = TableMeta {
        model: kind,
        grid: cfg.grid.clone(),
        budget_s: None,
        n_target: None,
        hardware: host_description(),
        seed: cfg.seed,
    };
    let mut written = Vec::new();
    if cfg.sweep_kind.attack() {
        let r = run_attack_time_sweep(&splits, &cfg.model, &cfg.grid, &cfg.zoo, cfg.budget_s, cfg.n_target, clock)
            .context(|| format!("attack-time sweep for {kind}"))?;
        let meta = TableMeta {
            budget_s: Some(cfg.budget_s),
            n_target: Some(cfg.n_target),
            ..meta.clone()
        };
        let table = SweepTable::new(meta, r.records);
        written.extend(write_table(&table, PlotKind::AttackTime, &cfg.out_dir.join(format!("sweep_{kind}_attack")))?);
    }
    if cfg.sweep_kind.at() {
        let r = run_at_time_sweep(
            &splits,
            &cfg.model,
            &cfg.grid,
            |v| b_prime_for_value(&splits, &cfg.model, v, &cfg.zoo, clock),
            clock,
        )
        .context(|| format!("adversarial-training sweep for {kind}"))?;
        let table = SweepTable::new(meta, r.records);
        written.extend(write_table(&table, PlotKind::AtTime, &cfg.out_dir.join(format!("sweep_{kind}_at")))?);
    }
    Ok(written)
}

fn report(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    if let Some(csv) = &cfg.from_csv {
        return replot(cfg, csv);
    }
    let path = cfg.out_dir.join(match cfg.impact_format {
        ImpactFormat::Text => "impact.txt",
        ImpactFormat::Csv => "impact.csv",
    });
    emit_impact_report(cfg.impact_format, create(&path)?).context(|| format!("writing {}", path.display()))?;
    Ok(vec![path])
}

fn replot(cfg: &RunConfig, csv: &Path) -> CliResult<Vec<PathBuf>> {
    let f = File::open(csv).context(|| format!("opening {}", csv.display()))?;
    let rows = parse_sweep_csv(BufReader::new(f)).context(|| format!("reading {}", csv.display()))?;
    let first = rows
        .first()
        .ok_or_else(|| CliError::usage(format!("{} has no sweep rows", csv.display())))?;
    let kind = if first.at_time_s.is_some() { PlotKind::AtTime } else { PlotKind::AttackTime };
    let meta = TableMeta {
        model: first.model,
        grid: rows.iter().map(|r| r.value).collect(),
        budget_s: None,
        n_target: None,
        hardware: String::new(),
        seed: cfg.seed,
    };
    let records = rows
        .iter()
        .map(|r| SweepRecord {
            model: r.model,
            param: r.param.clone(),
            value: r.value,
            n_done: r.n_done,
            elapsed: r.elapsed_s,
            est_total: r.est_total_s,
            at_time: r.at_time_s,
        })
        .collect();
    let table = SweepTable::new(meta, records);
    let stem = csv.file_stem().map_or_else(|| "sweep".into(), |s| s.to_string_lossy().into_owned());
    let svg = cfg.out_dir.join(format!("{stem}.svg"));
    emit_svg_plot(&table, kind, create(&svg)?).context(|| format!("writing {}", svg.display()))?;
    Ok(vec![svg])
}
