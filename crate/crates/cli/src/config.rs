use std::ffi::OsString;
use std::path::{Path, PathBuf};

use canbench_core::bench::{default_grid, DEFAULT_BUDGET_S, DEFAULT_N_TARGET};
use canbench_core::candata::{SyntheticConfig, TrafficClass};
use canbench_core::forest::{ModelKind, ModelSpec};
use canbench_core::manifest::Manifest;
use canbench_core::pipeline::DEFAULT_FOLDS;
use canbench_core::report::ImpactFormat;
use canbench_core::zoo::ZooConfig;
use clap::Parser;

use crate::args::{Args, Command};
use crate::error::{CliError, CliResult};

pub const OUT_ENV: &str = "CANBENCH_OUT";
pub const DEFAULT_OUT: &str = "canbench-out";
pub const DATASET_FILE: &str = "dataset.csv";
/// `data` value meaning "generate from the synth.* settings in memory".
pub const SYNTHETIC_DATA: &str = "synthetic";
pub const DEFAULT_SEED: u64 = 42;

const DESK_BUDGET_S: f64 = 2.0;
const DESK_GRID: &str = "5:50:5";

/// Every key a config file may set. Keys under `meta.` and `timing.` are
/// written by runs and skipped on input, so a manifest can be replayed.
pub const CONFIG_KEYS: &[&str] = &[
    "out_dir",
    "data",
    "model_file",
    "precision",
    "seed",
    "desk",
    "synth.n",
    "synth.classes",
    "synth.separation",
    "synth.write_logs",
    "prepare.inputs",
    "prepare.binary",
    "model.kind",
    "model.n_estimators",
    "model.max_depth",
    "model.learning_rate",
    "model.lambda",
    "model.gamma",
    "model.parallel",
    "pipeline.k",
    "pipeline.c_prime",
    "zoo.learning_rate",
    "zoo.max_iter",
    "zoo.variable_h",
    "zoo.coord_batch",
    "zoo.kappa",
    "zoo.c",
    "zoo.abort_early",
    "attack.rows",
    "sweep.grid",
    "sweep.budget_s",
    "sweep.n_target",
    "sweep.kind",
    "clock.fake_step",
    "report.impact",
    "report.impact_format",
    "report.from_csv",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

impl Precision {
    fn as_str(self) -> &'static str {
        match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic,
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Attack,
    At,
    Both,
}

impl SweepKind {
    fn as_str(self) -> &'static str {
        match self {
            SweepKind::Attack => "attack",
            SweepKind::At => "at",
            SweepKind::Both => "both",
        }
    }

    pub fn attack(self) -> bool {
        self != SweepKind::At
    }

    pub fn at(self) -> bool {
        self != SweepKind::Attack
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub out_dir: PathBuf,
    pub data: DataSource,
    pub inputs: Vec<(PathBuf, TrafficClass)>,
    pub binary: bool,
    pub model_file: Option<PathBuf>,
    pub precision: Precision,
    pub seed: u64,
    pub desk: bool,
    pub synth: SyntheticConfig,
    pub write_logs: bool,
    pub model: ModelSpec,
    pub zoo: ZooConfig,
    pub folds: usize,
    pub c_prime: bool,
    pub attack_rows: Option<usize>,
    pub grid: Vec<usize>,
    pub budget_s: f64,
    pub n_target: usize,
    pub sweep_kind: SweepKind,
    pub fake_clock_step: Option<f64>,
    pub impact: bool,
    pub impact_format: ImpactFormat,
    pub from_csv: Option<PathBuf>,
    pub verbose: u8,
}

/// Parses `argv` (without the program name) and resolves it against the
/// optional config file and `CANBENCH_OUT`.
pub fn parse_cli<I, T>(argv: I) -> CliResult<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env_out = std::env::var_os(OUT_ENV).map(PathBuf::from);
    parse_cli_with_env(argv, env_out)
}

/// [`parse_cli`] with the environment's output root passed in.
pub fn parse_cli_with_env<I, T>(argv: I, env_out: Option<PathBuf>) -> CliResult<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("canbench")).chain(argv.into_iter().map(Into::into));
    let args = Args::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Help(e.to_string())
        }
        _ => CliError::usage(e.render().to_string()),
    })?;
    let file = match &args.config {
        Some(p) => Some(read_config_file(p)?),
        None => None,
    };
    resolve(&args, file.as_ref(), env_out)
}

fn read_config_file(path: &Path) -> CliResult<Manifest> {
    let m = Manifest::load(path).map_err(|e| CliError::usage(format!("config file {}: {e}", path.display())))?;
    for (k, _) in m.iter() {
        if !(CONFIG_KEYS.contains(&k) || k.starts_with("meta.") || k.starts_with("timing.")) {
            return Err(CliError::usage(format!("config file {}: unknown key {k:?}", path.display())));
        }
    }
    Ok(m)
}

/// Settings given on the command line, as config keys, with the commands
/// each one applies to (`None` for all).
fn flag_settings(a: &Args) -> Vec<(&'static str, String, Option<&'static [Command]>)> {
    use Command::*;
    const DATA_CMDS: &[Command] = &[Train, Attack, Pipeline, Sweep];
    const SYNTH_CMDS: &[Command] = &[Synth, Train, Attack, Pipeline, Sweep];
    const MODEL_CMDS: &[Command] = &[Train, Attack, Pipeline, Sweep];
    const ZOO_CMDS: &[Command] = &[Attack, Pipeline, Sweep];
    let mut v: Vec<(&'static str, String, Option<&'static [Command]>)> = Vec::new();
    let mut put = |key: &'static str, val: Option<String>, cmds: Option<&'static [Command]>| {
        if let Some(val) = val {
            v.push((key, val, cmds));
        }
    };
    let flag = |on: bool, val: &str| on.then(|| val.to_string());
    let s = |x: &Option<String>| x.clone();
    fn d<T: ToString>(x: &Option<T>) -> Option<String> {
        x.as_ref().map(ToString::to_string)
    }
    put("out_dir", a.out.as_ref().map(|p| p.display().to_string()), None);
    put("data", a.data.as_ref().map(|p| p.display().to_string()), Some(DATA_CMDS));
    put("model_file", a.model_file.as_ref().map(|p| p.display().to_string()), Some(&[Attack]));
    put("precision", s(&a.precision), None);
    put("seed", d(&a.seed), None);
    put("desk", flag(a.desk, "true"), None);
    put("synth.n", d(&a.rows), Some(SYNTH_CMDS));
    put("synth.classes", d(&a.classes), Some(SYNTH_CMDS));
    put("synth.separation", d(&a.separation), Some(SYNTH_CMDS));
    put("synth.write_logs", flag(a.write_logs, "true"), Some(&[Synth]));
    let inputs = (!a.inputs.is_empty()).then(|| a.inputs.join(","));
    put("prepare.inputs", inputs, Some(&[Prepare]));
    put("prepare.binary", flag(a.binary, "true"), Some(&[Prepare]));
    put("model.kind", s(&a.model), Some(MODEL_CMDS));
    put("model.n_estimators", d(&a.n_estimators), Some(MODEL_CMDS));
    put("model.max_depth", s(&a.max_depth), Some(MODEL_CMDS));
    put("model.learning_rate", d(&a.model_learning_rate), Some(MODEL_CMDS));
    put("model.lambda", d(&a.lambda), Some(MODEL_CMDS));
    put("model.gamma", d(&a.gamma), Some(MODEL_CMDS));
    put("model.parallel", flag(a.parallel, "true"), Some(&[Train, Attack, Pipeline]));
    put("pipeline.k", d(&a.folds), Some(&[Train, Pipeline]));
    put("pipeline.c_prime", flag(a.no_c_prime, "false"), Some(&[Pipeline]));
    put("zoo.learning_rate", d(&a.learning_rate), Some(ZOO_CMDS));
    put("zoo.max_iter", d(&a.max_iter), Some(ZOO_CMDS));
    put("zoo.variable_h", d(&a.variable_h), Some(ZOO_CMDS));
    put("zoo.coord_batch", d(&a.coord_batch), Some(ZOO_CMDS));
    put("zoo.kappa", d(&a.kappa), Some(ZOO_CMDS));
    put("zoo.c", d(&a.init_const), Some(ZOO_CMDS));
    put("zoo.abort_early", flag(a.no_abort_early, "false"), Some(ZOO_CMDS));
    put("attack.rows", d(&a.attack_rows), Some(&[Attack]));
    put("sweep.grid", s(&a.grid), Some(&[Sweep]));
    put("sweep.budget_s", d(&a.budget_s), Some(&[Sweep]));
    put("sweep.n_target", d(&a.n_target), Some(&[Sweep]));
    put("sweep.kind", s(&a.sweep_kind), Some(&[Sweep]));
    put("clock.fake_step", d(&a.fake_clock_step), Some(&[Attack, Pipeline, Sweep]));
    put("report.impact", flag(a.impact, "true"), Some(&[Report]));
    put("report.impact_format", s(&a.impact_format), Some(&[Report]));
    put("report.from_csv", a.from_csv.as_ref().map(|p| p.display().to_string()), Some(&[Report]));
    v
}

fn flag_name(key: &str) -> &'static str {
    match key {
        "data" => "--data",
        "model_file" => "--model-file",
        "synth.n" => "--rows",
        "synth.classes" => "--classes",
        "synth.separation" => "--separation",
        "synth.write_logs" => "--write-logs",
        "prepare.inputs" => "--input",
        "prepare.binary" => "--binary",
        "model.kind" => "--model",
        "model.n_estimators" => "--n-estimators",
        "model.max_depth" => "--max-depth",
        "model.learning_rate" => "--model-learning-rate",
        "model.lambda" => "--lambda",
        "model.gamma" => "--gamma",
        "model.parallel" => "--parallel",
        "pipeline.k" => "--folds",
        "pipeline.c_prime" => "--no-c-prime",
        "zoo.learning_rate" => "--learning-rate",
        "zoo.max_iter" => "--max-iter",
        "zoo.variable_h" => "--variable-h",
        "zoo.coord_batch" => "--coord-batch",
        "zoo.kappa" => "--kappa",
        "zoo.c" => "--init-const",
        "zoo.abort_early" => "--no-abort-early",
        "attack.rows" => "--attack-rows",
        "sweep.grid" => "--grid",
        "sweep.budget_s" => "--budget-s",
        "sweep.n_target" => "--n-target",
        "sweep.kind" => "--sweep-kind",
        "clock.fake_step" => "--fake-clock-step",
        "report.impact" => "--impact",
        "report.impact_format" => "--impact-format",
        "report.from_csv" => "--from-csv",
        _ => "option",
    }
}

fn resolve(args: &Args, file: Option<&Manifest>, env_out: Option<PathBuf>) -> CliResult<RunConfig> {
    let cmd = args.command;
    let mut m = Manifest::new();
    if let Some(f) = file {
        for (k, v) in f.iter() {
            if CONFIG_KEYS.contains(&k) {
                set(&mut m, k, v)?;
            }
        }
    }
    for (key, val, cmds) in flag_settings(args) {
        if let Some(cmds) = cmds {
            if !cmds.contains(&cmd) {
                let msg = if key == "model.parallel" && cmd == Command::Sweep {
                    "--parallel conflicts with sweep: timing runs must be single-threaded".to_string()
                } else {
                    format!("{} does not apply to the {} command", flag_name(key), cmd.as_str())
                };
                return Err(CliError::usage(msg));
            }
        }
        set(&mut m, key, &val)?;
    }
    let r = Reader { m: &m };

    let out_dir = match r.get("out_dir") {
        Some(p) => PathBuf::from(p),
        None => env_out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
    };
    let seed = r.parse("seed")?.unwrap_or(DEFAULT_SEED);
    let desk = r.parse("desk")?.unwrap_or(false);

    let synth = SyntheticConfig {
        n: r.parse("synth.n")?.unwrap_or(SyntheticConfig::default().n),
        n_classes: r.parse("synth.classes")?.unwrap_or(SyntheticConfig::default().n_classes),
        class_separation: r.parse("synth.separation")?.unwrap_or(SyntheticConfig::HIGH_SEPARATION),
        seed,
    };
    let data = match r.get("data") {
        Some(SYNTHETIC_DATA) => DataSource::Synthetic,
        Some(p) => DataSource::File(PathBuf::from(p)),
        None => {
            let cached = out_dir.join(DATASET_FILE);
            if cached.is_file() {
                DataSource::File(cached)
            } else {
                DataSource::Synthetic
            }
        }
    };

    let inputs = match r.get("prepare.inputs") {
        Some(s) => s.split(',').map(parse_input).collect::<CliResult<Vec<_>>>()?,
        None => Vec::new(),
    };
    if cmd == Command::Prepare && inputs.is_empty() {
        return Err(CliError::usage("prepare needs at least one --input PATH:CLASS"));
    }

    let precision = match r.get("precision").unwrap_or("f64") {
        "f64" => Precision::F64,
        "f32" => Precision::F32,
        other => return Err(CliError::usage(format!("precision must be f32 or f64, got {other:?}"))),
    };

    let model = resolve_model(&r, seed)?;
    if cmd == Command::Sweep && model.is_parallel() {
        return Err(CliError::usage("model.parallel conflicts with sweep: timing runs must be single-threaded"));
    }

    let zd = ZooConfig::default();
    let zoo = ZooConfig {
        learning_rate: r.parse("zoo.learning_rate")?.unwrap_or(zd.learning_rate),
        max_iter: r.parse("zoo.max_iter")?.unwrap_or(zd.max_iter),
        variable_h: r.parse("zoo.variable_h")?.unwrap_or(zd.variable_h),
        coord_batch: r.parse("zoo.coord_batch")?.unwrap_or(zd.coord_batch),
        kappa: r.parse("zoo.kappa")?.unwrap_or(zd.kappa),
        c: r.parse("zoo.c")?.unwrap_or(zd.c),
        abort_early: r.parse("zoo.abort_early")?.unwrap_or(zd.abort_early),
        seed,
        ..zd
    };
    zoo.validate(usize::MAX).map_err(|e| CliError::usage(e.to_string()))?;

    let grid = match r.get("sweep.grid") {
        Some(g) => parse_grid(g)?,
        None if desk => parse_grid(DESK_GRID)?,
        None => default_grid(),
    };
    let budget_s = r
        .parse("sweep.budget_s")?
        .unwrap_or(if desk { DESK_BUDGET_S } else { DEFAULT_BUDGET_S });
    if !(budget_s.is_finite() && budget_s > 0.0) {
        return Err(CliError::usage(format!("--budget-s must be > 0, got {budget_s}")));
    }
    let n_target = r.parse("sweep.n_target")?.unwrap_or(DEFAULT_N_TARGET);
    if n_target == 0 {
        return Err(CliError::usage("--n-target must be >= 1"));
    }
    let sweep_kind = match r.get("sweep.kind").unwrap_or("attack") {
        "attack" => SweepKind::Attack,
        "at" => SweepKind::At,
        "both" => SweepKind::Both,
        other => return Err(CliError::usage(format!("sweep kind must be attack, at or both, got {other:?}"))),
    };
    let fake_clock_step: Option<f64> = r.parse("clock.fake_step")?;
    if let Some(step) = fake_clock_step {
        if !(step.is_finite() && step > 0.0) {
            return Err(CliError::usage(format!("--fake-clock-step must be > 0, got {step}")));
        }
    }
    let folds = r.parse("pipeline.k")?.unwrap_or(DEFAULT_FOLDS);
    if folds < 2 {
        return Err(CliError::usage(format!("--folds must be >= 2, got {folds}")));
    }

    let impact = r.parse("report.impact")?.unwrap_or(false);
    let from_csv = r.get("report.from_csv").map(PathBuf::from);
    if cmd == Command::Report {
        if impact && from_csv.is_some() {
            return Err(CliError::usage("--impact and --from-csv conflict; pick one"));
        }
        if !impact && from_csv.is_none() {
            return Err(CliError::usage("report needs --impact or --from-csv PATH"));
        }
    }
    let impact_format = match r.get("report.impact_format").unwrap_or("text") {
        "text" => ImpactFormat::Text,
        "csv" => ImpactFormat::Csv,
        other => return Err(CliError::usage(format!("impact format must be text or csv, got {other:?}"))),
    };

    Ok(RunConfig {
        command: cmd,
        out_dir,
        data,
        inputs,
        binary: r.parse("prepare.binary")?.unwrap_or(false),
        model_file: r.get("model_file").map(PathBuf::from),
        precision,
        seed,
        desk,
        synth,
        write_logs: r.parse("synth.write_logs")?.unwrap_or(false),
        model,
        zoo,
        folds,
        c_prime: r.parse("pipeline.c_prime")?.unwrap_or(true),
        attack_rows: r.parse("attack.rows")?,
        grid,
        budget_s,
        n_target,
        sweep_kind,
        fake_clock_step,
        impact,
        impact_format,
        from_csv,
        verbose: args.verbose,
    })
}

fn set(m: &mut Manifest, key: &str, val: &str) -> CliResult<()> {
    m.set(key, val).map_err(|e| CliError::usage(format!("{key}: {e}")))
}

struct Reader<'a> {
    m: &'a Manifest,
}

impl Reader<'_> {
    fn get(&self, key: &str) -> Option<&str> {
        self.m.get(key)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.m.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::usage(format!("bad value {v:?} for {key}"))),
        }
    }
}

fn resolve_model(r: &Reader<'_>, seed: u64) -> CliResult<ModelSpec> {
    let kind: ModelKind = match r.get("model.kind") {
        Some(k) => k.parse().map_err(|e: canbench_core::Error| CliError::usage(e.to_string()))?,
        None => ModelKind::RandomForest,
    };
    let reject = |key: &str| -> CliResult<()> {
        if r.get(key).is_some() {
            Err(CliError::usage(format!("{key} does not apply to model kind {kind}")))
        } else {
            Ok(())
        }
    };
    let depth = |unlimited_ok: bool| -> CliResult<Option<Option<usize>>> {
        match r.get("model.max_depth") {
            None => Ok(None),
            Some("none") if unlimited_ok => Ok(Some(None)),
            Some(v) => v
                .parse()
                .map(|d| Some(Some(d)))
                .map_err(|_| CliError::usage(format!("bad value {v:?} for model.max_depth"))),
        }
    };
    let mut spec = ModelSpec::default_for(kind).with_seed(seed);
    match &mut spec {
        ModelSpec::RandomForest(p) => {
            reject("model.learning_rate")?;
            reject("model.lambda")?;
            reject("model.gamma")?;
            if let Some(d) = depth(true)? {
                p.max_depth = d;
            }
        }
        ModelSpec::GradientBoosting(p) => {
            reject("model.lambda")?;
            reject("model.gamma")?;
            if let Some(d) = depth(false)? {
                p.max_depth = d.unwrap_or(p.max_depth);
            }
            p.learning_rate = r.parse("model.learning_rate")?.unwrap_or(p.learning_rate);
        }
        ModelSpec::Xgb(p) => {
            if let Some(d) = depth(false)? {
                p.max_depth = d.unwrap_or(p.max_depth);
            }
            p.learning_rate = r.parse("model.learning_rate")?.unwrap_or(p.learning_rate);
            p.lambda = r.parse("model.lambda")?.unwrap_or(p.lambda);
            p.gamma = r.parse("model.gamma")?.unwrap_or(p.gamma);
        }
    }
    if let Some(n) = r.parse("model.n_estimators")? {
        spec = spec.with_n_estimators(n);
    }
    if let Some(par) = r.parse("model.parallel")? {
        spec = spec.with_parallel(par);
    }
    spec.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(spec)
}

fn parse_input(s: &str) -> CliResult<(PathBuf, TrafficClass)> {
    let (path, label) = s
        .rsplit_once(':')
        .ok_or_else(|| CliError::usage(format!("--input expects PATH:CLASS, got {s:?}")))?;
    if path.is_empty() {
        return Err(CliError::usage(format!("--input {s:?} has an empty path")));
    }
    let class = label
        .parse()
        .map_err(|e: canbench_core::Error| CliError::usage(format!("--input {s:?}: {e}")))?;
    Ok((PathBuf::from(path), class))
}

/// Parses `start:stop:step` (stop always included) or `a,b,c`. The result
/// must be strictly increasing and start at 1 or more.
pub fn parse_grid(s: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::usage(format!("bad grid {s:?}: expected start:stop:step or a comma list"));
    let grid: Vec<usize> = if s.contains(':') {
        let parts: Vec<usize> = s
            .split(':')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<CliResult<_>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(bad());
        };
        if step == 0 || start > stop {
            return Err(bad());
        }
        let mut g: Vec<usize> = (start..=stop).step_by(step).collect();
        if g.last() != Some(&stop) {
            g.push(stop);
        }
        g
    } else {
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<CliResult<_>>()?
    };
    canbench_core::bench::validate_grid(&grid).map_err(|e| CliError::usage(format!("grid {s:?}: {e}")))?;
    Ok(grid)
}

fn format_grid(grid: &[usize]) -> String {
    grid.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// The resolved settings as config keys. Feeding this back through
    /// `--config` reproduces the run.
    pub fn to_manifest(&self) -> CliResult<Manifest> {
        let mut m = Manifest::new();
        let mut put = |k: &str, v: String| set(&mut m, k, &v);
        put("out_dir", self.out_dir.display().to_string())?;
        put(
            "data",
            match &self.data {
                DataSource::Synthetic => SYNTHETIC_DATA.to_string(),
                DataSource::File(p) => p.display().to_string(),
            },
        )?;
        if let Some(p) = &self.model_file {
            put("model_file", p.display().to_string())?;
        }
        put("precision", self.precision.as_str().to_string())?;
        put("seed", self.seed.to_string())?;
        put("desk", self.desk.to_string())?;
        put("synth.n", self.synth.n.to_string())?;
        put("synth.classes", self.synth.n_classes.to_string())?;
        put("synth.separation", self.synth.class_separation.to_string())?;
        put("synth.write_logs", self.write_logs.to_string())?;
        if !self.inputs.is_empty() {
            let v: Vec<String> = self.inputs.iter().map(|(p, c)| format!("{}:{c}", p.display())).collect();
            put("prepare.inputs", v.join(","))?;
        }
        put("prepare.binary", self.binary.to_string())?;
        put("model.kind", self.model.kind().short_name().to_string())?;
        put("model.n_estimators", self.model.n_estimators().to_string())?;
        put("model.parallel", self.model.is_parallel().to_string())?;
        match &self.model {
            ModelSpec::RandomForest(p) => {
                put("model.max_depth", p.max_depth.map_or("none".to_string(), |d| d.to_string()))?;
            }
            ModelSpec::GradientBoosting(p) => {
                put("model.max_depth", p.max_depth.to_string())?;
                put("model.learning_rate", p.learning_rate.to_string())?;
            }
            ModelSpec::Xgb(p) => {
                put("model.max_depth", p.max_depth.to_string())?;
                put("model.learning_rate", p.learning_rate.to_string())?;
                put("model.lambda", p.lambda.to_string())?;
                put("model.gamma", p.gamma.to_string())?;
            }
        }
        put("pipeline.k", self.folds.to_string())?;
        put("pipeline.c_prime", self.c_prime.to_string())?;
        put("zoo.learning_rate", self.zoo.learning_rate.to_string())?;
        put("zoo.max_iter", self.zoo.max_iter.to_string())?;
        put("zoo.variable_h", self.zoo.variable_h.to_string())?;
        put("zoo.coord_batch", self.zoo.coord_batch.to_string())?;
        put("zoo.kappa", self.zoo.kappa.to_string())?;
        put("zoo.c", self.zoo.c.to_string())?;
        put("zoo.abort_early", self.zoo.abort_early.to_string())?;
        if let Some(n) = self.attack_rows {
            put("attack.rows", n.to_string())?;
        }
        put("sweep.grid", format_grid(&self.grid))?;
        put("sweep.budget_s", self.budget_s.to_string())?;
        put("sweep.n_target", self.n_target.to_string())?;
        put("sweep.kind", self.sweep_kind.as_str().to_string())?;
        if let Some(s) = self.fake_clock_step {
            put("clock.fake_step", s.to_string())?;
        }
        put("report.impact", self.impact.to_string())?;
        put(
            "report.impact_format",
            match self.impact_format {
                ImpactFormat::Text => "text",
                ImpactFormat::Csv => "csv",
            }
            .to_string(),
        )?;
        if let Some(p) = &self.from_csv {
            put("report.from_csv", p.display().to_string())?;
        }
        Ok(m)
    }
}
