//! The `featbounds` command line: `gen`, `eval`, `bounds` and `all`.
//!
//! Working-directory layout under `--out`:
//!
//! ```text
//! datasets/<kind>/<scene_id>/manifest.json, <scene_id>_step<k>.{png,jpg}
//! results/<kind>/<detector>/matrix.csv, curves.csv, bounds.svg
//! ```
//!
//! Exit codes: 0 success, 2 configuration or parse error, 3 I/O error,
//! 4 degenerate data (a step with no defined score).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use crate::bounds::{aggregate_curves, collect_matrix, read_matrix_csv, stability_summary, write_matrix_csv};
use crate::detectors::{DetectorKind, DetectorSpec};
use crate::error::{Error, Result};
use crate::imaging::{build_dataset, default_schedule, load_image, Dataset, TransformKind, DEFAULT_STEP_COUNT, MANIFEST_NAME};
use crate::report::{render_bounds_plot, write_curves_csv, PlotStyle};
use crate::repeatability::DEFAULT_TOLERANCE;

const SCENE_EXTENSIONS: [&str; 4] = ["png", "pgm", "jpg", "jpeg"];

#[derive(Debug, Parser)]
#[command(name = "featbounds", version, about = "Performance bounds of local feature detectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build transformation sweeps for every scene image.
    Gen(SharedArgs),
    /// Detect keypoints over the sweeps and write repeatability matrices.
    Eval(SharedArgs),
    /// Turn a matrix CSV into bounds curves and a plot.
    Bounds(BoundsArgs),
    /// gen, eval and bounds in sequence.
    All(SharedArgs),
}

#[derive(Debug, Clone, Default, Args)]
struct SharedArgs {
    /// Directory of scene images (PNG, PGM or JPEG).
    #[arg(long)]
    scenes: Option<PathBuf>,
    /// Working directory for datasets and results.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Transformation(s): jpeg, light, or a comma list.
    #[arg(long)]
    transform: Option<String>,
    /// Step schedule: `default` or a comma list of percentages.
    #[arg(long)]
    steps: Option<String>,
    /// Detector(s): harris, fast, dog, hessian, ext, or a comma list.
    #[arg(long)]
    detector: Option<String>,
    /// Directory of external keypoint CSV files (for `ext`).
    #[arg(long)]
    keypoints: Option<PathBuf>,
    /// Correspondence tolerance in pixels.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads; 0 picks one per core.
    #[arg(long)]
    jobs: Option<usize>,
    /// TOML file with the same keys; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Detector parameter override, `name=value` or `detector.name=value`.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
}

#[derive(Debug, Clone, Args)]
struct BoundsArgs {
    /// Matrix CSV produced by `eval`.
    matrix: PathBuf,
    /// Output directory for curves.csv and bounds.svg.
    #[arg(long)]
    out: PathBuf,
    /// Plot title.
    #[arg(long)]
    title: Option<String>,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    scenes: Option<PathBuf>,
    out: Option<PathBuf>,
    transform: Option<StringOrList>,
    steps: Option<StepsValue>,
    detector: Option<StringOrList>,
    keypoints: Option<PathBuf>,
    tol: Option<f64>,
    jobs: Option<usize>,
    #[serde(default)]
    params: BTreeMap<String, ParamValue>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum StringOrList {
    One(String),
    Many(Vec<String>),
}

impl StringOrList {
    fn joined(&self) -> String {
        match self {
            StringOrList::One(s) => s.clone(),
            StringOrList::Many(v) => v.join(","),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum StepsValue {
    Named(String),
    List(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ParamValue {
    Number(f64),
    Table(BTreeMap<String, f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepChoice {
    Default,
    Explicit(Vec<f64>),
}

impl StepChoice {
    pub fn schedule(&self, kind: TransformKind) -> Vec<f64> {
        match self {
            StepChoice::Default => default_schedule(kind, DEFAULT_STEP_COUNT),
            StepChoice::Explicit(v) => v.clone(),
        }
    }
}

/// Fully resolved settings for one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenes_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub kinds: Vec<TransformKind>,
    pub steps: StepChoice,
    pub detectors: Vec<DetectorSpec>,
    pub tolerance: f64,
    /// 0 means one worker per core.
    pub jobs: usize,
}

impl RunConfig {
    /// Defaults for everything but the directories.
    pub fn new(scenes_dir: Option<PathBuf>, out_dir: PathBuf) -> Self {
        Self {
            scenes_dir,
            out_dir,
            kinds: vec![TransformKind::JpegCompression],
            steps: StepChoice::Default,
            detectors: vec![DetectorSpec::new(DetectorKind::Harris)],
            tolerance: DEFAULT_TOLERANCE,
            jobs: 0,
        }
    }

    pub fn datasets_dir(&self, kind: TransformKind) -> PathBuf {
        self.out_dir.join("datasets").join(kind.as_str())
    }

    pub fn results_dir(&self, kind: TransformKind, detector: DetectorKind) -> PathBuf {
        self.out_dir
            .join("results")
            .join(kind.as_str())
            .join(detector.as_str())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
    }
}

fn parse_list<T>(raw: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("empty list {raw:?}")));
    }
    Ok(items)
}

fn parse_steps(raw: &str) -> Result<StepChoice> {
    if raw.trim() == "default" {
        return Ok(StepChoice::Default);
    }
    parse_list(raw, |s| {
        s.parse::<f64>()
            .map_err(|_| Error::Config(format!("bad step value {s:?}")))
    })
    .map(StepChoice::Explicit)
}

fn resolve(args: &SharedArgs) -> Result<RunConfig> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            toml::from_str::<ConfigFile>(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };

    let out_dir = args
        .out
        .clone()
        .or(file.out)
        .ok_or_else(|| Error::Config("--out is required".into()))?;
    let mut cfg = RunConfig::new(args.scenes.clone().or(file.scenes), out_dir);

    if let Some(raw) = args.transform.clone().or(file.transform.map(|t| t.joined())) {
        cfg.kinds = parse_list(&raw, TransformKind::parse)?;
    }
    cfg.steps = match (&args.steps, file.steps) {
        (Some(raw), _) => parse_steps(raw)?,
        (None, Some(StepsValue::Named(raw))) => parse_steps(&raw)?,
        (None, Some(StepsValue::List(v))) => StepChoice::Explicit(v),
        (None, None) => StepChoice::Default,
    };
    if let StepChoice::Explicit(steps) = &cfg.steps {
        for &kind in &cfg.kinds {
            crate::imaging::validate_schedule(kind, steps)
                .map_err(|e| Error::Config(format!("--steps for {kind}: {e}")))?;
        }
    }
    cfg.tolerance = args.tol.or(file.tol).unwrap_or(DEFAULT_TOLERANCE);
    if !(cfg.tolerance > 0.0 && cfg.tolerance.is_finite()) {
        return Err(Error::Config(format!("--tol must be > 0, got {}", cfg.tolerance)));
    }
    cfg.jobs = args.jobs.or(file.jobs).unwrap_or(0);

    let kinds = match args.detector.clone().or(file.detector.map(|d| d.joined())) {
        Some(raw) => parse_list(&raw, DetectorKind::parse)?,
        None => vec![DetectorKind::Harris],
    };
    let keypoint_dir = args.keypoints.clone().or(file.keypoints);

    // (detector or None, name, value); flags are applied after the file
    let mut overrides: Vec<(Option<String>, String, f64)> = Vec::new();
    for (key, value) in file.params {
        match value {
            ParamValue::Number(v) => overrides.push((None, key, v)),
            ParamValue::Table(t) => {
                overrides.extend(t.into_iter().map(|(k, v)| (Some(key.clone()), k, v)))
            }
        }
    }
    for raw in &args.params {
        let (key, value) = raw
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--param {raw:?} is not name=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("--param {raw:?} has a non-numeric value")))?;
        match key.split_once('.') {
            Some((det, name)) => overrides.push((Some(det.to_string()), name.to_string(), value)),
            None => overrides.push((None, key.to_string(), value)),
        }
    }

    let mut specs: Vec<DetectorSpec> = kinds
        .iter()
        .map(|&k| DetectorSpec {
            name: k,
            params: BTreeMap::new(),
            keypoint_dir: (k == DetectorKind::External).then(|| keypoint_dir.clone()).flatten(),
        })
        .collect();
    for (det, name, value) in overrides {
        let mut applied = false;
        for spec in specs.iter_mut() {
            let targeted = match &det {
                Some(d) => DetectorKind::parse(d)? == spec.name,
                None => spec.name.param_names().contains(&name.as_str()),
            };
            if targeted {
                spec.params.insert(name.clone(), value);
                applied = true;
            }
        }
        if !applied && det.is_none() {
            return Err(Error::Config(format!(
                "parameter {name:?} does not apply to any selected detector"
            )));
        }
    }
    for spec in &specs {
        spec.build().map_err(|e| match e {
            Error::Parameter(m) => Error::Config(m),
            other => other,
        })?;
    }
    specs.dedup_by_key(|s| s.name);
    cfg.detectors = specs;
    Ok(cfg)
}

fn scene_id_from_stem(stem: &str) -> String {
    let id: String = stem
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    let id = id.trim_start_matches('.');
    if id.is_empty() {
        "scene".to_string()
    } else {
        id.to_string()
    }
}

/// Scene images in `dir`, sorted by file name, with their scene ids.
pub fn discover_scenes(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_scene = path.is_file()
            && path
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| SCENE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if is_scene {
            files.push(path);
        }
    }
    files.sort();
    let mut scenes: Vec<(String, PathBuf)> = Vec::with_capacity(files.len());
    for path in files {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scene");
        let id = scene_id_from_stem(stem);
        if scenes.iter().any(|(other, _)| *other == id) {
            return Err(Error::Config(format!(
                "two scene files map to the id {id:?}; rename one of them"
            )));
        }
        scenes.push((id, path));
    }
    Ok(scenes)
}

/// Dataset directories under `dir`, sorted by name.
pub fn discover_datasets(dir: &Path) -> Result<Vec<Dataset>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut dirs: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.join(MANIFEST_NAME).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    dirs.iter().map(Dataset::open).collect()
}

/// Writes one dataset per scene and transformation kind.
pub fn cmd_gen(cfg: &RunConfig) -> Result<()> {
    let scenes_dir = cfg
        .scenes_dir
        .as_ref()
        .ok_or_else(|| Error::Config("--scenes is required".into()))?;
    let scenes = discover_scenes(scenes_dir)?;
    if scenes.is_empty() {
        return Err(Error::Config(format!("no scenes found in {}", scenes_dir.display())));
    }
    let pool = cfg.pool()?;
    for &kind in &cfg.kinds {
        let schedule = cfg.steps.schedule(kind);
        crate::imaging::validate_schedule(kind, &schedule).map_err(|e| Error::Config(e.to_string()))?;
        let root = cfg.datasets_dir(kind);
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;

        let results: Vec<Result<Dataset>> = pool.install(|| {
            scenes
                .par_iter()
                .map(|(id, path)| {
                    let img = load_image(path)?;
                    build_dataset(&img, id, kind, &schedule, &root)
                })
                .collect()
        });
        if let Some(pos) = results.iter().position(|r| r.is_err()) {
            for (id, _) in &scenes {
                let _ = fs::remove_dir_all(root.join(id));
            }
            return Err(results.into_iter().nth(pos).expect("index in range").unwrap_err());
        }
        println!(
            "gen: {kind}: {} scenes, {} images, {} manifests in {}",
            scenes.len(),
            scenes.len() * schedule.len(),
            scenes.len(),
            root.display()
        );
    }
    Ok(())
}

/// Writes `results/<kind>/<detector>/matrix.csv` for every selected pair.
pub fn cmd_eval(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let pool = cfg.pool()?;
    let mut written = Vec::new();
    for &kind in &cfg.kinds {
        let datasets = discover_datasets(&cfg.datasets_dir(kind))?;
        if datasets.is_empty() {
            return Err(Error::Config(format!(
                "no datasets found in {}; run gen first",
                cfg.datasets_dir(kind).display()
            )));
        }
        for spec in &cfg.detectors {
            let detector = spec.build()?;
            let matrix = pool.install(|| collect_matrix(&datasets, &detector, cfg.tolerance))?;
            let dir = cfg.results_dir(kind, spec.name);
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let path = dir.join("matrix.csv");
            write_matrix_csv(&matrix, &path)?;
            println!(
                "eval: {kind}/{}: {} scenes x {} steps -> {}",
                spec.name,
                matrix.scene_ids.len(),
                matrix.axis.len(),
                path.display()
            );
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes `curves.csv` and `bounds.svg` for one matrix into `out_dir`.
pub fn cmd_bounds(matrix_csv: &Path, out_dir: &Path, title: &str) -> Result<()> {
    let matrix = read_matrix_csv(matrix_csv, title)?;
    let curves = aggregate_curves(&matrix)?;
    let summary = stability_summary(&curves);
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_curves_csv(&curves, out_dir.join("curves.csv"))?;
    let svg = render_bounds_plot(&curves, &PlotStyle::default(), title);
    let svg_path = out_dir.join("bounds.svg");
    fs::write(&svg_path, svg).map_err(|e| Error::io(&svg_path, e))?;
    println!(
        "bounds: {title}: operating_area={} guarantee_area={} max_band_width={}",
        summary.operating_area, summary.guarantee_area, summary.max_band_width
    );
    if let Some(step) = summary.first_zero_min_step {
        println!("bounds: {title}: min curve reaches zero at {step}");
    }
    Ok(())
}

/// gen, then eval, then bounds for every (kind, detector) pair.
pub fn cmd_all(cfg: &RunConfig) -> Result<()> {
    cmd_gen(cfg)?;
    let matrices = cmd_eval(cfg)?;
    for matrix in matrices {
        let dir = matrix.parent().expect("matrix lives in a results dir");
        let detector = dir.file_name().and_then(|s| s.to_str()).unwrap_or("");
        let kind = dir
            .parent()
            .and_then(|p| p.file_name())
            .and_then(|s| s.to_str())
            .unwrap_or("");
        cmd_bounds(&matrix, dir, &format!("{detector} / {kind}"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => cmd_gen(&resolve(&args)?),
        Command::Eval(args) => cmd_eval(&resolve(&args)?).map(|_| ()),
        Command::Bounds(args) => {
            let title = args.title.clone().unwrap_or_else(|| "repeatability bounds".into());
            cmd_bounds(&args.matrix, &args.out, &title)
        }
        Command::All(args) => cmd_all(&resolve(&args)?),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
