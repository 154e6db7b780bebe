//! Upper and lower performance bounds of a detector over a sweep.
//!
//! Repeatability is measured for every scene at every transformation step,
//! giving an `n x m` matrix whose column `k` is the sample set at step `k`.
//! Per column the maximum, minimum and median give three curves. The band
//! between the max and min curves is the operating region; the area under
//! the min curve is the guarantee region.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::detectors::{ingest_keypoints, keypoint_file_name, Detector, Keypoint};
use crate::error::{Error, Result};
use crate::imaging::{Dataset, TransformKind};
use crate::repeatability::repeatability;

/// Header of the matrix CSV.
pub const MATRIX_HEADER: &str = "scene_id,step_amount,score";

/// Transformation amounts behind the step indices.
#[derive(Clone, Debug, PartialEq)]
pub struct StepAxis {
    amounts: Vec<f64>,
}

impl StepAxis {
    pub fn new(amounts: Vec<f64>) -> Result<Self> {
        if amounts.len() < 2 {
            return Err(Error::Validation(format!(
                "step axis needs at least 2 amounts, got {}",
                amounts.len()
            )));
        }
        if amounts[0] != 0.0 {
            return Err(Error::Validation(format!(
                "step axis must start at 0, got {}",
                amounts[0]
            )));
        }
        if amounts.iter().any(|a| !a.is_finite()) || amounts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("step axis must be strictly increasing".into()));
        }
        Ok(Self { amounts })
    }

    pub fn amounts(&self) -> &[f64] {
        &self.amounts
    }

    pub fn len(&self) -> usize {
        self.amounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amounts.is_empty()
    }

    /// Amounts rescaled so the first is 0 and the last is 1.
    pub fn normalized(&self) -> Vec<f64> {
        let a0 = self.amounts[0];
        let span = self.amounts[self.amounts.len() - 1] - a0;
        self.amounts.iter().map(|a| (a - a0) / span).collect()
    }
}

/// Scenes by steps; `None` marks a scene whose score was undefined.
#[derive(Clone, Debug, PartialEq)]
pub struct RepeatabilityMatrix {
    pub scene_ids: Vec<String>,
    pub axis: StepAxis,
    pub scores: Vec<Vec<Option<f64>>>,
    pub detector: String,
}

impl RepeatabilityMatrix {
    pub fn validate(&self) -> Result<()> {
        if self.scores.len() != self.scene_ids.len() {
            return Err(Error::Validation(format!(
                "{} score rows for {} scenes",
                self.scores.len(),
                self.scene_ids.len()
            )));
        }
        for (id, row) in self.scene_ids.iter().zip(&self.scores) {
            if row.len() != self.axis.len() {
                return Err(Error::Validation(format!(
                    "scene {id}: {} scores for {} steps",
                    row.len(),
                    self.axis.len()
                )));
            }
            if let Some(bad) = row.iter().flatten().find(|s| !(0.0..=1.0).contains(*s)) {
                return Err(Error::Validation(format!("scene {id}: score {bad} outside [0, 1]")));
            }
        }
        for k in 0..self.axis.len() {
            if self.column(k).is_empty() {
                return Err(Error::DegenerateColumn {
                    step_amount: self.axis.amounts()[k],
                });
            }
        }
        Ok(())
    }

    /// Present scores at step `k`, in scene order.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.scores.iter().filter_map(|row| row[k]).collect()
    }
}

/// Max, min and median curves with their region areas.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsCurves {
    pub axis: StepAxis,
    pub max_curve: Vec<f64>,
    pub min_curve: Vec<f64>,
    pub median_curve: Vec<f64>,
    pub operating_area: f64,
    pub guarantee_area: f64,
}

/// Raw stability figures; no classification thresholds are applied.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilitySummary {
    pub operating_area: f64,
    pub guarantee_area: f64,
    /// Widest gap between the max and min curves.
    pub max_band_width: f64,
    /// First amount at which the min curve is exactly zero.
    pub first_zero_min_step: Option<f64>,
}

/// Something that yields keypoints for a dataset step, with the image size.
pub trait KeypointSource: Sync {
    fn label(&self) -> String;

    /// Keypoints for step index `step` (0-based) and the dimensions of that
    /// step's image.
    fn keypoints(&self, dataset: &Dataset, step: usize) -> Result<(Vec<Keypoint>, (usize, usize))>;
}

impl KeypointSource for Detector {
    fn label(&self) -> String {
        self.kind().to_string()
    }

    fn keypoints(&self, dataset: &Dataset, step: usize) -> Result<(Vec<Keypoint>, (usize, usize))> {
        match self {
            Detector::External(dir) => {
                let image_path = &dataset.image_paths[step];
                let (w, h) = image::image_dimensions(image_path).map_err(|e| match e {
                    image::ImageError::IoError(io) => Error::io(image_path, io),
                    other => Error::Format {
                        path: image_path.clone(),
                        message: other.to_string(),
                    },
                })?;
                let dims = (w as usize, h as usize);
                let path = dir.join(keypoint_file_name(&dataset.scene_id, step + 1));
                Ok((ingest_keypoints(&path, Some(dims))?, dims))
            }
            native => {
                let img = dataset.load_step(step)?;
                Ok((native.detect(&img)?, img.dims()))
            }
        }
    }
}

fn scene_row<S: KeypointSource + ?Sized>(source: &S, dataset: &Dataset, tol: f64) -> Result<Vec<Option<f64>>> {
    let (ref_kps, ref_dims) = source.keypoints(dataset, 0)?;
    (0..dataset.step_count())
        .map(|k| {
            let (tgt_kps, tgt_dims) = source.keypoints(dataset, k)?;
            match repeatability(&ref_kps, &tgt_kps, &dataset.homography, tol, ref_dims, tgt_dims) {
                Ok(r) => Ok(Some(r.score)),
                Err(Error::UndefinedScore) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Fills the repeatability matrix, one row per dataset.
///
/// Scenes run on the current rayon pool; rows are reduced in dataset order
/// and the first failing scene (in that order) determines the error.
pub fn collect_matrix<S: KeypointSource + ?Sized>(datasets: &[Dataset], source: &S, tol: f64) -> Result<RepeatabilityMatrix> {
    let first = datasets
        .first()
        .ok_or_else(|| Error::Config("no datasets to evaluate".into()))?;
    let kind: TransformKind = first.kind;
    for ds in datasets {
        if ds.kind != kind || ds.steps != first.steps {
            return Err(Error::Config(format!(
                "dataset {} has a different kind or step schedule than {}",
                ds.scene_id, first.scene_id
            )));
        }
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Config(format!("tolerance must be > 0, got {tol}")));
    }
    let axis = StepAxis::new(first.steps.clone())?;

    let rows: Vec<Result<Vec<Option<f64>>>> = datasets
        .par_iter()
        .map(|ds| scene_row(source, ds, tol))
        .collect();
    let scores = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let matrix = RepeatabilityMatrix {
        scene_ids: datasets.iter().map(|d| d.scene_id.clone()).collect(),
        axis,
        scores,
        detector: source.label(),
    };
    matrix.validate()?;
    Ok(matrix)
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Per-step max, min and median over the present scores.
pub fn aggregate_curves(matrix: &RepeatabilityMatrix) -> Result<BoundsCurves> {
    matrix.validate()?;
    let m = matrix.axis.len();
    let mut max_curve = Vec::with_capacity(m);
    let mut min_curve = Vec::with_capacity(m);
    let mut median_curve = Vec::with_capacity(m);
    for k in 0..m {
        let mut col = matrix.column(k);
        col.sort_by(f64::total_cmp);
        min_curve.push(col[0]);
        max_curve.push(col[col.len() - 1]);
        median_curve.push(median_of_sorted(&col));
    }
    let (operating_area, guarantee_area) = region_areas(&max_curve, &min_curve, &matrix.axis)?;
    Ok(BoundsCurves {
        axis: matrix.axis.clone(),
        max_curve,
        min_curve,
        median_curve,
        operating_area,
        guarantee_area,
    })
}

/// Trapezoidal integral of `values` over `xs`.
pub fn trapezoid(xs: &[f64], values: &[f64]) -> f64 {
    xs.windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| (x[1] - x[0]) * (v[0] + v[1]) / 2.0)
        .sum()
}

/// `(operating_area, guarantee_area)` over the axis normalized to [0, 1].
pub fn region_areas(max_curve: &[f64], min_curve: &[f64], axis: &StepAxis) -> Result<(f64, f64)> {
    if max_curve.len() != axis.len() || min_curve.len() != axis.len() {
        return Err(Error::Invariant(format!(
            "curve lengths {} and {} do not match {} steps",
            max_curve.len(),
            min_curve.len(),
            axis.len()
        )));
    }
    if let Some(k) = (0..axis.len()).find(|&k| min_curve[k] > max_curve[k]) {
        return Err(Error::Invariant(format!(
            "min {} exceeds max {} at step {}",
            min_curve[k],
            max_curve[k],
            axis.amounts()[k]
        )));
    }
    let xs = axis.normalized();
    let band: Vec<f64> = max_curve.iter().zip(min_curve).map(|(a, b)| a - b).collect();
    Ok((trapezoid(&xs, &band), trapezoid(&xs, min_curve)))
}

pub fn stability_summary(curves: &BoundsCurves) -> StabilitySummary {
    let max_band_width = curves
        .max_curve
        .iter()
        .zip(&curves.min_curve)
        .map(|(a, b)| a - b)
        .fold(0.0, f64::max);
    let first_zero_min_step = curves
        .min_curve
        .iter()
        .position(|&v| v == 0.0)
        .map(|k| curves.axis.amounts()[k]);
    StabilitySummary {
        operating_area: curves.operating_area,
        guarantee_area: curves.guarantee_area,
        max_band_width,
        first_zero_min_step,
    }
}

/// Matrix CSV text: one row per (scene, step), empty score when missing.
pub fn format_matrix_csv(matrix: &RepeatabilityMatrix) -> String {
    let mut out = String::from(MATRIX_HEADER);
    out.push('\n');
    for (id, row) in matrix.scene_ids.iter().zip(&matrix.scores) {
        for (amount, score) in matrix.axis.amounts().iter().zip(row) {
            match score {
                Some(s) => writeln!(out, "{id},{amount},{s}"),
                None => writeln!(out, "{id},{amount},"),
            }
            .expect("writing to a String");
        }
    }
    out
}

pub fn write_matrix_csv(matrix: &RepeatabilityMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix_csv(matrix)).map_err(|e| Error::io(path, e))
}

pub fn read_matrix_csv(path: impl AsRef<Path>, detector: &str) -> Result<RepeatabilityMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_csv(&text, &path.display().to_string(), detector)
}

/// Parses matrix CSV text. Scenes keep their order of first appearance and
/// must all list the same step amounts in the same order.
pub fn parse_matrix_csv(text: &str, source_name: &str, detector: &str) -> Result<RepeatabilityMatrix> {
    let parse_err = |line: u64, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };
    let first = text.lines().next().unwrap_or("");
    if first != MATRIX_HEADER {
        return Err(parse_err(1, format!("expected header {MATRIX_HEADER:?}, found {first:?}")));
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut scene_ids: Vec<String> = Vec::new();
    let mut amounts_per_scene: Vec<Vec<f64>> = Vec::new();
    let mut scores: Vec<Vec<Option<f64>>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(parse_err(line, format!("expected 3 fields, found {}", record.len())));
        }
        let id = record[0].trim();
        if id.is_empty() {
            return Err(parse_err(line, "empty scene_id".into()));
        }
        let amount: f64 = record[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad step_amount {:?}", &record[1])))?;
        let raw = record[2].trim();
        let score = if raw.is_empty() {
            None
        } else {
            let s: f64 = raw
                .parse()
                .map_err(|_| parse_err(line, format!("bad score {raw:?}")))?;
            if !(0.0..=1.0).contains(&s) {
                return Err(parse_err(line, format!("score {s} outside [0, 1]")));
            }
            Some(s)
        };
        let row = match scene_ids.iter().position(|s| s == id) {
            Some(i) if i + 1 == scene_ids.len() => i,
            Some(_) => return Err(parse_err(line, format!("rows of scene {id:?} are not contiguous"))),
            None => {
                scene_ids.push(id.to_string());
                amounts_per_scene.push(Vec::new());
                scores.push(Vec::new());
                scene_ids.len() - 1
            }
        };
        amounts_per_scene[row].push(amount);
        scores[row].push(score);
    }
    let Some(axis_amounts) = amounts_per_scene.first().cloned() else {
        return Err(parse_err(1, "no data rows".into()));
    };
    for (id, amounts) in scene_ids.iter().zip(&amounts_per_scene) {
        if *amounts != axis_amounts {
            return Err(parse_err(0, format!("scene {id:?} lists different step amounts")));
        }
    }
    let axis = StepAxis::new(axis_amounts).map_err(|e| parse_err(0, e.to_string()))?;
    let matrix = RepeatabilityMatrix {
        scene_ids,
        axis,
        scores,
        detector: detector.to_string(),
    };
    Ok(matrix)
}
