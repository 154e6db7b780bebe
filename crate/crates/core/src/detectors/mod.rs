//! Keypoint detectors.
//!
//! Four native detectors share one output contract: keypoints lie inside
//! the image but outside the border band where their kernel footprint would
//! not fit, sorted by descending response then ascending `(y, x)`.
//! Externally produced keypoints enter through [`external`].

pub mod external;
pub mod fast;
pub mod filter;
pub mod harris;
pub mod nms;
pub mod pyramid;

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::imaging::Image;

pub use external::{ingest_keypoints, keypoint_file_name, write_keypoints};
pub use fast::{detect_fast, FastParams};
pub use harris::{detect_harris, HarrisParams};
pub use pyramid::{detect_dog, detect_hessian, DogParams, HessianParams, PyramidParams};

/// A detected interest point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Keypoint {
    /// Column, origin at the top-left pixel center.
    pub x: f64,
    /// Row.
    pub y: f64,
    /// Characteristic scale in pixels; 1.0 for fixed-scale detectors.
    pub scale: f64,
    pub response: f64,
}

impl Keypoint {
    /// Checks the keypoint invariants, optionally against image bounds.
    pub fn validate(&self, dims: Option<(usize, usize)>) -> std::result::Result<(), String> {
        if !(self.x.is_finite() && self.y.is_finite()) {
            return Err(format!("non-finite coordinate ({}, {})", self.x, self.y));
        }
        if self.x < 0.0 || self.y < 0.0 {
            return Err(format!("negative coordinate ({}, {})", self.x, self.y));
        }
        if let Some((w, h)) = dims {
            if self.x >= w as f64 || self.y >= h as f64 {
                return Err(format!(
                    "coordinate ({}, {}) outside {w}x{h} image",
                    self.x, self.y
                ));
            }
        }
        if !(self.scale >= 1.0 && self.scale.is_finite()) {
            return Err(format!("scale {} below 1", self.scale));
        }
        if !self.response.is_finite() {
            return Err(format!("non-finite response {}", self.response));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    Harris,
    Fast,
    Dog,
    HessianBlob,
    External,
}

impl DetectorKind {
    pub const NATIVE: [DetectorKind; 4] = [
        DetectorKind::Harris,
        DetectorKind::Fast,
        DetectorKind::Dog,
        DetectorKind::HessianBlob,
    ];

    /// Command-line name.
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Harris => "harris",
            DetectorKind::Fast => "fast",
            DetectorKind::Dog => "dog",
            DetectorKind::HessianBlob => "hessian",
            DetectorKind::External => "ext",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "harris" => Ok(DetectorKind::Harris),
            "fast" => Ok(DetectorKind::Fast),
            "dog" => Ok(DetectorKind::Dog),
            "hessian" => Ok(DetectorKind::HessianBlob),
            "ext" | "external" => Ok(DetectorKind::External),
            other => Err(Error::Config(format!(
                "unknown detector {other:?} (expected harris, fast, dog, hessian or ext)"
            ))),
        }
    }

    /// Parameter names accepted by this detector.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            DetectorKind::Harris => &["sigma_d", "sigma_i", "k", "threshold", "nms_radius"],
            DetectorKind::Fast => &["t", "arc_len", "nms_radius"],
            DetectorKind::Dog => &[
                "octaves",
                "scales_per_octave",
                "sigma0",
                "contrast_threshold",
                "edge_ratio",
            ],
            DetectorKind::HessianBlob => &["octaves", "scales_per_octave", "sigma0", "threshold"],
            DetectorKind::External => &[],
        }
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Detector name plus parameter overrides, as read from configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorSpec {
    pub name: DetectorKind,
    pub params: BTreeMap<String, f64>,
    pub keypoint_dir: Option<PathBuf>,
}

impl DetectorSpec {
    pub fn new(name: DetectorKind) -> Self {
        Self {
            name,
            params: BTreeMap::new(),
            keypoint_dir: None,
        }
    }

    pub fn external(keypoint_dir: impl Into<PathBuf>) -> Self {
        Self {
            name: DetectorKind::External,
            params: BTreeMap::new(),
            keypoint_dir: Some(keypoint_dir.into()),
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Resolves defaults and overrides into a validated [`Detector`].
    pub fn build(&self) -> Result<Detector> {
        let allowed = self.name.param_names();
        if let Some(bad) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Parameter(format!(
                "{} has no parameter {bad:?} (known: {})",
                self.name,
                allowed.join(", ")
            )));
        }
        let get = |key: &str, default: f64| self.params.get(key).copied().unwrap_or(default);
        let detector = match self.name {
            DetectorKind::Harris => {
                let d = HarrisParams::default();
                let p = HarrisParams {
                    sigma_d: get("sigma_d", d.sigma_d),
                    sigma_i: get("sigma_i", d.sigma_i),
                    k: get("k", d.k),
                    threshold: get("threshold", d.threshold),
                    nms_radius: as_count("nms_radius", get("nms_radius", d.nms_radius as f64))?,
                };
                p.validate()?;
                Detector::Harris(p)
            }
            DetectorKind::Fast => {
                let d = FastParams::default();
                let t = get("t", d.t as f64);
                if !(1.0..=255.0).contains(&t) || t.fract() != 0.0 {
                    return Err(Error::Parameter(format!("FAST t must be an integer in [1, 255], got {t}")));
                }
                let p = FastParams {
                    t: t as u8,
                    arc_len: as_count("arc_len", get("arc_len", d.arc_len as f64))?,
                    nms_radius: as_count("nms_radius", get("nms_radius", d.nms_radius as f64))?,
                };
                p.validate()?;
                Detector::Fast(p)
            }
            DetectorKind::Dog => {
                let d = DogParams::default();
                let p = DogParams {
                    pyramid: self.pyramid(&d.pyramid)?,
                    contrast_threshold: get("contrast_threshold", d.contrast_threshold),
                    edge_ratio: get("edge_ratio", d.edge_ratio),
                };
                if !(p.edge_ratio >= 1.0) || !(p.contrast_threshold >= 0.0) {
                    return Err(Error::Parameter(
                        "DoG needs edge_ratio >= 1 and contrast_threshold >= 0".into(),
                    ));
                }
                Detector::Dog(p)
            }
            DetectorKind::HessianBlob => {
                let d = HessianParams::default();
                let p = HessianParams {
                    pyramid: self.pyramid(&d.pyramid)?,
                    threshold: get("threshold", d.threshold),
                };
                if !(p.threshold >= 0.0) {
                    return Err(Error::Parameter("hessian threshold must be >= 0".into()));
                }
                Detector::Hessian(p)
            }
            DetectorKind::External => match &self.keypoint_dir {
                Some(dir) => Detector::External(dir.clone()),
                None => {
                    return Err(Error::Config(
                        "external detector requires a keypoint directory".into(),
                    ))
                }
            },
        };
        Ok(detector)
    }

    fn pyramid(&self, d: &PyramidParams) -> Result<PyramidParams> {
        let get = |key: &str, default: f64| self.params.get(key).copied().unwrap_or(default);
        let p = PyramidParams {
            octaves: as_count("octaves", get("octaves", d.octaves as f64))?,
            scales_per_octave: as_count(
                "scales_per_octave",
                get("scales_per_octave", d.scales_per_octave as f64),
            )?,
            sigma0: get("sigma0", d.sigma0),
        };
        p.validate()?;
        Ok(p)
    }
}

fn as_count(name: &str, v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v <= 1e6 {
        Ok(v as usize)
    } else {
        Err(Error::Parameter(format!("{name} must be a non-negative integer, got {v}")))
    }
}

/// A fully parameterized detector.
#[derive(Clone, Debug, PartialEq)]
pub enum Detector {
    Harris(HarrisParams),
    Fast(FastParams),
    Dog(DogParams),
    Hessian(HessianParams),
    /// Keypoints are read from `<dir>/<scene_id>_step<k>.csv`.
    External(PathBuf),
}

impl Detector {
    pub fn kind(&self) -> DetectorKind {
        match self {
            Detector::Harris(_) => DetectorKind::Harris,
            Detector::Fast(_) => DetectorKind::Fast,
            Detector::Dog(_) => DetectorKind::Dog,
            Detector::Hessian(_) => DetectorKind::HessianBlob,
            Detector::External(_) => DetectorKind::External,
        }
    }

    /// Runs a native detector on `img`. External detectors have no image
    /// path; use [`ingest_keypoints`] instead.
    pub fn detect(&self, img: &Image) -> Result<Vec<Keypoint>> {
        match self {
            Detector::Harris(p) => detect_harris(img, p),
            Detector::Fast(p) => detect_fast(img, p),
            Detector::Dog(p) => detect_dog(img, p),
            Detector::Hessian(p) => detect_hessian(img, p),
            Detector::External(_) => Err(Error::Config(
                "external keypoints are read from files, not detected".into(),
            )),
        }
    }
}
