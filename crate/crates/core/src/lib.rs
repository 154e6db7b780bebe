//! Upper and lower performance bounds of local feature detectors under
//! photometric degradations.
//!
//! The pipeline runs in four stages:
//!
//! - [`imaging`] builds per-scene sweeps of JPEG compression or uniform
//!   brightness decrease, with a JSON manifest per scene.
//! - [`detectors`] finds keypoints (Harris, FAST, difference-of-Gaussians,
//!   Hessian-determinant blobs) or reads them from CSV files.
//! - [`repeatability`] scores each degraded image against its reference.
//! - [`bounds`] turns the scene-by-step score matrix into max, min and
//!   median curves with operating and guarantee region areas, which
//!   [`report`] writes as CSV and SVG.
//!
//! [`cli`] wires the stages together behind the `featbounds` binary.

// `!(x >= lo)` is used on purpose so NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod detectors;
pub mod error;
pub mod imaging;
pub mod repeatability;
pub mod report;

pub use bounds::{aggregate_curves, collect_matrix, region_areas, stability_summary, BoundsCurves, RepeatabilityMatrix, StepAxis};
pub use detectors::{Detector, DetectorKind, DetectorSpec, Keypoint};
pub use error::{Error, Result};
pub use imaging::{Dataset, Image, TransformKind, TransformSpec};
pub use repeatability::{repeatability, Homography, RepeatabilityResult};
