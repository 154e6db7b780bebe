//! Gaussian scale space and the two blob detectors built on it:
//! difference-of-Gaussians extrema and scale-normalized Hessian-determinant
//! maxima.
//!
//! Each octave holds `scales_per_octave + 3` Gaussian levels with
//! `sigma_i = sigma0 * 2^(i / s)` in octave pixels. The next octave starts
//! from level `s`, halved by 2x2 averaging, so octave pixel `i` sits at
//! original coordinate `(i + 0.5) 2^o - 0.5`. That mapping is symmetric
//! under horizontal flips of even-width images.

use super::filter::{kernel_radius, Plane};
use super::nms::{parabola_offset, sort_keypoints};
use super::Keypoint;
use crate::error::{Error, Result};
use crate::imaging::Image;

/// Smallest image side the pyramid accepts, and the smallest octave built.
pub const MIN_OCTAVE_SIDE: usize = 16;

/// Blur already present in a camera image.
const NOMINAL_INPUT_SIGMA: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PyramidParams {
    pub octaves: usize,
    pub scales_per_octave: usize,
    pub sigma0: f64,
}

impl Default for PyramidParams {
    fn default() -> Self {
        Self {
            octaves: 4,
            scales_per_octave: 3,
            sigma0: 1.6,
        }
    }
}

impl PyramidParams {
    pub fn validate(&self) -> Result<()> {
        if self.octaves < 1 {
            return Err(Error::Parameter("octaves must be >= 1".into()));
        }
        if self.scales_per_octave < 2 {
            return Err(Error::Parameter("scales_per_octave must be >= 2".into()));
        }
        if !(self.sigma0 >= 1.0 && self.sigma0.is_finite()) {
            return Err(Error::Parameter(format!(
                "sigma0 must be >= 1, got {}",
                self.sigma0
            )));
        }
        Ok(())
    }

    /// Sigma of level `i` in octave pixels.
    pub fn level_sigma(&self, i: usize) -> f64 {
        self.sigma0 * 2f64.powf(i as f64 / self.scales_per_octave as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DogParams {
    pub pyramid: PyramidParams,
    pub contrast_threshold: f64,
    pub edge_ratio: f64,
}

impl Default for DogParams {
    fn default() -> Self {
        Self {
            pyramid: PyramidParams::default(),
            contrast_threshold: 0.03,
            edge_ratio: 10.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HessianParams {
    pub pyramid: PyramidParams,
    pub threshold: f64,
}

impl Default for HessianParams {
    fn default() -> Self {
        Self {
            pyramid: PyramidParams::default(),
            threshold: 1e-4,
        }
    }
}

/// One octave of Gaussian levels.
pub struct Octave {
    /// Octave index; pixel pitch is `2^index` original pixels.
    pub index: usize,
    pub levels: Vec<Plane>,
}

impl Octave {
    fn to_original(&self, x: f64, y: f64) -> (f64, f64) {
        let pitch = (1usize << self.index) as f64;
        ((x + 0.5) * pitch - 0.5, (y + 0.5) * pitch - 0.5)
    }

    fn pitch(&self) -> f64 {
        (1usize << self.index) as f64
    }
}

/// Builds the Gaussian scale space. Octaves stop early once a side would
/// drop below [`MIN_OCTAVE_SIDE`].
pub fn gaussian_pyramid(img: &Image, params: &PyramidParams) -> Result<Vec<Octave>> {
    params.validate()?;
    let (w, h) = img.dims();
    if w < MIN_OCTAVE_SIDE || h < MIN_OCTAVE_SIDE {
        return Err(Error::InputTooSmall {
            width: w,
            height: h,
        });
    }
    let n_levels = params.scales_per_octave + 3;
    let s0 = params.sigma0;
    let mut base = Plane::from_image(img)
        .gaussian_blur((s0 * s0 - NOMINAL_INPUT_SIGMA * NOMINAL_INPUT_SIGMA).sqrt());
    let mut octaves = Vec::with_capacity(params.octaves);
    for index in 0..params.octaves {
        if base.width() < MIN_OCTAVE_SIDE || base.height() < MIN_OCTAVE_SIDE {
            break;
        }
        let levels: Vec<Plane> = (0..n_levels)
            .map(|i| {
                let si = params.level_sigma(i);
                base.gaussian_blur((si * si - s0 * s0).max(0.0).sqrt())
            })
            .collect();
        let next = levels[params.scales_per_octave].downsample();
        octaves.push(Octave { index, levels });
        base = next;
    }
    Ok(octaves)
}

/// Exclusion band for responses at level `i`, in octave pixels.
fn level_margin(params: &PyramidParams, i: usize) -> usize {
    kernel_radius(params.level_sigma(i)).max(1)
}

/// Compares `v` against the 26 neighbors in `stack[i-1..=i+1]`.
// Ties are broken as in 2D suppression: equal values lose to the finer
// level, then to the smaller (y, x).
fn is_extremum(stack: &[Plane], i: usize, x: usize, y: usize, v: f64, maximum: bool) -> bool {
    for (j, plane) in stack.iter().enumerate().take(i + 2).skip(i - 1) {
        for ny in y - 1..=y + 1 {
            for nx in x - 1..=x + 1 {
                if (j, ny, nx) == (i, y, x) {
                    continue;
                }
                let n = plane.at(nx, ny);
                let stronger = if maximum { n > v } else { n < v };
                if stronger || (n == v && (j, ny, nx) < (i, y, x)) {
                    return false;
                }
            }
        }
    }
    true
}

fn refined_keypoint(octave: &Octave, resp: &Plane, x: usize, y: usize, sigma: f64, response: f64) -> Keypoint {
    let v = resp.at(x, y);
    let dx = parabola_offset(resp.at(x - 1, y), v, resp.at(x + 1, y));
    let dy = parabola_offset(resp.at(x, y - 1), v, resp.at(x, y + 1));
    let (ox, oy) = octave.to_original(x as f64 + dx, y as f64 + dy);
    Keypoint {
        x: ox,
        y: oy,
        scale: sigma * octave.pitch(),
        response,
    }
}

/// Difference-of-Gaussians scale-space extrema with contrast and edge
/// rejection.
pub fn detect_dog(img: &Image, params: &DogParams) -> Result<Vec<Keypoint>> {
    if !(params.edge_ratio >= 1.0) {
        return Err(Error::Parameter(format!(
            "edge_ratio must be >= 1, got {}",
            params.edge_ratio
        )));
    }
    if !(params.contrast_threshold >= 0.0) {
        return Err(Error::Parameter("contrast_threshold must be >= 0".into()));
    }
    let pyr = &params.pyramid;
    let octaves = gaussian_pyramid(img, pyr)?;
    let edge_limit = (params.edge_ratio + 1.0).powi(2) / params.edge_ratio;
    let mut kps = Vec::new();

    for octave in &octaves {
        let dogs: Vec<Plane> = octave
            .levels
            .windows(2)
            .map(|pair| pair[1].zip_map(&pair[0], |a, b| a - b))
            .collect();
        let (w, h) = (dogs[0].width(), dogs[0].height());
        for i in 1..=pyr.scales_per_octave {
            let margin = level_margin(pyr, i + 1);
            if w <= 2 * margin || h <= 2 * margin {
                continue;
            }
            let d = &dogs[i];
            for y in margin..h - margin {
                for x in margin..w - margin {
                    let v = d.at(x, y);
                    if v.abs() < params.contrast_threshold {
                        continue;
                    }
                    if !is_extremum(&dogs, i, x, y, v, v > 0.0) {
                        continue;
                    }
                    let dxx = d.at(x + 1, y) - 2.0 * v + d.at(x - 1, y);
                    let dyy = d.at(x, y + 1) - 2.0 * v + d.at(x, y - 1);
                    let dxy = 0.25
                        * (d.at(x + 1, y + 1) - d.at(x + 1, y - 1) - d.at(x - 1, y + 1)
                            + d.at(x - 1, y - 1));
                    let det = dxx * dyy - dxy * dxy;
                    let tr = dxx + dyy;
                    if det <= 0.0 || tr * tr / det > edge_limit {
                        continue;
                    }
                    kps.push(refined_keypoint(octave, d, x, y, pyr.level_sigma(i), v));
                }
            }
        }
    }
    sort_keypoints(&mut kps);
    Ok(kps)
}

/// `sigma^4 (Lxx Lyy - Lxy^2)` of one Gaussian level, sigma in octave pixels.
pub fn hessian_determinant(level: &Plane, sigma: f64) -> Plane {
    let (w, h) = (level.width(), level.height());
    let norm = sigma.powi(4);
    let mut out = Plane::new(w, h);
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let c = level.at(x, y);
            let lxx = level.at(x + 1, y) - 2.0 * c + level.at(x - 1, y);
            let lyy = level.at(x, y + 1) - 2.0 * c + level.at(x, y - 1);
            let lxy = 0.25
                * (level.at(x + 1, y + 1) - level.at(x + 1, y - 1) - level.at(x - 1, y + 1)
                    + level.at(x - 1, y - 1));
            out.set(x, y, norm * (lxx * lyy - lxy * lxy));
        }
    }
    out
}

/// Scale-space maxima of the normalized Hessian determinant.
pub fn detect_hessian(img: &Image, params: &HessianParams) -> Result<Vec<Keypoint>> {
    if !(params.threshold >= 0.0) {
        return Err(Error::Parameter("hessian threshold must be >= 0".into()));
    }
    let pyr = &params.pyramid;
    let octaves = gaussian_pyramid(img, pyr)?;
    let mut kps = Vec::new();

    for octave in &octaves {
        let dets: Vec<Plane> = octave.levels[..pyr.scales_per_octave + 2]
            .iter()
            .enumerate()
            .map(|(i, level)| hessian_determinant(level, pyr.level_sigma(i)))
            .collect();
        let (w, h) = (dets[0].width(), dets[0].height());
        for i in 1..=pyr.scales_per_octave {
            let margin = level_margin(pyr, i + 1);
            if w <= 2 * margin || h <= 2 * margin {
                continue;
            }
            let r = &dets[i];
            for y in margin..h - margin {
                for x in margin..w - margin {
                    let v = r.at(x, y);
                    if !(v > params.threshold) || !is_extremum(&dets, i, x, y, v, true) {
                        continue;
                    }
                    kps.push(refined_keypoint(octave, r, x, y, pyr.level_sigma(i), v));
                }
            }
        }
    }
    sort_keypoints(&mut kps);
    Ok(kps)
}
