use super::filter::{gaussian_derivative_kernel, gaussian_kernel, kernel_radius, Plane};
use super::nms::{local_maxima, refine, sort_keypoints};
use super::Keypoint;
use crate::error::{Error, Result};
use crate::imaging::Image;

/// Single-scale Harris corner parameters. Responses are computed on
/// intensities in [0, 1], so `threshold` is an absolute value on that scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarrisParams {
    /// Derivative scale.
    pub sigma_d: f64,
    /// Integration scale; also the reported keypoint scale.
    pub sigma_i: f64,
    pub k: f64,
    pub threshold: f64,
    pub nms_radius: usize,
}

impl Default for HarrisParams {
    fn default() -> Self {
        Self {
            sigma_d: 1.0,
            sigma_i: 2.0,
            k: 0.04,
            threshold: 1e-6,
            nms_radius: 3,
        }
    }
}

impl HarrisParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_d > 0.0 && self.sigma_d.is_finite()) {
            return Err(Error::Parameter(format!("sigma_d must be > 0, got {}", self.sigma_d)));
        }
        if !(self.sigma_i > 0.0 && self.sigma_i.is_finite()) {
            return Err(Error::Parameter(format!("sigma_i must be > 0, got {}", self.sigma_i)));
        }
        if self.sigma_i < 1.0 {
            return Err(Error::Parameter(format!(
                "sigma_i is the keypoint scale and must be >= 1, got {}",
                self.sigma_i
            )));
        }
        if !(self.k > 0.0 && self.k < 0.25) {
            return Err(Error::Parameter(format!("k must lie in (0, 0.25), got {}", self.k)));
        }
        if !self.threshold.is_finite() {
            return Err(Error::Parameter("threshold must be finite".into()));
        }
        if self.nms_radius < 1 {
            return Err(Error::Parameter("nms_radius must be >= 1".into()));
        }
        Ok(())
    }

    /// Border band, in pixels, where no keypoint is reported.
    pub fn margin(&self) -> usize {
        kernel_radius(self.sigma_i)
    }
}

/// Harris measure `det(M) - k trace(M)^2` at every pixel.
pub fn harris_response(img: &Image, params: &HarrisParams) -> Plane {
    let plane = Plane::from_image(img);
    let g_d = gaussian_kernel(params.sigma_d);
    let dg_d = gaussian_derivative_kernel(params.sigma_d);
    let ix = plane.convolve_rows(&dg_d).convolve_cols(&g_d);
    let iy = plane.convolve_cols(&dg_d).convolve_rows(&g_d);

    let sxx = ix.zip_map(&ix, |a, b| a * b).gaussian_blur(params.sigma_i);
    let syy = iy.zip_map(&iy, |a, b| a * b).gaussian_blur(params.sigma_i);
    let sxy = ix.zip_map(&iy, |a, b| a * b).gaussian_blur(params.sigma_i);

    let mut out = Plane::new(plane.width(), plane.height());
    for y in 0..plane.height() {
        for x in 0..plane.width() {
            let (a, b, c) = (sxx.at(x, y), syy.at(x, y), sxy.at(x, y));
            let trace = a + b;
            out.set(x, y, a * b - c * c - params.k * trace * trace);
        }
    }
    out
}

/// Harris corners: thresholded local maxima of [`harris_response`].
pub fn detect_harris(img: &Image, params: &HarrisParams) -> Result<Vec<Keypoint>> {
    params.validate()?;
    let resp = harris_response(img, params);
    let margin = params.margin().max(1);
    let mut kps: Vec<Keypoint> = local_maxima(&resp, margin, params.nms_radius, params.threshold)
        .into_iter()
        .map(|(x, y)| {
            let (rx, ry) = refine(&resp, x, y);
            Keypoint {
                x: rx,
                y: ry,
                scale: params.sigma_i,
                response: resp.at(x, y),
            }
        })
        .collect();
    sort_keypoints(&mut kps);
    Ok(kps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_has_no_corners() {
        let img = Image::filled(40, 30, 90).unwrap();
        assert!(detect_harris(&img, &HarrisParams::default()).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_sigmas() {
        let img = Image::filled(20, 20, 0).unwrap();
        for p in [
            HarrisParams { sigma_d: 0.0, ..Default::default() },
            HarrisParams { sigma_i: -1.0, ..Default::default() },
            HarrisParams { nms_radius: 0, ..Default::default() },
        ] {
            assert!(matches!(detect_harris(&img, &p), Err(Error::Parameter(_))));
        }
    }
}
