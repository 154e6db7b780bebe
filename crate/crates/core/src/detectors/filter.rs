//! Floating-point planes and separable filtering.
//!
//! Borders are handled by replicating edge pixels; detectors are expected
//! to discard responses within their kernel footprint of the border.

use crate::imaging::Image;

/// Row-major `f64` plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height, "plane buffer size");
        Self {
            width,
            height,
            data,
        }
    }

    /// Intensities mapped to [0, 1].
    pub fn from_image(img: &Image) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            data: img.pixels().iter().map(|&p| p as f64 / 255.0).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    /// Correlates every row with `kernel` (odd length, centered).
    pub fn convolve_rows(&self, kernel: &[f64]) -> Plane {
        let r = (kernel.len() / 2) as isize;
        let last = self.width as isize - 1;
        let mut out = Plane::new(self.width, self.height);
        for y in 0..self.height {
            let row = &self.data[y * self.width..(y + 1) * self.width];
            for x in 0..self.width {
                let mut acc = 0.0;
                for (j, &k) in kernel.iter().enumerate() {
                    let sx = (x as isize + j as isize - r).clamp(0, last) as usize;
                    acc += k * row[sx];
                }
                out.data[y * self.width + x] = acc;
            }
        }
        out
    }

    /// Correlates every column with `kernel` (odd length, centered).
    pub fn convolve_cols(&self, kernel: &[f64]) -> Plane {
        let r = (kernel.len() / 2) as isize;
        let last = self.height as isize - 1;
        let mut out = Plane::new(self.width, self.height);
        for y in 0..self.height {
            for (j, &k) in kernel.iter().enumerate() {
                let sy = (y as isize + j as isize - r).clamp(0, last) as usize;
                let src = &self.data[sy * self.width..(sy + 1) * self.width];
                let dst = &mut out.data[y * self.width..(y + 1) * self.width];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += k * s;
                }
            }
        }
        out
    }

    pub fn gaussian_blur(&self, sigma: f64) -> Plane {
        if sigma <= 0.0 {
            return self.clone();
        }
        let k = gaussian_kernel(sigma);
        self.convolve_rows(&k).convolve_cols(&k)
    }

    /// Halves each dimension by averaging 2x2 blocks. Output pixel `i`
    /// sits at input coordinate `2i + 0.5`.
    pub fn downsample(&self) -> Plane {
        let w = self.width / 2;
        let h = self.height / 2;
        let mut out = Plane::new(w, h);
        for y in 0..h {
            for x in 0..w {
                let s = self.at(2 * x, 2 * y)
                    + self.at(2 * x + 1, 2 * y)
                    + self.at(2 * x, 2 * y + 1)
                    + self.at(2 * x + 1, 2 * y + 1);
                out.set(x, y, 0.25 * s);
            }
        }
        out
    }

    pub fn zip_map(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Plane {
        assert_eq!((self.width, self.height), (other.width, other.height));
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

/// Radius of the truncated Gaussian kernel for `sigma`.
pub fn kernel_radius(sigma: f64) -> usize {
    (3.0 * sigma).ceil().max(1.0) as usize
}

/// Normalized Gaussian truncated at `kernel_radius(sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = kernel_radius(sigma) as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// First-derivative-of-Gaussian kernel, scaled so a unit ramp gives slope 1.
pub fn gaussian_derivative_kernel(sigma: f64) -> Vec<f64> {
    let r = kernel_radius(sigma) as isize;
    let g: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    // the row/column passes correlate: k[j] multiplies f(x + j - r)
    let norm: f64 = (-r..=r).zip(&g).map(|(i, &v)| (i * i) as f64 * v).sum();
    (-r..=r).zip(&g).map(|(i, &v)| i as f64 * v / norm).collect()
}
