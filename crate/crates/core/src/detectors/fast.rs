use super::filter::Plane;
use super::nms::{local_maxima, refine, sort_keypoints};
use super::Keypoint;
use crate::error::{Error, Result};
use crate::imaging::Image;

/// The 16-pixel Bresenham circle of radius 3, clockwise from the top.
pub const CIRCLE: [(isize, isize); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

const RADIUS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FastParams {
    /// Intensity threshold in 8-bit levels.
    pub t: u8,
    /// Minimum contiguous arc length, 9..=12.
    pub arc_len: usize,
    pub nms_radius: usize,
}

impl Default for FastParams {
    fn default() -> Self {
        Self {
            t: 20,
            arc_len: 9,
            nms_radius: 3,
        }
    }
}

impl FastParams {
    pub fn validate(&self) -> Result<()> {
        if self.t < 1 {
            return Err(Error::Parameter("FAST threshold t must be >= 1".into()));
        }
        if !(9..=12).contains(&self.arc_len) {
            return Err(Error::Parameter(format!(
                "arc_len must lie in [9, 12], got {}",
                self.arc_len
            )));
        }
        if self.nms_radius < 1 {
            return Err(Error::Parameter("nms_radius must be >= 1".into()));
        }
        Ok(())
    }
}

/// Segment-test score of the pixel at `(x, y)`; `None` when it is not a
/// corner.
///
/// The score is the largest sum of `|I(c) - I(p)|` over a qualifying arc,
/// in [0, 1] intensity units. An arc covering the whole ring is an isolated
/// spot rather than a corner and does not qualify.
pub fn segment_test(img: &Image, x: usize, y: usize, params: &FastParams) -> Option<f64> {
    let center = img.get(x, y) as i32;
    let t = params.t as i32;
    let ring: [i32; 16] = std::array::from_fn(|i| {
        let (dx, dy) = CIRCLE[i];
        img.get((x as isize + dx) as usize, (y as isize + dy) as usize) as i32
    });

    let mut best: Option<i32> = None;
    for sign in [1i32, -1] {
        let passes = |v: i32| sign * (v - center) > t;
        let qualifying = ring.iter().filter(|&&v| passes(v)).count();
        if qualifying < params.arc_len || qualifying == 16 {
            continue;
        }
        // Walk the ring twice from a failing pixel so every run is seen whole.
        let start = ring.iter().position(|&v| !passes(v)).expect("not all pass");
        let mut run_len = 0;
        let mut run_sum = 0;
        for step in 1..=16 {
            let v = ring[(start + step) % 16];
            if passes(v) {
                run_len += 1;
                run_sum += (v - center).abs();
            } else {
                if run_len >= params.arc_len {
                    best = Some(best.map_or(run_sum, |b| b.max(run_sum)));
                }
                run_len = 0;
                run_sum = 0;
            }
        }
    }
    best.map(|s| s as f64 / 255.0)
}

/// Segment-test corners with non-maximum suppression. Scale is always 1.
pub fn detect_fast(img: &Image, params: &FastParams) -> Result<Vec<Keypoint>> {
    params.validate()?;
    let (w, h) = img.dims();
    let mut resp = Plane::new(w, h);
    if w > 2 * RADIUS && h > 2 * RADIUS {
        for y in RADIUS..h - RADIUS {
            for x in RADIUS..w - RADIUS {
                if let Some(score) = segment_test(img, x, y, params) {
                    resp.set(x, y, score);
                }
            }
        }
    }
    let mut kps: Vec<Keypoint> = local_maxima(&resp, RADIUS, params.nms_radius, 0.0)
        .into_iter()
        .map(|(x, y)| {
            let (rx, ry) = refine(&resp, x, y);
            Keypoint {
                x: rx,
                y: ry,
                scale: 1.0,
                response: resp.at(x, y),
            }
        })
        .collect();
    sort_keypoints(&mut kps);
    Ok(kps)
}
