//! Repeatability of a detector between a reference image and a transformed
//! target: the fraction of reference keypoints in the common region that
//! are re-detected.
//!
//! The score is normalized by the reference count only, so the size of the
//! target set enters through the matching and never through the
//! denominator.

use std::collections::HashMap;

use crate::detectors::Keypoint;
use crate::error::{Error, Result};

/// Default correspondence radius in pixels.
pub const DEFAULT_TOLERANCE: f64 = 2.5;

/// Row-major 3x3 projective map from reference to target coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography {
    h: [f64; 9],
}

impl Homography {
    pub fn new(h: [f64; 9]) -> Result<Self> {
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("homography has non-finite entries".into()));
        }
        let scale = if h[8] != 0.0 { h[8] } else { 1.0 };
        let n: [f64; 9] = std::array::from_fn(|i| h[i] / scale);
        if det3(&n).abs() <= 1e-12 {
            return Err(Error::Validation("homography is not invertible".into()));
        }
        Ok(Self { h })
    }

    pub fn identity() -> Self {
        Self {
            h: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        }
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Self {
            h: [1.0, 0.0, dx, 0.0, 1.0, dy, 0.0, 0.0, 1.0],
        }
    }

    pub fn as_array(&self) -> &[f64; 9] {
        &self.h
    }

    /// Maps `(x, y)`; `None` when the point goes to infinity.
    pub fn project(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let h = &self.h;
        let w = h[6] * x + h[7] * y + h[8];
        if w.abs() < 1e-15 {
            return None;
        }
        Some((
            (h[0] * x + h[1] * y + h[2]) / w,
            (h[3] * x + h[4] * y + h[5]) / w,
        ))
    }

    pub fn inverse(&self) -> Homography {
        let m = &self.h;
        let det = det3(m);
        let adj = [
            m[4] * m[8] - m[5] * m[7],
            m[2] * m[7] - m[1] * m[8],
            m[1] * m[5] - m[2] * m[4],
            m[5] * m[6] - m[3] * m[8],
            m[0] * m[8] - m[2] * m[6],
            m[2] * m[3] - m[0] * m[5],
            m[3] * m[7] - m[4] * m[6],
            m[1] * m[6] - m[0] * m[7],
            m[0] * m[4] - m[1] * m[3],
        ];
        Homography {
            h: adj.map(|v| v / det),
        }
    }
}

fn det3(m: &[f64; 9]) -> f64 {
    m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
        + m[2] * (m[3] * m[7] - m[4] * m[6])
}

#[inline]
fn in_bounds(x: f64, y: f64, (w, h): (usize, usize)) -> bool {
    x >= 0.0 && y >= 0.0 && x < w as f64 && y < h as f64
}

/// Reference-frame points whose projection also lands in the target.
#[derive(Clone, Copy, Debug)]
pub struct CommonRegion {
    h: Homography,
    h_inv: Homography,
    ref_dims: (usize, usize),
    tgt_dims: (usize, usize),
}

impl CommonRegion {
    /// Whether reference point `(x, y)` lies in the common part.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        in_bounds(x, y, self.ref_dims)
            && self
                .h
                .project(x, y)
                .is_some_and(|(tx, ty)| in_bounds(tx, ty, self.tgt_dims))
    }

    /// Whether target point `(x, y)` back-projects into the common part.
    pub fn contains_target(&self, x: f64, y: f64) -> bool {
        in_bounds(x, y, self.tgt_dims)
            && self
                .h_inv
                .project(x, y)
                .is_some_and(|(rx, ry)| in_bounds(rx, ry, self.ref_dims))
    }
}

pub fn common_region_mask(
    h: &Homography,
    ref_dims: (usize, usize),
    tgt_dims: (usize, usize),
) -> Result<CommonRegion> {
    let h = Homography::new(h.h)?;
    Ok(CommonRegion {
        h,
        h_inv: h.inverse(),
        ref_dims,
        tgt_dims,
    })
}

/// An accepted correspondence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Match {
    pub ref_index: usize,
    pub tgt_index: usize,
    /// Distance between the projected reference point and the target, px.
    pub distance: f64,
}

/// Greedy one-to-one matching.
///
/// All pairs whose projected distance is `<= tol` are ranked by
/// `(distance, ref index, tgt index)` and accepted while both endpoints are
/// still free.
pub fn match_keypoints(ref_kps: &[Keypoint], tgt_kps: &[Keypoint], h: &Homography, tol: f64) -> Vec<Match> {
    assert!(tol > 0.0, "tolerance must be positive");
    // bucket targets on a tol-sized grid
    let cell = |v: f64| (v / tol).floor() as i64;
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (j, t) in tgt_kps.iter().enumerate() {
        grid.entry((cell(t.x), cell(t.y))).or_default().push(j);
    }

    let mut candidates: Vec<Match> = Vec::new();
    for (i, r) in ref_kps.iter().enumerate() {
        let Some((px, py)) = h.project(r.x, r.y) else {
            continue;
        };
        let (cx, cy) = (cell(px), cell(py));
        for gy in cy - 1..=cy + 1 {
            for gx in cx - 1..=cx + 1 {
                let Some(bucket) = grid.get(&(gx, gy)) else {
                    continue;
                };
                for &j in bucket {
                    let t = &tgt_kps[j];
                    let distance = (px - t.x).hypot(py - t.y);
                    if distance <= tol {
                        candidates.push(Match {
                            ref_index: i,
                            tgt_index: j,
                            distance,
                        });
                    }
                }
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.ref_index.cmp(&b.ref_index))
            .then(a.tgt_index.cmp(&b.tgt_index))
    });

    let mut ref_used = vec![false; ref_kps.len()];
    let mut tgt_used = vec![false; tgt_kps.len()];
    let mut accepted = Vec::new();
    for m in candidates {
        if !ref_used[m.ref_index] && !tgt_used[m.tgt_index] {
            ref_used[m.ref_index] = true;
            tgt_used[m.tgt_index] = true;
            accepted.push(m);
        }
    }
    accepted
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepeatabilityResult {
    /// Reference keypoints inside the common region.
    pub n_ref: usize,
    /// Matched reference keypoints.
    pub n_rep: usize,
    /// `n_rep / n_ref`.
    pub score: f64,
    /// Accepted pairs, indexed into the caller's original lists.
    pub matches: Vec<Match>,
}

/// Repeatability `n_rep / n_ref` between two keypoint sets.
///
/// Fails with [`Error::UndefinedScore`] when no reference keypoint lies in
/// the common region.
pub fn repeatability(
    ref_kps: &[Keypoint],
    tgt_kps: &[Keypoint],
    h: &Homography,
    tol: f64,
    ref_dims: (usize, usize),
    tgt_dims: (usize, usize),
) -> Result<RepeatabilityResult> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Parameter(format!("tolerance must be > 0, got {tol}")));
    }
    let region = common_region_mask(h, ref_dims, tgt_dims)?;
    let ref_idx: Vec<usize> = (0..ref_kps.len())
        .filter(|&i| region.contains(ref_kps[i].x, ref_kps[i].y))
        .collect();
    let tgt_idx: Vec<usize> = (0..tgt_kps.len())
        .filter(|&j| region.contains_target(tgt_kps[j].x, tgt_kps[j].y))
        .collect();
    if ref_idx.is_empty() {
        return Err(Error::UndefinedScore);
    }
    let ref_sub: Vec<Keypoint> = ref_idx.iter().map(|&i| ref_kps[i]).collect();
    let tgt_sub: Vec<Keypoint> = tgt_idx.iter().map(|&j| tgt_kps[j]).collect();
    let matches: Vec<Match> = match_keypoints(&ref_sub, &tgt_sub, &region.h, tol)
        .into_iter()
        .map(|m| Match {
            ref_index: ref_idx[m.ref_index],
            tgt_index: tgt_idx[m.tgt_index],
            distance: m.distance,
        })
        .collect();
    let n_ref = ref_idx.len();
    let n_rep = matches.len();
    Ok(RepeatabilityResult {
        n_ref,
        n_rep,
        score: n_rep as f64 / n_ref as f64,
        matches,
    })
}
