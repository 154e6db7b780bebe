//! Non-maximum suppression, sub-pixel refinement and output ordering.

use std::cmp::Ordering;

use super::filter::Plane;
use super::Keypoint;

/// Strict total order on response-map cells: higher response wins, then
/// the smaller `(y, x)`.
#[inline]
fn beats(a: f64, ay: usize, ax: usize, b: f64, by: usize, bx: usize) -> bool {
    match a.total_cmp(&b) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => (ay, ax) < (by, bx),
    }
}

/// Cells that are `> threshold`, at least `margin` pixels inside the plane,
/// and beat every other cell of the `(2 radius + 1)^2` window around them.
pub fn local_maxima(resp: &Plane, margin: usize, radius: usize, threshold: f64) -> Vec<(usize, usize)> {
    let (w, h) = (resp.width(), resp.height());
    let mut out = Vec::new();
    if w <= 2 * margin || h <= 2 * margin {
        return out;
    }
    for y in margin..h - margin {
        'cell: for x in margin..w - margin {
            let v = resp.at(x, y);
            if !(v > threshold) {
                continue;
            }
            let y0 = y.saturating_sub(radius);
            let y1 = (y + radius).min(h - 1);
            let x0 = x.saturating_sub(radius);
            let x1 = (x + radius).min(w - 1);
            for ny in y0..=y1 {
                for nx in x0..=x1 {
                    if (nx, ny) != (x, y) && !beats(v, y, x, resp.at(nx, ny), ny, nx) {
                        continue 'cell;
                    }
                }
            }
            out.push((x, y));
        }
    }
    out
}

/// Vertex offset of the parabola through `(-1, a)`, `(0, b)`, `(1, c)`,
/// clamped to `[-0.5, 0.5]`.
#[inline]
pub fn parabola_offset(a: f64, b: f64, c: f64) -> f64 {
    let curvature = a - 2.0 * b + c;
    if curvature == 0.0 || !curvature.is_finite() {
        return 0.0;
    }
    (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
}

/// Per-axis quadratic refinement at an interior cell.
pub fn refine(resp: &Plane, x: usize, y: usize) -> (f64, f64) {
    let v = resp.at(x, y);
    let dx = parabola_offset(resp.at(x - 1, y), v, resp.at(x + 1, y));
    let dy = parabola_offset(resp.at(x, y - 1), v, resp.at(x, y + 1));
    (x as f64 + dx, y as f64 + dy)
}

/// Descending response, then ascending `y`, then ascending `x`.
pub fn sort_keypoints(kps: &mut [Keypoint]) {
    kps.sort_by(|a, b| {
        b.response
            .total_cmp(&a.response)
            .then(a.y.total_cmp(&b.y))
            .then(a.x.total_cmp(&b.x))
    });
}
