//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use featbounds::imaging::synthetic_scene;
use featbounds::detectors::fast::CIRCLE;
use featbounds::detectors::HarrisParams;
use featbounds::{Image, Keypoint};

/// 32x32 black image with a centered 16x16 white square (pixels 8..24).
pub fn square_image() -> Image {
    Image::from_fn(32, 32, |x, y| {
        if (8..24).contains(&x) && (8..24).contains(&y) {
            255
        } else {
            0
        }
    })
    .unwrap()
}

/// Outer corners of the square, in pixel-center coordinates.
pub const SQUARE_CORNERS: [(f64, f64); 4] = [(7.5, 7.5), (23.5, 7.5), (7.5, 23.5), (23.5, 23.5)];

pub const DISC_CENTER: (f64, f64) = (16.0, 16.0);
pub const DISC_RADIUS: f64 = 6.0;

/// 32x32 white disc of radius 6 on black.
pub fn disc_image() -> Image {
    Image::from_fn(32, 32, |x, y| {
        let dx = x as f64 - DISC_CENTER.0;
        let dy = y as f64 - DISC_CENTER.1;
        if dx * dx + dy * dy <= DISC_RADIUS * DISC_RADIUS {
            255
        } else {
            0
        }
    })
    .unwrap()
}

pub const BLOB_CENTER: (f64, f64) = (31.5, 31.5);
pub const BLOB_SIGMA: f64 = 4.0;

/// 64x64 image holding one bright isotropic Gaussian blob of sigma 4.
pub fn blob_image() -> Image {
    Image::from_fn(64, 64, |x, y| {
        let dx = x as f64 - BLOB_CENTER.0;
        let dy = y as f64 - BLOB_CENTER.1;
        let v = 255.0 * (-(dx * dx + dy * dy) / (2.0 * BLOB_SIGMA * BLOB_SIGMA)).exp();
        v.round() as u8
    })
    .unwrap()
}

/// Natural-looking procedural scenes used as a desk-scale corpus.
pub fn corpus(count: usize, width: usize, height: usize) -> Vec<(String, Image)> {
    (0..count)
        .map(|i| (format!("scene{i:02}"), synthetic_scene(1000 + i as u64, width, height)))
        .collect()
}

pub fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

pub fn kp(x: f64, y: f64) -> Keypoint {
    Keypoint {
        x,
        y,
        scale: 1.0,
        response: 1.0,
    }
}

/// Sampled Gaussian, normalized, radius ceil(4 sigma).
pub fn gauss_taps(sigma: f64) -> Vec<f64> {
    let r = (4.0 * sigma).ceil() as i64;
    let mut taps: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= s);
    taps
}

/// Separable Gaussian blur with clamped borders on a row-major f64 grid.
pub fn blur(src: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let taps = gauss_taps(sigma);
    let r = (taps.len() / 2) as i64;
    let clamp = |v: i64, n: usize| v.clamp(0, n as i64 - 1) as usize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = taps
                .iter()
                .enumerate()
                .map(|(i, t)| t * src[y * w + clamp(x as i64 + i as i64 - r, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = taps
                .iter()
                .enumerate()
                .map(|(i, t)| t * tmp[clamp(y as i64 + i as i64 - r, h) * w + x])
                .sum();
        }
    }
    out
}

pub fn to_unit(img: &Image) -> Vec<f64> {
    img.pixels().iter().map(|&p| p as f64 / 255.0).collect()
}

/// Maximum one-to-one assignment size with every pair within `tol`,
/// by exhaustive search.
pub fn max_assignment(refs: &[Keypoint], tgts: &[Keypoint], tol: f64) -> usize {
    fn go(i: usize, refs: &[Keypoint], tgts: &[Keypoint], used: &mut Vec<bool>, tol: f64) -> usize {
        if i == refs.len() {
            return 0;
        }
        let mut best = go(i + 1, refs, tgts, used, tol);
        for j in 0..tgts.len() {
            if !used[j] && dist((refs[i].x, refs[i].y), (tgts[j].x, tgts[j].y)) <= tol {
                used[j] = true;
                best = best.max(1 + go(i + 1, refs, tgts, used, tol));
                used[j] = false;
            }
        }
        best
    }
    go(0, refs, tgts, &mut vec![false; tgts.len()], tol)
}

/// Crowded matching instance on which greedy is provably optimal.
///
/// References lie in a 10x10 patch at least `tol` apart. Some get a twin
/// within 0.5 px that is out of reach of every other reference; the
/// remaining targets are distractors more than 0.5 px from every reference
/// and within `tol` of at most one twinless reference. Greedy takes the twin
/// pairs first and what is left is a union of stars.
pub fn crowded_fixture(seed: u64, tol: f64) -> (Vec<Keypoint>, Vec<Keypoint>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let origin = 20.0;
    let n_ref = rng.random_range(3..=6);
    let mut refs: Vec<Keypoint> = Vec::new();
    let mut attempts = 0;
    while refs.len() < n_ref && attempts < 10_000 {
        attempts += 1;
        let p = (origin + rng.random_range(0.0..10.0), origin + rng.random_range(0.0..10.0));
        if refs.iter().all(|r| dist((r.x, r.y), p) >= tol) {
            refs.push(kp(p.0, p.1));
        }
    }
    let n_tgt = if rng.random_bool(0.75) { 6 } else { rng.random_range(0..6usize) };
    let mut tgts = Vec::new();
    let mut twinned = vec![false; refs.len()];
    for (i, r) in refs.iter().enumerate() {
        if tgts.len() < n_tgt && rng.random_bool(0.5) {
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            let d = rng.random_range(0.0..0.5);
            let t = (r.x + d * a.cos(), r.y + d * a.sin());
            let lonely = refs
                .iter()
                .enumerate()
                .all(|(j, o)| j == i || dist((o.x, o.y), t) > tol);
            if lonely {
                tgts.push(kp(t.0, t.1));
                twinned[i] = true;
            }
        }
    }
    attempts = 0;
    while tgts.len() < n_tgt && attempts < 10_000 {
        attempts += 1;
        let p = (origin - 2.0 + rng.random_range(0.0..14.0), origin - 2.0 + rng.random_range(0.0..14.0));
        let near_twinless = refs
            .iter()
            .zip(&twinned)
            .filter(|(r, &t)| !t && dist((r.x, r.y), p) <= tol)
            .count();
        if refs.iter().all(|r| dist((r.x, r.y), p) > 0.5) && near_twinless <= 1 {
            tgts.push(kp(p.0, p.1));
        }
    }
    // Shuffle the target order so twins are not aligned with their refs.
    for i in (1..tgts.len()).rev() {
        let j = rng.random_range(0..=i);
        tgts.swap(i, j);
    }
    (refs, tgts)
}

/// Random valid matrix: 1..12 scenes, 2..16 increasing steps, about one
/// score in ten missing (never a whole column).
pub fn random_matrix(seed: u64) -> featbounds::RepeatabilityMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.random_range(1..=12);
    let cols = rng.random_range(2..=16);
    let mut amounts = Vec::with_capacity(cols);
    let mut a = 0.0;
    for _ in 0..cols {
        amounts.push(a);
        a += rng.random_range(0.5..10.0);
    }
    let scores = (0..rows)
        .map(|r| {
            (0..cols)
                .map(|_| {
                    if r > 0 && rng.random_bool(0.1) {
                        None
                    } else if rng.random_bool(0.1) {
                        Some([0.0, 1.0, 0.5][rng.random_range(0..3)])
                    } else {
                        Some(rng.random_range(0.0..=1.0))
                    }
                })
                .collect()
        })
        .collect();
    featbounds::RepeatabilityMatrix {
        scene_ids: (0..rows).map(|r| format!("s{r}")).collect(),
        axis: featbounds::StepAxis::new(amounts).unwrap(),
        scores,
        detector: "test".into(),
    }
}

/// Sort-based order statistics of one column: (min, median, max).
pub fn column_stats(values: &[f64]) -> (f64, f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    let med = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
    (v[0], med, v[n - 1])
}

/// Trapezoid area over the axis rescaled to [0, 1].
pub fn unit_area(amounts: &[f64], values: &[f64]) -> f64 {
    let (a0, a1) = (amounts[0], amounts[amounts.len() - 1]);
    let mut area = 0.0;
    for k in 1..amounts.len() {
        let dx = (amounts[k] - amounts[k - 1]) / (a1 - a0);
        area += dx * (values[k] + values[k - 1]) / 2.0;
    }
    area
}

// Straightforward Harris: Gaussian smoothing, central differences, Gaussian
// window, then strict maxima over a (2r+1)^2 window.
pub fn harris_oracle(img: &Image, p: &HarrisParams) -> Vec<(usize, usize, f64)> {
    let (w, h) = img.dims();
    let s = blur(&to_unit(img), w, h, p.sigma_d);
    let at = |x: i64, y: i64| s[y.clamp(0, h as i64 - 1) as usize * w + x.clamp(0, w as i64 - 1) as usize];
    let mut xx = vec![0.0; w * h];
    let mut yy = vec![0.0; w * h];
    let mut xy = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let ix = (at(x + 1, y) - at(x - 1, y)) / 2.0;
            let iy = (at(x, y + 1) - at(x, y - 1)) / 2.0;
            let i = y as usize * w + x as usize;
            xx[i] = ix * ix;
            yy[i] = iy * iy;
            xy[i] = ix * iy;
        }
    }
    let (xx, yy, xy) = (blur(&xx, w, h, p.sigma_i), blur(&yy, w, h, p.sigma_i), blur(&xy, w, h, p.sigma_i));
    let r: Vec<f64> = (0..w * h)
        .map(|i| xx[i] * yy[i] - xy[i] * xy[i] - p.k * (xx[i] + yy[i]).powi(2))
        .collect();
    let rad = p.nms_radius as i64;
    let mut out = Vec::new();
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let v = r[y as usize * w + x as usize];
            if v <= p.threshold {
                continue;
            }
            let mut is_max = true;
            for dy in -rad..=rad {
                for dx in -rad..=rad {
                    let (nx, ny) = (x + dx, y + dy);
                    if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    if r[ny as usize * w + nx as usize] >= v {
                        is_max = false;
                    }
                }
            }
            if is_max {
                out.push((x as usize, y as usize, v));
            }
        }
    }
    out
}

// Standard segment test over every pixel whose circle fits.
pub fn fast_oracle(img: &Image, t: i32, arc: usize) -> Vec<(usize, usize)> {
    let (w, h) = img.dims();
    let mut out = Vec::new();
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            let c = img.get(x, y) as i32;
            let ring: Vec<i32> = CIRCLE
                .iter()
                .map(|&(dx, dy)| img.get((x as isize + dx) as usize, (y as isize + dy) as usize) as i32)
                .collect();
            for sign in [1, -1] {
                let mut run = 0;
                let mut best = 0;
                for i in 0..32 {
                    if sign * (ring[i % 16] - c) > t {
                        run += 1;
                        best = best.max(run);
                    } else {
                        run = 0;
                    }
                }
                if best.min(16) >= arc {
                    out.push((x, y));
                    break;
                }
            }
        }
    }
    out
}

// Dense scale-space search: response at every pixel over a fine sigma grid.
pub fn scale_space_argmax(img: &Image, response: impl Fn(&[f64], &[f64], usize, usize, f64) -> Vec<f64>) -> (f64, f64, f64) {
    let (w, h) = img.dims();
    let base = to_unit(img);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
    let mut sigma = 1.5;
    while sigma <= 10.0 {
        let lo = blur(&base, w, h, sigma);
        let hi = blur(&base, w, h, sigma * 1.05);
        let r = response(&lo, &hi, w, h, sigma);
        for y in 0..h {
            for x in 0..w {
                let v = r[y * w + x];
                if v > best.0 {
                    best = (v, x as f64, y as f64, sigma);
                }
            }
        }
        sigma += 0.05;
    }
    (best.1, best.2, best.3)
}

pub fn normalized_dog(lo: &[f64], hi: &[f64], _w: usize, _h: usize, _sigma: f64) -> Vec<f64> {
    lo.iter().zip(hi).map(|(a, b)| (a - b).abs() / 0.05).collect()
}

pub fn normalized_det_hessian(l: &[f64], _hi: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let at = |x: i64, y: i64| l[y.clamp(0, h as i64 - 1) as usize * w + x.clamp(0, w as i64 - 1) as usize];
    let mut out = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let dxx = at(x + 1, y) - 2.0 * at(x, y) + at(x - 1, y);
            let dyy = at(x, y + 1) - 2.0 * at(x, y) + at(x, y - 1);
            let dxy = (at(x + 1, y + 1) - at(x + 1, y - 1) - at(x - 1, y + 1) + at(x - 1, y - 1)) / 4.0;
            out[y as usize * w + x as usize] = sigma.powi(4) * (dxx * dyy - dxy * dxy);
        }
    }
    out
}

pub fn k_ratio(a: f64, b: f64) -> f64 {
    (a / b).max(b / a)
}
