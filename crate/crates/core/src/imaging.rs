//! Grayscale rasters, the two photometric degradations, and per-scene
//! transformation-sweep datasets.
//!
//! Every dataset lives in its own directory holding `m` images named
//! `<scene_id>_step<k>.<ext>` (`k` counts from 1; step 1 is the untouched
//! reference) and a `manifest.json` that records the schedule verbatim.

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::PngEncoder;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ColorType, DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repeatability::Homography;

/// Identifier of the JPEG codec pinned by this build; written to every manifest.
pub const CODEC_ID: &str = "image-0.25/jpeg-encoder+zune-jpeg-0.5";

/// Name of the per-dataset manifest file.
pub const MANIFEST_NAME: &str = "manifest.json";

/// Number of discrete steps in the default sweeps.
pub const DEFAULT_STEP_COUNT: usize = 14;

/// Single-channel 8-bit raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Validation(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::Validation(format!(
                "pixel buffer has {} entries, expected {}",
                pixels.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// An image filled with one intensity.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Mirror image about the vertical axis.
    pub fn flipped_horizontal(&self) -> Image {
        let w = self.width;
        Image::from_fn(w, self.height, |x, y| self.get(w - 1 - x, y)).expect("same dims")
    }

    /// Moves the content by `(dx, dy)`, filling uncovered pixels with `fill`.
    pub fn shifted(&self, dx: isize, dy: isize, fill: u8) -> Image {
        Image::from_fn(self.width, self.height, |x, y| {
            let sx = x as isize - dx;
            let sy = y as isize - dy;
            if sx < 0 || sy < 0 || sx >= self.width as isize || sy >= self.height as isize {
                fill
            } else {
                self.get(sx as usize, sy as usize)
            }
        })
        .expect("same dims")
    }
}

/// BT.601 luma, rounded half-up, in integer arithmetic.
#[inline]
pub fn luma_bt601(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((weighted + 500) / 1000) as u8
}

fn from_dynamic(dynamic: DynamicImage) -> Result<Image> {
    let (w, h) = (dynamic.width() as usize, dynamic.height() as usize);
    let pixels = match dynamic.color() {
        ColorType::L8 | ColorType::La8 | ColorType::L16 | ColorType::La16 => {
            dynamic.to_luma8().into_raw()
        }
        _ => dynamic
            .to_rgb8()
            .pixels()
            .map(|p| luma_bt601(p[0], p[1], p[2]))
            .collect(),
    };
    Image::new(w, h, pixels)
}

/// Reads a PGM, PNG or JPEG file as grayscale.
///
/// The format is sniffed from the content, not the extension. Color inputs
/// are reduced with [`luma_bt601`].
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let format_err = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let reader = ImageReader::new(Cursor::new(&bytes))
        .with_guessed_format()
        .map_err(|e| format_err(e.to_string()))?;
    match reader.format() {
        Some(ImageFormat::Png | ImageFormat::Jpeg | ImageFormat::Pnm) => {}
        Some(other) => return Err(format_err(format!("unsupported format {other:?}"))),
        None => return Err(format_err("unrecognized image format".into())),
    }
    let dynamic = reader.decode().map_err(|e| format_err(e.to_string()))?;
    from_dynamic(dynamic)
}

/// Lossless PNG encoding.
pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    PngEncoder::new(&mut buf)
        .write_image(
            img.pixels(),
            img.width() as u32,
            img.height() as u32,
            ExtendedColorType::L8,
        )
        .map_err(|e| Error::Codec(e.to_string()))?;
    Ok(buf)
}

/// Binary (P5) PGM encoding.
pub fn encode_pgm(img: &Image) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    PnmEncoder::new(&mut buf)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(
            img.pixels(),
            img.width() as u32,
            img.height() as u32,
            ExtendedColorType::L8,
        )
        .map_err(|e| Error::Codec(e.to_string()))?;
    Ok(buf)
}

/// Writes `img` losslessly; the extension picks PGM (`.pgm`) or PNG.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("pgm") => encode_pgm(img)?,
        _ => encode_png(img)?,
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// The two photometric degradations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransformKind {
    #[serde(rename = "jpeg")]
    JpegCompression,
    #[serde(rename = "light")]
    BrightnessDecrease,
}

impl TransformKind {
    /// Largest legal amount in percent.
    pub fn max_amount(self) -> f64 {
        match self {
            TransformKind::JpegCompression => 98.0,
            TransformKind::BrightnessDecrease => 90.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TransformKind::JpegCompression => "jpeg",
            TransformKind::BrightnessDecrease => "light",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "jpeg" => Ok(TransformKind::JpegCompression),
            "light" => Ok(TransformKind::BrightnessDecrease),
            other => Err(Error::Config(format!(
                "unknown transform {other:?} (expected jpeg or light)"
            ))),
        }
    }

    fn check_amount(self, amount_pct: f64) -> Result<()> {
        if !(amount_pct.is_finite() && (0.0..=self.max_amount()).contains(&amount_pct)) {
            return Err(Error::Parameter(format!(
                "{} amount {amount_pct} outside [0, {}]",
                self.as_str(),
                self.max_amount()
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for TransformKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One degradation amount; `amount_pct == 0` is the untransformed reference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformSpec {
    kind: TransformKind,
    amount_pct: f64,
}

impl TransformSpec {
    pub fn new(kind: TransformKind, amount_pct: f64) -> Result<Self> {
        kind.check_amount(amount_pct)?;
        Ok(Self { kind, amount_pct })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn amount_pct(&self) -> f64 {
        self.amount_pct
    }

    /// Degrades `img` by this amount.
    pub fn apply(&self, img: &Image) -> Result<Image> {
        match self.kind {
            TransformKind::JpegCompression => apply_jpeg(img, self.amount_pct),
            TransformKind::BrightnessDecrease => apply_brightness(img, self.amount_pct),
        }
    }
}

/// Uniform illumination decrease: each pixel is scaled by `1 - d/100`,
/// rounded half-up and clamped.
pub fn apply_brightness(img: &Image, decrease_pct: f64) -> Result<Image> {
    TransformKind::BrightnessDecrease.check_amount(decrease_pct)?;
    let keep = 100.0 - decrease_pct;
    // One lookup per intensity keeps the map monotone by construction.
    let mut lut = [0u8; 256];
    for (v, out) in lut.iter_mut().enumerate() {
        let scaled = (v as f64 * keep) / 100.0;
        *out = (scaled + 0.5).floor().clamp(0.0, 255.0) as u8;
    }
    let pixels = img.pixels().iter().map(|&p| lut[p as usize]).collect();
    Image::new(img.width(), img.height(), pixels)
}

/// Encoder quality used for a compression ratio: `clamp(100 - ratio, 1, 100)`.
pub fn jpeg_quality_for_ratio(ratio_pct: f64) -> Result<u8> {
    TransformKind::JpegCompression.check_amount(ratio_pct)?;
    Ok((100.0 - ratio_pct).round().clamp(1.0, 100.0) as u8)
}

/// Baseline grayscale JPEG bytes at the quality implied by `ratio_pct`.
pub fn encode_jpeg(img: &Image, ratio_pct: f64) -> Result<Vec<u8>> {
    let quality = jpeg_quality_for_ratio(ratio_pct)?;
    let mut buf = Vec::new();
    JpegEncoder::new_with_quality(&mut buf, quality)
        .encode(
            img.pixels(),
            img.width() as u32,
            img.height() as u32,
            ExtendedColorType::L8,
        )
        .map_err(|e| Error::Codec(e.to_string()))?;
    Ok(buf)
}

/// Decodes JPEG bytes produced by [`encode_jpeg`].
pub fn decode_jpeg(bytes: &[u8]) -> Result<Image> {
    let dynamic = image::load_from_memory_with_format(bytes, ImageFormat::Jpeg)
        .map_err(|e| Error::Codec(e.to_string()))?;
    from_dynamic(dynamic)
}

/// JPEG round trip at the quality implied by `ratio_pct`.
pub fn apply_jpeg(img: &Image, ratio_pct: f64) -> Result<Image> {
    let bytes = encode_jpeg(img, ratio_pct)?;
    let out = decode_jpeg(&bytes)?;
    if out.dims() != img.dims() {
        return Err(Error::Codec(format!(
            "decoded size {:?} differs from input {:?}",
            out.dims(),
            img.dims()
        )));
    }
    Ok(out)
}

/// Peak signal-to-noise ratio in dB; infinite for identical images.
pub fn psnr(a: &Image, b: &Image) -> f64 {
    assert_eq!(a.dims(), b.dims(), "psnr needs equal dimensions");
    let sse: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&p, &q)| {
            let d = p as f64 - q as f64;
            d * d
        })
        .sum();
    if sse == 0.0 {
        return f64::INFINITY;
    }
    let mse = sse / a.pixels().len() as f64;
    10.0 * (255.0 * 255.0 / mse).log10()
}

/// `count` amounts evenly spaced over `[0, kind.max_amount()]`, rounded to
/// whole percent, with collisions pushed up by one.
pub fn default_schedule(kind: TransformKind, count: usize) -> Vec<f64> {
    assert!(count >= 2, "a schedule needs at least two steps");
    let end = kind.max_amount() as u64;
    let span = (count - 1) as u64;
    let mut out: Vec<u64> = Vec::with_capacity(count);
    for k in 0..count as u64 {
        // round-half-up of end * k / span, exactly
        let mut v = (2 * end * k + span) / (2 * span);
        if let Some(&prev) = out.last() {
            if v <= prev {
                v = prev + 1;
            }
        }
        out.push(v);
    }
    out.into_iter().map(|v| v as f64).collect()
}

/// Checks that a step schedule is strictly increasing, starts at zero and
/// stays inside the kind's range.
pub fn validate_schedule(kind: TransformKind, steps: &[f64]) -> Result<()> {
    if steps.len() < 2 {
        return Err(Error::Parameter(format!(
            "schedule needs at least 2 steps, got {}",
            steps.len()
        )));
    }
    if steps[0] != 0.0 {
        return Err(Error::Parameter(format!(
            "schedule must start at 0, got {}",
            steps[0]
        )));
    }
    for &s in steps {
        kind.check_amount(s)?;
    }
    if let Some(w) = steps.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Parameter(format!(
            "schedule not strictly increasing at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Rejects identifiers that would break file names or the CSV formats.
pub fn validate_scene_id(scene_id: &str) -> Result<()> {
    let ok = !scene_id.is_empty()
        && !scene_id.starts_with('.')
        && scene_id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "scene id {scene_id:?} must be non-empty ASCII [A-Za-z0-9._-] not starting with '.'"
        )))
    }
}

/// File name of the `k`-th image (1-based) of a dataset.
pub fn step_file_name(scene_id: &str, k: usize, kind: TransformKind) -> String {
    let ext = if k > 1 && kind == TransformKind::JpegCompression {
        "jpg"
    } else {
        "png"
    };
    format!("{scene_id}_step{k}.{ext}")
}

/// On-disk form of a dataset; keys and their order are part of the format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub scene_id: String,
    pub kind: TransformKind,
    pub steps: Vec<f64>,
    pub images: Vec<String>,
    pub homography: [f64; 9],
    pub codec: String,
}

/// A reference image plus its degraded versions.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub scene_id: String,
    pub kind: TransformKind,
    pub steps: Vec<f64>,
    pub image_paths: Vec<PathBuf>,
    pub homography: Homography,
    pub codec: String,
}

impl Dataset {
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Loads the image at step index `k` (0-based; 0 is the reference).
    pub fn load_step(&self, k: usize) -> Result<Image> {
        load_image(&self.image_paths[k])
    }

    /// Reads `<dir>/manifest.json` and resolves image paths against `dir`.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(MANIFEST_NAME);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
            source_name: path.display().to_string(),
            line: e.line() as u64,
            message: e.to_string(),
        })?;
        validate_scene_id(&manifest.scene_id)?;
        validate_schedule(manifest.kind, &manifest.steps)?;
        if manifest.images.len() != manifest.steps.len() {
            return Err(Error::Validation(format!(
                "{}: {} images for {} steps",
                path.display(),
                manifest.images.len(),
                manifest.steps.len()
            )));
        }
        Ok(Dataset {
            scene_id: manifest.scene_id,
            kind: manifest.kind,
            steps: manifest.steps,
            image_paths: manifest.images.iter().map(|p| dir.join(p)).collect(),
            homography: Homography::new(manifest.homography)?,
            codec: manifest.codec,
        })
    }
}

/// Writes the sweep for one scene into `out_dir/<scene_id>/` and returns it.
///
/// Step 1 is the reference, stored as PNG. JPEG steps store the encoder's
/// bytes verbatim; brightness steps are PNG.
pub fn build_dataset(
    scene_image: &Image,
    scene_id: &str,
    kind: TransformKind,
    step_schedule: &[f64],
    out_dir: impl AsRef<Path>,
) -> Result<Dataset> {
    validate_scene_id(scene_id)?;
    validate_schedule(kind, step_schedule)?;
    let dir = out_dir.as_ref().join(scene_id);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let mut images = Vec::with_capacity(step_schedule.len());
    for (idx, &amount) in step_schedule.iter().enumerate() {
        let name = step_file_name(scene_id, idx + 1, kind);
        let bytes = if idx == 0 {
            encode_png(scene_image)?
        } else {
            match kind {
                TransformKind::JpegCompression => encode_jpeg(scene_image, amount)?,
                TransformKind::BrightnessDecrease => {
                    encode_png(&apply_brightness(scene_image, amount)?)?
                }
            }
        };
        let path = dir.join(&name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        images.push(name);
    }

    let homography = Homography::identity();
    let manifest = Manifest {
        scene_id: scene_id.to_string(),
        kind,
        steps: step_schedule.to_vec(),
        images,
        homography: *homography.as_array(),
        codec: CODEC_ID.to_string(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;

    Ok(Dataset {
        scene_id: manifest.scene_id,
        kind,
        steps: manifest.steps,
        image_paths: manifest.images.iter().map(|p| dir.join(p)).collect(),
        homography,
        codec: manifest.codec,
    })
}

/// Procedural test scene: fractal value noise under a few dozen filled
/// shapes, lightly blurred. Same seed, same image.
pub fn synthetic_scene(seed: u64, width: usize, height: usize) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut canvas = vec![0.0f64; width * height];

    // 1/f-like background from summed lattice noise.
    let mut amplitude = 0.5;
    let mut cell = 48.0f64;
    while cell >= 2.0 {
        let gw = (width as f64 / cell).ceil() as usize + 2;
        let gh = (height as f64 / cell).ceil() as usize + 2;
        let lattice: Vec<f64> = (0..gw * gh).map(|_| rng.random::<f64>() - 0.5).collect();
        for y in 0..height {
            let fy = y as f64 / cell;
            let (iy, ty) = (fy.floor() as usize, smoothstep(fy.fract()));
            for x in 0..width {
                let fx = x as f64 / cell;
                let (ix, tx) = (fx.floor() as usize, smoothstep(fx.fract()));
                let at = |i: usize, j: usize| lattice[j * gw + i];
                let top = at(ix, iy) * (1.0 - tx) + at(ix + 1, iy) * tx;
                let bottom = at(ix, iy + 1) * (1.0 - tx) + at(ix + 1, iy + 1) * tx;
                canvas[y * width + x] += amplitude * (top * (1.0 - ty) + bottom * ty);
            }
        }
        amplitude *= 0.6;
        cell /= 2.0;
    }
    for v in canvas.iter_mut() {
        *v += 0.5;
    }

    let n_shapes = 20 + (width * height / 2500).min(40);
    for _ in 0..n_shapes {
        let cx = rng.random::<f64>() * width as f64;
        let cy = rng.random::<f64>() * height as f64;
        let size = 4.0 + rng.random::<f64>() * (width.min(height) as f64 / 6.0);
        let level = rng.random::<f64>();
        let alpha = 0.6 + 0.4 * rng.random::<f64>();
        let angle = rng.random::<f64>() * std::f64::consts::PI;
        let aspect = 0.4 + rng.random::<f64>() * 0.6;
        let shape = rng.random_range(0..3u8);
        let (s, c) = angle.sin_cos();
        let x0 = (cx - size).floor().max(0.0) as usize;
        let x1 = ((cx + size).ceil() as usize).min(width);
        let y0 = (cy - size).floor().max(0.0) as usize;
        let y1 = ((cy + size).ceil() as usize).min(height);
        for y in y0..y1 {
            for x in x0..x1 {
                // 2x2 supersampled coverage
                let mut cover = 0.0;
                for (ox, oy) in [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)] {
                    let dx = x as f64 + ox - 0.5 - cx;
                    let dy = y as f64 + oy - 0.5 - cy;
                    let u = (c * dx + s * dy) / size;
                    let v = (-s * dx + c * dy) / (size * aspect);
                    let inside = match shape {
                        0 => u.abs() <= 1.0 && v.abs() <= 1.0,
                        1 => u * u + v * v <= 1.0,
                        _ => (-0.5..=1.0).contains(&v) && u.abs() <= (1.0 - v) * 0.6,
                    };
                    if inside {
                        cover += 0.25;
                    }
                }
                if cover > 0.0 {
                    let i = y * width + x;
                    let a = alpha * cover;
                    canvas[i] = canvas[i] * (1.0 - a) + level * a;
                }
            }
        }
    }

    let blurred = crate::detectors::filter::Plane::from_values(width, height, canvas)
        .gaussian_blur(0.7);
    let pixels = blurred
        .data()
        .iter()
        .map(|&v| (10.0 + v.clamp(0.0, 1.0) * 235.0).round() as u8)
        .collect();
    Image::new(width, height, pixels).expect("dims match")
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_rejects_bad_buffers() {
        assert!(Image::new(2, 2, vec![0; 3]).is_err());
        assert!(Image::new(0, 2, vec![]).is_err());
        assert!(Image::new(2, 2, vec![0; 4]).is_ok());
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tiny.pgm");
        let img = Image::new(2, 2, vec![0, 255, 128, 64]).unwrap();
        save_image(&img, &path).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn luma_conversion() {
        assert_eq!(luma_bt601(255, 255, 255), 255);
        assert_eq!(luma_bt601(0, 0, 0), 0);
        // 0.299 * 255 = 76.245
        assert_eq!(luma_bt601(255, 0, 0), 76);
        // 0.587 * 255 = 149.685
        assert_eq!(luma_bt601(0, 255, 0), 150);
        // 0.114 * 255 = 29.07
        assert_eq!(luma_bt601(0, 0, 255), 29);
    }

    #[test]
    fn color_png_loads_as_luma() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        let rgb = image::RgbImage::from_raw(2, 1, vec![255, 0, 0, 255, 255, 255]).unwrap();
        rgb.save(&path).unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.pixels(), &[76, 255]);
    }

    #[test]
    fn load_errors_are_distinct() {
        let dir = tempfile::tempdir().unwrap();
        let missing = load_image(dir.path().join("nope.png")).unwrap_err();
        assert!(matches!(missing, Error::Io { .. }));
        let junk = dir.path().join("junk.png");
        fs::write(&junk, b"definitely not an image").unwrap();
        assert!(matches!(load_image(&junk).unwrap_err(), Error::Format { .. }));
    }

    #[test]
    fn brightness_examples() {
        let img = Image::new(3, 1, vec![200, 255, 7]).unwrap();
        assert_eq!(apply_brightness(&img, 0.0).unwrap(), img);
        let half = apply_brightness(&img, 50.0).unwrap();
        assert_eq!(half.pixels()[0], 100);
        // 255 * 0.1 = 25.5 rounds up
        assert_eq!(apply_brightness(&img, 90.0).unwrap().pixels()[1], 26);
        assert!(matches!(
            apply_brightness(&img, 91.0),
            Err(Error::Parameter(_))
        ));
        assert!(apply_brightness(&img, -1.0).is_err());
    }

    #[test]
    fn jpeg_quality_mapping() {
        assert_eq!(jpeg_quality_for_ratio(98.0).unwrap(), 2);
        assert_eq!(jpeg_quality_for_ratio(0.0).unwrap(), 100);
        assert_eq!(jpeg_quality_for_ratio(50.0).unwrap(), 50);
        assert!(jpeg_quality_for_ratio(99.0).is_err());
    }

    #[test]
    fn jpeg_at_ratio_zero_is_high_fidelity() {
        let scene = synthetic_scene(7, 128, 96);
        let out = apply_jpeg(&scene, 0.0).unwrap();
        assert_eq!(out.dims(), scene.dims());
        let db = psnr(&scene, &out);
        assert!(db >= 40.0, "psnr {db}");
    }

    #[test]
    fn jpeg_keeps_constant_images_flat() {
        // Output is flat at every ratio. It stays within one level of the
        // input up to ratio 60; beyond that the DC quantizer step exceeds
        // 16 and the flat level drifts (up to 16 levels at quality 2).
        for value in 0..=255u8 {
            let img = Image::filled(40, 24, value).unwrap();
            for (ratio, max_drift) in [(0.0, 1), (30.0, 1), (60.0, 1), (75.0, 2), (98.0, 16)] {
                let out = apply_jpeg(&img, ratio).unwrap();
                let lo = *out.pixels().iter().min().unwrap() as i32;
                let hi = *out.pixels().iter().max().unwrap() as i32;
                assert!(hi - lo <= 1, "value {value} ratio {ratio}: spread {lo}..{hi}");
                let drift = (lo - value as i32).abs().max((hi - value as i32).abs());
                assert!(drift <= max_drift, "value {value} ratio {ratio}: drift {drift}");
            }
        }
    }

    #[test]
    fn default_schedules() {
        assert_eq!(
            default_schedule(TransformKind::JpegCompression, 14),
            vec![0., 8., 15., 23., 30., 38., 45., 53., 60., 68., 75., 83., 90., 98.]
        );
        assert_eq!(
            default_schedule(TransformKind::BrightnessDecrease, 14),
            vec![0., 7., 14., 21., 28., 35., 42., 48., 55., 62., 69., 76., 83., 90.]
        );
        // collisions get bumped
        assert_eq!(
            default_schedule(TransformKind::BrightnessDecrease, 4),
            vec![0., 30., 60., 90.]
        );
    }

    #[test]
    fn schedule_validation() {
        let k = TransformKind::JpegCompression;
        assert!(validate_schedule(k, &[0.0, 10.0, 98.0]).is_ok());
        assert!(validate_schedule(k, &[1.0, 10.0]).is_err());
        assert!(validate_schedule(k, &[0.0, 10.0, 10.0]).is_err());
        assert!(validate_schedule(k, &[0.0, 99.0]).is_err());
        assert!(validate_schedule(k, &[0.0]).is_err());
    }

    #[test]
    fn dataset_layout_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let scene = synthetic_scene(1, 64, 48);
        let steps = default_schedule(TransformKind::JpegCompression, 14);
        let ds = build_dataset(&scene, "s1", TransformKind::JpegCompression, &steps, dir.path())
            .unwrap();
        assert_eq!(ds.image_paths.len(), 14);
        let files = fs::read_dir(dir.path().join("s1")).unwrap().count();
        assert_eq!(files, 15);

        let text = fs::read_to_string(dir.path().join("s1").join(MANIFEST_NAME)).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let keys: Vec<_> = value.as_object().unwrap().keys().cloned().collect();
        let mut expected = vec!["scene_id", "kind", "steps", "images", "homography", "codec"];
        expected.sort();
        let mut got = keys.clone();
        got.sort();
        assert_eq!(got, expected);
        assert_eq!(value["kind"], "jpeg");
        let h: Vec<f64> = serde_json::from_value(value["homography"].clone()).unwrap();
        assert_eq!(h, vec![1., 0., 0., 0., 1., 0., 0., 0., 1.]);

        let reopened = Dataset::open(dir.path().join("s1")).unwrap();
        assert_eq!(reopened, ds);
        assert_eq!(reopened.load_step(0).unwrap(), scene);
        // the stored JPEG decodes to the in-memory round trip
        assert_eq!(
            reopened.load_step(5).unwrap(),
            apply_jpeg(&scene, steps[5]).unwrap()
        );
    }

    #[test]
    fn dataset_rejects_bad_schedule() {
        let dir = tempfile::tempdir().unwrap();
        let scene = synthetic_scene(1, 32, 32);
        let err = build_dataset(
            &scene,
            "s",
            TransformKind::BrightnessDecrease,
            &[0.0, 50.0, 40.0],
            dir.path(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }

    #[test]
    fn synthetic_scene_is_deterministic_and_textured() {
        let a = synthetic_scene(3, 96, 64);
        assert_eq!(a, synthetic_scene(3, 96, 64));
        assert_ne!(a, synthetic_scene(4, 96, 64));
        let min = *a.pixels().iter().min().unwrap();
        let max = *a.pixels().iter().max().unwrap();
        assert!(max - min > 100);
    }
}
