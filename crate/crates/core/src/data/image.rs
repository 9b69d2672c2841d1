//! Grayscale rasters normalized to `[0, 1]`, plus decoding and PGM output.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::{DynamicImage, ImageError, ImageReader};

use crate::error::{Error, Result};

/// A grayscale raster with row-major intensities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// Smallest accepted side length.
    pub const MIN_SIDE: usize = 16;

    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width < Self::MIN_SIDE || height < Self::MIN_SIDE {
            return Err(Error::ImageTooSmall {
                width,
                height,
                min: Self::MIN_SIDE,
            });
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} pixels supplied for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(p) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!("intensity {p} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn same_size(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Circular shift: the pixel at `(x, y)` moves to `(x + dx, y + dy)` modulo the size.
    pub fn circular_shift(&self, dx: isize, dy: isize) -> GrayImage {
        let (w, h) = (self.width as isize, self.height as isize);
        let mut out = vec![0.0; self.pixels.len()];
        for y in 0..h {
            for x in 0..w {
                let sx = (x - dx).rem_euclid(w);
                let sy = (y - dy).rem_euclid(h);
                out[(y * w + x) as usize] = self.pixels[(sy * w + sx) as usize];
            }
        }
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: out,
        }
    }

    /// Rotates the content by `degrees` about the image center using bilinear
    /// interpolation. Samples falling outside the source take `fill`.
    ///
    /// The rotation convention matches [`crate::data::synth_rotated_set`]:
    /// rotating frame `i` by `-step * i` brings it back onto frame 0.
    pub fn rotate_bilinear(&self, degrees: f64, fill: f64) -> GrayImage {
        let (sin, cos) = degrees.to_radians().sin_cos();
        let cx = self.width as f64 / 2.0;
        let cy = self.height as f64 / 2.0;
        let mut out = Vec::with_capacity(self.pixels.len());
        for y in 0..self.height {
            for x in 0..self.width {
                let px = x as f64 + 0.5 - cx;
                let py = y as f64 + 0.5 - cy;
                // inverse map: source = R(-theta) * p
                let sx = cos * px + sin * py + cx - 0.5;
                let sy = -sin * px + cos * py + cy - 0.5;
                out.push(self.sample_bilinear(sx, sy, fill));
            }
        }
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: out,
        }
    }

    fn sample_bilinear(&self, sx: f64, sy: f64, fill: f64) -> f64 {
        let x0 = sx.floor();
        let y0 = sy.floor();
        let fx = sx - x0;
        let fy = sy - y0;
        let at = |x: f64, y: f64| -> f64 {
            if x < 0.0 || y < 0.0 || x >= self.width as f64 || y >= self.height as f64 {
                fill
            } else {
                self.get(x as usize, y as usize)
            }
        };
        let top = at(x0, y0) * (1.0 - fx) + at(x0 + 1.0, y0) * fx;
        let bottom = at(x0, y0 + 1.0) * (1.0 - fx) + at(x0 + 1.0, y0 + 1.0) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    pub fn mean_abs_diff(&self, other: &GrayImage) -> Result<f64> {
        if !self.same_size(other) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        let total: f64 = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(total / self.pixels.len() as f64)
    }

    /// 8-bit quantization used by PGM/PNG output.
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|p| (p * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }
}

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// Decodes a PNG, PGM/PPM or BMP file into a normalized grayscale image.
///
/// Color inputs are reduced with 0.299/0.587/0.114 luma weights; 8-bit
/// samples are divided by 255 and 16-bit samples by 65535.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    if reader.format().is_none() {
        return Err(Error::UnsupportedFormat(path.to_path_buf()));
    }
    let decoded = reader.decode().map_err(|e| match e {
        ImageError::Unsupported(_) => Error::UnsupportedFormat(path.to_path_buf()),
        ImageError::IoError(io) => Error::io(path, io),
        other => Error::Decode {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })?;
    from_dynamic(&decoded)
}

fn from_dynamic(img: &DynamicImage) -> Result<GrayImage> {
    use image::ColorType;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels: Vec<f64> = match img.color() {
        ColorType::L8 | ColorType::La8 => img
            .to_luma8()
            .into_raw()
            .into_iter()
            .map(|v| f64::from(v) / 255.0)
            .collect(),
        ColorType::L16 | ColorType::La16 => img
            .to_luma16()
            .into_raw()
            .into_iter()
            .map(|v| f64::from(v) / 65535.0)
            .collect(),
        ColorType::Rgb8 | ColorType::Rgba8 => img
            .to_rgb8()
            .into_raw()
            .chunks_exact(3)
            .map(|c| luma(f64::from(c[0]), f64::from(c[1]), f64::from(c[2])) / 255.0)
            .collect(),
        _ => img
            .to_rgb16()
            .into_raw()
            .chunks_exact(3)
            .map(|c| luma(f64::from(c[0]), f64::from(c[1]), f64::from(c[2])) / 65535.0)
            .collect(),
    };
    // weights sum to 1 but rounding can nudge past the bounds
    let pixels = pixels.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
    GrayImage::new(w, h, pixels)
}

fn luma(r: f64, g: f64, b: f64) -> f64 {
    LUMA_R * r + LUMA_G * g + LUMA_B * b
}

/// Writes a binary (P5) 8-bit PGM.
pub fn save_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    write_pgm_bytes(path, img.width(), img.height(), &img.to_u8())
}

pub(crate) fn write_pgm_bytes(path: &Path, width: usize, height: usize, bytes: &[u8]) -> Result<()> {
    let mut buf = Vec::with_capacity(bytes.len() + 32);
    write!(buf, "P5\n{width} {height}\n255\n").expect("write to Vec");
    buf.extend_from_slice(bytes);
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}
