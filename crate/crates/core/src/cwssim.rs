//! Complex wavelet structural similarity.
//!
//! The local index compares two windows of complex coefficients taken from
//! the same subband:
//!
//! ```text
//! S(cx, cy) = (2 |sum cx_i conj(cy_i)| + K) / (sum |cx_i|^2 + sum |cy_i|^2 + K)
//! ```
//!
//! A phase rotation shared by all coefficients of the window cancels inside
//! the modulus, which is what makes the index tolerant of small translations
//! and rotations. The global index is the unweighted mean of the local index
//! over every fully-contained window position of every subband.

use std::ops::Add;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::data::GrayImage;
use crate::error::{Error, Result};
use crate::wavelet::{build_pyramid, Band, ComplexPyramid, PyramidConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CwSsimConfig {
    /// Stabilizing constant `K`.
    pub k: f64,
    /// Side of the square sliding window, in coefficients.
    pub window: usize,
    pub stride: usize,
    pub pyramid: PyramidConfig,
}

impl Default for CwSsimConfig {
    fn default() -> Self {
        Self {
            k: 0.01,
            window: 7,
            stride: 1,
            pyramid: PyramidConfig::default(),
        }
    }
}

impl CwSsimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::invalid(format!("K must be positive, got {}", self.k)));
        }
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "window must be odd and at least 3, got {}",
                self.window
            )));
        }
        if self.stride < 1 {
            return Err(Error::invalid("stride must be at least 1"));
        }
        self.pyramid.validate()
    }
}

/// Local CW-SSIM index of two equally long coefficient vectors.
pub fn local_cwssim(cx: &[Complex64], cy: &[Complex64], k: f64) -> Result<f64> {
    if cx.len() != cy.len() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient vectors of length {} and {}",
            cx.len(),
            cy.len()
        )));
    }
    if cx.is_empty() {
        return Err(Error::invalid("coefficient vectors are empty"));
    }
    if k.is_nan() || k <= 0.0 {
        return Err(Error::invalid(format!("K must be positive, got {k}")));
    }
    let cross: Complex64 = cx.iter().zip(cy).map(|(&a, &b)| conj_product(a, b)).sum();
    let ex: f64 = cx.iter().map(|c| c.norm_sqr()).sum();
    let ey: f64 = cy.iter().map(|c| c.norm_sqr()).sum();
    Ok(local_index(cross, ex, ey, k))
}

#[inline]
fn local_index(cross: Complex64, ex: f64, ey: f64, k: f64) -> f64 {
    (2.0 * cross.norm() + k) / (ex + ey + k)
}

/// `a * conj(b)`, written out so that `a * conj(a)` has exactly `|a|^2` as
/// its real part and an exactly zero imaginary part.
#[inline]
fn conj_product(a: Complex64, b: Complex64) -> Complex64 {
    Complex64::new(a.re * b.re + a.im * b.im, a.im * b.re - a.re * b.im)
}

/// Number of window positions along one axis.
fn positions(len: usize, window: usize, stride: usize) -> usize {
    if len < window {
        0
    } else {
        (len - window) / stride + 1
    }
}

/// Windows per band: `ceil((bw - window + 1) / stride) * ceil((bh - window + 1) / stride)`.
pub fn window_count(bw: usize, bh: usize, window: usize, stride: usize) -> usize {
    positions(bw, window, stride) * positions(bh, window, stride)
}

/// Sums over every `window x window` block at the strided positions,
/// row-major over positions. Separable: rows first, then columns.
fn window_sums<T: Copy + Default + Add<Output = T>>(
    data: &[T],
    w: usize,
    h: usize,
    window: usize,
    stride: usize,
) -> Vec<T> {
    let nx = positions(w, window, stride);
    let ny = positions(h, window, stride);
    if nx == 0 || ny == 0 {
        return Vec::new();
    }
    let mut rows = vec![T::default(); h * nx];
    for y in 0..h {
        let line = &data[y * w..(y + 1) * w];
        for xi in 0..nx {
            let x0 = xi * stride;
            rows[y * nx + xi] = line[x0..x0 + window].iter().fold(T::default(), |acc, &v| acc + v);
        }
    }
    let mut out = vec![T::default(); nx * ny];
    for yi in 0..ny {
        let y0 = yi * stride;
        for xi in 0..nx {
            out[yi * nx + xi] = (y0..y0 + window).fold(T::default(), |acc, y| acc + rows[y * nx + xi]);
        }
    }
    out
}

/// Per-image data reused across every pair the image takes part in: the
/// pyramid and the window energies `sum |c|^2` of each band.
#[derive(Clone, Debug)]
pub struct CwSsimFeatures {
    width: usize,
    height: usize,
    pyramid: ComplexPyramid,
    energies: Vec<Vec<f64>>,
}

impl CwSsimFeatures {
    pub fn new(img: &GrayImage, cfg: &CwSsimConfig) -> Result<Self> {
        cfg.validate()?;
        let pyramid = build_pyramid(img, &cfg.pyramid)?;
        let total: usize = pyramid
            .bands()
            .iter()
            .map(|b| window_count(b.width, b.height, cfg.window, cfg.stride))
            .sum();
        if total == 0 {
            return Err(Error::invalid(format!(
                "no {0}x{0} window fits in any subband of a {1}x{2} image",
                cfg.window,
                img.width(),
                img.height()
            )));
        }
        let energies = pyramid
            .bands()
            .iter()
            .map(|b| {
                let e: Vec<f64> = b.data.iter().map(|c| c.norm_sqr()).collect();
                window_sums(&e, b.width, b.height, cfg.window, cfg.stride)
            })
            .collect();
        Ok(Self {
            width: img.width(),
            height: img.height(),
            pyramid,
            energies,
        })
    }

    pub fn pyramid(&self) -> &ComplexPyramid {
        &self.pyramid
    }
}

/// Global CW-SSIM index from precomputed features (both built with `cfg`).
pub fn cwssim_from_features(a: &CwSsimFeatures, b: &CwSsimFeatures, cfg: &CwSsimConfig) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut cross = Vec::new();
    for ((ba, bb), (ea, eb)) in a
        .pyramid
        .bands()
        .iter()
        .zip(b.pyramid.bands())
        .zip(a.energies.iter().zip(&b.energies))
    {
        if ea.is_empty() {
            continue;
        }
        band_cross(ba, bb, &mut cross);
        let windows = window_sums(&cross, ba.width, ba.height, cfg.window, cfg.stride);
        for ((c, &ex), &ey) in windows.iter().zip(ea).zip(eb) {
            sum += local_index(*c, ex, ey, cfg.k);
        }
        count += windows.len();
    }
    Ok(sum / count as f64)
}

fn band_cross(a: &Band, b: &Band, out: &mut Vec<Complex64>) {
    out.clear();
    out.extend(a.data.iter().zip(&b.data).map(|(&p, &q)| conj_product(p, q)));
}

pub fn global_cwssim(x: &GrayImage, y: &GrayImage, cfg: &CwSsimConfig) -> Result<f64> {
    if !x.same_size(y) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            x.width(),
            x.height(),
            y.width(),
            y.height()
        )));
    }
    let fx = CwSsimFeatures::new(x, cfg)?;
    let fy = CwSsimFeatures::new(y, cfg)?;
    cwssim_from_features(&fx, &fy, cfg)
}

/// `1 - S(x, y)`, clamped at zero against rounding.
pub fn cwssim_distance(x: &GrayImage, y: &GrayImage, cfg: &CwSsimConfig) -> Result<f64> {
    Ok((1.0 - global_cwssim(x, y, cfg)?).max(0.0))
}
