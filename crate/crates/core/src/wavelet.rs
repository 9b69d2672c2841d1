//! Oriented complex bandpass decomposition computed in the frequency domain.
//!
//! The filter bank follows the complex steerable pyramid layout: at every
//! scale the (low-passed) spectrum is multiplied by a log-radial raised-cosine
//! highpass window and by one-sided angular windows `cos^(N-1)(theta - theta_k)`,
//! restricted to the half plane around `theta_k`. The half-plane support makes
//! every band analytic, so its coefficients carry local phase. Between scales
//! the spectrum is low-passed and cropped, which downsamples by two.
//!
//! Boundaries are periodic: the transform sees the image as a torus.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

pub use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::data::GrayImage;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PyramidConfig {
    pub n_scales: usize,
    pub n_orientations: usize,
}

impl Default for PyramidConfig {
    fn default() -> Self {
        Self {
            n_scales: 2,
            n_orientations: 6,
        }
    }
}

impl PyramidConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_scales < 1 {
            return Err(Error::invalid("n_scales must be at least 1"));
        }
        if self.n_orientations < 2 {
            return Err(Error::invalid("n_orientations must be at least 2"));
        }
        Ok(())
    }

    /// Smallest image side the configured depth accepts: `2^(n_scales + 2)`.
    pub fn min_side(&self) -> usize {
        1usize << (self.n_scales + 2)
    }
}

/// One complex subband, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Band {
    pub width: usize,
    pub height: usize,
    pub data: Vec<Complex64>,
}

impl Band {
    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.data[y * self.width + x]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPyramid {
    config: PyramidConfig,
    bands: Vec<Band>,
}

impl ComplexPyramid {
    pub fn config(&self) -> PyramidConfig {
        self.config
    }

    /// All bands, scale-major: index `scale * n_orientations + orientation`.
    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn band(&self, scale: usize, orientation: usize) -> Result<&Band> {
        if scale >= self.config.n_scales || orientation >= self.config.n_orientations {
            return Err(Error::IndexOutOfRange(format!(
                "band ({scale}, {orientation}) of a {}x{} pyramid",
                self.config.n_scales, self.config.n_orientations
            )));
        }
        Ok(&self.bands[scale * self.config.n_orientations + orientation])
    }
}

pub fn build_pyramid(img: &GrayImage, cfg: &PyramidConfig) -> Result<ComplexPyramid> {
    build_pyramid_from_samples(img.width(), img.height(), img.pixels(), cfg)
}

/// Same as [`build_pyramid`] on an arbitrary real-valued raster (no `[0, 1]`
/// range requirement).
pub fn build_pyramid_from_samples(
    width: usize,
    height: usize,
    samples: &[f64],
    cfg: &PyramidConfig,
) -> Result<ComplexPyramid> {
    cfg.validate()?;
    if samples.len() != width * height {
        return Err(Error::DimensionMismatch(format!(
            "{} samples for {width}x{height}",
            samples.len()
        )));
    }
    let min = cfg.min_side();
    if width.min(height) < min {
        return Err(Error::ImageTooSmall { width, height, min });
    }

    let mut planner = FftPlanner::<f64>::new();
    let mut spectrum: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut planner, &mut spectrum, width, height, FftDirection::Forward);
    // inverse transforms at every scale use the full-resolution normalization,
    // which keeps amplitudes comparable after spectral cropping
    let norm = 1.0 / (width * height) as f64;

    let (mut w, mut h) = (width, height);
    let grid = FreqGrid::new(w, h);
    for (s, (rho, _)) in spectrum.iter_mut().zip(grid.polar()) {
        *s *= lowpass(rho / 2.0);
    }

    let n_orient = cfg.n_orientations;
    let alpha = angular_gain(n_orient);
    let mut bands = Vec::with_capacity(cfg.n_scales * n_orient);
    for scale in 0..cfg.n_scales {
        let grid = FreqGrid::new(w, h);
        let polar: Vec<(f64, f64)> = grid.polar().collect();
        for k in 0..n_orient {
            let theta_k = PI * k as f64 / n_orient as f64;
            let mut data: Vec<Complex64> = spectrum
                .iter()
                .zip(&polar)
                .map(|(&s, &(rho, theta))| {
                    let c = (theta - theta_k).cos();
                    if c <= 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        s * (highpass(rho) * alpha * c.powi(n_orient as i32 - 1))
                    }
                })
                .collect();
            fft2(&mut planner, &mut data, w, h, FftDirection::Inverse);
            for c in &mut data {
                *c *= norm;
            }
            bands.push(Band {
                width: w,
                height: h,
                data,
            });
        }
        if scale + 1 < cfg.n_scales {
            for (s, &(rho, _)) in spectrum.iter_mut().zip(&polar) {
                *s *= lowpass(rho);
            }
            let (nw, nh) = (w.div_ceil(2), h.div_ceil(2));
            spectrum = crop_spectrum(&spectrum, w, h, nw, nh);
            (w, h) = (nw, nh);
        }
    }

    Ok(ComplexPyramid {
        config: *cfg,
        bands,
    })
}

/// Raised-cosine lowpass on a log2 radial axis: 1 below pi/4, 0 above pi/2.
fn lowpass(rho: f64) -> f64 {
    if rho <= FRAC_PI_4 {
        1.0
    } else if rho >= FRAC_PI_2 {
        0.0
    } else {
        (FRAC_PI_2 * (4.0 * rho / PI).log2()).cos()
    }
}

/// Power-complementary partner of [`lowpass`].
fn highpass(rho: f64) -> f64 {
    if rho <= FRAC_PI_4 {
        0.0
    } else if rho >= FRAC_PI_2 {
        1.0
    } else {
        (FRAC_PI_2 * (4.0 * rho / PI).log2()).sin()
    }
}

/// Steerable angular normalization `2^(N-1) (N-1)! / sqrt(N (2(N-1))!)`,
/// doubled because only one half plane is kept.
fn angular_gain(n: usize) -> f64 {
    let fact = |m: usize| (1..=m).map(|v| v as f64).product::<f64>();
    let order = n - 1;
    2.0 * 2f64.powi(order as i32) * fact(order) / (n as f64 * fact(2 * order)).sqrt()
}

/// Signed integer frequency of DFT bin `i` in a length-`n` transform.
fn signed_freq(i: usize, n: usize) -> isize {
    if i <= (n - 1) / 2 {
        i as isize
    } else {
        i as isize - n as isize
    }
}

struct FreqGrid {
    width: usize,
    height: usize,
}

impl FreqGrid {
    fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    /// (radius, angle) in radians/sample for every bin, row-major.
    fn polar(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.height).flat_map(move |y| {
            let wy = 2.0 * PI * signed_freq(y, self.height) as f64 / self.height as f64;
            (0..self.width).map(move |x| {
                let wx = 2.0 * PI * signed_freq(x, self.width) as f64 / self.width as f64;
                (wx.hypot(wy), wy.atan2(wx))
            })
        })
    }
}

fn crop_spectrum(src: &[Complex64], w: usize, h: usize, nw: usize, nh: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(nw * nh);
    for y in 0..nh {
        let sy = signed_freq(y, nh).rem_euclid(h as isize) as usize;
        for x in 0..nw {
            let sx = signed_freq(x, nw).rem_euclid(w as isize) as usize;
            out.push(src[sy * w + sx]);
        }
    }
    out
}

/// In-place unnormalized 2D FFT (rows, then columns).
fn fft2(planner: &mut FftPlanner<f64>, data: &mut [Complex64], w: usize, h: usize, dir: FftDirection) {
    let row = planner.plan_fft(w, dir);
    for chunk in data.chunks_exact_mut(w) {
        row.process(chunk);
    }
    let col = planner.plan_fft(h, dir);
    let mut column = vec![Complex64::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            column[y] = data[y * w + x];
        }
        col.process(&mut column);
        for y in 0..h {
            data[y * w + x] = column[y];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(w: usize, h: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..w * h).map(|_| rng.random_range(0.0..1.0)).collect()
    }

    fn max_abs_diff(a: &ComplexPyramid, b: &ComplexPyramid) -> f64 {
        a.bands()
            .iter()
            .zip(b.bands())
            .flat_map(|(x, y)| x.data.iter().zip(&y.data).map(|(p, q)| (p - q).norm()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn band_dimensions_halve_per_scale() {
        let cfg = PyramidConfig {
            n_scales: 3,
            n_orientations: 4,
        };
        let p = build_pyramid_from_samples(37, 50, &noise(37, 50, 1), &cfg).unwrap();
        assert_eq!(p.bands().len(), 12);
        for s in 0..3 {
            let b = p.band(s, 0).unwrap();
            assert_eq!((b.width, b.height), (37usize.div_ceil(1 << s), 50usize.div_ceil(1 << s)));
        }
    }

    #[test]
    fn band_indexing() {
        let img = GrayImage::from_fn(32, 32, |x, y| ((x ^ y) & 7) as f64 / 7.0).unwrap();
        let p = build_pyramid(&img, &PyramidConfig::default()).unwrap();
        assert!(std::ptr::eq(p.band(0, 0).unwrap(), &p.bands()[0]));
        assert!(std::ptr::eq(p.band(1, 5).unwrap(), &p.bands()[11]));
        assert!(matches!(p.band(2, 0), Err(Error::IndexOutOfRange(_))));
        assert!(p.band(0, 6).is_err());
    }

    #[test]
    fn constant_image_has_no_response() {
        let img = GrayImage::filled(48, 40, 0.5).unwrap();
        let p = build_pyramid(&img, &PyramidConfig::default()).unwrap();
        let max = p.bands().iter().flat_map(|b| &b.data).map(|c| c.norm()).fold(0.0, f64::max);
        assert!(max <= 1e-9, "max {max}");
    }

    #[test]
    fn dc_shift_invariance() {
        let x = noise(32, 32, 2);
        let shifted: Vec<f64> = x.iter().map(|v| v + 0.1).collect();
        let cfg = PyramidConfig::default();
        let a = build_pyramid_from_samples(32, 32, &x, &cfg).unwrap();
        let b = build_pyramid_from_samples(32, 32, &shifted, &cfg).unwrap();
        assert!(max_abs_diff(&a, &b) <= 1e-9);
    }

    #[test]
    fn circular_shift_moves_scale0_magnitudes() {
        let img = GrayImage::new(40, 36, noise(40, 36, 3)).unwrap();
        let shifted = img.circular_shift(8, 0);
        let cfg = PyramidConfig::default();
        let a = build_pyramid(&img, &cfg).unwrap();
        let b = build_pyramid(&shifted, &cfg).unwrap();
        for k in 0..cfg.n_orientations {
            let ba = a.band(0, k).unwrap();
            let bb = b.band(0, k).unwrap();
            for y in 0..ba.height {
                for x in 0..ba.width {
                    let moved = bb.get((x + 8) % ba.width, y).norm();
                    assert!((moved - ba.get(x, y).norm()).abs() <= 1e-6);
                }
            }
        }
    }

    #[test]
    fn coefficients_are_complex() {
        let img = GrayImage::new(32, 32, noise(32, 32, 4)).unwrap();
        let p = build_pyramid(&img, &PyramidConfig::default()).unwrap();
        let im: f64 = p.bands()[0].data.iter().map(|c| c.im.abs()).sum();
        let re: f64 = p.bands()[0].data.iter().map(|c| c.re.abs()).sum();
        assert!(im > 0.1 * re && re > 0.1 * im);
    }

    #[test]
    fn too_small_for_depth() {
        let cfg = PyramidConfig {
            n_scales: 3,
            n_orientations: 4,
        };
        assert_eq!(cfg.min_side(), 32);
        let err = build_pyramid_from_samples(31, 40, &noise(31, 40, 5), &cfg).unwrap_err();
        assert!(matches!(err, Error::ImageTooSmall { .. }));
    }

    #[test]
    fn invalid_config() {
        let bad = PyramidConfig {
            n_scales: 0,
            n_orientations: 4,
        };
        assert!(bad.validate().is_err());
        let bad = PyramidConfig {
            n_scales: 1,
            n_orientations: 1,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn filter_windows_are_power_complementary() {
        for i in 0..200 {
            let rho = i as f64 * PI / 150.0;
            let l = lowpass(rho);
            let h = highpass(rho);
            assert!((l * l + h * h - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        let x = noise(32, 32, 6);
        let cfg = PyramidConfig::default();
        let a = build_pyramid_from_samples(32, 32, &x, &cfg).unwrap();
        let b = build_pyramid_from_samples(32, 32, &x, &cfg).unwrap();
        assert_eq!(a, b);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]
            #[test]
            fn linearity(seed_x in 0u64..1000, seed_y in 1000u64..2000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
                let (w, h) = (32, 24);
                let cfg = PyramidConfig::default();
                let x = noise(w, h, seed_x);
                let y = noise(w, h, seed_y);
                let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
                let px = build_pyramid_from_samples(w, h, &x, &cfg).unwrap();
                let py = build_pyramid_from_samples(w, h, &y, &cfg).unwrap();
                let pm = build_pyramid_from_samples(w, h, &mix, &cfg).unwrap();
                for ((bm, bx), by) in pm.bands().iter().zip(px.bands()).zip(py.bands()) {
                    for ((m, u), v) in bm.data.iter().zip(&bx.data).zip(&by.data) {
                        prop_assert!((m - (u * a + v * b)).norm() <= 1e-9);
                    }
                }
            }
        }
    }
}
