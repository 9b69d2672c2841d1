//! Grayscale rendering of a distance matrix: pixel `(i, j)` is
//! `min(1, scale * d[i][j] / max(d))`, so zero is black and the largest
//! distance is white at `scale = 1`.

use std::path::Path;

use crate::data::write_pgm_bytes;
use crate::error::{Error, Result};
use crate::manifold::DistanceMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    n: usize,
    values: Vec<f64>,
}

impl Heatmap {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Normalized intensities in `[0, 1]`, row-major.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// 8-bit pixels; intensity 1.0 maps to exactly 255.
    pub fn to_u8(&self) -> Vec<u8> {
        self.values.iter().map(|v| (v * 255.0).round() as u8).collect()
    }

    /// Writes PNG for a `.png` extension and binary PGM otherwise.
    pub fn save(&self, path: &Path) -> Result<()> {
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png {
            let side = u32::try_from(self.n).map_err(|_| Error::invalid("matrix too large for an image"))?;
            image::save_buffer(path, &self.to_u8(), side, side, image::ExtendedColorType::L8)
                .map_err(|e| Error::Decode {
                    path: path.to_path_buf(),
                    message: e.to_string(),
                })
        } else {
            write_pgm_bytes(path, self.n, self.n, &self.to_u8())
        }
    }
}

pub fn heatmap(d: &DistanceMatrix, scale: f64) -> Result<Heatmap> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::invalid(format!("scale must be positive, got {scale}")));
    }
    let max = d.max();
    if max <= 0.0 {
        return Err(Error::invalid("all-zero matrix has no contrast to render"));
    }
    let values = d
        .values()
        .iter()
        .map(|&v| if v == max { 1.0 } else { (scale * v / max).min(1.0) })
        .collect();
    Ok(Heatmap { n: d.n(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::DistanceKind;

    fn uniform(n: usize, v: f64) -> DistanceMatrix {
        let values = (0..n * n).map(|k| if k / n == k % n { 0.0 } else { v }).collect();
        DistanceMatrix::new(n, values, DistanceKind::L2).unwrap()
    }

    #[test]
    fn uniform_off_diagonal_is_white_with_black_diagonal() {
        let h = heatmap(&uniform(4, 0.3), 1.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(h.get(i, j), if i == j { 0.0 } else { 1.0 });
            }
        }
        assert_eq!(*h.to_u8().iter().max().unwrap(), 255);
    }

    #[test]
    fn scale_clamps_at_one() {
        let d = DistanceMatrix::new(3, vec![0.0, 0.01, 1.0, 0.01, 0.0, 0.5, 1.0, 0.5, 0.0], DistanceKind::L2).unwrap();
        let h = heatmap(&d, 50.0).unwrap();
        assert_eq!(h.get(0, 1), 0.5);
        assert_eq!(h.get(1, 2), 1.0);
        assert_eq!(h.get(0, 0), 0.0);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(heatmap(&uniform(3, 0.0), 1.0).is_err());
        assert!(heatmap(&uniform(3, 1.0), 0.0).is_err());
        assert!(heatmap(&uniform(3, 1.0), f64::NAN).is_err());
    }

    #[test]
    fn saves_pgm_and_png() {
        let dir = tempfile::tempdir().unwrap();
        let h = heatmap(&uniform(5, 2.0), 1.0).unwrap();
        let pgm = dir.path().join("h.pgm");
        let png = dir.path().join("h.png");
        h.save(&pgm).unwrap();
        h.save(&png).unwrap();
        for p in [pgm, png] {
            let img = image::open(&p).unwrap().to_luma8();
            assert_eq!(img.dimensions(), (5, 5));
            assert_eq!(img.get_pixel(0, 0).0[0], 0);
            assert_eq!(img.get_pixel(1, 0).0[0], 255);
        }
    }
}
