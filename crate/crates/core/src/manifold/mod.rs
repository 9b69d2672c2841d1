//! Pairwise distance matrices and their geodesic (manifold) versions.
//!
//! Four measures are produced: raw L2, CW-SSIM distance `1 - S`, and the
//! shortest-path distances over a t-nn graph built on either of them
//! (geodesic L2 and GCW-SSIM).

mod graph;
mod matrix;

use rayon::prelude::*;

pub use self::graph::{
    all_pairs_geodesic, dijkstra, geodesic_matrix, knn_graph, knn_graph_with, GraphOptions, NeighborGraph,
    Symmetrization,
};
pub use self::matrix::{DistanceKind, DistanceMatrix};
use crate::cwssim::{cwssim_from_features, CwSsimConfig, CwSsimFeatures};
use crate::data::{GrayImage, LabeledDataset};
use crate::error::{Error, Result};

/// Euclidean distance between two equally long pixel vectors.
pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn pairwise_l2(ds: &LabeledDataset) -> Result<DistanceMatrix> {
    pairwise_l2_images(ds.images())
}

pub fn pairwise_l2_images(images: &[GrayImage]) -> Result<DistanceMatrix> {
    check_uniform(images)?;
    let n = images.len();
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| l2_distance(images[i].pixels(), images[j].pixels()))
                .collect()
        })
        .collect();
    Ok(DistanceMatrix::from_upper(n, DistanceKind::L2, rows))
}

/// CW-SSIM distance matrix. Each image's pyramid is built once and shared by
/// all of its pairs.
pub fn pairwise_cwssim(ds: &LabeledDataset, cfg: &CwSsimConfig) -> Result<DistanceMatrix> {
    pairwise_cwssim_images(ds.images(), cfg)
}

pub fn pairwise_cwssim_images(images: &[GrayImage], cfg: &CwSsimConfig) -> Result<DistanceMatrix> {
    check_uniform(images)?;
    cfg.validate()?;
    let features = images
        .par_iter()
        .map(|img| CwSsimFeatures::new(img, cfg))
        .collect::<Result<Vec<_>>>()?;
    let n = images.len();
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| cwssim_from_features(&features[i], &features[j], cfg).map(|s| (1.0 - s).max(0.0)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceMatrix::from_upper(n, DistanceKind::CwSsim, rows))
}

/// GCW-SSIM: CW-SSIM distances → t-nn graph → all-pairs shortest paths.
pub fn gcwssim_matrix(
    ds: &LabeledDataset,
    t: usize,
    cfg: &CwSsimConfig,
    opts: &GraphOptions,
) -> Result<DistanceMatrix> {
    geodesic_matrix(&pairwise_cwssim(ds, cfg)?, t, opts)
}

/// Geodesic distance seeded with L2.
pub fn geodesic_l2_matrix(ds: &LabeledDataset, t: usize, opts: &GraphOptions) -> Result<DistanceMatrix> {
    geodesic_matrix(&pairwise_l2(ds)?, t, opts)
}

/// Computes the matrix for any of the four measures.
pub fn distance_matrix(
    ds: &LabeledDataset,
    kind: DistanceKind,
    t: usize,
    cfg: &CwSsimConfig,
    opts: &GraphOptions,
) -> Result<DistanceMatrix> {
    match kind {
        DistanceKind::L2 => pairwise_l2(ds),
        DistanceKind::CwSsim => pairwise_cwssim(ds, cfg),
        DistanceKind::GeoL2 => geodesic_l2_matrix(ds, t, opts),
        DistanceKind::GcwSsim => gcwssim_matrix(ds, t, cfg, opts),
    }
}

fn check_uniform(images: &[GrayImage]) -> Result<()> {
    if images.is_empty() {
        return Err(Error::Dataset("no images".into()));
    }
    if images.iter().any(|im| !im.same_size(&images[0])) {
        return Err(Error::Dataset("mixed image sizes".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_rotated_set;

    #[test]
    fn l2_on_single_pixels() {
        assert_eq!(l2_distance(&[0.0], &[1.0]), 1.0);
        assert_eq!(l2_distance(&[0.25; 4], &[0.75; 4]), 1.0);
    }

    #[test]
    fn l2_matrix_on_images() {
        let a = GrayImage::filled(16, 16, 0.25).unwrap();
        let b = GrayImage::filled(16, 16, 0.75).unwrap();
        let d = pairwise_l2_images(&[a.clone(), b, a]).unwrap();
        assert_eq!(d.get(0, 0), 0.0);
        assert!((d.get(0, 1) - 8.0).abs() < 1e-12);
        assert_eq!(d.get(0, 2), 0.0);
        assert_eq!(d.kind(), DistanceKind::L2);
    }

    #[test]
    fn mixed_sizes_rejected() {
        let a = GrayImage::filled(16, 16, 0.25).unwrap();
        let b = GrayImage::filled(17, 16, 0.75).unwrap();
        assert!(pairwise_l2_images(&[a, b]).is_err());
    }

    #[test]
    fn cwssim_matrix_invariants() {
        let ds = synth_rotated_set(2, 4, 32, 1).unwrap();
        let d = pairwise_cwssim(&ds, &CwSsimConfig::default()).unwrap();
        for i in 0..d.n() {
            assert!(d.get(i, i).abs() < 1e-9);
            for j in 0..d.n() {
                assert_eq!(d.get(i, j), d.get(j, i));
                assert!(d.get(i, j) >= 0.0 && d.get(i, j) < 1.0);
            }
        }
        // agrees with the one-pair entry point
        let direct = crate::cwssim::cwssim_distance(&ds.images()[0], &ds.images()[5], &CwSsimConfig::default()).unwrap();
        assert_eq!(d.get(0, 5), direct);
    }

    #[test]
    fn geodesic_never_exceeds_edge_weight() {
        let ds = synth_rotated_set(1, 36, 32, 4).unwrap();
        let cfg = CwSsimConfig::default();
        let base = pairwise_cwssim(&ds, &cfg).unwrap();
        let g = knn_graph(&base, 2).unwrap();
        let geo = all_pairs_geodesic(&g).unwrap();
        assert_eq!(geo.kind(), DistanceKind::GcwSsim);
        for (i, j, w) in g.edges() {
            assert!(geo.get(i, j) <= w);
        }
        assert!(geo.triangle_violation(1e-9).is_none());
    }
}
