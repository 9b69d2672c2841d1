//! Geometric CW-SSIM manifold distance and k-medoids clustering for visual
//! object categorization.
//!
//! The pipeline: images ([`data`]) are decomposed into complex subbands
//! ([`wavelet`]), compared with the CW-SSIM index ([`cwssim`]), turned into
//! geodesic distances over a t-nearest-neighbor graph ([`manifold`]), grouped
//! by restarted k-medoids ([`cluster`]) and scored against true categories
//! ([`eval`]).

pub mod benchmark;
pub mod cluster;
pub mod cwssim;
pub mod data;
mod error;
pub mod eval;
pub mod heatmap;
pub mod io;
pub mod manifold;
pub mod wavelet;

pub use error::{Error, Result};
