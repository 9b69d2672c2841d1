use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which measure produced a [`DistanceMatrix`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceKind {
    L2,
    CwSsim,
    GeoL2,
    GcwSsim,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 4] = [
        DistanceKind::L2,
        DistanceKind::CwSsim,
        DistanceKind::GeoL2,
        DistanceKind::GcwSsim,
    ];

    /// Tag byte used by the binary matrix format.
    pub fn tag(self) -> u8 {
        match self {
            DistanceKind::L2 => 0,
            DistanceKind::CwSsim => 1,
            DistanceKind::GeoL2 => 2,
            DistanceKind::GcwSsim => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::L2 => "l2",
            DistanceKind::CwSsim => "cwssim",
            DistanceKind::GeoL2 => "geo-l2",
            DistanceKind::GcwSsim => "gcwssim",
        }
    }

    /// Short column label used in result tables (`L2`, `C`, `G`, `GC`).
    pub fn short_label(self) -> &'static str {
        match self {
            DistanceKind::L2 => "L2",
            DistanceKind::CwSsim => "C",
            DistanceKind::GeoL2 => "G",
            DistanceKind::GcwSsim => "GC",
        }
    }

    pub fn is_geodesic(self) -> bool {
        matches!(self, DistanceKind::GeoL2 | DistanceKind::GcwSsim)
    }

    /// Geodesic counterpart of a base measure.
    pub fn geodesic_of(self) -> Self {
        match self {
            DistanceKind::L2 | DistanceKind::GeoL2 => DistanceKind::GeoL2,
            DistanceKind::CwSsim | DistanceKind::GcwSsim => DistanceKind::GcwSsim,
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(DistanceKind::L2),
            "cwssim" | "cw-ssim" | "c" => Ok(DistanceKind::CwSsim),
            "geo-l2" | "geo_l2" | "g" => Ok(DistanceKind::GeoL2),
            "gcwssim" | "gcw-ssim" | "gc" => Ok(DistanceKind::GcwSsim),
            other => Err(Error::invalid(format!("unknown measure `{other}`"))),
        }
    }
}

/// Square, symmetric, non-negative matrix with a zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
    kind: DistanceKind,
}

impl DistanceMatrix {
    /// Validates the matrix invariants; symmetry must hold exactly.
    pub fn new(n: usize, values: Vec<f64>, kind: DistanceKind) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {n}x{n} matrix",
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::invalid(format!("diagonal entry {i} is {}", values[i * n + i])));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::invalid(format!("entry ({i}, {j}) = {v} is not a finite distance")));
                }
                if v != values[j * n + i] {
                    return Err(Error::invalid(format!("entries ({i}, {j}) and ({j}, {i}) differ")));
                }
            }
        }
        Ok(Self { n, values, kind })
    }

    /// Builds a matrix from an upper-triangle generator `f(i, j)` for `i < j`.
    pub(crate) fn from_upper(n: usize, kind: DistanceKind, rows: Vec<Vec<f64>>) -> Self {
        let mut values = vec![0.0; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self { n, values, kind }
    }

    pub(crate) fn from_parts_unchecked(n: usize, values: Vec<f64>, kind: DistanceKind) -> Self {
        Self { n, values, kind }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// The matrix restricted to `indices` (in the given order).
    pub fn submatrix(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n) {
            return Err(Error::IndexOutOfRange(format!("{bad} in a {}-point matrix", self.n)));
        }
        let m = indices.len();
        let mut values = Vec::with_capacity(m * m);
        for &i in indices {
            for &j in indices {
                values.push(self.get(i, j));
            }
        }
        Ok(Self {
            n: m,
            values,
            kind: self.kind,
        })
    }

    /// First `(i, j, k)` with `d[i][j] > d[i][k] + d[k][j] + slack`, if any.
    pub fn triangle_violation(&self, slack: f64) -> Option<(usize, usize, usize)> {
        let n = self.n;
        for i in 0..n {
            for k in 0..n {
                let dik = self.get(i, k);
                let rk = self.row(k);
                let ri = self.row(i);
                for j in 0..n {
                    if ri[j] > dik + rk[j] + slack {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }
}
