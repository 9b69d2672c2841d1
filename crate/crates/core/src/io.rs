//! File formats: GDM1 binary distance matrices, their comma-separated text
//! export, and JSON reports.
//!
//! GDM1 layout: magic `GDM1`, `n` as u64 little-endian, one kind tag byte,
//! then `n * n` f64 little-endian values in row-major order.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cluster::{ClusteringResult, RestartStats};
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::manifold::{DistanceKind, DistanceMatrix};

pub const GDM1_MAGIC: &[u8; 4] = b"GDM1";
const HEADER_LEN: usize = 4 + 8 + 1;

pub fn encode_gdm1(d: &DistanceMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * d.values().len());
    out.extend_from_slice(GDM1_MAGIC);
    out.extend_from_slice(&(d.n() as u64).to_le_bytes());
    out.push(d.kind().tag());
    for v in d.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_gdm1(bytes: &[u8]) -> Result<DistanceMatrix> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != GDM1_MAGIC {
        return Err(Error::MalformedMatrix("missing GDM1 header".into()));
    }
    let n = u64::from_le_bytes(bytes[4..12].try_into().expect("8 bytes"));
    let kind = DistanceKind::from_tag(bytes[12])
        .ok_or_else(|| Error::MalformedMatrix(format!("unknown kind tag {}", bytes[12])))?;
    let expected = usize::try_from(n)
        .ok()
        .and_then(|n| n.checked_mul(n))
        .and_then(|nn| nn.checked_mul(8))
        .ok_or_else(|| Error::MalformedMatrix(format!("n = {n} is too large")))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != expected {
        return Err(Error::MalformedMatrix(format!(
            "expected {expected} payload bytes for n = {n}, found {}",
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    DistanceMatrix::new(n as usize, values, kind).map_err(|e| Error::MalformedMatrix(e.to_string()))
}

pub fn write_gdm1(path: &Path, d: &DistanceMatrix) -> Result<()> {
    fs::write(path, encode_gdm1(d)).map_err(|e| Error::io(path, e))
}

pub fn read_gdm1(path: &Path) -> Result<DistanceMatrix> {
    decode_gdm1(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// One comma-separated row per matrix row. `{}` formatting of f64 is the
/// shortest representation that parses back to the same value.
pub fn matrix_to_text(d: &DistanceMatrix) -> String {
    let mut out = String::new();
    for i in 0..d.n() {
        let row: Vec<String> = d.row(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses a text export. The kind is not stored in the text form.
pub fn matrix_from_text(text: &str, kind: DistanceKind) -> Result<DistanceMatrix> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::MalformedMatrix(format!("row {i}: cannot parse `{}`", s.trim())))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::MalformedMatrix(format!("row {i} has {} values, expected {n}", r.len())));
    }
    DistanceMatrix::new(n, rows.concat(), kind).map_err(|e| Error::MalformedMatrix(e.to_string()))
}

pub fn write_text(path: &Path, d: &DistanceMatrix) -> Result<()> {
    fs::write(path, matrix_to_text(d)).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path, kind: DistanceKind) -> Result<DistanceMatrix> {
    matrix_from_text(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?, kind)
}

/// Reads either format, picking by the magic bytes.
pub fn read_matrix(path: &Path, text_kind: DistanceKind) -> Result<DistanceMatrix> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(GDM1_MAGIC) {
        decode_gdm1(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| Error::MalformedMatrix("neither GDM1 nor text".into()))?;
        matrix_from_text(&text, text_kind)
    }
}

/// Parameters that produced a distance matrix; stored next to it as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixParams {
    pub kind: DistanceKind,
    pub n: usize,
    pub dataset: String,
    pub t: Option<usize>,
    pub k_const: f64,
    pub window: usize,
    pub stride: usize,
    pub scales: usize,
    pub orientations: usize,
    pub bridge: bool,
    pub mutual: bool,
}

/// Output of a clustering run with everything needed to repeat it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub matrix: String,
    pub measure: DistanceKind,
    pub n: usize,
    pub k: usize,
    pub n_restarts: usize,
    pub seed: u64,
    /// Parameters of the matrix, when its sidecar file was found.
    #[serde(default)]
    pub matrix_params: Option<MatrixParams>,
    pub result: ClusteringResult,
    pub restarts: RestartStats,
}

/// Saved output of an evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub report: String,
    pub dataset: String,
    pub eval: EvalReport,
}

/// Location of the JSON parameter sidecar of a matrix file: `<file>.json`.
pub fn sidecar_path(matrix: &Path) -> PathBuf {
    let mut name = matrix.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

impl ClusterReport {
    pub fn validate(&self) -> Result<()> {
        let r = &self.result;
        if r.assignments.len() != self.n || r.medoids.len() != self.k {
            return Err(Error::MalformedReport("size fields disagree with the result".into()));
        }
        if r.assignments.iter().any(|&a| a >= self.k) || r.medoids.iter().any(|&m| m >= self.n) {
            return Err(Error::MalformedReport("index out of range in the result".into()));
        }
        Ok(())
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::MalformedReport(format!("{}: {e}", path.display())))
}

pub fn read_cluster_report(path: &Path) -> Result<ClusterReport> {
    let r: ClusterReport = read_json(path)?;
    r.validate()?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DistanceMatrix {
        DistanceMatrix::new(
            3,
            vec![0.0, 0.1, 1.0 / 3.0, 0.1, 0.0, 2.5e-17, 1.0 / 3.0, 2.5e-17, 0.0],
            DistanceKind::GcwSsim,
        )
        .unwrap()
    }

    #[test]
    fn gdm1_layout() {
        let bytes = encode_gdm1(&sample());
        assert_eq!(&bytes[..4], b"GDM1");
        assert_eq!(&bytes[4..12], &3u64.to_le_bytes());
        assert_eq!(bytes[12], 3);
        assert_eq!(bytes.len(), 13 + 72);
        assert_eq!(&bytes[13 + 8..13 + 16], &0.1f64.to_le_bytes());
    }

    #[test]
    fn gdm1_round_trip_is_exact() {
        let d = sample();
        assert_eq!(decode_gdm1(&encode_gdm1(&d)).unwrap(), d);
    }

    #[test]
    fn gdm1_rejects_damage() {
        let good = encode_gdm1(&sample());
        assert!(decode_gdm1(&good[..20]).is_err());
        assert!(decode_gdm1(b"GDM2xxxxxxxxxxxx").is_err());
        let mut bad_tag = good.clone();
        bad_tag[12] = 7;
        assert!(decode_gdm1(&bad_tag).is_err());
        let mut asym = good.clone();
        asym[13 + 8] ^= 1;
        assert!(matches!(decode_gdm1(&asym), Err(Error::MalformedMatrix(_))));
        let mut huge = good;
        huge[4..12].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode_gdm1(&huge).is_err());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let d = sample();
        let text = matrix_to_text(&d);
        assert_eq!(text.lines().next().unwrap(), "0,0.1,0.3333333333333333");
        assert_eq!(matrix_from_text(&text, DistanceKind::GcwSsim).unwrap(), d);
        assert!(matrix_from_text("0,1\n1\n", DistanceKind::L2).is_err());
        assert!(matrix_from_text("0,x\n1,0\n", DistanceKind::L2).is_err());
    }

    #[test]
    fn files_and_format_detection() {
        let dir = tempfile::tempdir().unwrap();
        let d = sample();
        let bin = dir.path().join("m.gdm");
        let txt = dir.path().join("m.csv");
        write_gdm1(&bin, &d).unwrap();
        write_text(&txt, &d).unwrap();
        assert_eq!(read_matrix(&bin, DistanceKind::L2).unwrap(), d);
        assert_eq!(read_matrix(&txt, DistanceKind::GcwSsim).unwrap(), d);
        assert!(matches!(read_gdm1(&dir.path().join("none")), Err(Error::Io { .. })));
        assert_eq!(sidecar_path(&bin), dir.path().join("m.gdm.json"));
    }
}
