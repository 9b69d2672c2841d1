//! Benchmark suites: every subset of a dataset clustered with each of the four
//! measures, scored and written as a comma-separated table.
//!
//! Base matrices (L2 and CW-SSIM) are computed once on the full dataset and
//! sliced per subset. Geodesic matrices are rebuilt per subset because the
//! neighbor graph depends on which points are present.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cluster::kmedoids_restarts_with_stats;
use crate::cwssim::CwSsimConfig;
use crate::data::{load_dataset, synth_rotated_set, LabeledDataset};
use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::manifold::{geodesic_matrix, pairwise_cwssim, pairwise_l2, DistanceKind, DistanceMatrix, GraphOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    CoilSets,
    LargeCoilSets,
    OlivettiSets,
    Synthetic,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::CoilSets, Suite::LargeCoilSets, Suite::OlivettiSets, Suite::Synthetic];

    pub fn name(self) -> &'static str {
        match self {
            Suite::CoilSets => "coil-sets",
            Suite::LargeCoilSets => "large-coil-sets",
            Suite::OlivettiSets => "olivetti-sets",
            Suite::Synthetic => "synthetic",
        }
    }

    /// Named subsets as lists of class numbers (object or face ids).
    pub fn subsets(self, synth_objects: usize) -> Vec<Subset> {
        let range = |lo: u64, hi: u64, step: usize| (lo..=hi).step_by(step).collect::<Vec<u64>>();
        let union = |a: &[u64], b: &[u64]| {
            let mut u: Vec<u64> = a.iter().chain(b).copied().collect();
            u.sort_unstable();
            u.dedup();
            u
        };
        match self {
            Suite::CoilSets => vec![
                Subset::new("Coil-5", vec![1, 3, 5, 7, 9]),
                Subset::new("Coil-10", range(2, 20, 2)),
                Subset::new(
                    "Coil-15",
                    range(1, 20, 1).into_iter().filter(|o| ![3, 7, 11, 15, 19].contains(o)).collect(),
                ),
                Subset::new("Coil-20", range(1, 20, 1)),
            ],
            Suite::LargeCoilSets => {
                let c25 = range(1, 97, 4);
                let c50 = range(2, 100, 2);
                vec![
                    Subset::new("Coil-25", c25.clone()),
                    Subset::new("Coil-50", c50.clone()),
                    Subset::new("Coil-75", union(&c25, &c50)),
                    Subset::new("Coil-100", range(1, 100, 1)),
                ]
            }
            Suite::OlivettiSets => {
                let o10 = range(2, 38, 4);
                let o20 = range(1, 39, 2);
                vec![
                    Subset::new("Oliv.-10", o10.clone()),
                    Subset::new("Oliv.-20", o20.clone()),
                    Subset::new("Oliv.-30", union(&o10, &o20)),
                    Subset::new("Oliv.-40", range(1, 40, 1)),
                ]
            }
            Suite::Synthetic => vec![Subset::new(
                &format!("Synth-{synth_objects}"),
                range(1, synth_objects as u64, 1),
            )],
        }
    }

    fn layout_hint(self) -> &'static str {
        match self {
            Suite::CoilSets => "a COIL-20 directory: files obj<N>__<angle>.png directly under it, or one subdirectory per object",
            Suite::LargeCoilSets => "a COIL-100 directory: files obj<N>__<angle>.png directly under it, or one subdirectory per object",
            Suite::OlivettiSets => "an Olivetti directory with subdirectories s1 .. s40, one per person",
            Suite::Synthetic => "nothing (generated in memory)",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subset {
    pub name: String,
    pub classes: Vec<u64>,
}

impl Subset {
    fn new(name: &str, classes: Vec<u64>) -> Self {
        Self {
            name: name.to_string(),
            classes,
        }
    }
}

/// Size of the generated set for the synthetic suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthParams {
    pub objects: usize,
    pub angles: usize,
    pub size: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            objects: 5,
            angles: 72,
            size: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub t: usize,
    pub n_restarts: usize,
    pub seed: u64,
    pub cwssim: CwSsimConfig,
    pub graph: GraphOptions,
    pub synth: SynthParams,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            t: 5,
            n_restarts: 50,
            seed: 0,
            cwssim: CwSsimConfig {
                stride: 2,
                ..CwSsimConfig::default()
            },
            graph: GraphOptions {
                bridge: true,
                ..GraphOptions::default()
            },
            synth: SynthParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub subset: String,
    pub n: usize,
    pub k: usize,
    pub measure: DistanceKind,
    pub r_e: f64,
    pub r_t: f64,
    pub r_f: f64,
    pub objective: f64,
    pub cap_hits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub suite: Suite,
    pub dataset: String,
    pub config: BenchmarkConfig,
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkTable {
    pub fn row(&self, subset: &str, measure: DistanceKind) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.subset == subset && r.measure == measure)
    }

    /// `#`-prefixed parameter header, then one line per subset and measure
    /// with the criteria at one decimal.
    pub fn to_csv(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "# suite={} dataset={}", self.suite, self.dataset);
        let _ = writeln!(
            out,
            "# t={} K={} window={} stride={} scales={} orientations={} n_restarts={} seed={} bridge={} symmetrization={:?}",
            c.t,
            c.cwssim.k,
            c.cwssim.window,
            c.cwssim.stride,
            c.cwssim.pyramid.n_scales,
            c.cwssim.pyramid.n_orientations,
            c.n_restarts,
            c.seed,
            c.graph.bridge,
            c.graph.symmetrization,
        );
        if self.suite == Suite::Synthetic {
            let _ = writeln!(
                out,
                "# synth_objects={} synth_angles={} synth_size={}",
                c.synth.objects, c.synth.angles, c.synth.size
            );
        }
        out.push_str("subset,n,k,measure,r_e,r_t,r_f,cap_hits\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.1},{:.1},{:.1},{}",
                r.subset,
                r.n,
                r.k,
                r.measure.short_label(),
                r.r_e,
                r.r_t,
                r.r_f,
                r.cap_hits
            );
        }
        out
    }
}

/// Runs a suite. `root` is required for every suite except `synthetic`.
pub fn run_benchmark(suite: Suite, root: Option<&Path>, cfg: &BenchmarkConfig) -> Result<BenchmarkTable> {
    cfg.cwssim.validate()?;
    if cfg.t < 1 || cfg.n_restarts < 1 {
        return Err(Error::invalid("t and n_restarts must be at least 1"));
    }
    let (ds, dataset) = match (suite, root) {
        (Suite::Synthetic, _) => {
            let s = cfg.synth;
            (
                synth_rotated_set(s.objects, s.angles, s.size, cfg.seed)?,
                format!("synthetic({}x{}, {}px, seed {})", s.objects, s.angles, s.size, cfg.seed),
            )
        }
        (_, None) => {
            return Err(Error::Dataset(format!(
                "suite {suite} needs a dataset directory: {}",
                suite.layout_hint()
            )))
        }
        (_, Some(root)) => (
            load_dataset(root, None).map_err(|e| {
                Error::Dataset(format!("{e}; suite {suite} expects {}", suite.layout_hint()))
            })?,
            root.display().to_string(),
        ),
    };
    let subsets = suite.subsets(cfg.synth.objects);
    let indices = subsets
        .iter()
        .map(|s| {
            ds.indices_for_class_numbers(&s.classes).map_err(|e| {
                Error::Dataset(format!("{}: {e}; suite {suite} expects {}", s.name, suite.layout_hint()))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = run_subsets(&ds, &subsets, &indices, cfg)?;
    Ok(BenchmarkTable {
        suite,
        dataset,
        config: cfg.clone(),
        rows,
    })
}

fn run_subsets(
    ds: &LabeledDataset,
    subsets: &[Subset],
    indices: &[Vec<usize>],
    cfg: &BenchmarkConfig,
) -> Result<Vec<BenchmarkRow>> {
    log::info!("computing L2 distances for {} images", ds.len());
    let l2 = pairwise_l2(ds)?;
    log::info!("computing CW-SSIM distances for {} images", ds.len());
    let cw = pairwise_cwssim(ds, &cfg.cwssim)?;
    let mut rows = Vec::new();
    for (subset, idx) in subsets.iter().zip(indices) {
        let truth: Vec<usize> = idx.iter().map(|&i| ds.labels()[i]).collect();
        let k = subset.classes.len();
        let base_l2 = l2.submatrix(idx)?;
        let base_cw = cw.submatrix(idx)?;
        let geo_l2 = geodesic_matrix(&base_l2, cfg.t, &cfg.graph)?;
        let geo_cw = geodesic_matrix(&base_cw, cfg.t, &cfg.graph)?;
        for d in [&base_l2, &base_cw, &geo_l2, &geo_cw] {
            log::info!("{}: clustering n = {} with {}", subset.name, d.n(), d.kind());
            rows.push(score(&subset.name, d, &truth, k, cfg)?);
        }
    }
    Ok(rows)
}

fn score(name: &str, d: &DistanceMatrix, truth: &[usize], k: usize, cfg: &BenchmarkConfig) -> Result<BenchmarkRow> {
    let (best, stats) = kmedoids_restarts_with_stats(d, k, cfg.n_restarts, cfg.seed)?;
    let report = evaluate(&best.assignments, truth)?;
    Ok(BenchmarkRow {
        subset: name.to_string(),
        n: d.n(),
        k,
        measure: d.kind(),
        r_e: report.r_e,
        r_t: report.r_t,
        r_f: report.r_f,
        objective: best.objective,
        cap_hits: stats.cap_hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_definitions() {
        let coil = Suite::CoilSets.subsets(0);
        assert_eq!(coil[0].classes, vec![1, 3, 5, 7, 9]);
        assert_eq!(coil[1].classes, vec![2, 4, 6, 8, 10, 12, 14, 16, 18, 20]);
        assert_eq!(coil[2].classes, vec![1, 2, 4, 5, 6, 8, 9, 10, 12, 13, 14, 16, 17, 18, 20]);
        assert_eq!(coil[3].classes.len(), 20);

        let large = Suite::LargeCoilSets.subsets(0);
        assert_eq!(large[0].classes.len(), 25);
        assert_eq!(large[0].classes.last(), Some(&97));
        assert_eq!(large[1].classes.len(), 50);
        assert_eq!(large[2].classes.len(), 75);
        assert_eq!(large[3].classes.len(), 100);

        let oliv = Suite::OlivettiSets.subsets(0);
        assert_eq!(oliv[0].classes, vec![2, 6, 10, 14, 18, 22, 26, 30, 34, 38]);
        assert_eq!(oliv[1].classes.len(), 20);
        assert!(oliv[1].classes.iter().all(|c| c % 2 == 1));
        assert_eq!(oliv[2].classes.len(), 30);
        assert_eq!(oliv[3].classes.len(), 40);

        assert_eq!(Suite::Synthetic.subsets(3)[0].classes, vec![1, 2, 3]);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("coil".parse::<Suite>().is_err());
    }

    #[test]
    fn missing_root_is_a_dataset_error() {
        let err = run_benchmark(Suite::CoilSets, None, &BenchmarkConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Dataset(ref m) if m.contains("COIL-20")));
    }

    #[test]
    fn small_synthetic_run() {
        let cfg = BenchmarkConfig {
            n_restarts: 5,
            synth: SynthParams {
                objects: 2,
                angles: 12,
                size: 32,
            },
            ..Default::default()
        };
        let table = run_benchmark(Suite::Synthetic, None, &cfg).unwrap();
        assert_eq!(table.rows.len(), 4);
        let csv = table.to_csv();
        assert!(csv.contains("# t=5 K=0.01 window=7 stride=2"));
        assert!(csv.contains("n_restarts=5"));
        assert!(csv.lines().any(|l| l.starts_with("Synth-2,24,2,GC,")));
        assert_eq!(run_benchmark(Suite::Synthetic, None, &cfg).unwrap().to_csv(), csv);
    }
}
