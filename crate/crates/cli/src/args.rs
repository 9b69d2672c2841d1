use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use gcwssim::manifold::DistanceKind;

#[derive(Debug, Parser)]
#[command(name = "gcwssim", version, about = "Geometric CW-SSIM distances and k-medoids clustering")]
pub struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Only log warnings and errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a pairwise distance matrix and save it as GDM1.
    Distances(DistancesArgs),
    /// Run restarted k-medoids on a saved matrix.
    Cluster(ClusterArgs),
    /// Score a clustering report against the dataset's categories.
    Eval(EvalArgs),
    /// Run a benchmark suite over all four measures.
    Benchmark(BenchmarkArgs),
    /// Render a matrix as a grayscale image.
    Heatmap(HeatmapArgs),
    /// Write a synthetic rotated-object dataset as PGM files.
    Synth(SynthArgs),
}

/// Size of a generated dataset, written `OBJECTS:ANGLES:SIZE`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthSpec {
    pub objects: usize,
    pub angles: usize,
    pub size: usize,
}

impl FromStr for SynthSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [o, a, z] = parts.as_slice() else {
            return Err(format!("expected OBJECTS:ANGLES:SIZE, got `{s}`"));
        };
        let num = |v: &str| v.parse::<usize>().map_err(|_| format!("`{v}` is not a count"));
        Ok(SynthSpec {
            objects: num(o)?,
            angles: num(a)?,
            size: num(z)?,
        })
    }
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Image directory: COIL-style `obj<N>__<i>` files, or one subdirectory per class.
    #[arg(long, value_name = "DIR", conflicts_with = "synth")]
    pub data: Option<PathBuf>,

    /// `relative_path,label` lines listing the images under --data.
    #[arg(long, value_name = "FILE", requires = "data")]
    pub manifest: Option<PathBuf>,

    /// Use a generated set instead of --data.
    #[arg(long, value_name = "OBJECTS:ANGLES:SIZE")]
    pub synth: Option<SynthSpec>,

    /// Seed of the generated set.
    #[arg(long, default_value_t = 0)]
    pub synth_seed: u64,
}

#[derive(Debug, Args)]
pub struct CwArgs {
    /// Stabilizing constant of the CW-SSIM index.
    #[arg(long = "K", value_name = "K", default_value_t = 0.01)]
    pub k_const: f64,

    /// Side of the square comparison window, in subband samples.
    #[arg(long, default_value_t = 7)]
    pub window: usize,

    /// Step between window positions [distances: 1, benchmark: 2].
    #[arg(long)]
    pub stride: Option<usize>,

    #[arg(long, default_value_t = 2)]
    pub scales: usize,

    #[arg(long, default_value_t = 6)]
    pub orientations: usize,
}

#[derive(Debug, Args)]
pub struct DistancesArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,

    #[command(flatten)]
    pub cw: CwArgs,

    /// l2, cwssim, geo-l2 or gcwssim.
    #[arg(long, default_value = "gcwssim")]
    pub measure: DistanceKind,

    /// Neighbors per point in the graph of the geodesic measures.
    #[arg(long = "t", value_name = "T", default_value_t = 5)]
    pub t: usize,

    /// Join disconnected graph components by their cheapest edges.
    #[arg(long)]
    pub bridge: bool,

    /// Keep only mutual nearest-neighbor edges.
    #[arg(long)]
    pub mutual: bool,

    /// GDM1 output file; parameters go to `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,

    /// Also write a comma-separated text export here.
    #[arg(long, value_name = "FILE")]
    pub text: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RestartArgs {
    /// Number of k-medoids restarts.
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,

    /// Use 1000 restarts.
    #[arg(long, conflicts_with = "restarts")]
    pub paper_protocol: bool,

    /// Seed of the first restart; restart r uses seed + r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl RestartArgs {
    pub fn n_restarts(&self) -> usize {
        if self.paper_protocol {
            1000
        } else {
            self.restarts
        }
    }
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// GDM1 or text matrix file.
    pub matrix: PathBuf,

    /// Number of clusters.
    #[arg(long = "k", value_name = "K")]
    pub k: usize,

    #[command(flatten)]
    pub restarts: RestartArgs,

    /// JSON report file (printed to stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// JSON report written by `cluster`.
    pub report: PathBuf,

    #[command(flatten)]
    pub dataset: DatasetArgs,

    /// Also save the scores as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// coil-sets, large-coil-sets, olivetti-sets or synthetic.
    pub suite: String,

    /// Dataset directory (not needed for `synthetic`).
    #[arg(long, value_name = "DIR")]
    pub data: Option<PathBuf>,

    /// Size of the synthetic suite's generated set [default: 5:72:64].
    #[arg(long, value_name = "OBJECTS:ANGLES:SIZE")]
    pub synth: Option<SynthSpec>,

    #[command(flatten)]
    pub cw: CwArgs,

    #[command(flatten)]
    pub restarts: RestartArgs,

    #[arg(long = "t", value_name = "T", default_value_t = 5)]
    pub t: usize,

    /// Fail on disconnected graphs instead of bridging them.
    #[arg(long)]
    pub no_bridge: bool,

    #[arg(long)]
    pub mutual: bool,

    /// CSV output file (printed to stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    /// GDM1 or text matrix file.
    pub matrix: PathBuf,

    /// Brightness factor; values above the maximum clamp to white.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,

    /// Output image; `.png` writes PNG, anything else binary PGM.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_name = "OBJECTS:ANGLES:SIZE", default_value = "5:72:64")]
    pub synth: SynthSpec,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output directory; frames are written as `obj<N>__<i>.pgm`.
    #[arg(long)]
    pub out: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn synth_spec_parsing() {
        assert_eq!(
            "5:72:64".parse::<SynthSpec>().unwrap(),
            SynthSpec {
                objects: 5,
                angles: 72,
                size: 64
            }
        );
        assert!("5:72".parse::<SynthSpec>().is_err());
        assert!("a:b:c".parse::<SynthSpec>().is_err());
    }

    #[test]
    fn paper_protocol_sets_restarts() {
        let cli = Cli::try_parse_from(["gcwssim", "cluster", "m.gdm", "--k", "3", "--paper-protocol"]).unwrap();
        let Command::Cluster(c) = cli.command else { panic!() };
        assert_eq!(c.restarts.n_restarts(), 1000);
    }
}
