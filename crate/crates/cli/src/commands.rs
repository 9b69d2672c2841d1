use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use gcwssim::benchmark::{run_benchmark, BenchmarkConfig, Suite, SynthParams};
use gcwssim::cluster::kmedoids_restarts_with_stats;
use gcwssim::cwssim::CwSsimConfig;
use gcwssim::data::{load_dataset, save_pgm, synth_rotated_set, LabeledDataset};
use gcwssim::eval::evaluate;
use gcwssim::heatmap::heatmap;
use gcwssim::io::{
    read_cluster_report, read_json, read_matrix, sidecar_path, to_json, write_gdm1, write_json, write_text,
    ClusterReport, EvalRecord, MatrixParams,
};
use gcwssim::manifold::{distance_matrix, DistanceKind, GraphOptions, Symmetrization};
use gcwssim::wavelet::PyramidConfig;

use crate::args::{
    BenchmarkArgs, ClusterArgs, Command, CwArgs, DatasetArgs, DistancesArgs, EvalArgs, HeatmapArgs, SynthArgs,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(gcwssim::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(gcwssim::Error::InvalidParameter(_)) => 1,
            CliError::Core(gcwssim::Error::DisconnectedGraph { .. }) => 3,
            CliError::Core(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl From<gcwssim::Error> for CliError {
    fn from(e: gcwssim::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Distances(a) => distances(a),
        Command::Cluster(a) => cluster(a),
        Command::Eval(a) => eval(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Heatmap(a) => heatmap_cmd(a),
        Command::Synth(a) => synth(a),
    }
}

fn load(args: &DatasetArgs) -> Result<(LabeledDataset, String)> {
    match (&args.data, args.synth) {
        (Some(dir), _) => Ok((load_dataset(dir, args.manifest.as_deref())?, dir.display().to_string())),
        (None, Some(s)) => Ok((
            synth_rotated_set(s.objects, s.angles, s.size, args.synth_seed)?,
            format!("synth {}:{}:{} seed {}", s.objects, s.angles, s.size, args.synth_seed),
        )),
        (None, None) => Err(CliError::Usage("a dataset is required: pass --data DIR or --synth O:A:S".into())),
    }
}

fn cw_config(a: &CwArgs, default_stride: usize) -> CwSsimConfig {
    CwSsimConfig {
        k: a.k_const,
        window: a.window,
        stride: a.stride.unwrap_or(default_stride),
        pyramid: PyramidConfig {
            n_scales: a.scales,
            n_orientations: a.orientations,
        },
    }
}

fn symmetrization(mutual: bool) -> Symmetrization {
    if mutual {
        Symmetrization::Mutual
    } else {
        Symmetrization::Union
    }
}

fn write_string(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| {
        CliError::Core(gcwssim::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn distances(a: DistancesArgs) -> Result<()> {
    let cfg = cw_config(&a.cw, 1);
    cfg.validate()?;
    if a.measure.is_geodesic() && a.t == 0 {
        return Err(CliError::Usage("--t must be at least 1".into()));
    }
    let (ds, dataset) = load(&a.dataset)?;
    let opts = GraphOptions {
        symmetrization: symmetrization(a.mutual),
        bridge: a.bridge,
    };
    let start = Instant::now();
    let d = distance_matrix(&ds, a.measure, a.t, &cfg, &opts)?;
    log::info!(
        "{} matrix, n = {}, t = {}, {:.2} s",
        d.kind(),
        d.n(),
        a.t,
        start.elapsed().as_secs_f64()
    );
    write_gdm1(&a.out, &d)?;
    let params = MatrixParams {
        kind: d.kind(),
        n: d.n(),
        dataset,
        t: a.measure.is_geodesic().then_some(a.t),
        k_const: cfg.k,
        window: cfg.window,
        stride: cfg.stride,
        scales: cfg.pyramid.n_scales,
        orientations: cfg.pyramid.n_orientations,
        bridge: a.bridge,
        mutual: a.mutual,
    };
    write_json(&sidecar_path(&a.out), &params)?;
    if let Some(text) = &a.text {
        write_text(text, &d)?;
    }
    Ok(())
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let d = read_matrix(&a.matrix, DistanceKind::L2)?;
    let sidecar = sidecar_path(&a.matrix);
    let matrix_params = if sidecar.exists() {
        Some(read_json::<MatrixParams>(&sidecar)?)
    } else {
        None
    };
    let n_restarts = a.restarts.n_restarts();
    let (result, restarts) = kmedoids_restarts_with_stats(&d, a.k, n_restarts, a.restarts.seed)?;
    log::info!(
        "k = {}, objective {}, best restart {} of {}, {} iteration-cap hits",
        a.k,
        result.objective,
        restarts.best_restart,
        n_restarts,
        restarts.cap_hits
    );
    let report = ClusterReport {
        matrix: a.matrix.display().to_string(),
        measure: d.kind(),
        n: d.n(),
        k: a.k,
        n_restarts,
        seed: a.restarts.seed,
        matrix_params,
        result,
        restarts,
    };
    match &a.out {
        Some(path) => write_json(path, &report)?,
        None => print!("{}", to_json(&report)),
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let report = read_cluster_report(&a.report)?;
    let (ds, dataset) = load(&a.dataset)?;
    if ds.len() != report.n {
        return Err(CliError::Core(gcwssim::Error::DimensionMismatch(format!(
            "report covers {} points, dataset has {}",
            report.n,
            ds.len()
        ))));
    }
    let scores = evaluate(&report.result.assignments, ds.labels())?;
    println!("r_e {:.1}  r_t {:.1}  r_f {:.1}", scores.r_e, scores.r_t, scores.r_f);
    if let Some(path) = &a.out {
        let record = EvalRecord {
            report: a.report.display().to_string(),
            dataset,
            eval: scores,
        };
        write_json(path, &record)?;
    }
    Ok(())
}

fn benchmark(a: BenchmarkArgs) -> Result<()> {
    let suite: Suite = a
        .suite
        .parse()
        .map_err(|_| CliError::Usage(format!("unknown suite `{}`; expected coil-sets, large-coil-sets, olivetti-sets or synthetic", a.suite)))?;
    let synth = a
        .synth
        .map(|s| SynthParams {
            objects: s.objects,
            angles: s.angles,
            size: s.size,
        })
        .unwrap_or_default();
    let cfg = BenchmarkConfig {
        t: a.t,
        n_restarts: a.restarts.n_restarts(),
        seed: a.restarts.seed,
        cwssim: cw_config(&a.cw, 2),
        graph: GraphOptions {
            symmetrization: symmetrization(a.mutual),
            bridge: !a.no_bridge,
        },
        synth,
    };
    log::info!(
        "suite {suite}: t = {}, n_restarts = {}, stride = {}, seed = {}",
        cfg.t,
        cfg.n_restarts,
        cfg.cwssim.stride,
        cfg.seed
    );
    let table = run_benchmark(suite, a.data.as_deref(), &cfg)?;
    let csv = table.to_csv();
    match &a.out {
        Some(path) => write_string(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn heatmap_cmd(a: HeatmapArgs) -> Result<()> {
    let d = read_matrix(&a.matrix, DistanceKind::L2)?;
    heatmap(&d, a.scale)?.save(&a.out)?;
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let s = a.synth;
    let ds = synth_rotated_set(s.objects, s.angles, s.size, a.seed)?;
    fs::create_dir_all(&a.out).map_err(|e| {
        CliError::Core(gcwssim::Error::Io {
            path: a.out.clone(),
            source: e,
        })
    })?;
    for (i, img) in ds.images().iter().enumerate() {
        let name = format!("obj{}__{}.pgm", ds.labels()[i] + 1, i % s.angles);
        save_pgm(img, &a.out.join(name))?;
    }
    log::info!("wrote {} frames to {}", ds.len(), a.out.display());
    Ok(())
}
