//! Python bindings: images, datasets, distance matrices, k-medoids and the
//! evaluation criteria. Long computations release the GIL.

#![allow(non_snake_case)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIndexError, PyOSError, PyValueError};
use pyo3::prelude::*;

use gcwssim::benchmark::{run_benchmark, BenchmarkConfig, Suite, SynthParams};
use gcwssim::cluster::kmedoids_restarts_with_stats;
use gcwssim::cwssim::{self, CwSsimConfig};
use gcwssim::data::{load_dataset, load_image, save_pgm, synth_rotated_set, GrayImage, LabeledDataset, BACKGROUND};
use gcwssim::eval;
use gcwssim::heatmap;
use gcwssim::io;
use gcwssim::manifold::{self, DistanceKind, DistanceMatrix, GraphOptions, Symmetrization};
use gcwssim::wavelet::{Complex64, PyramidConfig};

create_exception!(pygcwssim, DisconnectedGraphError, PyException);

fn to_py(e: gcwssim::Error) -> PyErr {
    match e {
        gcwssim::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        gcwssim::Error::IndexOutOfRange(_) => PyIndexError::new_err(e.to_string()),
        gcwssim::Error::DisconnectedGraph { .. } => DisconnectedGraphError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn cw_config(K: f64, window: usize, stride: usize, scales: usize, orientations: usize) -> CwSsimConfig {
    CwSsimConfig {
        k: K,
        window,
        stride,
        pyramid: PyramidConfig {
            n_scales: scales,
            n_orientations: orientations,
        },
    }
}

fn graph_options(bridge: bool, mutual: bool) -> GraphOptions {
    GraphOptions {
        symmetrization: if mutual { Symmetrization::Mutual } else { Symmetrization::Union },
        bridge,
    }
}

fn parse_kind(s: &str) -> PyResult<DistanceKind> {
    s.parse().map_err(to_py)
}

/// Grayscale image with intensities in [0, 1].
#[pyclass(name = "GrayImage", module = "pygcwssim", frozen)]
struct PyGrayImage {
    inner: GrayImage,
}

#[pymethods]
impl PyGrayImage {
    #[new]
    fn new(width: usize, height: usize, pixels: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: GrayImage::new(width, height, pixels).map_err(to_py)?,
        })
    }

    /// Reads PNG, PGM/PPM or BMP, converting color to luma.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: load_image(&path).map_err(to_py)?,
        })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    /// Row-major pixel values.
    fn pixels(&self) -> Vec<f64> {
        self.inner.pixels().to_vec()
    }

    /// Circular shift by (dx, dy) pixels.
    fn shifted(&self, dx: isize, dy: isize) -> Self {
        Self {
            inner: self.inner.circular_shift(dx, dy),
        }
    }

    /// Bilinear rotation about the center; uncovered pixels take `fill`.
    #[pyo3(signature = (degrees, fill = BACKGROUND))]
    fn rotated(&self, degrees: f64, fill: f64) -> Self {
        Self {
            inner: self.inner.rotate_bilinear(degrees, fill),
        }
    }

    fn save_pgm(&self, path: PathBuf) -> PyResult<()> {
        save_pgm(&self.inner, &path).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("GrayImage({}x{})", self.inner.width(), self.inner.height())
    }
}

/// Images with contiguous integer labels.
#[pyclass(name = "Dataset", module = "pygcwssim", frozen)]
struct PyDataset {
    inner: LabeledDataset,
}

#[pymethods]
impl PyDataset {
    /// Loads a COIL-style directory, a directory per class, or a manifest.
    #[staticmethod]
    #[pyo3(signature = (root, manifest = None))]
    fn load(py: Python<'_>, root: PathBuf, manifest: Option<PathBuf>) -> PyResult<Self> {
        let inner = py.detach(|| load_dataset(&root, manifest.as_deref())).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Textured objects rotated in-plane, `angles` frames each.
    #[staticmethod]
    #[pyo3(signature = (objects, angles, size = 64, seed = 0))]
    fn synthetic(py: Python<'_>, objects: usize, angles: usize, size: usize, seed: u64) -> PyResult<Self> {
        let inner = py
            .detach(|| synth_rotated_set(objects, angles, size, seed))
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn labels(&self) -> Vec<usize> {
        self.inner.labels().to_vec()
    }

    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    fn classes(&self) -> Vec<String> {
        self.inner.classes().to_vec()
    }

    fn image(&self, i: usize) -> PyResult<PyGrayImage> {
        self.inner
            .images()
            .get(i)
            .map(|img| PyGrayImage { inner: img.clone() })
            .ok_or_else(|| PyIndexError::new_err(format!("image {i} of {}", self.inner.len())))
    }

    /// Keeps the classes whose names end in the given numbers.
    fn subset(&self, class_numbers: Vec<u64>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.subset_by_class_numbers(&class_numbers).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset({} images, {} classes)",
            self.inner.len(),
            self.inner.n_classes()
        )
    }
}

/// Symmetric matrix with a zero diagonal, tagged with its measure.
#[pyclass(name = "DistanceMatrix", module = "pygcwssim", frozen)]
struct PyDistanceMatrix {
    inner: DistanceMatrix,
}

#[pymethods]
impl PyDistanceMatrix {
    #[new]
    #[pyo3(signature = (rows, kind = "l2"))]
    fn new(rows: Vec<Vec<f64>>, kind: &str) -> PyResult<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("rows must form a square matrix"));
        }
        Ok(Self {
            inner: DistanceMatrix::new(n, rows.concat(), parse_kind(kind)?).map_err(to_py)?,
        })
    }

    /// Reads GDM1 or a comma-separated text export.
    #[staticmethod]
    #[pyo3(signature = (path, text_kind = "l2"))]
    fn load(path: PathBuf, text_kind: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::read_matrix(&path, parse_kind(text_kind)?).map_err(to_py)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::write_gdm1(&path, &self.inner).map_err(to_py)
    }

    fn save_text(&self, path: PathBuf) -> PyResult<()> {
        io::write_text(&path, &self.inner).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().name()
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __getitem__(&self, index: (usize, usize)) -> PyResult<f64> {
        let (i, j) = index;
        if i >= self.inner.n() || j >= self.inner.n() {
            return Err(PyIndexError::new_err(format!("({i}, {j}) in a {}-point matrix", self.inner.n())));
        }
        Ok(self.inner.get(i, j))
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        (0..self.inner.n()).map(|i| self.inner.row(i).to_vec()).collect()
    }

    fn max(&self) -> f64 {
        self.inner.max()
    }

    fn submatrix(&self, indices: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.submatrix(&indices).map_err(to_py)?,
        })
    }

    /// First (i, j, k) with d[i][j] > d[i][k] + d[k][j] + slack, if any.
    #[pyo3(signature = (slack = 1e-9))]
    fn triangle_violation(&self, slack: f64) -> Option<(usize, usize, usize)> {
        self.inner.triangle_violation(slack)
    }

    fn __repr__(&self) -> String {
        format!("DistanceMatrix(n={}, kind={})", self.inner.n(), self.inner.kind())
    }
}

#[pyclass(name = "ClusteringResult", module = "pygcwssim", frozen, get_all)]
struct PyClusteringResult {
    medoids: Vec<usize>,
    assignments: Vec<usize>,
    objective: f64,
    iterations: usize,
    seed: u64,
    hit_iteration_cap: bool,
    best_restart: usize,
    cap_hits: usize,
}

#[pymethods]
impl PyClusteringResult {
    fn __repr__(&self) -> String {
        format!(
            "ClusteringResult(k={}, objective={}, seed={})",
            self.medoids.len(),
            self.objective,
            self.seed
        )
    }
}

#[pyclass(name = "EvalReport", module = "pygcwssim", frozen, get_all)]
struct PyEvalReport {
    r_e: f64,
    r_t: f64,
    r_f: f64,
    n: usize,
    k_learned: usize,
    k_true: usize,
    label_map: BTreeMap<usize, usize>,
}

#[pymethods]
impl PyEvalReport {
    fn __repr__(&self) -> String {
        format!("EvalReport(r_e={:.1}, r_t={:.1}, r_f={:.1})", self.r_e, self.r_t, self.r_f)
    }
}

/// Local CW-SSIM index of two complex coefficient vectors.
#[pyfunction]
#[pyo3(signature = (cx, cy, K = 0.01))]
fn local_cwssim(cx: Vec<Complex64>, cy: Vec<Complex64>, K: f64) -> PyResult<f64> {
    cwssim::local_cwssim(&cx, &cy, K).map_err(to_py)
}

/// Global CW-SSIM index of two equally sized images.
#[pyfunction]
#[pyo3(signature = (x, y, K = 0.01, window = 7, stride = 1, scales = 2, orientations = 6))]
fn global_cwssim(
    x: PyRef<'_, PyGrayImage>,
    y: PyRef<'_, PyGrayImage>,
    K: f64,
    window: usize,
    stride: usize,
    scales: usize,
    orientations: usize,
) -> PyResult<f64> {
    let cfg = cw_config(K, window, stride, scales, orientations);
    cwssim::global_cwssim(&x.inner, &y.inner, &cfg).map_err(to_py)
}

/// `1 - global_cwssim(x, y)`.
#[pyfunction]
#[pyo3(signature = (x, y, K = 0.01, window = 7, stride = 1, scales = 2, orientations = 6))]
fn cwssim_distance(
    x: PyRef<'_, PyGrayImage>,
    y: PyRef<'_, PyGrayImage>,
    K: f64,
    window: usize,
    stride: usize,
    scales: usize,
    orientations: usize,
) -> PyResult<f64> {
    let cfg = cw_config(K, window, stride, scales, orientations);
    cwssim::cwssim_distance(&x.inner, &y.inner, &cfg).map_err(to_py)
}

/// Pairwise matrix of `measure` ("l2", "cwssim", "geo-l2" or "gcwssim").
#[pyfunction]
#[pyo3(signature = (
    dataset, measure = "gcwssim", t = 5, K = 0.01, window = 7, stride = 1,
    scales = 2, orientations = 6, bridge = false, mutual = false
))]
#[allow(clippy::too_many_arguments)]
fn distance_matrix(
    py: Python<'_>,
    dataset: PyRef<'_, PyDataset>,
    measure: &str,
    t: usize,
    K: f64,
    window: usize,
    stride: usize,
    scales: usize,
    orientations: usize,
    bridge: bool,
    mutual: bool,
) -> PyResult<PyDistanceMatrix> {
    let kind = parse_kind(measure)?;
    let cfg = cw_config(K, window, stride, scales, orientations);
    let opts = graph_options(bridge, mutual);
    let ds = &dataset.inner;
    let inner = py
        .detach(|| manifold::distance_matrix(ds, kind, t, &cfg, &opts))
        .map_err(to_py)?;
    Ok(PyDistanceMatrix { inner })
}

/// Shortest-path distances over the t-nn graph of a base matrix.
#[pyfunction]
#[pyo3(signature = (matrix, t = 5, bridge = false, mutual = false))]
fn geodesic(py: Python<'_>, matrix: PyRef<'_, PyDistanceMatrix>, t: usize, bridge: bool, mutual: bool) -> PyResult<PyDistanceMatrix> {
    let opts = graph_options(bridge, mutual);
    let base = &matrix.inner;
    let inner = py
        .detach(|| manifold::geodesic_matrix(base, t, &opts))
        .map_err(to_py)?;
    Ok(PyDistanceMatrix { inner })
}

/// Best of `restarts` k-medoids runs seeded `seed, seed + 1, ...`.
#[pyfunction]
#[pyo3(signature = (matrix, k, restarts = 50, seed = 0))]
fn kmedoids(
    py: Python<'_>,
    matrix: PyRef<'_, PyDistanceMatrix>,
    k: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<PyClusteringResult> {
    let d = &matrix.inner;
    let (r, stats) = py
        .detach(|| kmedoids_restarts_with_stats(d, k, restarts, seed))
        .map_err(to_py)?;
    Ok(PyClusteringResult {
        medoids: r.medoids,
        assignments: r.assignments,
        objective: r.objective,
        iterations: r.iterations,
        seed: r.seed,
        hit_iteration_cap: r.hit_iteration_cap,
        best_restart: stats.best_restart,
        cap_hits: stats.cap_hits,
    })
}

/// Error rate, true and false association rates, in percent.
#[pyfunction]
fn evaluate(assignments: Vec<usize>, truth: Vec<usize>) -> PyResult<PyEvalReport> {
    let r = eval::evaluate(&assignments, &truth).map_err(to_py)?;
    Ok(PyEvalReport {
        r_e: r.r_e,
        r_t: r.r_t,
        r_f: r.r_f,
        n: r.n,
        k_learned: r.k_learned,
        k_true: r.k_true,
        label_map: r.label_map,
    })
}

/// Writes `min(1, scale * d / max(d))` as a PNG or PGM image; returns the
/// 8-bit pixels row by row.
#[pyfunction]
#[pyo3(signature = (matrix, path, scale = 1.0))]
fn save_heatmap(matrix: PyRef<'_, PyDistanceMatrix>, path: PathBuf, scale: f64) -> PyResult<Vec<u8>> {
    let h = heatmap::heatmap(&matrix.inner, scale).map_err(to_py)?;
    h.save(&path).map_err(to_py)?;
    Ok(h.to_u8())
}

/// Runs a benchmark suite and returns its CSV table.
#[pyfunction]
#[pyo3(signature = (
    suite, root = None, t = 5, restarts = 50, seed = 0, K = 0.01, window = 7,
    stride = 2, scales = 2, orientations = 6, synth = (5, 72, 64)
))]
#[allow(clippy::too_many_arguments)]
fn benchmark(
    py: Python<'_>,
    suite: &str,
    root: Option<PathBuf>,
    t: usize,
    restarts: usize,
    seed: u64,
    K: f64,
    window: usize,
    stride: usize,
    scales: usize,
    orientations: usize,
    synth: (usize, usize, usize),
) -> PyResult<String> {
    let suite: Suite = suite.parse().map_err(to_py)?;
    let cfg = BenchmarkConfig {
        t,
        n_restarts: restarts,
        seed,
        cwssim: cw_config(K, window, stride, scales, orientations),
        graph: graph_options(true, false),
        synth: SynthParams {
            objects: synth.0,
            angles: synth.1,
            size: synth.2,
        },
    };
    let table = py
        .detach(|| run_benchmark(suite, root.as_deref(), &cfg))
        .map_err(to_py)?;
    Ok(table.to_csv())
}

#[pymodule]
fn pygcwssim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DisconnectedGraphError", m.py().get_type::<DisconnectedGraphError>())?;
    m.add_class::<PyGrayImage>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyDistanceMatrix>()?;
    m.add_class::<PyClusteringResult>()?;
    m.add_class::<PyEvalReport>()?;
    m.add_function(wrap_pyfunction!(local_cwssim, m)?)?;
    m.add_function(wrap_pyfunction!(global_cwssim, m)?)?;
    m.add_function(wrap_pyfunction!(cwssim_distance, m)?)?;
    m.add_function(wrap_pyfunction!(distance_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(kmedoids, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(save_heatmap, m)?)?;
    m.add_function(wrap_pyfunction!(benchmark, m)?)?;
    Ok(())
}
