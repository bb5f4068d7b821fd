//! Python bindings: the clusterers, baselines, metrics, tau scanning,
//! generators and reducers over plain lists of floats.

use gsup_core::baselines::{self, KMeansConfig};
use gsup_core::datagen::{self, ImageSimSpec, MixtureSpec};
use gsup_core::gammasup::{self, GammaSupConfig};
use gsup_core::qcore;
use gsup_core::reduce;
use gsup_core::tuning;
use gsup_core::{DataMatrix, TuningParams};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: gsup_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DataMatrix> {
    DataMatrix::from_rows(&rows).map_err(err)
}

fn rows_of(m: &DataMatrix) -> Vec<Vec<f64>> {
    m.rows().map(|r| r.to_vec()).collect()
}

/// Clustering outcome: labels, centers, sizes and run diagnostics.
#[pyclass(name = "ClusterResult")]
struct PyClusterResult {
    #[pyo3(get)]
    labels: Vec<usize>,
    #[pyo3(get)]
    centers: Vec<Vec<f64>>,
    #[pyo3(get)]
    sizes: Vec<usize>,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    converged: bool,
}

#[pymethods]
impl PyClusterResult {
    #[getter]
    fn k(&self) -> usize {
        self.sizes.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "ClusterResult(k={}, iterations={}, converged={})",
            self.sizes.len(),
            self.iterations,
            self.converged
        )
    }
}

impl From<gammasup::ClusterResult> for PyClusterResult {
    fn from(r: gammasup::ClusterResult) -> Self {
        Self {
            labels: r.labels.clone(),
            centers: rows_of(&r.centers),
            sizes: r.sizes.clone(),
            iterations: r.iterations,
            converged: r.converged,
        }
    }
}

fn config(
    s: f64,
    tau: f64,
    conv_eps: f64,
    merge_eps: f64,
    max_iter: usize,
) -> PyResult<GammaSupConfig> {
    Ok(GammaSupConfig::new(TuningParams::new(s, tau).map_err(err)?)
        .with_conv_eps(conv_eps)
        .with_merge_eps(merge_eps)
        .with_max_iter(max_iter))
}

/// Blurring gamma-SUP clustering of row vectors.
#[pyfunction]
#[pyo3(signature = (data, s, tau, conv_eps=gammasup::DEFAULT_CONV_EPS,
                    merge_eps=gammasup::DEFAULT_MERGE_EPS, max_iter=gammasup::DEFAULT_MAX_ITER))]
fn gamma_sup(
    data: Vec<Vec<f64>>,
    s: f64,
    tau: f64,
    conv_eps: f64,
    merge_eps: f64,
    max_iter: usize,
) -> PyResult<PyClusterResult> {
    let m = matrix(data)?;
    let cfg = config(s, tau, conv_eps, merge_eps, max_iter)?;
    Ok(gammasup::gamma_sup(&m, &cfg).map_err(err)?.into())
}

/// Nonblurring gamma-estimator (representatives move, data stays fixed).
#[pyfunction]
#[pyo3(signature = (data, s, tau, conv_eps=gammasup::DEFAULT_CONV_EPS,
                    merge_eps=gammasup::DEFAULT_MERGE_EPS, max_iter=gammasup::DEFAULT_MAX_ITER))]
fn gamma_nonblurring(
    data: Vec<Vec<f64>>,
    s: f64,
    tau: f64,
    conv_eps: f64,
    merge_eps: f64,
    max_iter: usize,
) -> PyResult<PyClusterResult> {
    let m = matrix(data)?;
    let cfg = config(s, tau, conv_eps, merge_eps, max_iter)?;
    Ok(gammasup::gamma_nonblurring(&m, &cfg).map_err(err)?.into())
}

/// gamma-SUP followed by 2-means splitting of clusters above size_threshold.
#[pyfunction]
#[pyo3(signature = (data, s, tau, size_threshold, seed=0,
                    conv_eps=gammasup::DEFAULT_CONV_EPS,
                    merge_eps=gammasup::DEFAULT_MERGE_EPS, max_iter=gammasup::DEFAULT_MAX_ITER))]
#[allow(clippy::too_many_arguments)]
fn gamma_sup_plus(
    data: Vec<Vec<f64>>,
    s: f64,
    tau: f64,
    size_threshold: usize,
    seed: u64,
    conv_eps: f64,
    merge_eps: f64,
    max_iter: usize,
) -> PyResult<PyClusterResult> {
    let m = matrix(data)?;
    let cfg = config(s, tau, conv_eps, merge_eps, max_iter)?;
    Ok(gammasup::gamma_sup_plus(&m, &cfg, size_threshold, seed)
        .map_err(err)?
        .into())
}

#[pyfunction]
#[pyo3(signature = (data, k, seed, n_init=baselines::DEFAULT_N_INIT, max_iter=300))]
fn kmeans(
    data: Vec<Vec<f64>>,
    k: usize,
    seed: u64,
    n_init: usize,
    max_iter: usize,
) -> PyResult<PyClusterResult> {
    let m = matrix(data)?;
    let cfg = KMeansConfig::new(k, seed)
        .with_n_init(n_init)
        .with_max_iter(max_iter);
    Ok(baselines::kmeans(&m, &cfg).map_err(err)?.into())
}

#[pyfunction]
#[pyo3(signature = (data, k, seed, dismiss_threshold=baselines::DEFAULT_DISMISS))]
fn kmeans_plus(
    data: Vec<Vec<f64>>,
    k: usize,
    seed: u64,
    dismiss_threshold: usize,
) -> PyResult<PyClusterResult> {
    let m = matrix(data)?;
    let cfg = KMeansConfig::new(k, seed).with_dismiss_threshold(dismiss_threshold);
    Ok(baselines::kmeans_plus(&m, &cfg).map_err(err)?.into())
}

/// Gap-statistic K selection; returns (selected_k, gaps, standard_errors).
#[pyfunction]
fn gap_statistic(
    data: Vec<Vec<f64>>,
    k_max: usize,
    b_refs: usize,
    seed: u64,
) -> PyResult<(usize, Vec<f64>, Vec<f64>)> {
    let m = matrix(data)?;
    let g = baselines::gap_statistic(&m, k_max, b_refs, seed).map_err(err)?;
    Ok((g.selected_k, g.gaps, g.se))
}

#[pyfunction]
fn purity_number(truth: Vec<i64>, predicted: Vec<i64>) -> PyResult<usize> {
    gsup_core::metrics::purity_number(&truth, &predicted).map_err(err)
}

#[pyfunction]
fn impurity(truth: Vec<i64>, predicted: Vec<i64>) -> PyResult<usize> {
    gsup_core::metrics::impurity(&truth, &predicted).map_err(err)
}

#[pyfunction]
fn c_impurity(truth: Vec<i64>, predicted: Vec<i64>) -> PyResult<usize> {
    gsup_core::metrics::c_impurity(&truth, &predicted).map_err(err)
}

/// Tau scan; returns a dict with taus, counts, transition_tau,
/// recommended_tau and plateau bounds.
#[pyfunction]
#[pyo3(signature = (data, s, taus=None, grid_count=40,
                    conv_eps=gammasup::DEFAULT_CONV_EPS,
                    merge_eps=gammasup::DEFAULT_MERGE_EPS, max_iter=gammasup::DEFAULT_MAX_ITER))]
fn scan_tau<'py>(
    py: Python<'py>,
    data: Vec<Vec<f64>>,
    s: f64,
    taus: Option<Vec<f64>>,
    grid_count: usize,
    conv_eps: f64,
    merge_eps: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let m = matrix(data)?;
    let grid = match taus {
        Some(t) => t,
        None => tuning::default_tau_grid(&m, grid_count).map_err(err)?,
    };
    let cfg = config(s, grid[0].max(1e-12), conv_eps, merge_eps, max_iter)?;
    let res = tuning::scan_tau(&m, s, &grid, cfg).map_err(err)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("taus", res.taus)?;
    dict.set_item("counts", res.counts)?;
    dict.set_item("transition_tau", res.transition_tau)?;
    dict.set_item("recommended_tau", res.recommended_tau)?;
    dict.set_item("plateau", res.plateau)?;
    Ok(dict)
}

/// 4-component planar mixture sample; returns (rows, labels).
#[pyfunction]
fn gen_mixture(c: f64, pi0: f64, n: usize, seed: u64) -> PyResult<(Vec<Vec<f64>>, Vec<i64>)> {
    let (m, labels) = datagen::gen_mixture(&MixtureSpec { c, pi0, n, seed }).map_err(err)?;
    Ok((rows_of(&m), labels))
}

/// Toy 40-point set; returns (rows, labels) with label 2 marking noise.
#[pyfunction]
fn gen_toy(seed: u64) -> (Vec<Vec<f64>>, Vec<i64>) {
    let (m, labels) = datagen::gen_toy(seed);
    (rows_of(&m), labels)
}

/// Misaligned-image simulation; returns a dict with pixel rows, labels,
/// misalignment mask and the realized SNR.
#[pyfunction]
#[pyo3(signature = (n_templates, image_side, n_images, sigma_eps, misalign_frac, seed,
                    rotation_angles=None))]
fn gen_images<'py>(
    py: Python<'py>,
    n_templates: usize,
    image_side: usize,
    n_images: usize,
    sigma_eps: f64,
    misalign_frac: f64,
    seed: u64,
    rotation_angles: Option<Vec<f64>>,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let spec = ImageSimSpec {
        n_templates,
        image_side,
        n_images,
        sigma_eps,
        misalign_frac,
        rotation_angles: rotation_angles.unwrap_or_else(|| datagen::DEFAULT_ROTATIONS.to_vec()),
        seed,
    };
    let sim = datagen::gen_images(&spec).map_err(err)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("data", rows_of(&sim.data))?;
    dict.set_item("labels", sim.labels)?;
    dict.set_item("misaligned", sim.misaligned)?;
    dict.set_item("realized_snr", sim.realized_snr)?;
    Ok(dict)
}

/// PCA projection; returns (projected rows, explained variance ratios).
#[pyfunction]
#[pyo3(signature = (data, rank, correlation=false))]
fn pca(
    data: Vec<Vec<f64>>,
    rank: usize,
    correlation: bool,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let m = matrix(data)?;
    let res = reduce::pca_fit_project(&m, rank, correlation).map_err(err)?;
    Ok((rows_of(&res.projected), res.explained_ratios))
}

/// 2-mode MPCA: fit on a stack of flattened d1 x d2 images and project each
/// to its r1 x r2 core (flattened row-major).
#[pyfunction]
#[pyo3(signature = (stack, d1, d2, r1, r2, sweeps=5))]
fn mpca(
    stack: Vec<Vec<f64>>,
    d1: usize,
    d2: usize,
    r1: usize,
    r2: usize,
    sweeps: usize,
) -> PyResult<Vec<Vec<f64>>> {
    let m = matrix(stack)?;
    let model = reduce::MpcaModel::fit(&m, d1, d2, r1, r2, sweeps).map_err(err)?;
    Ok(rows_of(&model.project(&m).map_err(err)?))
}

/// Deformed exponential {1 + (1-q)u}_+^{1/(1-q)}.
#[pyfunction]
fn q_exp(u: f64, q: f64) -> f64 {
    qcore::q_exp(u, q)
}

/// Isotropic q-Gaussian density at x.
#[pyfunction]
fn q_gaussian_pdf(x: Vec<f64>, q: f64, mu: Vec<f64>, sigma2: f64) -> PyResult<f64> {
    let g = qcore::QGaussian::new(q, mu, sigma2).map_err(err)?;
    g.pdf(&x).map_err(err)
}

/// Compactly supported self-updating weight exp_{1-s}(-dist2/tau^2).
#[pyfunction]
fn weight(dist2: f64, s: f64, tau: f64) -> PyResult<f64> {
    Ok(qcore::weight(dist2, TuningParams::new(s, tau).map_err(err)?))
}

/// Map (gamma, q, sigma) to the tuning pair (s, tau).
#[pyfunction]
fn to_tuning(gamma: f64, q: f64, sigma: f64) -> PyResult<(f64, f64)> {
    let p = qcore::to_tuning(gamma, q, sigma).map_err(err)?;
    Ok((p.s, p.tau))
}

#[pymodule]
fn gsup_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyClusterResult>()?;
    m.add_function(wrap_pyfunction!(gamma_sup, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_nonblurring, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_sup_plus, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans_plus, m)?)?;
    m.add_function(wrap_pyfunction!(gap_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(purity_number, m)?)?;
    m.add_function(wrap_pyfunction!(impurity, m)?)?;
    m.add_function(wrap_pyfunction!(c_impurity, m)?)?;
    m.add_function(wrap_pyfunction!(scan_tau, m)?)?;
    m.add_function(wrap_pyfunction!(gen_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(gen_toy, m)?)?;
    m.add_function(wrap_pyfunction!(gen_images, m)?)?;
    m.add_function(wrap_pyfunction!(pca, m)?)?;
    m.add_function(wrap_pyfunction!(mpca, m)?)?;
    m.add_function(wrap_pyfunction!(q_exp, m)?)?;
    m.add_function(wrap_pyfunction!(q_gaussian_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(weight, m)?)?;
    m.add_function(wrap_pyfunction!(to_tuning, m)?)?;
    Ok(())
}
