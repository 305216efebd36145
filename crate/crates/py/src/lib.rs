//! Python bindings. Reports come back as plain dicts and lists.

use agora_core::ballots::{borda, condorcet, plurality, schulze, RankingProfile};
use agora_core::factor::{self, bridging_minapproval, FitConfig};
use agora_core::slates::{greedy_slate as core_greedy_slate, jr_check_rating as core_jr_rating, UtilityTable};
use agora_core::spectral::{self, Impute, Orientation, RepnessOptions, VoteValue};
use agora_core::synthpop::{generate_world as core_generate_world, ClusterSpec};
use agora_core::{io, AgoraError, WillMatrix};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: AgoraError) -> PyErr {
    PyValueError::new_err(format!("{}: {e}", e.name()))
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// A loaded participant x statement vote matrix.
#[pyclass(name = "Dataset", frozen)]
struct Dataset(WillMatrix);

#[pymethods]
impl Dataset {
    #[getter]
    fn n_participants(&self) -> usize {
        self.0.n_participants()
    }

    #[getter]
    fn n_statements(&self) -> usize {
        self.0.n_statements()
    }

    #[getter]
    fn density(&self) -> f64 {
        self.0.density()
    }

    fn summary(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.0.summarize())
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(participants={}, statements={}, votes={})",
            self.0.n_participants(),
            self.0.n_statements(),
            self.0.n_entries()
        )
    }
}

#[pyfunction]
fn load_dataset(path: &str) -> PyResult<Dataset> {
    io::load_dataset(path).map(Dataset).map_err(err)
}

#[pyfunction]
fn smoothed_probability(n: usize, t: usize) -> f64 {
    spectral::smoothed_probability(n, t)
}

/// PCA projection followed by k-means with silhouette selection of k.
#[pyfunction]
#[pyo3(signature = (dataset, dims=2, kmax=5, seed=0, impute="zero"))]
fn opinion_groups(
    py: Python<'_>,
    dataset: &Dataset,
    dims: usize,
    kmax: usize,
    seed: u64,
    impute: &str,
) -> PyResult<Py<PyAny>> {
    let impute = match impute {
        "zero" => Impute::Zero,
        "row-mean" => Impute::RowMean,
        other => return Err(PyValueError::new_err(format!("unknown impute {other:?}"))),
    };
    let projection = spectral::reduce(&dataset.0, dims, impute).map_err(err)?;
    let groups = spectral::cluster(&projection, kmax, seed).map_err(err)?;
    to_py(py, &serde_json::json!({ "projection": projection, "groups": groups }))
}

#[pyfunction]
#[pyo3(signature = (dataset, groups, statement, group, vote="agree", orientation="paper", count_pass=true))]
#[allow(clippy::too_many_arguments)]
fn repness(
    py: Python<'_>,
    dataset: &Dataset,
    groups: &Bound<'_, PyAny>,
    statement: &str,
    group: usize,
    vote: &str,
    orientation: &str,
    count_pass: bool,
) -> PyResult<Py<PyAny>> {
    let text: String = py.import("json")?.call_method1("dumps", (groups,))?.extract()?;
    let groups = serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let vote = match vote {
        "agree" => VoteValue::Agree,
        "disagree" => VoteValue::Disagree,
        other => return Err(PyValueError::new_err(format!("unknown vote {other:?}"))),
    };
    let orientation = match orientation {
        "paper" => Orientation::Paper,
        "polis" => Orientation::Polis,
        other => return Err(PyValueError::new_err(format!("unknown orientation {other:?}"))),
    };
    let options = RepnessOptions {
        count_pass_in_total: count_pass,
        orientation,
    };
    let report = spectral::repness(&dataset.0, &groups, statement, group, vote, options).map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (dataset, attribute, count_pass=true))]
fn bridging(py: Python<'_>, dataset: &Dataset, attribute: &str, count_pass: bool) -> PyResult<Py<PyAny>> {
    to_py(
        py,
        &bridging_minapproval(&dataset.0, attribute, count_pass).map_err(err)?,
    )
}

#[pyfunction]
#[pyo3(signature = (dataset, lambda_i=0.15, lambda_f=0.03, epochs=200, seed=1))]
fn fit_notes(
    py: Python<'_>,
    dataset: &Dataset,
    lambda_i: f64,
    lambda_f: f64,
    epochs: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let config = FitConfig {
        lambda_intercept: lambda_i,
        lambda_factor: lambda_f,
        epochs,
        seed,
        ..FitConfig::default()
    };
    let (factors, report) = factor::fit(&dataset.0, &config).map_err(err)?;
    to_py(py, &serde_json::json!({ "factors": factors, "report": report }))
}

/// Aggregates ranked ballots given as lists of candidate ids.
#[pyfunction]
fn vote(py: Python<'_>, ballots: Vec<Vec<String>>, rule: &str) -> PyResult<Py<PyAny>> {
    let profile = RankingProfile::from_ids(&ballots).map_err(err)?;
    match rule {
        "plurality" => to_py(py, &plurality(&profile)),
        "borda" => to_py(py, &borda(&profile)),
        "condorcet" => to_py(py, &condorcet(&profile)),
        "schulze" => to_py(py, &schulze(&profile)),
        other => Err(PyValueError::new_err(format!("unknown rule {other:?}"))),
    }
}

/// Greedy n/k slate over a dense participant x statement utility table.
#[pyfunction]
fn greedy_slate(py: Python<'_>, utilities: Vec<Vec<f64>>, k: usize) -> PyResult<Py<PyAny>> {
    let table = UtilityTable::from_values(utilities).map_err(err)?;
    to_py(py, &core_greedy_slate(&table, k).map_err(err)?)
}

#[pyfunction]
fn jr_check_rating(py: Python<'_>, utilities: Vec<Vec<f64>>, committee: Vec<usize>, k: usize) -> PyResult<Py<PyAny>> {
    let table = UtilityTable::from_values(utilities).map_err(err)?;
    to_py(py, &core_jr_rating(&table, &committee, k).map_err(err)?)
}

/// Seeded synthetic world, e.g. `clusters="2x50@(-1,0);(1,0)"`.
#[pyfunction]
#[pyo3(signature = (n, m, d, clusters, seed=0, spread=0.1, noise=0.0, pass_band=0.0))]
#[allow(clippy::too_many_arguments)]
fn generate_world(
    py: Python<'_>,
    n: usize,
    m: usize,
    d: usize,
    clusters: &str,
    seed: u64,
    spread: f64,
    noise: f64,
    pass_band: f64,
) -> PyResult<Py<PyAny>> {
    let layout = ClusterSpec::parse(clusters)
        .map_err(err)?
        .spread(spread)
        .noise(noise)
        .pass_band(pass_band);
    to_py(py, &core_generate_world(n, m, d, seed, &layout).map_err(err)?)
}

#[pymodule]
fn agora(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_function(wrap_pyfunction!(load_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(smoothed_probability, m)?)?;
    m.add_function(wrap_pyfunction!(opinion_groups, m)?)?;
    m.add_function(wrap_pyfunction!(repness, m)?)?;
    m.add_function(wrap_pyfunction!(bridging, m)?)?;
    m.add_function(wrap_pyfunction!(fit_notes, m)?)?;
    m.add_function(wrap_pyfunction!(vote, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_slate, m)?)?;
    m.add_function(wrap_pyfunction!(jr_check_rating, m)?)?;
    m.add_function(wrap_pyfunction!(generate_world, m)?)?;
    Ok(())
}
