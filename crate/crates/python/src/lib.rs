//! Python bindings for `uvtree`.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use uvtree::harness::{gen_bias_scenario, gen_chessboard, gen_circle_lines, run_bias_simulation, write_dataset, BiasScenario};
use uvtree::{fit, fit_bagged, fit_forest, Dataset, Ensemble, ExportFormat, GrowConfig, LoadOptions, Method, Schema, Tree};

fn py_err(e: uvtree::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn load(data: &str, schema: Option<&str>) -> PyResult<Dataset> {
    let data = PathBuf::from(data);
    let schema_path = schema.map(PathBuf::from).unwrap_or_else(|| data.with_extension("schema"));
    let schema = Schema::from_path(&schema_path).map_err(py_err)?;
    Dataset::load_path(&data, &schema, &LoadOptions::default()).map_err(py_err)
}

fn read_rows(header: &uvtree::Header, path: &str) -> PyResult<Vec<Vec<uvtree::Cell>>> {
    let file = std::fs::File::open(path).map_err(|e| py_err(e.into()))?;
    Ok(header.encode_csv(file, &LoadOptions::default()).map_err(py_err)?.rows)
}

fn config(method: &str, m0: usize, folds: usize, seed: u64) -> PyResult<GrowConfig> {
    let method: Method = method.parse().map_err(py_err)?;
    Ok(GrowConfig {
        m0,
        folds,
        seed,
        ..GrowConfig::with_method(method)
    })
}

/// A fitted classification tree.
#[pyclass(name = "Tree", module = "pyuvtree")]
struct PyTree {
    inner: Tree,
}

#[pymethods]
impl PyTree {
    #[staticmethod]
    #[pyo3(signature = (data, schema=None, method="S", m0=5, folds=10, seed=1))]
    fn fit(data: &str, schema: Option<&str>, method: &str, m0: usize, folds: usize, seed: u64) -> PyResult<PyTree> {
        let data = load(data, schema)?;
        let cfg = config(method, m0, folds, seed)?;
        Ok(PyTree {
            inner: fit(&data, &cfg).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<PyTree> {
        Ok(PyTree {
            inner: Tree::from_json(text).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    #[getter]
    fn n_leaves(&self) -> usize {
        self.inner.n_leaves()
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.inner.header.class_labels.clone()
    }

    /// Predicted class labels for the rows of a CSV file.
    fn predict_csv(&self, path: &str) -> PyResult<Vec<String>> {
        let labels = &self.inner.header.class_labels;
        Ok(read_rows(&self.inner.header, path)?
            .iter()
            .map(|r| labels[self.inner.predict(r)].clone())
            .collect())
    }

    #[pyo3(signature = (format="text"))]
    fn export(&self, format: &str) -> PyResult<String> {
        let f = match format {
            "text" => ExportFormat::Text,
            "dot" => ExportFormat::Dot,
            _ => return Err(PyValueError::new_err("format must be `text` or `dot`")),
        };
        Ok(self.inner.export(f))
    }
}

/// A bagged ensemble or forest.
#[pyclass(name = "Ensemble", module = "pyuvtree")]
struct PyEnsemble {
    inner: Ensemble,
}

#[pymethods]
impl PyEnsemble {
    #[staticmethod]
    #[pyo3(signature = (data, schema=None, kind="BG", trees=None, m0=5, folds=10, seed=1))]
    fn fit(
        data: &str,
        schema: Option<&str>,
        kind: &str,
        trees: Option<usize>,
        m0: usize,
        folds: usize,
        seed: u64,
    ) -> PyResult<PyEnsemble> {
        let data = load(data, schema)?;
        let cfg = config("S", m0, folds, seed)?;
        let inner = match kind {
            "BG" | "bg" => fit_bagged(&data, &cfg, trees.unwrap_or(uvtree::ensemble::DEFAULT_BAGGED)),
            "GF" | "gf" => fit_forest(&data, &cfg, trees.unwrap_or(uvtree::ensemble::DEFAULT_FOREST)),
            _ => return Err(PyValueError::new_err("kind must be `BG` or `GF`")),
        }
        .map_err(py_err)?;
        Ok(PyEnsemble { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    #[getter]
    fn n_members(&self) -> usize {
        self.inner.members.len()
    }

    fn predict_csv(&self, path: &str) -> PyResult<Vec<String>> {
        let header = &self.inner.members[0].header;
        Ok(read_rows(header, path)?
            .iter()
            .map(|r| header.class_labels[self.inner.predict(r)].clone())
            .collect())
    }
}

/// Write a synthetic dataset `<kind>.csv` / `<kind>.schema` into `out_dir`
/// and return the CSV path.
#[pyfunction]
#[pyo3(signature = (kind, out_dir, n=None, seed=1))]
fn generate(kind: &str, out_dir: &str, n: Option<usize>, seed: u64) -> PyResult<String> {
    let data = match kind {
        "chessboard" => gen_chessboard(n.unwrap_or(1000), seed),
        "circle_lines" => gen_circle_lines(n.unwrap_or(300), seed),
        "bias_independence" => gen_bias_scenario(BiasScenario::Independence, n.unwrap_or(500), seed),
        "bias_dependence" => gen_bias_scenario(BiasScenario::Dependence, n.unwrap_or(500), seed),
        _ => return Err(PyValueError::new_err(format!("unknown generator `{kind}`"))),
    }
    .map_err(py_err)?;
    let dir = PathBuf::from(out_dir);
    std::fs::create_dir_all(&dir).map_err(|e| py_err(e.into()))?;
    write_dataset(&data, &dir, kind).map_err(py_err)?;
    Ok(dir.join(format!("{kind}.csv")).to_string_lossy().into_owned())
}

/// Root-split selection probabilities of the six variables.
#[pyfunction]
#[pyo3(signature = (dependent=false, trials=2000, n=500, seed=1))]
fn bias_probabilities(dependent: bool, trials: usize, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    let kind = if dependent {
        BiasScenario::Dependence
    } else {
        BiasScenario::Independence
    };
    Ok(run_bias_simulation(kind, trials, n, seed).map_err(py_err)?.probabilities)
}

#[pymodule]
fn pyuvtree(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTree>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(bias_probabilities, m)?)?;
    Ok(())
}
