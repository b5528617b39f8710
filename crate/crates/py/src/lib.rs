//! Python bindings. Reports and results come back as plain dicts.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde_json::Value;
use sqkd3::exact::exact_entropies as exact_entropies_rs;
use sqkd3::stats::{basis_error_direct, p_table_from_attack};
use sqkd3::verify::{run_all, VerifyInputs};
use sqkd3::{ChannelModel, ChannelScenario, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    match v {
        Value::Null => Ok(py.None().into_bound(py)),
        Value::Bool(b) => b.into_bound_py_any(py),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py),
            None => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py),
        },
        Value::String(s) => s.into_bound_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            Ok(list.into_any())
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            Ok(dict.into_any())
        }
    }
}

fn serialize_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &serde_json::to_value(value).map_err(json_err)?)
}

/// Parses a lowercase/kebab-case enum name through its serde representation.
fn parse_enum<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> PyResult<T> {
    serde_json::from_value(Value::String(s.to_ascii_lowercase()))
        .map_err(|_| PyValueError::new_err(format!("unknown {what} '{s}'")))
}

fn parse_model(s: &str) -> PyResult<ChannelModel> {
    match s.to_ascii_lowercase().as_str() {
        "dep" | "dependent" => Ok(ChannelModel::Dependent),
        "indep" | "independent" => Ok(ChannelModel::Independent),
        _ => Err(PyValueError::new_err(format!("unknown model '{s}'"))),
    }
}

fn parse_variant(s: &str) -> PyResult<sqkd3::Variant> {
    s.parse().map_err(py_err)
}

/// Evaluation conventions; the defaults reproduce the published thresholds.
#[pyclass(name = "Conventions", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyConventions(sqkd3::Conventions);

#[pymethods]
impl PyConventions {
    #[new]
    #[pyo3(signature = (p_mode = "printed", weighting = "printed", basis_convention = "as-stated", eigen = "literal"))]
    fn new(p_mode: &str, weighting: &str, basis_convention: &str, eigen: &str) -> PyResult<Self> {
        Ok(Self(sqkd3::Conventions {
            p_mode: parse_enum("p-mode", p_mode)?,
            weighting: parse_enum("weighting", weighting)?,
            basis_noise: parse_enum("basis convention", basis_convention)?,
            eigen: parse_enum("eigen handling", eigen)?,
        }))
    }

    #[staticmethod]
    fn paper() -> Self {
        Self(sqkd3::Conventions::paper())
    }

    #[staticmethod]
    fn physical() -> Self {
        Self(sqkd3::Conventions::physical())
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize_to_py(py, &self.0)
    }

    fn __repr__(&self) -> String {
        format!("Conventions({})", self.0)
    }
}

fn conventions_or_default(c: Option<PyRef<'_, PyConventions>>) -> sqkd3::Conventions {
    c.map(|c| c.0).unwrap_or_default()
}

/// Eve's forward and reverse isometries.
#[pyclass(name = "AttackModel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyAttackModel(sqkd3::AttackModel);

#[pymethods]
impl PyAttackModel {
    #[staticmethod]
    fn identity() -> Self {
        Self(sqkd3::AttackModel::identity())
    }

    #[staticmethod]
    #[pyo3(signature = (q_forward, q_reverse = None))]
    fn pauli_twirl(q_forward: f64, q_reverse: Option<f64>) -> PyResult<Self> {
        sqkd3::AttackModel::pauli_twirl(q_forward, q_reverse.unwrap_or(q_forward)).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn random(d_f: usize, d_r: usize, seed: u64) -> PyResult<Self> {
        sqkd3::AttackModel::random(d_f, d_r, seed).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        sqkd3::AttackModel::from_json(s).map(Self).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(py_err)
    }

    #[getter]
    fn d_f(&self) -> usize {
        self.0.d_f()
    }

    #[getter]
    fn d_r(&self) -> usize {
        self.0.d_r()
    }

    #[getter]
    fn eve_dim(&self) -> usize {
        self.0.eve_dim()
    }

    fn __repr__(&self) -> String {
        format!("AttackModel(d_f={}, d_r={})", self.0.d_f(), self.0.d_r())
    }
}

/// Observed statistics: the 27-entry table plus six alternative-basis rates.
#[pyclass(name = "StatTable", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyStatTable(sqkd3::StatTable);

#[pymethods]
impl PyStatTable {
    #[new]
    #[pyo3(signature = (p, basis_err, variant = "phi1"))]
    fn new(p: [[[f64; 3]; 3]; 3], basis_err: [f64; 6], variant: &str) -> PyResult<Self> {
        sqkd3::StatTable::new(p, basis_err, parse_variant(variant)?).map(Self).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (attack, variant = "phi1"))]
    fn from_attack(attack: PyRef<'_, PyAttackModel>, variant: &str) -> PyResult<Self> {
        sqkd3::StatTable::from_attack(&attack.0, parse_variant(variant)?).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        sqkd3::StatTable::from_json(s).map(Self).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(py_err)
    }

    /// `p[sent][bob][alice]`
    #[getter]
    fn p(&self) -> [[[f64; 3]; 3]; 3] {
        self.0.p
    }

    #[getter]
    fn basis_err(&self) -> [f64; 6] {
        self.0.basis_err
    }

    #[getter]
    fn variant(&self) -> String {
        self.0.variant.to_string()
    }

    fn t_values(&self) -> [f64; 4] {
        sqkd3::stats::t_values(&self.0.p)
    }
}

/// Key-rate report for a symmetric channel of strength `q`.
#[pyfunction]
#[pyo3(signature = (q, model = "dep", variant = "phi1", conventions = None))]
fn key_rate<'py>(
    py: Python<'py>,
    q: f64,
    model: &str,
    variant: &str,
    conventions: Option<PyRef<'py, PyConventions>>,
) -> PyResult<Bound<'py, PyAny>> {
    let scenario = ChannelScenario::new(q, parse_model(model)?, parse_variant(variant)?, conventions_or_default(conventions))
        .map_err(py_err)?;
    serialize_to_py(py, &sqkd3::key_rate(&scenario).map_err(py_err)?)
}

/// Key-rate report for arbitrary statistics.
#[pyfunction]
#[pyo3(signature = (table, conventions = None))]
fn key_rate_from_table<'py>(
    py: Python<'py>,
    table: PyRef<'py, PyStatTable>,
    conventions: Option<PyRef<'py, PyConventions>>,
) -> PyResult<Bound<'py, PyAny>> {
    let report = sqkd3::keyrate::key_rate_from_table(&table.0, &conventions_or_default(conventions)).map_err(py_err)?;
    serialize_to_py(py, &report)
}

/// Largest `Q` with a non-negative rate; `None` if the rate stays positive.
#[pyfunction]
#[pyo3(signature = (variant = "phi1", model = "dep", conventions = None))]
fn find_threshold(variant: &str, model: &str, conventions: Option<PyRef<'_, PyConventions>>) -> PyResult<Option<f64>> {
    match sqkd3::find_threshold(parse_variant(variant)?, parse_model(model)?, conventions_or_default(conventions)) {
        Ok(q) => Ok(Some(q)),
        Err(Error::NoThreshold { .. }) => Ok(None),
        Err(e) => Err(py_err(e)),
    }
}

/// Monte Carlo run; defaults to the twirl attack at `q`.
#[pyfunction]
#[pyo3(signature = (n, q = 0.0, variant = "phi1", seed = 7, attack = None, include_raw_key = false))]
fn simulate<'py>(
    py: Python<'py>,
    n: u64,
    q: f64,
    variant: &str,
    seed: u64,
    attack: Option<PyRef<'py, PyAttackModel>>,
    include_raw_key: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let variant = parse_variant(variant)?;
    let attack = match attack {
        Some(a) => a.0.clone(),
        None => sqkd3::AttackModel::pauli_twirl(q, q).map_err(py_err)?,
    };
    let fams = sqkd3::VectorFamilies::from_attack(&attack);
    let analytic = p_table_from_attack(&fams);
    let analytic_err = basis_error_direct(&fams, variant);
    let mut sim = py.detach(|| sqkd3::run_protocol(n, &attack, variant, seed)).map_err(py_err)?;
    let deviation = sim.max_deviation_sigma(&analytic);
    let raw_error = sim.raw_key_error_rate();
    let raw_len = sim.raw_key_pairs.len();
    if !include_raw_key {
        sim.raw_key_pairs.clear();
    }
    let out = serialize_to_py(py, &sim)?;
    let dict = out.cast::<PyDict>()?;
    if !include_raw_key {
        dict.del_item("raw_key_pairs")?;
    }
    dict.set_item("analytic", analytic)?;
    dict.set_item("analytic_basis_err", analytic_err)?;
    dict.set_item("max_deviation_sigma", deviation)?;
    dict.set_item("raw_key_length", raw_len)?;
    dict.set_item("raw_key_error_rate", raw_error)?;
    Ok(out)
}

/// Runs the invariant suite; one dict per group.
#[pyfunction]
#[pyo3(signature = (seed = 2024))]
fn verify<'py>(py: Python<'py>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let inputs = VerifyInputs { seed, ..VerifyInputs::default() };
    let groups = py.detach(|| run_all(&inputs)).map_err(py_err)?;
    serialize_to_py(py, &groups)
}

/// Exact conditional entropies of an attack, from its full joint state.
#[pyfunction]
fn exact_entropies<'py>(py: Python<'py>, attack: PyRef<'py, PyAttackModel>) -> PyResult<Bound<'py, PyAny>> {
    let e = exact_entropies_rs(&attack.0).map_err(py_err)?;
    let out = serialize_to_py(py, &e)?;
    let dict = out.cast::<PyDict>()?;
    dict.set_item("s_b_given_e", e.s_b_given_e())?;
    dict.set_item("s_b_given_ec", e.s_b_given_ec())?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "sqkd3")]
fn sqkd3_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Adds the classes and functions to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConventions>()?;
    m.add_class::<PyAttackModel>()?;
    m.add_class::<PyStatTable>()?;
    m.add_function(wrap_pyfunction!(key_rate, m)?)?;
    m.add_function(wrap_pyfunction!(key_rate_from_table, m)?)?;
    m.add_function(wrap_pyfunction!(find_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(exact_entropies, m)?)?;
    m.add("Q_MAX", ChannelScenario::Q_MAX)?;
    Ok(())
}
