//! Python bindings: statistics, permutation nulls, dFDR estimation and
//! threshold selection on plain lists of floats.

use dfdr::decision::{control_dfdr, maximize_desirability, DecisionResult};
use dfdr::estimators;
use dfdr::{CostBenefit, DataMatrix, DfdrError, PermutationPlan, Pi0Choice, Pi0Estimate, StatisticSet};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: DfdrError) -> PyErr {
    match e {
        DfdrError::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix(values: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> PyResult<DataMatrix> {
    let m = values.len();
    let n = values.first().map_or(0, Vec::len);
    let labels = labels.unwrap_or_else(|| vec![String::new(); n]);
    DataMatrix::from_rows(
        &values,
        (0..m).map(|i| format!("f{i}")).collect(),
        (0..n).map(|j| format!("s{j}")).collect(),
        labels,
    )
    .map_err(to_py)
}

fn rows(m: &DataMatrix) -> Vec<Vec<f64>> {
    (0..m.n_features()).map(|i| m.row(i).to_vec()).collect()
}

fn stats(observed: Vec<f64>, null: Vec<f64>) -> PyResult<StatisticSet> {
    StatisticSet::new(observed, null).map_err(to_py)
}

fn pi0_choice(pi0: Option<&Bound<'_, PyAny>>) -> PyResult<Pi0Choice> {
    let Some(obj) = pi0 else {
        return Ok(Pi0Choice::Estimate);
    };
    if let Ok(s) = obj.extract::<String>() {
        return match s.as_str() {
            "estimate" => Ok(Pi0Choice::Estimate),
            "one" => Ok(Pi0Choice::One),
            _ => Err(PyValueError::new_err(format!("unknown pi0 mode '{s}'"))),
        };
    }
    let v: f64 = obj.extract()?;
    Pi0Estimate::user(v).map_err(to_py)?;
    Ok(Pi0Choice::Value(v))
}

fn cost_benefit(cost_ratio: Option<f64>, p_threshold: Option<f64>) -> PyResult<CostBenefit> {
    match (cost_ratio, p_threshold) {
        (Some(_), Some(_)) => Err(PyValueError::new_err(
            "give cost_ratio or p_threshold, not both",
        )),
        (Some(r), None) => CostBenefit::from_ratio(r).map_err(to_py),
        (None, p) => CostBenefit::from_p_threshold(p.unwrap_or(0.05)).map_err(to_py),
    }
}

/// Outcome of a threshold selection.
#[pyclass(name = "DecisionResult", frozen)]
pub struct PyDecisionResult {
    inner: DecisionResult,
}

#[pymethods]
impl PyDecisionResult {
    /// Chosen threshold, or None when nothing is rejected.
    #[getter]
    fn tau(&self) -> Option<f64> {
        self.inner.tau
    }

    /// Indices of the rejected tests.
    #[getter]
    fn rejected(&self) -> Vec<usize> {
        self.inner.rejected.clone()
    }

    #[getter]
    fn discoveries(&self) -> usize {
        self.inner.discoveries()
    }

    #[getter]
    fn dfdr(&self) -> f64 {
        self.inner.dfdr
    }

    #[getter]
    fn desirability(&self) -> f64 {
        self.inner.desirability
    }

    #[getter]
    fn pi0(&self) -> f64 {
        self.inner.pi0.value
    }

    #[getter]
    fn lambda_(&self) -> Option<f64> {
        self.inner.pi0.lambda
    }

    /// `(tau, desirability, dfdr, discoveries)` for every candidate threshold.
    #[getter]
    fn curve(&self) -> Vec<(f64, f64, f64, usize)> {
        self.inner
            .curve
            .iter()
            .map(|p| (p.tau, p.desirability, p.dfdr, p.discoveries))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "DecisionResult(tau={}, discoveries={}, dfdr={}, desirability={}, pi0={})",
            self.inner.tau.map_or("None".to_string(), |t| t.to_string()),
            self.inner.discoveries(),
            self.inner.dfdr,
            self.inner.desirability,
            self.inner.pi0.value
        )
    }
}

/// Median-normalizes each column and applies the signed log transform.
#[pyfunction]
fn preprocess(values: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let m = matrix(values, None)?;
    Ok(rows(&dfdr::preprocess(&m).map_err(to_py)?))
}

/// Absolute Welch t-statistic per row between two labelled groups.
#[pyfunction]
fn two_sample_abs_t(
    values: Vec<Vec<f64>>,
    labels: Vec<String>,
    group_a: &str,
    group_b: &str,
) -> PyResult<Vec<f64>> {
    let m = matrix(values, Some(labels))?;
    dfdr::two_sample_abs_t(&m, group_a, group_b).map_err(to_py)
}

/// Column-permutation null statistics, ordered by permutation then row.
#[pyfunction]
#[pyo3(signature = (values, labels, group_a, group_b, permutations = 1000, seed = 1))]
fn permutation_null(
    py: Python<'_>,
    values: Vec<Vec<f64>>,
    labels: Vec<String>,
    group_a: &str,
    group_b: &str,
    permutations: usize,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let m = matrix(values, Some(labels))?;
    let plan = PermutationPlan::new(permutations, seed).map_err(to_py)?;
    py.detach(|| dfdr::permutation_null(&m, group_a, group_b, &plan, &dfdr::AbsWelchT))
        .map_err(to_py)
}

#[pyfunction]
fn choose_lambda(null: Vec<f64>) -> f64 {
    estimators::choose_lambda(&null)
}

/// Returns `(pi0, lambda)`; lambda is chosen automatically when omitted.
#[pyfunction]
#[pyo3(signature = (observed, null, lambda_ = None))]
fn estimate_pi0(observed: Vec<f64>, null: Vec<f64>, lambda_: Option<f64>) -> PyResult<(f64, f64)> {
    let s = stats(observed, null)?;
    let e = match lambda_ {
        Some(l) => estimators::estimate_pi0(s.observed(), s.null(), l),
        None => estimators::estimate_pi0_auto(&s),
    }
    .map_err(to_py)?;
    Ok((e.value, e.lambda.unwrap_or(f64::NAN)))
}

/// dFDR estimate for rejecting every statistic at or above `tau`.
#[pyfunction]
#[pyo3(signature = (observed, null, tau, pi0 = None))]
fn estimate_dfdr(
    observed: Vec<f64>,
    null: Vec<f64>,
    tau: f64,
    pi0: Option<&Bound<'_, PyAny>>,
) -> PyResult<f64> {
    let s = stats(observed, null)?;
    let p = pi0_choice(pi0)?.resolve(&s).map_err(to_py)?;
    Ok(estimators::estimate_dfdr_at_tau(&s, &p, tau).value)
}

#[pyfunction]
#[pyo3(signature = (observed, null, tau, benefit = 1.0, cost = 19.0, pi0 = None))]
fn estimate_desirability(
    observed: Vec<f64>,
    null: Vec<f64>,
    tau: f64,
    benefit: f64,
    cost: f64,
    pi0: Option<&Bound<'_, PyAny>>,
) -> PyResult<f64> {
    let s = stats(observed, null)?;
    let p = pi0_choice(pi0)?.resolve(&s).map_err(to_py)?;
    let cb = CostBenefit::new(benefit, cost).map_err(to_py)?;
    Ok(estimators::estimate_desirability(&s, &p, &cb, tau))
}

#[pyfunction]
fn p_to_cost_ratio(p: f64) -> PyResult<f64> {
    estimators::p_to_cost_ratio(p).map_err(to_py)
}

/// Threshold maximizing the estimated desirability.
#[pyfunction(name = "maximize_desirability")]
#[pyo3(signature = (observed, null, cost_ratio = None, p_threshold = None, pi0 = None))]
fn py_maximize_desirability(
    observed: Vec<f64>,
    null: Vec<f64>,
    cost_ratio: Option<f64>,
    p_threshold: Option<f64>,
    pi0: Option<&Bound<'_, PyAny>>,
) -> PyResult<PyDecisionResult> {
    let s = stats(observed, null)?;
    let cb = cost_benefit(cost_ratio, p_threshold)?;
    let p = pi0_choice(pi0)?.resolve(&s).map_err(to_py)?;
    Ok(PyDecisionResult {
        inner: maximize_desirability(&s, &p, &cb),
    })
}

/// Smallest threshold with estimated dFDR at most `alpha`.
#[pyfunction(name = "control_dfdr")]
#[pyo3(signature = (observed, null, alpha = 0.05, pi0 = None))]
fn py_control_dfdr(
    observed: Vec<f64>,
    null: Vec<f64>,
    alpha: f64,
    pi0: Option<&Bound<'_, PyAny>>,
) -> PyResult<PyDecisionResult> {
    let s = stats(observed, null)?;
    let p = pi0_choice(pi0)?.resolve(&s).map_err(to_py)?;
    let cb = CostBenefit::from_p_threshold(alpha).map_err(to_py)?;
    Ok(PyDecisionResult {
        inner: control_dfdr(&s, &p, alpha, &cb).map_err(to_py)?,
    })
}

#[pymodule]
pub fn pydfdr(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDecisionResult>()?;
    m.add_function(wrap_pyfunction!(preprocess, m)?)?;
    m.add_function(wrap_pyfunction!(two_sample_abs_t, m)?)?;
    m.add_function(wrap_pyfunction!(permutation_null, m)?)?;
    m.add_function(wrap_pyfunction!(choose_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_pi0, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_dfdr, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_desirability, m)?)?;
    m.add_function(wrap_pyfunction!(p_to_cost_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(py_maximize_desirability, m)?)?;
    m.add_function(wrap_pyfunction!(py_control_dfdr, m)?)?;
    Ok(())
}
