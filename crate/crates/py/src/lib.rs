use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use trotterr::bounds::{self, ConstantMode, HamiltonianNorm, DEFAULT_TERM_CAP};
use trotterr::ensembles::{self, EnsembleKind};
use trotterr::exact::ExactEvolver;
use trotterr::haar;
use trotterr::otoc::{self, OtocConfig};
use trotterr::pauli::NormMethod;
use trotterr::search::{self, Criterion, SearchOptions};
use trotterr::{hamiltonian, EvolutionPlan, HamiltonianInstance, StateVector};

fn py_err(e: trotterr::Error) -> PyErr {
    use trotterr::Error as E;
    match e {
        E::Capability(_) | E::SearchOverflow { .. } => PyMemoryError::new_err(e.to_string()),
        E::Convergence { .. } | E::Validation(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = trotterr::Error>>(s: &str) -> PyResult<T> {
    s.parse::<T>().map_err(py_err)
}

/// A Hamiltonian split into ordered term groups.
#[pyclass(name = "Hamiltonian", module = "trotterr", frozen, skip_from_py_object)]
pub struct PyHamiltonian {
    inner: HamiltonianInstance,
}

#[pymethods]
impl PyHamiltonian {
    #[staticmethod]
    fn heisenberg_1d(n: usize, seed: u64) -> PyResult<Self> {
        Ok(PyHamiltonian {
            inner: hamiltonian::heisenberg_1d(n, seed).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn power_law(n: usize, alpha: f64, seed: u64) -> PyResult<Self> {
        Ok(PyHamiltonian {
            inner: hamiltonian::power_law(n, alpha, seed).map_err(py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (n, k, seed, terms_per_support = 1))]
    fn k_local_random(n: usize, k: usize, seed: u64, terms_per_support: usize) -> PyResult<Self> {
        Ok(PyHamiltonian {
            inner: hamiltonian::k_local_random(n, k, terms_per_support, seed).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyHamiltonian {
            inner: HamiltonianInstance::from_json(text).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn model(&self) -> &'static str {
        self.inner.model.name()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn group_labels(&self) -> Vec<String> {
        self.inner.groups.iter().map(|g| g.label.clone()).collect()
    }

    /// `(group, pauli, coefficient)` triples in group order.
    fn terms(&self) -> Vec<(String, String, f64)> {
        self.inner
            .groups
            .iter()
            .flat_map(|g| g.op.terms().iter().map(|(s, c)| (g.label.clone(), s.label(), c.re)))
            .collect()
    }

    /// Dense matrix of the full Hamiltonian as nested rows.
    fn dense(&self) -> PyResult<Vec<Vec<Complex64>>> {
        if self.inner.n > trotterr::DENSE_CAP {
            return Err(PyMemoryError::new_err("dense matrix above the size cap"));
        }
        let m = self.inner.total().to_dense();
        Ok((0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Hamiltonian(model={}, n={}, groups={}, seed={})",
            self.inner.model,
            self.inner.n,
            self.inner.groups.len(),
            self.inner.seed
        )
    }
}

#[pyclass(name = "BoundReport", module = "trotterr", frozen, get_all)]
pub struct PyBoundReport {
    name: String,
    value: f64,
    t: f64,
    r: u64,
    p: usize,
    assumptions_ok: bool,
    flags: Vec<String>,
    params: BTreeMap<String, f64>,
    intermediates: BTreeMap<String, f64>,
}

#[pymethods]
impl PyBoundReport {
    fn __repr__(&self) -> String {
        format!("BoundReport(name={}, value={:e}, ok={})", self.name, self.value, self.assumptions_ok)
    }
}

impl From<bounds::BoundReport> for PyBoundReport {
    fn from(b: bounds::BoundReport) -> Self {
        PyBoundReport {
            name: b.name,
            value: b.value,
            t: b.t,
            r: b.r,
            p: b.p,
            assumptions_ok: b.assumptions_ok,
            flags: b.flags,
            params: b.params,
            intermediates: b.intermediates,
        }
    }
}

fn constant_mode(s: &str) -> PyResult<ConstantMode> {
    match s {
        "omitted" => Ok(ConstantMode::Omitted),
        "proof" => Ok(ConstantMode::Proof),
        other => Err(PyValueError::new_err(format!("unknown constant mode {other:?}"))),
    }
}

/// Named analytic bound: triangle, tp, alpha_comm, counting or interference.
#[pyfunction]
#[pyo3(signature = (h, name, p, t, r, constant = "omitted", h_norm = "four_n"))]
fn bound(
    h: &PyHamiltonian,
    name: &str,
    p: usize,
    t: f64,
    r: u64,
    constant: &str,
    h_norm: &str,
) -> PyResult<PyBoundReport> {
    let h = &h.inner;
    let mode = constant_mode(constant)?;
    let rep = match name {
        "triangle" => bounds::triangle_bound(h, p, t, r),
        "tp" => bounds::tp_bound(h, p, t, r, DEFAULT_TERM_CAP, mode),
        "alpha_comm" | "worst" => {
            let m = if h.n <= 8 { NormMethod::Dense } else { NormMethod::PowerIteration };
            bounds::worst_case_bound(h, p, t, r, m, DEFAULT_TERM_CAP, mode)
        }
        "counting" => match h.model {
            trotterr::Model::PowerLaw => {
                bounds::counting_bound_power_law(h.n, h.params.alpha.unwrap_or(0.0), t, r)
            }
            _ => bounds::counting_bound_nn(h.n, t, r, p),
        },
        "interference" => {
            let norm = match h_norm {
                "four_n" => HamiltonianNorm::FourN,
                "computed" => HamiltonianNorm::Computed,
                other => return Err(PyValueError::new_err(format!("unknown norm {other:?}"))),
            };
            bounds::interference_bound(h, t, r, norm)
        }
        other => return Err(PyValueError::new_err(format!("unknown bound {other:?}"))),
    };
    Ok(rep.map_err(py_err)?.into())
}

fn state(amps: Vec<Complex64>) -> PyResult<StateVector> {
    StateVector::new(amps).map_err(py_err)
}

/// `U_p(t/r)^r |psi>` applied matrix-free.
#[pyfunction]
fn trotter_evolve(h: &PyHamiltonian, p: usize, t: f64, r: u64, psi: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let plan = EvolutionPlan::new(&h.inner, p, t, r).map_err(py_err)?;
    Ok(plan.apply(&state(psi)?).map_err(py_err)?.into_inner())
}

/// `e^{-iHt} |psi>`.
#[pyfunction]
fn exact_evolve(h: &PyHamiltonian, t: f64, psi: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let ev = ExactEvolver::auto(&h.inner.total()).map_err(py_err)?;
    Ok(ev.evolve(&state(psi)?, t).map_err(py_err)?.into_inner())
}

#[pyclass(name = "ErrorStats", module = "trotterr", frozen, get_all)]
pub struct PyErrorStats {
    samples: usize,
    mean_sqrt_s: f64,
    std_sqrt_s: f64,
    mean_s: f64,
    var_s: f64,
    seed: u64,
}

#[pymethods]
impl PyErrorStats {
    fn __repr__(&self) -> String {
        format!("ErrorStats(N={}, mean_sqrtS={:e}, std_sqrtS={:e})", self.samples, self.mean_sqrt_s, self.std_sqrt_s)
    }
}

/// Statistics of `||(U_p^r - e^{-iHt}) psi||` over sampled inputs.
#[pyfunction]
#[pyo3(signature = (h, p, t, r, samples = 20, seed = 0, ensemble = "haar"))]
fn empirical_error(
    h: &PyHamiltonian,
    p: usize,
    t: f64,
    r: u64,
    samples: usize,
    seed: u64,
    ensemble: &str,
) -> PyResult<PyErrorStats> {
    let kind: EnsembleKind = parse(ensemble)?;
    let states = ensembles::sample_states(kind, h.inner.n, samples, seed);
    let prob = search::EmpiricalProblem::new(&h.inner, p, t, &states, 1e-12).map_err(py_err)?;
    let st = prob.stats(r, seed).map_err(py_err)?;
    Ok(PyErrorStats {
        samples: st.samples,
        mean_sqrt_s: st.mean_sqrt_s,
        std_sqrt_s: st.std_sqrt_s,
        mean_s: st.mean_s,
        var_s: st.var_s,
        seed: st.seed,
    })
}

/// Minimal Trotter number meeting `eps` under `criterion`.
#[pyfunction]
#[pyo3(signature = (h, p, t, eps, criterion = "empirical", samples = 20, seed = 0))]
fn minimal_trotter_number(
    h: &PyHamiltonian,
    p: usize,
    t: f64,
    eps: f64,
    criterion: &str,
    samples: usize,
    seed: u64,
) -> PyResult<u64> {
    let c: Criterion = parse(criterion)?;
    let opts = SearchOptions::default();
    let res = match c {
        Criterion::EmpiricalAvg => {
            search::search_r_empirical(&h.inner, p, t, eps, EnsembleKind::Haar, samples, seed, opts)
        }
        Criterion::EmpiricalWorst => search::search_r_worst(&h.inner, p, t, eps, opts),
        _ => search::search_r_from_bound(c, &h.inner, p, t, eps, opts),
    };
    Ok(res.map_err(py_err)?.r_min)
}

/// `(value, method, std_err)` of `E sqrt(<psi|A|psi>)` for Haar `psi`.
#[pyfunction]
#[pyo3(signature = (spectrum, mc_samples = 20000, seed = 0))]
fn haar_mean_sqrt(spectrum: Vec<f64>, mc_samples: usize, seed: u64) -> PyResult<(f64, &'static str, f64)> {
    let m = haar::exact_mean_sqrt(&spectrum, mc_samples, seed).map_err(py_err)?;
    Ok((m.value, m.method.name(), m.std_err))
}

#[pyfunction]
#[pyo3(signature = (spectrum, mc_samples = 20000, seed = 0))]
fn d_statistic(spectrum: Vec<f64>, mc_samples: usize, seed: u64) -> PyResult<(f64, &'static str, f64)> {
    let d = haar::d_statistic(&spectrum, mc_samples, seed).map_err(py_err)?;
    Ok((d.value, d.method.name(), d.std_err))
}

/// `(exact, trotterized, bound_avg, bound_worst)` for the `Z_1`, `X_n` correlator.
#[pyfunction]
fn otoc_values(h: &PyHamiltonian, t: f64, p: usize, r: u64) -> PyResult<(f64, f64, f64, f64)> {
    let cfg = OtocConfig::new(&h.inner, t, p, r).map_err(py_err)?;
    let row = otoc::otoc_row(&cfg).map_err(py_err)?;
    Ok((row.otoc_exact, row.otoc_trott, row.bound_avg, row.bound_worst))
}

#[pymodule]
#[pyo3(name = "trotterr")]
fn trotterr_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHamiltonian>()?;
    m.add_class::<PyBoundReport>()?;
    m.add_class::<PyErrorStats>()?;
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    m.add_function(wrap_pyfunction!(trotter_evolve, m)?)?;
    m.add_function(wrap_pyfunction!(exact_evolve, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_error, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_trotter_number, m)?)?;
    m.add_function(wrap_pyfunction!(haar_mean_sqrt, m)?)?;
    m.add_function(wrap_pyfunction!(d_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(otoc_values, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
