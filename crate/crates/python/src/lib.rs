//! Python bindings: lattice arenas, vectors and modes, and the checks built
//! on them. Rationals cross the boundary as strings such as `"-1/3"`.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use vertexlab::algebra::{mode, virasoro, VertexAlgebra};
use vertexlab::autgroup::{torus_element, weyl_reflection, AutContext, CandidateMap};
use vertexlab::cli::{run_suite, RunConfig, SuiteName};
use vertexlab::dercalc;
use vertexlab::exactlin::DenseMatrix;
use vertexlab::fixpoint;
use vertexlab::fockspace::{Cocycle, Lattice, LatticeVoa};
use vertexlab::{GradedVector, Rational};

fn py_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rational(s: &str) -> PyResult<Rational> {
    s.parse().map_err(|_| PyValueError::new_err(format!("not a rational: {s:?}")))
}

fn to_py_json(py: Python<'_>, value: &impl serde::Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(py_err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// A rank ≤ 2 lattice vertex algebra truncated at weight `cutoff`.
#[pyclass(name = "LatticeVoa", frozen)]
struct PyLatticeVoa {
    inner: Arc<LatticeVoa>,
}

/// An element of a truncated arena.
#[pyclass(name = "Vector", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyVector {
    voa: Arc<LatticeVoa>,
    v: GradedVector,
}

impl PyLatticeVoa {
    fn wrap(&self, v: GradedVector) -> PyVector {
        PyVector { voa: self.inner.clone(), v }
    }

    fn same(&self, x: &PyVector) -> PyResult<()> {
        if Arc::ptr_eq(&self.inner, &x.voa) {
            Ok(())
        } else {
            Err(PyValueError::new_err("vector belongs to another arena"))
        }
    }
}

#[pymethods]
impl PyLatticeVoa {
    #[new]
    #[pyo3(signature = (gram, cutoff, cocycle=None))]
    fn new(gram: Vec<Vec<i64>>, cutoff: u32, cocycle: Option<Vec<Vec<i8>>>) -> PyResult<Self> {
        let lattice = match cocycle {
            Some(t) => Lattice::with_cocycle(gram, Cocycle::from_table(t)),
            None => Lattice::new(gram),
        }
        .map_err(py_err)?;
        Ok(PyLatticeVoa { inner: Arc::new(LatticeVoa::build(lattice, cutoff).map_err(py_err)?) })
    }

    #[getter]
    fn cutoff(&self) -> u32 {
        self.inner.cutoff()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn central_charge(&self) -> String {
        self.inner.central_charge().to_string()
    }

    fn dims(&self) -> Vec<usize> {
        self.inner.grading().dims()
    }

    fn labels(&self, weight: u32) -> Vec<String> {
        self.inner.grading().range(weight).map(|i| self.inner.label(i)).collect()
    }

    fn vacuum(&self) -> PyVector {
        self.wrap(self.inner.vacuum())
    }

    fn conformal(&self) -> PyVector {
        self.wrap(self.inner.conformal().clone())
    }

    fn exponential(&self, charge: Vec<i64>) -> PyResult<PyVector> {
        Ok(self.wrap(self.inner.exponential(&charge).map_err(py_err)?))
    }

    fn heisenberg(&self, i: usize) -> PyResult<PyVector> {
        if i >= self.inner.rank() {
            return Err(PyValueError::new_err(format!("index {i} is outside rank {}", self.inner.rank())));
        }
        Ok(self.wrap(self.inner.heisenberg_vector(i)))
    }

    /// `u_n v`.
    fn mode(&self, u: &PyVector, n: i64, v: &PyVector) -> PyResult<PyVector> {
        self.same(u)?;
        self.same(v)?;
        Ok(self.wrap(mode(&*self.inner, &u.v, n, &v.v)))
    }

    /// `L(k) v`.
    fn virasoro(&self, k: i64, v: &PyVector) -> PyResult<PyVector> {
        self.same(v)?;
        Ok(self.wrap(virasoro(&*self.inner, k, &v.v)))
    }

    fn __repr__(&self) -> String {
        format!("LatticeVoa(gram={:?}, cutoff={})", self.inner.lattice().gram(), self.inner.cutoff())
    }
}

#[pymethods]
impl PyVector {
    /// `(label, coefficient)` pairs in basis order.
    fn terms(&self) -> Vec<(String, String)> {
        self.v.terms.iter().map(|(i, c)| (self.voa.label(*i), c.to_string())).collect()
    }

    fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    /// Whether some contribution fell above the cutoff.
    #[getter]
    fn truncated(&self) -> bool {
        self.v.truncated
    }

    /// The weight of a nonzero homogeneous vector.
    #[getter]
    fn weight(&self) -> Option<u32> {
        self.v.weight(self.voa.grading())
    }

    fn scale(&self, c: &str) -> PyResult<PyVector> {
        Ok(PyVector { voa: self.voa.clone(), v: self.v.scale(&rational(c)?) })
    }

    fn __add__(&self, other: &PyVector) -> PyVector {
        PyVector { voa: self.voa.clone(), v: self.v.add(&other.v) }
    }

    fn __sub__(&self, other: &PyVector) -> PyVector {
        PyVector { voa: self.voa.clone(), v: self.v.sub(&other.v) }
    }

    fn __eq__(&self, other: &PyVector) -> bool {
        Arc::ptr_eq(&self.voa, &other.voa) && self.v == other.v
    }

    fn __repr__(&self) -> String {
        if self.v.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = self.terms().into_iter().map(|(l, c)| format!("({c})*{l}")).collect();
        parts.join(" + ")
    }
}

fn verdict_for(py: Python<'_>, voa: &LatticeVoa, gen_bound: u32, g: &CandidateMap) -> PyResult<Py<PyAny>> {
    let ctx = AutContext::new(voa, gen_bound).map_err(py_err)?;
    to_py_json(py, &ctx.check_automorphism(g).map_err(py_err)?)
}

/// Verdict for the lift of `-1` restricted to `V_{≤n}`.
#[pyfunction]
fn check_theta(py: Python<'_>, voa: &PyLatticeVoa, gen_bound: u32) -> PyResult<Py<PyAny>> {
    verdict_for(py, &voa.inner, gen_bound, &weyl_reflection(&voa.inner, gen_bound))
}

/// Verdict for the torus element scaling `e^λ` by `Π s_i^{λ_i}`.
#[pyfunction]
fn check_torus(py: Python<'_>, voa: &PyLatticeVoa, gen_bound: u32, s: Vec<String>) -> PyResult<Py<PyAny>> {
    let s: Vec<Rational> = s.iter().map(|x| rational(x)).collect::<PyResult<_>>()?;
    if s.len() != voa.inner.rank() {
        return Err(PyValueError::new_err("one scale per lattice basis vector"));
    }
    verdict_for(py, &voa.inner, gen_bound, &torus_element(&voa.inner, gen_bound, &s))
}

/// Verdict for a candidate given as one square block per weight `0..=n`.
#[pyfunction]
fn check_candidate(py: Python<'_>, voa: &PyLatticeVoa, blocks: Vec<Vec<Vec<String>>>) -> PyResult<Py<PyAny>> {
    if blocks.is_empty() {
        return Err(PyValueError::new_err("need at least the weight-0 block"));
    }
    let mats = blocks
        .iter()
        .map(|b| {
            let rows: Vec<Vec<Rational>> = b.iter().map(|r| r.iter().map(|x| rational(x)).collect()).collect::<PyResult<_>>()?;
            Ok(DenseMatrix::from_rows(rows))
        })
        .collect::<PyResult<Vec<_>>>()?;
    let g = CandidateMap::from_blocks(&*voa.inner, mats).map_err(py_err)?;
    verdict_for(py, &voa.inner, (blocks.len() - 1) as u32, &g)
}

/// Dimension of the derivation space and its stability over cutoffs.
#[pyfunction]
fn solve_derivations(py: Python<'_>, voa: &PyLatticeVoa, gen_bound: u32) -> PyResult<Py<PyAny>> {
    let d = dercalc::solve_derivations(&*voa.inner, gen_bound).map_err(py_err)?;
    let contains_inner = d.contains_inner(&*voa.inner).map_err(py_err)?;
    to_py_json(
        py,
        &serde_json::json!({
            "dim": d.dim(),
            "unknowns": d.unknowns,
            "dims_by_cutoff": d.dims_by_cutoff,
            "stable": d.stable(),
            "contains_inner": contains_inner,
        }),
    )
}

/// Gram matrix of `(u, v)_n = tr_{V_n} o(u) o(v)` on `V_1`.
#[pyfunction]
fn trace_form(voa: &PyLatticeVoa, n: u32) -> PyResult<Vec<Vec<String>>> {
    Ok(dercalc::trace_form(&*voa.inner, n).map_err(py_err)?.gram.to_strings())
}

/// Smallest `n` with a nondegenerate trace form, and its determinant.
#[pyfunction]
fn nondegeneracy_witness(voa: &PyLatticeVoa) -> PyResult<(Option<u32>, Option<String>)> {
    let w = dercalc::nondegeneracy_witness(&*voa.inner).map_err(py_err)?;
    Ok((w.n, w.determinant.map(|d| d.to_string())))
}

#[pyfunction]
fn radical_check(py: Python<'_>, voa: &PyLatticeVoa, n_prime: u32) -> PyResult<Py<PyAny>> {
    to_py_json(py, &dercalc::radical_check(&*voa.inner, n_prime).map_err(py_err)?)
}

/// Graded dimensions of the fixed points of `(e^α)_0` on `V_{A_1}`.
#[pyfunction]
fn fixed_point_dims(cutoff: u32) -> PyResult<Vec<usize>> {
    let parent = Arc::new(LatticeVoa::build(fixpoint::a1_lattice(), cutoff).map_err(py_err)?);
    Ok(fixpoint::fixed_point_subalgebra(parent).map_err(py_err)?.dims())
}

/// Graded dimensions of the ideal generated by `e^{nα}` in the fixed points.
#[pyfunction]
fn ideal_chain_dims(cutoff: u32, n: u32) -> PyResult<Vec<usize>> {
    let parent = Arc::new(LatticeVoa::build(fixpoint::a1_lattice(), cutoff).map_err(py_err)?);
    let fpa = fixpoint::fixed_point_subalgebra(parent).map_err(py_err)?;
    Ok(fixpoint::ideal_chain(&fpa, n).map_err(py_err)?.dims)
}

/// One verification suite as a report dict, as `vertexlab verify` prints it.
#[pyfunction]
#[pyo3(signature = (suite, gram, max_weight=None, gen_bound=None))]
fn verify(py: Python<'_>, suite: &str, gram: Vec<Vec<i64>>, max_weight: Option<u32>, gen_bound: Option<u32>) -> PyResult<Py<PyAny>> {
    let name = SuiteName::EACH
        .into_iter()
        .find(|s| s.as_str() == suite)
        .ok_or_else(|| PyValueError::new_err(format!("unknown suite {suite:?}")))?;
    let lattice = Lattice::new(gram).map_err(py_err)?;
    let cfg = RunConfig::new(Some(lattice), max_weight, gen_bound).map_err(py_err)?;
    let rep = py.detach(|| run_suite(name, &cfg)).map_err(py_err)?;
    to_py_json(py, &rep.to_json())
}

#[pymodule]
fn pyvertexlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLatticeVoa>()?;
    m.add_class::<PyVector>()?;
    m.add_function(wrap_pyfunction!(check_theta, m)?)?;
    m.add_function(wrap_pyfunction!(check_torus, m)?)?;
    m.add_function(wrap_pyfunction!(check_candidate, m)?)?;
    m.add_function(wrap_pyfunction!(solve_derivations, m)?)?;
    m.add_function(wrap_pyfunction!(trace_form, m)?)?;
    m.add_function(wrap_pyfunction!(nondegeneracy_witness, m)?)?;
    m.add_function(wrap_pyfunction!(radical_check, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point_dims, m)?)?;
    m.add_function(wrap_pyfunction!(ideal_chain_dims, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
