//! Python bindings for `ramlab-core`.
//!
//! Words are passed as strings over `a, A, b, B, …` (uppercase is the
//! inverse, `1` is the identity). Exact expectations come back as
//! `fractions.Fraction`, structured reports as plain dicts.

use num_rational::BigRational;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ramlab_core::core_graph as cg;
use ramlab_core::covers::{self, seeded_rng};
use ramlab_core::spectral::Operator;
use ramlab_core::words::{evaluate_word, WordMode};
use ramlab_core::{expansion, growth, moebius, primitivity, spectral};
use ramlab_core::{BaseGraph, CoverGraph, Guards, MultiGraph, Permutation, PrimitivityRank, RawWord, ReducedWord};

create_exception!(ramlab, GuardError, PyException, "An enumeration guard would be exceeded.");

fn err(e: ramlab_core::Error) -> PyErr {
    if e.is_guard() {
        GuardError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for ramlab_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn guards() -> PyResult<Guards> {
    Guards::from_env().py()
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn fraction<'py>(py: Python<'py>, r: &BigRational) -> PyResult<Bound<'py, PyAny>> {
    let int = py.import("builtins")?.getattr("int")?;
    let num = int.call1((r.numer().to_string(),))?;
    let den = int.call1((r.denom().to_string(),))?;
    py.import("fractions")?.getattr("Fraction")?.call1((num, den))
}

fn rank_to_py(py: Python<'_>, pi: PrimitivityRank) -> PyResult<Py<PyAny>> {
    Ok(match pi {
        PrimitivityRank::Finite(m) => m.into_pyobject(py)?.into_any().unbind(),
        PrimitivityRank::Infinite => f64::INFINITY.into_pyobject(py)?.into_any().unbind(),
    })
}

fn rank_from_py(pi: &Bound<'_, PyAny>) -> PyResult<PrimitivityRank> {
    if let Ok(m) = pi.extract::<usize>() {
        return Ok(PrimitivityRank::Finite(m));
    }
    match pi.extract::<f64>() {
        Ok(x) if x == f64::INFINITY => Ok(PrimitivityRank::Infinite),
        _ => Err(PyValueError::new_err("primitivity rank must be a nonnegative int or math.inf")),
    }
}

fn operator(name: &str) -> PyResult<Operator> {
    name.parse().py()
}

/// A reduced word in the free group.
#[pyclass(name = "Word", module = "ramlab", frozen, skip_from_py_object, eq, hash)]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PyWord(ReducedWord);

#[pymethods]
impl PyWord {
    /// Parses and freely reduces `text`; `k` defaults to the largest letter used.
    #[new]
    #[pyo3(signature = (text, k=None))]
    fn new(text: &str, k: Option<usize>) -> PyResult<Self> {
        Ok(PyWord(RawWord::parse(text, k).py()?.reduce()))
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.alphabet_size()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Word('{}', k={})", self.0, self.0.alphabet_size())
    }

    fn __mul__(&self, other: &PyWord) -> PyWord {
        PyWord(self.0.concat(&other.0))
    }

    fn __pow__(&self, p: u32, _modulo: Option<u32>) -> PyWord {
        PyWord(self.0.pow(p))
    }

    fn inverse(&self) -> PyWord {
        PyWord(self.0.inverse())
    }

    /// `u⁻¹ w u`.
    fn conjugate_by(&self, u: &PyWord) -> PyWord {
        PyWord(self.0.conjugate_by(&u.0))
    }

    /// The permutation obtained by substituting `perms[i]` for letter `i`,
    /// composed left to right; given and returned as image lists.
    fn evaluate(&self, perms: Vec<Vec<u32>>) -> PyResult<Vec<u32>> {
        let sigmas = perms.into_iter().map(Permutation::from_images).collect::<ramlab_core::Result<Vec<_>>>().py()?;
        Ok(evaluate_word(&self.0.as_raw(), &sigmas).py()?.images().to_vec())
    }

    fn fixed_points(&self, perms: Vec<Vec<u32>>) -> PyResult<usize> {
        Ok(self.evaluate(perms)?.iter().enumerate().filter(|&(i, &x)| i as u32 == x).count())
    }
}

/// A Stallings core graph of a finitely generated subgroup.
#[pyclass(name = "CoreGraph", module = "ramlab", frozen, skip_from_py_object, eq)]
#[derive(Clone, PartialEq)]
pub struct PyCoreGraph(cg::CoreGraph);

#[pymethods]
impl PyCoreGraph {
    /// Core graph of the subgroup generated by `generators`.
    #[new]
    fn new(k: usize, generators: Vec<PyRef<'_, PyWord>>) -> PyResult<Self> {
        let gens: Vec<ReducedWord> =
            generators.iter().map(|w| w.0.with_alphabet(k)).collect::<ramlab_core::Result<_>>().py()?;
        Ok(PyCoreGraph(cg::CoreGraph::from_words(k, &gens).py()?))
    }

    #[staticmethod]
    fn bouquet(k: usize) -> Self {
        PyCoreGraph(cg::CoreGraph::bouquet(k))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let json: cg::GraphJson = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyCoreGraph(cg::CoreGraph::from_json(&json).py()?))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0.to_json()).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.0.num_vertices()
    }

    /// `(from, to, label)` triples with 1-based labels.
    #[getter]
    fn edges(&self) -> Vec<(usize, usize, usize)> {
        self.0.edges().iter().map(|e| (e.from, e.to, e.label)).collect()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    fn __contains__(&self, w: &PyWord) -> bool {
        self.0.membership(&w.0)
    }

    /// Free basis read off the BFS spanning tree.
    fn basis(&self) -> Vec<PyWord> {
        self.0.basis().into_iter().map(PyWord).collect()
    }

    fn x_distance(&self, other: &PyCoreGraph) -> PyResult<usize> {
        cg::x_distance(&self.0, &other.0, &guards()?).py()
    }

    fn is_free_factor_of(&self, other: &PyCoreGraph) -> PyResult<bool> {
        cg::is_free_factor(&self.0, &other.0, &guards()?).py()
    }

    fn is_algebraic_extension_of(&self, other: &PyCoreGraph) -> PyResult<bool> {
        primitivity::is_algebraic_extension(&other.0, &self.0, &guards()?).py()
    }

    fn __repr__(&self) -> String {
        format!("CoreGraph(vertices={}, edges={}, rank={})", self.0.num_vertices(), self.0.num_edges(), self.0.rank())
    }
}

/// An undirected multigraph; loops count twice in the degree.
#[pyclass(name = "Graph", module = "ramlab", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyGraph(MultiGraph);

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyGraph(MultiGraph::from_edges(n, &edges).py()?))
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.0.num_vertices()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges()
    }

    fn degrees(&self) -> Vec<usize> {
        self.0.degrees()
    }

    fn adjacency(&self) -> Vec<Vec<u32>> {
        self.0.adjacency_rows()
    }

    fn is_simple(&self) -> bool {
        self.0.is_simple()
    }

    /// Eigenvalues of the adjacency or Markov operator, descending.
    #[pyo3(signature = (operator="adjacency"))]
    fn spectrum(&self, operator: &str) -> PyResult<Vec<f64>> {
        Ok(spectral::graph_spectrum(&self.0, self::operator(operator)?))
    }

    /// `max(λ2, -λn)` of a regular graph.
    fn lambda_nontrivial(&self) -> PyResult<Option<f64>> {
        spectral::lambda_nontrivial(&self.0).py()
    }

    /// Cheeger constants, spectral gaps and mixing-lemma checks, by exhaustive subsets.
    fn expansion<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let report = expansion::inequality_suite(&self.0, &guards()?).py()?;
        to_py(py, &report)
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, edges={})", self.0.num_vertices(), self.0.num_edges())
    }
}

/// An `n`-sheeted covering of a base graph.
#[pyclass(name = "Cover", module = "ramlab", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyCover(CoverGraph);

#[pymethods]
impl PyCover {
    #[getter]
    fn sheets(&self) -> usize {
        self.0.sheets()
    }

    #[getter]
    fn sigma(&self) -> Vec<Vec<u32>> {
        self.0.sigma().iter().map(|p| p.images().to_vec()).collect()
    }

    fn graph(&self) -> PyGraph {
        PyGraph(self.0.multigraph())
    }

    /// Eigenvalues on the fibre-sum-zero subspace, descending.
    #[pyo3(signature = (operator="adjacency"))]
    fn new_eigenvalues(&self, operator: &str) -> PyResult<Vec<f64>> {
        Ok(spectral::new_eigenvalues(&self.0, self::operator(operator)?))
    }

    /// `(λ_A_new, λ_M_new)`.
    fn lambda_new(&self) -> (Option<f64>, Option<f64>) {
        spectral::lambda_new(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Cover(sheets={}, base_edges={})", self.0.sheets(), self.0.base().num_edges())
    }
}

fn base(num_vertices: usize, edges: Vec<(usize, usize)>) -> PyResult<BaseGraph> {
    BaseGraph::new(num_vertices, edges).py()
}

/// `d/2` independent uniform permutations on `n` points.
#[pyfunction]
fn sample_permutation_model(n: usize, d: usize, seed: u64) -> PyResult<PyCover> {
    Ok(PyCover(covers::sample_permutation_model(n, d, &mut seeded_rng(seed)).py()?))
}

/// Uniform random `n`-cover of the base graph given by its vertex count and edge list.
#[pyfunction]
fn sample_cover(num_vertices: usize, edges: Vec<(usize, usize)>, n: usize, seed: u64) -> PyResult<PyCover> {
    let b = base(num_vertices, edges)?;
    Ok(PyCover(covers::sample_cover(&b, n, &mut seeded_rng(seed)).py()?))
}

/// Configuration model: a uniform perfect matching on `d * n` points.
#[pyfunction]
fn sample_matching_model(n: usize, d: usize, seed: u64) -> PyResult<PyGraph> {
    Ok(PyGraph(covers::sample_matching_model(n, d, &mut seeded_rng(seed)).py()?))
}

/// `(d-1)/2` permutations plus one perfect matching, for odd `d`.
#[pyfunction]
fn sample_perm_plus_matching(n: usize, d: usize, seed: u64) -> PyResult<PyGraph> {
    Ok(PyGraph(covers::sample_perm_plus_matching(n, d, &mut seeded_rng(seed)).py()?))
}

/// `(pi, crit)`: the primitivity rank (`math.inf` for primitives) and the critical subgroups.
#[pyfunction]
fn primitivity_rank(py: Python<'_>, w: &PyWord) -> PyResult<(Py<PyAny>, Vec<PyCoreGraph>)> {
    let report = primitivity::primitivity_rank(&w.0, &guards()?).py()?;
    Ok((rank_to_py(py, report.pi)?, report.crit.into_iter().map(PyCoreGraph).collect()))
}

#[pyfunction]
fn is_primitive(w: &PyWord, subgroup: &PyCoreGraph) -> PyResult<bool> {
    primitivity::is_primitive(&w.0, &subgroup.0, &guards()?).py()
}

/// Exact `E[fixed points of w(σ1, …, σk)]` over uniform `σi ∈ S_n`.
#[pyfunction]
fn expected_fixed_points<'py>(py: Python<'py>, w: &PyWord, n: u64) -> PyResult<Bound<'py, PyAny>> {
    let e = moebius::expected_fixed_points(&w.0, n, &guards()?).py()?;
    fraction(py, &e)
}

/// Exact average number of common fixed points of `sub` over assignments to `sup`.
#[pyfunction]
fn phi<'py>(py: Python<'py>, sub: &PyCoreGraph, sup: &PyCoreGraph, n: usize) -> PyResult<Bound<'py, PyAny>> {
    let v = moebius::phi_exact(&sub.0, &sup.0, n, &guards()?).py()?;
    fraction(py, &v)
}

/// `(mean, std_error)` of the fixed-point count over `trials` seeded samples.
#[pyfunction]
fn phi_monte_carlo(w: &PyWord, n: usize, trials: u64, seed: u64) -> PyResult<(f64, f64)> {
    let e = moebius::phi_monte_carlo(&w.0, n, trials, seed).py()?;
    Ok((e.mean, e.std_error))
}

/// `1 + n^{1-pi} (crit + t^{2+2pi} / (n - t^2))`.
#[pyfunction]
fn fixed_point_bound(pi: &Bound<'_, PyAny>, crit: usize, t: usize, n: u64) -> PyResult<f64> {
    moebius::fixed_point_bound(rank_from_py(pi)?, crit, t, n).py()
}

/// Bound terms for the permutation model of degree `d`; optimises `c` when omitted.
#[pyfunction]
#[pyo3(signature = (d, c=None))]
fn bound<'py>(py: Python<'py>, d: u64, c: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let spec = match c {
        Some(c) => growth::bound_evaluator(d, c),
        None => growth::optimize_bound(d),
    }
    .py()?;
    to_py(py, &spec)
}

/// Bound terms for covers of a base of the given rank and universal-cover radius.
#[pyfunction]
#[pyo3(signature = (rank, rho, c=None))]
fn general_bound<'py>(py: Python<'py>, rank: usize, rho: f64, c: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let spec = match c {
        Some(c) => growth::general_bound_evaluator(rank, rho, c),
        None => growth::optimize_general_bound(rank, rho),
    }
    .py()?;
    to_py(py, &spec)
}

/// `(estimate, exact)` spectral radius of the universal cover of a base graph.
#[pyfunction]
#[pyo3(signature = (num_vertices, edges, depth=100, operator="adjacency"))]
fn rho_universal_cover(
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
    depth: usize,
    operator: &str,
) -> PyResult<(f64, Option<f64>)> {
    let r = spectral::rho_universal_cover(&base(num_vertices, edges)?, depth, self::operator(operator)?).py()?;
    Ok((r.estimate, r.exact))
}

/// Histogram `{pi: count}` over all words of length `t` on `k` letters.
#[pyfunction]
#[pyo3(signature = (k, t, mode="reduced"))]
fn classify_words<'py>(py: Python<'py>, k: usize, t: usize, mode: &str) -> PyResult<Bound<'py, PyDict>> {
    let mode: WordMode = mode.parse().py()?;
    let h = growth::classify_words(k, t, mode, false, &guards()?).py()?;
    let out = PyDict::new(py);
    for (pi, count) in h.counts {
        out.set_item(rank_to_py(py, pi)?, count)?;
    }
    Ok(out)
}

#[pymodule]
fn ramlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GuardError", m.py().get_type::<GuardError>())?;
    m.add_class::<PyWord>()?;
    m.add_class::<PyCoreGraph>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyCover>()?;
    m.add_function(wrap_pyfunction!(sample_permutation_model, m)?)?;
    m.add_function(wrap_pyfunction!(sample_cover, m)?)?;
    m.add_function(wrap_pyfunction!(sample_matching_model, m)?)?;
    m.add_function(wrap_pyfunction!(sample_perm_plus_matching, m)?)?;
    m.add_function(wrap_pyfunction!(primitivity_rank, m)?)?;
    m.add_function(wrap_pyfunction!(is_primitive, m)?)?;
    m.add_function(wrap_pyfunction!(expected_fixed_points, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(phi_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point_bound, m)?)?;
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    m.add_function(wrap_pyfunction!(general_bound, m)?)?;
    m.add_function(wrap_pyfunction!(rho_universal_cover, m)?)?;
    m.add_function(wrap_pyfunction!(classify_words, m)?)?;
    Ok(())
}
