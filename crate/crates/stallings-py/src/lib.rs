//! Python bindings: thin wrappers over the subgroup-graph machinery.
//!
//! Two classes cross the boundary — `FreeGroup` (an alphabet with word
//! operations) and `Subgroup` (a folded core graph with membership,
//! intersection, conjugation, isoperimetry, and normality certification).
//! Structured results come back as the same JSON the command-line tool
//! prints, so Python callers `json.loads` one format; exact rationals stay
//! `{"num": …, "den": …}` decimal strings and never become floats.
//!
//! Usage from Python:
//!
//!     from stallings_py import FreeGroup
//!     f2 = FreeGroup(2)
//!     h = f2.subgroup(["a", "baB"])
//!     bound = json.loads(h.phi_json(max_size=12, radius=6))
//!     assert bound["upper"] == {"num": "1", "den": "2"}

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use stallings::cli;
use stallings::isoperimetry::{phi_search, threshold_report, ThresholdBudgets};
use stallings::normality::{degree_certify, LPredicate};
use stallings::schreier::SchreierView;
use stallings::subgroups::{Malnormality, SubgroupHandle};
use stallings::words::{enumerate_reduced, Alphabet, Word};
use stallings::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::MalformedWord(_) | Error::InvalidArgument(_) | Error::InvalidVertex(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON values always serialize")
}

fn parse_pred(alphabet: Alphabet, name: &str) -> PyResult<LPredicate> {
    match name {
        "infinite" => Ok(LPredicate::Infinite),
        "nonamenable" => Ok(LPredicate::Nonamenable),
        "nonamenable-on-cayley" => {
            let trivial = SubgroupHandle::from_generators(alphabet, &[]).map_err(py_err)?;
            let budgets = ThresholdBudgets::default();
            Ok(LPredicate::NonamenableOnX {
                x: SchreierView::new(trivial.graph().clone()),
                max_size: budgets.pred_max_size,
                radius: budgets.pred_radius,
                eps: budgets.pred_eps,
            })
        }
        other => Err(PyValueError::new_err(format!(
            "unknown predicate {other:?}; expected \"infinite\", \"nonamenable\", or \"nonamenable-on-cayley\""
        ))),
    }
}

/// A free group of the given rank, with generators a, b, c, … and inverses
/// written as uppercase letters.
#[pyclass(frozen)]
struct FreeGroup {
    alphabet: Alphabet,
}

impl FreeGroup {
    fn word(&self, s: &str) -> PyResult<Word> {
        Word::parse(self.alphabet, s).map_err(py_err)
    }
}

#[pymethods]
impl FreeGroup {
    /// Create a free group of the given rank (1 ≤ rank ≤ 26).
    #[new]
    #[pyo3(signature = (rank=2))]
    fn new(rank: usize) -> PyResult<Self> {
        let alphabet = Alphabet::new(rank).map_err(py_err)?;
        Ok(FreeGroup { alphabet })
    }

    #[getter]
    fn rank(&self) -> usize {
        self.alphabet.rank()
    }

    /// Freely reduce a word.
    fn reduce(&self, word: &str) -> PyResult<String> {
        Ok(self.word(word)?.to_string())
    }

    /// The inverse of a word, reduced.
    fn inverse(&self, word: &str) -> PyResult<String> {
        Ok(self.word(word)?.inverse().to_string())
    }

    /// The reduced concatenation of two words.
    fn concat(&self, left: &str, right: &str) -> PyResult<String> {
        Ok(self.word(left)?.concat(&self.word(right)?).to_string())
    }

    /// Split a word as conjugator · cyclically-reduced core · conjugator⁻¹,
    /// returning `(conjugator, core)`.
    fn cyclic_reduce(&self, word: &str) -> PyResult<(String, String)> {
        let (conj, core) = self.word(word)?.cyclically_reduce();
        Ok((conj.to_string(), core.to_string()))
    }

    /// All freely reduced words of length ≤ `max_len`, sorted by length then
    /// letter order; the empty word comes first.
    fn reduced_words(&self, max_len: usize) -> Vec<String> {
        enumerate_reduced(self.alphabet, max_len)
            .iter()
            .map(|w| w.to_string())
            .collect()
    }

    /// The subgroup generated by the given words. An empty list gives the
    /// trivial subgroup, whose coset space is the Cayley graph.
    fn subgroup(&self, generators: Vec<String>) -> PyResult<Subgroup> {
        let gens: Vec<Word> = generators
            .iter()
            .map(|s| self.word(s))
            .collect::<PyResult<_>>()?;
        let handle = SubgroupHandle::from_generators(self.alphabet, &gens).map_err(py_err)?;
        Ok(Subgroup { handle })
    }

    fn __repr__(&self) -> String {
        format!("FreeGroup(rank={})", self.alphabet.rank())
    }
}

/// A finitely generated subgroup, held as its folded core graph.
#[pyclass(frozen)]
struct Subgroup {
    handle: SubgroupHandle,
}

impl Subgroup {
    fn word(&self, s: &str) -> PyResult<Word> {
        Word::parse(self.handle.alphabet(), s).map_err(py_err)
    }

    fn view(&self) -> SchreierView {
        SchreierView::new(self.handle.graph().clone())
    }
}

#[pymethods]
impl Subgroup {
    /// Free rank of the subgroup.
    #[getter]
    fn rank(&self) -> usize {
        self.handle.rank()
    }

    /// Index in the ambient free group, or None when infinite.
    #[getter]
    fn index(&self) -> Option<usize> {
        self.handle.index()
    }

    /// Exact membership test.
    fn contains(&self, word: &str) -> PyResult<bool> {
        Ok(self.handle.contains(&self.word(word)?))
    }

    /// A free basis of the subgroup.
    fn generators(&self) -> Vec<String> {
        self.handle
            .generators()
            .iter()
            .map(|w| w.to_string())
            .collect()
    }

    /// The intersection with another subgroup of the same free group.
    fn intersect(&self, other: &Subgroup) -> PyResult<Subgroup> {
        let handle = self.handle.intersect(&other.handle).map_err(py_err)?;
        Ok(Subgroup { handle })
    }

    /// The conjugate g·H·g⁻¹.
    fn conjugate(&self, g: &str) -> PyResult<Subgroup> {
        let handle = self.handle.conjugate(&self.word(g)?).map_err(py_err)?;
        Ok(Subgroup { handle })
    }

    /// Ball-certified malnormality: JSON with either `certified_radius` or a
    /// violating `witness` and its `intersection_rank`.
    fn malnormal_json(&self, radius: usize) -> PyResult<String> {
        let value = match self.handle.malnormal_in_ball(radius).map_err(py_err)? {
            Malnormality::BallCertified { radius } => {
                serde_json::json!({ "certified_radius": radius })
            }
            Malnormality::Violated {
                witness,
                intersection,
            } => serde_json::json!({
                "witness": witness.to_string(),
                "intersection_rank": intersection.rank(),
            }),
        };
        Ok(pretty(&value))
    }

    /// Witnessed upper bound for the isoperimetric constant of the coset
    /// action, in the `phi` subcommand's JSON shape.
    #[pyo3(signature = (max_size=8, radius=4, heuristics=true))]
    fn phi_json(&self, max_size: usize, radius: usize, heuristics: bool) -> PyResult<String> {
        let bound = phi_search(&self.view(), max_size, radius, heuristics).map_err(py_err)?;
        Ok(pretty(&cli::phi_json(&bound)))
    }

    /// Degree-n weak-normality certificate over the named predicate
    /// ("infinite", "nonamenable", or "nonamenable-on-cayley"), in the
    /// `normality certify` JSON shape. The verdict is one-sided: "unknown"
    /// never refutes.
    #[pyo3(signature = (degree=1, predicate="nonamenable", radius=2))]
    fn certify_json(&self, degree: usize, predicate: &str, radius: usize) -> PyResult<String> {
        let pred = parse_pred(self.handle.alphabet(), predicate)?;
        let cert = degree_certify(&self.handle, degree, &pred, radius).map_err(py_err)?;
        Ok(pretty(&cli::certificate_json(&cert)))
    }

    /// Compare the φ upper bound against the halved Cayley reference and
    /// attach the licensed certificate, in the `normality threshold` JSON
    /// shape.
    #[pyo3(signature = (degree=1))]
    fn threshold_json(&self, degree: usize) -> PyResult<String> {
        let alphabet = self.handle.alphabet();
        let trivial = SubgroupHandle::from_generators(alphabet, &[]).map_err(py_err)?;
        let reference = SchreierView::new(trivial.graph().clone());
        let report = threshold_report(
            &self.handle,
            &reference,
            degree,
            &ThresholdBudgets::default(),
        )
        .map_err(py_err)?;
        Ok(pretty(&cli::threshold_json(&report)))
    }

    /// The folded core graph in DOT format.
    fn core_dot(&self) -> String {
        self.handle.graph().to_dot()
    }

    /// The folded core graph as JSON.
    fn core_json(&self) -> String {
        pretty(&self.handle.graph().to_json())
    }

    fn __eq__(&self, other: &Bound<'_, PyAny>) -> bool {
        other
            .extract::<PyRef<'_, Subgroup>>()
            .is_ok_and(|o| o.handle == self.handle)
    }

    fn __repr__(&self) -> String {
        format!(
            "Subgroup(rank={}, index={})",
            self.handle.rank(),
            self.handle
                .index()
                .map_or("None".to_string(), |i| i.to_string())
        )
    }
}

/// Run the command-line interface in-process: takes the argument list
/// (without a program name) and returns `(exit_code, output)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String) {
    let argv = std::iter::once("stallings".to_string()).chain(args);
    cli::execute(argv)
}

#[pymodule]
fn stallings_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<FreeGroup>()?;
    m.add_class::<Subgroup>()?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
