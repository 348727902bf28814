//! Python bindings. Formal sums cross the boundary as lists of
//! `(coefficient, code)` pairs.

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use virtknot::algebra::{self, QuotientPresentation};
use virtknot::descending::{self, ExtensionTable};
use virtknot::invariants::{self, FiniteGroup};
use virtknot::moves::{self, MoveFamily};
use virtknot::{Error, FormalSum, Underlying};

fn err(e: Error) -> PyErr {
    match e {
        Error::BadIndex(_) => PyIndexError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn kind(name: &str) -> PyResult<Underlying> {
    match name {
        "closed" => Ok(Underlying::Closed),
        "long" => Ok(Underlying::Long),
        other => Err(PyValueError::new_err(format!("kind must be 'closed' or 'long', not {other:?}"))),
    }
}

/// A Gauss diagram, built from its text code.
#[pyclass(name = "GaussDiagram", module = "virtknot_py", frozen)]
struct PyGaussDiagram {
    inner: virtknot::GaussDiagram,
}

impl From<virtknot::GaussDiagram> for PyGaussDiagram {
    fn from(inner: virtknot::GaussDiagram) -> Self {
        PyGaussDiagram { inner }
    }
}

#[pymethods]
impl PyGaussDiagram {
    #[new]
    fn new(code: &str) -> PyResult<Self> {
        code.parse::<virtknot::GaussDiagram>()
            .map(Into::into)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __str__(&self) -> String {
        self.inner.serialize()
    }

    fn __repr__(&self) -> String {
        format!("GaussDiagram({:?})", self.inner.serialize())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner.canonical_code() == other.inner.canonical_code()
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{DefaultHasher, Hash, Hasher};
        let mut h = DefaultHasher::new();
        self.inner.canonical_code().hash(&mut h);
        h.finish()
    }

    #[getter]
    fn underlying(&self) -> String {
        self.inner.underlying().to_string()
    }

    #[getter]
    fn arrow_count(&self) -> usize {
        self.inner.arrow_count()
    }

    #[getter]
    fn chord_count(&self) -> usize {
        self.inner.chord_count()
    }

    fn canonical_code(&self) -> String {
        self.inner.canonical_code().0
    }

    fn writhe(&self) -> i64 {
        self.inner.writhe()
    }

    fn is_realizable(&self) -> PyResult<bool> {
        self.inner.is_realizable().map_err(err)
    }

    fn close_long(&self) -> PyResult<Self> {
        self.inner.close_long().map(Into::into).map_err(err)
    }

    fn open_at(&self, at: usize) -> PyResult<Self> {
        self.inner.open_at(at).map(Into::into).map_err(err)
    }

    fn reverse_arrows(&self) -> Self {
        self.inner.reverse_arrows().into()
    }

    /// `steps` random Reidemeister moves from a seeded generator.
    fn random_isotopy(&self, steps: usize, seed: u64) -> PyResult<Self> {
        moves::random_isotopy(&self.inner, steps, seed).map(Into::into).map_err(err)
    }
}

fn to_sum(terms: Vec<(i64, String)>) -> PyResult<FormalSum> {
    let mut out = FormalSum::new();
    for (k, code) in terms {
        let d: virtknot::GaussDiagram = code.parse().map_err(|e: virtknot::ParseError| PyValueError::new_err(e.to_string()))?;
        out.add_term(&d, k);
    }
    Ok(out)
}

fn from_sum(x: &FormalSum) -> Vec<(i64, String)> {
    let mut v: Vec<(i64, String)> = x.iter().map(|(c, _, k)| (k, c.0.clone())).collect();
    v.sort_by(|a, b| a.1.cmp(&b.1));
    v
}

#[pyfunction]
fn subdiagram_expansion(terms: Vec<(i64, String)>) -> PyResult<Vec<(i64, String)>> {
    Ok(from_sum(&algebra::subdiagram_expansion(&to_sum(terms)?)))
}

#[pyfunction]
fn subdiagram_expansion_inverse(terms: Vec<(i64, String)>) -> PyResult<Vec<(i64, String)>> {
    Ok(from_sum(&algebra::subdiagram_expansion_inverse(&to_sum(terms)?)))
}

/// Pairing of an arrow-diagram combination with a diagram. A single code may
/// use `*` for sign-free arrows.
#[pyfunction]
fn pairing(pattern: &Bound<'_, PyAny>, d: &PyGaussDiagram) -> PyResult<i64> {
    let a = if let Ok(text) = pattern.extract::<String>() {
        algebra::SignFreePattern::parse(&text).map_err(err)?.expand()
    } else {
        to_sum(pattern.extract()?)?
    };
    Ok(algebra::pairing(&a, &d.inner))
}

#[pyfunction]
fn v21(d: &PyGaussDiagram) -> PyResult<i64> {
    invariants::v21(&d.inner).map_err(err)
}

#[pyfunction]
fn v22(d: &PyGaussDiagram) -> PyResult<i64> {
    invariants::v22(&d.inner).map_err(err)
}

#[pyfunction]
fn v3_closed(d: &PyGaussDiagram) -> PyResult<i64> {
    invariants::v3_closed(&d.inner).map_err(err)
}

#[pyfunction]
fn lk_over(d: &PyGaussDiagram, i: usize, j: usize) -> PyResult<i64> {
    invariants::lk_over(&d.inner, i, j).map_err(err)
}

/// Defect of `v21`, `v22` or `v3` at the marked arrows.
#[pyfunction]
fn finite_type_defect(invariant: &str, d: &PyGaussDiagram, marked: Vec<usize>) -> PyResult<i64> {
    let nu = match invariant {
        "v21" => invariants::v21,
        "v22" => invariants::v22,
        "v3" => invariants::v3_closed,
        other => return Err(PyValueError::new_err(format!("unknown invariant {other:?}"))),
    };
    invariants::finite_type_defect(nu, &d.inner, &marked).map_err(err)
}

/// New invariants in each degree `1..=n`, as `(degree, count)` pairs.
#[pyfunction]
fn new_invariant_dimensions(n: usize, kind_name: &str) -> PyResult<Vec<(usize, usize)>> {
    algebra::new_invariant_dimensions(n, kind(kind_name)?).map_err(err)
}

/// The truncated quotient as its JSON document.
#[pyfunction]
fn compute_quotient(n: usize, kind_name: &str) -> PyResult<String> {
    algebra::compute_quotient(n, kind(kind_name)?).and_then(|q| q.to_json()).map_err(err)
}

#[pyfunction]
fn universal_invariant(d: &PyGaussDiagram, quotient_json: &str) -> PyResult<Vec<i64>> {
    let q = QuotientPresentation::from_json(quotient_json).map_err(err)?;
    algebra::universal_invariant(&d.inner, &q).map_err(err)
}

#[pyfunction]
fn reduce_to_descending(d: &PyGaussDiagram, n: usize) -> PyResult<Vec<(i64, String)>> {
    descending::reduce_to_descending(&d.inner, n).map(|x| from_sum(&x)).map_err(err)
}

/// The degree two extension of `v21` to a long diagram with at most two chords.
#[pyfunction]
fn extend_v21(d: &PyGaussDiagram) -> PyResult<i64> {
    let tbl = ExtensionTable::new(2, invariants::v21);
    descending::extend_invariant(&tbl, &d.inner).map_err(err)
}

/// Generators and relators of the upper (or lower) group.
#[pyfunction]
#[pyo3(signature = (d, lower = false))]
fn group(d: &PyGaussDiagram, lower: bool) -> PyResult<(Vec<String>, Vec<String>)> {
    let g = if lower { invariants::lower_group(&d.inner) } else { invariants::upper_group(&d.inner) };
    let g = g.map_err(err)?;
    Ok((g.generators.clone(), g.relator_strings()))
}

/// Homomorphisms from the upper (or lower) group to `S3` or `A4`.
#[pyfunction]
#[pyo3(signature = (d, target = "S3", lower = false))]
fn count_homs(d: &PyGaussDiagram, target: &str, lower: bool) -> PyResult<u64> {
    let t = match target {
        "S3" => FiniteGroup::symmetric3(),
        "A4" => FiniteGroup::alternating4(),
        other => return Err(PyValueError::new_err(format!("unknown group {other:?}"))),
    };
    let g = if lower { invariants::lower_group(&d.inner) } else { invariants::upper_group(&d.inner) };
    invariants::count_homs(&g.map_err(err)?, &t).map_err(err)
}

/// Length of a move sequence found between two diagrams, or `None`.
#[pyfunction]
#[pyo3(signature = (a, b, budget = 20000, forbidden = false))]
fn search(a: &PyGaussDiagram, b: &PyGaussDiagram, budget: usize, forbidden: bool) -> PyResult<Option<usize>> {
    let fams: &[MoveFamily] = if forbidden { &MoveFamily::ALL } else { &MoveFamily::REIDEMEISTER };
    moves::bounded_equivalence_search(&a.inner, &b.inner, budget, fams)
        .map(|p| p.map(|p| p.len()))
        .map_err(err)
}

#[pymodule]
fn virtknot_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGaussDiagram>()?;
    m.add_function(wrap_pyfunction!(subdiagram_expansion, m)?)?;
    m.add_function(wrap_pyfunction!(subdiagram_expansion_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(pairing, m)?)?;
    m.add_function(wrap_pyfunction!(v21, m)?)?;
    m.add_function(wrap_pyfunction!(v22, m)?)?;
    m.add_function(wrap_pyfunction!(v3_closed, m)?)?;
    m.add_function(wrap_pyfunction!(lk_over, m)?)?;
    m.add_function(wrap_pyfunction!(finite_type_defect, m)?)?;
    m.add_function(wrap_pyfunction!(new_invariant_dimensions, m)?)?;
    m.add_function(wrap_pyfunction!(compute_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(universal_invariant, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_to_descending, m)?)?;
    m.add_function(wrap_pyfunction!(extend_v21, m)?)?;
    m.add_function(wrap_pyfunction!(group, m)?)?;
    m.add_function(wrap_pyfunction!(count_homs, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    Ok(())
}
