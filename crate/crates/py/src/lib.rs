//! Python bindings for the density engine.
//!
//! The module mirrors the command-line tool: `density`, `ledger`, and
//! `verify` accept and produce the same JSON documents the binary
//! reads and writes, so results are byte-comparable across the two
//! front ends. On top of that it exposes the exact kernels directly —
//! [`Clifford`] for frame-algebra arithmetic and `sphere_average` for
//! cosphere moments — so identities can be checked interactively.
//!
//! Exact values cross the boundary as canonical rational strings
//! (`"p/q"` real parts, `"a+b/ci"` complex ones). They are lossless:
//! feed them back in, or hand the real ones to `fractions.Fraction`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use storsion_core::clifford::{self, CliffordElement};
use storsion_core::functional::EngineError;
use storsion_core::report::{
    density_report, ledger_report, parse_point_file, render_json, render_ledger_markdown,
    verify_report_with_tolerance, ModeChoice,
};
use storsion_core::scalar::GaussRat;
use storsion_core::sphere;

fn engine_err(e: EngineError) -> PyErr {
    match &e {
        EngineError::Input(msg) => PyValueError::new_err(msg.clone()),
        EngineError::Internal(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_scalar(s: &str) -> PyResult<GaussRat> {
    GaussRat::parse(s).map_err(|e| PyValueError::new_err(format!("'{s}': {e}")))
}

/// Exact element of the complex Clifford algebra on an orthonormal
/// frame of dimension `n`, with `e_i e_j + e_j e_i = -2 δ_ij`.
///
/// Elements are immutable; arithmetic returns new values. Coefficients
/// are Gaussian rationals rendered as canonical strings.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Clifford {
    inner: CliffordElement,
}

impl Clifford {
    fn check_even(&self, what: &str) -> PyResult<()> {
        if self.inner.dim() % 2 != 0 {
            return Err(PyValueError::new_err(format!(
                "{what} needs an even frame dimension, got {}",
                self.inner.dim()
            )));
        }
        Ok(())
    }

    fn check_same_dim(&self, other: &Clifford) -> PyResult<()> {
        if self.inner.dim() != other.inner.dim() {
            return Err(PyValueError::new_err(format!(
                "frame dimensions differ: {} vs {}",
                self.inner.dim(),
                other.inner.dim()
            )));
        }
        Ok(())
    }
}

fn check_dim(n: usize) -> PyResult<()> {
    if !(1..=16).contains(&n) {
        return Err(PyValueError::new_err(format!(
            "frame dimension must be between 1 and 16, got {n}"
        )));
    }
    Ok(())
}

#[pymethods]
impl Clifford {
    /// The zero element in dimension `n`.
    #[staticmethod]
    fn zero(n: usize) -> PyResult<Self> {
        check_dim(n)?;
        Ok(Clifford {
            inner: CliffordElement::zero(n),
        })
    }

    /// The multiplicative identity in dimension `n`.
    #[staticmethod]
    fn identity(n: usize) -> PyResult<Self> {
        check_dim(n)?;
        Ok(Clifford {
            inner: CliffordElement::unit(n),
        })
    }

    /// A scalar multiple of the identity; `value` is a canonical
    /// rational string such as `"3/2"`, `"-1+1/2i"`, or `"i"`.
    #[staticmethod]
    fn scalar(n: usize, value: &str) -> PyResult<Self> {
        check_dim(n)?;
        Ok(Clifford {
            inner: CliffordElement::scalar(n, parse_scalar(value)?),
        })
    }

    /// The generator `e_i` (1-based) in dimension `n`.
    #[staticmethod]
    fn generator(n: usize, i: usize) -> PyResult<Self> {
        check_dim(n)?;
        if !(1..=n).contains(&i) {
            return Err(PyValueError::new_err(format!(
                "generator index must be in 1..={n}, got {i}"
            )));
        }
        Ok(Clifford {
            inner: CliffordElement::generator(n, i),
        })
    }

    /// The Clifford action of a vector given by rational components.
    #[staticmethod]
    fn vector(n: usize, components: Vec<String>) -> PyResult<Self> {
        check_dim(n)?;
        if components.len() != n {
            return Err(PyValueError::new_err(format!(
                "expected {n} components, got {}",
                components.len()
            )));
        }
        let mut acc = CliffordElement::zero(n);
        for (idx, comp) in components.iter().enumerate() {
            let c = parse_scalar(comp)?;
            acc = acc.add(&CliffordElement::generator(n, idx + 1).scale(&c));
        }
        Ok(Clifford { inner: acc })
    }

    /// The grading element `γ = i^{n/2} e_1 … e_n` (even `n` only).
    #[staticmethod]
    fn grading(n: usize) -> PyResult<Self> {
        check_dim(n)?;
        if n % 2 != 0 {
            return Err(PyValueError::new_err(format!(
                "the grading element needs an even dimension, got {n}"
            )));
        }
        Ok(Clifford {
            inner: clifford::gamma(n),
        })
    }

    /// Frame dimension.
    #[getter]
    fn n(&self) -> usize {
        self.inner.dim()
    }

    /// Highest blade degree present (0 for the zero element).
    fn max_degree(&self) -> u32 {
        self.inner.max_degree()
    }

    /// Whether every coefficient vanishes.
    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    /// Coefficient of the blade with the given generator bitmask
    /// (bit `i-1` set means `e_i` is a factor), as a canonical string.
    fn coeff(&self, blade: u64) -> PyResult<String> {
        if blade >> self.inner.dim() != 0 {
            return Err(PyValueError::new_err(format!(
                "blade mask {blade:#b} uses generators beyond dimension {}",
                self.inner.dim()
            )));
        }
        Ok(self.inner.coeff(blade).canonical())
    }

    /// Normalized spinor trace: non-scalar blades are traceless and
    /// the identity has trace `2^{n/2}` (even `n` only).
    fn trace(&self) -> PyResult<String> {
        self.check_even("the spinor trace")?;
        Ok(self.inner.trace().canonical())
    }

    /// Supertrace `Str(x) = tr(x·γ)` (even `n` only).
    fn supertrace(&self) -> PyResult<String> {
        self.check_even("the supertrace")?;
        Ok(self.inner.supertrace().canonical())
    }

    /// This element scaled by a rational string.
    fn scale(&self, value: &str) -> PyResult<Self> {
        Ok(Clifford {
            inner: self.inner.scale(&parse_scalar(value)?),
        })
    }

    fn __mul__(&self, other: &Clifford) -> PyResult<Self> {
        self.check_same_dim(other)?;
        Ok(Clifford {
            inner: self.inner.mul(&other.inner),
        })
    }

    fn __add__(&self, other: &Clifford) -> PyResult<Self> {
        self.check_same_dim(other)?;
        Ok(Clifford {
            inner: self.inner.add(&other.inner),
        })
    }

    fn __sub__(&self, other: &Clifford) -> PyResult<Self> {
        self.check_same_dim(other)?;
        Ok(Clifford {
            inner: self.inner.add(&other.inner.scale(&GaussRat::int(-1))),
        })
    }

    fn __neg__(&self) -> Self {
        Clifford {
            inner: self.inner.scale(&GaussRat::int(-1)),
        }
    }

    fn __richcmp__(&self, other: &Clifford, op: pyo3::basic::CompareOp) -> PyResult<bool> {
        match op {
            pyo3::basic::CompareOp::Eq => Ok(self.inner == other.inner),
            pyo3::basic::CompareOp::Ne => Ok(self.inner != other.inner),
            _ => Err(PyValueError::new_err(
                "Clifford elements are not ordered",
            )),
        }
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Average of the monomial `ξ^exponents` over the unit cosphere
/// `S^{n-1}` with volume-normalized measure, as an exact rational
/// string. Odd monomials average to zero.
#[pyfunction]
fn sphere_average(n: usize, exponents: Vec<u32>) -> PyResult<String> {
    check_dim(n)?;
    if exponents.len() != n {
        return Err(PyValueError::new_err(format!(
            "expected {n} exponents, got {}",
            exponents.len()
        )));
    }
    Ok(storsion_core::scalar::format_rat(&sphere::average(
        n,
        &exponents,
    )))
}

/// Volume of `S^{n-1}` in units of `π^{n/2}`, for even `n`, as an
/// exact rational string (e.g. `"2"` for `S^3`: `Vol = 2π²`).
#[pyfunction]
fn sphere_volume_in_pi_units(n: usize) -> PyResult<String> {
    check_dim(n)?;
    if n % 2 != 0 {
        return Err(PyValueError::new_err(format!(
            "exact volume units are defined for even dimensions, got {n}"
        )));
    }
    Ok(storsion_core::scalar::format_rat(
        &sphere::volume_in_pi_pow_m(n),
    ))
}

/// Compute the per-term residue density for a point-data JSON
/// document and return the report as a JSON string — the same bytes
/// the command-line tool writes.
///
/// `mode` overrides the document's own `mode` field when given
/// (`"paper"`, `"derived"`, or `"both"`).
#[pyfunction]
#[pyo3(signature = (point_json, mode = None))]
fn density(point_json: &str, mode: Option<&str>) -> PyResult<String> {
    let (point, file_mode) = parse_point_file(point_json).map_err(engine_err)?;
    let choice = match mode {
        None => file_mode,
        Some(name) => ModeChoice::parse(name).ok_or_else(|| {
            PyValueError::new_err(format!(
                "'{name}' is not one of paper, derived, both"
            ))
        })?,
    };
    let report = density_report(&point, choice).map_err(engine_err)?;
    Ok(render_json(&report))
}

/// Compute the discrepancy ledger for a point-data JSON document and
/// return the report as a JSON string.
#[pyfunction]
fn ledger(point_json: &str) -> PyResult<String> {
    let (point, _) = parse_point_file(point_json).map_err(engine_err)?;
    let report = ledger_report(&point).map_err(engine_err)?;
    Ok(render_json(&report))
}

/// Compute the discrepancy ledger and render it as markdown.
#[pyfunction]
fn ledger_markdown(point_json: &str) -> PyResult<String> {
    let (point, _) = parse_point_file(point_json).map_err(engine_err)?;
    let report = ledger_report(&point).map_err(engine_err)?;
    render_ledger_markdown(&report).map_err(engine_err)
}

/// Run a self-verification suite (`"traces"`, `"sphere"`, `"oracle"`,
/// `"symbols"`, or `"all"`) and return the report as a JSON string.
///
/// `tolerance` overrides the matrix-oracle residual bound; residuals
/// must fall strictly below it, so `0.0` forces failure (a negative
/// control showing the checks are live).
#[pyfunction]
#[pyo3(signature = (suite = "all", seed = 0, trials = 100, tolerance = None))]
fn verify(suite: &str, seed: u64, trials: usize, tolerance: Option<f64>) -> PyResult<String> {
    let report =
        verify_report_with_tolerance(suite, seed, trials, tolerance).map_err(engine_err)?;
    Ok(render_json(&report))
}

/// Exact verification engine for a spectral density functional:
/// Clifford-algebra arithmetic, cosphere moments, per-term residue
/// densities, and discrepancy ledgers, all in exact rational
/// arithmetic.
#[pymodule]
fn storsion(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Clifford>()?;
    m.add_function(wrap_pyfunction!(sphere_average, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_volume_in_pi_units, m)?)?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(ledger, m)?)?;
    m.add_function(wrap_pyfunction!(ledger_markdown, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
