//! Python bindings: `import dstab_py`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use dstab::conics::{self, Place};
use dstab::ecarith::{self, EllipticCurve};
use dstab::extfields::{self, CyclicFieldRecord, RamificationSpec};
use dstab::lfunc::{self, LContext};
use dstab::primeclass::{self, StabilityParams};
use dstab::{ffgroup, homspace, Error};

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::BadPrime(_) | Error::CutoffExceeded { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Converts through JSON so records arrive as plain dicts and lists.
fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

#[pyclass(name = "EllipticCurve", module = "dstab_py", frozen)]
struct PyCurve {
    inner: EllipticCurve,
}

#[pymethods]
impl PyCurve {
    /// Minimal model [a1, a2, a3, a4, a6] with its conductor.
    #[new]
    fn new(coeffs: [i64; 5], conductor: u64) -> PyResult<Self> {
        Ok(Self { inner: EllipticCurve::new(coeffs, conductor).map_err(err)? })
    }

    /// "571a1", "5906" or "11a1".
    #[staticmethod]
    fn named(name: &str) -> PyResult<Self> {
        let inner = dstab::config::CurveSpec::Named(name.into()).build().map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn coeffs(&self) -> [i64; 5] {
        self.inner.coeffs()
    }

    #[getter]
    fn conductor(&self) -> u64 {
        self.inner.conductor()
    }

    fn count_points(&self, p: u64) -> PyResult<u64> {
        ecarith::count_points(&self.inner, p).map_err(err)
    }

    fn ap(&self, p: u64) -> PyResult<i64> {
        ecarith::ap(&self.inner, p).map_err(err)
    }

    /// a_1, ..., a_m.
    fn an(&self, m: u64) -> PyResult<Vec<i64>> {
        Ok(ecarith::an_sieve(&self.inner, m).map_err(err)?.as_slice()[1..].to_vec())
    }

    fn torsion_dim(&self, p: u64, ell: u64) -> PyResult<u32> {
        ecarith::ell_torsion_dim(&self.inner, p, ell).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("EllipticCurve({:?}, {})", self.inner.coeffs(), self.inner.conductor())
    }
}

#[pyfunction]
#[pyo3(signature = (curve, ell, p, n = 1, sigma = Vec::new()))]
fn classify_prime<'py>(py: Python<'py>, curve: &PyCurve, ell: u64, p: u64, n: u32, sigma: Vec<u64>) -> PyResult<Bound<'py, PyAny>> {
    let params = StabilityParams::with_sigma(curve.inner.clone(), ell, n, &sigma).map_err(err)?;
    to_py(py, &primeclass::classify_prime(&params, p).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (curve, ell, bound, n = 1, sigma = Vec::new()))]
fn density_report<'py>(py: Python<'py>, curve: &PyCurve, ell: u64, bound: u64, n: u32, sigma: Vec<u64>) -> PyResult<Bound<'py, PyAny>> {
    let params = StabilityParams::with_sigma(curve.inner.clone(), ell, n, &sigma).map_err(err)?;
    to_py(py, &primeclass::scan(&params, bound).map_err(err)?)
}

#[pyfunction]
fn count_sl2_with_fixed_points(ell: u64) -> PyResult<u64> {
    ffgroup::count_sl2_with_fixed_points(ell).map_err(err)
}

/// (numerator, denominator).
#[pyfunction]
fn delta_theoretical(ell: u64) -> PyResult<(u64, u64)> {
    let r = ffgroup::delta_theoretical(ell).map_err(err)?;
    Ok((*r.numer(), *r.denom()))
}

#[pyfunction]
fn count_cyclic_fields(ell: u64, bound: u128) -> PyResult<u64> {
    Ok(extfields::count_cyclic_fields(ell, bound).map_err(err)?.count)
}

/// Identifiers of the primitive characters of order ell^n and conductor f.
#[pyfunction]
#[pyo3(signature = (f, ell, n = 1))]
fn characters_of_order(f: u64, ell: u64, n: u32) -> PyResult<Vec<String>> {
    Ok(extfields::characters_of_order(f, ell, n).map_err(err)?.iter().map(|c| c.id()).collect())
}

#[pyfunction]
#[pyo3(signature = (ell, fmax, n = 1, query = Vec::new()))]
fn enumerate_fields<'py>(py: Python<'py>, ell: u64, fmax: u64, n: u32, query: Vec<u64>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &extfields::enumerate_fields(ell, n, fmax, &query).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (s, sigma, ell, n = 1))]
fn build_s_ramified_character<'py>(py: Python<'py>, s: Vec<u64>, sigma: Vec<u64>, ell: u64, n: u32) -> PyResult<Bound<'py, PyAny>> {
    let chi = extfields::build_s_ramified_character(&s, &sigma, ell, n, &RamificationSpec::default()).map_err(err)?;
    to_py(py, &CyclicFieldRecord::from_character(&chi, &sigma))
}

fn character(f: u64, index: usize, ell: u64, n: u32) -> PyResult<extfields::DirichletCharacter> {
    let mut chars = extfields::characters_of_order(f, ell, n).map_err(err)?;
    if index >= chars.len() {
        return Err(PyValueError::new_err(format!("conductor {f} has {} characters of this order", chars.len())));
    }
    Ok(chars.swap_remove(index))
}

/// tau(chi) for the index-th character of conductor f, as a complex number.
#[pyfunction]
#[pyo3(signature = (f, index, ell, n = 1))]
fn gauss_sum(f: u64, index: usize, ell: u64, n: u32) -> PyResult<(f64, f64)> {
    let t = lfunc::gauss_sum(&character(f, index, ell, n)?).map_err(err)?;
    Ok((t.re, t.im))
}

/// L(E, chi, 1) as (re, im, error bound).
#[pyfunction]
#[pyo3(signature = (curve, f, index, ell, n = 1, eps = lfunc::DEFAULT_EPS, root_number = None))]
fn twisted_l_value(curve: &PyCurve, f: u64, index: usize, ell: u64, n: u32, eps: f64, root_number: Option<i8>) -> PyResult<(f64, f64, f64)> {
    let chi = character(f, index, ell, n)?;
    let ctx = LContext::new(curve.inner.clone(), f, eps, root_number, None).map_err(err)?;
    let l = ctx.twisted_l_value(&chi, eps).map_err(err)?;
    Ok((l.re, l.im, l.error_bound))
}

#[pyfunction]
#[pyo3(signature = (curve, ell, x, eps = lfunc::DEFAULT_EPS))]
fn n_el_count<'py>(py: Python<'py>, curve: &PyCurve, ell: u64, x: u64, eps: f64) -> PyResult<Bound<'py, PyAny>> {
    let fmax = lfunc::max_conductor_needed(&curve.inner, ell, x).map_err(err)?;
    let ctx = LContext::new(curve.inner.clone(), fmax, eps, None, None).map_err(err)?;
    to_py(py, &lfunc::n_el_count(&ctx, ell, x, eps).map_err(err)?)
}

/// v is a prime or the string "inf".
#[pyfunction]
fn hilbert_symbol(a: i64, b: i64, v: &Bound<'_, PyAny>) -> PyResult<i8> {
    let place = if let Ok(p) = v.extract::<u64>() {
        Place::Finite(p)
    } else if v.extract::<String>().is_ok_and(|s| s == "inf") {
        Place::Infinity
    } else {
        return Err(PyValueError::new_err("place must be a prime or \"inf\""));
    };
    conics::hilbert_symbol(a, b, place).map_err(err)
}

#[pyfunction]
fn conic_invariants<'py>(py: Python<'py>, a: i64, b: i64, c: i64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &conics::conic_invariants(a, b, c).map_err(err)?)
}

#[pyfunction]
fn member_quadratic(a: i64, b: i64, c: i64, d: i64) -> PyResult<bool> {
    conics::member_quadratic(&conics::conic_invariants(a, b, c).map_err(err)?, d).map_err(err)
}

/// The first point found as ((u, v), (u, v), (u, v)) with coordinates u + v sqrt d.
#[pyfunction]
fn find_conic_point(a: i64, b: i64, c: i64, d: i64, height: i64) -> PyResult<Option<[(i64, i64); 3]>> {
    conics::find_integral_point(a, b, c, d, height).map_err(err)
}

/// (a, b, c) with x = (a + b sqrt d) / c on y^2 = quartic, coefficients q4..q0.
#[pyfunction]
fn search_point(quartic: [i64; 5], d: i64, height: i64) -> PyResult<Option<(i64, i64, i64)>> {
    let space = homspace::QuarticSpace::new("quartic", quartic).map_err(err)?;
    Ok(homspace::search_point(&space, d, height).map_err(err)?.map(|h| (h.a, h.b, h.c)))
}

#[pyfunction]
fn selftest<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &dstab::selftest::run())
}

#[pymodule]
fn dstab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCurve>()?;
    m.add_function(wrap_pyfunction!(classify_prime, m)?)?;
    m.add_function(wrap_pyfunction!(density_report, m)?)?;
    m.add_function(wrap_pyfunction!(count_sl2_with_fixed_points, m)?)?;
    m.add_function(wrap_pyfunction!(delta_theoretical, m)?)?;
    m.add_function(wrap_pyfunction!(count_cyclic_fields, m)?)?;
    m.add_function(wrap_pyfunction!(characters_of_order, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_fields, m)?)?;
    m.add_function(wrap_pyfunction!(build_s_ramified_character, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_sum, m)?)?;
    m.add_function(wrap_pyfunction!(twisted_l_value, m)?)?;
    m.add_function(wrap_pyfunction!(n_el_count, m)?)?;
    m.add_function(wrap_pyfunction!(hilbert_symbol, m)?)?;
    m.add_function(wrap_pyfunction!(conic_invariants, m)?)?;
    m.add_function(wrap_pyfunction!(member_quadratic, m)?)?;
    m.add_function(wrap_pyfunction!(find_conic_point, m)?)?;
    m.add_function(wrap_pyfunction!(search_point, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
