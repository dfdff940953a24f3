//! Python bindings: contours and moments, Padé pairs, the Riemann surface
//! (periods, Abel map, theta, inversion) and the predictor `Ψ_n`.
//!
//! Complex numbers cross the boundary as Python `complex` (double precision);
//! full-precision values are also offered as decimal strings.

use num_complex::Complex64;
use padesurf_core::contour::{f_rho_coefficients, IntervalContour, QuadSettings, Weight, WeightKind};
use padesurf_core::numerics::{cx, real_to_string, to_c64, Polynomial};
use padesurf_core::pade::{denominator_zeros, pade_solve, DEFAULT_BITS_PER_ORDER};
use padesurf_core::surface::{build_surface, theta, HyperellipticSurface, SurfacePoint};
use padesurf_core::szego::{classify_index, predictor_build, szego_build, DivisorTable, PsiFunction, SzegoData};
use padesurf_core::{ComplexValue, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use std::sync::{Arc, Mutex};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::OnCut | Error::ExcludedPoint(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn c64(z: &ComplexValue) -> Complex64 {
    let (re, im) = to_c64(z);
    Complex64::new(re, im)
}

fn mp(z: Complex64, prec: u32) -> ComplexValue {
    cx(prec, z.re, z.im)
}

fn strings(z: &ComplexValue) -> (String, String) {
    (real_to_string(z.real()), real_to_string(z.imag()))
}

fn contour(intervals: &[(f64, f64)], precision: u32) -> PyResult<IntervalContour> {
    IntervalContour::from_f64(intervals, precision).map_err(py_err)
}

/// Polynomial weight from ascending coefficients; `None` is `ρ ≡ 1`.
fn weight(c: &IntervalContour, coefficients: Option<Vec<Complex64>>) -> PyResult<Weight> {
    match coefficients {
        None => Ok(Weight::unit(c)),
        Some(v) => {
            let p = Polynomial::new(v.into_iter().map(|z| mp(z, c.prec())).collect());
            Weight::new(WeightKind::Polynomial(p), c, Weight::DEFAULT_MARGIN).map_err(py_err)
        }
    }
}

fn point(z: Option<Complex64>, sheet: u8, prec: u32) -> SurfacePoint {
    match z {
        Some(z) => SurfacePoint::new(mp(z, prec), sheet),
        None => SurfacePoint::infinity(sheet),
    }
}

/// Coefficients `f_0..f_{count−1}` of `f_ρ(z) = Σ f_k z^{−k}` as decimal string pairs.
#[pyfunction]
#[pyo3(signature = (intervals, count, weight_coefficients=None, precision=256))]
fn moments(
    intervals: Vec<(f64, f64)>,
    count: usize,
    weight_coefficients: Option<Vec<Complex64>>,
    precision: u32,
) -> PyResult<Vec<(String, String)>> {
    let c = contour(&intervals, precision)?;
    let w = weight(&c, weight_coefficients)?;
    let s = f_rho_coefficients(&c, &w, count.max(1) - 1, &QuadSettings::for_prec(precision), precision)
        .map_err(py_err)?;
    Ok(s.coefficients.iter().map(strings).collect())
}

/// Monic Padé denominator `Q_n`: ascending coefficients (strings) and zeros.
#[pyfunction]
#[pyo3(signature = (intervals, n, weight_coefficients=None, precision=256))]
fn pade_denominator(
    intervals: Vec<(f64, f64)>,
    n: usize,
    weight_coefficients: Option<Vec<Complex64>>,
    precision: u32,
) -> PyResult<(Vec<(String, String)>, Vec<Complex64>)> {
    let prec = precision.max(DEFAULT_BITS_PER_ORDER * n as u32);
    let c = contour(&intervals, prec)?;
    let w = weight(&c, weight_coefficients)?;
    let s = f_rho_coefficients(&c, &w, 2 * n + 1, &QuadSettings::for_prec(prec), prec).map_err(py_err)?;
    let pair = pade_solve(&s, n, precision, DEFAULT_BITS_PER_ORDER).map_err(py_err)?;
    let zeros = if pair.degree() > 0 { denominator_zeros(&pair).map_err(py_err)? } else { Vec::new() };
    Ok((pair.q.coeffs().iter().map(strings).collect(), zeros.iter().map(c64).collect()))
}

/// `θ(u)` for a Riemann matrix `b`.
#[pyfunction]
#[pyo3(signature = (b, u, precision=256))]
fn riemann_theta(b: Vec<Vec<Complex64>>, u: Vec<Complex64>, precision: u32) -> PyResult<Complex64> {
    let bm: Vec<Vec<ComplexValue>> = b.into_iter().map(|r| r.into_iter().map(|z| mp(z, precision)).collect()).collect();
    let uv: Vec<ComplexValue> = u.into_iter().map(|z| mp(z, precision)).collect();
    theta::theta_for_matrix(&bm, &uv, precision).map(|v| c64(&v)).map_err(py_err)
}

/// Two-sheeted surface of `w² = Π (z − e_i)` over a union of real intervals.
#[pyclass(frozen)]
struct Surface {
    inner: Arc<HyperellipticSurface>,
}

#[pymethods]
impl Surface {
    #[new]
    #[pyo3(signature = (intervals, precision=256))]
    fn new(intervals: Vec<(f64, f64)>, precision: u32) -> PyResult<Self> {
        let c = contour(&intervals, precision)?;
        let s = build_surface(&c, &QuadSettings::for_prec(precision)).map_err(py_err)?;
        Ok(Self { inner: Arc::new(s) })
    }

    /// Restores a surface from `snapshot_json()` output.
    #[staticmethod]
    fn from_snapshot_json(text: &str) -> PyResult<Self> {
        let snap = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let s = HyperellipticSurface::from_snapshot(&snap).map_err(py_err)?;
        Ok(Self { inner: Arc::new(s) })
    }

    fn snapshot_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.snapshot()).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[getter]
    fn genus(&self) -> usize {
        self.inner.genus()
    }

    #[getter]
    fn precision(&self) -> u32 {
        self.inner.prec()
    }

    fn period_matrix(&self) -> Vec<Vec<Complex64>> {
        self.inner.period_matrix().iter().map(|r| r.iter().map(c64).collect()).collect()
    }

    fn riemann_constants(&self) -> Vec<Complex64> {
        self.inner.riemann_constants().iter().map(c64).collect()
    }

    /// `(ω, τ)`.
    fn green_periods(&self) -> (Vec<f64>, Vec<f64>) {
        let (o, t) = self.inner.green_periods();
        (o.iter().map(|x| x.to_f64()).collect(), t.iter().map(|x| x.to_f64()).collect())
    }

    /// `(name, residual, tolerance, passed)` for every build-time check.
    fn checks(&self) -> Vec<(String, f64, f64, bool)> {
        self.inner.invariant_checks().iter().map(|c| (c.name.clone(), c.residual, c.tolerance, c.passed)).collect()
    }

    fn theta(&self, u: Vec<Complex64>) -> PyResult<Complex64> {
        if u.len() != self.inner.genus() {
            return Err(PyValueError::new_err("argument length must equal the genus"));
        }
        let uv: Vec<ComplexValue> = u.into_iter().map(|z| mp(z, self.inner.prec())).collect();
        Ok(c64(&self.inner.theta(&uv)))
    }

    /// `Ω(z^(sheet))`; `z = None` is the point at infinity.
    #[pyo3(signature = (z, sheet=0))]
    fn abel_map(&self, z: Option<Complex64>, sheet: u8) -> PyResult<Vec<Complex64>> {
        let p = point(z, sheet, self.inner.prec());
        Ok(self.inner.abel_map(&p).map_err(py_err)?.iter().map(c64).collect())
    }

    /// `Φ(z^(sheet))`.
    #[pyo3(signature = (z, sheet=0))]
    fn phi(&self, z: Complex64, sheet: u8) -> PyResult<Complex64> {
        let p = point(Some(z), sheet, self.inner.prec());
        self.inner.phi_eval(&p).map(|v| c64(&v)).map_err(py_err)
    }

    /// Solves `Ω(D) − gΩ(∞^(1)) ≡ rhs`; returns `[(sheet, z or None)]` and the lattice residual.
    fn jip_solve(&self, rhs: Vec<Complex64>) -> PyResult<(Vec<(u8, Option<Complex64>)>, f64)> {
        if rhs.len() != self.inner.genus() {
            return Err(PyValueError::new_err("rhs length must equal the genus"));
        }
        let r: Vec<ComplexValue> = rhs.into_iter().map(|z| mp(z, self.inner.prec())).collect();
        let d = self.inner.jip_solve(&r).map_err(py_err)?;
        Ok((d.points.iter().map(|p| (p.sheet, p.z.as_ref().map(c64))).collect(), d.residual))
    }
}

/// Predictor `Ψ_n` for a polynomial weight on a surface.
#[pyclass(frozen)]
struct Predictor {
    sz: SzegoData,
    table: Mutex<DivisorTable>,
}

#[pymethods]
impl Predictor {
    #[new]
    #[pyo3(signature = (surface, weight_coefficients=None))]
    fn new(surface: &Surface, weight_coefficients: Option<Vec<Complex64>>) -> PyResult<Self> {
        let w = weight(surface.inner.contour(), weight_coefficients)?;
        let sz = szego_build(surface.inner.clone(), &w).map_err(py_err)?;
        Ok(Self { sz, table: Mutex::new(DivisorTable::new()) })
    }

    fn c_rho(&self) -> Vec<Complex64> {
        self.sz.c_rho().iter().map(c64).collect()
    }

    /// `S_ρ(z^(sheet))`.
    #[pyo3(signature = (z, sheet=0))]
    fn szego(&self, z: Option<Complex64>, sheet: u8) -> PyResult<Complex64> {
        let p = point(z, sheet, self.sz.surface().prec());
        self.sz.s_rho(&p).map(|v| c64(&v)).map_err(py_err)
    }

    /// `{n, tilde_n, in_n_star, in_n_epsilon, divisor}`.
    #[pyo3(signature = (n, epsilon=0.1))]
    fn classify(&self, py: Python<'_>, n: usize, epsilon: f64) -> PyResult<Py<PyAny>> {
        let mut t = self.table.lock().expect("table lock");
        let i = classify_index(&self.sz, &mut t, n, epsilon).map_err(py_err)?;
        let d = pyo3::types::PyDict::new(py);
        d.set_item("n", i.n)?;
        d.set_item("tilde_n", i.tilde_n)?;
        d.set_item("in_n_star", i.in_n_star)?;
        d.set_item("in_n_epsilon", i.in_n_epsilon)?;
        let pts: Vec<(u8, Option<Complex64>)> = i.divisor.points.iter().map(|p| (p.sheet, p.z.as_ref().map(c64))).collect();
        d.set_item("divisor", pts)?;
        Ok(d.into_any().unbind())
    }

    /// `Ψ_n(z^(sheet))`.
    #[pyo3(signature = (n, z, sheet=0))]
    fn psi(&self, n: i64, z: Complex64, sheet: u8) -> PyResult<Complex64> {
        let mut t = self.table.lock().expect("table lock");
        let f = PsiFunction::new(&self.sz, &mut t, n).map_err(py_err)?;
        let d = self.sz.point_data(&point(Some(z), sheet, self.sz.surface().prec())).map_err(py_err)?;
        f.eval(&self.sz, &d).map(|v| c64(&v)).map_err(py_err)
    }

    /// `(γ_n, γ_n^*)` for `n ∈ 𝒩_ε`.
    #[pyo3(signature = (n, epsilon=0.1))]
    fn gammas(&self, n: usize, epsilon: f64) -> PyResult<(Complex64, Complex64)> {
        let mut t = self.table.lock().expect("table lock");
        let i = classify_index(&self.sz, &mut t, n, epsilon).map_err(py_err)?;
        let b = predictor_build(&self.sz, &mut t, &i).map_err(py_err)?;
        match (b.gamma, b.gamma_star) {
            (Some(g), Some(s)) => Ok((c64(&g), c64(&s))),
            _ => Err(PyValueError::new_err(format!("n = {n} is not in N_epsilon"))),
        }
    }
}

#[pymodule]
fn padesurf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(pade_denominator, m)?)?;
    m.add_function(wrap_pyfunction!(riemann_theta, m)?)?;
    m.add_class::<Surface>()?;
    m.add_class::<Predictor>()?;
    Ok(())
}
