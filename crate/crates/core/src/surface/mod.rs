//! Hyperelliptic surface `w² = ∏(z − e_i)` attached to an interval contour.
//!
//! Branch points are labelled `e_0 = a_1, e_1 = b_1, …, e_{2g+1} = b_{g+1}`.
//! Sheet 0 carries `w = w_Δ` (product of principal square roots), sheet 1
//! carries `−w_Δ`. The cycle `α_k` is the sum of the gap cycles (lifts of the
//! gaps `[b_m, a_{m+1}]`, `m ≤ k`) joining `I_0` to `I_{k+1}`; `β_k` encircles
//! `I_{k+1}`. The basis is canonical, so `B` is symmetric and, since `M` has
//! vanishing gap integrals, `τ = 0`.
//!
//! Abel-type integrals start at `e_0` and are evaluated on the slit
//! realization: two copies of `ℂ ∖ [a_1, b_{g+1}]` glued along `I_1`. Real
//! points inside the slit are limits from the side stored in the point
//! (from above by default). Every quantity is an analytic continuation of its
//! canonical counterpart, so lattice-invariant combinations agree exactly.

mod build;
pub mod abel;
pub mod jip;
pub mod kernel;
pub mod theta;

pub use build::build_surface;
pub use jip::Divisor;
pub use kernel::{DeltaDensity, ThirdKindReport};

use crate::contour::{IntervalContour, QuadSettings, Side};
use crate::error::{Error, Result};
use crate::numerics::{
    abs_f64, cx, czero, parse_real, real_to_string, ComplexValue, Matrix, Polynomial, Real,
};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Point `z^(k)` of the surface; `z = None` is the point at infinity of sheet `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    pub z: Option<ComplexValue>,
    pub sheet: u8,
    /// Side of the real axis for real `z` inside the slit `[a_1, b_{g+1}]`;
    /// `None` means from above, and is rejected on the intervals themselves.
    pub side: Option<Side>,
}

impl SurfacePoint {
    pub fn new(z: ComplexValue, sheet: u8) -> Self {
        Self { z: Some(z), sheet: sheet & 1, side: None }
    }

    /// Boundary point at real `x` approached from `side` on `sheet`.
    pub fn trace(x: &Real, sheet: u8, side: Side) -> Self {
        Self { z: Some(ComplexValue::with_val(x.prec(), (x, 0))), sheet: sheet & 1, side: Some(side) }
    }

    pub fn infinity(sheet: u8) -> Self {
        Self { z: None, sheet: sheet & 1, side: None }
    }

    pub fn is_infinity(&self) -> bool {
        self.z.is_none()
    }

    /// `p ↦ p*`.
    pub fn involution(&self) -> Self {
        Self { z: self.z.clone(), sheet: 1 - self.sheet, side: self.side }
    }

    /// `(−1)^k`.
    pub fn sign(&self) -> i32 {
        if self.sheet == 0 {
            1
        } else {
            -1
        }
    }
}

/// Outcome of one build-time invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl InvariantCheck {
    pub fn new(name: &str, residual: f64, tolerance: f64) -> Self {
        Self { name: name.to_string(), residual, tolerance, passed: residual <= tolerance }
    }
}

/// How the Riemann constants were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KSource {
    /// Genus 0: empty vector.
    Empty,
    /// Closed formula `(B_11 − 1)/2` (genus 1).
    Formula,
    /// Half-period selected by the theta-divisor test.
    HalfPeriodSearch,
}

/// Built surface: differentials, periods, constants and path anchors.
#[derive(Debug, Clone)]
pub struct HyperellipticSurface {
    pub(crate) contour: IntervalContour,
    pub(crate) settings: QuadSettings,
    pub(crate) prec: u32,
    /// Hull centre `c` and half-width of `[a_1, b_{g+1}]`.
    pub(crate) center: Real,
    pub(crate) radius: f64,
    pub(crate) holomorphic: Vec<Polynomial>,
    pub(crate) b_matrix: Matrix,
    pub(crate) beta_orientation: Vec<i8>,
    pub(crate) green: Polynomial,
    pub(crate) omega: Vec<Real>,
    pub(crate) tau: Vec<Real>,
    pub(crate) riemann_k: Vec<ComplexValue>,
    pub(crate) k_source: KSource,
    /// `[G, Ω_1..Ω_g]` at `e_i ± i0` on sheet 0.
    pub(crate) anchors_plus: Vec<Vec<ComplexValue>>,
    pub(crate) anchors_minus: Vec<Vec<ComplexValue>>,
    /// `lim (G(z) − log(z − c))` at `∞^(0)` along the ray through `c + i`.
    pub(crate) green_inf: ComplexValue,
    pub(crate) abel_inf: Vec<ComplexValue>,
    /// `(Im B)^{-1}`.
    pub(crate) im_b_inv: Vec<Vec<Real>>,
    pub(crate) checks: Vec<InvariantCheck>,
    pub(crate) samples: OnceLock<Vec<jip::Sample>>,
}

impl HyperellipticSurface {
    pub fn contour(&self) -> &IntervalContour {
        &self.contour
    }

    pub fn genus(&self) -> usize {
        self.contour.genus()
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn settings(&self) -> &QuadSettings {
        &self.settings
    }

    /// Numerators `L_j` of the normalized holomorphic differentials `L_j/w dz`.
    pub fn holomorphic_basis(&self) -> &[Polynomial] {
        &self.holomorphic
    }

    pub fn period_matrix(&self) -> &Matrix {
        &self.b_matrix
    }

    /// `±1` per `β_k`; `−1` means the realized loop was reversed.
    pub fn beta_orientation(&self) -> &[i8] {
        &self.beta_orientation
    }

    /// Monic `M` with `dG = M/w dz`.
    pub fn green_polynomial(&self) -> &Polynomial {
        &self.green
    }

    /// `(ω, τ)`.
    pub fn green_periods(&self) -> (&[Real], &[Real]) {
        (&self.omega, &self.tau)
    }

    pub fn riemann_constants(&self) -> &[ComplexValue] {
        &self.riemann_k
    }

    pub fn k_source(&self) -> KSource {
        self.k_source
    }

    pub fn invariant_checks(&self) -> &[InvariantCheck] {
        &self.checks
    }

    /// `Ω(∞^(0))`.
    pub fn abel_infinity(&self) -> &[ComplexValue] {
        &self.abel_inf
    }

    /// `lim_{z→∞^(0)} (G(z) − log(z − c))`, so `Φ(z) ~ e^{G∞} (z − c)`.
    pub fn green_infinity(&self) -> &ComplexValue {
        &self.green_inf
    }

    pub fn hull_center(&self) -> &Real {
        &self.center
    }

    /// Real lattice coordinates `(x, y)` with `v = x + B y`.
    pub fn lattice_coordinates(&self, v: &[ComplexValue]) -> (Vec<Real>, Vec<Real>) {
        let prec = self.prec;
        let g = self.genus();
        let mut y = vec![Real::new(prec); g];
        for (i, yi) in y.iter_mut().enumerate() {
            for (k, vk) in v.iter().enumerate() {
                *yi += Real::with_val(prec, &self.im_b_inv[i][k] * vk.imag());
            }
        }
        let mut x = Vec::with_capacity(g);
        for (i, vi) in v.iter().enumerate() {
            let mut xi = Real::with_val(prec, vi.real());
            for (k, yk) in y.iter().enumerate() {
                xi -= Real::with_val(prec, self.b_matrix[i][k].real() * yk);
            }
            x.push(xi);
        }
        (x, y)
    }

    /// `j + B m`.
    pub fn lattice_vector(&self, j: &[i64], m: &[i64]) -> Vec<ComplexValue> {
        let prec = self.prec;
        (0..self.genus())
            .map(|i| {
                let mut acc = cx(prec, j[i] as f64, 0.0);
                for (k, mk) in m.iter().enumerate() {
                    acc += ComplexValue::with_val(prec, &self.b_matrix[i][k] * *mk);
                }
                acc
            })
            .collect()
    }

    /// Nearest lattice point `(j, m)` to `v` and the residual `|v − j − Bm|_∞`.
    pub fn nearest_lattice(&self, v: &[ComplexValue]) -> (Vec<i64>, Vec<i64>, f64) {
        let (x, y) = self.lattice_coordinates(v);
        let j: Vec<i64> = x.iter().map(|t| t.to_f64().round() as i64).collect();
        let m: Vec<i64> = y.iter().map(|t| t.to_f64().round() as i64).collect();
        let lv = self.lattice_vector(&j, &m);
        let res = v
            .iter()
            .zip(&lv)
            .map(|(a, b)| abs_f64(&ComplexValue::with_val(self.prec, a - b)))
            .fold(0.0, f64::max);
        (j, m, res)
    }

    /// Distance of `v` from the lattice `ℤ^g + Bℤ^g`.
    pub fn lattice_residual(&self, v: &[ComplexValue]) -> f64 {
        self.nearest_lattice(v).2
    }

    /// Serializable record of everything computed at build time.
    pub fn snapshot(&self) -> SurfaceSnapshot {
        let cs = |v: &ComplexValue| [real_to_string(v.real()), real_to_string(v.imag())];
        let cv = |v: &[ComplexValue]| v.iter().map(cs).collect::<Vec<_>>();
        SurfaceSnapshot {
            intervals: self
                .contour
                .intervals()
                .iter()
                .map(|(a, b)| [real_to_string(a), real_to_string(b)])
                .collect(),
            precision_bits: self.prec,
            quadrature: self.settings,
            holomorphic: self.holomorphic.iter().map(|p| cv(p.coeffs())).collect(),
            b_matrix: self.b_matrix.iter().map(|r| cv(r)).collect(),
            beta_orientation: self.beta_orientation.clone(),
            green: cv(self.green.coeffs()),
            omega: self.omega.iter().map(real_to_string).collect(),
            tau: self.tau.iter().map(real_to_string).collect(),
            riemann_k: cv(&self.riemann_k),
            k_source: self.k_source,
            anchors_plus: self.anchors_plus.iter().map(|r| cv(r)).collect(),
            anchors_minus: self.anchors_minus.iter().map(|r| cv(r)).collect(),
            green_inf: cs(&self.green_inf),
            abel_inf: cv(&self.abel_inf),
            checks: self.checks.clone(),
        }
    }

    /// Restores a surface from a snapshot without recomputing any integral.
    pub fn from_snapshot(s: &SurfaceSnapshot) -> Result<Self> {
        let prec = s.precision_bits;
        let pc = |v: &[String; 2]| -> Result<ComplexValue> {
            Ok(ComplexValue::with_val(prec, (parse_real(&v[0], prec)?, parse_real(&v[1], prec)?)))
        };
        let pv = |v: &[[String; 2]]| -> Result<Vec<ComplexValue>> { v.iter().map(pc).collect() };
        let intervals = s
            .intervals
            .iter()
            .map(|[a, b]| Ok((parse_real(a, prec)?, parse_real(b, prec)?)))
            .collect::<Result<Vec<_>>>()?;
        let contour = IntervalContour::new(intervals, prec)?;
        let b_matrix: Matrix = s.b_matrix.iter().map(|r| pv(r)).collect::<Result<_>>()?;
        let g = contour.genus();
        if b_matrix.len() != g || s.holomorphic.len() != g {
            return Err(Error::InvalidInput("snapshot genus mismatch".into()));
        }
        let (center, radius) = build::hull(&contour);
        let im_b_inv = build::im_inverse(&b_matrix, prec)?;
        Ok(Self {
            settings: s.quadrature,
            prec,
            center,
            radius,
            holomorphic: s.holomorphic.iter().map(|c| pv(c).map(Polynomial::new)).collect::<Result<_>>()?,
            b_matrix,
            beta_orientation: s.beta_orientation.clone(),
            green: Polynomial::new(pv(&s.green)?),
            omega: s.omega.iter().map(|x| parse_real(x, prec)).collect::<Result<_>>()?,
            tau: s.tau.iter().map(|x| parse_real(x, prec)).collect::<Result<_>>()?,
            riemann_k: pv(&s.riemann_k)?,
            k_source: s.k_source,
            anchors_plus: s.anchors_plus.iter().map(|r| pv(r)).collect::<Result<_>>()?,
            anchors_minus: s.anchors_minus.iter().map(|r| pv(r)).collect::<Result<_>>()?,
            green_inf: pc(&s.green_inf)?,
            abel_inf: pv(&s.abel_inf)?,
            im_b_inv,
            checks: s.checks.clone(),
            samples: OnceLock::new(),
            contour,
        })
    }

    pub(crate) fn zero_vec(&self) -> Vec<ComplexValue> {
        vec![czero(self.prec); self.genus()]
    }
}

/// Text-serializable surface record (decimal strings at full precision).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSnapshot {
    pub intervals: Vec<[String; 2]>,
    pub precision_bits: u32,
    pub quadrature: QuadSettings,
    pub holomorphic: Vec<Vec<[String; 2]>>,
    pub b_matrix: Vec<Vec<[String; 2]>>,
    pub beta_orientation: Vec<i8>,
    pub green: Vec<[String; 2]>,
    pub omega: Vec<String>,
    pub tau: Vec<String>,
    pub riemann_k: Vec<[String; 2]>,
    pub k_source: KSource,
    pub anchors_plus: Vec<Vec<[String; 2]>>,
    pub anchors_minus: Vec<Vec<[String; 2]>>,
    pub green_inf: [String; 2],
    pub abel_inf: Vec<[String; 2]>,
    pub checks: Vec<InvariantCheck>,
}

/// `√d` with the branch of `√(d ± i0)` for negative real `d`.
pub(crate) fn sqrt_side(d: &ComplexValue, side: Side) -> ComplexValue {
    let prec = d.prec().0;
    if d.imag().is_zero() && d.real().is_sign_negative() && !d.real().is_zero() {
        let m = Real::with_val(prec, -d.real()).sqrt();
        return match side {
            Side::Plus => ComplexValue::with_val(prec, (0, m)),
            Side::Minus => ComplexValue::with_val(prec, (0, -m)),
        };
    }
    ComplexValue::with_val(prec, d.sqrt_ref())
}

/// Effective side of `z`: the sign of `Im z`, or `side` on the real axis.
pub(crate) fn effective_side(z: &ComplexValue, side: Side) -> Side {
    if z.imag().is_zero() {
        side
    } else if z.imag().is_sign_positive() {
        Side::Plus
    } else {
        Side::Minus
    }
}

#[cfg(test)]
mod tests;
