//! Interval contours `Δ = ∪[a_j, b_j]`, the square root `w_Δ`, moments of
//! `f_ρ` and Cauchy integrals over `Δ`.
//!
//! Every integral over a real segment between two consecutive branch points
//! goes through [`IntervalContour::integrate_segment`]: the affine map
//! `t = c + r s` turns the endpoint square roots into the Chebyshev weight
//! `(1 − s²)^(-1/2)`. Near-cut evaluations deform the segment into the
//! parabola `t(s) = c + r s + i h (1 − s²)` bulging away from the evaluation
//! point, with `w^+` continued analytically off the segment.

pub mod weight;

pub use weight::{ComponentWeight, Weight, WeightKind};

use crate::error::{Error, Result};
use crate::numerics::quadrature::{adaptive_legendre, cached_rule, chebyshev_doubling, QuadratureKind};
use crate::numerics::{abs_f64, cx, czero, pi, ComplexValue, Real};
use serde::{Deserialize, Serialize};

/// Quadrature controls shared by contour and surface integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings {
    pub start_order: usize,
    pub max_order: usize,
    /// Relative convergence tolerance as a power of two (`2^-tol_bits`).
    pub tol_bits: u32,
}

impl QuadSettings {
    /// Tolerance `2^-(bits − 24)`.
    pub fn for_prec(prec: u32) -> Self {
        Self { start_order: 32, max_order: 1 << 14, tol_bits: prec.saturating_sub(24) }
    }

    pub fn rel_tol(&self) -> f64 {
        2f64.powi(-(self.tol_bits as i32))
    }
}

/// One-sided boundary values from above and below the real axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedValue {
    pub value_plus: ComplexValue,
    pub value_minus: ComplexValue,
}

/// Side of the real axis for boundary values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// Where a real number sits relative to the contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealPosition {
    Left,
    Right,
    /// Interior of interval `j` (0-based).
    Interval(usize),
    /// Open gap between intervals `j` and `j + 1`.
    Gap(usize),
    /// Branch point `e_i`.
    BranchPoint(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Interval(usize),
    Gap(usize),
}

/// Real segment `[e_i, e_{i+1}]` between consecutive branch points.
#[derive(Debug, Clone)]
pub struct Segment {
    pub lo_index: usize,
    pub kind: SegmentKind,
    pub p: Real,
    pub q: Real,
}

impl Segment {
    pub fn center(&self) -> Real {
        Real::with_val(self.p.prec(), &self.p + &self.q) / 2u32
    }

    pub fn radius(&self) -> Real {
        Real::with_val(self.p.prec(), &self.q - &self.p) / 2u32
    }

    /// `(t(s), t'(s))` on the parabola of height `h`.
    pub fn parabola(&self, s: &Real, h: &Real, prec: u32) -> (ComplexValue, ComplexValue) {
        let c = self.center();
        let r = self.radius();
        let one_m_s2 = Real::with_val(prec, 1) - Real::with_val(prec, s.square_ref());
        let re = Real::with_val(prec, &r * s) + &c;
        let im = Real::with_val(prec, h * &one_m_s2);
        let mut dim = Real::with_val(prec, h * s);
        dim *= -2i32;
        (ComplexValue::with_val(prec, (re, im)), ComplexValue::with_val(prec, (r, dim)))
    }
}

/// The S-contour as disjoint real intervals.
#[derive(Debug, Clone)]
pub struct IntervalContour {
    intervals: Vec<(Real, Real)>,
    branch_points: Vec<Real>,
    prec: u32,
}

impl IntervalContour {
    pub fn new(intervals: Vec<(Real, Real)>, prec: u32) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidInput("contour needs at least one interval".into()));
        }
        let mut branch_points = Vec::with_capacity(2 * intervals.len());
        for (a, b) in &intervals {
            if let Some(last) = branch_points.last() {
                if a <= last {
                    return Err(Error::InvalidInput("intervals must be strictly increasing and disjoint".into()));
                }
            }
            if a >= b {
                return Err(Error::InvalidInput("each interval needs a < b".into()));
            }
            branch_points.push(Real::with_val(prec, a));
            branch_points.push(Real::with_val(prec, b));
        }
        let intervals = intervals
            .into_iter()
            .map(|(a, b)| (Real::with_val(prec, a), Real::with_val(prec, b)))
            .collect();
        Ok(Self { intervals, branch_points, prec })
    }

    pub fn from_f64(intervals: &[(f64, f64)], prec: u32) -> Result<Self> {
        Self::new(
            intervals.iter().map(|&(a, b)| (Real::with_val(prec, a), Real::with_val(prec, b))).collect(),
            prec,
        )
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn genus(&self) -> usize {
        self.intervals.len() - 1
    }

    pub fn intervals(&self) -> &[(Real, Real)] {
        &self.intervals
    }

    /// `e_0 = a_1, e_1 = b_1, …, e_{2g+1} = b_{g+1}`.
    pub fn branch_points(&self) -> &[Real] {
        &self.branch_points
    }

    pub fn branch_point_c(&self, i: usize, prec: u32) -> ComplexValue {
        ComplexValue::with_val(prec, (&self.branch_points[i], 0))
    }

    pub fn diameter(&self) -> f64 {
        (self.branch_points.last().unwrap().clone() - &self.branch_points[0]).to_f64()
    }

    pub fn hull_center(&self) -> Real {
        Real::with_val(self.prec, &self.branch_points[0] + self.branch_points.last().unwrap()) / 2u32
    }

    pub fn max_abs_branch_point(&self) -> f64 {
        self.branch_points.iter().map(|e| e.to_f64().abs()).fold(0.0, f64::max)
    }

    /// All `2g + 1` segments between consecutive branch points.
    pub fn segments(&self) -> Vec<Segment> {
        (0..self.branch_points.len() - 1).map(|i| self.segment(i)).collect()
    }

    /// Segment `[e_i, e_{i+1}]`.
    pub fn segment(&self, i: usize) -> Segment {
        let kind = if i % 2 == 0 { SegmentKind::Interval(i / 2) } else { SegmentKind::Gap(i / 2) };
        Segment { lo_index: i, kind, p: self.branch_points[i].clone(), q: self.branch_points[i + 1].clone() }
    }

    pub fn interval_segment(&self, j: usize) -> Segment {
        self.segment(2 * j)
    }

    pub fn gap_segment(&self, j: usize) -> Segment {
        self.segment(2 * j + 1)
    }

    pub fn locate_real(&self, x: &Real) -> RealPosition {
        if x < &self.branch_points[0] {
            return RealPosition::Left;
        }
        if x > self.branch_points.last().unwrap() {
            return RealPosition::Right;
        }
        for (i, e) in self.branch_points.iter().enumerate() {
            if x == e {
                return RealPosition::BranchPoint(i);
            }
        }
        let i = self.branch_points.iter().rposition(|e| e < x).unwrap();
        if i % 2 == 0 {
            RealPosition::Interval(i / 2)
        } else {
            RealPosition::Gap(i / 2)
        }
    }

    /// True when `z` is real and lies on some interval (endpoints included).
    pub fn on_contour(&self, z: &ComplexValue) -> bool {
        z.imag().is_zero()
            && matches!(
                self.locate_real(z.real()),
                RealPosition::Interval(_) | RealPosition::BranchPoint(_)
            )
    }

    pub fn distance_to_interval(&self, j: usize, z: &ComplexValue) -> f64 {
        let (a, b) = &self.intervals[j];
        let x = z.real().to_f64();
        let y = z.imag().to_f64();
        let (a, b) = (a.to_f64(), b.to_f64());
        let dx = if x < a { a - x } else if x > b { x - b } else { 0.0 };
        dx.hypot(y)
    }

    pub fn distance(&self, z: &ComplexValue) -> f64 {
        (0..self.intervals.len()).map(|j| self.distance_to_interval(j, z)).fold(f64::INFINITY, f64::min)
    }

    /// `w_Δ(z) = ∏ √(z − a_j) √(z − b_j)` off the contour.
    pub fn w_delta_eval(&self, z: &ComplexValue) -> Result<ComplexValue> {
        if self.on_contour(z) {
            return Err(Error::OnCut);
        }
        Ok(self.w0(z))
    }

    /// Sheet-0 branch of `w`; on the contour itself returns the upper trace.
    pub fn w0(&self, z: &ComplexValue) -> ComplexValue {
        let prec = z.prec().0;
        if z.imag().is_zero() {
            let x = Real::with_val(prec, z.real());
            return self.w_plus_real(&x);
        }
        let mut acc = cx(prec, 1.0, 0.0);
        for e in &self.branch_points {
            acc *= ComplexValue::with_val(prec, z - e).sqrt();
        }
        acc
    }

    /// `w^+(x) = ∏_e φ_e(x)` with `φ_e = √(x − e)` for `x > e` and `i√(e − x)` otherwise.
    pub fn w_plus_real(&self, x: &Real) -> ComplexValue {
        let prec = x.prec();
        let mut modulus = Real::with_val(prec, 1);
        let mut count_i = 0usize;
        for e in &self.branch_points {
            let d = Real::with_val(prec, x - e);
            if d >= 0 {
                modulus *= d.sqrt();
            } else {
                modulus *= (-d).sqrt();
                count_i += 1;
            }
        }
        let mut v = ComplexValue::with_val(prec, (modulus, 0));
        match count_i % 4 {
            0 => {}
            1 => v *= cx(prec, 0.0, 1.0),
            2 => v *= -1i32,
            _ => v *= cx(prec, 0.0, -1.0),
        }
        v
    }

    /// One-sided values of `w_Δ` at a real point interior to an interval.
    pub fn w_delta_trace(&self, x: &Real) -> Result<TracedValue> {
        match self.locate_real(x) {
            RealPosition::Interval(_) => {
                let plus = self.w_plus_real(x);
                let minus = ComplexValue::with_val(x.prec(), -&plus);
                Ok(TracedValue { value_plus: plus, value_minus: minus })
            }
            _ => Err(Error::InvalidInput("trace requested away from an interval interior".into())),
        }
    }

    /// `w^+(t(s)) / √(1 − s²)` continued analytically to the parabola of height `h`.
    fn w_plus_reduced(&self, seg: &Segment, s: &Real, h: &Real, t: &ComplexValue, prec: u32) -> ComplexValue {
        let r = seg.radius();
        let one_m_s = Real::with_val(prec, 1) - s;
        let one_p_s = Real::with_val(prec, 1) + s;
        let f1 = ComplexValue::with_val(prec, (&r, Real::with_val(prec, h * &one_m_s))).sqrt();
        let f2 = ComplexValue::with_val(prec, (&r, -Real::with_val(prec, h * &one_p_s))).sqrt();
        let mut acc = f1 * f2;
        let mut above = 0usize;
        for (i, e) in self.branch_points.iter().enumerate() {
            if i < seg.lo_index {
                acc *= ComplexValue::with_val(prec, t - e).sqrt();
            } else if i > seg.lo_index + 1 {
                let d = ComplexValue::with_val(prec, e - t);
                acc *= d.sqrt();
                above += 1;
            }
        }
        // i^(1 + m): one factor from q itself, m from the branch points above q.
        match (1 + above) % 4 {
            0 => {}
            1 => acc *= cx(prec, 0.0, 1.0),
            2 => acc *= -1i32,
            _ => acc *= cx(prec, 0.0, -1.0),
        }
        acc
    }

    /// `∫_seg F(t) / w^+(t) dt` along the real segment (`h = 0`) or along the
    /// parabola of height `h` (same value when `F` is analytic in between).
    /// `adaptive` selects bisection panels in the Chebyshev angle; otherwise
    /// the Chebyshev-weighted rule is doubled until converged.
    pub fn integrate_segment<F>(
        &self,
        seg: &Segment,
        f: F,
        dim: usize,
        h: Option<&Real>,
        adaptive: bool,
        settings: &QuadSettings,
        prec: u32,
    ) -> Result<Vec<ComplexValue>>
    where
        F: Fn(&ComplexValue) -> Vec<ComplexValue>,
    {
        let zero = Real::new(prec);
        let h = h.unwrap_or(&zero);
        let integrand = |s: &Real| -> Vec<ComplexValue> {
            let (t, dt) = seg.parabola(s, h, prec);
            let red = self.w_plus_reduced(seg, s, h, &t, prec);
            let factor = dt / red;
            let mut v = f(&t);
            for x in v.iter_mut() {
                *x *= &factor;
            }
            v
        };
        if !adaptive {
            let (v, _) =
                chebyshev_doubling(integrand, dim, prec, settings.start_order, settings.max_order, settings.rel_tol())?;
            return Ok(v);
        }
        // Scale estimate from a coarse Chebyshev sum of moduli.
        let coarse = cached_rule(QuadratureKind::ChebyshevWeighted, 64, prec)?;
        let mut scale = 0.0f64;
        for (s, w) in coarse.nodes.iter().zip(&coarse.weights) {
            let v = integrand(s);
            scale += w.to_f64() * v.iter().map(abs_f64).fold(0.0, f64::max);
        }
        let abs_tol = settings.rel_tol() * scale.max(1e-300);
        adaptive_legendre(
            |theta: &Real| integrand(&Real::with_val(prec, theta.cos_ref())),
            dim,
            &Real::new(prec),
            &pi(prec),
            abs_tol,
            prec,
        )
    }

    /// Signed parabola height for a Cauchy-type integrand over interval `j`
    /// with a pole near `z`: bulge away from `z`, staying within half the
    /// analyticity margin of the density.
    pub(crate) fn bulge_for(&self, seg: &Segment, z_im_sign: i32, margin: f64, prec: u32) -> Real {
        let r = seg.radius().to_f64();
        let mag = r.min(0.5 * margin);
        Real::with_val(prec, if z_im_sign >= 0 { -mag } else { mag })
    }

    /// `(1/2πi) ∫_Δ φ_j(t) / (w^+(t) (t − z)) dt`, where `φ_j` is the density on
    /// interval `j` and `margins[j]` bounds its analyticity region. Real `z` on
    /// an interval requires `side`.
    pub fn cauchy_integral<F>(
        &self,
        phi: F,
        margins: &[f64],
        z: &ComplexValue,
        side: Option<Side>,
        settings: &QuadSettings,
        prec: u32,
    ) -> Result<ComplexValue>
    where
        F: Fn(usize, &ComplexValue) -> ComplexValue,
    {
        let v = self.cauchy_integral_parts(phi, margins, z, side, settings, prec)?;
        let mut total = czero(prec);
        for x in v {
            total += x;
        }
        Ok(total)
    }

    /// Per-interval contributions of [`Self::cauchy_integral`].
    pub fn cauchy_integral_parts<F>(
        &self,
        phi: F,
        margins: &[f64],
        z: &ComplexValue,
        side: Option<Side>,
        settings: &QuadSettings,
        prec: u32,
    ) -> Result<Vec<ComplexValue>>
    where
        F: Fn(usize, &ComplexValue) -> ComplexValue,
    {
        let on = self.on_contour(z);
        if on && side.is_none() {
            return Err(Error::OnCut);
        }
        let sign = if z.imag().is_zero() {
            match side {
                Some(Side::Minus) => -1,
                _ => 1,
            }
        } else if z.imag().is_sign_positive() {
            1
        } else {
            -1
        };
        let tpi = crate::numerics::two_pi_i(prec);
        let mut parts = Vec::with_capacity(self.intervals.len());
        for j in 0..self.intervals.len() {
            let seg = self.interval_segment(j);
            let len = 2.0 * seg.radius().to_f64();
            let d = self.distance_to_interval(j, z);
            let integrand = |t: &ComplexValue| {
                let mut v = phi(j, t);
                v /= ComplexValue::with_val(prec, t - z);
                vec![v]
            };
            let v = if d > 0.5 * len {
                self.integrate_segment(&seg, integrand, 1, None, false, settings, prec)?
            } else {
                let h = self.bulge_for(&seg, sign, margins.get(j).copied().unwrap_or(f64::INFINITY), prec);
                self.integrate_segment(&seg, integrand, 1, Some(&h), true, settings, prec)?
            };
            parts.push(ComplexValue::with_val(prec, &v[0] / &tpi));
        }
        Ok(parts)
    }

    /// Analyticity margins of a weight, per interval.
    pub fn margins(weight: &Weight) -> Vec<f64> {
        weight.components().iter().map(|c| c.analytic_margin).collect()
    }
}

/// Coefficients `f_0..f_K` of `f = Σ f_k z^(-k)`.
#[derive(Debug, Clone)]
pub struct PowerSeries {
    pub coefficients: Vec<ComplexValue>,
}

impl PowerSeries {
    pub fn new(coefficients: Vec<ComplexValue>) -> Self {
        Self { coefficients }
    }

    /// Highest available index `K`.
    pub fn len_k(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn prec(&self) -> u32 {
        self.coefficients.first().map(|c| c.prec().0).unwrap_or(128)
    }
}

/// `f_0 = 0` and `f_k = −(1/2πi) ∫_Δ t^(k−1) ρ(t)/w^+(t) dt` for `1 ≤ k ≤ K`,
/// computed at `prec` bits.
pub fn f_rho_coefficients(
    contour: &IntervalContour,
    weight: &Weight,
    k_count: usize,
    settings: &QuadSettings,
    prec: u32,
) -> Result<PowerSeries> {
    if k_count == 0 {
        return Err(Error::InvalidInput("moment count must be >= 1".into()));
    }
    let mut totals = vec![czero(prec); k_count];
    for j in 0..contour.intervals().len() {
        let seg = contour.interval_segment(j);
        let v = contour.integrate_segment(
            &seg,
            |t| {
                let mut out = Vec::with_capacity(k_count);
                let mut acc = weight.eval(j, t);
                for _ in 0..k_count {
                    out.push(acc.clone());
                    acc *= t;
                }
                out
            },
            k_count,
            None,
            false,
            settings,
            prec,
        )?;
        for (a, x) in totals.iter_mut().zip(v) {
            *a += x;
        }
    }
    let tpi = crate::numerics::two_pi_i(prec);
    let mut coefficients = vec![czero(prec)];
    for t in totals {
        coefficients.push(ComplexValue::with_val(prec, -(t / &tpi)));
    }
    Ok(PowerSeries { coefficients })
}

/// `f_ρ(z)` off the contour.
pub fn f_rho_eval(
    contour: &IntervalContour,
    weight: &Weight,
    z: &ComplexValue,
    settings: &QuadSettings,
    prec: u32,
) -> Result<ComplexValue> {
    let margins = IntervalContour::margins(weight);
    contour.cauchy_integral(|j, t| weight.eval(j, t), &margins, z, None, settings, prec)
}

/// Boundary value `f_ρ^±(x)` at an interval interior point.
pub fn f_rho_trace(
    contour: &IntervalContour,
    weight: &Weight,
    x: &Real,
    side: Side,
    settings: &QuadSettings,
    prec: u32,
) -> Result<ComplexValue> {
    let margins = IntervalContour::margins(weight);
    let z = ComplexValue::with_val(prec, (x, 0));
    contour.cauchy_integral(|j, t| weight.eval(j, t), &margins, &z, Some(side), settings, prec)
}

/// Result of the Plemelj self-test.
#[derive(Debug, Clone)]
pub struct SokhotskiReport {
    /// `|(f^+ − f^-)(x) − ρ/w^+(x)|` from exact one-sided traces.
    pub residual: f64,
    /// `(δ, residual at x ± iδ)` for shrinking `δ`.
    pub approach: Vec<(f64, f64)>,
    /// Fitted exponent of residual vs `δ`.
    pub observed_order: f64,
}

pub fn sokhotski_check(
    contour: &IntervalContour,
    weight: &Weight,
    x: &Real,
    settings: &QuadSettings,
    prec: u32,
) -> Result<SokhotskiReport> {
    let j = match contour.locate_real(x) {
        RealPosition::Interval(j) => j,
        _ => return Err(Error::InvalidInput("x must be interior to an interval".into())),
    };
    let xc = ComplexValue::with_val(prec, (x, 0));
    let expected = weight.eval(j, &xc) / contour.w_plus_real(&Real::with_val(prec, x));
    let margins = IntervalContour::margins(weight);
    let rho = |k: usize, t: &ComplexValue| weight.eval(k, t);
    let plus = contour.cauchy_integral(rho, &margins, &xc, Some(Side::Plus), settings, prec)?;
    let minus = contour.cauchy_integral(rho, &margins, &xc, Some(Side::Minus), settings, prec)?;
    let residual = abs_f64(&(plus - minus - &expected));
    let mut approach = Vec::new();
    for k in [4, 6, 8] {
        let delta = 10f64.powi(-k);
        let up = ComplexValue::with_val(prec, (x, Real::with_val(prec, delta)));
        let dn = ComplexValue::with_val(prec, (x, Real::with_val(prec, -delta)));
        let fu = contour.cauchy_integral(rho, &margins, &up, None, settings, prec)?;
        let fd = contour.cauchy_integral(rho, &margins, &dn, None, settings, prec)?;
        approach.push((delta, abs_f64(&(fu - fd - &expected))));
    }
    let (d0, r0) = approach[0];
    let (d1, r1) = approach[approach.len() - 1];
    let observed_order = if r0 > 0.0 && r1 > 0.0 { (r0 / r1).ln() / (d0 / d1).ln() } else { f64::INFINITY };
    Ok(SokhotskiReport { residual, approach, observed_order })
}

#[cfg(test)]
mod tests;
