//! Analytic non-vanishing weights `ρ` with a fixed log branch per interval.

use super::IntervalContour;
use crate::error::{Error, Result};
use crate::numerics::{abs_f64, czero, poly_roots, two_pi_i, ComplexValue, Polynomial, Real};

/// Weight family.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// `ρ = p(t)`.
    Polynomial(Polynomial),
    /// `ρ = p(t) / q(t)`.
    Rational { num: Polynomial, den: Polynomial },
    /// `ρ = exp(p(t))`.
    ExpPolynomial(Polynomial),
}

impl WeightKind {
    pub fn family(&self) -> &'static str {
        match self {
            WeightKind::Polynomial(_) => "polynomial",
            WeightKind::Rational { .. } => "rational",
            WeightKind::ExpPolynomial(_) => "exp-polynomial",
        }
    }

    pub fn eval(&self, t: &ComplexValue) -> ComplexValue {
        match self {
            WeightKind::Polynomial(p) => p.eval(t),
            WeightKind::Rational { num, den } => num.eval(t) / den.eval(t),
            WeightKind::ExpPolynomial(p) => p.eval(t).exp(),
        }
    }

    fn zeros_and_poles(&self) -> Result<(Vec<ComplexValue>, Vec<ComplexValue>)> {
        let roots = |p: &Polynomial| -> Result<Vec<ComplexValue>> {
            if p.is_zero() {
                return Err(Error::InvalidInput("weight polynomial is identically zero".into()));
            }
            if p.degree() == 0 {
                Ok(Vec::new())
            } else {
                poly_roots(p)
            }
        };
        match self {
            WeightKind::Polynomial(p) => Ok((roots(p)?, Vec::new())),
            WeightKind::Rational { num, den } => Ok((roots(num)?, roots(den)?)),
            WeightKind::ExpPolynomial(_) => Ok((Vec::new(), Vec::new())),
        }
    }
}

/// Per-interval weight data: the analytic expression plus the anchor of the
/// log branch (interval midpoint, principal log there plus `2πi·shift`).
#[derive(Debug, Clone)]
pub struct ComponentWeight {
    pub kind: WeightKind,
    pub zeros: Vec<ComplexValue>,
    pub poles: Vec<ComplexValue>,
    pub anchor: Real,
    pub branch_shift: i64,
    log_anchor: ComplexValue,
    /// Distance from the interval to the nearest zero or pole (infinite when none).
    pub analytic_margin: f64,
}

#[derive(Debug, Clone)]
pub struct Weight {
    components: Vec<ComponentWeight>,
    identity: bool,
}

impl Weight {
    /// Default margin factor relative to `diam(Δ)`.
    pub const DEFAULT_MARGIN: f64 = 0.05;

    /// `ρ ≡ 1`.
    pub fn unit(contour: &IntervalContour) -> Self {
        let one = Polynomial::one(contour.prec());
        Self::new(WeightKind::Polynomial(one), contour, Self::DEFAULT_MARGIN).expect("unit weight is valid")
    }

    /// One expression shared by every interval, principal branch at each midpoint.
    pub fn new(kind: WeightKind, contour: &IntervalContour, margin: f64) -> Result<Self> {
        let n = contour.intervals().len();
        Self::per_component(vec![kind; n], vec![0; n], contour, margin)
    }

    /// Separate records per interval with explicit branch shifts.
    pub fn per_component(
        kinds: Vec<WeightKind>,
        shifts: Vec<i64>,
        contour: &IntervalContour,
        margin: f64,
    ) -> Result<Self> {
        let n = contour.intervals().len();
        if kinds.len() != n || shifts.len() != n {
            return Err(Error::InvalidInput(format!(
                "weight needs {n} component records and branch shifts, got {} and {}",
                kinds.len(),
                shifts.len()
            )));
        }
        let prec = contour.prec();
        let min_dist = margin * contour.diameter();
        let mut identity = true;
        let mut components = Vec::with_capacity(n);
        for (j, (kind, shift)) in kinds.into_iter().zip(shifts).enumerate() {
            let (zeros, poles) = kind.zeros_and_poles()?;
            let mut analytic_margin = f64::INFINITY;
            for r in zeros.iter().chain(&poles) {
                let d = contour.distance_to_interval(j, r);
                let dall = contour.distance(r);
                if dall < min_dist {
                    return Err(Error::InvalidInput(format!(
                        "weight zero/pole at ({:e}, {:e}) lies within {:e} of the contour",
                        r.real().to_f64(),
                        r.imag().to_f64(),
                        min_dist
                    )));
                }
                analytic_margin = analytic_margin.min(d);
            }
            let (a, b) = &contour.intervals()[j];
            let anchor = Real::with_val(prec, a + b) / 2u32;
            let c = ComplexValue::with_val(prec, (&anchor, 0));
            let rho_c = kind.eval(&c);
            if rho_c.is_zero() {
                return Err(Error::InvalidInput("weight vanishes at an interval midpoint".into()));
            }
            let mut log_anchor = match &kind {
                WeightKind::ExpPolynomial(p) => p.eval(&c),
                _ => rho_c.clone().ln(),
            };
            log_anchor += two_pi_i(prec) * shift;
            let is_one = matches!(&kind, WeightKind::Polynomial(p) if p.degree() == 0 && p.coeffs()[0] == 1)
                && shift == 0;
            identity &= is_one;
            components.push(ComponentWeight {
                kind,
                zeros,
                poles,
                anchor,
                branch_shift: shift,
                log_anchor,
                analytic_margin,
            });
        }
        Ok(Self { components, identity })
    }

    pub fn components(&self) -> &[ComponentWeight] {
        &self.components
    }

    /// True for `ρ ≡ 1` with the principal branch everywhere.
    pub fn is_identity(&self) -> bool {
        self.identity
    }

    /// `ρ(t)` using the record of interval `j`.
    pub fn eval(&self, j: usize, t: &ComplexValue) -> ComplexValue {
        self.components[j].kind.eval(t)
    }

    /// Continuous branch of `log ρ` near interval `j`, valid in any convex
    /// neighbourhood of the interval free of zeros and poles.
    pub fn log_eval(&self, j: usize, t: &ComplexValue) -> ComplexValue {
        let comp = &self.components[j];
        let prec = t.prec().0;
        if let WeightKind::ExpPolynomial(p) = &comp.kind {
            let mut v = p.eval(t);
            v += two_pi_i(prec) * comp.branch_shift;
            return v;
        }
        let c = ComplexValue::with_val(prec, (&comp.anchor, 0));
        let mut acc = ComplexValue::with_val(prec, &comp.log_anchor);
        for r in &comp.zeros {
            let ratio = ComplexValue::with_val(prec, t - r) / ComplexValue::with_val(prec, &c - r);
            acc += ratio.ln();
        }
        for r in &comp.poles {
            let ratio = ComplexValue::with_val(prec, t - r) / ComplexValue::with_val(prec, &c - r);
            acc -= ratio.ln();
        }
        acc
    }

    /// `λ_ρ = −log ρ` on interval `j`.
    pub fn lambda(&self, j: usize, t: &ComplexValue) -> ComplexValue {
        let mut v = self.log_eval(j, t);
        v *= -1i32;
        v
    }

    /// True when every component has real coefficients.
    pub fn is_real(&self) -> bool {
        let real_poly = |p: &Polynomial| p.coeffs().iter().all(|c| c.imag().is_zero());
        self.components.iter().all(|c| match &c.kind {
            WeightKind::Polynomial(p) | WeightKind::ExpPolynomial(p) => real_poly(p),
            WeightKind::Rational { num, den } => real_poly(num) && real_poly(den),
        }) && self.components.iter().all(|c| c.branch_shift == 0)
    }

    /// Largest `|log ρ(t) − (principal) log ρ(t)|` style consistency check:
    /// `exp(log_eval) = ρ` at `t`.
    pub fn branch_residual(&self, j: usize, t: &ComplexValue) -> f64 {
        let e = self.log_eval(j, t).exp();
        let r = self.eval(j, t);
        let prec = t.prec().0;
        abs_f64(&ComplexValue::with_val(prec, &e - &r)) / abs_f64(&r).max(1e-300)
    }
}

/// Zero constant in the weight's precision; used by trivial evaluators.
pub fn zero_like(t: &ComplexValue) -> ComplexValue {
    czero(t.prec().0)
}
