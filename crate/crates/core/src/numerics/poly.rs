//! Dense polynomials with multiprecision complex coefficients.

use super::{abs, cx, czero, ComplexValue, Real};

/// Coefficients lowest degree first. Trailing exact zeros are trimmed, so the
/// leading coefficient is nonzero unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<ComplexValue>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<ComplexValue>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero(prec: u32) -> Self {
        Self { coeffs: vec![czero(prec)] }
    }

    pub fn one(prec: u32) -> Self {
        Self { coeffs: vec![cx(prec, 1.0, 0.0)] }
    }

    /// `z^k`.
    pub fn monomial(k: usize, prec: u32) -> Self {
        let mut coeffs = vec![czero(prec); k + 1];
        coeffs[k] = cx(prec, 1.0, 0.0);
        Self { coeffs }
    }

    pub fn from_real_coeffs(values: &[f64], prec: u32) -> Self {
        Self::new(values.iter().map(|&v| cx(prec, v, 0.0)).collect())
    }

    /// Monic polynomial `∏(z − r)`.
    pub fn from_roots(roots: &[ComplexValue], prec: u32) -> Self {
        let mut coeffs = vec![cx(prec, 1.0, 0.0)];
        for r in roots {
            let mut next = vec![czero(prec); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= ComplexValue::with_val(prec, c * r);
            }
            coeffs = next;
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[ComplexValue] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<ComplexValue> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Option<&ComplexValue> {
        self.coeffs.get(k)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn prec(&self) -> u32 {
        self.coeffs[0].prec().0
    }

    pub fn leading(&self) -> &ComplexValue {
        self.coeffs.last().expect("nonempty coefficients")
    }

    /// Horner evaluation at the precision of `z`.
    pub fn eval(&self, z: &ComplexValue) -> ComplexValue {
        let prec = z.prec().0.max(self.prec());
        let mut acc = czero(prec);
        for c in self.coeffs.iter().rev() {
            acc *= z;
            acc += c;
        }
        acc
    }

    /// Value and first derivative.
    pub fn eval_with_derivative(&self, z: &ComplexValue) -> (ComplexValue, ComplexValue) {
        let prec = z.prec().0.max(self.prec());
        let mut p = czero(prec);
        let mut dp = czero(prec);
        for c in self.coeffs.iter().rev() {
            dp *= z;
            dp += &p;
            p *= z;
            p += c;
        }
        (p, dp)
    }

    /// `Σ |c_k| |z|^k`, the scale used for relative residuals.
    pub fn eval_abs_scale(&self, z: &ComplexValue) -> Real {
        let prec = self.prec();
        let r = abs(z);
        let mut acc = Real::new(prec);
        for c in self.coeffs.iter().rev() {
            acc *= &r;
            acc += abs(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let prec = self.prec();
        if self.coeffs.len() == 1 {
            return Self::zero(prec);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| ComplexValue::with_val(prec, c * k as u32))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec().max(other.prec());
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![czero(prec); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k] += c;
        }
        for (k, c) in other.coeffs.iter().enumerate() {
            out[k] += c;
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&cx(other.prec(), -1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec().max(other.prec());
        let mut out = vec![czero(prec); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += ComplexValue::with_val(prec, a * b);
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, s: &ComplexValue) -> Self {
        let prec = self.prec();
        Self::new(self.coeffs.iter().map(|c| ComplexValue::with_val(prec, c * s)).collect())
    }

    /// Divides by the leading coefficient.
    pub fn to_monic(&self) -> Self {
        let lead = self.leading().clone();
        let prec = self.prec();
        Self::new(self.coeffs.iter().map(|c| ComplexValue::with_val(prec, c / &lead)).collect())
    }

    /// Max modulus of the coefficients.
    pub fn norm_inf(&self) -> Real {
        let mut m = Real::new(self.prec());
        for c in &self.coeffs {
            let a = abs(c);
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm2(&self) -> Real {
        let mut s = Real::new(self.prec());
        for c in &self.coeffs {
            s += Real::with_val(self.prec(), c.norm_ref());
        }
        s.sqrt()
    }

    /// Coefficients rounded to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| ComplexValue::with_val(prec, c)).collect() }
    }

    /// `z^d p(1/z)` for `d = degree`.
    pub fn reversed(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        Self::new(c)
    }
}
