//! Multiprecision contract and numerical building blocks.
//!
//! Reals and complex numbers are MPFR/MPC values from `rug`. Every value
//! carries its own precision; functions that create values take the target
//! precision explicitly, usually from a [`PrecisionContext`].

pub mod linalg;
pub mod poly;
pub mod quadrature;
pub mod roots;

pub use linalg::{null_space, solve_linear, LinearSolution, Matrix};
pub use poly::Polynomial;
pub use quadrature::{make_chebyshev_rule, make_legendre_rule, QuadratureKind, QuadratureRule};
pub use roots::poly_roots;

use crate::error::{Error, Result};
use rug::float::Constant;
use serde::{Deserialize, Serialize};

pub type Real = rug::Float;
pub type ComplexValue = rug::Complex;

/// Working precision of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionContext {
    mantissa_bits: u32,
}

impl PrecisionContext {
    pub const DEFAULT_BITS: u32 = 256;
    pub const MIN_BITS: u32 = 128;

    pub fn new(mantissa_bits: u32) -> Result<Self> {
        if mantissa_bits < Self::MIN_BITS {
            return Err(Error::InvalidInput(format!(
                "mantissa_bits must be >= {}, got {mantissa_bits}",
                Self::MIN_BITS
            )));
        }
        Ok(Self { mantissa_bits })
    }

    pub fn bits(&self) -> u32 {
        self.mantissa_bits
    }

    /// `2^(-bits/2)`.
    pub fn default_tolerance(&self) -> Real {
        pow2(self.mantissa_bits, -(self.mantissa_bits as i32) / 2)
    }

    pub fn tolerance_f64(&self) -> f64 {
        2f64.powi(-(self.mantissa_bits as i32) / 2)
    }

    /// Unit roundoff `2^(-bits)`.
    pub fn epsilon(&self) -> Real {
        pow2(self.mantissa_bits, -(self.mantissa_bits as i32))
    }

    /// Same context with more bits.
    pub fn widened(&self, extra: u32) -> Self {
        Self { mantissa_bits: self.mantissa_bits + extra }
    }

    pub fn real(&self, v: f64) -> Real {
        Real::with_val(self.mantissa_bits, v)
    }

    pub fn complex(&self, re: f64, im: f64) -> ComplexValue {
        ComplexValue::with_val(self.mantissa_bits, (re, im))
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self { mantissa_bits: Self::DEFAULT_BITS }
    }
}

pub fn pow2(prec: u32, e: i32) -> Real {
    let mut x = Real::with_val(prec, 1);
    x <<= e;
    x
}

pub fn pi(prec: u32) -> Real {
    Real::with_val(prec, Constant::Pi)
}

pub fn cx(prec: u32, re: f64, im: f64) -> ComplexValue {
    ComplexValue::with_val(prec, (re, im))
}

pub fn czero(prec: u32) -> ComplexValue {
    ComplexValue::new(prec)
}

pub fn from_real(prec: u32, re: &Real) -> ComplexValue {
    ComplexValue::with_val(prec, (re, 0))
}

/// `i` at the given precision.
pub fn imag_unit(prec: u32) -> ComplexValue {
    cx(prec, 0.0, 1.0)
}

/// `2πi`.
pub fn two_pi_i(prec: u32) -> ComplexValue {
    let p = pi(prec) * 2u32;
    ComplexValue::with_val(prec, (0, p))
}

pub fn abs(z: &ComplexValue) -> Real {
    Real::with_val(z.prec().0, z.abs_ref())
}

pub fn abs_f64(z: &ComplexValue) -> f64 {
    abs(z).to_f64()
}

pub fn to_c64(z: &ComplexValue) -> (f64, f64) {
    (z.real().to_f64(), z.imag().to_f64())
}

pub fn prec_of(z: &ComplexValue) -> u32 {
    z.prec().0
}

/// Re-rounds `z` to `prec` bits.
pub fn with_prec(z: &ComplexValue, prec: u32) -> ComplexValue {
    ComplexValue::with_val(prec, z)
}

/// Decimal string with enough digits to round-trip at the value's precision.
pub fn real_to_string(x: &Real) -> String {
    let digits = (x.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits))
}

pub fn parse_real(s: &str, prec: u32) -> Result<Real> {
    Real::parse(s)
        .map(|v| Real::with_val(prec, v))
        .map_err(|e| Error::InvalidInput(format!("cannot parse real {s:?}: {e}")))
}

/// Maximum modulus over a slice.
pub fn max_abs(values: &[ComplexValue]) -> f64 {
    values.iter().map(abs_f64).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_floor_is_enforced() {
        assert!(PrecisionContext::new(64).is_err());
        let ctx = PrecisionContext::new(256).unwrap();
        assert_eq!(ctx.bits(), 256);
        assert_eq!(ctx.default_tolerance().to_f64(), 2f64.powi(-128));
    }

    #[test]
    fn decimal_round_trip() {
        let x = Real::with_val(256, 1) / 3u32;
        let s = real_to_string(&x);
        let y = parse_real(&s, 256).unwrap();
        assert_eq!(x, y);
    }
}
