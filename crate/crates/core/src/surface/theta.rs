//! Riemann theta function `θ(u) = Σ_n exp(πi nᵀBn + 2πi nᵀu)`.
//!
//! The sum runs over the lattice ellipsoid around the dominant index
//! `n* = −(Im B)^{-1} Im u`: with `Q(n) = (n − n*)ᵀ Im B (n − n*)`, terms with
//! `Q(n) > Q_0 + (bits·ln 2 + 20)/π` are below the working precision relative
//! to the term at `round(n*)`, whose `Q_0` bounds the minimum.

use super::HyperellipticSurface;
use crate::error::Result;
use crate::numerics::{czero, pi, ComplexValue, Matrix, Real};

/// `θ(u)` for an arbitrary Riemann matrix `b` (symmetric, `Im b > 0`).
pub fn theta_for_matrix(b: &Matrix, u: &[ComplexValue], prec: u32) -> Result<ComplexValue> {
    if b.len() != u.len() || b.iter().any(|r| r.len() != b.len()) {
        return Err(crate::Error::InvalidInput("theta needs a square matrix matching the argument".into()));
    }
    // Cholesky of Im b in f64 as the positive-definiteness test.
    let g = b.len();
    let mut l = vec![vec![0.0f64; g]; g];
    for i in 0..g {
        for j in 0..=i {
            let mut s = b[i][j].imag().to_f64();
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(crate::Error::InvalidInput("Im of the Riemann matrix is not positive definite".into()));
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let inv = super::build::im_inverse(b, prec)?;
    Ok(theta_with_mass(b, &inv, u, prec).0)
}

/// `θ(u)` together with `Σ |terms|`, the natural scale for zero tests.
pub fn theta_with_mass(b: &Matrix, im_b_inv: &[Vec<Real>], u: &[ComplexValue], prec: u32) -> (ComplexValue, f64) {
    let g = b.len();
    if g == 0 {
        return (ComplexValue::with_val(prec, 1), 1.0);
    }
    let y: Vec<Vec<f64>> = b.iter().map(|r| r.iter().map(|v| v.imag().to_f64()).collect()).collect();
    let yinv: Vec<Vec<f64>> = im_b_inv.iter().map(|r| r.iter().map(|v| v.to_f64()).collect()).collect();
    let im_u: Vec<f64> = u.iter().map(|v| v.imag().to_f64()).collect();
    let center: Vec<f64> = (0..g).map(|i| -(0..g).map(|k| yinv[i][k] * im_u[k]).sum::<f64>()).collect();
    let q = |n: &[i64]| -> f64 {
        let d: Vec<f64> = n.iter().zip(&center).map(|(a, c)| *a as f64 - c).collect();
        (0..g).map(|i| (0..g).map(|k| d[i] * y[i][k] * d[k]).sum::<f64>()).sum()
    };
    let n0: Vec<i64> = center.iter().map(|c| c.round() as i64).collect();
    let budget = q(&n0) + (prec as f64 * std::f64::consts::LN_2 + 20.0) / std::f64::consts::PI;
    let half: Vec<i64> = (0..g).map(|i| (budget * yinv[i][i]).max(0.0).sqrt().ceil() as i64 + 1).collect();
    let lo: Vec<i64> = (0..g).map(|i| center[i].floor() as i64 - half[i]).collect();
    let hi: Vec<i64> = (0..g).map(|i| center[i].ceil() as i64 + half[i]).collect();

    let pi_i = ComplexValue::with_val(prec, (0, pi(prec)));
    let mut total = czero(prec);
    let mut mass = Real::new(prec);
    let mut n = lo.clone();
    loop {
        if q(&n) <= budget {
            // πi (nᵀBn + 2 nᵀu)
            let mut e = czero(prec);
            for i in 0..g {
                if n[i] == 0 {
                    continue;
                }
                let mut row = czero(prec);
                for k in 0..g {
                    if n[k] != 0 {
                        row += ComplexValue::with_val(prec, &b[i][k] * n[k]);
                    }
                }
                row += ComplexValue::with_val(prec, &u[i] * 2u32);
                e += row * n[i];
            }
            let term = (e * &pi_i).exp();
            mass += Real::with_val(prec, ComplexValue::with_val(prec, term.abs_ref()).real());
            total += term;
        }
        // Odometer over the box.
        let mut i = 0;
        loop {
            if i == g {
                return (total, mass.to_f64());
            }
            n[i] += 1;
            if n[i] <= hi[i] {
                break;
            }
            n[i] = lo[i];
            i += 1;
        }
    }
}

impl HyperellipticSurface {
    /// `θ(u)` with the surface period matrix (`1` at genus 0).
    pub fn theta(&self, u: &[ComplexValue]) -> ComplexValue {
        self.theta_with_mass(u).0
    }

    pub fn theta_with_mass(&self, u: &[ComplexValue]) -> (ComplexValue, f64) {
        theta_with_mass(&self.b_matrix, &self.im_b_inv, u, self.prec)
    }
}
