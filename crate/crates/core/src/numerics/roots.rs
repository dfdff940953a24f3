//! Simultaneous polynomial root finding (Aberth–Ehrlich iteration).

use super::{abs, abs_f64, cx, pow2, ComplexValue, Polynomial, Real};
use crate::error::{Error, Result};

/// Iteration cap, scaled with the degree inside [`poly_roots`].
pub const BASE_ITERATIONS: usize = 400;

/// All roots of `p` with multiplicity. Iterates until every root satisfies the
/// backward-error test `|p(r)| ≤ tol · Σ|c_k||r|^k` with `tol = 2^(-bits/2)`,
/// then polishes until the corrections stall.
pub fn poly_roots(p: &Polynomial) -> Result<Vec<ComplexValue>> {
    let n = p.degree();
    if n == 0 || p.is_zero() {
        return Err(Error::InvalidInput("poly_roots needs degree >= 1".into()));
    }
    let prec = p.prec();
    let q = p.to_monic();
    if n == 1 {
        return Ok(vec![ComplexValue::with_val(prec, -&q.coeffs()[0])]);
    }
    let tol = pow2(prec, -(prec as i32) / 2);
    let eps = pow2(prec, -(prec as i32) + 6);
    // Initial radius: geometric mean bound |c_0|^(1/n), kept away from zero.
    let c0 = abs_f64(&q.coeffs()[0]);
    let mut radius = if c0 > 0.0 { c0.powf(1.0 / n as f64) } else { 1.0 };
    let fujiwara = (0..n)
        .map(|k| abs_f64(&q.coeffs()[k]).powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max);
    if !(radius > 1e-12) || !radius.is_finite() {
        radius = fujiwara.max(1.0);
    }
    let center = ComplexValue::with_val(prec, &q.coeffs()[n - 1] / n as u32) * -1i32;
    let mut z: Vec<ComplexValue> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            ComplexValue::with_val(prec, &center + cx(prec, radius * th.cos(), radius * th.sin()))
        })
        .collect();
    let cap = BASE_ITERATIONS + 20 * n;
    let mut done = vec![false; n];
    for _ in 0..cap {
        let mut max_step = Real::new(prec);
        let mut all_small = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (pv, dv) = q.eval_with_derivative(&z[i]);
            let scale = q.eval_abs_scale(&z[i]);
            if abs(&pv) <= Real::with_val(prec, &scale * &eps) {
                done[i] = true;
                continue;
            }
            let ratio = ComplexValue::with_val(prec, &pv / &dv);
            let mut s = ComplexValue::new(prec);
            for j in 0..n {
                if j != i {
                    let d = ComplexValue::with_val(prec, &z[i] - &z[j]);
                    s += d.recip();
                }
            }
            let denom = cx(prec, 1.0, 0.0) - ComplexValue::with_val(prec, &ratio * &s);
            let step = if denom.is_zero() { ratio } else { ratio / denom };
            let sa = abs(&step);
            let za = abs(&z[i]);
            if sa > Real::with_val(prec, &za * &eps) + &eps {
                all_small = false;
            }
            if sa > max_step {
                max_step = sa;
            }
            z[i] -= step;
        }
        if done.iter().all(|&d| d) || all_small {
            break;
        }
    }
    for r in &z {
        let pv = q.eval(r);
        let scale = q.eval_abs_scale(r);
        if abs(&pv) > Real::with_val(prec, &scale * &tol) {
            return Err(Error::NonConvergence(format!(
                "root near ({:e}, {:e}) has residual {:e}",
                r.real().to_f64(),
                r.imag().to_f64(),
                abs_f64(&pv)
            )));
        }
    }
    z.sort_by(|a, b| {
        a.real()
            .partial_cmp(b.real())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.imag().partial_cmp(b.imag()).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_roots() {
        let p = Polynomial::from_real_coeffs(&[-1.0, 0.0, 1.0], 128);
        let r = poly_roots(&p).unwrap();
        assert!(abs_f64(&(r[0].clone() + 1)) < 1e-35);
        assert!(abs_f64(&(r[1].clone() - 1)) < 1e-35);
        let p = Polynomial::from_real_coeffs(&[-0.5, 0.0, 1.0], 128);
        let r = poly_roots(&p).unwrap();
        let s = Real::with_val(128, 2).sqrt().recip();
        assert!(abs_f64(&(r[1].clone() - &s)) < 1e-35);
    }

    #[test]
    fn wilkinson_style_degree_20() {
        let prec = 512;
        let roots: Vec<ComplexValue> =
            (1..=20).map(|k| ComplexValue::with_val(prec, (Real::with_val(prec, k) / 10u32, 0))).collect();
        let p = Polynomial::from_roots(&roots, prec);
        let found = poly_roots(&p).unwrap();
        for (a, b) in found.iter().zip(&roots) {
            assert!(abs_f64(&ComplexValue::with_val(prec, a - b)) < 1e-30);
        }
    }

    #[test]
    fn double_root() {
        let p = Polynomial::from_real_coeffs(&[1.0, -2.0, 1.0], 256);
        let r = poly_roots(&p).unwrap();
        for x in r {
            assert!(abs_f64(&(x - 1)) < 1e-30);
        }
    }
}
