//! Minimal diagonal Padé pairs from the moment system
//! `Σ_i q_i f_{i+m} = 0, m = 1..n`, their linearized error and denominator zeros.

use crate::contour::{IntervalContour, PowerSeries, QuadSettings, Weight};
use crate::error::{Error, Result};
use crate::numerics::{
    abs, abs_f64, czero, null_space, poly_roots, pow2, solve_linear, ComplexValue, Polynomial, Real,
};

/// Default escalation: the solve runs at `max(bits, 8 n)` bits.
pub const DEFAULT_BITS_PER_ORDER: u32 = 8;

#[derive(Debug, Clone)]
pub struct PadePair {
    pub n: usize,
    pub p: Polynomial,
    /// Monic.
    pub q: Polynomial,
    /// Condition estimate of the square moment system at the achieved degree.
    pub condition: f64,
    /// `M` with `Q f − P = O(z^(−M))`, counted within the available coefficients.
    pub contact_order: usize,
    /// True when every available coefficient of `Qf − P` vanished.
    pub contact_saturated: bool,
    /// `deg Q < n`.
    pub degenerate: bool,
    /// Precision of the solve.
    pub working_bits: u32,
}

impl PadePair {
    pub fn degree(&self) -> usize {
        self.q.degree()
    }
}

fn coeff_of_remainder(q: &Polynomial, f: &[ComplexValue], m: usize, prec: u32) -> Option<ComplexValue> {
    let mut acc = czero(prec);
    for (i, qi) in q.coeffs().iter().enumerate() {
        let idx = i + m;
        if idx >= f.len() {
            return None;
        }
        acc += ComplexValue::with_val(prec, qi * &f[idx]);
    }
    Some(acc)
}

fn series_norm(f: &[ComplexValue]) -> f64 {
    f.iter().map(abs_f64).fold(0.0, f64::max)
}

/// Minimal pair of order `n` at precision `max(bits, bits_per_order · n)`.
pub fn pade_solve(series: &PowerSeries, n: usize, bits: u32, bits_per_order: u32) -> Result<PadePair> {
    let needed = 2 * n + 1;
    let f = &series.coefficients;
    if f.len() < needed {
        return Err(Error::InsufficientCoefficients { needed, available: f.len() });
    }
    let wp = bits.max(bits_per_order * n as u32);
    let f: Vec<ComplexValue> = f.iter().map(|c| ComplexValue::with_val(wp, c)).collect();
    let one = Polynomial::one(wp);
    if n == 0 {
        return Ok(PadePair {
            n,
            p: Polynomial::new(vec![f[0].clone()]),
            q: one,
            condition: 1.0,
            contact_order: 1,
            contact_saturated: false,
            degenerate: false,
            working_bits: wp,
        });
    }
    let h: Vec<Vec<ComplexValue>> =
        (1..=n).map(|m| (0..=n).map(|i| f[i + m].clone()).collect()).collect();
    let rank_tol = pow2(wp, -(wp as i32) / 2);
    let (_rank, basis) = null_space(&h, &rank_tol, wp);
    if basis.is_empty() {
        return Err(Error::PrecisionExhausted("moment system has trivial null space".into()));
    }
    // Reduce the null space to its vector of least degree.
    let mut rows = basis;
    let scale = rows.iter().flat_map(|r| r.iter().map(abs_f64)).fold(0.0, f64::max);
    let zero_tol = Real::with_val(wp, &rank_tol * scale);
    let mut col = n as isize;
    while rows.len() > 1 && col >= 0 {
        let c = col as usize;
        let mut best = None;
        let mut best_abs = Real::with_val(wp, &zero_tol);
        for (k, r) in rows.iter().enumerate() {
            let a = abs(&r[c]);
            if a > best_abs {
                best_abs = a;
                best = Some(k);
            }
        }
        if let Some(k) = best {
            let pivot_row = rows.swap_remove(k);
            for r in rows.iter_mut() {
                let factor = ComplexValue::with_val(wp, &r[c] / &pivot_row[c]);
                for (x, y) in r.iter_mut().zip(&pivot_row) {
                    *x -= ComplexValue::with_val(wp, &factor * y);
                }
                r[c] = czero(wp);
            }
        }
        col -= 1;
    }
    let v = rows.pop().expect("one row remains");
    let vmax = v.iter().map(abs_f64).fold(0.0, f64::max);
    let cut = vmax * rank_tol.to_f64();
    let d = (0..=n).rev().find(|&i| abs_f64(&v[i]) > cut).unwrap_or(0);
    let lead = v[d].clone();
    let q = Polynomial::new(v[..=d].iter().map(|x| ComplexValue::with_val(wp, x / &lead)).collect());

    // P_j = Σ_{i ≥ j} q_i f_{i−j}.
    let p = Polynomial::new(
        (0..=d)
            .map(|j| {
                let mut acc = czero(wp);
                for i in j..=d {
                    acc += ComplexValue::with_val(wp, &q.coeffs()[i] * &f[i - j]);
                }
                acc
            })
            .collect(),
    );

    let check_scale = series_norm(&f) * q.norm_inf().to_f64();
    let check_tol = 2f64.powi(-(bits as i32) / 4) * check_scale.max(1e-300);
    let noise_tol = 2f64.powi(-(wp as i32) / 2) * check_scale.max(1e-300);
    let mut worst = 0.0f64;
    for m in 1..=n {
        let c = coeff_of_remainder(&q, &f, m, wp).expect("coefficients checked above");
        worst = worst.max(abs_f64(&c));
    }
    if worst > check_tol {
        return Err(Error::PrecisionExhausted(format!(
            "moment residual {worst:e} exceeds {check_tol:e} at order {n}"
        )));
    }
    let mut contact = n + 1;
    let mut saturated = true;
    let mut m = n + 1;
    while let Some(c) = coeff_of_remainder(&q, &f, m, wp) {
        if abs_f64(&c) > noise_tol {
            saturated = false;
            break;
        }
        contact += 1;
        m += 1;
    }
    let condition = if d == 0 {
        1.0
    } else {
        let a: Vec<Vec<ComplexValue>> =
            (1..=d).map(|m| (0..d).map(|i| f[i + m].clone()).collect()).collect();
        let b: Vec<ComplexValue> = (1..=d).map(|m| ComplexValue::with_val(wp, -&f[d + m])).collect();
        solve_linear(&a, &b, wp).map(|s| s.condition).unwrap_or(f64::INFINITY)
    };
    Ok(PadePair {
        n,
        p,
        q,
        condition,
        contact_order: contact,
        contact_saturated: saturated,
        degenerate: d < n,
        working_bits: wp,
    })
}

/// Upper precision bound for [`linearized_error_eval`].
pub const MAX_EVAL_BITS: u32 = 8192;

/// `R_n(z) = Q_n(z) f(z) − P_n(z)`, re-evaluated at higher precision until the
/// cancellation between `Q f` and `P` leaves at least half the base bits.
/// `f_eval(z, prec)` must return `f(z)` accurate at `prec` bits.
pub fn linearized_error_eval<F>(pair: &PadePair, f_eval: F, z: &ComplexValue, bits: u32) -> Result<ComplexValue>
where
    F: Fn(&ComplexValue, u32) -> Result<ComplexValue>,
{
    let mut prec = bits + 64;
    loop {
        let zz = ComplexValue::with_val(prec, z);
        let fz = f_eval(&zz, prec)?;
        let qf = pair.q.eval(&zz) * &fz;
        let r = ComplexValue::with_val(prec, &qf - &pair.p.eval(&zz));
        let big = abs_f64(&qf).max(abs_f64(&pair.p.eval(&zz)));
        let small = abs_f64(&r);
        let lost = if small > 0.0 && big > 0.0 { (big / small).log2().max(0.0) } else { 0.0 };
        if (prec as f64) - lost >= (bits / 2) as f64 + 32.0 || small == 0.0 && big == 0.0 {
            return Ok(r);
        }
        let next = bits + lost.ceil() as u32 + 96;
        if next > MAX_EVAL_BITS || next <= prec {
            return Err(Error::PrecisionExhausted(format!(
                "R_n cancellation of {lost:.0} bits at order {}",
                pair.n
            )));
        }
        prec = next;
    }
}

/// `r_k = (1/2πi) ∫_Δ Q_n(t) t^k ρ(t)/w^+(t) dt` for `k = 0..=k_max`.
pub fn orthogonality_residuals(
    pair: &PadePair,
    contour: &IntervalContour,
    weight: &Weight,
    k_max: Option<usize>,
    settings: &QuadSettings,
    prec: u32,
) -> Result<Vec<ComplexValue>> {
    let Some(k_max) = k_max else { return Ok(Vec::new()) };
    if pair.n == 0 {
        return Ok(Vec::new());
    }
    if k_max + 1 > pair.n {
        return Err(Error::InvalidInput(format!("k_max {k_max} must be <= n − 1 = {}", pair.n - 1)));
    }
    let dim = k_max + 1;
    let q = pair.q.with_prec(prec);
    let mut totals = vec![czero(prec); dim];
    for j in 0..contour.intervals().len() {
        let seg = contour.interval_segment(j);
        let v = contour.integrate_segment(
            &seg,
            |t| {
                let mut acc = q.eval(t) * weight.eval(j, t);
                let mut out = Vec::with_capacity(dim);
                for _ in 0..dim {
                    out.push(acc.clone());
                    acc *= t;
                }
                out
            },
            dim,
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
    Ok(totals.into_iter().map(|t| t / &tpi).collect())
}

/// Zeros of `Q_n` with multiplicity.
pub fn denominator_zeros(pair: &PadePair) -> Result<Vec<ComplexValue>> {
    if pair.q.degree() == 0 {
        return Err(Error::InvalidInput("denominator has degree 0".into()));
    }
    poly_roots(&pair.q)
}
