//! Gauss–Chebyshev and Gauss–Legendre rules, order-doubling drivers and an
//! adaptive panel integrator for near-singular integrands.

use super::{abs_f64, czero, pi, ComplexValue, Real};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuadratureKind {
    /// Weight `(1 − t²)^(-1/2)` on `[−1, 1]`.
    ChebyshevWeighted,
    Legendre,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub order: usize,
    pub nodes: Vec<Real>,
    pub weights: Vec<Real>,
}

impl QuadratureRule {
    /// `Σ w_i f(t_i)` for a vector-valued integrand.
    pub fn apply<F>(&self, prec: u32, dim: usize, f: F) -> Vec<ComplexValue>
    where
        F: Fn(&Real) -> Vec<ComplexValue>,
    {
        let mut acc = vec![czero(prec); dim];
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(t);
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x * w;
            }
        }
        acc
    }

    /// Same sum plus `max_k Σ_i w_i |f_k(t_i)|`, the scale against which
    /// cancellation is measured.
    pub fn apply_with_mass<F>(&self, prec: u32, dim: usize, f: F) -> (Vec<ComplexValue>, f64)
    where
        F: Fn(&Real) -> Vec<ComplexValue>,
    {
        let mut acc = vec![czero(prec); dim];
        let mut mass = vec![0.0f64; dim];
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(t);
            let wf = w.to_f64();
            for ((a, m), x) in acc.iter_mut().zip(mass.iter_mut()).zip(v) {
                *m += wf * abs_f64(&x);
                *a += x * w;
            }
        }
        (acc, mass.into_iter().fold(0.0, f64::max))
    }
}

/// Nodes `cos((2i−1)π/(2·order))`, weights `π/order`.
pub fn make_chebyshev_rule(order: usize, prec: u32) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidInput("quadrature order must be >= 1".into()));
    }
    let p = pi(prec);
    let w = Real::with_val(prec, &p / order as u32);
    let mut nodes = Vec::with_capacity(order);
    for i in 1..=order {
        let mut t = Real::with_val(prec, &p * (2 * i - 1) as u32);
        t /= (2 * order) as u32;
        nodes.push(t.cos());
    }
    Ok(QuadratureRule {
        kind: QuadratureKind::ChebyshevWeighted,
        order,
        weights: vec![w; order],
        nodes,
    })
}

/// Legendre `P_n(x)` and `P_{n−1}(x)` by the three-term recurrence.
fn legendre_pair(n: usize, x: &Real) -> (Real, Real) {
    let prec = x.prec();
    let mut p0 = Real::with_val(prec, 1);
    let mut p1 = x.clone();
    if n == 0 {
        return (p0, Real::new(prec));
    }
    for k in 1..n {
        let mut p2 = Real::with_val(prec, x * &p1);
        p2 *= (2 * k + 1) as u32;
        p2 -= Real::with_val(prec, &p0 * k as u32);
        p2 /= (k + 1) as u32;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss–Legendre nodes by Newton iteration on `P_order`.
pub fn make_legendre_rule(order: usize, prec: u32) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidInput("quadrature order must be >= 1".into()));
    }
    let wp = prec + 32;
    let n = order;
    let mut nodes = vec![Real::new(prec); n];
    let mut weights = vec![Real::new(prec); n];
    let stop = super::pow2(wp, -(wp as i32) + 8);
    for i in 0..(n + 1) / 2 {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = Real::with_val(wp, guess);
        let mut converged = false;
        let mut dp = Real::new(wp);
        for _ in 0..200 {
            let (pn, pm) = legendre_pair(n, &x);
            // P_n' = n (x P_n − P_{n−1}) / (x² − 1)
            let x2m1 = Real::with_val(wp, x.square_ref()) - 1u32;
            dp = Real::with_val(wp, &x * &pn) - &pm;
            dp *= n as u32;
            dp /= &x2m1;
            let dx = Real::with_val(wp, &pn / &dp);
            x -= &dx;
            if dx.clone().abs() <= stop {
                converged = true;
                let (pn, pm) = legendre_pair(n, &x);
                let x2m1 = Real::with_val(wp, x.square_ref()) - 1u32;
                dp = Real::with_val(wp, &x * &pn) - &pm;
                dp *= n as u32;
                dp /= &x2m1;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence(format!("Legendre node {i} of order {n}")));
        }
        let one_m_x2 = Real::with_val(wp, 1) - Real::with_val(wp, x.square_ref());
        let w = Real::with_val(wp, 2) / (one_m_x2 * Real::with_val(wp, dp.square_ref()));
        nodes[i] = Real::with_val(prec, &x);
        nodes[n - 1 - i] = Real::with_val(prec, -x);
        weights[i] = Real::with_val(prec, &w);
        weights[n - 1 - i] = Real::with_val(prec, &w);
    }
    if n % 2 == 1 {
        nodes[n / 2] = Real::new(prec);
    }
    Ok(QuadratureRule { kind: QuadratureKind::Legendre, order, nodes, weights })
}

type RuleCache = Mutex<HashMap<(QuadratureKind, usize, u32), Arc<QuadratureRule>>>;

fn cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Memoized rule. Rules are immutable, so sharing them is safe.
pub fn cached_rule(kind: QuadratureKind, order: usize, prec: u32) -> Result<Arc<QuadratureRule>> {
    let key = (kind, order, prec);
    if let Some(r) = cache().lock().expect("rule cache poisoned").get(&key) {
        return Ok(r.clone());
    }
    let rule = Arc::new(match kind {
        QuadratureKind::ChebyshevWeighted => make_chebyshev_rule(order, prec)?,
        QuadratureKind::Legendre => make_legendre_rule(order, prec)?,
    });
    cache().lock().expect("rule cache poisoned").insert(key, rule.clone());
    Ok(rule)
}

/// Largest componentwise change between two estimates.
fn max_diff(a: &[ComplexValue], b: &[ComplexValue]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| abs_f64(&ComplexValue::with_val(x.prec().0, x - y)))
        .fold(0.0, f64::max)
}

/// Integrates `∫_{-1}^{1} f(t) (1−t²)^(-1/2) dt` with the Chebyshev-weighted
/// rule, doubling the order until no component moves by more than
/// `rel_tol` times the larger of `max_k |I_k|` and the modulus mass `Σ w|f|`.
pub fn chebyshev_doubling<F>(
    f: F,
    dim: usize,
    prec: u32,
    start_order: usize,
    max_order: usize,
    rel_tol: f64,
) -> Result<(Vec<ComplexValue>, usize)>
where
    F: Fn(&Real) -> Vec<ComplexValue>,
{
    doubling(QuadratureKind::ChebyshevWeighted, f, dim, prec, start_order, max_order, rel_tol)
}

/// Same driver with Gauss–Legendre rules on `[−1, 1]`.
pub fn legendre_doubling<F>(
    f: F,
    dim: usize,
    prec: u32,
    start_order: usize,
    max_order: usize,
    rel_tol: f64,
) -> Result<(Vec<ComplexValue>, usize)>
where
    F: Fn(&Real) -> Vec<ComplexValue>,
{
    doubling(QuadratureKind::Legendre, f, dim, prec, start_order, max_order, rel_tol)
}

fn doubling<F>(
    kind: QuadratureKind,
    f: F,
    dim: usize,
    prec: u32,
    start_order: usize,
    max_order: usize,
    rel_tol: f64,
) -> Result<(Vec<ComplexValue>, usize)>
where
    F: Fn(&Real) -> Vec<ComplexValue>,
{
    let mut order = start_order.max(1);
    let mut prev = cached_rule(kind, order, prec)?.apply(prec, dim, &f);
    loop {
        let next_order = order * 2;
        if next_order > max_order {
            return Err(Error::QuadratureStall(format!(
                "no convergence up to order {max_order} (kind {kind:?})"
            )));
        }
        let (next, mass) = cached_rule(kind, next_order, prec)?.apply_with_mass(prec, dim, &f);
        let scale = next.iter().map(abs_f64).fold(1e-300, f64::max).max(mass);
        if max_diff(&prev, &next) <= rel_tol * scale {
            return Ok((next, next_order));
        }
        prev = next;
        order = next_order;
    }
}

/// Fixed panel order of [`adaptive_legendre`].
pub const PANEL_ORDER: usize = 24;

/// Adaptive Gauss–Legendre integration of `∫_a^b f(t) dt` by bisection.
/// A panel is accepted when its estimate agrees with the sum over its halves
/// to `abs_tol · (panel length / (b − a))`.
pub fn adaptive_legendre<F>(
    f: F,
    dim: usize,
    a: &Real,
    b: &Real,
    abs_tol: f64,
    prec: u32,
) -> Result<Vec<ComplexValue>>
where
    F: Fn(&Real) -> Vec<ComplexValue>,
{
    let rule = cached_rule(QuadratureKind::Legendre, PANEL_ORDER, prec)?;
    let panel = |lo: &Real, hi: &Real| -> Vec<ComplexValue> {
        let half = Real::with_val(prec, hi - lo) / 2u32;
        let mid = Real::with_val(prec, hi + lo) / 2u32;
        let mut acc = rule.apply(prec, dim, |t| {
            let x = Real::with_val(prec, &half * t) + &mid;
            f(&x)
        });
        for v in acc.iter_mut() {
            *v *= &half;
        }
        acc
    };
    let total = Real::with_val(prec, b - a).to_f64().abs();
    let mut result = vec![czero(prec); dim];
    let mut stack = vec![(a.clone(), b.clone(), panel(a, b), 0u32)];
    let mut evaluations = 0usize;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = Real::with_val(prec, &lo + &hi) / 2u32;
        let left = panel(&lo, &mid);
        let right = panel(&mid, &hi);
        evaluations += 2;
        let sum: Vec<ComplexValue> =
            left.iter().zip(&right).map(|(l, r)| ComplexValue::with_val(prec, l + r)).collect();
        let len = Real::with_val(prec, &hi - &lo).to_f64().abs();
        let err = max_diff(&whole, &sum);
        let noise = 16.0 * 2f64.powi(-(prec as i32).min(1000)) * sum.iter().map(abs_f64).fold(0.0, f64::max);
        if err <= (abs_tol * len / total).max(noise) {
            for (r, s) in result.iter_mut().zip(sum) {
                *r += s;
            }
        } else if depth >= 60 || evaluations > 200_000 {
            return Err(Error::QuadratureStall(format!(
                "adaptive panel [{}, {}] not resolved (err {err:e})",
                lo.to_f64(),
                hi.to_f64()
            )));
        } else {
            stack.push((lo, mid.clone(), left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(result)
}
