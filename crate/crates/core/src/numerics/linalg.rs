//! Pivoted Gaussian elimination: square solves with a condition estimate and
//! rank-revealing null-space extraction.

use super::{abs, abs_f64, cx, czero, pow2, ComplexValue, Real};
use crate::error::{Error, Result};

/// Row-major dense matrix.
pub type Matrix = Vec<Vec<ComplexValue>>;

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub x: Vec<ComplexValue>,
    /// `‖A‖_∞ ‖A^{-1}‖_∞`.
    pub condition: f64,
    /// `‖Ax − b‖_∞ / ‖b‖_∞` (absolute when `b = 0`).
    pub residual: f64,
}

fn max_entry(a: &Matrix, prec: u32) -> Real {
    let mut m = Real::new(prec);
    for row in a {
        for v in row {
            let x = abs(v);
            if x > m {
                m = x;
            }
        }
    }
    m
}

fn inf_norm(a: &Matrix) -> f64 {
    a.iter().map(|r| r.iter().map(abs_f64).sum::<f64>()).fold(0.0, f64::max)
}

/// LU factors with row permutation, stored in place.
struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    prec: u32,
}

impl Lu {
    fn factor(a: &Matrix, prec: u32) -> Result<Self> {
        let n = a.len();
        if n == 0 || a.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix must be square and nonempty".into()));
        }
        let mut tol = max_entry(a, prec);
        tol *= pow2(prec, -(prec as i32) / 2);
        let mut lu: Matrix = a.iter().map(|r| r.iter().map(|v| ComplexValue::with_val(prec, v)).collect()).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut best = k;
            let mut best_abs = abs(&lu[k][k]);
            for i in k + 1..n {
                let v = abs(&lu[i][k]);
                if v > best_abs {
                    best = i;
                    best_abs = v;
                }
            }
            if best_abs <= tol || best_abs.is_zero() {
                return Err(Error::SingularMatrix { rank: k, dim: n });
            }
            lu.swap(k, best);
            perm.swap(k, best);
            let pivot = lu[k][k].clone();
            for i in k + 1..n {
                let factor = ComplexValue::with_val(prec, &lu[i][k] / &pivot);
                for j in k + 1..n {
                    let t = ComplexValue::with_val(prec, &factor * &lu[k][j]);
                    lu[i][j] -= t;
                }
                lu[i][k] = factor;
            }
        }
        Ok(Self { lu, perm, prec })
    }

    fn solve(&self, b: &[ComplexValue]) -> Vec<ComplexValue> {
        let n = self.lu.len();
        let prec = self.prec;
        let mut y: Vec<ComplexValue> = self.perm.iter().map(|&p| ComplexValue::with_val(prec, &b[p])).collect();
        for i in 0..n {
            for j in 0..i {
                let t = ComplexValue::with_val(prec, &self.lu[i][j] * &y[j]);
                y[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = ComplexValue::with_val(prec, &self.lu[i][j] * &y[j]);
                y[i] -= t;
            }
            y[i] /= &self.lu[i][i];
        }
        y
    }
}

/// Solves `A x = b` by elimination with row pivoting.
pub fn solve_linear(a: &Matrix, b: &[ComplexValue], prec: u32) -> Result<LinearSolution> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::InvalidInput(format!("rhs length {} != dimension {n}", b.len())));
    }
    let lu = Lu::factor(a, prec)?;
    let x = lu.solve(b);
    let mut inv_norm = 0.0f64;
    let mut row_sums = vec![0.0f64; n];
    for j in 0..n {
        let mut e = vec![czero(prec); n];
        e[j] = cx(prec, 1.0, 0.0);
        let col = lu.solve(&e);
        for (s, v) in row_sums.iter_mut().zip(&col) {
            *s += abs_f64(v);
        }
    }
    for s in row_sums {
        inv_norm = inv_norm.max(s);
    }
    let condition = inf_norm(a) * inv_norm;
    let mut res = 0.0f64;
    for (row, bi) in a.iter().zip(b) {
        let mut acc = ComplexValue::with_val(prec, -bi);
        for (aij, xj) in row.iter().zip(&x) {
            acc += ComplexValue::with_val(prec, aij * xj);
        }
        res = res.max(abs_f64(&acc));
    }
    let bn = b.iter().map(abs_f64).fold(0.0, f64::max);
    let residual = if bn > 0.0 { res / bn } else { res };
    Ok(LinearSolution { x, condition, residual })
}

/// Numerical rank and a null-space basis of an `m × n` matrix by Gauss–Jordan
/// elimination with complete pivoting. Pivots below `rel_tol · max|a_ij|`
/// are treated as zero.
pub fn null_space(a: &Matrix, rel_tol: &Real, prec: u32) -> (usize, Vec<Vec<ComplexValue>>) {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut r: Matrix = a.iter().map(|row| row.iter().map(|v| ComplexValue::with_val(prec, v)).collect()).collect();
    let tol = Real::with_val(prec, max_entry(a, prec) * rel_tol);
    let mut cols: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    for k in 0..m.min(n) {
        let mut best = (k, k);
        let mut best_abs = Real::new(prec);
        for i in k..m {
            for j in k..n {
                let v = abs(&r[i][j]);
                if v > best_abs {
                    best_abs = v;
                    best = (i, j);
                }
            }
        }
        if best_abs <= tol || best_abs.is_zero() {
            break;
        }
        r.swap(k, best.0);
        if best.1 != k {
            for row in r.iter_mut() {
                row.swap(k, best.1);
            }
            cols.swap(k, best.1);
        }
        let pivot = r[k][k].clone();
        for v in r[k].iter_mut() {
            *v /= &pivot;
        }
        for i in 0..m {
            if i == k || r[i][k].is_zero() {
                continue;
            }
            let factor = r[i][k].clone();
            for j in k..n {
                let t = ComplexValue::with_val(prec, &factor * &r[k][j]);
                r[i][j] -= t;
            }
        }
        rank += 1;
    }
    let mut basis = Vec::with_capacity(n - rank);
    for f in rank..n {
        let mut v = vec![czero(prec); n];
        v[cols[f]] = cx(prec, 1.0, 0.0);
        for i in 0..rank {
            v[cols[i]] = ComplexValue::with_val(prec, -&r[i][f]);
        }
        basis.push(v);
    }
    (rank, basis)
}
