//! Comparisons between Padé data and the predictor: SA1 ratios, `det N`,
//! jump residuals, divisor/zero matching and geometric-decay fits.

use crate::contour::{RealPosition, Side};
use crate::error::{Error, Result};
use crate::numerics::{abs_f64, cx, ComplexValue, Real};
use crate::pade::{linearized_error_eval, PadePair};
use crate::surface::{Divisor, SurfacePoint};
use crate::szego::{PointData, PredictorBundle, SzegoData};
use serde::Serialize;

/// Off-contour evaluation point with its surface data on both sheets.
#[derive(Debug, Clone)]
pub struct EvalPoint {
    pub z: ComplexValue,
    pub sheet0: PointData,
    pub sheet1: PointData,
    /// `w_Δ(z)`.
    pub w: ComplexValue,
}

/// Precomputes surface data at `zs` (shared across all `n`).
pub fn eval_points(sz: &SzegoData, zs: &[ComplexValue]) -> Result<Vec<EvalPoint>> {
    zs.iter()
        .map(|z| {
            let (d0, d1) = sz.point_pair(z)?;
            let w = sz.surface().contour().w_delta_eval(z)?;
            Ok(EvalPoint { z: z.clone(), sheet0: d0, sheet1: d1, w })
        })
        .collect()
}

/// Fixed ring `|z| = radius` with `count` equally spaced points, rotated off the real axis.
pub fn ring_points(radius: f64, count: usize, prec: u32) -> Vec<ComplexValue> {
    (0..count)
        .map(|k| {
            let a = std::f64::consts::TAU * (k as f64 + 0.5) / count as f64;
            cx(prec, radius * a.cos(), radius * a.sin())
        })
        .collect()
}

/// Error when `z` lies within `radius` of a finite sheet-0 point of `divisor`.
pub fn check_exclusion(z: &ComplexValue, divisor: &Divisor, radius: f64) -> Result<()> {
    for p in divisor.on_sheet(0) {
        if let Some(q) = &p.z {
            let d = abs_f64(&ComplexValue::with_val(z.prec().0, z - q));
            if d < radius {
                return Err(Error::ExcludedPoint(format!(
                    "({:e}, {:e}) is {d:e} from a divisor point",
                    z.real().to_f64(),
                    z.imag().to_f64()
                )));
            }
        }
    }
    Ok(())
}

/// One SA1 evaluation.
#[derive(Debug, Clone)]
pub struct Sa1Point {
    pub z: ComplexValue,
    /// `Q_n / (γ_n Ψ_n) − 1`.
    pub r1: ComplexValue,
    /// `w_Δ R_n / (γ_n Ψ_n^*) − 1`.
    pub r2: ComplexValue,
    /// `(υ_1, υ_2)` solving both SA1 equations at `z`.
    pub upsilon: (ComplexValue, ComplexValue),
}

/// SA1 records of one index.
#[derive(Debug, Clone)]
pub struct Sa1Record {
    pub n: usize,
    pub points: Vec<Sa1Point>,
    pub max_r1: f64,
    pub max_r2: f64,
}

impl Sa1Record {
    pub fn max_residual(&self) -> f64 {
        self.max_r1.max(self.max_r2)
    }
}

/// SA1 ratio tests at `points`; `f_eval(z, prec)` evaluates `f_ρ` for `R_n`.
pub fn compare_sa1<F>(
    sz: &SzegoData,
    pair: &PadePair,
    bundle: &PredictorBundle,
    points: &[EvalPoint],
    exclusion: f64,
    f_eval: F,
    bits: u32,
) -> Result<Sa1Record>
where
    F: Fn(&ComplexValue, u32) -> Result<ComplexValue>,
{
    let prec = sz.surface().prec();
    let (gamma, gamma_star) = match (&bundle.gamma, &bundle.gamma_star) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidInput(format!("index {} is not in 𝒩_ε", bundle.n))),
    };
    let one = cx(prec, 1.0, 0.0);
    let mut out = Vec::with_capacity(points.len());
    let (mut m1, mut m2) = (0.0f64, 0.0f64);
    for p in points {
        check_exclusion(&p.z, &bundle.psi.divisor, exclusion)?;
        let a = ComplexValue::with_val(prec, gamma * bundle.psi_at(sz, &p.sheet0)?);
        let a_star = ComplexValue::with_val(prec, gamma * bundle.psi_star_at(sz, &p.sheet1)?);
        let b = ComplexValue::with_val(prec, gamma_star * bundle.psi_prev_at(sz, &p.sheet0)?);
        let b_star = ComplexValue::with_val(prec, gamma_star * bundle.psi_prev_at(sz, &p.sheet1)?);
        let q = ComplexValue::with_val(prec, pair.q.eval(&ComplexValue::with_val(pair.q.prec(), &p.z)));
        let r = linearized_error_eval(pair, &f_eval, &p.z, bits)?;
        let wr = ComplexValue::with_val(prec, &p.w * &r);
        let r1 = ComplexValue::with_val(prec, &q / &a) - &one;
        let r2 = ComplexValue::with_val(prec, &wr / &a_star) - &one;
        // [a b; a* b*] (1 + υ_1, υ_2) = (Q, w R)
        let det = ComplexValue::with_val(prec, &a * &b_star) - ComplexValue::with_val(prec, &b * &a_star);
        let x1 = (ComplexValue::with_val(prec, &q * &b_star) - ComplexValue::with_val(prec, &b * &wr)) / &det;
        let x2 = (ComplexValue::with_val(prec, &a * &wr) - ComplexValue::with_val(prec, &a_star * &q)) / &det;
        m1 = m1.max(abs_f64(&r1));
        m2 = m2.max(abs_f64(&r2));
        out.push(Sa1Point { z: p.z.clone(), r1, r2, upsilon: (x1 - &one, x2) });
    }
    Ok(Sa1Record { n: bundle.n, points: out, max_r1: m1, max_r2: m2 })
}

/// `|det N − 1|` at each point.
pub fn det_n_check(sz: &SzegoData, bundle: &PredictorBundle, points: &[EvalPoint]) -> Result<Vec<f64>> {
    let prec = sz.surface().prec();
    let (gamma, gamma_star) = match (&bundle.gamma, &bundle.gamma_star) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidInput(format!("index {} is not in 𝒩_ε", bundle.n))),
    };
    points
        .iter()
        .map(|p| {
            let cross = bundle.psi_at(sz, &p.sheet0)? * bundle.psi_prev_at(sz, &p.sheet1)?
                - bundle.psi_star_at(sz, &p.sheet1)? * bundle.psi_prev_at(sz, &p.sheet0)?;
            let det = ComplexValue::with_val(prec, cross * gamma) * gamma_star / &p.w;
            Ok(abs_f64(&(det - cx(prec, 1.0, 0.0))))
        })
        .collect()
}

/// `(Ψ_n^*)^± = ρ Ψ_n^∓` at one interior sample.
#[derive(Debug, Clone, Serialize)]
pub struct JumpRecord {
    pub x: f64,
    pub interval: usize,
    /// Relative residuals of the `+` and `−` relations.
    pub plus: f64,
    pub minus: f64,
}

/// Jump residuals from the exact one-sided traces of the slit realization.
pub fn jump_residuals(sz: &SzegoData, bundle: &PredictorBundle, samples: &[Real]) -> Result<Vec<JumpRecord>> {
    let prec = sz.surface().prec();
    samples
        .iter()
        .map(|x| {
            let j = match sz.surface().contour().locate_real(x) {
                RealPosition::Interval(j) => j,
                _ => return Err(Error::InvalidInput("jump samples must be interior to Δ".into())),
            };
            let rho = sz.weight().eval(j, &ComplexValue::with_val(prec, (x, 0)));
            let mut res = [0.0; 2];
            for (k, (s1, s0)) in [(Side::Plus, Side::Minus), (Side::Minus, Side::Plus)].into_iter().enumerate() {
                let star = sz.point_data(&SurfacePoint::trace(x, 1, s1))?;
                let base = sz.point_data(&SurfacePoint::trace(x, 0, s0))?;
                let lhs = bundle.psi.eval(sz, &star)?;
                let rhs = bundle.psi.eval(sz, &base)? * &rho;
                res[k] = abs_f64(&ComplexValue::with_val(prec, &lhs - &rhs)) / abs_f64(&rhs);
            }
            Ok(JumpRecord { x: x.to_f64(), interval: j, plus: res[0], minus: res[1] })
        })
        .collect()
}

/// `count` interior samples per interval, equally spaced away from the endpoints.
pub fn interior_samples(sz: &SzegoData, count: usize) -> Vec<Real> {
    let prec = sz.surface().prec();
    let mut out = Vec::new();
    for (a, b) in sz.surface().contour().intervals() {
        for k in 0..count {
            let t = (k as f64 + 1.0) / (count as f64 + 1.0);
            out.push(Real::with_val(prec, a * (1.0 - t)) + Real::with_val(prec, b * t));
        }
    }
    out
}

/// A finite sheet-0 divisor point and the nearest zero of `Q_n`.
#[derive(Debug, Clone)]
pub struct PoleMatch {
    pub divisor_point: ComplexValue,
    pub nearest_zero: Option<ComplexValue>,
    pub distance: f64,
    pub matched: bool,
}

#[derive(Debug, Clone)]
pub struct PoleMatchTable {
    pub rows: Vec<PoleMatch>,
    /// Zeros not nearest to any divisor point.
    pub surplus_zeros: Vec<ComplexValue>,
}

/// Nearest-zero table for the finite sheet-0 points of `divisor`.
pub fn pole_match(zeros: &[ComplexValue], divisor: &Divisor, radius: f64) -> PoleMatchTable {
    let mut used = vec![false; zeros.len()];
    let mut rows = Vec::new();
    for p in divisor.on_sheet(0) {
        let Some(z) = &p.z else { continue };
        let best = zeros
            .iter()
            .enumerate()
            .map(|(i, q)| (i, abs_f64(&ComplexValue::with_val(z.prec().0, z - q))))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((i, d)) => {
                used[i] = true;
                rows.push(PoleMatch {
                    divisor_point: z.clone(),
                    nearest_zero: Some(zeros[i].clone()),
                    distance: d,
                    matched: d < radius,
                });
            }
            None => rows.push(PoleMatch {
                divisor_point: z.clone(),
                nearest_zero: None,
                distance: f64::INFINITY,
                matched: false,
            }),
        }
    }
    let surplus_zeros = zeros.iter().zip(&used).filter(|(_, u)| !**u).map(|(z, _)| z.clone()).collect();
    PoleMatchTable { rows, surplus_zeros }
}

/// Least-squares fit `log r ≈ a + s n`; `c = e^{−s}` is the geometric rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub c: f64,
    pub points: usize,
}

/// Fits `ln values` against `ns`; zero values are floored at `1e−300`.
pub fn fit_decay(ns: &[usize], values: &[f64]) -> Result<DecayFit> {
    if ns.len() != values.len() || ns.len() < 2 {
        return Err(Error::InvalidInput("decay fit needs at least two (n, value) pairs".into()));
    }
    let m = ns.len() as f64;
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.max(1e-300).ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("decay fit needs distinct indices".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit { slope, intercept: my - slope * mx, c: (-slope).exp(), points: ns.len() })
}

#[cfg(test)]
mod tests;
