//! Surface construction: monomial segment integrals, holomorphic basis, period
//! matrix, Green polynomial and periods, path anchors, Riemann constants and
//! the build-time invariant checks.

use super::{HyperellipticSurface, InvariantCheck, KSource, SurfacePoint};
use crate::contour::{IntervalContour, QuadSettings};
use crate::error::{Error, Result};
use crate::numerics::{
    abs_f64, cx, czero, from_real, poly_roots, solve_linear, two_pi_i, ComplexValue, Matrix, Polynomial,
    Real,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

/// Hull centre and half-width of `[a_1, b_{g+1}]`.
pub(crate) fn hull(contour: &IntervalContour) -> (Real, f64) {
    let bp = contour.branch_points();
    let prec = contour.prec();
    let c = Real::with_val(prec, &bp[0] + bp.last().unwrap()) / 2u32;
    let r = Real::with_val(prec, bp.last().unwrap() - &bp[0]).to_f64() / 2.0;
    (c, r)
}

/// `(Im B)^{-1}` by elimination on the real part of a complex matrix.
pub(crate) fn im_inverse(b: &Matrix, prec: u32) -> Result<Vec<Vec<Real>>> {
    let g = b.len();
    let y: Matrix = b.iter().map(|r| r.iter().map(|v| from_real(prec, v.imag())).collect()).collect();
    let mut inv = vec![vec![Real::new(prec); g]; g];
    for k in 0..g {
        let mut e = vec![czero(prec); g];
        e[k] = cx(prec, 1.0, 0.0);
        let sol = solve_linear(&y, &e, prec)?;
        for i in 0..g {
            inv[i][k] = Real::with_val(prec, sol.x[i].real());
        }
    }
    Ok(inv)
}

/// `∫_seg t^m / w^+(t) dt` for every segment `[e_s, e_{s+1}]` and `m ≤ deg`.
fn monomial_integrals(
    contour: &IntervalContour,
    deg: usize,
    settings: &QuadSettings,
    adaptive: bool,
    prec: u32,
) -> Result<Vec<Vec<ComplexValue>>> {
    let nseg = contour.branch_points().len() - 1;
    (0..nseg)
        .map(|s| {
            contour.integrate_segment(
                &contour.segment(s),
                |t| {
                    let mut out = Vec::with_capacity(deg + 1);
                    let mut acc = cx(prec, 1.0, 0.0);
                    for _ in 0..=deg {
                        out.push(acc.clone());
                        acc *= t;
                    }
                    out
                },
                deg + 1,
                None,
                adaptive,
                settings,
                prec,
            )
        })
        .collect()
}

/// `Σ_m r_m ∫_seg t^m/w^+`.
fn combine(seg: &[ComplexValue], p: &Polynomial, prec: u32) -> ComplexValue {
    let mut acc = czero(prec);
    for (c, v) in p.coeffs().iter().zip(seg) {
        acc += ComplexValue::with_val(prec, c * v);
    }
    acc
}

/// `2 Σ_{m≤k} ∫_{gap m} R/w`: the `α_k` period (0-based `k`), the sum of the
/// gap cycles between `I_0` and `I_{k+1}`.
fn alpha_period(seg: &[Vec<ComplexValue>], p: &Polynomial, k: usize, prec: u32) -> ComplexValue {
    let mut acc = czero(prec);
    for m in 0..=k {
        acc += combine(&seg[2 * m + 1], p, prec);
    }
    acc * 2u32
}

/// Unoriented `β_k` period `2 ∫_{I_{k+2}} R/w^+`.
fn beta_period_raw(seg: &[Vec<ComplexValue>], p: &Polynomial, k: usize, prec: u32) -> ComplexValue {
    combine(&seg[2 * k + 2], p, prec) * 2u32
}

/// Build tolerance: `10^(−bits/4)` or `2^16` quadrature tolerances, whichever is larger.
pub(crate) fn build_tolerance(prec: u32, settings: &QuadSettings) -> f64 {
    let base = 10f64.powf(-(prec as f64) / 4.0);
    base.max(65536.0 * settings.rel_tol())
}

/// Holomorphic numerators `L_j` from the α-normalization.
fn solve_basis(alpha: &Matrix, prec: u32) -> Result<Vec<Polynomial>> {
    let g = alpha.len();
    (0..g)
        .map(|j| {
            let mut e = vec![czero(prec); g];
            e[j] = cx(prec, 1.0, 0.0);
            let sol = solve_linear(alpha, &e, prec)?;
            Ok(Polynomial::new(sol.x))
        })
        .collect()
}

/// Builds the surface and verifies its invariants; any failure aborts with
/// [`Error::BuildInvariantViolated`] naming the check.
pub fn build_surface(contour: &IntervalContour, settings: &QuadSettings) -> Result<HyperellipticSurface> {
    let surface = build_unchecked(contour, settings)?;
    if let Some(bad) = surface.checks.iter().find(|c| !c.passed) {
        return Err(Error::BuildInvariantViolated(format!(
            "{}: residual {:e} > tolerance {:e}",
            bad.name, bad.residual, bad.tolerance
        )));
    }
    Ok(surface)
}

/// Builds the surface and records invariant checks without aborting.
pub(crate) fn build_unchecked(contour: &IntervalContour, settings: &QuadSettings) -> Result<HyperellipticSurface> {
    let prec = contour.prec();
    let g = contour.genus();
    let tol = build_tolerance(prec, settings);
    let seg = monomial_integrals(contour, g, settings, false, prec)?;
    let mut checks = Vec::new();

    // Green polynomial: monic degree g, zero integral over every gap.
    let green = if g == 0 {
        Polynomial::one(prec)
    } else {
        let a: Matrix = (0..g).map(|j| seg[2 * j + 1][..g].to_vec()).collect();
        let b: Vec<ComplexValue> = (0..g).map(|j| ComplexValue::with_val(prec, -&seg[2 * j + 1][g])).collect();
        let mut coeffs = solve_linear(&a, &b, prec)?.x;
        // The gap system is real; drop rounding-level imaginary parts.
        for c in coeffs.iter_mut() {
            *c = from_real(prec, c.real());
        }
        coeffs.push(cx(prec, 1.0, 0.0));
        Polynomial::new(coeffs)
    };

    // Holomorphic basis and period matrix.
    let monomials: Vec<Polynomial> = (0..g).map(|m| Polynomial::monomial(m, prec)).collect();
    let alpha: Matrix =
        (0..g).map(|k| monomials.iter().map(|p| alpha_period(&seg, p, k, prec)).collect()).collect();
    let holomorphic = if g == 0 { Vec::new() } else { solve_basis(&alpha, prec)? };
    let mut b_matrix: Matrix = (0..g)
        .map(|j| holomorphic.iter().map(|l| beta_period_raw(&seg, l, j, prec)).collect())
        .collect();
    let mut beta_orientation = vec![1i8; g];
    for j in 0..g {
        if b_matrix[j][j].imag().is_sign_negative() {
            beta_orientation[j] = -1;
            for v in b_matrix[j].iter_mut() {
                *v *= -1i32;
            }
        }
    }

    // Green periods ω_k = −(1/2πi)∮_{β_k} dG, τ_k = (1/2πi)∮_{α_k} dG.
    let tpi = two_pi_i(prec);
    let mut omega = Vec::with_capacity(g);
    let mut tau = Vec::with_capacity(g);
    let mut imag_residue = 0.0f64;
    for k in 0..g {
        let mut bp = beta_period_raw(&seg, &green, k, prec);
        bp *= beta_orientation[k] as i32;
        let om = ComplexValue::with_val(prec, -(bp / &tpi));
        let ta = ComplexValue::with_val(prec, alpha_period(&seg, &green, k, prec) / &tpi);
        imag_residue = imag_residue.max(om.imag().to_f64().abs()).max(ta.imag().to_f64().abs());
        omega.push(Real::with_val(prec, om.real()));
        tau.push(Real::with_val(prec, ta.real()));
    }
    checks.push(InvariantCheck::new("green_periods_real", imag_residue, tol));

    // Sheet-0 anchors F(e_i ± i0) for the numerators [M, L_1..L_g].
    let mut numerators = vec![green.clone()];
    numerators.extend(holomorphic.iter().cloned());
    let nb = contour.branch_points().len();
    let mut anchors_plus = vec![vec![czero(prec); g + 1]];
    let mut anchors_minus = vec![vec![czero(prec); g + 1]];
    for s in 0..nb - 1 {
        let mut next_p = anchors_plus[s].clone();
        let mut next_m = anchors_minus[s].clone();
        for (d, p) in numerators.iter().enumerate() {
            let v = combine(&seg[s], p, prec);
            next_p[d] += &v;
            if s % 2 == 0 {
                next_m[d] -= &v;
            } else {
                next_m[d] += &v;
            }
        }
        anchors_plus.push(next_p);
        anchors_minus.push(next_m);
    }

    let (center, radius) = hull(contour);
    let im_b_inv = if g == 0 { Vec::new() } else { im_inverse(&b_matrix, prec)? };
    let mut surface = HyperellipticSurface {
        contour: contour.clone(),
        settings: *settings,
        prec,
        center,
        radius,
        holomorphic,
        b_matrix,
        beta_orientation,
        green,
        omega,
        tau,
        riemann_k: Vec::new(),
        k_source: KSource::Empty,
        anchors_plus,
        anchors_minus,
        green_inf: czero(prec),
        abel_inf: vec![czero(prec); g],
        im_b_inv,
        checks: Vec::new(),
        samples: OnceLock::new(),
    };
    let (green_inf, abel_inf) = surface.infinity_limits()?;
    surface.green_inf = green_inf;
    surface.abel_inf = abel_inf;

    // Independent re-quadrature: Legendre panels in the Chebyshev angle.
    let seg2 = monomial_integrals(contour, g, settings, true, prec)?;
    let mut norm_res = 0.0f64;
    for k in 0..g {
        for (j, l) in surface.holomorphic.iter().enumerate() {
            let v = alpha_period(&seg2, l, k, prec);
            let target = if j == k { 1.0 } else { 0.0 };
            norm_res = norm_res.max(abs_f64(&(v - cx(prec, target, 0.0))));
        }
    }
    checks.push(InvariantCheck::new("alpha_normalization", norm_res, tol));

    let mut gap_res = 0.0f64;
    for j in 0..g {
        let s = &seg2[2 * j + 1];
        let seg_scale = s.iter().map(abs_f64).fold(0.0, f64::max);
        let scale: f64 = surface.green.coeffs().iter().map(abs_f64).sum::<f64>() * seg_scale.max(1e-300);
        gap_res = gap_res.max(abs_f64(&combine(s, &surface.green, prec)) / scale);
    }
    checks.push(InvariantCheck::new("green_gap_conditions", gap_res, tol));

    checks.push(green_zero_check(&surface)?);
    checks.push(green_normalization_check(&surface));

    let mut sym = 0.0f64;
    for j in 0..g {
        for k in 0..j {
            let d = ComplexValue::with_val(prec, &surface.b_matrix[j][k] - &surface.b_matrix[k][j]);
            sym = sym.max(abs_f64(&d));
        }
    }
    checks.push(InvariantCheck::new("b_symmetric", sym, tol));
    checks.push(InvariantCheck::new("im_b_positive_definite", im_b_min_pivot(&surface.b_matrix), 0.0));

    if g > 0 && checks.iter().all(|c| c.passed) {
        let (k, source, check) = riemann_constants(&surface, tol)?;
        surface.riemann_k = k;
        surface.k_source = source;
        checks.push(check);
    }
    surface.checks = checks;
    Ok(surface)
}

/// Exactly one real simple zero of `M` in every gap; residual counts violations.
fn green_zero_check(s: &HyperellipticSurface) -> Result<InvariantCheck> {
    let g = s.genus();
    if g == 0 {
        return Ok(InvariantCheck::new("green_zeros_in_gaps", 0.0, 0.0));
    }
    let roots = poly_roots(&s.green)?;
    let scale = s.radius.max(1.0);
    let bp = s.contour.branch_points();
    let mut bad = 0usize;
    for j in 0..g {
        let (lo, hi) = (bp[2 * j + 1].to_f64(), bp[2 * j + 2].to_f64());
        let count = roots
            .iter()
            .filter(|r| {
                let (x, y) = (r.real().to_f64(), r.imag().to_f64());
                y.abs() <= 1e-12 * scale && x > lo && x < hi
            })
            .count();
        if count != 1 {
            bad += 1;
        }
    }
    Ok(InvariantCheck::new("green_zeros_in_gaps", bad as f64, 0.0))
}

/// `h(z)² z² → 1`: residual at `|z − c| = 10^20·(radius + 1)` (the `O(1/z)` term is below it).
fn green_normalization_check(s: &HyperellipticSurface) -> InvariantCheck {
    let prec = s.prec;
    let big = 1e20 * (s.radius + 1.0);
    let z = ComplexValue::with_val(prec, (&s.center, big));
    let mut h = s.green.eval(&z) / s.contour.w0(&z);
    h *= &z;
    let h2 = ComplexValue::with_val(prec, h.square_ref());
    let res = abs_f64(&(h2 - cx(prec, 1.0, 0.0)));
    InvariantCheck::new("green_normalization", res, 1e3 / big * (s.center.to_f64().abs() + s.radius + 1.0))
}

/// Negative of the smallest pivot in the Cholesky factorization of `Im B`
/// (`≤ 0` iff positive definite); `+1` when a pivot is not positive.
fn im_b_min_pivot(b: &Matrix) -> f64 {
    let g = b.len();
    let mut a: Vec<Vec<f64>> = b.iter().map(|r| r.iter().map(|v| v.imag().to_f64()).collect()).collect();
    let mut min_pivot = f64::INFINITY;
    for k in 0..g {
        let p = a[k][k];
        if !(p > 0.0) {
            return 1.0;
        }
        min_pivot = min_pivot.min(p);
        for i in k + 1..g {
            let f = a[i][k] / p;
            for j in k..g {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    if g == 0 {
        0.0
    } else {
        -min_pivot
    }
}

/// Half-period `K` passing the theta-divisor test `θ(Ω(D) + K) = 0` on random
/// degree-`(g−1)` divisors; for `g = 1` this is the formula value `(B−1)/2`
/// up to a lattice vector, stored as `(1+B)/2`.
fn riemann_constants(s: &HyperellipticSurface, tol: f64) -> Result<(Vec<ComplexValue>, KSource, InvariantCheck)> {
    let prec = s.prec;
    let g = s.genus();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + g as u64);
    let divisors = if g == 1 { 1 } else { 10 };
    let mut shifts: Vec<Vec<ComplexValue>> = Vec::with_capacity(divisors);
    for _ in 0..divisors {
        let mut acc = s.zero_vec();
        for _ in 0..g - 1 {
            let r = s.radius * (0.3 + 2.5 * rng.gen::<f64>());
            let th = std::f64::consts::TAU * rng.gen::<f64>();
            let z = ComplexValue::with_val(prec, (Real::with_val(prec, &s.center) + r * th.cos(), r * th.sin()));
            let p = SurfacePoint::new(z, rng.gen_range(0..2u8));
            for (a, v) in acc.iter_mut().zip(s.abel_map(&p)?) {
                *a += v;
            }
        }
        shifts.push(acc);
    }
    let mut best: Option<(f64, Vec<ComplexValue>)> = None;
    let mut second = f64::INFINITY;
    for mask in 0..(1u32 << (2 * g)) {
        let j: Vec<i64> = (0..g).map(|i| ((mask >> i) & 1) as i64).collect();
        let m: Vec<i64> = (0..g).map(|i| ((mask >> (g + i)) & 1) as i64).collect();
        let k: Vec<ComplexValue> = s.lattice_vector(&j, &m).into_iter().map(|v| v / 2u32).collect();
        let mut res = 0.0f64;
        for d in &shifts {
            let u: Vec<ComplexValue> = d.iter().zip(&k).map(|(a, b)| ComplexValue::with_val(prec, a + b)).collect();
            let (val, mass) = s.theta_with_mass(&u);
            res = res.max(abs_f64(&val) / mass.max(1e-300));
        }
        match &best {
            Some((r, _)) if *r <= res => second = second.min(res),
            _ => {
                if let Some((r, _)) = &best {
                    second = second.min(*r);
                }
                best = Some((res, k));
            }
        }
    }
    let (res, k) = best.expect("at least one half-period");
    // A unique zero set: the runner-up must be far from vanishing.
    let unique = second > 1e-3;
    let check = InvariantCheck::new("theta_divisor", if unique { res } else { f64::INFINITY }, tol);
    let source = if g == 1 { KSource::Formula } else { KSource::HalfPeriodSearch };
    Ok((k, source, check))
}
