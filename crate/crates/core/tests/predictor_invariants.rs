//! Divisor accounting of `Ψ_n` by the argument principle, and the `|γ_n γ_n^*|` band.

use padesurf_core::contour::{IntervalContour, QuadSettings, Weight, WeightKind};
use padesurf_core::numerics::{abs_f64, cx, Polynomial};
use padesurf_core::surface::{build_surface, SurfacePoint};
use padesurf_core::szego::{classify_index, predictor_build, szego_build, DivisorTable, PsiFunction, SzegoData};
use padesurf_core::ComplexValue;
use std::f64::consts::PI;
use std::sync::Arc;

const PREC: u32 = 128;
const R: f64 = 3.0;
const DELTA: f64 = 0.05;

fn szego() -> SzegoData {
    let contour = IntervalContour::from_f64(&[(-1.0, -0.5), (0.5, 1.0)], PREC).unwrap();
    let s = Arc::new(build_surface(&contour, &QuadSettings::for_prec(PREC)).unwrap());
    let p = Polynomial::new(vec![cx(PREC, -2.0, -0.25), cx(PREC, 1.0, 0.0)]);
    let w = Weight::new(WeightKind::Polynomial(p), s.contour(), Weight::DEFAULT_MARGIN).unwrap();
    szego_build(s, &w).unwrap()
}

fn arg(sz: &SzegoData, psi: &PsiFunction, sheet: u8, (x, y): (f64, f64)) -> f64 {
    let d = sz.point_data(&SurfacePoint::new(cx(PREC, x, y), sheet)).unwrap();
    let v = psi.eval(sz, &d).unwrap();
    v.imag().to_f64().atan2(v.real().to_f64())
}

/// Accumulated phase change along the closed polygon: each edge is split into
/// 32 pieces, then refined until every step changes the phase by less than
/// 1/2 radian.
fn winding(sz: &SzegoData, psi: &PsiFunction, sheet: u8, path: &[(f64, f64)]) -> i64 {
    let wrap = |d: f64| (d + PI).rem_euclid(2.0 * PI) - PI;
    let mut total = 0.0;
    let mut fine = Vec::new();
    for i in 0..path.len() {
        let (a, b) = (path[i], path[(i + 1) % path.len()]);
        for k in 0..32 {
            let t = k as f64 / 32.0;
            fine.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }
    for i in 0..fine.len() {
        let (a, b) = (fine[i], fine[(i + 1) % fine.len()]);
        let mut stack = vec![(a, b, arg(sz, psi, sheet, a), arg(sz, psi, sheet, b), 0)];
        while let Some((p, q, fp, fq, depth)) = stack.pop() {
            let d = wrap(fq - fp);
            if d.abs() < 0.5 || depth > 20 {
                total += d;
                continue;
            }
            let m = ((p.0 + q.0) / 2.0, (p.1 + q.1) / 2.0);
            let fm = arg(sz, psi, sheet, m);
            stack.push((m, q, fm, fq, depth + 1));
            stack.push((p, m, fp, fm, depth + 1));
        }
    }
    (total / (2.0 * PI)).round() as i64
}

fn circle() -> Vec<(f64, f64)> {
    (0..64).map(|k| 2.0 * PI * (k as f64 + 0.5) / 64.0).map(|t| (R * t.cos(), R * t.sin())).collect()
}

fn rectangle(a: f64, b: f64) -> Vec<(f64, f64)> {
    vec![(a - DELTA, -DELTA), (b + DELTA, -DELTA), (b + DELTA, DELTA), (a - DELTA, DELTA)]
}

fn in_region(z: &ComplexValue) -> bool {
    let (x, y) = (z.real().to_f64(), z.imag().to_f64());
    let inside_rect = [(-1.0, -0.5), (0.5, 1.0)].iter().any(|&(a, b)| x > a - DELTA && x < b + DELTA && y.abs() < DELTA);
    x.hypot(y) < R && !inside_rect
}

/// On each sheet `Ψ_n` is analytic off `Δ`, so the winding on `|z| = R` is
/// fixed by the orders outside the circle. The windings around thin
/// rectangles enclosing the intervals are not zero counts on a single sheet.
/// Through the jump relation `Ψ(x^(1)±) = ρ Ψ(x^(0)∓)` the two sheets glue,
/// and the sum over both sheets counts the zeros of `Ψ_n` on the surface
/// inside the lifted rectangles.
#[test]
fn psi_divisor_matches_argument_principle() {
    let sz = szego();
    let g = sz.surface().genus() as i64;
    let mut table = DivisorTable::new();
    let mut checked = 0;
    for n in [5usize, 6] {
        let idx = classify_index(&sz, &mut table, n, 0.1).unwrap();
        if !idx.in_n_epsilon {
            continue;
        }
        let psi = PsiFunction::new(&sz, &mut table, n as i64).unwrap();
        let finite = |sheet: u8, pred: &dyn Fn(&ComplexValue) -> bool| {
            psi.divisor.on_sheet(sheet).filter(|p| p.z.as_ref().is_some_and(pred)).count() as i64
        };
        let mut zeros_in_region = 0;
        let mut inner_total = 0;
        for sheet in [0u8, 1] {
            let outer = winding(&sz, &psi, sheet, &circle());
            let inner: i64 = [(-1.0, -0.5), (0.5, 1.0)].iter().map(|&(a, b)| winding(&sz, &psi, sheet, &rectangle(a, b))).sum();
            // Pole of order n at ∞^(0); zero of order n − g (plus divisor
            // points there) at ∞^(1); finite divisor points with |z| ≥ R.
            let at_inf = psi.divisor.on_sheet(1).filter(|p| p.is_infinity()).count() as i64;
            let far = finite(sheet, &|z| abs_f64(z) >= R);
            let at_infinity = if sheet == 0 { -(n as i64) } else { n as i64 - g + at_inf };
            assert_eq!(outer, -(at_infinity + far), "n = {n}, sheet {sheet}");
            zeros_in_region += outer - inner;
            inner_total += inner;
        }
        let expected: i64 = [0u8, 1].iter().map(|&k| finite(k, &in_region)).sum();
        let near_cut: i64 = [0u8, 1].iter().map(|&k| finite(k, &|z| abs_f64(z) < R && !in_region(z))).sum();
        assert_eq!(inner_total, near_cut, "n = {n}: {:?}", psi.divisor.points);
        assert_eq!(zeros_in_region, expected, "n = {n}: {:?}", psi.divisor.points);
        checked += 1;
    }
    assert_eq!(checked, 2);
}

#[test]
fn gamma_product_stays_in_a_band() {
    let sz = szego();
    let mut table = DivisorTable::new();
    let mut band = (f64::INFINITY, 0.0f64);
    for n in 5..=16 {
        let idx = classify_index(&sz, &mut table, n, 0.1).unwrap();
        if !idx.in_n_epsilon {
            continue;
        }
        let b = predictor_build(&sz, &mut table, &idx).unwrap();
        let prod = abs_f64(&(b.gamma.unwrap() * b.gamma_star.unwrap()));
        band = (band.0.min(prod), band.1.max(prod));
    }
    println!("|γ_n γ_n^*| band over n = 5..16: [{:e}, {:e}]", band.0, band.1);
    assert!(band.0 > 0.0 && band.1.is_finite());
    assert!(band.1 / band.0 < 1e3, "band [{:e}, {:e}]", band.0, band.1);
}

