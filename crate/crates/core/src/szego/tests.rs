use super::*;
use crate::contour::{QuadSettings, WeightKind};
use crate::numerics::{cx, Polynomial};
use crate::surface::build_surface;

const PREC: u32 = 192;

fn setup(intervals: &[(f64, f64)], rho: Option<&[f64]>) -> SzegoData {
    let contour = IntervalContour::from_f64(intervals, PREC).unwrap();
    let s = build_surface(&contour, &QuadSettings::for_prec(PREC)).unwrap();
    let w = match rho {
        None => Weight::unit(&contour),
        Some(c) => Weight::new(
            WeightKind::Polynomial(Polynomial::from_real_coeffs(c, PREC)),
            &contour,
            Weight::DEFAULT_MARGIN,
        )
        .unwrap(),
    };
    szego_build(Arc::new(s), &w).unwrap()
}

/// `t − 2 − i/4`.
fn complex_weight(intervals: &[(f64, f64)]) -> SzegoData {
    let contour = IntervalContour::from_f64(intervals, PREC).unwrap();
    let s = build_surface(&contour, &QuadSettings::for_prec(PREC)).unwrap();
    let p = Polynomial::new(vec![cx(PREC, -2.0, -0.25), cx(PREC, 1.0, 0.0)]);
    let w = Weight::new(WeightKind::Polynomial(p), &contour, Weight::DEFAULT_MARGIN).unwrap();
    szego_build(Arc::new(s), &w).unwrap()
}

/// Standard exterior map `z + √(z²−1)` with modulus above one.
fn phi_std(z: &ComplexValue) -> ComplexValue {
    let r = (z.clone().square() - 1u32).sqrt();
    let a = ComplexValue::with_val(PREC, z + &r);
    let b = ComplexValue::with_val(PREC, z - &r);
    if abs_f64(&a) >= abs_f64(&b) {
        a
    } else {
        b
    }
}

fn rel(a: &ComplexValue, b: &ComplexValue) -> f64 {
    abs_f64(&ComplexValue::with_val(PREC, a - b)) / abs_f64(b)
}

#[test]
fn unit_weight_is_trivial() {
    let sz = setup(&[(-1.0, -0.5), (0.5, 1.0)], None);
    assert!(sz.c_rho().iter().all(|c| c.is_zero()));
    let s = sz.s_rho(&SurfacePoint::new(cx(PREC, 0.3, 0.4), 1)).unwrap();
    assert!(rel(&s, &cx(PREC, 1.0, 0.0)) < 1e-50);
}

#[test]
fn genus_zero_szego_closed_form() {
    // ρ = t − 2 = −(φ(2)/2) h⁺ h⁻ with h = 1 − 1/(φ(2) φ(z)), so S_ρ h is constant
    // on sheet 0 with square −2/φ(2).
    let sz = setup(&[(-1.0, 1.0)], Some(&[-2.0, 1.0]));
    let pa = phi_std(&cx(PREC, 2.0, 0.0));
    let target = cx(PREC, -2.0, 0.0) / &pa;
    let mut first: Option<ComplexValue> = None;
    for (x, y) in [(0.3, 0.2), (-1.7, -0.4), (4.0, 9.0), (0.0, -0.01)] {
        let z = cx(PREC, x, y);
        let h = cx(PREC, 1.0, 0.0) - cx(PREC, 1.0, 0.0) / (phi_std(&z) * &pa);
        let v = sz.s_rho(&SurfacePoint::new(z, 0)).unwrap() * h;
        assert!(rel(&v.clone().square(), &target) < 1e-40);
        match &first {
            None => first = Some(v),
            Some(f) => assert!(rel(&v, f) < 1e-40),
        }
    }
}

#[test]
fn szego_jump_relation() {
    for iv in [vec![(-1.0, 1.0)], vec![(-1.0, -0.5), (0.5, 1.0)]] {
        let real = setup(&iv, Some(&[-2.0, 1.0]));
        let cplx = complex_weight(&iv);
        for x in [-0.8, -0.6, 0.55, 0.9] {
            let xr = Real::with_val(PREC, x);
            assert!(real.jump_residual(&xr).unwrap() < 1e-40);
            assert!(cplx.jump_residual(&xr).unwrap() < 1e-40);
        }
    }
}

#[test]
fn genus_zero_predictor_is_phi_power() {
    let sz = setup(&[(-1.0, 1.0)], None);
    let mut table = DivisorTable::new();
    let z = cx(PREC, 0.4, 0.9);
    let (d0, d1) = sz.point_pair(&z).unwrap();
    let phi = sz.surface().phi_eval(&d0.point).unwrap();
    for n in [1usize, 4, 7] {
        let idx = classify_index(&sz, &mut table, n, 0.1).unwrap();
        assert!(idx.in_n_star && idx.in_n_epsilon);
        let b = predictor_build(&sz, &mut table, &idx).unwrap();
        let pn = rug::ops::Pow::pow(phi.clone(), n as i32);
        assert!(rel(&b.psi_at(&sz, &d0).unwrap(), &pn) < 1e-40);
        assert!(rel(&b.psi_star_at(&sz, &d1).unwrap(), &(cx(PREC, 1.0, 0.0) / &pn)) < 1e-40);
        // Φ ~ −2z, so γ_n = (−2)^{−n} and γ_n^* = (−2)^{n−1}.
        let g = b.gamma.unwrap();
        let gs = b.gamma_star.unwrap();
        assert!(rel(&g, &cx(PREC, (-2f64).powi(-(n as i32)), 0.0)) < 1e-40);
        assert!(rel(&gs, &cx(PREC, (-2f64).powi(n as i32 - 1), 0.0)) < 1e-25, "γ* = {gs}");
    }
}

fn first_in_n_epsilon(sz: &SzegoData, table: &mut DivisorTable, from: usize) -> IndexData {
    (from..from + 8)
        .map(|n| classify_index(sz, table, n, 0.1).unwrap())
        .find(|i| i.in_n_epsilon)
        .expect("an index in 𝒩_ε")
}

#[test]
fn genus_one_psi_gap_continuity_jump_and_det() {
    let iv = [(-1.0, -0.5), (0.5, 1.0)];
    for sz in [setup(&iv, Some(&[-2.0, 1.0])), complex_weight(&iv)] {
        let mut table = DivisorTable::new();
        let idx = first_in_n_epsilon(&sz, &mut table, 5);
        let b = predictor_build(&sz, &mut table, &idx).unwrap();
        assert!(b.gamma_star_error < gamma_tolerance(PREC));
        // Ψ is continuous across the gap on both sheets.
        for x in [-0.2, 0.1] {
            let xr = Real::with_val(PREC, x);
            for sheet in [0u8, 1] {
                let up = sz.point_data(&SurfacePoint::trace(&xr, sheet, Side::Plus)).unwrap();
                let dn = sz.point_data(&SurfacePoint::trace(&xr, sheet, Side::Minus)).unwrap();
                let a = b.psi.eval(&sz, &up).unwrap();
                let c = b.psi.eval(&sz, &dn).unwrap();
                assert!(rel(&a, &c) < 1e-30, "gap x={x} sheet={sheet}: {a} vs {c}");
            }
        }
        // (Ψ_n^*)^± = ρ Ψ_n^∓ on Δ.
        for x in [-0.7, 0.8] {
            let xr = Real::with_val(PREC, x);
            let j = if x < 0.0 { 0 } else { 1 };
            let rho = sz.weight().eval(j, &cx(PREC, x, 0.0));
            for (s1, s0) in [(Side::Plus, Side::Minus), (Side::Minus, Side::Plus)] {
                let star = sz.point_data(&SurfacePoint::trace(&xr, 1, s1)).unwrap();
                let base = sz.point_data(&SurfacePoint::trace(&xr, 0, s0)).unwrap();
                let lhs = b.psi.eval(&sz, &star).unwrap();
                let rhs = b.psi.eval(&sz, &base).unwrap() * &rho;
                assert!(rel(&lhs, &rhs) < 1e-30, "jump x={x}");
            }
        }
        // det N = γ_n γ_n^* (Ψ_n Ψ_{n−1}^* − Ψ_n^* Ψ_{n−1}) / w = 1.
        for (x, y) in [(0.2, 0.6), (-1.4, -0.3), (3.0, 2.0)] {
            let z = cx(PREC, x, y);
            let (d0, d1) = sz.point_pair(&z).unwrap();
            let w = sz.surface().w_side(&z, Side::Plus);
            let cross = b.psi_at(&sz, &d0).unwrap() * b.psi_prev_at(&sz, &d1).unwrap()
                - b.psi_star_at(&sz, &d1).unwrap() * b.psi_prev_at(&sz, &d0).unwrap();
            let det = cross * b.gamma.as_ref().unwrap() * b.gamma_star.as_ref().unwrap() / w;
            assert!(rel(&det, &cx(PREC, 1.0, 0.0)) < 1e-25, "det N = {det}");
        }
    }
}
