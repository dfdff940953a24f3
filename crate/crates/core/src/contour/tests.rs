use super::*;
use crate::numerics::{cx, Polynomial};

const P: u32 = 256;

fn cheb() -> IntervalContour {
    IntervalContour::from_f64(&[(-1.0, 1.0)], P).unwrap()
}

fn two() -> IntervalContour {
    IntervalContour::from_f64(&[(-1.0, -0.5), (0.5, 1.0)], P).unwrap()
}

fn t_minus_2(c: &IntervalContour) -> Weight {
    Weight::new(WeightKind::Polynomial(Polynomial::from_real_coeffs(&[-2.0, 1.0], P)), c, 0.05).unwrap()
}

fn close(a: &ComplexValue, b: &ComplexValue, tol: f64) -> bool {
    abs_f64(&ComplexValue::with_val(P, a - b)) <= tol
}

/// Independent closed form `1/(2√(z²−1))` with the branch `~ 1/(2z)` at infinity.
fn cheb_f(z: &ComplexValue) -> ComplexValue {
    let s = (ComplexValue::with_val(P, z - 1u32).sqrt()) * ComplexValue::with_val(P, z + 1u32).sqrt();
    (s * 2u32).recip()
}

#[test]
fn w_delta_examples() {
    let c = cheb();
    let w = c.w_delta_eval(&cx(P, 2.0, 0.0)).unwrap();
    assert!(close(&w, &ComplexValue::with_val(P, (Real::with_val(P, 3).sqrt(), 0)), 1e-70));
    let x = Real::with_val(P, 0.6);
    let s = (Real::with_val(P, 1) - Real::with_val(P, x.square_ref())).sqrt();
    let tr = c.w_delta_trace(&x).unwrap();
    assert!(close(&tr.value_plus, &ComplexValue::with_val(P, (0, &s)), 1e-70));
    assert!(close(&tr.value_minus, &ComplexValue::with_val(P, (0, -s)), 1e-70));
    assert_eq!(c.w_delta_eval(&cx(P, 0.25, 0.0)), Err(Error::OnCut));
    let w0 = two().w_delta_eval(&cx(P, 0.0, 0.0)).unwrap();
    assert!((abs_f64(&w0) - 0.5).abs() < 1e-70);
}

#[test]
fn w_delta_squares_to_branch_polynomial() {
    let c = IntervalContour::from_f64(&[(-3.0, -2.0), (-1.0, 1.0), (2.0, 3.0)], P).unwrap();
    for k in 0..100 {
        let th = 0.37 * k as f64;
        let r = 0.2 + 0.05 * k as f64;
        let z = cx(P, r * th.cos(), r * th.sin() + 1e-3);
        let w = c.w_delta_eval(&z).unwrap();
        let mut prod = cx(P, 1.0, 0.0);
        for e in c.branch_points() {
            prod *= ComplexValue::with_val(P, &z - e);
        }
        let rel = abs_f64(&(w.clone().square() - &prod)) / abs_f64(&prod);
        assert!(rel < 1e-70, "z #{k}: {rel}");
        let zz = ComplexValue::with_val(P, &z * 1e8);
        let lead = c.w_delta_eval(&zz).unwrap() / zz.clone().square() / &zz;
        assert!(abs_f64(&(lead - 1u32)) < 1e-6);
    }
}

#[test]
fn trace_antisymmetry_and_continuity() {
    let c = two();
    for x in [-0.9, -0.6, 0.55, 0.75, 0.99] {
        let tr = c.w_delta_trace(&Real::with_val(P, x)).unwrap();
        assert!(abs_f64(&ComplexValue::with_val(P, &tr.value_plus + &tr.value_minus)) < 1e-70);
        let above = c.w_delta_eval(&cx(P, x, 1e-30)).unwrap();
        assert!(close(&above, &tr.value_plus, 1e-25));
    }
}

#[test]
fn chebyshev_moments() {
    let c = cheb();
    let w = Weight::unit(&c);
    let s = f_rho_coefficients(&c, &w, 9, &QuadSettings::for_prec(P), P).unwrap();
    let expect = [0.0, 0.5, 0.0, 0.25, 0.0, 3.0 / 16.0, 0.0, 5.0 / 32.0, 0.0, 35.0 / 256.0];
    for (k, e) in expect.iter().enumerate() {
        assert!(close(&s.coefficients[k], &cx(P, *e, 0.0), 1e-70), "f_{k}");
    }
}

#[test]
fn linear_weight_moments_match_partial_fractions() {
    // f = (z−2)/(2√(z²−1)) − 1/2: f_{2m} = c_m, f_{2m+1} = −2 c_m, c_m = C(2m,m)/(2·4^m)
    let c = cheb();
    let w = t_minus_2(&c);
    let s = f_rho_coefficients(&c, &w, 12, &QuadSettings::for_prec(P), P).unwrap();
    let mut cm = Real::with_val(P, 0.5);
    assert!(close(&s.coefficients[1], &cx(P, -1.0, 0.0), 1e-70));
    for m in 1..6u32 {
        cm *= (2 * m - 1) * 2 * m;
        cm /= m * m * 4;
        let even = ComplexValue::with_val(P, (&cm, 0));
        assert!(close(&s.coefficients[2 * m as usize], &even, 1e-70), "f_{}", 2 * m);
        let odd = ComplexValue::with_val(P, -(even * 2u32));
        assert!(close(&s.coefficients[2 * m as usize + 1], &odd, 1e-70), "f_{}", 2 * m + 1);
    }
}

#[test]
fn moments_real_for_real_data() {
    let c = two();
    let w = t_minus_2(&c);
    let s = f_rho_coefficients(&c, &w, 30, &QuadSettings::for_prec(P), P).unwrap();
    for f in &s.coefficients {
        assert!(f.imag().to_f64().abs() < 1e-70);
    }
    assert!(w.is_real());
}

#[test]
fn moments_stable_under_doubling() {
    let c = two();
    let w = t_minus_2(&c);
    let a = f_rho_coefficients(&c, &w, 41, &QuadSettings::for_prec(P), P).unwrap();
    let mut s2 = QuadSettings::for_prec(P);
    s2.start_order = 512;
    let b = f_rho_coefficients(&c, &w, 41, &s2, P).unwrap();
    for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
        assert!(close(x, y, 1e-65));
    }
}

#[test]
fn f_rho_point_values() {
    let c = cheb();
    let w = Weight::unit(&c);
    let set = QuadSettings::for_prec(P);
    let v = f_rho_eval(&c, &w, &cx(P, 2.0, 0.0), &set, P).unwrap();
    assert!(close(&v, &cheb_f(&cx(P, 2.0, 0.0)), 1e-70));
    for z in [cx(P, 0.3, 1e-3), cx(P, -0.99, -1e-5), cx(P, 1.01, 0.0), cx(P, 0.0, 0.4)] {
        let v = f_rho_eval(&c, &w, &z, &set, P).unwrap();
        assert!(close(&v, &cheb_f(&z), 1e-60), "z = {:?}", crate::numerics::to_c64(&z));
    }
    let lin = t_minus_2(&c);
    for z in [cx(P, 0.2, 0.01), cx(P, 3.0, -1.0)] {
        let v = f_rho_eval(&c, &lin, &z, &set, P).unwrap();
        let expect = ComplexValue::with_val(P, &z - 2u32) * cheb_f(&z) - 0.5f64;
        assert!(close(&v, &expect, 1e-60));
    }
    assert_eq!(f_rho_eval(&c, &w, &cx(P, 0.5, 0.0), &set, P), Err(Error::OnCut));
}

#[test]
fn f_rho_conjugation_and_series() {
    let c = two();
    let w = t_minus_2(&c);
    let set = QuadSettings::for_prec(P);
    let z = cx(P, 0.7, 0.05);
    let a = f_rho_eval(&c, &w, &z, &set, P).unwrap();
    let b = f_rho_eval(&c, &w, &z.clone().conj(), &set, P).unwrap();
    assert!(close(&a, &b.conj(), 1e-65));
    let s = f_rho_coefficients(&c, &w, 200, &set, P).unwrap();
    let zf = cx(P, 3.0, 2.0);
    let mut series = czero(P);
    let zi = zf.clone().recip();
    let mut pw = cx(P, 1.0, 0.0);
    for f in &s.coefficients {
        series += ComplexValue::with_val(P, f * &pw);
        pw *= &zi;
    }
    assert!(close(&f_rho_eval(&c, &w, &zf, &set, P).unwrap(), &series, 1e-60));
}

#[test]
fn sokhotski_examples() {
    let c = cheb();
    let set = QuadSettings::for_prec(P);
    let r = sokhotski_check(&c, &Weight::unit(&c), &Real::with_val(P, 0), &set, P).unwrap();
    assert!(r.residual < 1e-60, "{}", r.residual);
    assert!(r.observed_order >= 1.0 - 1e-3 || r.approach.iter().all(|x| x.1 < 1e-60));
    let plus = f_rho_trace(&c, &Weight::unit(&c), &Real::with_val(P, 0), Side::Plus, &set, P).unwrap();
    let minus = f_rho_trace(&c, &Weight::unit(&c), &Real::with_val(P, 0), Side::Minus, &set, P).unwrap();
    assert!(close(&(plus - minus), &cx(P, 0.0, -1.0), 1e-60));
    let r = sokhotski_check(&c, &t_minus_2(&c), &Real::with_val(P, 0.5), &set, P).unwrap();
    assert!(r.residual < 1e-60);
    let g1 = two();
    let r = sokhotski_check(&g1, &t_minus_2(&g1), &Real::with_val(P, 0.9), &set, P).unwrap();
    assert!(r.residual < 1e-60);
    assert!(r.approach[0].1 < 1e-2 && r.approach[2].1 < r.approach[0].1);
}

#[test]
fn weight_validation_and_branch() {
    let c = cheb();
    let near = Polynomial::from_real_coeffs(&[-1.05, 1.0], P);
    assert!(Weight::new(WeightKind::Polynomial(near), &c, 0.05).is_err());
    let cplx = Polynomial::new(vec![cx(P, -2.0, -0.25), cx(P, 1.0, 0.0)]);
    let w = Weight::new(WeightKind::Polynomial(cplx), &c, 0.05).unwrap();
    for x in [-0.99, -0.3, 0.4, 0.97] {
        assert!(w.branch_residual(0, &cx(P, x, 0.01)) < 1e-70);
    }
    let e = Weight::new(WeightKind::ExpPolynomial(Polynomial::from_real_coeffs(&[0.0, 1.0], P)), &c, 0.05).unwrap();
    assert!(close(&e.log_eval(0, &cx(P, 0.3, 0.0)), &cx(P, 0.3, 0.0), 1e-70));
    let rat = WeightKind::Rational {
        num: Polynomial::from_real_coeffs(&[3.0, 1.0], P),
        den: Polynomial::from_real_coeffs(&[-4.0, 0.0, 1.0], P),
    };
    let r = Weight::new(rat, &c, 0.05).unwrap();
    assert!(r.branch_residual(0, &cx(P, 0.9, -0.1)) < 1e-70);
    assert!(Weight::unit(&c).is_identity());
}
