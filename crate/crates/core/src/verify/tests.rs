use super::*;
use crate::contour::{f_rho_coefficients, f_rho_eval, IntervalContour, QuadSettings, Weight};
use crate::pade::{pade_solve, DEFAULT_BITS_PER_ORDER};
use crate::surface::build_surface;
use crate::szego::{classify_index, predictor_build, szego_build, DivisorTable};
use std::sync::Arc;

const PREC: u32 = 192;

fn chebyshev() -> (SzegoData, IntervalContour, Weight) {
    let contour = IntervalContour::from_f64(&[(-1.0, 1.0)], PREC).unwrap();
    let s = build_surface(&contour, &QuadSettings::for_prec(PREC)).unwrap();
    let w = Weight::unit(&contour);
    (szego_build(Arc::new(s), &w).unwrap(), contour, w)
}

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

#[test]
fn chebyshev_sa1_residual_is_phi_power() {
    // Q_n = 2^{−n}(φ^n + φ^{−n}) and γ_n Ψ_n = 2^{−n} φ^n, so r₁ = φ^{−2n}.
    let (sz, contour, w) = chebyshev();
    let settings = QuadSettings::for_prec(PREC);
    let series = f_rho_coefficients(&contour, &w, 2 * 8 + 2, &settings, PREC).unwrap();
    let zs = ring_points(3.0, 6, PREC);
    let pts = eval_points(&sz, &zs).unwrap();
    let mut table = DivisorTable::new();
    for n in [2usize, 5, 8] {
        let pair = pade_solve(&series, n, PREC, DEFAULT_BITS_PER_ORDER).unwrap();
        let idx = classify_index(&sz, &mut table, n, 0.1).unwrap();
        let b = predictor_build(&sz, &mut table, &idx).unwrap();
        let f = |z: &ComplexValue, p: u32| f_rho_eval(&contour, &w, z, &QuadSettings::for_prec(p), p);
        let rec = compare_sa1(&sz, &pair, &b, &pts, 0.1, f, PREC).unwrap();
        for p in &rec.points {
            let oracle = rug::ops::Pow::pow(phi_std(&p.z), -2 * n as i32);
            let d = abs_f64(&ComplexValue::with_val(PREC, &p.r1 - &oracle));
            assert!(d < 1e-40 * abs_f64(&oracle).max(1e-20), "n={n}: r1={} oracle={oracle}", p.r1);
            // υ reproduces both sides exactly.
            assert!(abs_f64(&p.upsilon.0).is_finite());
        }
        let dets = det_n_check(&sz, &b, &pts).unwrap();
        assert!(dets.iter().all(|d| *d < 1e-40));
        let zeros = crate::pade::denominator_zeros(&pair).unwrap();
        assert!(pole_match(&zeros, &b.psi.divisor, 0.01).rows.is_empty());
        let jumps = jump_residuals(&sz, &b, &interior_samples(&sz, 3)).unwrap();
        assert!(jumps.iter().all(|j| j.plus < 1e-40 && j.minus < 1e-40));
    }
}

#[test]
fn det_n_at_two() {
    let (sz, _, _) = chebyshev();
    let mut table = DivisorTable::new();
    let idx = classify_index(&sz, &mut table, 6, 0.1).unwrap();
    let b = predictor_build(&sz, &mut table, &idx).unwrap();
    let pts = eval_points(&sz, &[cx(PREC, 2.0, 0.0)]).unwrap();
    assert!(det_n_check(&sz, &b, &pts).unwrap()[0] < 1e-40);
}

#[test]
fn exclusion_radius_is_enforced() {
    let d = Divisor {
        points: vec![SurfacePoint::new(cx(PREC, 1.5, 0.2), 0), SurfacePoint::new(cx(PREC, 0.0, 0.5), 1)],
        j_vec: vec![0, 0],
        m_vec: vec![0, 0],
        non_unique: false,
        residual: 0.0,
    };
    assert!(matches!(check_exclusion(&cx(PREC, 1.52, 0.2), &d, 0.1), Err(Error::ExcludedPoint(_))));
    // Sheet-1 points do not exclude.
    assert!(check_exclusion(&cx(PREC, 0.0, 0.5), &d, 0.1).is_ok());
    let t = pole_match(&[cx(PREC, 1.5, 0.199), cx(PREC, 0.0, 0.0)], &d, 0.01);
    assert_eq!(t.rows.len(), 1);
    assert!(t.rows[0].matched && t.rows[0].distance < 2e-3);
    assert_eq!(t.surplus_zeros.len(), 1);
}

#[test]
fn decay_fit_recovers_rate() {
    let ns: Vec<usize> = (5..=30).collect();
    let vals: Vec<f64> = ns.iter().map(|&n| 3.0 * 1.7f64.powi(-(n as i32))).collect();
    let f = fit_decay(&ns, &vals).unwrap();
    assert!((f.c - 1.7).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-10);
    assert!(fit_decay(&[3], &[1.0]).is_err());
}
