use super::jip::random_point;
use super::*;
use crate::contour::{QuadSettings, Side};
use crate::numerics::{abs_f64, cx, pi, ComplexValue, Real};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PREC: u32 = 192;

fn surface(intervals: &[(f64, f64)]) -> HyperellipticSurface {
    let contour = IntervalContour::from_f64(intervals, PREC).unwrap();
    build_surface(&contour, &QuadSettings::for_prec(PREC)).unwrap()
}

fn sym(a: f64) -> HyperellipticSurface {
    surface(&[(-1.0, -a), (a, 1.0)])
}

fn diff(a: &[ComplexValue], b: &[ComplexValue]) -> Vec<ComplexValue> {
    a.iter().zip(b).map(|(x, y)| ComplexValue::with_val(PREC, x - y)).collect()
}

/// `K(k) = π / (2 AGM(1, √(1 − k²)))`.
fn ellip_k(k: &Real) -> Real {
    let kp = (Real::with_val(PREC, 1) - Real::with_val(PREC, k.square_ref())).sqrt();
    let agm = Real::with_val(PREC, Real::with_val(PREC, 1).agm_ref(&kp));
    pi(PREC) / (agm * 2u32)
}

#[test]
fn genus_zero_degeneracy() {
    let s = surface(&[(-1.0, 1.0)]);
    assert_eq!(s.genus(), 0);
    assert!(s.period_matrix().is_empty());
    assert_eq!(s.green_polynomial().degree(), 0);
    assert!(s.invariant_checks().iter().all(|c| c.passed));
    // Φ(z) = −(z + √(z²−1)) with the base point a_1 = −1.
    let phi = s.phi_eval(&SurfacePoint::new(cx(PREC, 1.25, 0.0), 0)).unwrap();
    assert!(abs_f64(&(phi.clone() + cx(PREC, 2.0, 0.0))) < 1e-40, "Φ(1.25) = {phi}");
    let z = cx(PREC, 0.3, 0.7);
    let phi = s.phi_eval(&SurfacePoint::new(z.clone(), 0)).unwrap();
    let w = ComplexValue::with_val(PREC, &z + 1u32).sqrt() * ComplexValue::with_val(PREC, &z - 1u32).sqrt();
    let exact = -(z + w);
    assert!(abs_f64(&(phi - exact)) < 1e-40);
    // Capacity 1/2: g(z) − log|z| → log 2.
    let ginf = Real::with_val(PREC, s.green_infinity().real());
    assert!((ginf.to_f64() - 2f64.ln()).abs() < 1e-14);
    // Far evaluation through the ray continuation.
    let z = cx(PREC, -40.0, 25.0);
    let phi = s.phi_eval(&SurfacePoint::new(z.clone(), 0)).unwrap();
    let w = ComplexValue::with_val(PREC, &z + 1u32).sqrt() * ComplexValue::with_val(PREC, &z - 1u32).sqrt();
    assert!(abs_f64(&(phi + z + w)) < 1e-38);
}

#[test]
fn symmetric_genus_one_green_and_periods() {
    let a = 0.3;
    let s = sym(a);
    let m = s.green_polynomial();
    assert_eq!(m.degree(), 1);
    assert!(abs_f64(&m.coeffs()[0]) < 1e-40, "M(z) = z expected");
    let b = &s.period_matrix()[0][0];
    assert!(b.real().to_f64().abs() < 1e-40);
    // Oracle: Im B = K(k') / (2 K(k)) with k = a.
    let k = Real::with_val(PREC, a);
    let kp = (Real::with_val(PREC, 1) - Real::with_val(PREC, k.square_ref())).sqrt();
    let expected = ellip_k(&kp) / (ellip_k(&k) * 2u32);
    let err = Real::with_val(PREC, b.imag() - &expected).to_f64().abs();
    assert!(err < 1e-40, "Im B = {} vs {}", b.imag(), expected);
    // ω, τ real and reproducible.
    let (om, ta) = s.green_periods();
    assert_eq!(om.len(), 1);
    assert!(ta[0].is_finite() && om[0].is_finite());
}

#[test]
fn theta_closed_form_and_quasi_periodicity() {
    let b = vec![vec![cx(PREC, 0.0, 1.0)]];
    let inv = vec![vec![Real::with_val(PREC, 1)]];
    let (v, _) = theta::theta_with_mass(&b, &inv, &[cx(PREC, 0.0, 0.0)], PREC);
    let g34 = Real::with_val(PREC, 0.75).gamma();
    let expected = Real::with_val(PREC, pi(PREC).sqrt().sqrt()) / g34;
    assert!((v.real().to_f64() - 1.0864348112133080146).abs() < 1e-15);
    assert!(Real::with_val(PREC, v.real() - &expected).to_f64().abs() < 1e-50);

    let s = surface(&[(-3.0, -2.0), (-1.0, 1.0), (2.0, 3.0)]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    use rand::Rng;
    for _ in 0..20 {
        let u: Vec<ComplexValue> =
            (0..2).map(|_| cx(PREC, rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5))).collect();
        let j: Vec<i64> = (0..2).map(|_| rng.gen_range(-2..=2)).collect();
        let m: Vec<i64> = (0..2).map(|_| rng.gen_range(-2..=2)).collect();
        let shifted: Vec<ComplexValue> = u.iter().zip(s.lattice_vector(&j, &m)).map(|(a, b)| b + a).collect();
        let lhs = s.theta(&shifted);
        // exp(−πi mᵀBm − 2πi mᵀu) θ(u)
        let mut e = cx(PREC, 0.0, 0.0);
        for i in 0..2 {
            for k in 0..2 {
                e += ComplexValue::with_val(PREC, &s.period_matrix()[i][k] * (m[i] * m[k]));
            }
            e += ComplexValue::with_val(PREC, &u[i] * (2 * m[i]));
        }
        let f = (e * ComplexValue::with_val(PREC, (0, -pi(PREC)))).exp();
        let rhs = f * s.theta(&u);
        assert!(abs_f64(&(lhs - &rhs)) <= 1e-40 * abs_f64(&rhs).max(1.0));
    }
}

#[test]
fn riemann_constant_genus_one() {
    let s = sym(0.4);
    let k = s.riemann_constants();
    let b = &s.period_matrix()[0][0];
    let expected = ComplexValue::with_val(PREC, b + 1u32) / 2u32;
    assert!(s.lattice_residual(&diff(k, &[expected])) < 1e-40);
    let (t, mass) = s.theta_with_mass(k);
    assert!(abs_f64(&t) / mass < 1e-40);
}

#[test]
fn genus_two_surface_builds() {
    let s = surface(&[(-3.0, -2.0), (-1.0, 1.0), (2.0, 3.0)]);
    assert_eq!(s.genus(), 2);
    assert!(s.invariant_checks().iter().all(|c| c.passed), "{:?}", s.invariant_checks());
    assert_eq!(s.k_source(), KSource::HalfPeriodSearch);
}

#[test]
fn phi_identities_and_abel_antisymmetry() {
    let s = surface(&[(-1.0, -0.2), (0.4, 1.3)]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..12 {
        let p = random_point(&s, &mut rng);
        let q = p.involution();
        let f0 = s.phi_eval(&p).unwrap();
        let f1 = s.phi_eval(&q).unwrap();
        assert!(abs_f64(&(ComplexValue::with_val(PREC, &f0 * &f1) - cx(PREC, 1.0, 0.0))) < 1e-40);
        let (big, small) = if p.sheet == 0 { (&f0, &f1) } else { (&f1, &f0) };
        assert!(abs_f64(big) > 1.0 && abs_f64(small) < 1.0);
        let sum: Vec<ComplexValue> =
            s.abel_map(&p).unwrap().iter().zip(s.abel_map(&q).unwrap()).map(|(a, b)| b + a).collect();
        assert!(s.lattice_residual(&sum) < 1e-40);
    }
}

#[test]
fn infinity_difference_matches_green_periods() {
    for iv in [vec![(-1.0, -0.3), (0.3, 1.0)], vec![(-1.0, -0.2), (0.4, 1.3)], vec![(-3.0, -2.0), (-1.0, 1.0), (2.0, 3.0)]]
    {
        let s = surface(&iv);
        let o0 = s.abel_map(&SurfacePoint::infinity(0)).unwrap();
        let o1 = s.abel_map(&SurfacePoint::infinity(1)).unwrap();
        let (om, ta) = s.green_periods();
        let target: Vec<ComplexValue> = (0..s.genus())
            .map(|i| {
                let mut v = ComplexValue::with_val(PREC, (&om[i], 0));
                for k in 0..s.genus() {
                    v += ComplexValue::with_val(PREC, &s.period_matrix()[i][k] * &ta[k]);
                }
                v
            })
            .collect();
        let d = diff(&diff(&o0, &o1), &target);
        assert!(s.lattice_residual(&d) < 1e-40, "{iv:?}: {:e}", s.lattice_residual(&d));
    }
}

#[test]
fn far_and_near_abel_agree_across_threshold() {
    let s = surface(&[(-1.0, -0.2), (0.4, 1.3)]);
    // Ω is continuous; sample just inside and outside the ray threshold.
    let c = s.hull_center().to_f64();
    let r = 3.0 * 1.15;
    let zin = cx(PREC, c + (r - 1e-9) * 0.6, (r - 1e-9) * 0.8);
    let zout = cx(PREC, c + (r + 1e-9) * 0.6, (r + 1e-9) * 0.8);
    let a = s.abel_map(&SurfacePoint::new(zin, 0)).unwrap();
    let b = s.abel_map(&SurfacePoint::new(zout, 0)).unwrap();
    assert!(abs_f64(&diff(&a, &b)[0]) < 1e-8);
    // Large z approaches Ω(∞^(0)).
    let zbig = cx(PREC, 3e12, 4e12);
    let a = s.abel_map(&SurfacePoint::new(zbig, 0)).unwrap();
    assert!(abs_f64(&diff(&a, s.abel_infinity())[0]) < 1e-11);
}

#[test]
fn third_kind_properties() {
    for iv in [vec![(-1.0, -0.2), (0.4, 1.3)], vec![(-3.0, -2.0), (-1.0, 1.0), (2.0, 3.0)]] {
        let s = surface(&iv);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..4 {
            let p = random_point(&s, &mut rng);
            let rep = s.third_kind_report(&p).unwrap();
            assert!(abs_f64(&(rep.residue_p.clone() - cx(PREC, 1.0, 0.0))) < 1e-40);
            assert!(abs_f64(&(rep.residue_p_star.clone() + cx(PREC, 1.0, 0.0))) < 1e-40);
            assert!(rep.alpha_period_residual < 1e-40, "{rep:?}");
            assert!(rep.reciprocity_residual < 1e-40, "{iv:?} {p:?} {rep:?}");
        }
    }
}

#[test]
fn cauchy_transform_antisymmetry_jump_and_infinity() {
    let s = surface(&[(-1.0, -0.2), (0.4, 1.3)]);
    let lam = |j: usize, t: &ComplexValue| {
        let v = ComplexValue::with_val(PREC, t * (j as u32 + 1)) + cx(PREC, 0.3, 0.1);
        v.square()
    };
    let dens = DeltaDensity { eval: &lam, margins: vec![f64::INFINITY; 2] };
    let c = s.delta_constants(&dens).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..6 {
        let p = random_point(&s, &mut rng);
        let a = s.cauchy_transform_delta(&dens, &c, &p).unwrap();
        let b = s.cauchy_transform_delta(&dens, &c, &p.involution()).unwrap();
        assert!(abs_f64(&(a + b)) < 1e-40);
    }
    // Λ(x + i0) + Λ(x − i0) = λ(x) on sheet 0.
    for (j, x) in [(0usize, -0.6), (1, 0.9)] {
        let xr = Real::with_val(PREC, x);
        let up = s.cauchy_transform_delta(&dens, &c, &SurfacePoint::trace(&xr, 0, Side::Plus)).unwrap();
        let dn = s.cauchy_transform_delta(&dens, &c, &SurfacePoint::trace(&xr, 0, Side::Minus)).unwrap();
        let target = lam(j, &cx(PREC, x, 0.0));
        assert!(abs_f64(&(up + dn - target)) < 1e-40);
    }
    // Continuity across a gap point.
    let xr = Real::with_val(PREC, 0.1);
    let up = s.cauchy_transform_delta(&dens, &c, &SurfacePoint::trace(&xr, 0, Side::Plus)).unwrap();
    let near = s.cauchy_transform_delta(&dens, &c, &SurfacePoint::new(cx(PREC, 0.1, 1e-12), 0)).unwrap();
    assert!(abs_f64(&(up - near)) < 1e-9);
    // Limit at infinity.
    let inf = s.cauchy_transform_delta(&dens, &c, &SurfacePoint::infinity(0)).unwrap();
    let far = s.cauchy_transform_delta(&dens, &c, &SurfacePoint::new(cx(PREC, -3e9, 4e9), 0)).unwrap();
    assert!(abs_f64(&(inf - far)) < 1e-8);
}

#[test]
fn beta_transform_reciprocity() {
    let s = surface(&[(-3.0, -2.0), (-1.0, 1.0), (2.0, 3.0)]);
    let c = vec![Real::with_val(PREC, 0.37), Real::with_val(PREC, -0.21)];
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..4 {
        let p = random_point(&s, &mut rng);
        let a = s.beta_transform(&c, &p).unwrap();
        let b = s.beta_transform_direct(&c, &p).unwrap();
        assert!(abs_f64(&(a - b)) < 1e-40);
    }
}

#[test]
fn jip_round_trip() {
    for iv in [vec![(-1.0, -0.2), (0.4, 1.3)], vec![(-3.0, -2.0), (-1.0, 1.0), (2.0, 3.0)]] {
        let s = surface(&iv);
        let g = s.genus();
        let d0 = s.jip_solve(&s.zero_vec()).unwrap();
        assert!(d0.points.iter().all(|p| p.is_infinity() && p.sheet == 1));
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        use rand::Rng;
        for _ in 0..5 {
            let rhs: Vec<ComplexValue> =
                (0..g).map(|_| cx(PREC, rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0))).collect();
            let d = s.jip_solve(&rhs).unwrap();
            assert_eq!(d.points.len(), g);
            assert!(d.residual < 1e-30, "{iv:?} residual {:e}", d.residual);
        }
    }
}

#[test]
fn jip_shift_by_green_periods_moves_infinity() {
    let s = sym(0.35);
    let (om, ta) = s.green_periods();
    let shift = ComplexValue::with_val(PREC, (&om[0], 0)) + ComplexValue::with_val(PREC, &s.period_matrix()[0][0] * &ta[0]);
    // rhs = 0 gives ∞^(1); adding ω + Bτ gives ∞^(0).
    let d = s.jip_solve(&[shift]).unwrap();
    assert!(d.points[0].is_infinity() && d.points[0].sheet == 0, "{:?}", d.points);
}

#[test]
fn snapshot_round_trip() {
    let s = surface(&[(-1.0, -0.2), (0.4, 1.3)]);
    let snap = s.snapshot();
    let t = HyperellipticSurface::from_snapshot(&snap).unwrap();
    assert_eq!(t.snapshot(), snap);
    let p = SurfacePoint::new(cx(PREC, 0.2, 0.5), 1);
    assert!(abs_f64(&diff(&s.abel_map(&p).unwrap(), &t.abel_map(&p).unwrap())[0]) < 1e-50);
}
