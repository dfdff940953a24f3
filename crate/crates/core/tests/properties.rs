//! Randomized invariants of the numerics, contour, Padé, surface and Szegő layers.

use padesurf_core::contour::{f_rho_coefficients, IntervalContour, PowerSeries, QuadSettings, Weight, WeightKind};
use padesurf_core::numerics::{abs_f64, cx, make_chebyshev_rule, make_legendre_rule, pi, poly_roots, solve_linear, Polynomial};
use padesurf_core::pade::pade_solve;
use padesurf_core::surface::{build_surface, theta, HyperellipticSurface, SurfacePoint};
use padesurf_core::szego::{szego_build, SzegoData};
use padesurf_core::{ComplexValue, Real};
use proptest::prelude::*;
use std::sync::{Arc, OnceLock};

const PREC: u32 = 128;

fn c(re: f64, im: f64) -> ComplexValue {
    cx(PREC, re, im)
}

fn rel(a: &ComplexValue, b: &ComplexValue) -> f64 {
    abs_f64(&ComplexValue::with_val(PREC, a - b)) / abs_f64(b).max(1e-300)
}

fn genus_one() -> &'static Arc<HyperellipticSurface> {
    static S: OnceLock<Arc<HyperellipticSurface>> = OnceLock::new();
    S.get_or_init(|| {
        let contour = IntervalContour::from_f64(&[(-1.0, -0.3), (0.2, 1.0)], PREC).unwrap();
        Arc::new(build_surface(&contour, &QuadSettings::for_prec(PREC)).unwrap())
    })
}

fn szego_one() -> &'static SzegoData {
    static S: OnceLock<SzegoData> = OnceLock::new();
    S.get_or_init(|| {
        let s = genus_one().clone();
        let p = Polynomial::new(vec![c(-2.0, -0.25), c(1.0, 0.0)]);
        let w = Weight::new(WeightKind::Polynomial(p), s.contour(), Weight::DEFAULT_MARGIN).unwrap();
        szego_build(s, &w).unwrap()
    })
}

/// Off-contour point with `|Im z| ≥ 0.05`.
fn off_axis() -> impl Strategy<Value = (f64, f64)> {
    (-2.5f64..2.5, 0.05f64..2.0, any::<bool>()).prop_map(|(x, y, up)| (x, if up { y } else { -y }))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, .. ProptestConfig::default() })]

    #[test]
    fn legendre_and_chebyshev_rules_are_exact(order in 2usize..24) {
        let lg = make_legendre_rule(order, PREC).unwrap();
        let ch = make_chebyshev_rule(order, PREC).unwrap();
        let dim = 2 * order;
        let pow = |t: &Real| {
            let mut acc = ComplexValue::with_val(PREC, (1, 0));
            (0..dim).map(|_| { let v = acc.clone(); acc *= t; v }).collect::<Vec<_>>()
        };
        let l = lg.apply(PREC, dim, pow);
        let t = ch.apply(PREC, dim, pow);
        // ∫ t^k dt = 2/(k+1) (k even); ∫ t^k /√(1−t²) dt = π (k−1)!!/k!! (k even).
        let mut cheb = pi(PREC);
        for k in 0..dim {
            let (le, ce) = if k % 2 == 1 {
                (c(0.0, 0.0), c(0.0, 0.0))
            } else {
                let v = ComplexValue::with_val(PREC, (Real::with_val(PREC, 2) / (k as u32 + 1), 0));
                let ce = ComplexValue::with_val(PREC, (&cheb, 0));
                cheb = cheb * (k as u32 + 1) / (k as u32 + 2);
                (v, ce)
            };
            prop_assert!(abs_f64(&ComplexValue::with_val(PREC, &l[k] - &le)) < 1e-30, "legendre k={k}");
            prop_assert!(abs_f64(&ComplexValue::with_val(PREC, &t[k] - &ce)) < 1e-30, "chebyshev k={k}");
        }
    }

    #[test]
    fn solve_linear_residual_on_dominant_systems(dim in 1usize..30, seed in proptest::collection::vec(-1.0f64..1.0, 900)) {
        let a: Vec<Vec<ComplexValue>> = (0..dim)
            .map(|i| (0..dim).map(|j| {
                let v = seed[(i * 30 + j) % 900];
                if i == j { c(dim as f64 + 1.0, v) } else { c(v, seed[(j * 30 + i) % 900] / 2.0) }
            }).collect())
            .collect();
        let b: Vec<ComplexValue> = (0..dim).map(|i| c(seed[i], 1.0)).collect();
        let sol = solve_linear(&a, &b, PREC).unwrap();
        prop_assert!(sol.condition < 1e6);
        prop_assert!(sol.residual < 1e-30, "{}", sol.residual);
    }

    #[test]
    fn poly_roots_reconstruct_coefficients(roots in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..14)) {
        let r: Vec<ComplexValue> = roots.iter().map(|&(x, y)| c(x, y)).collect();
        let p = Polynomial::from_roots(&r, PREC);
        let found = poly_roots(&p).unwrap();
        let q = Polynomial::from_roots(&found, PREC);
        let scale = p.norm_inf().to_f64();
        for (a, b) in p.coeffs().iter().zip(q.coeffs()) {
            prop_assert!(abs_f64(&ComplexValue::with_val(PREC, a - b)) / scale < 1e-25);
        }
    }

    #[test]
    fn w_delta_squares_to_branch_polynomial((x, y) in off_axis(), split in 0.1f64..0.8) {
        let contour = IntervalContour::from_f64(&[(-1.0, -split), (split / 2.0, 1.0), (1.5, 2.0)], PREC).unwrap();
        let z = c(x, y);
        let w = contour.w_delta_eval(&z).unwrap();
        let mut prod = c(1.0, 0.0);
        for e in contour.branch_points() {
            prod *= ComplexValue::with_val(PREC, &z - e);
        }
        prop_assert!(rel(&ComplexValue::with_val(PREC, w.square_ref()), &prod) < 1e-30);
        let x = Real::with_val(PREC, -1.0 + (1.0 - split) * 0.37);
        let t = contour.w_delta_trace(&x).unwrap();
        prop_assert!(abs_f64(&ComplexValue::with_val(PREC, &t.value_plus + &t.value_minus)) < 1e-30);
    }

    #[test]
    fn real_weight_gives_real_moments(a in -4.0f64..-2.5, b in 0.5f64..1.5) {
        let contour = IntervalContour::from_f64(&[(-1.0, -0.4), (0.1, 1.0)], PREC).unwrap();
        let p = Polynomial::new(vec![c(a, 0.0), c(b, 0.0)]);
        let w = Weight::new(WeightKind::Polynomial(p), &contour, Weight::DEFAULT_MARGIN).unwrap();
        let s = f_rho_coefficients(&contour, &w, 12, &QuadSettings::for_prec(PREC), PREC).unwrap();
        let scale = s.coefficients.iter().map(abs_f64).fold(0.0, f64::max);
        for f in &s.coefficients {
            prop_assert!(f.imag().to_f64().abs() / scale < 1e-30);
        }
    }

    #[test]
    fn pade_recovers_rational_series(poles in proptest::collection::vec((-0.9f64..0.9, -0.9f64..0.9, 0.2f64..1.0), 1..5), extra in 0usize..3) {
        let m = poles.len();
        let n = m + extra;
        let coefficients: Vec<ComplexValue> = (0..=2 * n + 2)
            .map(|k| {
                let mut acc = c(0.0, 0.0);
                if k > 0 {
                    for &(x, y, r) in &poles {
                        let p = c(x, y);
                        acc += rug::ops::Pow::pow(p, (k - 1) as i32) * r;
                    }
                }
                acc
            })
            .collect();
        let s = PowerSeries::new(coefficients);
        let pair = pade_solve(&s, n, PREC, 0).unwrap();
        let target = Polynomial::from_roots(&poles.iter().map(|&(x, y, _)| c(x, y)).collect::<Vec<_>>(), PREC);
        prop_assert_eq!(pair.degree(), m);
        prop_assert_eq!(pair.degenerate, extra > 0);
        for (a, b) in pair.q.coeffs().iter().zip(target.coeffs()) {
            prop_assert!(abs_f64(&ComplexValue::with_val(PREC, a - b)) < 1e-15);
        }
    }

    #[test]
    fn theta_quasi_periodicity(b in 0.3f64..3.0, re in -1.0f64..1.0, im in -0.5f64..0.5, j in -2i32..=2, m in -2i32..=2) {
        let bm = vec![vec![c(0.2, b)]];
        let u = c(re, im);
        let base = theta::theta_for_matrix(&bm, &[u.clone()], PREC).unwrap();
        let shift = ComplexValue::with_val(PREC, &u + j) + ComplexValue::with_val(PREC, &bm[0][0] * m);
        let moved = theta::theta_for_matrix(&bm, &[shift], PREC).unwrap();
        // θ(u + j + Bm) = exp(−πi m²B − 2πi m u) θ(u).
        let ipi = ComplexValue::with_val(PREC, (0, pi(PREC)));
        let expo = ComplexValue::with_val(PREC, &bm[0][0] * (m * m)) + ComplexValue::with_val(PREC, &u * (2 * m));
        let factor = (-(ipi * expo)).exp();
        prop_assert!(rel(&moved, &(factor * base)) < 1e-30);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, .. ProptestConfig::default() })]

    #[test]
    fn phi_product_and_abel_antisymmetry((x, y) in off_axis()) {
        let s = genus_one();
        let p = SurfacePoint::new(c(x, y), 0);
        let q = p.involution();
        let (a, b) = (s.phi_eval(&p).unwrap(), s.phi_eval(&q).unwrap());
        prop_assert!(abs_f64(&(ComplexValue::with_val(PREC, &a * &b) - 1u32)) < 1e-25);
        prop_assert!(abs_f64(&a) > 1.0);
        let sum: Vec<ComplexValue> = s.abel_map(&p).unwrap().iter().zip(s.abel_map(&q).unwrap()).map(|(u, v)| v + u).collect();
        prop_assert!(s.lattice_residual(&sum) < 1e-25);
    }

    #[test]
    fn jip_round_trip(u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let s = genus_one();
        let rhs = vec![c(u, 0.0) + ComplexValue::with_val(PREC, &s.period_matrix()[0][0] * v)];
        let d = s.jip_solve(&rhs).unwrap();
        prop_assert_eq!(d.points.len(), 1);
        prop_assert!(d.residual < 1e-25, "{}", d.residual);
    }

    #[test]
    fn szego_product_is_one((x, y) in off_axis()) {
        let sz = szego_one();
        let p = SurfacePoint::new(c(x, y), 0);
        let prod = sz.s_rho(&p).unwrap() * sz.s_rho(&p.involution()).unwrap();
        prop_assert!(abs_f64(&ComplexValue::with_val(PREC, prod - 1u32)) < 1e-20);
    }

    #[test]
    fn szego_jump_on_traces(t in 0.02f64..0.98, second in any::<bool>()) {
        let sz = szego_one();
        let (a, b) = if second { (0.2, 1.0) } else { (-1.0, -0.3) };
        let x = Real::with_val(PREC, a + (b - a) * t);
        prop_assert!(sz.jump_residual(&x).unwrap() < 1e-20);
    }
}
