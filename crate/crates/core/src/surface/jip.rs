//! Jacobi inversion: the degree-`g` divisor `D` with
//! `Ω(D) ≡ g Ω(∞^(1)) + rhs` modulo the lattice.
//!
//! Starting divisors come from a table of Abel images on both sheets (a polar
//! grid around the hull, the branch points and both infinities) ranked by
//! torus distance. Damped Newton then runs in local charts: `z` on a fixed
//! sheet, `t` with `z = e_i + t²` near a branch point, and `s = 1/(z − c)`
//! near infinity. The residual is reduced modulo the lattice at every step.

use super::{sqrt_side, HyperellipticSurface, SurfacePoint};
use crate::contour::{RealPosition, Side};
use crate::error::{Error, Result};
use crate::numerics::quadrature::legendre_doubling;
use crate::numerics::{abs_f64, cx, from_real, solve_linear, ComplexValue, Matrix, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solution of one inversion problem.
#[derive(Debug, Clone)]
pub struct Divisor {
    pub points: Vec<SurfacePoint>,
    /// `Ω(D) − g Ω(∞^(1)) − rhs = j + B m`.
    pub j_vec: Vec<i64>,
    pub m_vec: Vec<i64>,
    /// An involution-symmetric pair was found (and replaced by `∞^(0) + ∞^(1)`).
    pub non_unique: bool,
    /// `|Ω(D) − g Ω(∞^(1)) − rhs − j − B m|_∞` with `Ω` on the slit realization.
    pub residual: f64,
}

impl Divisor {
    /// Points on sheet `k`, at infinity included.
    pub fn on_sheet(&self, k: u8) -> impl Iterator<Item = &SurfacePoint> {
        self.points.iter().filter(move |p| p.sheet == k)
    }
}

/// Local coordinate of one divisor point.
#[derive(Debug, Clone)]
enum Chart {
    Regular { z: ComplexValue, sheet: u8 },
    Branch { i: usize, t: ComplexValue },
    Infinity { sheet: u8, s: ComplexValue },
}

/// Tabulated Abel image used to seed Newton.
#[derive(Debug, Clone)]
pub(crate) struct Sample {
    chart: Chart,
    /// Lattice coordinates `(x, y)` of `Ω` in `f64`.
    coords: Vec<f64>,
}

impl HyperellipticSurface {
    fn branch_radius(&self, i: usize) -> f64 {
        let bp = self.contour.branch_points();
        let e = bp[i].to_f64();
        bp.iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, x)| (x.to_f64() - e).abs())
            .fold(f64::INFINITY, f64::min)
            * 0.25
    }

    fn infinity_radius(&self) -> f64 {
        8.0 * self.radius.max(1e-300)
    }

    /// `U_i(z) = w(z) / s_i(z)`, analytic near `e_i`.
    fn branch_unit(&self, i: usize, z: &ComplexValue) -> ComplexValue {
        let prec = self.prec;
        let mut acc = cx(prec, 1.0, 0.0);
        for (k, e) in self.contour.branch_points().iter().enumerate() {
            if k != i {
                acc *= sqrt_side(&ComplexValue::with_val(prec, z - e), Side::Plus);
            }
        }
        if i % 2 == 0 && z.imag().is_sign_negative() && !z.imag().is_zero() {
            acc *= -1i32;
        }
        acc
    }

    fn chart_point(&self, c: &Chart) -> SurfacePoint {
        let prec = self.prec;
        match c {
            Chart::Regular { z, sheet } => self.point_with_trace(z.clone(), *sheet),
            Chart::Branch { i, t } => {
                let e = from_real(prec, &self.contour.branch_points()[*i]);
                let z = ComplexValue::with_val(prec, t.square_ref()) + &e;
                if t.is_zero() {
                    return SurfacePoint::trace(&self.contour.branch_points()[*i], 0, Side::Plus);
                }
                let s = self.w_side(&z, Side::Plus) / self.branch_unit(*i, &z);
                let d0 = abs_f64(&ComplexValue::with_val(prec, &s - t));
                let d1 = abs_f64(&ComplexValue::with_val(prec, &s + t));
                self.point_with_trace(z, if d0 <= d1 { 0 } else { 1 })
            }
            Chart::Infinity { sheet, s } => {
                if s.is_zero() {
                    SurfacePoint::infinity(*sheet)
                } else {
                    let z = ComplexValue::with_val(prec, s.recip_ref()) + &self.center;
                    SurfacePoint::new(z, *sheet)
                }
            }
        }
    }

    /// Point at `z`; real points on an interval become upper traces.
    fn point_with_trace(&self, z: ComplexValue, sheet: u8) -> SurfacePoint {
        if self.contour.on_contour(&z) {
            SurfacePoint::trace(&Real::with_val(self.prec, z.real()), sheet, Side::Plus)
        } else {
            SurfacePoint::new(z, sheet)
        }
    }

    /// `Ω` (mod lattice) and `dΩ/d(chart parameter)`.
    fn chart_eval(&self, c: &Chart) -> Result<(Vec<ComplexValue>, Vec<ComplexValue>)> {
        let prec = self.prec;
        let g = self.genus();
        match c {
            Chart::Regular { z, sheet } => {
                let p = self.point_with_trace(z.clone(), *sheet);
                let om = self.abel_map(&p)?;
                Ok((om, self.abel_derivative(z, *sheet, Side::Plus)))
            }
            Chart::Branch { i, t } => {
                let e = from_real(prec, &self.contour.branch_points()[*i]);
                let deriv = |tt: &ComplexValue| -> Vec<ComplexValue> {
                    let z = ComplexValue::with_val(prec, tt.square_ref()) + &e;
                    let mut u = self.branch_unit(*i, &z);
                    u /= 2u32;
                    self.holomorphic.iter().map(|l| l.eval(&z) / &u).collect()
                };
                let mut om: Vec<ComplexValue> = self.anchors_plus[*i][1..].to_vec();
                if !t.is_zero() {
                    let v = self.segment_integral(|s| {
                        let tt = ComplexValue::with_val(prec, t * s);
                        deriv(&tt).into_iter().map(|x| x * t).collect()
                    }, g)?;
                    for (a, b) in om.iter_mut().zip(v) {
                        *a += b;
                    }
                }
                Ok((om, deriv(t)))
            }
            Chart::Infinity { sheet, s } => {
                let sign = if *sheet == 0 { 1 } else { -1 };
                let deriv = |ss: &ComplexValue| -> Vec<ComplexValue> {
                    if abs_f64(ss) < 1e-300 || ss.is_zero() {
                        return self
                            .holomorphic
                            .iter()
                            .map(|l| {
                                let lead = l.coeff(g - 1).cloned().unwrap_or_else(|| cx(prec, 0.0, 0.0));
                                lead * (-sign)
                            })
                            .collect();
                    }
                    let z = ComplexValue::with_val(prec, ss.recip_ref()) + &self.center;
                    let mut w = self.contour.w0(&z);
                    w *= sign;
                    w *= ComplexValue::with_val(prec, ss.square_ref());
                    self.holomorphic.iter().map(|l| -(l.eval(&z) / &w)).collect()
                };
                let mut om: Vec<ComplexValue> =
                    self.abel_inf.iter().map(|v| ComplexValue::with_val(prec, v * sign)).collect();
                if !s.is_zero() {
                    let v = self.segment_integral(|v| {
                        let ss = ComplexValue::with_val(prec, s * v);
                        deriv(&ss).into_iter().map(|x| x * s).collect()
                    }, g)?;
                    for (a, b) in om.iter_mut().zip(v) {
                        *a += b;
                    }
                }
                Ok((om, deriv(s)))
            }
        }
    }

    /// `∫_0^1 f(v) dv` by Gauss–Legendre doubling.
    fn segment_integral<F>(&self, f: F, dim: usize) -> Result<Vec<ComplexValue>>
    where
        F: Fn(&Real) -> Vec<ComplexValue>,
    {
        let prec = self.prec;
        let (v, _) = legendre_doubling(
            |x| {
                let v = Real::with_val(prec, x + 1u32) / 2u32;
                f(&v).into_iter().map(|y| y / 2u32).collect()
            },
            dim,
            prec,
            16,
            self.settings.max_order,
            self.settings.rel_tol(),
        )?;
        Ok(v)
    }

    /// Re-expresses a chart in the most suitable coordinate.
    fn normalize_chart(&self, c: Chart) -> Chart {
        let prec = self.prec;
        let bp = self.contour.branch_points();
        match c {
            Chart::Regular { z, sheet } => {
                let zc = abs_f64(&ComplexValue::with_val(prec, &z - &self.center));
                if zc > self.infinity_radius() {
                    let s = ComplexValue::with_val(prec, &z - &self.center).recip();
                    return Chart::Infinity { sheet, s };
                }
                for (i, e) in bp.iter().enumerate() {
                    let d = ComplexValue::with_val(prec, &z - e);
                    if abs_f64(&d) < self.branch_radius(i) {
                        let mut s = self.w_side(&z, Side::Plus) / self.branch_unit(i, &z);
                        if sheet == 1 {
                            s *= -1i32;
                        }
                        return Chart::Branch { i, t: s };
                    }
                }
                Chart::Regular { z, sheet }
            }
            Chart::Branch { i, t } => {
                let t2 = abs_f64(&ComplexValue::with_val(prec, t.square_ref()));
                if t2 > 2.0 * self.branch_radius(i) {
                    let p = self.chart_point(&Chart::Branch { i, t });
                    Chart::Regular { z: p.z.unwrap(), sheet: p.sheet }
                } else {
                    Chart::Branch { i, t }
                }
            }
            Chart::Infinity { sheet, s } => {
                if abs_f64(&s) * self.infinity_radius() > 2.0 {
                    let z = ComplexValue::with_val(prec, s.recip_ref()) + &self.center;
                    Chart::Regular { z, sheet }
                } else {
                    Chart::Infinity { sheet, s }
                }
            }
        }
    }

    /// Applies a parameter step, flipping the sheet when a regular-chart step
    /// crosses an interval.
    fn step_chart(&self, c: &Chart, delta: &ComplexValue) -> Chart {
        let prec = self.prec;
        match c {
            Chart::Regular { z, sheet } => {
                let nz = ComplexValue::with_val(prec, z + delta);
                let (y0, y1) = (z.imag().to_f64(), nz.imag().to_f64());
                let mut sheet = *sheet;
                let crosses = (y0 >= 0.0 && y1 < 0.0) || (y0 < 0.0 && y1 >= 0.0 && !(y1 == 0.0));
                if crosses {
                    let (x0, x1) = (z.real().to_f64(), nz.real().to_f64());
                    let x = x0 + (x1 - x0) * (y0 / (y0 - y1));
                    if let RealPosition::Interval(_) = self.contour.locate_real(&Real::with_val(prec, x)) {
                        sheet = 1 - sheet;
                    }
                }
                self.normalize_chart(Chart::Regular { z: nz, sheet })
            }
            Chart::Branch { i, t } => {
                self.normalize_chart(Chart::Branch { i: *i, t: ComplexValue::with_val(prec, t + delta) })
            }
            Chart::Infinity { sheet, s } => {
                self.normalize_chart(Chart::Infinity { sheet: *sheet, s: ComplexValue::with_val(prec, s + delta) })
            }
        }
    }

    /// Largest allowed step in a chart parameter.
    fn step_cap(&self, c: &Chart) -> f64 {
        match c {
            Chart::Regular { .. } => 0.5 * self.radius.max(1e-300),
            Chart::Branch { i, .. } => self.branch_radius(*i).sqrt(),
            Chart::Infinity { .. } => 0.5 / self.infinity_radius(),
        }
    }

    fn samples(&self) -> Result<&Vec<Sample>> {
        if let Some(s) = self.samples.get() {
            return Ok(s);
        }
        let prec = self.prec;
        let mut charts = Vec::new();
        for sheet in 0..2u8 {
            for &f in &[0.35, 0.7, 1.1, 1.6, 2.5, 4.0] {
                for k in 0..12 {
                    let th = (k as f64 + 0.5) * std::f64::consts::TAU / 12.0;
                    let r = f * self.radius.max(1e-300);
                    let z = ComplexValue::with_val(prec, (Real::with_val(prec, &self.center) + r * th.cos(), r * th.sin()));
                    charts.push(self.normalize_chart(Chart::Regular { z, sheet }));
                }
            }
            charts.push(Chart::Infinity { sheet, s: cx(prec, 0.0, 0.0) });
        }
        for i in 0..self.contour.branch_points().len() {
            charts.push(Chart::Branch { i, t: cx(prec, 0.0, 0.0) });
        }
        let mut out = Vec::with_capacity(charts.len());
        for chart in charts {
            let (om, _) = self.chart_eval(&chart)?;
            let (x, y) = self.lattice_coordinates(&om);
            let coords = x.iter().chain(&y).map(|v| v.to_f64()).collect();
            out.push(Sample { chart, coords });
        }
        let _ = self.samples.set(out);
        Ok(self.samples.get().unwrap())
    }

    /// `g Ω(∞^(1)) + rhs`.
    fn jip_target(&self, rhs: &[ComplexValue]) -> Vec<ComplexValue> {
        let prec = self.prec;
        let g = self.genus() as i32;
        self.abel_inf
            .iter()
            .zip(rhs)
            .map(|(a, r)| ComplexValue::with_val(prec, a * (-g)) + r)
            .collect()
    }

    /// Solves the inversion problem `Ω(D) ≡ g Ω(∞^(1)) + rhs`.
    pub fn jip_solve(&self, rhs: &[ComplexValue]) -> Result<Divisor> {
        let g = self.genus();
        if rhs.len() != g {
            return Err(Error::InvalidInput(format!("rhs has length {}, genus is {g}", rhs.len())));
        }
        if g == 0 {
            return Ok(Divisor { points: Vec::new(), j_vec: Vec::new(), m_vec: Vec::new(), non_unique: false, residual: 0.0 });
        }
        let prec = self.prec;
        let target = self.jip_target(rhs);
        let tol = self.settings.rel_tol() * 4096.0 * (1.0 + self.b_scale());

        // Divisors supported at infinity.
        for k in 0..=g {
            let pts: Vec<SurfacePoint> = (0..g).map(|i| SurfacePoint::infinity(if i < k { 0 } else { 1 })).collect();
            let om = self.abel_divisor(&pts)?;
            let diff: Vec<ComplexValue> = om.iter().zip(&target).map(|(a, b)| ComplexValue::with_val(prec, a - b)).collect();
            if self.lattice_residual(&diff) < tol {
                return self.finish_divisor(pts, rhs);
            }
        }

        let (tx, ty) = self.lattice_coordinates(&target);
        let tcoords: Vec<f64> = tx.iter().chain(&ty).map(|v| v.to_f64()).collect();
        let samples = self.samples()?;
        let dist = |c: &[f64]| -> f64 {
            c.iter().zip(&tcoords).map(|(a, b)| {
                let d = a - b;
                (d - d.round()).abs()
            }).sum()
        };
        let starts: Vec<Vec<usize>> = if g == 1 {
            let mut idx: Vec<usize> = (0..samples.len()).collect();
            idx.sort_by(|a, b| dist(&samples[*a].coords).total_cmp(&dist(&samples[*b].coords)));
            idx.into_iter().take(8).map(|i| vec![i]).collect()
        } else {
            self.multi_starts(samples, &dist, g)
        };
        let mut last_err = None;
        for start in starts {
            let charts: Vec<Chart> = start.iter().map(|i| samples[*i].chart.clone()).collect();
            match self.newton(charts, &target, tol) {
                Ok(charts) => {
                    let pts: Vec<SurfacePoint> = charts.iter().map(|c| self.chart_point(c)).collect();
                    return self.finish_divisor(pts, rhs);
                }
                Err(e) => last_err = Some(e),
            }
        }
        let _ = last_err;
        Err(Error::ZeroCountMismatch { found: 0, expected: g })
    }

    fn b_scale(&self) -> f64 {
        self.b_matrix.iter().flatten().map(abs_f64).fold(0.0, f64::max)
    }

    /// Greedy coordinate descent over sample tuples for `g ≥ 2`.
    fn multi_starts(&self, samples: &[Sample], dist: &dyn Fn(&[f64]) -> f64, g: usize) -> Vec<Vec<usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1ac0);
        let n = samples.len();
        let sum_coords = |tuple: &[usize]| -> Vec<f64> {
            let mut acc = vec![0.0; 2 * g];
            for &i in tuple {
                for (a, b) in acc.iter_mut().zip(&samples[i].coords) {
                    *a += b;
                }
            }
            acc
        };
        let mut found: Vec<(f64, Vec<usize>)> = Vec::new();
        for _ in 0..60 {
            let mut tuple: Vec<usize> = (0..g).map(|_| rng.gen_range(0..n)).collect();
            let mut best = dist(&sum_coords(&tuple));
            for _ in 0..6 {
                let mut improved = false;
                for slot in 0..g {
                    for cand in 0..n {
                        let old = tuple[slot];
                        tuple[slot] = cand;
                        let d = dist(&sum_coords(&tuple));
                        if d < best - 1e-15 {
                            best = d;
                            improved = true;
                        } else {
                            tuple[slot] = old;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            let mut key = tuple.clone();
            key.sort_unstable();
            if !found.iter().any(|(_, t)| *t == key) {
                found.push((best, key));
            }
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));
        found.into_iter().take(10).map(|(_, t)| t).collect()
    }

    /// Damped Newton on `Σ Ω(p_i) − target` reduced modulo the lattice.
    fn newton(&self, mut charts: Vec<Chart>, target: &[ComplexValue], tol: f64) -> Result<Vec<Chart>> {
        let prec = self.prec;
        let g = self.genus();
        let residual = |charts: &[Chart]| -> Result<(Vec<ComplexValue>, Matrix)> {
            let mut sum: Vec<ComplexValue> = target.iter().map(|t| ComplexValue::with_val(prec, -t)).collect();
            let mut jac: Matrix = vec![Vec::with_capacity(g); g];
            for c in charts {
                let (om, d) = self.chart_eval(c)?;
                for (k, (s, o)) in sum.iter_mut().zip(om).enumerate() {
                    *s += o;
                    jac[k].push(d[k].clone());
                }
            }
            let (j, m, _) = self.nearest_lattice(&sum);
            let lv = self.lattice_vector(&j, &m);
            for (s, l) in sum.iter_mut().zip(lv) {
                *s -= l;
            }
            Ok((sum, jac))
        };
        let norm = |v: &[ComplexValue]| v.iter().map(abs_f64).fold(0.0, f64::max);
        let (mut r, mut jac) = residual(&charts)?;
        let mut rn = norm(&r);
        for _ in 0..80 {
            if rn < tol {
                return Ok(charts);
            }
            let rhs: Vec<ComplexValue> = r.iter().map(|x| ComplexValue::with_val(prec, -x)).collect();
            let sol = solve_linear(&jac, &rhs, prec)?;
            let mut lambda = 1.0f64;
            for (c, d) in charts.iter().zip(&sol.x) {
                let cap = self.step_cap(c);
                let dn = abs_f64(d);
                if dn * lambda > cap {
                    lambda = cap / dn;
                }
            }
            let mut accepted = false;
            for _ in 0..12 {
                let trial: Vec<Chart> = charts
                    .iter()
                    .zip(&sol.x)
                    .map(|(c, d)| self.step_chart(c, &(ComplexValue::with_val(prec, d * lambda))))
                    .collect();
                if let Ok((r2, j2)) = residual(&trial) {
                    let n2 = norm(&r2);
                    if n2 < rn {
                        charts = trial;
                        r = r2;
                        jac = j2;
                        rn = n2;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if rn < tol {
            Ok(charts)
        } else {
            Err(Error::NonConvergence(format!("Jacobi inversion residual {rn:e}")))
        }
    }

    /// Pair detection, lattice decomposition and residual on the slit realization.
    fn finish_divisor(&self, mut points: Vec<SurfacePoint>, rhs: &[ComplexValue]) -> Result<Divisor> {
        let prec = self.prec;
        let g = self.genus();
        let pair_tol = 1e3 * 2f64.powi(-(prec as i32) / 2) * (1.0 + self.radius);
        let mut non_unique = false;
        if g >= 2 {
            let mut i = 0;
            while i < points.len() {
                let mut matched = None;
                for j in i + 1..points.len() {
                    let (p, q) = (&points[i], &points[j]);
                    let symmetric = match (&p.z, &q.z) {
                        (None, None) => p.sheet != q.sheet,
                        (Some(a), Some(b)) => {
                            let d = abs_f64(&ComplexValue::with_val(prec, a - b));
                            let at_branch = self.contour.branch_points().iter().any(|e| {
                                abs_f64(&ComplexValue::with_val(prec, a - e)) < pair_tol
                            });
                            d < pair_tol && (p.sheet != q.sheet || at_branch)
                        }
                        _ => false,
                    };
                    if symmetric {
                        matched = Some(j);
                        break;
                    }
                }
                if let Some(j) = matched {
                    non_unique = true;
                    let both_inf = points[i].is_infinity() && points[j].is_infinity();
                    if !both_inf {
                        points[i] = SurfacePoint::infinity(0);
                        points[j] = SurfacePoint::infinity(1);
                    }
                }
                i += 1;
            }
        }
        let om = self.abel_divisor(&points)?;
        let target = self.jip_target(rhs);
        let diff: Vec<ComplexValue> = om.iter().zip(&target).map(|(a, b)| ComplexValue::with_val(prec, a - b)).collect();
        let (j_vec, m_vec, residual) = self.nearest_lattice(&diff);
        Ok(Divisor { points, j_vec, m_vec, non_unique, residual })
    }
}

/// Random finite point in the annulus `0.3..2.8` hull half-widths around the
/// centre, on a random sheet (test helper shared with the build checks).
pub fn random_point(s: &HyperellipticSurface, rng: &mut ChaCha8Rng) -> SurfacePoint {
    let prec = s.prec;
    let r = s.radius * (0.3 + 2.5 * rng.gen::<f64>());
    let th = std::f64::consts::TAU * rng.gen::<f64>();
    let z = ComplexValue::with_val(prec, (Real::with_val(prec, &s.center) + r * th.cos(), r * th.sin()));
    SurfacePoint::new(z, rng.gen_range(0..2u8))
}
