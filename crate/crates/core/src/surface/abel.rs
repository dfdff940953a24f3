//! Abel map `Ω`, Green integral `G` and `Φ = exp G` on the slit realization.
//!
//! Sheet-0 primitives `F(z) = ∫_{e_0}^z R/w_Δ` for the numerators
//! `R ∈ {M, L_1, …, L_g}` are evaluated from the nearest branch point: the
//! anchor `F(e_i ± i0)` plus a straight segment under `t = e_i + v²(z − e_i)`,
//! which removes the endpoint square root. Far points continue along the ray
//! from the hull centre in the variable `u = |z_0 − c| / |t − c|`, with
//! `1/(t − c)` subtracted from the Green integrand so the limit at infinity
//! is finite.

use super::{effective_side, sqrt_side, HyperellipticSurface, SurfacePoint};
use crate::contour::Side;
use crate::error::{Error, Result};
use crate::numerics::quadrature::{adaptive_legendre, cached_rule, legendre_doubling, QuadratureKind};
use crate::numerics::{abs_f64, cx, from_real, ComplexValue, Polynomial, Real};

/// Points farther than this many hull half-widths use the ray continuation.
pub(crate) const FAR_FACTOR: f64 = 3.0;

/// `G(p)` and `Ω(p)` at one surface point; `green` is `None` at infinity.
#[derive(Debug, Clone)]
pub struct PointPrimitives {
    pub green: Option<ComplexValue>,
    pub abel: Vec<ComplexValue>,
}

impl HyperellipticSurface {
    /// `[M, L_1, …, L_g]`.
    pub(crate) fn numerators(&self) -> Vec<&Polynomial> {
        let mut v = vec![&self.green];
        v.extend(self.holomorphic.iter());
        v
    }

    /// Sheet-0 value of `w` at `z`, taking the limit from `side` on the real axis.
    pub(crate) fn w_side(&self, z: &ComplexValue, side: Side) -> ComplexValue {
        let prec = self.prec;
        let mut acc = cx(prec, 1.0, 0.0);
        for e in self.contour.branch_points() {
            acc *= sqrt_side(&ComplexValue::with_val(prec, z - e), side);
        }
        acc
    }

    pub(crate) fn is_far(&self, z: &ComplexValue) -> bool {
        let d = ComplexValue::with_val(self.prec, z - &self.center);
        abs_f64(&d) > FAR_FACTOR * self.radius.max(1e-300)
    }

    /// Anchor at `e_i` plus the straight-segment integral to `z`.
    fn near_primitives(&self, z: &ComplexValue, side: Side) -> Result<Vec<ComplexValue>> {
        let prec = self.prec;
        let side = effective_side(z, side);
        let bp = self.contour.branch_points();
        let (i, _) = bp
            .iter()
            .enumerate()
            .map(|(i, e)| (i, abs_f64(&ComplexValue::with_val(prec, z - e))))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let anchor = match side {
            Side::Plus => &self.anchors_plus[i],
            Side::Minus => &self.anchors_minus[i],
        };
        let e = from_real(prec, &bp[i]);
        let dz = ComplexValue::with_val(prec, z - &e);
        if dz.is_zero() {
            return Ok(anchor.clone());
        }
        let sq = sqrt_side(&dz, side);
        let nums = self.numerators();
        let dim = nums.len();
        let integrand = |v: &Real| -> Vec<ComplexValue> {
            let v2 = Real::with_val(prec, v.square_ref());
            let t = ComplexValue::with_val(prec, &dz * &v2) + &e;
            let mut den = cx(prec, 1.0, 0.0);
            for (k, ek) in bp.iter().enumerate() {
                if k != i {
                    den *= sqrt_side(&ComplexValue::with_val(prec, &t - ek), side);
                }
            }
            let factor = ComplexValue::with_val(prec, &sq * 2u32) / den;
            nums.iter().map(|p| p.eval(&t) * &factor).collect()
        };
        let zero = Real::new(prec);
        let one = Real::with_val(prec, 1);
        let coarse = cached_rule(QuadratureKind::Legendre, 32, prec)?;
        let mut scale = 0.0f64;
        for (s, w) in coarse.nodes.iter().zip(&coarse.weights) {
            let x = Real::with_val(prec, s + 1u32) / 2u32;
            let v = integrand(&x);
            scale += 0.5 * w.to_f64() * v.iter().map(abs_f64).fold(0.0, f64::max);
        }
        let abs_tol = self.settings.rel_tol() * scale.max(1e-300);
        let vals = adaptive_legendre(integrand, dim, &zero, &one, abs_tol, prec)?;
        Ok(anchor.iter().zip(vals).map(|(a, v)| v + a).collect())
    }

    /// `∫_{u_lo}^1 [R(t)/w(t) − δ_R /(t − c)] (z_0 − c)/u² du` along `t = c + (z_0 − c)/u`,
    /// with the subtraction applied to the Green numerator only.
    fn ray_integral(&self, z0: &ComplexValue, u_lo: &Real) -> Result<Vec<ComplexValue>> {
        let prec = self.prec;
        let zc0 = ComplexValue::with_val(prec, z0 - &self.center);
        let nums = self.numerators();
        let dim = nums.len();
        let half = Real::with_val(prec, 1 - u_lo) / 2u32;
        let mid = Real::with_val(prec, 1 + u_lo) / 2u32;
        let integrand = |s: &Real| -> Vec<ComplexValue> {
            let u = Real::with_val(prec, &half * s) + &mid;
            let t = ComplexValue::with_val(prec, &zc0 / &u) + &self.center;
            let u2 = Real::with_val(prec, u.square_ref());
            let factor = ComplexValue::with_val(prec, &zc0 / &u2) / self.contour.w0(&t);
            let mut out: Vec<ComplexValue> = nums.iter().map(|p| p.eval(&t) * &factor).collect();
            out[0] -= Real::with_val(prec, 1 / &u);
            for v in out.iter_mut() {
                *v *= &half;
            }
            out
        };
        let (v, _) = legendre_doubling(
            integrand,
            dim,
            prec,
            self.settings.start_order,
            self.settings.max_order,
            self.settings.rel_tol(),
        )?;
        Ok(v)
    }

    /// Start of the ray through `z`: the point at distance `2·radius` from `c`.
    fn ray_start(&self, dir: &ComplexValue) -> ComplexValue {
        let prec = self.prec;
        let d = ComplexValue::with_val(prec, dir.abs_ref());
        let mut z0 = ComplexValue::with_val(prec, dir / d.real());
        z0 *= 2.0 * self.radius.max(1e-300);
        z0 + &self.center
    }

    /// Sheet-0 `[G, Ω_1..Ω_g]` at finite `z`, limits from `side` on the real axis.
    pub(crate) fn sheet0_primitives(&self, z: &ComplexValue, side: Side) -> Result<Vec<ComplexValue>> {
        if !self.is_far(z) {
            return self.near_primitives(z, side);
        }
        let prec = self.prec;
        let dir = ComplexValue::with_val(prec, z - &self.center);
        let z0 = self.ray_start(&dir);
        let mut base = self.near_primitives(&z0, side)?;
        let r0 = 2.0 * self.radius.max(1e-300);
        let rz = Real::with_val(prec, ComplexValue::with_val(prec, dir.abs_ref()).real());
        let u_lo = Real::with_val(prec, r0 / &rz);
        let ray = self.ray_integral(&z0, &u_lo)?;
        for (b, r) in base.iter_mut().zip(ray) {
            *b += r;
        }
        // log(|z − c| / |z_0 − c|) for the subtracted 1/(t − c).
        base[0] += Real::with_val(prec, rz / r0).ln();
        Ok(base)
    }

    /// `(G∞, Ω(∞^(0)))` along the ray through `c + i`.
    pub(crate) fn infinity_limits(&self) -> Result<(ComplexValue, Vec<ComplexValue>)> {
        let prec = self.prec;
        let z0 = self.ray_start(&cx(prec, 0.0, 1.0));
        let mut base = self.near_primitives(&z0, Side::Plus)?;
        let ray = self.ray_integral(&z0, &Real::new(prec))?;
        for (b, r) in base.iter_mut().zip(ray) {
            *b += r;
        }
        let log0 = ComplexValue::with_val(prec, &z0 - &self.center).ln();
        let green_inf = ComplexValue::with_val(prec, &base[0] - &log0);
        Ok((green_inf, base[1..].to_vec()))
    }

    /// Rejects interval points without an explicit side.
    pub(crate) fn resolve_side(&self, p: &SurfacePoint) -> Result<Side> {
        if let (Some(z), None) = (&p.z, p.side) {
            if self.contour.on_contour(z) {
                return Err(Error::OnCut);
            }
        }
        Ok(p.side.unwrap_or(Side::Plus))
    }

    /// `G(p)` (finite points) and `Ω(p)`.
    pub fn primitives(&self, p: &SurfacePoint) -> Result<PointPrimitives> {
        let sign = p.sign();
        match &p.z {
            None => Ok(PointPrimitives {
                green: None,
                abel: self.abel_inf.iter().map(|v| ComplexValue::with_val(self.prec, v * sign)).collect(),
            }),
            Some(z) => {
                let side = self.resolve_side(p)?;
                let mut v = self.sheet0_primitives(z, side)?;
                if sign < 0 {
                    for x in v.iter_mut() {
                        *x *= -1i32;
                    }
                }
                let green = v.remove(0);
                Ok(PointPrimitives { green: Some(green), abel: v })
            }
        }
    }

    /// `Ω(p) = ∫_{e_0}^p dΩ`, unreduced.
    pub fn abel_map(&self, p: &SurfacePoint) -> Result<Vec<ComplexValue>> {
        if self.genus() == 0 {
            return Ok(Vec::new());
        }
        Ok(self.primitives(p)?.abel)
    }

    /// `Ω` of a divisor given as a list of points.
    pub fn abel_divisor(&self, points: &[SurfacePoint]) -> Result<Vec<ComplexValue>> {
        let mut acc = self.zero_vec();
        for p in points {
            for (a, v) in acc.iter_mut().zip(self.abel_map(p)?) {
                *a += v;
            }
        }
        Ok(acc)
    }

    /// `G(p) = (−1)^k ∫_{e_0}^z dG`; infinite at the points at infinity.
    pub fn green_integral(&self, p: &SurfacePoint) -> Result<ComplexValue> {
        self.primitives(p)?
            .green
            .ok_or_else(|| Error::InvalidInput("G has a logarithmic pole at infinity".into()))
    }

    /// `Φ(p) = exp G(p)`.
    pub fn phi_eval(&self, p: &SurfacePoint) -> Result<ComplexValue> {
        Ok(self.green_integral(p)?.exp())
    }

    /// Green function `g_Δ(z) = Re G(z^(0))`.
    pub fn green_function(&self, z: &ComplexValue) -> Result<Real> {
        let g = self.green_integral(&SurfacePoint::new(z.clone(), 0))?;
        Ok(Real::with_val(self.prec, g.real()))
    }

    /// `dΩ/dz` at a finite point: `(−1)^k L(z)/w_Δ(z)`.
    pub(crate) fn abel_derivative(&self, z: &ComplexValue, sheet: u8, side: Side) -> Vec<ComplexValue> {
        let mut w = self.w_side(z, side);
        if sheet == 1 {
            w *= -1i32;
        }
        self.holomorphic.iter().map(|l| l.eval(z) / &w).collect()
    }
}
