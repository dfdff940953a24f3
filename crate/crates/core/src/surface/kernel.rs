//! Normalized third-kind differential `dΩ_{p,p*}` and the Cauchy-type
//! transform `Λ(p) = (1/4πi) ∮ λ dΩ_{p,p*}`.
//!
//! `dΩ_{p,p*} = K_p dζ − Σ_k A_k(p) dΩ_k` with the hyperelliptic kernel
//! `K_p = W(p) q(ζ) / (w(ζ) (ζ − z_p))`, where `q ≡ 1, W = w(p)` near the hull
//! and `q = (ζ − c)^g, W = w(p)/(z_p − c)^g` far from it (both have residues
//! `±1` at `p, p*` and differ by a holomorphic differential, removed by the
//! normalization). `A_k(p) = ∮_{α_k} K_p` over the realized gap cycles.
//! For a density `λ` on the `Δ`-cycles this gives
//! `Λ(p) = W(p) C_{λq}(z_p) + ½ Σ_k A_k(p) c_k` with
//! `c_k = −(1/2πi) ∮_Δ λ dΩ_k` and `C_φ(z) = (1/2πi) ∫_Δ φ/(w^+(t − z)) dt`.

use super::{effective_side, HyperellipticSurface, SurfacePoint};
use crate::contour::{Segment, Side};
use crate::error::{Error, Result};
use crate::numerics::{abs_f64, cx, czero, pi, two_pi_i, ComplexValue, Real};

/// Density on the `Δ`-cycles: `eval(j, t)` on interval `j`, analytic within
/// `margins[j]` of it.
pub struct DeltaDensity<'a> {
    pub eval: &'a dyn Fn(usize, &ComplexValue) -> ComplexValue,
    pub margins: Vec<f64>,
}

/// Defining properties of `dΩ_{p,p*}` verified by independent quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdKindReport {
    /// Small-circle residues at `p` and `p*` (expected `+1`, `−1`).
    pub residue_p: ComplexValue,
    pub residue_p_star: ComplexValue,
    /// `max_k |∮_{α_k} dΩ_{p,p*}|` from an independent rule.
    pub alpha_period_residual: f64,
    /// `max_k |∮_{β_k} dΩ_{p,p*} − 2πi (Ω_k(p) − Ω_k(p*))|`.
    pub reciprocity_residual: f64,
}

/// Kernel data at `p`: pole location and prefactor, or the limit at infinity.
enum KernelPoint {
    Finite { z: ComplexValue, side: Side, w: ComplexValue, q_power: usize },
    /// `W/(ζ − z_p) → kappa` as `p → ∞^(k)`.
    Infinity { kappa: i32 },
}

fn real_segment_distance(seg: &Segment, z: &ComplexValue) -> f64 {
    let (a, b) = (seg.p.to_f64(), seg.q.to_f64());
    let x = z.real().to_f64();
    let y = z.imag().to_f64();
    let dx = if x < a { a - x } else if x > b { x - b } else { 0.0 };
    dx.hypot(y)
}

impl HyperellipticSurface {
    fn kernel_point(&self, p: &SurfacePoint) -> Result<KernelPoint> {
        let prec = self.prec;
        let Some(z) = &p.z else {
            return Ok(KernelPoint::Infinity { kappa: -p.sign() });
        };
        if self.contour.branch_points().iter().any(|e| z.imag().is_zero() && z.real() == e) {
            return Err(Error::InvalidInput("third-kind kernel undefined at a branch point".into()));
        }
        let side = effective_side(z, self.resolve_side(p)?);
        let mut w = self.w_side(z, side);
        if p.sheet == 1 {
            w *= -1i32;
        }
        let g = self.genus();
        let far = self.is_far(z) && g > 0;
        if far {
            let zc = ComplexValue::with_val(prec, z - &self.center);
            w /= rug::ops::Pow::pow(zc, g as u32);
        }
        Ok(KernelPoint::Finite { z: z.clone(), side, w, q_power: if far { g } else { 0 } })
    }

    /// `∫_seg φ(t) q(t) κ_p(t) / w^+(t) dt` with `κ_p = W/(t − z_p)`, deforming
    /// away from `z_p` when it is close to the segment. `independent` forces
    /// adaptive panels everywhere (used by the self-checks).
    fn segment_kernel(
        &self,
        s: usize,
        kp: &KernelPoint,
        phi: &dyn Fn(&ComplexValue) -> ComplexValue,
        margin: f64,
        independent: bool,
    ) -> Result<ComplexValue> {
        let prec = self.prec;
        let seg = self.contour.segment(s);
        match kp {
            KernelPoint::Infinity { kappa } => {
                let g = self.genus() as u32;
                let v = self.contour.integrate_segment(
                    &seg,
                    |t| {
                        let tc = ComplexValue::with_val(prec, t - &self.center);
                        vec![phi(t) * rug::ops::Pow::pow(tc, g)]
                    },
                    1,
                    None,
                    independent,
                    &self.settings,
                    prec,
                )?;
                Ok(ComplexValue::with_val(prec, &v[0] * *kappa))
            }
            KernelPoint::Finite { z, side, w, q_power } => {
                let len = 2.0 * seg.radius().to_f64();
                let near = real_segment_distance(&seg, z) <= 0.5 * len;
                let integrand = |t: &ComplexValue| {
                    let mut v = phi(t);
                    if *q_power > 0 {
                        let tc = ComplexValue::with_val(prec, t - &self.center);
                        v *= rug::ops::Pow::pow(tc, *q_power as u32);
                    }
                    v /= ComplexValue::with_val(prec, t - z);
                    vec![v]
                };
                let v = if near {
                    let sign = if *side == Side::Plus { 1 } else { -1 };
                    let h = self.contour.bulge_for(&seg, sign, margin, prec);
                    self.contour.integrate_segment(&seg, integrand, 1, Some(&h), true, &self.settings, prec)?
                } else {
                    self.contour.integrate_segment(&seg, integrand, 1, None, independent, &self.settings, prec)?
                };
                Ok(ComplexValue::with_val(prec, &v[0] * w))
            }
        }
    }

    fn alpha_kernel_with(&self, kp: &KernelPoint, independent: bool) -> Result<Vec<ComplexValue>> {
        let prec = self.prec;
        let one = |_: &ComplexValue| cx(prec, 1.0, 0.0);
        let mut acc = czero(prec);
        let mut out = Vec::with_capacity(self.genus());
        for k in 0..self.genus() {
            acc += self.segment_kernel(2 * k + 1, kp, &one, f64::INFINITY, independent)?;
            out.push(ComplexValue::with_val(prec, &acc * 2u32));
        }
        Ok(out)
    }

    /// Normalization coefficients `A_k(p) = ∮_{α_k} K_p`.
    pub fn alpha_kernel(&self, p: &SurfacePoint) -> Result<Vec<ComplexValue>> {
        self.alpha_kernel_with(&self.kernel_point(p)?, false)
    }

    /// `c_k = −(1/2πi) ∮_Δ λ dΩ_k`, both banks of every interval.
    pub fn delta_constants(&self, density: &DeltaDensity) -> Result<Vec<ComplexValue>> {
        let prec = self.prec;
        let g = self.genus();
        let mut acc = vec![czero(prec); g];
        if g == 0 {
            return Ok(acc);
        }
        for j in 0..=g {
            let seg = self.contour.interval_segment(j);
            let v = self.contour.integrate_segment(
                &seg,
                |t| {
                    let lam = (density.eval)(j, t);
                    self.holomorphic.iter().map(|l| l.eval(t) * &lam).collect()
                },
                g,
                None,
                false,
                &self.settings,
                prec,
            )?;
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
        }
        // −(1/2πi)·2∫ = −(1/πi)∫
        let pi_i = ComplexValue::with_val(prec, (0, pi(prec)));
        Ok(acc.into_iter().map(|a| ComplexValue::with_val(prec, -(a / &pi_i))).collect())
    }

    /// `Λ(p)` for a density on the `Δ`-cycles, given its constants `c = delta_constants(λ)`.
    pub fn cauchy_transform_delta(
        &self,
        density: &DeltaDensity,
        c: &[ComplexValue],
        p: &SurfacePoint,
    ) -> Result<ComplexValue> {
        let prec = self.prec;
        let kp = self.kernel_point(p)?;
        if let KernelPoint::Finite { z, .. } = &kp {
            if self.contour.distance(z) == 0.0 && p.side.is_none() {
                return Err(Error::TooCloseToChain("point on Δ needs a trace side".into()));
            }
        }
        let mut total = czero(prec);
        for j in 0..=self.genus() {
            let phi = |t: &ComplexValue| (density.eval)(j, t);
            let margin = density.margins.get(j).copied().unwrap_or(f64::INFINITY);
            total += self.segment_kernel(2 * j, &kp, &phi, margin, false)?;
        }
        total /= two_pi_i(prec);
        let a = self.alpha_kernel_with(&kp, false)?;
        for (ak, ck) in a.iter().zip(c) {
            total += ComplexValue::with_val(prec, ak * ck) / 2u32;
        }
        Ok(total)
    }

    /// `∮_{β_k} dΩ_{p,p*}` for every `k`, by quadrature over the loop around `I_{k+2}`.
    pub fn third_kind_beta_periods(&self, p: &SurfacePoint) -> Result<Vec<ComplexValue>> {
        let prec = self.prec;
        let kp = self.kernel_point(p)?;
        let a = self.alpha_kernel_with(&kp, false)?;
        let one = |_: &ComplexValue| cx(prec, 1.0, 0.0);
        (0..self.genus())
            .map(|k| {
                let mut v = self.segment_kernel(2 * k + 2, &kp, &one, f64::INFINITY, false)?;
                v *= 2 * self.beta_orientation[k] as i32;
                for (m, am) in a.iter().enumerate() {
                    v -= ComplexValue::with_val(prec, am * &self.b_matrix[k][m]);
                }
                Ok(v)
            })
            .collect()
    }

    /// Residues, α-periods and bilinear reciprocity of `dΩ_{p,p*}` at a finite `p`.
    pub fn third_kind_report(&self, p: &SurfacePoint) -> Result<ThirdKindReport> {
        let prec = self.prec;
        let Some(z) = &p.z else {
            return Err(Error::InvalidInput("report requires a finite point".into()));
        };
        let d = self
            .contour
            .branch_points()
            .iter()
            .map(|e| abs_f64(&ComplexValue::with_val(prec, z - e)))
            .fold(self.contour.distance(z), f64::min);
        if d <= 0.0 {
            return Err(Error::TooCloseToChain("residue circle needs a point off Δ".into()));
        }
        let residue = self.circle_residue(z, 0.5 * d, 1)?;
        let residue_star = self.circle_residue(z, 0.5 * d, -1)?;
        let kp = self.kernel_point(p)?;
        let a = self.alpha_kernel_with(&kp, false)?;
        let a_ind = self.alpha_kernel_with(&kp, true)?;
        let alpha_res = a
            .iter()
            .zip(&a_ind)
            .map(|(x, y)| abs_f64(&ComplexValue::with_val(prec, x - y)))
            .fold(0.0, f64::max);
        let betas = self.third_kind_beta_periods(p)?;
        let om = self.abel_map(p)?;
        let tpi = two_pi_i(prec);
        let recip = betas
            .iter()
            .zip(&om)
            .map(|(b, o)| {
                let target = ComplexValue::with_val(prec, o * &tpi) * 2u32;
                abs_f64(&ComplexValue::with_val(prec, b - &target))
            })
            .fold(0.0, f64::max);
        Ok(ThirdKindReport {
            residue_p: residue,
            residue_p_star: residue_star,
            alpha_period_residual: alpha_res,
            reciprocity_residual: recip,
        })
    }

    /// `(1/2πi) ∮_{|ζ−z|=r} w(p)/(w(ζ)(ζ − z)) dζ` with `ζ` on the sheet of `p`
    /// (`sheet_factor = 1`) or the opposite one (`−1`), by the trapezoid rule.
    fn circle_residue(&self, z: &ComplexValue, r: f64, sheet_factor: i32) -> Result<ComplexValue> {
        let prec = self.prec;
        let mut wz = self.contour.w0(z);
        wz *= sheet_factor;
        let eval = |n: usize| -> ComplexValue {
            let mut acc = czero(prec);
            for i in 0..n {
                let th = Real::with_val(prec, 2 * i) * pi(prec) / n as u32;
                let e = ComplexValue::with_val(prec, (th.cos_ref(), th.sin_ref())) * r;
                let zeta = ComplexValue::with_val(prec, z + &e);
                // dζ/(ζ − z) = i dθ
                acc += ComplexValue::with_val(prec, &wz / self.contour.w0(&zeta));
            }
            acc / n as u32
        };
        let mut n = 32;
        let mut prev = eval(n);
        loop {
            n *= 2;
            let next = eval(n);
            let diff = abs_f64(&ComplexValue::with_val(prec, &next - &prev));
            if diff <= self.settings.rel_tol() * 16.0 || n >= 1 << 14 {
                return Ok(next);
            }
            prev = next;
        }
    }

    /// `−2πi c·Ω(p)`: the transform of constants `−2πi c_k` on the `β_k`,
    /// reduced by reciprocity.
    pub fn beta_transform(&self, c: &[Real], p: &SurfacePoint) -> Result<ComplexValue> {
        let prec = self.prec;
        let om = self.abel_map(p)?;
        Ok(beta_from_abel(c, &om, prec))
    }

    /// Same transform by direct quadrature of `dΩ_{p,p*}` over the `β`-loops.
    pub fn beta_transform_direct(&self, c: &[Real], p: &SurfacePoint) -> Result<ComplexValue> {
        let prec = self.prec;
        let betas = self.third_kind_beta_periods(p)?;
        let mut acc = czero(prec);
        for (b, ck) in betas.iter().zip(c) {
            acc -= ComplexValue::with_val(prec, b * ck) / 2u32;
        }
        Ok(acc)
    }

    /// `S_c(p) = exp(−2πi c·Ω(p))`.
    pub fn beta_constant_function(&self, c: &[Real], p: &SurfacePoint) -> Result<ComplexValue> {
        Ok(self.beta_transform(c, p)?.exp())
    }
}

/// `−2πi Σ c_k Ω_k`.
pub(crate) fn beta_from_abel(c: &[Real], om: &[ComplexValue], prec: u32) -> ComplexValue {
    let mut acc = czero(prec);
    for (ck, o) in c.iter().zip(om) {
        acc += ComplexValue::with_val(prec, o * ck);
    }
    -(acc * two_pi_i(prec))
}
