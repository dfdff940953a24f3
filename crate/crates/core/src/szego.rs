//! Szegő data and the asymptotic predictor `Ψ_n = Φ^ñ S_ρ S_{ñτ+m_ñ} Θ_ñ`.
//!
//! Every factor is evaluated from the same per-point primitives `G(p)`,
//! `Ω(p)` and `Λ_ρ(p)` ([`PointData`]), so one set of quadratures serves all
//! indices `n`. `γ_n` is the exact limit at `∞^(0)`; `γ_n^*` is extrapolated
//! to `∞^(1)` by Neville's scheme in `t = 1/|z − c|` along a geometric ray.

use crate::contour::{IntervalContour, RealPosition, Side, Weight};
use crate::error::{Error, Result};
use crate::numerics::{abs_f64, cx, czero, ComplexValue, Real};
use crate::surface::kernel::{beta_from_abel, DeltaDensity};
use crate::surface::{Divisor, HyperellipticSurface, SurfacePoint};
use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

/// Nodes of the `γ_n^*` extrapolation.
pub const GAMMA_NODES: usize = 17;

/// `S_ρ` data: the weight, its constants `c_ρ` and the surface.
pub struct SzegoData {
    surface: Arc<HyperellipticSurface>,
    weight: Weight,
    margins: Vec<f64>,
    c_rho: Vec<ComplexValue>,
    inf0: OnceLock<PointData>,
    inf1_nodes: OnceLock<Vec<(Real, PointData)>>,
}

/// Primitives of one surface point shared by every `Ψ_n`.
#[derive(Debug, Clone)]
pub struct PointData {
    pub point: SurfacePoint,
    /// `G(p)`; `None` at the points at infinity.
    pub green: Option<ComplexValue>,
    pub abel: Vec<ComplexValue>,
    /// `Λ_ρ(p) = log S_ρ(p)`.
    pub log_s: ComplexValue,
}

impl PointData {
    /// Data at `p*` (every primitive is odd under the involution).
    pub fn involution(&self) -> Self {
        let neg = |v: &ComplexValue| -v.clone();
        PointData {
            point: self.point.involution(),
            green: self.green.as_ref().map(neg),
            abel: self.abel.iter().map(neg).collect(),
            log_s: neg(&self.log_s),
        }
    }
}

/// `S_ρ` for `ρ` on the surface's contour.
pub fn szego_build(surface: Arc<HyperellipticSurface>, weight: &Weight) -> Result<SzegoData> {
    let n_int = surface.contour().intervals().len();
    if weight.components().len() != n_int {
        return Err(Error::InvalidInput(format!(
            "weight has {} components for {} intervals",
            weight.components().len(),
            n_int
        )));
    }
    let margins = IntervalContour::margins(weight);
    let c_rho = if weight.is_identity() {
        vec![czero(surface.prec()); surface.genus()]
    } else {
        let lam = |j: usize, t: &ComplexValue| weight.lambda(j, t);
        let density = DeltaDensity { eval: &lam, margins: margins.clone() };
        surface.delta_constants(&density)?
    };
    Ok(SzegoData {
        surface,
        weight: weight.clone(),
        margins,
        c_rho,
        inf0: OnceLock::new(),
        inf1_nodes: OnceLock::new(),
    })
}

impl SzegoData {
    pub fn surface(&self) -> &HyperellipticSurface {
        &self.surface
    }

    pub fn surface_arc(&self) -> Arc<HyperellipticSurface> {
        self.surface.clone()
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    /// `c_ρ = −(1/2πi) ∮_Δ λ_ρ dΩ`.
    pub fn c_rho(&self) -> &[ComplexValue] {
        &self.c_rho
    }

    /// Branch shifts of `log ρ` per interval (the log-branch record).
    pub fn branch_shifts(&self) -> Vec<i64> {
        self.weight.components().iter().map(|c| c.branch_shift).collect()
    }

    /// `Λ_ρ(p)`.
    pub fn log_s(&self, p: &SurfacePoint) -> Result<ComplexValue> {
        let s = &self.surface;
        if self.weight.is_identity() {
            return Ok(czero(s.prec()));
        }
        let lam = |j: usize, t: &ComplexValue| self.weight.lambda(j, t);
        let density = DeltaDensity { eval: &lam, margins: self.margins.clone() };
        s.cauchy_transform_delta(&density, &self.c_rho, p)
    }

    /// `S_ρ(p) = exp Λ_ρ(p)`.
    pub fn s_rho(&self, p: &SurfacePoint) -> Result<ComplexValue> {
        Ok(self.log_s(p)?.exp())
    }

    /// `|ρ S_ρ(x^(0)+) − S_ρ(x^(1)−)| / |S_ρ(x^(1)−)|` at an interior point `x` of `Δ`.
    pub fn jump_residual(&self, x: &Real) -> Result<f64> {
        let prec = self.surface.prec();
        let j = match self.surface.contour().locate_real(x) {
            RealPosition::Interval(j) => j,
            _ => return Err(Error::InvalidInput("jump check needs an interior point of Δ".into())),
        };
        let plus = self.s_rho(&SurfacePoint::trace(x, 0, Side::Plus))?;
        let other = self.s_rho(&SurfacePoint::trace(x, 1, Side::Minus))?;
        let rho = self.weight.eval(j, &ComplexValue::with_val(prec, (x, 0)));
        Ok(abs_f64(&(plus * rho - &other)) / abs_f64(&other))
    }

    /// Right-hand side `c_ρ + n(ω + Bτ)` of the inversion problem.
    pub fn jip_rhs(&self, n: i64) -> Vec<ComplexValue> {
        let s = &self.surface;
        let prec = s.prec();
        let (om, ta) = s.green_periods();
        let b = s.period_matrix();
        (0..s.genus())
            .map(|i| {
                let mut v = ComplexValue::with_val(prec, (&om[i], 0));
                for (k, t) in ta.iter().enumerate() {
                    v += ComplexValue::with_val(prec, &b[i][k] * t);
                }
                v *= n;
                v + &self.c_rho[i]
            })
            .collect()
    }

    /// Primitives at `p`.
    pub fn point_data(&self, p: &SurfacePoint) -> Result<PointData> {
        let prims = self.surface.primitives(p)?;
        Ok(PointData { point: p.clone(), green: prims.green, abel: prims.abel, log_s: self.log_s(p)? })
    }

    /// Sheet-0 data at `z` and its involution image.
    pub fn point_pair(&self, z: &ComplexValue) -> Result<(PointData, PointData)> {
        let d = self.point_data(&SurfacePoint::new(z.clone(), 0))?;
        let s = d.involution();
        Ok((d, s))
    }

    fn infinity0(&self) -> Result<&PointData> {
        if let Some(d) = self.inf0.get() {
            return Ok(d);
        }
        let d = self.point_data(&SurfacePoint::infinity(0))?;
        Ok(self.inf0.get_or_init(|| d))
    }

    /// Sheet-1 points `c + i/t_k`, `t_k = t_0 2^{-k}`, with `t_0 = 1/(4·radius)`.
    fn infinity1_nodes(&self) -> Result<&[(Real, PointData)]> {
        if let Some(v) = self.inf1_nodes.get() {
            return Ok(v);
        }
        let s = &self.surface;
        let prec = s.prec();
        let radius = {
            let bp = s.contour().branch_points();
            Real::with_val(prec, bp.last().unwrap() - &bp[0]).to_f64() / 2.0
        };
        let t0 = Real::with_val(prec, 1) / (4.0 * radius.max(1e-3));
        let mut out = Vec::with_capacity(GAMMA_NODES);
        for k in 0..GAMMA_NODES {
            let t = Real::with_val(prec, &t0 >> k as u32);
            let r = Real::with_val(prec, 1 / &t);
            let z = ComplexValue::with_val(prec, (s.hull_center(), &r));
            out.push((t, self.point_data(&SurfacePoint::new(z, 1))?));
        }
        Ok(self.inf1_nodes.get_or_init(|| out))
    }
}

/// Inversion-problem solutions `𝒟_n` cached by index.
#[derive(Debug, Default, Clone)]
pub struct DivisorTable {
    map: BTreeMap<i64, Divisor>,
}

impl DivisorTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// `𝒟_n` for the rhs `c_ρ + n(ω + Bτ)`.
    pub fn divisor(&mut self, sz: &SzegoData, n: i64) -> Result<&Divisor> {
        if !self.map.contains_key(&n) {
            let d = sz.surface.jip_solve(&sz.jip_rhs(n))?;
            self.map.insert(n, d);
        }
        Ok(&self.map[&n])
    }

    /// Greatest `ñ ≤ n` with a unique solution, scanning at most `g + 1` steps.
    pub fn tilde(&mut self, sz: &SzegoData, n: i64) -> Result<i64> {
        let g = sz.surface.genus() as i64;
        for k in 0..=g + 1 {
            if !self.divisor(sz, n - k)?.non_unique {
                return Ok(n - k);
            }
        }
        Err(Error::NonConvergence(format!("no uniquely solvable index within {} steps below {n}", g + 1)))
    }
}

/// Classification of an index.
#[derive(Debug, Clone)]
pub struct IndexData {
    pub n: usize,
    pub tilde_n: i64,
    pub divisor: Divisor,
    pub divisor_prev: Divisor,
    pub j_vec: Vec<i64>,
    pub m_vec: Vec<i64>,
    /// Real coordinates of `Ω(𝒟_n) − Ω(𝒟_*) = x + B y`.
    pub x_vec: Vec<f64>,
    pub y_vec: Vec<f64>,
    pub in_n_star: bool,
    pub in_n_epsilon: bool,
    pub epsilon: f64,
}

/// Solves the inversion problems for `n` and `n − 1` and classifies `n`.
pub fn classify_index(sz: &SzegoData, table: &mut DivisorTable, n: usize, epsilon: f64) -> Result<IndexData> {
    let s = &sz.surface;
    let prec = s.prec();
    let ni = n as i64;
    let divisor = table.divisor(sz, ni)?.clone();
    let divisor_prev = table.divisor(sz, ni - 1)?.clone();
    let tilde_n = table.tilde(sz, ni)?;
    let bound = 1.0 / epsilon;
    let within = |p: &SurfacePoint| p.z.as_ref().is_some_and(|z| abs_f64(z) <= bound);
    let in_n_epsilon = divisor.on_sheet(0).all(within) && divisor_prev.on_sheet(1).all(within);
    // Ω(𝒟_n) − Ω(𝒟_*) with 𝒟_* = g∞^(1).
    let mut diff = s.abel_divisor(&divisor.points)?;
    for (d, a) in diff.iter_mut().zip(s.abel_infinity()) {
        *d += ComplexValue::with_val(prec, a * s.genus() as u32);
    }
    let (x, y) = s.lattice_coordinates(&diff);
    Ok(IndexData {
        n,
        tilde_n,
        j_vec: divisor.j_vec.clone(),
        m_vec: divisor.m_vec.clone(),
        in_n_star: !divisor.non_unique,
        divisor,
        divisor_prev,
        x_vec: x.iter().map(|v| v.to_f64()).collect(),
        y_vec: y.iter().map(|v| v.to_f64()).collect(),
        in_n_epsilon,
        epsilon,
    })
}

/// `Ψ_n` with its index data frozen: `ñ`, `Ω(𝒟_ñ)` and `ñτ + m_ñ`.
#[derive(Debug, Clone)]
pub struct PsiFunction {
    pub n: i64,
    pub tilde_n: i64,
    pub divisor: Divisor,
    abel_divisor: Vec<ComplexValue>,
    beta_consts: Vec<Real>,
}

impl PsiFunction {
    pub fn new(sz: &SzegoData, table: &mut DivisorTable, n: i64) -> Result<Self> {
        let s = &sz.surface;
        let prec = s.prec();
        let tilde_n = table.tilde(sz, n)?;
        let divisor = table.divisor(sz, tilde_n)?.clone();
        let abel_divisor = s.abel_divisor(&divisor.points)?;
        let (_, tau) = s.green_periods();
        let beta_consts = tau
            .iter()
            .zip(&divisor.m_vec)
            .map(|(t, m)| Real::with_val(prec, t * tilde_n) + *m)
            .collect();
        Ok(Self { n, tilde_n, divisor, abel_divisor, beta_consts })
    }

    /// `Θ_ñ(p)`; errors when `p` sits on a zero of the denominator.
    fn theta_quotient(&self, sz: &SzegoData, d: &PointData) -> Result<ComplexValue> {
        let s = &sz.surface;
        let prec = s.prec();
        if s.genus() == 0 {
            return Ok(cx(prec, 1.0, 0.0));
        }
        let g = s.genus() as u32;
        let k = s.riemann_constants();
        let mut num_arg = Vec::with_capacity(k.len());
        let mut den_arg = Vec::with_capacity(k.len());
        for i in 0..k.len() {
            let base = ComplexValue::with_val(prec, &d.abel[i] - &k[i]);
            num_arg.push(ComplexValue::with_val(prec, &base - &self.abel_divisor[i]));
            // Ω(𝒟_*) = g Ω(∞^(1)) = −g Ω(∞^(0))
            den_arg.push(base + ComplexValue::with_val(prec, &s.abel_infinity()[i] * g));
        }
        let (num, _) = s.theta_with_mass(&num_arg);
        let (den, mass) = s.theta_with_mass(&den_arg);
        if abs_f64(&den) <= mass * f64::powi(2.0, -(prec as i32) / 2) {
            return Err(Error::DivisorOnEvaluationPoint(format!("{:?}", d.point)));
        }
        Ok(num / den)
    }

    /// `Ψ_n(p)` at a finite point.
    pub fn eval(&self, sz: &SzegoData, d: &PointData) -> Result<ComplexValue> {
        let prec = sz.surface.prec();
        let green = d
            .green
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("Ψ_n is evaluated at finite points only".into()))?;
        let mut log = ComplexValue::with_val(prec, green * self.tilde_n);
        log += &d.log_s;
        log += beta_from_abel(&self.beta_consts, &d.abel, prec);
        Ok(log.exp() * self.theta_quotient(sz, d)?)
    }

    /// `lim Ψ_n(z) z^{-n}` as `z → ∞^(0)`; requires `ñ = n`.
    fn limit_infinity0(&self, sz: &SzegoData) -> Result<ComplexValue> {
        let s = &sz.surface;
        let prec = s.prec();
        if self.tilde_n != self.n {
            return Err(Error::GammaUnstable(format!("index {} is not uniquely solvable", self.n)));
        }
        let d = sz.infinity0()?;
        let mut log = ComplexValue::with_val(prec, s.green_infinity() * self.n);
        log += &d.log_s;
        log += beta_from_abel(&self.beta_consts, &d.abel, prec);
        Ok(log.exp() * self.theta_quotient(sz, d)?)
    }

    /// `lim Ψ_n(z) z^{n-g}` as `z → ∞^(1)` with its extrapolation error estimate.
    fn limit_infinity1(&self, sz: &SzegoData) -> Result<(ComplexValue, f64)> {
        let s = &sz.surface;
        let prec = s.prec();
        let nodes = sz.infinity1_nodes()?;
        let power = (self.n - s.genus() as i64) as i32;
        let mut ts = Vec::with_capacity(nodes.len());
        let mut fs = Vec::with_capacity(nodes.len());
        for (t, d) in nodes {
            let z = d.point.z.as_ref().expect("finite node");
            let zp = rug::ops::Pow::pow(z.clone(), power);
            fs.push(self.eval(sz, d)? * zp);
            ts.push(t.clone());
        }
        let full = neville_zero(&ts, &fs, prec);
        let short = neville_zero(&ts[1..], &fs[1..], prec);
        let err = abs_f64(&ComplexValue::with_val(prec, &full - &short)) / abs_f64(&full).max(1e-300);
        Ok((full, err))
    }
}

/// Value at `0` of the interpolating polynomial through `(t_k, f_k)`.
fn neville_zero(t: &[Real], f: &[ComplexValue], prec: u32) -> ComplexValue {
    let mut p = f.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            let num = ComplexValue::with_val(prec, &p[i] * &t[i + m]) - ComplexValue::with_val(prec, &p[i + 1] * &t[i]);
            p[i] = num / Real::with_val(prec, &t[i + m] - &t[i]);
        }
    }
    p.swap_remove(0)
}

/// `Ψ_n`, `Ψ_{n−1}` and the normalizing constants of an index in `𝒩_ε`.
#[derive(Debug, Clone)]
pub struct PredictorBundle {
    pub n: usize,
    pub psi: PsiFunction,
    pub psi_prev: PsiFunction,
    /// `γ_n`, `γ_n^*` (present when `n ∈ 𝒩_ε`).
    pub gamma: Option<ComplexValue>,
    pub gamma_star: Option<ComplexValue>,
    /// Relative disagreement of the two last extrapolants for `γ_n^*`.
    pub gamma_star_error: f64,
}

/// Tolerance for the `γ_n^*` extrapolation stability check.
pub fn gamma_tolerance(prec: u32) -> f64 {
    10f64.powf(-(prec as f64) / 8.0)
}

/// Builds `Ψ_n`, `Ψ_{n−1}` and, for `n ∈ 𝒩_ε`, `γ_n` and `γ_n^*`.
pub fn predictor_build(sz: &SzegoData, table: &mut DivisorTable, index: &IndexData) -> Result<PredictorBundle> {
    let prec = sz.surface.prec();
    let n = index.n as i64;
    let psi = PsiFunction::new(sz, table, n)?;
    let psi_prev = PsiFunction::new(sz, table, n - 1)?;
    let (mut gamma, mut gamma_star, mut err) = (None, None, 0.0);
    if index.in_n_epsilon {
        let a = psi.limit_infinity0(sz)?;
        let (b, e) = psi_prev.limit_infinity1(sz)?;
        if e > gamma_tolerance(prec) {
            return Err(Error::GammaUnstable(format!("γ*_{n}: extrapolants differ by {e:e}")));
        }
        gamma = Some(cx(prec, 1.0, 0.0) / a);
        gamma_star = Some(cx(prec, 1.0, 0.0) / b);
        err = e;
    }
    Ok(PredictorBundle { n: index.n, psi, psi_prev, gamma, gamma_star, gamma_star_error: err })
}

impl PredictorBundle {
    /// `Ψ_n(z)` from sheet-0 data at `z`.
    pub fn psi_at(&self, sz: &SzegoData, d0: &PointData) -> Result<ComplexValue> {
        self.psi.eval(sz, d0)
    }

    /// `Ψ_n^*(z)` from sheet-1 data at `z`.
    pub fn psi_star_at(&self, sz: &SzegoData, d1: &PointData) -> Result<ComplexValue> {
        self.psi.eval(sz, d1)
    }

    pub fn psi_prev_at(&self, sz: &SzegoData, d: &PointData) -> Result<ComplexValue> {
        self.psi_prev.eval(sz, d)
    }
}

/// `max |Ψ_n^*|` over sheet-1 samples.
pub fn psi_decay_probe(bundle: &PredictorBundle, sz: &SzegoData, samples: &[PointData]) -> Result<f64> {
    let mut m = 0.0f64;
    for d in samples {
        m = m.max(abs_f64(&bundle.psi.eval(sz, d)?));
    }
    Ok(m)
}

#[cfg(test)]
mod tests;
