//! Experiment configuration: TOML schema, defaults, overrides and hashing.

use anyhow::{bail, Context, Result};
use padesurf_core::contour::{IntervalContour, QuadSettings, Weight, WeightKind};
use padesurf_core::numerics::{parse_real, Polynomial};
use padesurf_core::ComplexValue;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::ops::RangeInclusive;
use std::path::Path;

/// A number given either as a TOML float/integer or as a decimal string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn to_real(&self, prec: u32) -> Result<padesurf_core::Real> {
        match self {
            Number::Float(v) => Ok(padesurf_core::Real::with_val(prec, *v)),
            Number::Text(s) => parse_real(s, prec).with_context(|| format!("not a decimal number: {s:?}")),
        }
    }
}

/// Weight coefficient: real, or `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Real(Number),
    Complex([Number; 2]),
}

impl Coefficient {
    fn to_complex(&self, prec: u32) -> Result<ComplexValue> {
        Ok(match self {
            Coefficient::Real(x) => ComplexValue::with_val(prec, (x.to_real(prec)?, 0)),
            Coefficient::Complex([a, b]) => ComplexValue::with_val(prec, (a.to_real(prec)?, b.to_real(prec)?)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourConfig {
    /// `[a_j, b_j]` pairs, increasing and disjoint.
    pub intervals: Vec<[Number; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightFamily {
    Unit,
    Polynomial,
    Rational,
    ExpPolynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub kind: WeightFamily,
    /// Ascending coefficients of the polynomial, numerator or exponent.
    #[serde(default)]
    pub coefficients: Vec<Coefficient>,
    /// Ascending denominator coefficients (rational only).
    #[serde(default)]
    pub denominator: Vec<Coefficient>,
    /// `log ρ` branch shift per interval (defaults to zeros).
    #[serde(default)]
    pub branch_shifts: Option<Vec<i64>>,
    /// Minimum zero/pole distance from `Δ` relative to its diameter.
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    Weight::DEFAULT_MARGIN
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            kind: WeightFamily::Unit,
            coefficients: Vec::new(),
            denominator: Vec::new(),
            branch_shifts: None,
            margin: default_margin(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrecisionConfig {
    /// Working precision of the surface, predictor and verification.
    pub bits: u32,
    /// Padé solves run at `max(bits, pade_bits_per_order · n)`.
    pub pade_bits_per_order: u32,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        Self { bits: 256, pade_bits_per_order: padesurf_core::pade::DEFAULT_BITS_PER_ORDER }
    }
}

/// Quadrature controls; unset fields follow the working precision.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    pub start_order: Option<usize>,
    pub max_order: Option<usize>,
    pub tol_bits: Option<u32>,
}

impl QuadConfig {
    fn materialize(&mut self, prec: u32) {
        let d = QuadSettings::for_prec(prec);
        self.start_order.get_or_insert(d.start_order);
        self.max_order.get_or_insert(d.max_order);
        self.tol_bits.get_or_insert(d.tol_bits);
    }

    pub fn settings(&self, prec: u32) -> QuadSettings {
        let d = QuadSettings::for_prec(prec);
        QuadSettings {
            start_order: self.start_order.unwrap_or(d.start_order),
            max_order: self.max_order.unwrap_or(d.max_order),
            tol_bits: self.tol_bits.unwrap_or(d.tol_bits),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    /// Moments, Cauchy transforms of `ρ/w⁺` and orthogonality checks.
    pub moments: QuadConfig,
    /// Periods, Abel map, Green and Szegő integrals.
    pub surface: QuadConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndexConfig {
    /// Inclusive range `"A..B"`.
    pub n: String,
    /// `𝒩_ε` threshold.
    pub epsilon: f64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self { n: "5..30".into(), epsilon: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointsConfig {
    /// Radius of the fixed ring (default `2·max|e|`).
    pub ring_radius: Option<f64>,
    pub ring_count: usize,
    /// Random points inside the ring at distance `≥ min_distance` from `Δ`.
    pub random_count: usize,
    pub min_distance: f64,
    /// Exclusion radius around sheet-0 divisor projections.
    pub exclusion: f64,
    /// Points (taken from the front of the evaluation list) for `det N`.
    pub det_points: usize,
    pub jump_samples_per_interval: usize,
    /// Overrides the config-hash seed.
    pub seed: Option<u64>,
}

impl Default for PointsConfig {
    fn default() -> Self {
        Self {
            ring_radius: None,
            ring_count: 12,
            random_count: 8,
            min_distance: 0.2,
            exclusion: 0.1,
            det_points: 10,
            jump_samples_per_interval: 3,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksConfig {
    pub surface: bool,
    pub orthogonality: bool,
    /// Bound on `|r_k| / max|q_i|`.
    pub orthogonality_tol: f64,
    pub jip: bool,
    pub jip_tol: f64,
    pub jump: bool,
    pub jump_tol: f64,
    pub det: bool,
    pub det_tol: f64,
    /// Fitted SA1 slope must be negative.
    pub sa1_decay: bool,
    /// Pole table: match radius and bound on `|z|` of tracked divisor points.
    pub pole_radius: f64,
    pub pole_max_abs: f64,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            surface: true,
            orthogonality: true,
            orthogonality_tol: 1e-25,
            jip: true,
            jip_tol: 1e-8,
            jump: true,
            jump_tol: 1e-8,
            det: true,
            det_tol: 1e-8,
            sa1_decay: true,
            pole_radius: 1e-2,
            pole_max_abs: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub cache: bool,
    /// Defaults to `<dir>/cache`.
    pub cache_dir: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into(), cache: true, cache_dir: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub contour: ContourConfig,
    #[serde(default)]
    pub weight: WeightConfig,
    #[serde(default)]
    pub precision: PrecisionConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub index: IndexConfig,
    #[serde(default)]
    pub points: PointsConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Command-line overrides applied before materialization.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<String>,
    pub precision: Option<u32>,
    pub out: Option<String>,
    pub no_cache: bool,
}

/// Parses `"A..B"` (inclusive).
pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>> {
    let (a, b) = s.split_once("..").with_context(|| format!("index range {s:?} is not of the form A..B"))?;
    let a: usize = a.trim().parse().with_context(|| format!("bad range start in {s:?}"))?;
    let b: usize = b.trim().trim_start_matches('=').parse().with_context(|| format!("bad range end in {s:?}"))?;
    if a == 0 || a > b {
        bail!("index range {s:?} must satisfy 1 <= A <= B");
    }
    Ok(a..=b)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("config schema error")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    /// Applies overrides, fills every default and validates.
    pub fn materialize(mut self, o: &Overrides) -> Result<Self> {
        if let Some(n) = &o.n {
            self.index.n = n.clone();
        }
        if let Some(p) = o.precision {
            self.precision.bits = p;
        }
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
        if o.no_cache {
            self.output.cache = false;
        }
        let bits = self.precision.bits;
        if !(64..=8192).contains(&bits) {
            bail!("precision.bits must be in 64..=8192, got {bits}");
        }
        self.quadrature.moments.materialize(bits);
        self.quadrature.surface.materialize(bits);
        parse_range(&self.index.n)?;
        if !(self.index.epsilon > 0.0) {
            bail!("index.epsilon must be positive");
        }
        if self.contour.intervals.is_empty() {
            bail!("contour.intervals must not be empty");
        }
        let n_int = self.contour.intervals.len();
        let shifts = self.weight.branch_shifts.get_or_insert_with(|| vec![0; n_int]);
        if shifts.len() != n_int {
            bail!("weight.branch_shifts needs {n_int} entries");
        }
        match self.weight.kind {
            WeightFamily::Unit if !self.weight.coefficients.is_empty() || !self.weight.denominator.is_empty() => {
                bail!("weight.kind = \"unit\" takes no coefficients")
            }
            WeightFamily::Polynomial | WeightFamily::ExpPolynomial if self.weight.coefficients.is_empty() => {
                bail!("weight.coefficients must not be empty")
            }
            WeightFamily::Polynomial | WeightFamily::ExpPolynomial if !self.weight.denominator.is_empty() => {
                bail!("weight.denominator is only valid for kind = \"rational\"")
            }
            WeightFamily::Rational if self.weight.coefficients.is_empty() || self.weight.denominator.is_empty() => {
                bail!("rational weights need coefficients and denominator")
            }
            _ => {}
        }
        if self.output.cache_dir.is_none() {
            self.output.cache_dir = Some(format!("{}/cache", self.output.dir));
        }
        // Validate the contour numerically once.
        self.contour(bits)?;
        Ok(self)
    }

    pub fn n_range(&self) -> RangeInclusive<usize> {
        parse_range(&self.index.n).expect("validated range")
    }

    pub fn contour(&self, prec: u32) -> Result<IntervalContour> {
        let iv = self
            .contour
            .intervals
            .iter()
            .map(|[a, b]| Ok((a.to_real(prec)?, b.to_real(prec)?)))
            .collect::<Result<Vec<_>>>()?;
        IntervalContour::new(iv, prec).context("invalid contour")
    }

    pub fn weight(&self, contour: &IntervalContour) -> Result<Weight> {
        let prec = contour.prec();
        let poly = |c: &[Coefficient]| -> Result<Polynomial> {
            Ok(Polynomial::new(c.iter().map(|x| x.to_complex(prec)).collect::<Result<_>>()?))
        };
        let kind = match self.weight.kind {
            WeightFamily::Unit => return Ok(Weight::unit(contour)),
            WeightFamily::Polynomial => WeightKind::Polynomial(poly(&self.weight.coefficients)?),
            WeightFamily::ExpPolynomial => WeightKind::ExpPolynomial(poly(&self.weight.coefficients)?),
            WeightFamily::Rational => WeightKind::Rational {
                num: poly(&self.weight.coefficients)?,
                den: poly(&self.weight.denominator)?,
            },
        };
        let n = contour.intervals().len();
        let shifts = self.weight.branch_shifts.clone().unwrap_or_else(|| vec![0; n]);
        Weight::per_component(vec![kind; n], shifts, contour, self.weight.margin).context("invalid weight")
    }

    /// TOML rendering of the materialized config (`config.echo`).
    pub fn echo(&self) -> Result<String> {
        toml::to_string_pretty(self).context("serializing config")
    }

    /// SHA-256 of the materialized config without the output section.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        let text = serde_json::to_string(&c).expect("config serializes");
        hex(&Sha256::digest(text.as_bytes()))
    }

    /// Seed for evaluation points: override or the leading 8 bytes of the hash.
    pub fn seed(&self) -> u64 {
        self.points.seed.unwrap_or_else(|| u64::from_str_radix(&self.hash()[..16], 16).expect("hex"))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
