//! Pipeline stages (surface → moments → Padé → predictor → verify) with the
//! surface cache and the invariant suites that decide the exit code.

use crate::config::{hex, ExperimentConfig};
use crate::output::{cplx, fmt_f64, real, CsvOut};
use anyhow::{Context, Result};
use padesurf_core::contour::{f_rho_coefficients, f_rho_eval, IntervalContour, PowerSeries, QuadSettings};
use padesurf_core::numerics::{abs_f64, cx, max_abs, real_to_string};
use padesurf_core::pade::{denominator_zeros, orthogonality_residuals, pade_solve, PadePair};
use padesurf_core::surface::{build_surface, HyperellipticSurface, SurfacePoint, SurfaceSnapshot};
use padesurf_core::szego::{classify_index, predictor_build, szego_build, DivisorTable, IndexData, PredictorBundle, SzegoData};
use padesurf_core::verify::{
    check_exclusion, compare_sa1, det_n_check, eval_points, fit_decay, interior_samples, jump_residuals,
    pole_match, ring_points, DecayFit, EvalPoint,
};
use padesurf_core::ComplexValue;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Surface,
    Moments,
    Pade,
    Predict,
    Verify,
    Poles,
    Run,
}

impl Stage {
    fn needs_pade(self) -> bool {
        matches!(self, Stage::Pade | Stage::Verify | Stage::Poles | Stage::Run)
    }

    fn needs_moments(self) -> bool {
        self == Stage::Moments || self.needs_pade()
    }

    fn needs_predict(self) -> bool {
        matches!(self, Stage::Predict | Stage::Verify | Stage::Poles | Stage::Run)
    }

    fn needs_verify(self) -> bool {
        matches!(self, Stage::Verify | Stage::Run)
    }

    fn needs_poles(self) -> bool {
        matches!(self, Stage::Poles | Stage::Run)
    }
}

/// Pass/fail record of one invariant suite.
#[derive(Debug, Clone, Serialize)]
pub struct Suite {
    pub name: String,
    pub passed: bool,
    /// Worst residual (`"n/a"` when nothing was measured).
    pub worst: String,
    pub tolerance: String,
    pub detail: String,
}

impl Suite {
    fn residual(name: &str, worst: f64, tol: f64, detail: String) -> Self {
        Self { name: name.into(), passed: worst < tol, worst: fmt_f64(worst), tolerance: fmt_f64(tol), detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedIndex {
    pub n: usize,
    pub reason: String,
}

/// Summary written to `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub stage: String,
    pub config_hash: String,
    pub seed: String,
    pub precision_bits: u32,
    pub surface_cache: String,
    pub surface_cache_hit: bool,
    pub genus: usize,
    pub surface_checks: Vec<padesurf_core::surface::InvariantCheck>,
    pub n_range: [usize; 2],
    pub n_star: Vec<usize>,
    pub n_epsilon: Vec<usize>,
    pub skipped: Vec<SkippedIndex>,
    pub sa1_fit: Option<DecayFit>,
    pub sa1_max_residual: Vec<(usize, String)>,
    pub pole_distances: Vec<(usize, String)>,
    pub suites: Vec<Suite>,
    pub all_passed: bool,
}

/// Outcome of one invocation.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn all_passed(&self) -> bool {
        self.report.all_passed
    }
}

struct PadeRow {
    pair: PadePair,
    zeros: Vec<ComplexValue>,
    orth: f64,
}

struct PredictRow {
    index: IndexData,
    bundle: Option<PredictorBundle>,
    error: Option<String>,
}

/// Runs `stage` for a materialized config.
pub fn execute(stage: Stage, cfg: &ExperimentConfig) -> Result<Outcome> {
    let out = PathBuf::from(&cfg.output.dir);
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut files = Vec::new();
    let echo = out.join("config.echo");
    std::fs::write(&echo, cfg.echo()?)?;
    files.push(echo);

    let bits = cfg.precision.bits;
    let range = cfg.n_range();
    let (n_lo, n_hi) = (*range.start(), *range.end());
    let mut suites = Vec::new();
    let mut skipped = Vec::new();

    // Surface.
    let (surface, cache_path, hit) = surface_stage(cfg).context("stage surface")?;
    files.push(cache_path.clone());
    if cfg.checks.surface {
        let worst = surface.invariant_checks().iter().map(|c| c.residual / c.tolerance).fold(0.0, f64::max);
        let failed: Vec<_> = surface.invariant_checks().iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        suites.push(Suite {
            name: "surface_build".into(),
            passed: failed.is_empty(),
            worst: fmt_f64(worst),
            tolerance: "1 (residual/tolerance)".into(),
            detail: if failed.is_empty() { String::new() } else { format!("failed: {}", failed.join(", ")) },
        });
    }

    // Moments and Padé at the escalated precision.
    let prec_m = bits.max(cfg.precision.pade_bits_per_order * n_hi as u32);
    let contour_m = cfg.contour(prec_m)?;
    let weight_m = cfg.weight(&contour_m)?;
    // Moment tolerances follow the precision of each computation.
    let qs_at = |p: u32| {
        let mut q = cfg.quadrature.moments.settings(bits);
        q.tol_bits = (q.tol_bits + p).saturating_sub(bits);
        q
    };
    let qs_m = qs_at(prec_m);
    let mut series = None;
    if stage.needs_moments() {
        let s = f_rho_coefficients(&contour_m, &weight_m, 2 * n_hi + 2, &qs_m, prec_m).context("stage moments")?;
        let path = out.join("moments.csv");
        write_moments(&path, &s)?;
        files.push(path);
        series = Some(s);
    }
    let mut pade_rows: Vec<PadeRow> = Vec::new();
    if stage.needs_pade() {
        let s = series.as_ref().expect("moments computed");
        for n in range.clone() {
            let pair = pade_solve(s, n, bits, cfg.precision.pade_bits_per_order)
                .with_context(|| format!("stage pade, n = {n}"))?;
            let zeros = if pair.degree() > 0 { denominator_zeros(&pair)? } else { Vec::new() };
            let r = orthogonality_residuals(&pair, &contour_m, &weight_m, Some(n - 1), &qs_at(pair.working_bits), pair.working_bits + 64)
                .with_context(|| format!("stage pade (orthogonality), n = {n}"))?;
            let orth = max_abs(&r) / max_abs(pair.q.coeffs());
            pade_rows.push(PadeRow { pair, zeros, orth });
        }
        let path = out.join("pade.csv");
        write_pade(&path, &pade_rows)?;
        files.push(path);
        if cfg.checks.orthogonality {
            let worst = pade_rows.iter().map(|r| r.orth).fold(0.0, f64::max);
            suites.push(Suite::residual(
                "orthogonality",
                worst,
                cfg.checks.orthogonality_tol,
                "max_k |r_k| / max_i |q_i|".into(),
            ));
        }
    }

    // Predictor.
    let mut predict_rows: Vec<PredictRow> = Vec::new();
    let mut sz: Option<SzegoData> = None;
    if stage.needs_predict() {
        let weight_s = cfg.weight(surface.contour())?;
        let szd = szego_build(surface.clone(), &weight_s).context("stage predict (Szegő constants)")?;
        let mut table = DivisorTable::new();
        let mut jip_worst = 0.0f64;
        for n in range.clone() {
            let index = classify_index(&szd, &mut table, n, cfg.index.epsilon)
                .with_context(|| format!("stage predict (inversion), n = {n}"))?;
            jip_worst = jip_worst.max(index.divisor.residual).max(index.divisor_prev.residual);
            let (bundle, error) = match predictor_build(&szd, &mut table, &index) {
                Ok(b) => (Some(b), None),
                Err(e) => (None, Some(e.to_string())),
            };
            if !index.in_n_epsilon {
                skipped.push(SkippedIndex { n, reason: "not in N_epsilon".into() });
            } else if let Some(e) = &error {
                skipped.push(SkippedIndex { n, reason: format!("predictor: {e}") });
            }
            predict_rows.push(PredictRow { index, bundle, error });
        }
        let path = out.join("predict.csv");
        write_predict(&path, &predict_rows)?;
        files.push(path);
        let failed: Vec<usize> = predict_rows
            .iter()
            .filter(|r| r.index.in_n_epsilon && r.error.is_some())
            .map(|r| r.index.n)
            .collect();
        suites.push(Suite {
            name: "predictor".into(),
            passed: failed.is_empty(),
            worst: failed.len().to_string(),
            tolerance: "0 failures".into(),
            detail: if failed.is_empty() { String::new() } else { format!("failed at n = {failed:?}") },
        });
        if cfg.checks.jip {
            suites.push(Suite::residual("jip_round_trip", jip_worst, cfg.checks.jip_tol, "lattice residual".into()));
        }
        if cfg.checks.jump {
            let mut worst = 0.0f64;
            for x in interior_samples(&szd, cfg.points.jump_samples_per_interval) {
                worst = worst.max(szd.jump_residual(&x)?);
            }
            suites.push(Suite::residual("szego_jump", worst, cfg.checks.jump_tol, "|ρS⁺ − S⁻|/|S⁻|".into()));
        }
        sz = Some(szd);
    }

    // Verification.
    let mut sa1_fit = None;
    let mut sa1_max = Vec::new();
    if stage.needs_verify() {
        let szd = sz.as_ref().expect("predictor built");
        let zs = evaluation_points(cfg, surface.contour(), bits);
        let pts = eval_points(szd, &zs).context("stage verify (evaluation points)")?;
        let samples = interior_samples(szd, cfg.points.jump_samples_per_interval);
        let path = out.join("verify.csv");
        let mut w = CsvOut::create(&path, VERIFY_HEADER)?;
        let (mut det_worst, mut jump_worst) = (0.0f64, 0.0f64);
        let (mut fit_n, mut fit_v) = (Vec::new(), Vec::new());
        for (row, prow) in pade_rows.iter().zip(&predict_rows) {
            let n = row.pair.n;
            let Some(b) = prow.bundle.as_ref().filter(|_| prow.index.in_n_epsilon) else {
                let reason = prow.error.clone().unwrap_or_else(|| "not in N_epsilon".into());
                w.row(&verify_row(n, "skipped", None, &[], &reason))?;
                continue;
            };
            let (kept, excluded): (Vec<EvalPoint>, Vec<EvalPoint>) =
                pts.iter().cloned().partition(|p| check_exclusion(&p.z, &b.psi.divisor, cfg.points.exclusion).is_ok());
            for p in &excluded {
                w.row(&verify_row(n, "excluded", Some(&p.z), &[], "within exclusion radius of a divisor point"))?;
            }
            let f = |z: &ComplexValue, p: u32| f_rho_eval(&contour_m, &weight_m, z, &QuadSettings::for_prec(p), p);
            let rec = compare_sa1(szd, &row.pair, b, &kept, cfg.points.exclusion, f, bits)
                .with_context(|| format!("stage verify (SA1), n = {n}"))?;
            for p in &rec.points {
                let vals = [
                    ("r1", cplx(&p.r1)),
                    ("r2", cplx(&p.r2)),
                    ("upsilon1_abs", fmt_f64(abs_f64(&p.upsilon.0))),
                    ("upsilon2_abs", fmt_f64(abs_f64(&p.upsilon.1))),
                ];
                w.row(&verify_row(n, "sa1", Some(&p.z), &vals, ""))?;
            }
            fit_n.push(n);
            fit_v.push(rec.max_residual());
            sa1_max.push((n, fmt_f64(rec.max_residual())));
            let det_pts = &pts[..cfg.points.det_points.min(pts.len())];
            for (p, d) in det_pts.iter().zip(det_n_check(szd, b, det_pts)?) {
                det_worst = det_worst.max(d);
                w.row(&verify_row(n, "det", Some(&p.z), &[("det_residual", fmt_f64(d))], ""))?;
            }
            for j in jump_residuals(szd, b, &samples)? {
                jump_worst = jump_worst.max(j.plus).max(j.minus);
                let z = cx(bits, j.x, 0.0);
                let vals = [("jump_plus", fmt_f64(j.plus)), ("jump_minus", fmt_f64(j.minus))];
                w.row(&verify_row(n, "jump", Some(&z), &vals, &format!("interval {}", j.interval)))?;
            }
        }
        w.finish()?;
        files.push(path);
        if cfg.checks.det {
            suites.push(Suite::residual("det_n", det_worst, cfg.checks.det_tol, "|det N − 1|".into()));
        }
        if cfg.checks.jump {
            suites.push(Suite::residual("psi_jump", jump_worst, cfg.checks.jump_tol, "(Ψ*)^± = ρΨ^∓".into()));
        }
        if fit_n.len() >= 2 {
            let fit = fit_decay(&fit_n, &fit_v)?;
            if cfg.checks.sa1_decay {
                suites.push(Suite {
                    name: "sa1_decay".into(),
                    passed: fit.slope < 0.0,
                    worst: fmt_f64(fit.slope),
                    tolerance: "slope < 0".into(),
                    detail: format!("C = {}", fmt_f64(fit.c)),
                });
            }
            sa1_fit = Some(fit);
        } else if cfg.checks.sa1_decay {
            suites.push(Suite {
                name: "sa1_decay".into(),
                passed: false,
                worst: "n/a".into(),
                tolerance: "slope < 0".into(),
                detail: format!("only {} indices in N_epsilon", fit_n.len()),
            });
        }
    }

    // Pole tracking.
    let mut pole_distances = Vec::new();
    if stage.needs_poles() {
        let path = out.join("poles.csv");
        let mut w = CsvOut::create(&path, &["n", "divisor_re", "divisor_im", "zero_re", "zero_im", "distance", "matched", "tracked"])?;
        for (row, prow) in pade_rows.iter().zip(&predict_rows) {
            if !prow.index.in_n_epsilon {
                continue;
            }
            let table = pole_match(&row.zeros, &prow.index.divisor, cfg.checks.pole_radius);
            for m in &table.rows {
                let tracked = abs_f64(&m.divisor_point) <= cfg.checks.pole_max_abs;
                let (zr, zi) = match &m.nearest_zero {
                    Some(z) => (real(z.real()), real(z.imag())),
                    None => (String::new(), String::new()),
                };
                w.row(&[
                    row.pair.n.to_string(),
                    real(m.divisor_point.real()),
                    real(m.divisor_point.imag()),
                    zr,
                    zi,
                    fmt_f64(m.distance),
                    m.matched.to_string(),
                    tracked.to_string(),
                ])?;
                if tracked {
                    pole_distances.push((row.pair.n, fmt_f64(m.distance)));
                }
            }
        }
        w.finish()?;
        files.push(path);
    }

    let all_passed = suites.iter().all(|s| s.passed);
    let report = Report {
        stage: format!("{stage:?}").to_lowercase(),
        config_hash: cfg.hash(),
        seed: cfg.seed().to_string(),
        precision_bits: bits,
        surface_cache: cache_path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        surface_cache_hit: hit,
        genus: surface.genus(),
        surface_checks: surface.invariant_checks().to_vec(),
        n_range: [n_lo, n_hi],
        n_star: predict_rows.iter().filter(|r| r.index.in_n_star).map(|r| r.index.n).collect(),
        n_epsilon: predict_rows.iter().filter(|r| r.index.in_n_epsilon).map(|r| r.index.n).collect(),
        skipped,
        sa1_fit,
        sa1_max_residual: sa1_max,
        pole_distances,
        suites,
        all_passed,
    };
    let path = out.join("report.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")?;
    files.push(path);
    Ok(Outcome { report, files })
}

/// Content hash of everything the surface depends on.
pub fn surface_key(cfg: &ExperimentConfig) -> Result<String> {
    let bits = cfg.precision.bits;
    let contour = cfg.contour(bits)?;
    let intervals: Vec<[String; 2]> =
        contour.intervals().iter().map(|(a, b)| [real_to_string(a), real_to_string(b)]).collect();
    let key = serde_json::json!({
        "intervals": intervals,
        "precision_bits": bits,
        "quadrature": cfg.quadrature.surface.settings(bits),
    });
    Ok(hex(&Sha256::digest(key.to_string().as_bytes())))
}

fn surface_stage(cfg: &ExperimentConfig) -> Result<(Arc<HyperellipticSurface>, PathBuf, bool)> {
    let bits = cfg.precision.bits;
    let key = surface_key(cfg)?;
    let dir = PathBuf::from(cfg.output.cache_dir.clone().expect("materialized"));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(format!("surface-{}.json", &key[..16]));
    let settings = cfg.quadrature.surface.settings(bits);
    let contour = cfg.contour(bits)?;
    if cfg.output.cache && path.exists() {
        if let Some(s) = load_cached(&path, &contour, bits, &settings)? {
            eprintln!("surface cache hit {key}");
            return Ok((Arc::new(s), path, true));
        }
        eprintln!("surface cache {key} does not match the config; rebuilding");
    }
    let s = build_surface(&contour, &settings)?;
    std::fs::write(&path, serde_json::to_string(&s.snapshot())?)?;
    eprintln!("surface built, cached as {}", path.display());
    Ok((Arc::new(s), path, false))
}

/// Snapshot at `path` when contour, precision and orders match exactly.
fn load_cached(
    path: &Path,
    contour: &IntervalContour,
    bits: u32,
    settings: &QuadSettings,
) -> Result<Option<HyperellipticSurface>> {
    let snap: SurfaceSnapshot = serde_json::from_str(&std::fs::read_to_string(path)?)
        .with_context(|| format!("corrupt surface cache {}", path.display()))?;
    let intervals: Vec<[String; 2]> =
        contour.intervals().iter().map(|(a, b)| [real_to_string(a), real_to_string(b)]).collect();
    if snap.intervals != intervals || snap.precision_bits != bits || snap.quadrature != *settings {
        return Ok(None);
    }
    Ok(Some(HyperellipticSurface::from_snapshot(&snap)?))
}

/// Ring `|z − c| = R` plus seeded random points inside it away from `Δ`.
pub fn evaluation_points(cfg: &ExperimentConfig, contour: &IntervalContour, prec: u32) -> Vec<ComplexValue> {
    let radius = cfg.points.ring_radius.unwrap_or(2.0 * contour.max_abs_branch_point());
    let mut zs = ring_points(radius, cfg.points.ring_count, prec);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let mut tries = 0;
    while zs.len() < cfg.points.ring_count + cfg.points.random_count && tries < 100_000 {
        tries += 1;
        let (x, y) = (rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
        let z = cx(prec, x, y);
        if x.hypot(y) < radius && contour.distance(&z) >= cfg.points.min_distance {
            zs.push(z);
        }
    }
    zs
}

fn write_moments(path: &Path, s: &PowerSeries) -> Result<()> {
    let mut w = CsvOut::create(path, &["k", "re", "im"])?;
    for (k, c) in s.coefficients.iter().enumerate() {
        w.row(&[k.to_string(), real(c.real()), real(c.imag())])?;
    }
    w.finish()
}

fn write_pade(path: &Path, rows: &[PadeRow]) -> Result<()> {
    let mut w = CsvOut::create(
        path,
        &[
            "n",
            "degree",
            "degenerate",
            "working_bits",
            "condition",
            "contact_order",
            "contact_saturated",
            "orthogonality",
            "q_coefficients",
            "zeros",
        ],
    )?;
    for r in rows {
        let p = &r.pair;
        w.row(&[
            p.n.to_string(),
            p.degree().to_string(),
            p.degenerate.to_string(),
            p.working_bits.to_string(),
            fmt_f64(p.condition),
            p.contact_order.to_string(),
            p.contact_saturated.to_string(),
            fmt_f64(r.orth),
            p.q.coeffs().iter().map(cplx).collect::<Vec<_>>().join(";"),
            r.zeros.iter().map(cplx).collect::<Vec<_>>().join(";"),
        ])?;
    }
    w.finish()
}

fn write_predict(path: &Path, rows: &[PredictRow]) -> Result<()> {
    let mut w = CsvOut::create(
        path,
        &[
            "n",
            "in_n_star",
            "in_n_epsilon",
            "tilde_n",
            "gamma",
            "gamma_star",
            "gamma_star_extrapolation",
            "divisor",
            "j",
            "m",
            "x",
            "y",
            "jip_residual",
            "error",
        ],
    )?;
    let ints = |v: &[i64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
    let floats = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";");
    for r in rows {
        let i = &r.index;
        let b = r.bundle.as_ref();
        let opt = |v: Option<&ComplexValue>| v.map(cplx).unwrap_or_default();
        w.row(&[
            i.n.to_string(),
            i.in_n_star.to_string(),
            i.in_n_epsilon.to_string(),
            i.tilde_n.to_string(),
            opt(b.and_then(|b| b.gamma.as_ref())),
            opt(b.and_then(|b| b.gamma_star.as_ref())),
            b.filter(|b| b.gamma_star.is_some()).map(|b| fmt_f64(b.gamma_star_error)).unwrap_or_default(),
            i.divisor.points.iter().map(point).collect::<Vec<_>>().join(";"),
            ints(&i.j_vec),
            ints(&i.m_vec),
            floats(&i.x_vec),
            floats(&i.y_vec),
            fmt_f64(i.divisor.residual),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.finish()
}

/// `sheet:re im`, or `sheet:inf`.
fn point(p: &SurfacePoint) -> String {
    match &p.z {
        Some(z) => format!("{}:{}", p.sheet, cplx(z)),
        None => format!("{}:inf", p.sheet),
    }
}

const VERIFY_HEADER: &[&str] = &[
    "n",
    "kind",
    "z_re",
    "z_im",
    "r1",
    "r2",
    "upsilon1_abs",
    "upsilon2_abs",
    "det_residual",
    "jump_plus",
    "jump_minus",
    "note",
];

fn verify_row(n: usize, kind: &str, z: Option<&ComplexValue>, vals: &[(&str, String)], note: &str) -> Vec<String> {
    let mut row = vec![String::new(); VERIFY_HEADER.len()];
    row[0] = n.to_string();
    row[1] = kind.into();
    if let Some(z) = z {
        row[2] = real(z.real());
        row[3] = real(z.imag());
    }
    for (k, v) in vals {
        let i = VERIFY_HEADER.iter().position(|h| h == k).expect("known column");
        row[i] = v.clone();
    }
    row[VERIFY_HEADER.len() - 1] = note.into();
    row
}
