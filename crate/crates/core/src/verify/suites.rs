//! Named collections of checks.
//!
//! Every check draws its samples from `derive_seed(derive_seed(seed, salt), i)`
//! where `salt` identifies the check and `i` the sample, evaluates them in
//! parallel and assembles the report in index order, so output depends only
//! on the options.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::constants::*;
use super::report::{ResidualReport, SampleRecord, SuiteReport};
use super::residuals::*;
use super::sampling::{derive_seed, draw_configuration, random_lambda, random_mass, rng_for};
use crate::elliptic::{EllipticContext, C1};
use crate::error::{Error, Result};
use crate::fd::StencilSpec;
use crate::operators::{apply_calh, apply_h_deformed, Backend, BackendKind};
use crate::states::{
    build_kernel_f, build_phi0, build_psi0, pn_coefficients, pn_coefficients_at, periodic_distance, unit_points,
    Configuration, DeformedModel, MassModel, QuadratureSpec, Side,
};

pub const TOL_ANALYTIC: f64 = 1e-9;
pub const TOL_FD: f64 = 1e-6;
pub const TOL_COR3: f64 = 1e-5;
pub const TOL_CLOSED: f64 = 1e-13;
pub const TOL_EMBEDDING: f64 = 1e-10;
pub const TOL_NODES: f64 = 1e-10;
pub const TOL_RADII: f64 = 1e-9;
pub const TOL_TRIG_COEFFS: f64 = 1e-12;
/// Distances are whole ulps, so `< 3` means "at most 2 ulp".
pub const TOL_ULP: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Appendix,
    Prop1,
    Cor1,
    Cor2,
    Cor3,
    Lemma1,
    Shift,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::Appendix,
        Suite::Prop1,
        Suite::Cor1,
        Suite::Cor2,
        Suite::Cor3,
        Suite::Lemma1,
        Suite::Shift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Appendix => "appendix",
            Suite::Prop1 => "prop1",
            Suite::Cor1 => "cor1",
            Suite::Cor2 => "cor2",
            Suite::Cor3 => "cor3",
            Suite::Lemma1 => "lemma1",
            Suite::Shift => "shift",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Constraint(format!("unknown suite {s:?}")))
    }
}

/// Sampling and numerical settings shared by all suites.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// Samples per check; `None` uses each check's default.
    pub samples: Option<usize>,
    pub seed: u64,
    /// Replaces the tolerance of every residual check (closed-form, ulp and
    /// quadrature checks keep theirs).
    pub tol: Option<f64>,
    pub stencil: StencilSpec,
    pub quad: QuadratureSpec,
    pub min_sep: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            samples: None,
            seed: 0,
            tol: None,
            stencil: StencilSpec::default(),
            quad: QuadratureSpec::default(),
            min_sep: 0.2,
        }
    }
}

impl SuiteOptions {
    fn count(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    fn tier(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn fd(&self) -> Backend {
        Backend::FiniteDifference(self.stencil)
    }
}

/// Model parameters pinned by the caller; anything left `None` is drawn at
/// random (or takes the suite's default).
#[derive(Debug, Clone, Default)]
pub struct SuiteParams {
    pub ctx: Option<EllipticContext>,
    pub lambda: Option<Complex64>,
    pub masses: Option<Vec<Complex64>>,
    /// Particle number 𝒩 when masses are drawn.
    pub count: Option<usize>,
    pub n: Option<usize>,
    pub n_tilde: Option<usize>,
    pub m: Option<usize>,
    pub m_tilde: Option<usize>,
    /// Inclusive range of Laurent labels.
    pub labels: Option<(i64, i64)>,
    pub dressing: Option<Dressing>,
}

pub fn run_suite(suite: Suite, params: &SuiteParams, opts: &SuiteOptions) -> Result<SuiteReport> {
    let start = Instant::now();
    let checks = match suite {
        Suite::Appendix => appendix(params, opts)?,
        Suite::Prop1 => prop1(params, opts)?,
        Suite::Cor1 => cor1(params, opts)?,
        Suite::Cor2 => cor2(params, opts)?,
        Suite::Cor3 => cor3(params, opts)?,
        Suite::Lemma1 => lemma1(params, opts)?,
        Suite::Shift => shift(params, opts)?,
        Suite::All => {
            let mut all = Vec::new();
            for s in Suite::EACH {
                all.extend(run_suite(s, params, opts)?.checks);
            }
            all
        }
    };
    let mut report = SuiteReport::new(suite.name(), checks);
    report.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    Ok(report)
}

// ---------------------------------------------------------------- helpers

/// Evaluates `f(seed_i)` for every sample in parallel; the first error in
/// index order wins.
fn par_samples<T: Send>(opts: &SuiteOptions, salt: &str, count: usize, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let base = derive_seed(opts.seed, salt_of(salt));
    let out: Vec<Result<T>> = (0..count as u64)
        .into_par_iter()
        .map(|i| f(derive_seed(base, i)))
        .collect();
    out.into_iter().collect()
}

fn salt_of(s: &str) -> u64 {
    // FNV-1a; stable across platforms and releases.
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn timed(start: Instant, report: ResidualReport) -> ResidualReport {
    report.timed(start.elapsed().as_secs_f64() * 1e3)
}

fn record(seed: u64, cfg: &Configuration, r: &Residual) -> SampleRecord {
    let mut s = SampleRecord::new(seed, cfg.coords().to_vec(), r.abs(), r.scale);
    s.backend = Some(r.backend);
    if r.backend == BackendKind::Fd {
        s.error_estimate = Some(r.error_estimate);
    }
    s
}

/// |a − b| against 1 + max(|a|, |b|).
fn closed(seed: u64, a: Complex64, b: Complex64) -> SampleRecord {
    SampleRecord::new(seed, Vec::new(), (a - b).norm(), 1.0 + a.norm().max(b.norm()))
}

/// Agreement of the two backends measured in units of the FD error estimate
/// (plus a few ulps of the analytic value).
fn agreement(seed: u64, cfg: &Configuration, analytic: &Residual, fd: &Residual) -> SampleRecord {
    let budget = fd.error_estimate + 64.0 * f64::EPSILON * analytic.scale;
    let mut s = SampleRecord::new(seed, cfg.coords().to_vec(), (analytic.value - fd.value).norm(), budget);
    s.error_estimate = Some(fd.error_estimate);
    s
}

fn ulps(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a.is_nan() || b.is_nan() {
        return f64::INFINITY;
    }
    let key = |x: f64| {
        let i = x.to_bits() as i64;
        if i < 0 {
            i64::MIN as i128 - i as i128
        } else {
            i as i128
        }
    };
    (key(a) - key(b)).abs() as f64
}

fn ulp_record(seed: u64, coords: Vec<f64>, pairs: &[(f64, f64)]) -> SampleRecord {
    let worst = pairs.iter().map(|&(a, b)| ulps(a, b)).fold(0.0, f64::max);
    SampleRecord::new(seed, coords, worst, 1.0)
}

fn context_for(params: &SuiteParams, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Result<EllipticContext> {
    match &params.ctx {
        Some(c) => Ok(c.clone()),
        None => EllipticContext::new(rng.gen_range(lo..=hi)),
    }
}

fn ctx_json(ctx: &EllipticContext) -> Value {
    json!({ "beta": if ctx.is_trigonometric() { Value::Null } else { json!(ctx.beta()) }, "q": ctx.q() })
}

fn numeric_meta(report: ResidualReport, opts: &SuiteOptions, backend: Option<BackendKind>) -> ResidualReport {
    let report = report.meta("truncation", crate::elliptic::TruncationPolicy::default());
    match backend {
        Some(BackendKind::Fd) => report.meta("stencil", opts.stencil),
        _ => report,
    }
}

// --------------------------------------------------------------- appendix

fn appendix(params: &SuiteParams, opts: &SuiteOptions) -> Result<Vec<ResidualReport>> {
    let n = opts.count(200);
    let lo = 0.2;
    let hi = TAU - 0.2;
    let tol = opts.tier(TOL_ANALYTIC);
    let param = json!({ "beta_range": [1.5, 8.0], "r_range": [lo, hi] });
    let mut out = Vec::new();

    let t = Instant::now();
    let rows = par_samples(opts, "appendix.a2", n, |seed| {
        let mut rng = rng_for(seed);
        let ctx = context_for(params, &mut rng, 1.5, 8.0)?;
        let r = rng.gen_range(lo..=hi);
        let d = opts.stencil.first(|s| Ok(Complex64::new(ctx.phi(s)?, 0.0)), r)?;
        let v = ctx.potential(r)?;
        Ok(SampleRecord::new(seed, vec![r], (d.value.re + v).abs(), 1.0 + v.abs()).with_params(ctx_json(&ctx)))
    })?;
    out.push(timed(
        t,
        ResidualReport::new("appendix.derivative", param.clone(), rows, tol).meta("stencil", opts.stencil),
    ));

    let t = Instant::now();
    let rows = par_samples(opts, "appendix.a3", n, |seed| {
        let mut rng = rng_for(seed);
        let ctx = context_for(params, &mut rng, 1.5, 8.0)?;
        let r = rng.gen_range(lo..=hi);
        let (p, v, f) = (ctx.phi(r)?, ctx.potential(r)?, ctx.f(r)?);
        let res = p * p - v + 2.0 * f + ctx.c0();
        Ok(SampleRecord::new(seed, vec![r], res.abs(), 1.0 + v.abs()).with_params(ctx_json(&ctx)))
    })?;
    out.push(timed(t, ResidualReport::new("appendix.square", param.clone(), rows, tol)));

    let t = Instant::now();
    let rows = par_samples(opts, "appendix.a5", n, |seed| {
        let mut rng = rng_for(seed);
        let ctx = context_for(params, &mut rng, 1.5, 8.0)?;
        let (x, y, z) = loop {
            let (x, y) = (rng.gen_range(lo..=hi), rng.gen_range(lo..=hi));
            if periodic_distance(x + y) >= lo {
                break (x, y, -x - y);
            }
        };
        let (px, py, pz) = (ctx.phi(x)?, ctx.phi(y)?, ctx.phi(z)?);
        let (fx, fy, fz) = (ctx.f(x)?, ctx.f(y)?, ctx.f(z)?);
        let terms = [px * py, px * pz, py * pz, fx, fy, fz];
        let res = terms[0] + terms[1] + terms[2] - fx - fy - fz;
        let scale = 1.0 + terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
        Ok(SampleRecord::new(seed, vec![x, y, z], res.abs(), scale).with_params(ctx_json(&ctx)))
    })?;
    out.push(timed(t, ResidualReport::new("appendix.three_point", param.clone(), rows, tol)));

    let t = Instant::now();
    let rows = par_samples(opts, "appendix.a7", n, |seed| {
        let mut rng = rng_for(seed);
        let ctx = context_for(params, &mut rng, 1.5, 8.0)?;
        let r = rng.gen_range(lo..=hi);
        let pairs = [
            (ctx.phi(-r)?, -ctx.phi(r)?),
            (ctx.potential(-r)?, ctx.potential(r)?),
            (ctx.f(-r)?, ctx.f(r)?),
            (ctx.theta(-r), -ctx.theta(r)),
        ];
        Ok(ulp_record(seed, vec![r], &pairs).with_params(ctx_json(&ctx)))
    })?;
    out.push(timed(
        t,
        ResidualReport::new("appendix.parity", param, rows, TOL_ULP).meta("unit", "ulp"),
    ));

    let t = Instant::now();
    let trig = EllipticContext::trigonometric();
    let rows = par_samples(opts, "appendix.trig", opts.count(50), |seed| {
        let r = rng_for(seed).gen_range(lo..=hi);
        let s = (r / 2.0).sin();
        let pairs = [
            (trig.theta(r), s),
            (trig.potential(r)?, 1.0 / (4.0 * s * s)),
            (trig.c0(), C1),
            (trig.f(r)?, C1),
        ];
        Ok(ulp_record(seed, vec![r], &pairs))
    })?;
    out.push(timed(
        t,
        ResidualReport::new("appendix.trigonometric_limit", json!({ "q": 0.0 }), rows, TOL_ULP).meta("unit", "ulp"),
    ));
    Ok(out)
}

// ------------------------------------------------------------------ prop1

fn draw_mass_model(params: &SuiteParams, rng: &mut ChaCha8Rng) -> Result<MassModel> {
    let lambda = params.lambda.unwrap_or_else(|| random_lambda(rng));
    let masses = match &params.masses {
        Some(m) => m.clone(),
        None => {
            let count = params.count.unwrap_or_else(|| rng.gen_range(2..=4));
            (0..count).map(|_| random_mass(rng)).collect()
        }
    };
    MassModel::new(lambda, masses)
}

fn model_json(model: &MassModel, ctx: &EllipticContext) -> Value {
    json!({ "lambda": model.lambda(), "masses": model.masses(), "nome": ctx_json(ctx) })
}

fn prop1(params: &SuiteParams, opts: &SuiteOptions) -> Result<Vec<ResidualReport>> {
    if let (Some(m), Some(n)) = (&params.masses, params.count) {
        if m.len() != n {
            return Err(Error::Constraint(format!("{} masses given for calN = {n}", m.len())));
        }
    }
    let t = Instant::now();
    let rows = par_samples(opts, "prop1", opts.count(50), |seed| {
        let mut rng = rng_for(seed);
        let model = draw_mass_model(params, &mut rng)?;
        let ctx = context_for(params, &mut rng, 1.5, 6.0)?;
        let cfg = draw_configuration(&mut rng, model.particle_count(), opts.min_sep)?;
        let a = residual_prop1(&model, &ctx, &cfg, Backend::Analytic)?;
        let f = residual_prop1(&model, &ctx, &cfg, opts.fd())?;
        let p = model_json(&model, &ctx);
        let constant = closed(seed, energy_e0_prop1(&model, &ctx), energy_e0_double_sum(&model, &ctx));
        Ok((
            record(seed, &cfg, &a).with_params(p.clone()),
            record(seed, &cfg, &f).with_params(p.clone()),
            agreement(seed, &cfg, &a, &f).with_params(p.clone()),
            constant.with_params(p),
        ))
    })?;
    let ms = t.elapsed().as_secs_f64() * 1e3;
    let param = json!({
        "lambda": params.lambda,
        "masses": params.masses,
        "calN": params.count.or(params.masses.as_ref().map(Vec::len)),
        "nome": params.ctx.as_ref().map(ctx_json),
        "beta_range": if params.ctx.is_none() { json!([1.5, 6.0]) } else { Value::Null },
    });
    let (mut a, mut f, mut g, mut c) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (x, y, z, w) in rows {
        a.push(x);
        f.push(y);
        g.push(z);
        c.push(w);
    }
    Ok(vec![
        numeric_meta(
            ResidualReport::new("prop1.analytic", param.clone(), a, opts.tier(TOL_ANALYTIC)),
            opts,
            Some(BackendKind::Analytic),
        )
        .timed(ms),
        numeric_meta(
            ResidualReport::new("prop1.fd", param.clone(), f, opts.tier(TOL_FD)),
            opts,
            Some(BackendKind::Fd),
        )
        .timed(ms),
        ResidualReport::new("prop1.backend_agreement", param.clone(), g, 1.0)
            .meta("unit", "fd error estimate")
            .meta("stencil", opts.stencil),
        ResidualReport::new("prop1.constant_forms", param, c, TOL_CLOSED),
    ])
}

// ------------------------------------------------------------------- cor1

fn draw_deformed(params: &SuiteParams, rng: &mut ChaCha8Rng) -> Result<DeformedModel> {
    loop {
        let mut pick = |v: Option<usize>| v.unwrap_or_else(|| rng.gen_range(0..=2));
        let (n, nt, m, mt) = (pick(params.n), pick(params.n_tilde), pick(params.m), pick(params.m_tilde));
        if n + nt + m + mt < 2 && [params.n, params.n_tilde, params.m, params.m_tilde].iter().any(Option::is_none) {
            continue;
        }
        let lambda = params.lambda.unwrap_or_else(|| random_lambda(rng));
        return DeformedModel::new(n, nt, m, mt, lambda);
    }
}

fn deformed_json(model: &DeformedModel, ctx: &EllipticContext) -> Value {
    json!({
        "N": model.n, "Ntilde": model.n_tilde, "M": model.m, "Mtilde": model.m_tilde,
        "lambda": model.lambda, "nome": ctx_json(ctx),
    })
}

fn fixed_json(params: &SuiteParams) -> Value {
    json!({
        "N": params.n, "Ntilde": params.n_tilde, "M": params.m, "Mtilde": params.m_tilde,
        "lambda": params.lambda, "nome": params.ctx.as_ref().map(ctx_json),
        "dressing": params.dressing,
    })
}

fn cor1(params: &SuiteParams, opts: &SuiteOptions) -> Result<Vec<ResidualReport>> {
    let param = fixed_json(params);
    let mut out = Vec::new();

    let t = Instant::now();
    let rows = par_samples(opts, "cor1", opts.count(30), |seed| {
        let mut rng = rng_for(seed);
        let model = draw_deformed(params, &mut rng)?;
        let ctx = context_for(params, &mut rng, 1.5, 6.0)?;
        let cfg = draw_configuration(&mut rng, model.dim(), opts.min_sep)?;
        let a = residual_cor1(&model, &ctx, &cfg, params.dressing, Backend::Analytic)?;
        let f = residual_cor1(&model, &ctx, &cfg, params.dressing, opts.fd())?;

        // Embedding: ℋ = H_left − H_right on F, F = Φ₀, C = ℰ₀.
        let emb = model.embedding();
        let f_state = build_kernel_f(&model);
        let calh = apply_calh(&emb, &f_state, &ctx, &cfg, Backend::Analytic)?;
        let left = apply_h_deformed(&model, Side::Left, &f_state, &ctx, &cfg, Backend::Analytic)?;
        let right = apply_h_deformed(&model, Side::Right, &f_state, &ctx, &cfg, Backend::Analytic)?;
        let op_rel = (calh.value - left.value + right.value).norm() / calh.scale.max(left.scale).max(right.scale);
        let (fv, pv) = (f_state.eval(&ctx, &cfg)?, build_phi0(&emb).eval(&ctx, &cfg)?);
        let state_rel = (fv - pv).norm() / fv.norm().max(pv.norm());
        let c = constant_c(&model, &ctx);
        let e0 = energy_e0_prop1(&emb, &ctx);
        let const_rel = (c - e0).norm() / (1.0 + c.norm().max(e0.norm()));
        let worst = op_rel.max(state_rel).max(const_rel);

        let p = deformed_json(&model, &ctx);
        Ok((
            record(seed, &cfg, &a).with_params(p.clone()),
            record(seed, &cfg, &f).with_params(p.clone()),
            agreement(seed, &cfg, &a, &f).with_params(p.clone()),
            SampleRecord::new(seed, cfg.coords().to_vec(), worst, 1.0).with_params(p.clone()),
            closed(seed, c, e0).with_params(p),
        ))
    })?;
    let ms = t.elapsed().as_secs_f64() * 1e3;
    let (mut a, mut f, mut g, mut e, mut c) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (x, y, z, w, v) in rows {
        a.push(x);
        f.push(y);
        g.push(z);
        e.push(w);
        c.push(v);
    }
    out.push(
        numeric_meta(
            ResidualReport::new("cor1.analytic", param.clone(), a, opts.tier(TOL_ANALYTIC)),
            opts,
            Some(BackendKind::Analytic),
        )
        .timed(ms),
    );
    out.push(
        numeric_meta(ResidualReport::new("cor1.fd", param.clone(), f, opts.tier(TOL_FD)), opts, Some(BackendKind::Fd))
            .timed(ms),
    );
    out.push(
        ResidualReport::new("cor1.backend_agreement", param.clone(), g, 1.0)
            .meta("unit", "fd error estimate")
            .meta("stencil", opts.stencil),
    );
    out.push(ResidualReport::new("cor1.embedding", param.clone(), e, TOL_EMBEDDING));
    out.push(ResidualReport::new("cor1.embedding_constant", param.clone(), c, TOL_CLOSED));

    // Balanced draws: (N − M)λ = Ñ − M̃ removes the β-term exactly.
    let t = Instant::now();
    let rows = par_samples(opts, "cor1.balanced", opts.count(30).clamp(1, 30), |seed| {
        let mut rng = rng_for(seed);
        let model = loop {
            let (n, nt, m, mt): (usize, usize, usize, usize) =
                (rng.gen_range(0..=2), rng.gen_range(0..=2), rng.gen_range(0..=2), rng.gen_range(0..=2));
            if n != m && nt != mt {
                let lambda = (nt as f64 - mt as f64) / (n as f64 - m as f64);
                break DeformedModel::new(n, nt, m, mt, Complex64::new(lambda, 0.0))?;
            }
        };
        let ctx = context_for(params, &mut rng, 1.5, 6.0)?;
        let cfg = draw_configuration(&mut rng, model.dim(), opts.min_sep)?;
        let coef = model.beta_coefficient();
        let r = residual_cor1(&model, &ctx, &cfg, None, Backend::Analytic)?;
        let rel = if coef == Complex64::new(0.0, 0.0) { r.rel() } else { f64::INFINITY };
        Ok(SampleRecord::new(seed, cfg.coords().to_vec(), rel, 1.0).with_params(deformed_json(&model, &ctx)))
    })?;
    out.push(timed(
        t,
        ResidualReport::new("cor1.balanced", json!({ "condition": "(N-M)*lambda = Ntilde-Mtilde" }), rows, opts.tier(TOL_ANALYTIC))
            .meta("note", "infinite residual when the beta coefficient is not exactly zero"),
    ));

    // Operator-level duality; a consequence of the identity, not stated with it.
    let t = Instant::now();
    let rows = par_samples(opts, "cor1.duality", opts.count(30), |seed| {
        let mut rng = rng_for(seed);
        let (n, nt) = loop {
            let (n, nt) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
            if n + nt >= 2 {
                break (n, nt);
            }
        };
        let lambda = params.lambda.unwrap_or_else(|| random_lambda(&mut rng));
        let probe = build_psi0(n, nt, random_lambda(&mut rng))?;
        let ctx = context_for(params, &mut rng, 1.5, 6.0)?;
        let cfg = draw_configuration(&mut rng, n + nt, opts.min_sep)?;
        let r = residual_duality(n, nt, lambda, &probe, &ctx, &cfg, opts.fd())?;
        Ok(record(seed, &cfg, &r).with_params(json!({ "N": n, "Ntilde": nt, "lambda": lambda, "nome": ctx_json(&ctx) })))
    })?;
    out.push(timed(
        t,
        ResidualReport::new(
            "cor1.duality",
            json!({ "relation": "H_{Ntilde,N}(xt,x;1/lambda) = -(1/lambda) H_{N,Ntilde}(x,xt;lambda)" }),
            rows,
            opts.tier(TOL_ANALYTIC),
        )
        .derived()
        .meta("stencil", opts.stencil),
    ));
    Ok(out)
}

// ------------------------------------------------------------------- cor2

fn cor2(params: &SuiteParams, opts: &SuiteOptions) -> Result<Vec<ResidualReport>> {
    let pairs: Vec<(usize, usize)> = match (params.n, params.n_tilde) {
        (Some(n), Some(nt)) => vec![(n, nt)],
        (None, None) => vec![(1, 1), (2, 1), (2, 2), (3, 2)],
        _ => return Err(Error::Constraint("give both N and Ntilde, or neither".into())),
    };
    let contexts = match &params.ctx {
        Some(c) => vec![c.clone()],
        None => vec![EllipticContext::new(2.0)?, EllipticContext::new(4.0)?],
    };
    let mut cases = Vec::new();
    for &(n, nt) in &pairs {
        if n == 0 {
            return Err(Error::Constraint("N must be positive".into()));
        }
        let lambda = Complex64::new(nt as f64 / n as f64, 0.0);
        if let Some(l) = params.lambda {
            if (l - lambda).norm() > 1e-12 * lambda.norm().max(1.0) {
                return Err(Error::Constraint(format!("requires lambda = Ntilde/N = {}, got {l}", lambda.re)));
            }
        }
        for ctx in &contexts {
            cases.push((n, nt, lambda, ctx.clone()));
        }
    }
    let per = opts.count(10);
    let t = Instant::now();
    let rows = par_samples(opts, "cor2", cases.len() * per, Ok)?;
    let evaluated: Vec<Result<_>> = rows
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| {
            let (n, nt, lambda, ctx) = &cases[i / per];
            let cfg = draw_configuration(&mut rng_for(seed), n + nt, opts.min_sep)?;
            let a = residual_cor2(*n, *nt, *lambda, ctx, &cfg, Backend::Analytic)?;
            let f = residual_cor2(*n, *nt, *lambda, ctx, &cfg, opts.fd())?;
            let p = json!({ "N": n, "Ntilde": nt, "lambda": lambda.re, "nome": ctx_json(ctx),
                            "E0": energy_e0_cor2(*n, *nt, ctx)? });
            Ok((record(seed, &cfg, &a).with_params(p.clone()), record(seed, &cfg, &f).with_params(p)))
        })
        .collect();
    let evaluated: Vec<_> = evaluated.into_iter().collect::<Result<_>>()?;
    let ms = t.elapsed().as_secs_f64() * 1e3;
    let (a, f): (Vec<_>, Vec<_>) = evaluated.into_iter().unzip();
    let param = json!({ "pairs": pairs, "nomes": contexts.iter().map(ctx_json).collect::<Vec<_>>() });

    let eig: Vec<SampleRecord> = cases
        .iter()
        .map(|(n, nt, lambda, ctx)| {
            let e = Complex64::new(energy_e0_cor2(*n, *nt, ctx)?, 0.0);
            let c = constant_c(&DeformedModel::single(*n, *nt, *lambda)?, ctx);
            Ok(closed(0, e, c).with_params(json!({ "N": n, "Ntilde": nt, "nome": ctx_json(ctx), "E0": e.re })))
        })
        .collect::<Result<_>>()?;
    Ok(vec![
        numeric_meta(
            ResidualReport::new("cor2.analytic", param.clone(), a, opts.tier(TOL_ANALYTIC)),
            opts,
            Some(BackendKind::Analytic),
        )
        .timed(ms),
        numeric_meta(ResidualReport::new("cor2.fd", param.clone(), f, opts.tier(TOL_FD)), opts, Some(BackendKind::Fd))
            .timed(ms),
        ResidualReport::new("cor2.eigenvalue", param, eig, TOL_CLOSED),
    ])
}

// ------------------------------------------------------------------- cor3

const COR3_ATTEMPTS: u64 = 64;

fn cor3(params: &SuiteParams, opts: &SuiteOptions) -> Result<Vec<ResidualReport>> {
    let n_x = params.n.unwrap_or(2);
    let n_xt = params.n_tilde.unwrap_or(1);
    if n_x < 2 || n_xt < 1 {
        return Err(Error::Constraint(format!("requires N >= 2 and Ntilde >= 1, got ({n_x}, {n_xt})")));
    }
    let lambda = n_xt as f64 / (n_x - 1) as f64;
    if let Some(l) = params.lambda {
        if (l - lambda).norm() > 1e-12 * lambda.max(1.0) {
            return Err(Error::Constraint(format!("requires lambda = Ntilde/(N-1) = {lambda}, got {l}")));
        }
    }
    let ctx = match &params.ctx {
        Some(c) => c.clone(),
        None => EllipticContext::new(2.5)?,
    };
    let (lo, hi) = params.labels.unwrap_or((-2, 3));
    if lo > hi {
        return Err(Error::Constraint(format!("empty label range {lo}..{hi}")));
    }
    let labels: Vec<i64> = (lo..=hi).collect();
    let dim = n_x + n_xt;
    let param = json!({ "N": n_x, "Ntilde": n_xt, "lambda": lambda, "nome": ctx_json(&ctx), "n": [lo, hi] });
    let mut out = Vec::new();

    let per = opts.count(5);
    let t = Instant::now();
    let base = derive_seed(opts.seed, salt_of("cor3"));
    let evaluated: Vec<Result<SampleRecord>> = (0..labels.len() * per)
        .into_par_iter()
        .map(|i| {
            let n = labels[i / per];
            let mut last = None;
            for attempt in 0..COR3_ATTEMPTS {
                let seed = derive_seed(derive_seed(base, i as u64), attempt);
                let cfg = draw_configuration(&mut rng_for(seed), dim, opts.min_sep)?;
                match residual_cor3(n_x, n_xt, n, &ctx, &cfg, &opts.quad, opts.stencil) {
                    Ok(r) => {
                        let e = energy_en_cor3(n_x, n_xt, n, &ctx)?;
                        return Ok(record(seed, &cfg, &r)
                            .with_label(format!("n={n}"))
                            .with_params(json!({ "n": n, "E": e, "attempt": attempt })));
                    }
                    Err(err @ Error::Degenerate(_)) => last = Some(err),
                    Err(err) => return Err(err),
                }
            }
            Err(last.expect("at least one attempt"))
        })
        .collect();
    let rows = evaluated.into_iter().collect::<Result<Vec<_>>>()?;
    out.push(timed(
        t,
        ResidualReport::new("cor3.fd", param.clone(), rows, opts.tier(TOL_COR3))
            .meta("stencil", opts.stencil)
            .meta("quadrature", opts.quad)
            .meta("degeneracy_threshold", DEGENERACY_THRESHOLD),
    ));

    let spectrum = labels
        .iter()
        .map(|&n| {
            let gap = energy_en_cor3(n_x, n_xt, n, &ctx)? - energy_en_cor3(n_x, n_xt, 0, &ctx)?;
            Ok(closed(0, Complex64::new(gap, 0.0), Complex64::new((n * n) as f64, 0.0)).with_label(format!("n={n}")))
        })
        .collect::<Result<Vec<_>>>()?;
    out.push(ResidualReport::new("cor3.spectrum", param.clone(), spectrum, TOL_CLOSED));

    // Quadrature stability at generic points.
    let lam = Complex64::new(lambda, 0.0);
    let quad = opts.quad;
    let t = Instant::now();
    let rows = par_samples(opts, "cor3.quadrature", per, |seed| {
        let cfg = draw_configuration(&mut rng_for(seed), dim, opts.min_sep)?;
        let (x, xt) = cfg.coords().split_at(n_x);
        let base = pn_coefficients_at(&ctx, lam, x, xt, lo..=hi, &quad)?;
        let doubled = QuadratureSpec {
            nodes: 2 * quad.nodes,
            ..quad
        };
        let fine = pn_coefficients_at(&ctx, lam, x, xt, lo..=hi, &doubled)?;
        let r2 = if ctx.is_trigonometric() {
            2.0 * base.radius
        } else {
            base.radius.sqrt()
        };
        let other = pn_coefficients_at(&ctx, lam, x, xt, lo..=hi, &QuadratureSpec { radius: Some(r2), ..quad })?;
        let rel = |a: Complex64, b: Complex64| (a - b).norm() / (1.0 + a.norm().max(b.norm()));
        let nodes = base.iter().zip(fine.iter()).map(|((_, a), (_, b))| rel(a, b)).fold(0.0, f64::max);
        let radii = base.iter().zip(other.iter()).map(|((_, a), (_, b))| rel(a, b)).fold(0.0, f64::max);
        let coords = cfg.coords().to_vec();
        Ok((
            SampleRecord::new(seed, coords.clone(), nodes, 1.0).with_params(json!({ "nodes": [quad.nodes, 2 * quad.nodes] })),
            SampleRecord::new(seed, coords, radii, 1.0).with_params(json!({ "radii": [base.radius, r2] })),
        ))
    })?;
    let ms = t.elapsed().as_secs_f64() * 1e3;
    let (nodes, radii): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    out.push(ResidualReport::new("cor3.quadrature_nodes", param.clone(), nodes, TOL_NODES).timed(ms));
    out.push(ResidualReport::new("cor3.quadrature_radii", param.clone(), radii, TOL_RADII).timed(ms));

    // q = 0: P₀ = 1, P₁ = λ|z| − |z̃|, P₋₁ = 0.
    let trig = EllipticContext::trigonometric();
    let rows = par_samples(opts, "cor3.trig", per, |seed| {
        let cfg = draw_configuration(&mut rng_for(seed), dim, opts.min_sep)?;
        let (x, xt) = cfg.coords().split_at(n_x);
        let (z, zt) = (unit_points(x), unit_points(xt));
        let p = pn_coefficients(&trig, lam, &z, &zt, -1..=1, &quad)?;
        let p1 = lam * z.iter().sum::<Complex64>() - zt.iter().sum::<Complex64>();
        let worst = [
            (p.get(0).unwrap() - 1.0).norm(),
            (p.get(1).unwrap() - p1).norm() / (1.0 + p1.norm()),
            p.get(-1).unwrap().norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        Ok(SampleRecord::new(seed, cfg.coords().to_vec(), worst, 1.0))
    })?;
    out.push(ResidualReport::new(
        "cor3.trigonometric_coefficients",
        json!({ "N": n_x, "Ntilde": n_xt, "lambda": lambda, "q": 0.0 }),
        rows,
        TOL_TRIG_COEFFS,
    ));
    Ok(out)
}

// ----------------------------------------------------------------- lemma1

fn lemma1(params: &SuiteParams, opts: &SuiteOptions) -> Result<Vec<ResidualReport>> {
    let param = fixed_json(params);
    let mut out = Vec::new();
    let draw_dressing = |rng: &mut ChaCha8Rng| {
        params.dressing.unwrap_or_else(|| Dressing {
            v: rng.gen_range(-2.0..=2.0),
            c: Complex64::from_polar(rng.gen_range(0.5..=2.0), rng.gen_range(-3.0..3.0)),
        })
    };

    let rows = par_samples(opts, "lemma1.constant", opts.count(20), |seed| {
        let mut rng = rng_for(seed);
        let model = draw_deformed(params, &mut rng)?;
        let ctx = context_for(params, &mut rng, 1.5, 6.0)?;
        let d = draw_dressing(&mut rng);
        let emb = model.embedding();
        let dressed = constant_c(&model, &ctx) + dressing_shift_c(&model, d.v);
        let via_masses = energy_e0_prop1(&emb, &ctx) + dressing_shift_e0(&emb, d.v);
        let mut p = deformed_json(&model, &ctx);
        p["v"] = json!(d.v);
        Ok(closed(seed, dressed, via_masses).with_params(p))
    })?;
    out.push(ResidualReport::new("lemma1.constant_shift", param.clone(), rows, TOL_CLOSED));

    let t = Instant::now();
    let rows = par_samples(opts, "lemma1.dressed", opts.count(20), |seed| {
        let mut rng = rng_for(seed);
        let model = draw_deformed(params, &mut rng)?;
        let ctx = context_for(params, &mut rng, 1.5, 6.0)?;
        let d = draw_dressing(&mut rng);
        let cfg = draw_configuration(&mut rng, model.dim(), opts.min_sep)?;
        let a = residual_cor1(&model, &ctx, &cfg, Some(d), Backend::Analytic)?;
        let f = residual_cor1(&model, &ctx, &cfg, Some(d), opts.fd())?;
        let mut p = deformed_json(&model, &ctx);
        p["dressing"] = json!(d);
        Ok((record(seed, &cfg, &a).with_params(p.clone()), record(seed, &cfg, &f).with_params(p)))
    })?;
    let ms = t.elapsed().as_secs_f64() * 1e3;
    let (a, f): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    out.push(ResidualReport::new("lemma1.analytic", param.clone(), a, opts.tier(TOL_ANALYTIC)).timed(ms));
    out.push(
        ResidualReport::new("lemma1.fd", param, f, opts.tier(TOL_FD))
            .meta("stencil", opts.stencil)
            .timed(ms),
    );

    // N = M = Ñ = M̃ = 1: dressed and undressed.
    let pair_lambda = params.lambda.unwrap_or(Complex64::new(0.9, 0.0));
    let pair = DeformedModel::new(1, 1, 1, 1, pair_lambda)?;
    let ctx = match &params.ctx {
        Some(c) => c.clone(),
        None => EllipticContext::new(2.5)?,
    };
    let d = params.dressing.unwrap_or(Dressing {
        v: 0.4,
        c: Complex64::new(1.0, 0.0),
    });
    let t = Instant::now();
    let rows = par_samples(opts, "lemma1.pair", opts.count(10), |seed| {
        let cfg = draw_configuration(&mut rng_for(seed), 4, opts.min_sep)?;
        let dressed = residual_cor1(&pair, &ctx, &cfg, Some(d), Backend::Analytic)?;
        let bare = residual_cor1(&pair, &ctx, &cfg, None, Backend::Analytic)?;
        Ok([
            record(seed, &cfg, &dressed).with_label("dressed"),
            record(seed, &cfg, &bare).with_label("v=0"),
        ])
    })?;
    out.push(timed(
        t,
        ResidualReport::new(
            "lemma1.pair_case",
            json!({ "N": 1, "Ntilde": 1, "M": 1, "Mtilde": 1, "lambda": pair_lambda, "dressing": d, "nome": ctx_json(&ctx) }),
            rows.into_iter().flatten().collect(),
            opts.tier(TOL_ANALYTIC),
        ),
    ));
    Ok(out)
}

// ------------------------------------------------------------------ shift

fn shift(params: &SuiteParams, opts: &SuiteOptions) -> Result<Vec<ResidualReport>> {
    let n = opts.count(20);
    let mut out = Vec::new();

    // |m| = 0 by construction: the last mass cancels the others.
    let rows = par_samples(opts, "shift.remark2_e0", n, |seed| {
        let mut rng = rng_for(seed);
        let model = loop {
            let count = params.count.unwrap_or_else(|| rng.gen_range(2..=5));
            let mut masses: Vec<Complex64> = (0..count - 1).map(|_| random_mass(&mut rng)).collect();
            let last = -masses.iter().sum::<Complex64>();
            if last.norm() >= 0.3 {
                masses.push(last);
                break MassModel::new(params.lambda.unwrap_or_else(|| random_lambda(&mut rng)), masses)?;
            }
        };
        let ctx = context_for(params, &mut rng, 1.5, 6.0)?;
        Ok(closed(seed, energy_e0_prop1(&model, &ctx), reduced_e0(&model, &ctx)).with_params(model_json(&model, &ctx)))
    })?;
    out.push(ResidualReport::new("shift.remark2_e0", json!({ "sum_of_masses": 0 }), rows, TOL_CLOSED));

    let rows = par_samples(opts, "shift.remark2_c", n, |seed| {
        let mut rng = rng_for(seed);
        let model = loop {
            let (n, nt, m, mt): (usize, usize, usize, usize) =
                (rng.gen_range(0..=3), rng.gen_range(0..=3), rng.gen_range(0..=3), rng.gen_range(0..=3));
            if n != m && nt != mt {
                let lambda = (nt as f64 - mt as f64) / (n as f64 - m as f64);
                break DeformedModel::new(n, nt, m, mt, Complex64::new(lambda, 0.0))?;
            }
        };
        let ctx = context_for(params, &mut rng, 1.5, 6.0)?;
        Ok(closed(seed, constant_c(&model, &ctx), reduced_c(&model, &ctx)).with_params(deformed_json(&model, &ctx)))
    })?;
    out.push(ResidualReport::new(
        "shift.remark2_c",
        json!({ "condition": "(N-M)*lambda = Ntilde-Mtilde" }),
        rows,
        TOL_CLOSED,
    ));

    let rows = par_samples(opts, "shift.pair_sum", n, |seed| {
        let mut rng = rng_for(seed);
        let model = draw_mass_model(params, &mut rng)?;
        let ctx = context_for(params, &mut rng, 1.5, 6.0)?;
        let s = ShiftSpec {
            b0: rng.gen_range(-1.0..=1.0),
            b1: rng.gen_range(-1.0..=1.0),
        };
        let mut p = model_json(&model, &ctx);
        p["shift"] = json!(s);
        Ok(closed(seed, shifted_e0(&model, &ctx, s), shifted_e0_pair_sum(&model, &ctx, s)).with_params(p))
    })?;
    out.push(ResidualReport::new("shift.general", json!({}), rows, TOL_CLOSED));

    let rows = par_samples(opts, "shift.remark1_e0", n, |seed| {
        let mut rng = rng_for(seed);
        let model = draw_mass_model(params, &mut rng)?;
        let ctx = context_for(params, &mut rng, 1.5, 6.0)?;
        let s = ShiftSpec {
            b0: ctx.c0(),
            b1: ctx.c1(),
        };
        Ok(closed(seed, shifted_e0(&model, &ctx, s), standard_e0(&model, &ctx)).with_params(model_json(&model, &ctx)))
    })?;
    out.push(ResidualReport::new("shift.standard_e0", json!({ "b0": "c0", "b1": "c1" }), rows, TOL_CLOSED));

    let rows = par_samples(opts, "shift.remark1_c", n, |seed| {
        let mut rng = rng_for(seed);
        let model = draw_deformed(params, &mut rng)?;
        let ctx = context_for(params, &mut rng, 1.5, 6.0)?;
        let s = ShiftSpec {
            b0: ctx.c0(),
            b1: ctx.c1(),
        };
        let via_embedding = shifted_e0(&model.embedding(), &ctx, s);
        Ok(closed(seed, via_embedding, standard_c(&model, &ctx)).with_params(deformed_json(&model, &ctx)))
    })?;
    out.push(ResidualReport::new("shift.standard_c", json!({ "b0": "c0", "b1": "c1" }), rows, TOL_CLOSED));
    Ok(out)
}
