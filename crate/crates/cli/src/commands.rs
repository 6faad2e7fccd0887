use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use zchaos_core::chaos::vage_constant;
use zchaos_core::contour::{integrate_wick, ito_check_real, ito_check_regularized, parse_complex};
use zchaos_core::diagnostics::{
    divergence_scan, mehler_consistency, mehler_identity_check, real_pair_grid,
    strictly_increasing, write_rows_csv,
};
use zchaos_core::hermite::{fill_zeta, mehler_kernel, stirling_sandwich};
use zchaos_core::quadrature::{integrate_segment, Tolerance};
use zchaos_core::{
    ChaosProcesses, ChaosVector, Complex64, Contour, HermiteConfig, IntegrandField,
    IntegrationOptions, MultiIndex, NoiseKind, Refinement, TruncationPlan, WeightFunction,
    WeightSequence,
};

use crate::config::ConfigFile;
use crate::Common;

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub check: String,
    pub detail: String,
}

/// Resolves parameters from flags, then the config file, then defaults, and
/// records every resolved value for the manifest.
pub struct Resolver {
    file: ConfigFile,
    used: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn new(common: &Common) -> Result<Self> {
        let file = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Ok(Self {
            file,
            used: BTreeMap::new(),
        })
    }

    pub fn used(&self) -> &BTreeMap<String, Value> {
        &self.used
    }

    fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Serialize,
        T::Err: std::fmt::Display,
    {
        let v = self.file.pick(flag, key)?.unwrap_or(default);
        self.used.insert(key.to_string(), serde_json::to_value(&v)?);
        Ok(v)
    }

    fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Serialize,
        T::Err: std::fmt::Display,
    {
        let v = self.file.pick(flag, key)?;
        if let Some(v) = &v {
            self.used.insert(key.to_string(), serde_json::to_value(v)?);
        }
        Ok(v)
    }

    fn complex(&mut self, key: &str, flag: Option<String>, default: &str) -> Result<Complex64> {
        let s = self.get(key, flag, default.to_string())?;
        Ok(parse_complex(&s)?)
    }
}

/// Everything one subcommand produced.
pub struct Report {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub results: Value,
    pub failures: Vec<Failure>,
    pub artifacts: Vec<String>,
}

impl Report {
    fn new(command: &'static str) -> Self {
        Self {
            command,
            seed: None,
            results: Value::Null,
            failures: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        if !ok {
            self.failures.push(Failure {
                check: name.to_string(),
                detail: detail.into(),
            });
        }
    }
}

pub struct RunContext {
    pub out: PathBuf,
    pub resolver: Resolver,
}

impl RunContext {
    fn artifact(&self, report: &mut Report, name: &str) -> Result<BufWriter<File>> {
        let path = self.out.join(name);
        report.artifacts.push(name.to_string());
        Ok(BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        ))
    }
}

/// Writes `<out>/<command>.json` and returns its path.
pub fn write_manifest(
    out: &Path,
    report: &Report,
    config: &BTreeMap<String, Value>,
) -> Result<PathBuf> {
    let manifest = json!({
        "command": report.command,
        "config": config,
        "seed": report.seed,
        "versions": {
            "zchaos-core": zchaos_core::VERSION,
            "zchaos-cli": env!("CARGO_PKG_VERSION"),
        },
        "results": report.results,
        "failures": report.failures,
        "artifacts": report.artifacts,
        "passed": report.failures.is_empty(),
    });
    let path = out.join(format!("{}.json", report.command));
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(path)
}

pub fn prepare(common: &Common) -> Result<RunContext> {
    let mut resolver = Resolver::new(common)?;
    let out = PathBuf::from(resolver.get(
        "out",
        common.out.clone().map(|p| p.display().to_string()),
        "zchaos-out".into(),
    )?);
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok(RunContext { out, resolver })
}

fn polar_grid(radius: f64, radii: usize, angles: usize) -> Vec<Complex64> {
    let mut grid = Vec::with_capacity(radii * angles);
    for j in 0..radii {
        let r = radius * j as f64 / (radii - 1) as f64;
        for k in 0..angles {
            grid.push(Complex64::from_polar(
                r,
                2.0 * PI * k as f64 / angles as f64,
            ));
        }
    }
    grid
}

fn plan(
    ctx: &mut RunContext,
    c: &Common,
    radius: f64,
    tol: f64,
    nmax: Option<usize>,
) -> Result<TruncationPlan> {
    let r = &mut ctx.resolver;
    let radius = r.get("radius", c.radius, radius)?;
    let tol = r.get("tol", c.tol, tol)?;
    let mut plan = TruncationPlan::new(radius, tol)?;
    if let Some(p) = r.optional("p", c.p)? {
        plan = plan.with_p(p)?;
    }
    let nmax = match nmax {
        Some(default) => Some(r.get("nmax", c.nmax, default)?),
        None => r.optional("nmax", c.nmax)?,
    };
    if let Some(n) = nmax {
        plan = plan.with_terms(n);
    }
    Ok(plan)
}

fn plan_json(plan: &TruncationPlan) -> Value {
    json!({ "radius": plan.radius, "p": plan.p, "N": plan.n_terms, "tail_bound": plan.tail_bound, "tol": plan.tol, "c_R": plan.c_r })
}

#[derive(Serialize)]
struct BoundRow {
    n: usize,
    re_z: f64,
    im_z: f64,
    zeta_ok: bool,
    zeta_prime_ok: bool,
    em_ok: bool,
    hille_ok: bool,
    zeta_margin: f64,
    zeta_prime_margin: f64,
    em_margin: f64,
    hille_margin: f64,
}

pub fn bounds(ctx: &mut RunContext, c: &Common) -> Result<Report> {
    let mut report = Report::new("bounds");
    let nmax = ctx.resolver.get("nmax", c.nmax, 128usize)?;
    let radius = ctx.resolver.get("radius", c.radius, 3.0)?;
    let config = HermiteConfig::standard(nmax, radius)?;
    let grid = polar_grid(radius, 21, 21);
    let mut rows = Vec::with_capacity(grid.len() * nmax);
    for &z in &grid {
        for n in 1..=nmax {
            let b = config.check_bounds(n, z)?;
            rows.push(BoundRow {
                n,
                re_z: z.re,
                im_z: z.im,
                zeta_ok: b.zeta_ok,
                zeta_prime_ok: b.zeta_prime_ok,
                em_ok: b.em_ok,
                hille_ok: b.hille_ok,
                zeta_margin: b.zeta_margin,
                zeta_prime_margin: b.zeta_prime_margin,
                em_margin: b.em_margin,
                hille_margin: b.hille_margin,
            });
        }
    }
    let count = |f: fn(&BoundRow) -> bool| rows.iter().filter(|r| !f(r)).count();
    let violations = json!({
        "zeta": count(|r| r.zeta_ok),
        "zeta_prime": count(|r| r.zeta_prime_ok),
        "eijndhoven_meyers": count(|r| r.em_ok),
        "hille": count(|r| r.hille_ok),
    });
    // the quoted Hille-type estimate is reported only: it fails at small n
    // once R exceeds roughly √(n/(2e)), e.g. |H_2(0)| = 2 > 2e/9 at R = 3
    for key in ["zeta", "zeta_prime", "eijndhoven_meyers"] {
        let v = violations[key].as_u64().unwrap_or(0);
        report.check(
            &format!("bound_{key}"),
            v == 0,
            format!("{v} violating (n, z) pairs"),
        );
    }
    write_rows_csv(ctx.artifact(&mut report, "bounds.csv")?, &rows)?;

    let on = nmax.min(20) + 1;
    let gram = integrate_segment(
        Complex64::new(-12.0, 0.0),
        Complex64::new(12.0, 0.0),
        on * on,
        Tolerance::absolute(1e-13),
        |u, out| {
            let mut z = vec![Complex64::new(0.0, 0.0); on];
            fill_zeta(u, &mut z)?;
            for i in 0..on {
                for j in 0..on {
                    out[i * on + j] = z[i] * z[j];
                }
            }
            Ok(())
        },
    )?;
    let ortho = (0..on * on)
        .map(|k| (gram[k] - if k / on == k % on { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max);
    report.check(
        "orthonormality",
        ortho <= 1e-8,
        format!("max error {ortho:e}"),
    );

    let stirling_ok = (1..=nmax.min(170)).all(|n| {
        let (lo, hi) = stirling_sandwich(n);
        lo && hi
    });
    report.check("stirling_sandwich", stirling_ok, "sandwich violated");
    report.results = json!({
        "grid_points": grid.len(),
        "pairs": rows.len(),
        "violations": violations,
        "min_zeta_margin": rows.iter().map(|r| r.zeta_margin).fold(f64::INFINITY, f64::min),
        "min_zeta_prime_margin": rows.iter().map(|r| r.zeta_prime_margin).fold(f64::INFINITY, f64::min),
        "orthonormality_max_error": ortho,
        "stirling_ok": stirling_ok,
    });
    Ok(report)
}

fn random_vector(rng: &mut ChaCha8Rng) -> ChaosVector {
    let mut f = ChaosVector::zero();
    for _ in 0..rng.random_range(1..=6) {
        let mut e = [0u32; 6];
        for _ in 0..rng.random_range(0..=3) {
            e[rng.random_range(0..6)] += 1;
        }
        let v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        f.add_to(MultiIndex::from_exponents(&e), v);
    }
    f
}

#[derive(Serialize)]
struct VageRow {
    pair: usize,
    lhs: f64,
    rhs: f64,
    ratio: f64,
}

pub fn spaces(ctx: &mut RunContext, c: &Common) -> Result<Report> {
    let mut report = Report::new("spaces");
    let r = &mut ctx.resolver;
    let seed = r.get("seed", c.seed, 0u64)?;
    let samples = r.get("samples", c.samples, 1000usize)?;
    let p = r.get("p", c.p, 4u32)?;
    if p < 3 {
        bail!("spaces needs --p >= 3 so that q = p - 2 >= 1");
    }
    let q = p - 2;
    report.seed = Some(seed);
    let w = WeightSequence::dyadic();
    let a = vage_constant(p - q, &w)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(samples);
    let (mut law_failures, mut vage_failures, mut duality_failures) = (0, 0, 0);
    for pair in 0..samples {
        let (f, g, h) = (
            random_vector(&mut rng),
            random_vector(&mut rng),
            random_vector(&mut rng),
        );
        let scale = 10.0
            * (1.0 + f.norm_minus(0, &w))
            * (1.0 + g.norm_minus(0, &w))
            * (1.0 + h.norm_minus(0, &w));
        let near = |x: &ChaosVector, y: &ChaosVector| x.sub(y).norm_minus(0, &w) <= 1e-12 * scale;
        if !near(&f.wick(&g), &g.wick(&f))
            || !near(&f.wick(&g).wick(&h), &f.wick(&g.wick(&h)))
            || !near(&f.wick(&g.add(&h)), &f.wick(&g).add(&f.wick(&h)))
        {
            law_failures += 1;
        }
        let lhs = f.wick(&g).norm_minus(p, &w);
        let rhs = a * f.norm_minus(p, &w) * g.norm_minus(q, &w);
        if lhs > rhs * (1.0 + 1e-12) {
            vage_failures += 1;
        }
        if f.pairing(&g).norm() > f.norm_minus(p, &w) * g.norm_plus(p, &w) * (1.0 + 1e-12) {
            duality_failures += 1;
        }
        rows.push(VageRow {
            pair,
            lhs,
            rhs,
            ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        });
    }
    report.check(
        "wick_laws",
        law_failures == 0,
        format!("{law_failures} failing triples"),
    );
    report.check(
        "vage",
        vage_failures == 0,
        format!("{vage_failures} failing pairs"),
    );
    report.check(
        "duality",
        duality_failures == 0,
        format!("{duality_failures} failing pairs"),
    );
    write_rows_csv(ctx.artifact(&mut report, "spaces.csv")?, &rows)?;
    report.results = json!({
        "p": p,
        "q": q,
        "vage_constant": a,
        "pairs": samples,
        "max_ratio": rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        "wick_law_failures": law_failures,
        "vage_failures": vage_failures,
        "duality_failures": duality_failures,
    });
    Ok(report)
}

#[derive(Serialize)]
struct CoefficientRow {
    n: usize,
    re_b: f64,
    im_b: f64,
    re_n: f64,
    im_n: f64,
    re_x: f64,
    im_x: f64,
}

pub fn process(ctx: &mut RunContext, c: &Common) -> Result<Report> {
    let mut report = Report::new("process");
    let plan = plan(ctx, c, 1.0, 1e-8, None)?;
    let z = ctx.resolver.complex("z", c.z.clone(), "0.5i")?;
    let seed = ctx.resolver.get("seed", c.seed, 0u64)?;
    report.seed = Some(seed);
    let proc = ChaosProcesses::new(plan)?;
    let weight = WeightFunction::PolyPower(1);
    let b = proc.brownian_coefficients(z)?;
    let n = proc.white_noise_coefficients(z)?;
    let x = proc.weighted_coefficients(z, weight)?;
    let rows: Vec<CoefficientRow> = (0..b.len())
        .map(|k| CoefficientRow {
            n: k,
            re_b: b[k].re,
            im_b: b[k].im,
            re_n: n[k].re,
            im_n: n[k].im,
            re_x: x[k].re,
            im_x: x[k].im,
        })
        .collect();
    write_rows_csv(ctx.artifact(&mut report, "process.csv")?, &rows)?;

    let b_norm = proc.norm(&ChaosVector::from_order1(&b));
    let n_norm = proc.norm(&ChaosVector::from_order1(&n));
    report.check(
        "brownian_norm_bound",
        b_norm <= proc.brownian_norm_bound(),
        format!("{b_norm:e}"),
    );
    report.check(
        "white_noise_norm_bound",
        n_norm <= proc.white_noise_norm_bound(),
        format!("{n_norm:e}"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = [1e-2, 1e-3, 1e-4];
    let reach = (proc.plan().radius - 1e-2).clamp(0.0, 0.5);
    let mut analyticity = Vec::new();
    for _ in 0..5 {
        let z0 = Complex64::from_polar(
            reach * rng.random::<f64>().sqrt(),
            2.0 * PI * rng.random::<f64>(),
        );
        let rep = proc.analyticity_check(z0, &steps)?;
        report.check(
            "analyticity",
            rep.observed_order >= 0.9 && rep.directions_agree(),
            format!(
                "z0 = {z0}: order {:.4}, directions agree {}",
                rep.observed_order,
                rep.directions_agree()
            ),
        );
        let cont = proc.continuity_check(z0, z)?;
        report.check(
            "continuity",
            cont.ok,
            format!("{z0} vs {z}: {:e} > {:e}", cont.norm, cont.bound),
        );
        analyticity.push(json!({ "report": rep, "continuity": cont }));
    }
    report.results = json!({
        "plan": plan_json(proc.plan()),
        "z": z,
        "weight": "poly_power(1)",
        "brownian_norm": b_norm,
        "brownian_norm_bound": proc.brownian_norm_bound(),
        "white_noise_norm": n_norm,
        "white_noise_norm_bound": proc.white_noise_norm_bound(),
        "weighted_norm": proc.norm(&ChaosVector::from_order1(&x)),
        "analyticity": analyticity,
    });
    Ok(report)
}

fn refinement(name: &str) -> Result<Refinement> {
    match name {
        "dyadic" => Ok(Refinement::Dyadic),
        "triadic" => Ok(Refinement::Triadic),
        other => Err(anyhow!(
            "unknown refinement {other:?}; expected dyadic or triadic"
        )),
    }
}

pub fn integrate(ctx: &mut RunContext, c: &Common) -> Result<Report> {
    let mut report = Report::new("integrate");
    let plan = plan(ctx, c, 1.0, 1e-8, Some(32))?;
    let r = &mut ctx.resolver;
    let contour = Contour::parse(&r.get(
        "contour",
        c.contour.clone(),
        "segment:0,0.5+0.5i".to_string(),
    )?)?;
    let integrand_name = r.get("integrand", c.integrand.clone(), "brownian".to_string())?;
    let refine = refinement(&r.get("refinement", c.refinement.clone(), "dyadic".to_string())?)?;
    let one = Complex64::new(1.0, 0.0);
    let (integrand, noise) = match integrand_name.as_str() {
        "one" => (
            IntegrandField::Constant(ChaosVector::one()),
            NoiseKind::Standard,
        ),
        "brownian" => (IntegrandField::Brownian { scale: one }, NoiseKind::Standard),
        "regularized" => {
            let eps = r.get("eps", c.eps, 0.2)?;
            (
                IntegrandField::Regularized { eps, scale: one },
                NoiseKind::Regularized(eps),
            )
        }
        other => bail!("unknown integrand {other:?}; expected one, brownian or regularized"),
    };
    let proc = ChaosProcesses::new(plan)?;
    let opts = IntegrationOptions::new(plan.tol)
        .with_refinement(refine)
        .with_noise(noise);
    let result = integrate_wick(&integrand, &contour, &proc, &opts)?;
    let last = result.levels.last().expect("at least one level");
    let length = result.parameter_length(&contour);
    report.check(
        "norm_stability",
        last.sum_norm <= length * last.max_integrand_norm * (1.0 + 1e-12),
        format!(
            "{:e} > {length} * {:e}",
            last.sum_norm, last.max_integrand_norm
        ),
    );
    let vector_name = "integral_vector.json";
    std::fs::write(ctx.out.join(vector_name), result.value.to_json()? + "\n")?;
    report.artifacts.push(vector_name.to_string());
    let mut results = result.summary(vector_name);
    results["integrand"] = json!(integrand_name);
    results["refinement"] = json!(refine);
    results["plan"] = plan_json(proc.plan());
    results["norm"] = json!(proc.norm(&result.value));
    report.results = results;
    Ok(report)
}

pub fn ito(ctx: &mut RunContext, c: &Common) -> Result<Report> {
    let mut report = Report::new("ito");
    let r = &mut ctx.resolver;
    let t = r.get("T", c.t, 1.0)?;
    let radius = r.get("radius", c.radius, t.abs().max(1.0))?;
    let nmax = r.get("nmax", c.nmax, 64usize)?;
    let tol = r.get("tol", c.tol, 1e-6)?;
    let z = r.complex("z", c.z.clone(), "0.5i")?;
    let eps = r.get("eps", c.eps, 0.3)?;
    let mut plan = TruncationPlan::new(radius, 1e-8)?.with_terms(nmax);
    if let Some(p) = r.optional("p", c.p)? {
        plan = plan.with_p(p)?;
    }
    let proc = ChaosProcesses::new(plan)?;
    let opts = IntegrationOptions::new(tol);

    let real = ito_check_real(t, &proc, &opts)?;
    report.check(
        "antisymmetry",
        real.antisymmetry_max <= 1e-9,
        format!("{:e}", real.antisymmetry_max),
    );
    report.check(
        "ito_real_residual",
        real.residual_ok(),
        format!(
            "{:e} > tol {:e} + gap {:e}",
            real.residual_norm, real.tol, real.parseval_gap
        ),
    );
    let reg = ito_check_regularized(z, eps, &proc, &opts)?;
    let combined = tol + plan.tol;
    report.check(
        "correction_agreement",
        reg.correction_gap() <= 1e-6,
        format!("{:e}", reg.correction_gap()),
    );
    report.check(
        "ito_regularized_residual",
        reg.residual_norm <= combined,
        format!("{:e} > {combined:e}", reg.residual_norm),
    );
    report.results = json!({
        "plan": plan_json(proc.plan()),
        "real": real,
        "regularized": reg,
        "regularized_correction_gap": reg.correction_gap(),
        "combined_tolerance": combined,
    });
    Ok(report)
}

#[derive(Serialize)]
struct MehlerRow {
    u: f64,
    v: f64,
    series: f64,
    kernel: f64,
    deviation: f64,
}

pub fn mehler(ctx: &mut RunContext, c: &Common) -> Result<Report> {
    let mut report = Report::new("mehler");
    let r = &mut ctx.resolver;
    let eps = r.get("eps", c.eps, 0.3)?;
    let nmax = r.get("nmax", c.nmax, 200usize)?;
    let radius = r.get("radius", c.radius, 2.0)?;
    let tol = r.get("tol", c.tol, 1e-8)?;
    let z = r.complex("z", c.z.clone(), "0.2+0.4i")?;
    let grid = real_pair_grid(-radius, radius, 41);
    let main = mehler_consistency(eps, &grid, nmax)?;
    let zero = mehler_consistency(0.0, &grid, nmax)?;
    report.check(
        "mehler_deviation",
        main.max_deviation <= tol,
        format!("{:e}", main.max_deviation),
    );
    report.check(
        "mehler_zero_eps",
        zero.max_deviation <= 1e-14,
        format!("{:e}", zero.max_deviation),
    );
    report.check(
        "mehler_symmetry",
        main.max_asymmetry == 0.0,
        format!("{:e}", main.max_asymmetry),
    );

    let config = HermiteConfig::standard(nmax, radius.max(1e-3))?;
    let rows: Vec<MehlerRow> = grid
        .iter()
        .map(|&(u, v)| {
            let series = config.mehler_series(eps, u, v, nmax)?.re;
            let kernel = mehler_kernel(eps, u, v)?.re;
            Ok(MehlerRow {
                u: u.re,
                v: v.re,
                series,
                kernel,
                deviation: (series - kernel).abs(),
            })
        })
        .collect::<zchaos_core::Result<_>>()?;
    write_rows_csv(ctx.artifact(&mut report, "mehler.csv")?, &rows)?;

    let identity = match mehler_identity_check(eps, z, nmax, 8) {
        Ok(rep) => {
            report.check(
                "mehler_identity",
                rep.deviation <= tol,
                format!("{:e}", rep.deviation),
            );
            json!(rep)
        }
        Err(zchaos_core::Error::EpsRegime { limit, .. }) => {
            json!({ "skipped": format!("eps = {eps} outside the regime |eps| < {limit} at z = {z}") })
        }
        Err(e) => return Err(e.into()),
    };
    report.results = json!({ "consistency": main, "zero_eps": zero, "identity": identity });
    Ok(report)
}

pub fn diverge(ctx: &mut RunContext, c: &Common) -> Result<Report> {
    let mut report = Report::new("diverge");
    let r = &mut ctx.resolver;
    let t = r.get("T", c.t, 1.0)?;
    let nmax = r.get("nmax", c.nmax, 400usize)?;
    let grid = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95];
    r.used.insert("eps_grid".into(), json!(grid));
    let rows = divergence_scan(t, &grid, nmax)?;
    let increasing = strictly_increasing(&rows);
    let bounded = rows.iter().all(|r| r.lower_bound_holds());
    let ratio = rows[9].partial_sum / rows[4].partial_sum;
    report.check(
        "strictly_increasing",
        increasing,
        "S(eps) not strictly increasing",
    );
    report.check(
        "lower_bound",
        bounded,
        "analytic lower bound exceeds S + allowance",
    );
    report.check(
        "growth_ratio",
        ratio >= 10.0,
        format!("S(0.95)/S(0.5) = {ratio:e}"),
    );
    write_rows_csv(ctx.artifact(&mut report, "diverge.csv")?, &rows)?;
    report.results = json!({ "T": t, "N": nmax, "ratio_095_05": ratio, "rows": rows });
    Ok(report)
}

pub fn simulate(ctx: &mut RunContext, c: &Common) -> Result<Report> {
    let mut report = Report::new("simulate");
    let plan = plan(ctx, c, 1.0, 1e-8, Some(256))?;
    let r = &mut ctx.resolver;
    let seed = r.get("seed", c.seed, 0u64)?;
    let samples = r.get("samples", c.samples, 1000usize)?;
    let grid_spec = r.get("grid", c.grid.clone(), "0.5,1".to_string())?;
    let grid: Vec<Complex64> = grid_spec
        .split(',')
        .map(parse_complex)
        .collect::<zchaos_core::Result<_>>()?;
    if grid.is_empty() {
        bail!("simulate needs at least one grid point");
    }
    report.seed = Some(seed);
    let proc = ChaosProcesses::new(plan)?;
    let table = proc.sample_paths(seed, &grid, samples)?;
    table.write_csv(ctx.artifact(&mut report, "simulate.csv")?)?;
    let finite = table
        .values
        .iter()
        .flatten()
        .all(|v| v.re.is_finite() && v.im.is_finite());
    report.check("finite_samples", finite, "non-finite sample values");

    let coeffs: Vec<Vec<Complex64>> = grid
        .iter()
        .map(|&z| proc.brownian_coefficients(z))
        .collect::<zchaos_core::Result<_>>()?;
    let mut covariance = Vec::new();
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            let truncated: Complex64 = coeffs[i].iter().zip(&coeffs[j]).map(|(a, b)| a * b).sum();
            covariance.push(json!({
                "i": i,
                "j": j,
                "empirical": table.empirical_covariance(i, j),
                "truncated_exact": truncated,
            }));
        }
    }
    report.results = json!({
        "plan": plan_json(proc.plan()),
        "samples": samples,
        "grid": grid,
        "means": (0..grid.len()).map(|i| table.empirical_mean(i)).collect::<Vec<_>>(),
        "covariance": covariance,
    });
    Ok(report)
}
