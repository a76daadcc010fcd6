use super::config::{builtin_tests, ExperimentConfig};
use super::output::{config_hash, field_text, num, opt, snapshot_text, svg_polar_map, svg_sites, unix_seconds, Csv, RunDir, RunManifest, SeedStatus};
use crate::error::{Error, Result};
use crate::growth::{smash_sum, IdlaOptions, SUPPORT_TOL};
use crate::lattice::{lattice_points, DiskFlow, Flow, MassDistribution, NumericFlow, Region, Site};
use crate::rng::run_seed;
use crate::stats::{
    bootstrap_se_variance, fluctuation_report, run_ensemble, sandpile_fluctuation, EnsembleConfig, FluctuationReport, NamedTest,
    Reference, Summary, TestFunction,
};
use crate::theory::{g_disk_closed, variance_fixed_time, variance_lateness, LatenessForm, TheoryValue};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// Fluctuation band exponent: `eps_m = C m^{-3/5}`.
pub const BAND_EXPONENT: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    Simulate,
    VerifyVariance,
    VerifyLateness,
    ScalingStudy,
    CorrelationMap,
    SmashDemo,
}

impl Verb {
    pub const ALL: [Verb; 6] =
        [Verb::Simulate, Verb::VerifyVariance, Verb::VerifyLateness, Verb::ScalingStudy, Verb::CorrelationMap, Verb::SmashDemo];

    pub fn name(self) -> &'static str {
        match self {
            Verb::Simulate => "simulate",
            Verb::VerifyVariance => "verify-variance",
            Verb::VerifyLateness => "verify-lateness",
            Verb::ScalingStudy => "scaling-study",
            Verb::CorrelationMap => "correlation-map",
            Verb::SmashDemo => "smash-demo",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Verb::ALL
            .into_iter()
            .find(|v| v.name() == name)
            .ok_or_else(|| Error::Config { field: "verb".into(), message: format!("unknown verb {name:?}") })
    }
}

/// Result of one command: where it wrote and whether its checks passed.
#[derive(Debug, Clone)]
pub struct CommandOutcome {
    pub dir: PathBuf,
    pub passed: bool,
    pub manifest: RunManifest,
    /// Human-readable summary, one check per line.
    pub lines: Vec<String>,
}

struct Ctx {
    verb: Verb,
    cfg: ExperimentConfig,
    md: MassDistribution,
    s: f64,
    dir: RunDir,
    seeds: Vec<SeedStatus>,
    eps_constant: Option<f64>,
    lines: Vec<String>,
    started: u64,
}

impl Ctx {
    fn check(&mut self, ok: bool, what: String) -> bool {
        self.lines.push(format!("{} {what}", if ok { "PASS" } else { "FAIL" }));
        ok
    }

    fn finish(mut self, passed: bool) -> Result<CommandOutcome> {
        let manifest = RunManifest {
            verb: self.verb.name().into(),
            config_hash: self.dir.hash.clone(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config: self.cfg,
            seeds: self.seeds,
            eps_constant: self.eps_constant,
            passed,
            started: self.started,
            finished: unix_seconds(),
            files: self.dir.files().to_vec(),
        };
        self.dir.write_manifest(&manifest)?;
        Ok(CommandOutcome { dir: self.dir.path.clone(), passed, manifest, lines: self.lines })
    }
}

/// Validates `cfg` and runs `verb` into a fresh run directory.
pub fn run_command(verb: Verb, cfg: &ExperimentConfig) -> Result<CommandOutcome> {
    cfg.validate()?;
    let md = cfg.mass_distribution()?;
    let s = cfg.time()?;
    let hash = config_hash(verb.name(), cfg);
    let dir = RunDir::create(&cfg.output.dir, verb.name(), &hash)?;
    let ctx = Ctx {
        verb,
        cfg: cfg.clone(),
        md,
        s,
        dir,
        seeds: Vec::new(),
        eps_constant: None,
        lines: Vec::new(),
        started: unix_seconds(),
    };
    let workers = cfg.run.workers;
    in_pool(workers, move || match verb {
        Verb::Simulate => simulate(ctx),
        Verb::VerifyVariance => verify(ctx, false),
        Verb::VerifyLateness => verify(ctx, true),
        Verb::ScalingStudy => scaling_study(ctx),
        Verb::CorrelationMap => correlation_map(ctx),
        Verb::SmashDemo => smash_demo(ctx),
    })?
}

/// Re-runs the command recorded in a manifest (file or run directory),
/// optionally into another output root.
pub fn replay(manifest: &Path, output: Option<&Path>) -> Result<CommandOutcome> {
    let m = RunManifest::load(manifest)?;
    let verb = Verb::parse(&m.verb)?;
    let mut cfg = m.config;
    if let Some(o) = output {
        cfg.output.dir = o.to_path_buf();
    }
    run_command(verb, &cfg)
}

fn in_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| Error::Unsupported(e.to_string()))?;
    Ok(pool.install(f))
}

fn flow_for(md: &MassDistribution, m: u32) -> Box<dyn Flow> {
    if md.is_disk_preset() {
        Box::new(DiskFlow)
    } else {
        Box::new(NumericFlow::new(md.clone(), (2 * m).max(64)))
    }
}

struct IdlaRun {
    index: usize,
    seed: u64,
    report: Result<FluctuationReport>,
    occupied: Option<Vec<Site>>,
}

/// `seeds` IDLA runs at one resolution, measured against the flow at `s`.
fn idla_fluctuations(reference: &Reference, flow: &dyn Flow, base_seed: u64, seeds: usize, keep: usize) -> Vec<IdlaRun> {
    (0..seeds)
        .into_par_iter()
        .map(|index| {
            let seed = run_seed(base_seed, index as u64);
            let mut occupied = None;
            let report = reference.run(seed, IdlaOptions::default()).and_then(|run| {
                if run.containment_hit() {
                    return Err(Error::Containment);
                }
                let set = run.occupied_set(reference.steps);
                let r = fluctuation_report(&set, reference.m, flow, reference.s);
                if index < keep {
                    occupied = Some(set);
                }
                Ok(r)
            });
            IdlaRun { index, seed, report, occupied }
        })
        .collect()
}

fn status(m: u32, run: &IdlaRun) -> SeedStatus {
    SeedStatus {
        m,
        index: run.index,
        seed: run.seed,
        status: match &run.report {
            Ok(_) => "ok".into(),
            Err(e) => e.to_string(),
        },
    }
}

fn sandpile_sites(reference: &Reference) -> Vec<(Site, f64)> {
    reference.pile.mass.iter().filter(|&(_, v)| v > SUPPORT_TOL).collect()
}

fn simulate(mut ctx: Ctx) -> Result<CommandOutcome> {
    let mut table = Csv::new(&["process", "m", "s", "run", "seed", "inner_deficit", "outer_excess", "max_fluctuation", "tentacle"]);
    let keep = ctx.cfg.output.snapshots;
    let mut all_ok = true;
    for &m in ctx.cfg.resolutions()?.to_vec().iter() {
        let reference = Reference::build(&ctx.md, m, ctx.s, false)?;
        let flow = flow_for(&ctx.md, m);
        let sp = sandpile_fluctuation(&reference.pile.mass, m, flow.as_ref(), ctx.s);
        table.push(fluct_row("sandpile", m, ctx.s, "", "", &sp));
        let nu = sandpile_sites(&reference);
        ctx.dir.write(&format!("snapshots/sandpile-m{m}.txt"), &field_text(m, reference.steps, &nu))?;
        let runs = idla_fluctuations(&reference, flow.as_ref(), ctx.cfg.run.base_seed, ctx.cfg.run.seeds, keep);
        for r in &runs {
            ctx.seeds.push(status(m, r));
            if let Ok(rep) = &r.report {
                table.push(fluct_row("idla", m, ctx.s, &r.index.to_string(), &r.seed.to_string(), rep));
            }
            if let Some(set) = &r.occupied {
                ctx.dir.write(&format!("snapshots/idla-m{m}-run{}.txt", r.index), &snapshot_text(m, reference.steps, set))?;
                if ctx.cfg.output.svg {
                    let full: Vec<Site> = nu.iter().filter(|p| p.1 >= 1.0 - 1e-9).map(|p| p.0).collect();
                    let svg = svg_sites(m, &[(set, "#1f4e9c"), (&full, "#f2c14e")]);
                    ctx.dir.write(&format!("snapshots/idla-m{m}-run{}.svg", r.index), &svg)?;
                }
            }
        }
        let ok = runs.iter().filter(|r| r.report.is_ok()).count();
        all_ok &= ctx.check(ok > 0, format!("m={m}: {ok}/{} IDLA runs, sandpile max fluctuation {:.4}", runs.len(), sp.max_fluctuation()));
    }
    ctx.dir.write_csv("fluctuation.csv", &table)?;
    ctx.finish(all_ok)
}

fn fluct_row(process: &str, m: u32, s: f64, run: &str, seed: &str, r: &FluctuationReport) -> Vec<String> {
    vec![
        process.into(),
        m.to_string(),
        num(s),
        run.into(),
        seed.into(),
        num(r.inner_deficit),
        num(r.outer_excess),
        num(r.max_fluctuation()),
        opt(r.tentacle),
    ]
}

/// Defaults for `verify-variance`: the constant and two harmonic polynomials.
fn variance_defaults() -> Vec<NamedTest> {
    let b = builtin_tests();
    b.into_iter().filter(|t| ["one", "x", "x2_minus_y2"].contains(&t.id.as_str())).collect()
}

/// Default for `verify-lateness`: the bump at radius 1.2.
fn lateness_defaults() -> Vec<NamedTest> {
    builtin_tests().into_iter().filter(|t| t.id == "bump_1.2").collect()
}

/// Lateness oracle; the ordered-time form when its support condition holds.
pub fn lateness_oracle(u: &TestFunction, s: f64, md: &MassDistribution) -> Result<TheoryValue> {
    match variance_lateness(u, s, md, LatenessForm::Ordered) {
        Err(Error::SupportNotContained) => variance_lateness(u, s, md, LatenessForm::General),
        r => r,
    }
}

/// `(var - theory) / se`; differences at rounding level count as zero.
pub fn z_score(var: f64, theory: f64, se: f64) -> f64 {
    let d = var - theory;
    if d.abs() <= 1e-12 * theory.abs().max(1.0) {
        0.0
    } else if se > 0.0 {
        d / se
    } else {
        d.signum() * f64::INFINITY
    }
}

fn verify(mut ctx: Ctx, lateness_only: bool) -> Result<CommandOutcome> {
    let defaults = if lateness_only { lateness_defaults() } else { variance_defaults() };
    let tests = ctx.cfg.tests_or(defaults);
    let fields: Vec<&str> = if lateness_only {
        vec!["L"]
    } else if ctx.cfg.run.lateness {
        vec!["E", "L"]
    } else {
        vec!["E"]
    };
    let mut theory: HashMap<(&str, usize), TheoryValue> = HashMap::new();
    for &f in &fields {
        for (k, t) in tests.iter().enumerate() {
            let v = if f == "E" { variance_fixed_time(&t.function, ctx.s, &ctx.md)? } else { lateness_oracle(&t.function, ctx.s, &ctx.md)? };
            theory.insert((f, k), v);
        }
    }
    let mut samples = Csv::new(&["seed", "m", "s", "test_function_id", "E_inner", "L_inner"]);
    let mut stats = Csv::new(&[
        "m", "s", "test_function_id", "field", "n", "mean", "var", "se", "skew", "kurt", "ks_stat", "ks_p", "theory_var",
        "theory_err", "var_se", "z_score",
    ]);
    let tol = ctx.cfg.tolerances.clone();
    let mut all_ok = true;
    for &m in ctx.cfg.resolutions()?.to_vec().iter() {
        let mut ec = EnsembleConfig::new(m, ctx.s, ctx.cfg.run.seeds.max(2));
        ec.base_seed = ctx.cfg.run.base_seed;
        ec.lateness = fields.contains(&"L");
        let res = run_ensemble(&ec, &ctx.md, &tests)?;
        for smp in &res.samples {
            ctx.seeds.push(SeedStatus { m, index: smp.index, seed: smp.seed, status: "ok".into() });
        }
        for (index, seed, why) in &res.excluded {
            ctx.seeds.push(SeedStatus { m, index: *index, seed: *seed, status: why.clone() });
        }
        for smp in &res.samples {
            for (k, t) in tests.iter().enumerate() {
                let l = smp.l.get(k).map(|&v| num(v)).unwrap_or_default();
                samples.push(vec![smp.seed.to_string(), m.to_string(), num(ctx.s), t.id.clone(), num(smp.e[k]), l]);
            }
        }
        for &f in &fields {
            for (k, t) in tests.iter().enumerate() {
                let x = if f == "E" { res.e_samples(k) } else { res.l_samples(k) };
                let sum = Summary::of(&x)?;
                let st = &res.stats[k];
                let norm = if f == "E" { &st.e_normality } else { &st.l_normality };
                let th = theory[&(f, k)];
                let se = bootstrap_se_variance(&x, tol.bootstrap_resamples, run_seed(ctx.cfg.run.base_seed, k as u64));
                let z = z_score(sum.var, th.value, se);
                stats.push(vec![
                    m.to_string(),
                    num(ctx.s),
                    t.id.clone(),
                    f.into(),
                    sum.n.to_string(),
                    num(sum.mean),
                    num(sum.var),
                    num(sum.se),
                    num(sum.skew),
                    num(sum.excess_kurtosis),
                    opt(norm.as_ref().map(|n| n.ks_stat)),
                    opt(norm.as_ref().map(|n| n.ks_p)),
                    num(th.value),
                    num(th.error_estimate),
                    num(se),
                    num(z),
                ]);
                let ks = norm.as_ref().map_or(String::new(), |n| format!(", KS p {:.3}", n.ks_p));
                all_ok &= ctx.check(
                    z.abs() <= tol.z_max,
                    format!("m={m} {f} {}: var {:.5} vs theory {:.5}, z {:.2}{ks}", t.id, sum.var, th.value, z),
                );
            }
        }
    }
    ctx.dir.write_csv("samples.csv", &samples)?;
    ctx.dir.write_csv("stats.csv", &stats)?;
    ctx.finish(all_ok)
}

/// Least-squares slope and intercept of `log y` against `log x`.
pub fn log_log_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `C` with `C m^{-3/5} = value` at resolution `m`.
pub fn fit_band_constant(m: u32, value: f64) -> f64 {
    value * (m as f64).powf(BAND_EXPONENT)
}

fn within_bound(value: f64, c: f64, m: u32) -> bool {
    value <= c * (m as f64).powf(-BAND_EXPONENT) * (1.0 + 1e-12)
}

fn scaling_study(mut ctx: Ctx) -> Result<CommandOutcome> {
    let mut ms = ctx.cfg.resolutions()?.to_vec();
    ms.sort_unstable();
    ms.dedup();
    if ms.len() < 3 {
        return Err(Error::Config { field: "resolution".into(), message: "scaling-study needs at least three distinct m".into() });
    }
    let mut sand = Vec::new();
    let mut idla: Vec<Vec<f64>> = Vec::new();
    let mut idla_inner_outer = Vec::new();
    for &m in &ms {
        let reference = Reference::build(&ctx.md, m, ctx.s, false)?;
        let flow = flow_for(&ctx.md, m);
        sand.push(sandpile_fluctuation(&reference.pile.mass, m, flow.as_ref(), ctx.s));
        let runs = idla_fluctuations(&reference, flow.as_ref(), ctx.cfg.run.base_seed, ctx.cfg.run.seeds, 0);
        let mut v = Vec::new();
        let (mut inner, mut outer) = (0.0f64, 0.0f64);
        for r in &runs {
            ctx.seeds.push(status(m, r));
            if let Ok(rep) = &r.report {
                v.push(rep.max_fluctuation());
                inner = inner.max(rep.inner_deficit);
                outer = outer.max(rep.outer_excess);
            }
        }
        idla.push(v);
        idla_inner_outer.push((inner, outer));
    }
    let m0 = ms[0];
    let c_sand = fit_band_constant(m0, sand[0].max_fluctuation());
    let idla_max: Vec<f64> = idla.iter().map(|v| v.iter().copied().fold(0.0, f64::max)).collect();
    let c_idla = fit_band_constant(m0, idla_max[0]);
    ctx.eps_constant = Some(c_sand.max(c_idla));

    let mut table = Csv::new(&["m", "process", "runs", "max_inner", "max_outer", "max_fluctuation", "bound", "violations"]);
    let mut idla_violations = 0;
    let mut idla_total = 0;
    for (i, &m) in ms.iter().enumerate() {
        let b = sand[i];
        let ok = within_bound(b.max_fluctuation(), c_sand, m);
        table.push(vec![
            m.to_string(),
            "sandpile".into(),
            "1".into(),
            num(b.inner_deficit),
            num(b.outer_excess),
            num(b.max_fluctuation()),
            num(c_sand * (m as f64).powf(-BAND_EXPONENT)),
            (!ok as u32).to_string(),
        ]);
        let viol = idla[i].iter().filter(|&&f| !within_bound(f, c_idla, m)).count();
        idla_violations += viol;
        idla_total += idla[i].len();
        table.push(vec![
            m.to_string(),
            "idla".into(),
            idla[i].len().to_string(),
            num(idla_inner_outer[i].0),
            num(idla_inner_outer[i].1),
            num(idla_max[i]),
            num(c_idla * (m as f64).powf(-BAND_EXPONENT)),
            viol.to_string(),
        ]);
    }
    let sand_pts: Vec<(f64, f64)> = ms.iter().zip(&sand).map(|(&m, r)| (m as f64, r.max_fluctuation())).collect();
    let idla_pts: Vec<(f64, f64)> = ms.iter().zip(&idla_max).map(|(&m, &f)| (m as f64, f)).collect();
    let (ss, si) = log_log_fit(&sand_pts);
    let (is, ii) = log_log_fit(&idla_pts);
    let mut slopes = Csv::new(&["process", "slope", "prefactor", "band_constant"]);
    slopes.push(vec!["sandpile".into(), num(ss), num(si.exp()), num(c_sand)]);
    slopes.push(vec!["idla".into(), num(is), num(ii.exp()), num(c_idla)]);
    ctx.dir.write_csv("scaling.csv", &table)?;
    ctx.dir.write_csv("slopes.csv", &slopes)?;

    let tol = ctx.cfg.tolerances.clone();
    let mut ok = true;
    let decreasing = sand_pts.windows(2).all(|w| w[1].1 < w[0].1);
    ok &= ctx.check(decreasing, format!("sandpile fluctuation decreasing in m: {:?}", sand_pts.iter().map(|p| p.1).collect::<Vec<_>>()));
    let bounded = ms.iter().zip(&sand).all(|(&m, r)| within_bound(r.max_fluctuation(), c_sand, m));
    ok &= ctx.check(bounded, format!("sandpile within C m^(-3/5), C = {c_sand:.4}"));
    ok &= ctx.check(ss <= tol.slope_max, format!("sandpile log-log slope {ss:.3} <= {}", tol.slope_max));
    let never_doubles = sand_pts.windows(2).all(|w| w[1].1 < 2.0 * w[0].1) && idla_pts.windows(2).all(|w| w[1].1 < 2.0 * w[0].1);
    ok &= ctx.check(never_doubles, "increasing m never doubles the fluctuation".into());
    let frac = idla_violations as f64 / idla_total.max(1) as f64;
    ok &= ctx.check(
        idla_total > 0 && frac <= tol.violation_max,
        format!("IDLA within C m^(-3/5), C = {c_idla:.4}: {idla_violations}/{idla_total} violations, slope {is:.3}"),
    );
    ctx.finish(ok)
}

/// Grid of `p` for the correlation map: cell centres in `(1, sqrt 2) x [-pi, pi)`.
pub fn correlation_grid(radial: usize, angular: usize) -> Vec<[f64; 2]> {
    let mut g = Vec::with_capacity(radial * angular);
    for i in 0..radial {
        let r = 1.0 + (2f64.sqrt() - 1.0) * (i as f64 + 0.5) / radial as f64;
        for j in 0..angular {
            let th = -PI + 2.0 * PI * j as f64 / angular as f64;
            g.push([r, th]);
        }
    }
    g
}

fn correlation_map(mut ctx: Ctx) -> Result<CommandOutcome> {
    if !ctx.md.is_disk_preset() {
        return Err(Error::Unsupported("the correlation map needs the disk preset".into()));
    }
    let c = ctx.cfg.correlation.clone();
    let rq = c.q[0].hypot(c.q[1]);
    if !(rq > 1.0 && rq < 2f64.sqrt()) {
        return Err(Error::Config { field: "correlation.q".into(), message: format!("|q| = {rq} is outside the annulus (1, sqrt 2)") });
    }
    let mut polar = correlation_grid(c.radial, c.angular);
    polar.extend(c.points.iter().map(|p| [p[0].hypot(p[1]), p[1].atan2(p[0])]));
    let cells: Vec<(f64, f64, std::result::Result<f64, &'static str>)> = polar
        .par_iter()
        .map(|&[r, th]| {
            let p = [r * th.cos(), r * th.sin()];
            let v = match g_disk_closed(p, c.q) {
                Ok(v) => Ok(v.value),
                Err(Error::SingularQuery { .. }) => Err("singular"),
                Err(_) => Err("outside"),
            };
            (r, th, v)
        })
        .collect();
    let mut table = Csv::new(&["r_p", "theta_p", "g", "status"]);
    for (r, th, v) in &cells {
        match v {
            Ok(g) => table.push(vec![num(*r), num(*th), num(*g), "ok".into()]),
            Err(why) => table.push(vec![num(*r), num(*th), String::new(), (*why).into()]),
        }
    }
    ctx.dir.write_csv("correlation.csv", &table)?;
    if ctx.cfg.output.svg {
        let grid: Vec<(f64, f64, Option<f64>)> = cells[..c.radial * c.angular].iter().map(|(r, t, v)| (*r, *t, v.ok())).collect();
        let svg = svg_polar_map(&grid, (2f64.sqrt() - 1.0) / c.radial as f64, 2.0 * PI / c.angular as f64);
        ctx.dir.write("correlation.svg", &svg)?;
    }
    let ok_cells = cells.iter().filter(|c| c.2.is_ok()).count();
    let singular = cells.iter().filter(|c| c.2 == Err("singular")).count();
    let passed = ctx.check(ok_cells > 0, format!("{ok_cells} cells evaluated, {singular} flagged singular"));
    ctx.finish(passed)
}

fn smash_demo(mut ctx: Ctx) -> Result<CommandOutcome> {
    let sc = ctx.cfg.smash.clone();
    let (h, o) = (sc.half_width, sc.offset);
    let mut table = Csv::new(&["m", "run", "seed", "a", "b", "overlap", "result", "moved"]);
    let mut ok = true;
    for &m in ctx.cfg.resolutions()?.to_vec().iter() {
        let a = lattice_points(&Region::Rect { min: [-o - h, -h], max: [-o + h, h] }, m)?;
        let b = lattice_points(&Region::Rect { min: [o - h, -h], max: [o + h, h] }, m)?;
        let sa: std::collections::HashSet<Site> = a.iter().copied().collect();
        let inter: Vec<Site> = b.iter().copied().filter(|q| sa.contains(q)).collect();
        let base = ctx.cfg.run.base_seed;
        let runs: Vec<(usize, u64, Result<Vec<Site>>)> = (0..ctx.cfg.run.seeds)
            .into_par_iter()
            .map(|i| {
                let seed = run_seed(base, i as u64);
                let r = smash_sum(&a, &b, m, seed, IdlaOptions::default()).map(|h| h.occupied_set(h.steps()));
                (i, seed, r)
            })
            .collect();
        for (i, seed, r) in runs {
            let status = match &r {
                Ok(_) => "ok".to_string(),
                Err(e) => e.to_string(),
            };
            ctx.seeds.push(SeedStatus { m, index: i, seed, status });
            let set = r?;
            table.push(vec![
                m.to_string(),
                i.to_string(),
                seed.to_string(),
                a.len().to_string(),
                b.len().to_string(),
                inter.len().to_string(),
                set.len().to_string(),
                inter.len().to_string(),
            ]);
            ok &= ctx.check(set.len() == a.len() + b.len(), format!("m={m} run {i}: |A (+) B| = {} = |A| + |B|", set.len()));
            if i < ctx.cfg.output.snapshots {
                ctx.dir.write(&format!("snapshots/smash-m{m}-run{i}.txt"), &snapshot_text(m, inter.len(), &set))?;
                if ctx.cfg.output.svg {
                    let union: Vec<Site> = a.iter().chain(b.iter()).copied().collect();
                    let svg = svg_sites(m, &[(&set, "#f2c14e"), (&union, "#3b6fb6"), (&inter, "#14285a")]);
                    ctx.dir.write(&format!("snapshots/smash-m{m}-run{i}.svg"), &svg)?;
                }
            }
        }
    }
    ctx.dir.write_csv("smash.csv", &table)?;
    ctx.finish(ok)
}
