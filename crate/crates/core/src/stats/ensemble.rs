use super::fields::{error_field, inner_product, lateness_field, MassField};
use super::normality::{normality_report, NormalityReport, Summary, MIN_NORMALITY_SAMPLES};
use super::test_functions::NamedTest;
use crate::error::{Error, Result};
use crate::growth::{run_idla, run_sandpile, stabilize, GrowthHistory, IdlaOptions, SandpileHistory, EXCESS_TOL};
use crate::lattice::{MassDistribution, Site};
use crate::rng::run_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub m: u32,
    pub s: f64,
    pub seeds: usize,
    pub base_seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    /// Also sample the lateness field; needs the step-by-step sandpile.
    pub lateness: bool,
    #[serde(skip)]
    pub idla: IdlaOptions,
}

impl EnsembleConfig {
    pub fn new(m: u32, s: f64, seeds: usize) -> Self {
        EnsembleConfig { m, s, seeds, base_seed: 0, workers: 0, lateness: false, idla: IdlaOptions::default() }
    }
}

/// The deterministic half of every pair: the source sequence and one sandpile.
#[derive(Debug, Clone)]
pub struct Reference {
    pub m: u32,
    pub s: f64,
    pub steps: usize,
    pub initial: Vec<Site>,
    pub sources: Vec<Site>,
    pub pile: SandpileHistory,
    pub mass: MassField,
}

impl Reference {
    /// Builds the sandpile at `floor(m^2 s)`, step by step when `incremental`.
    pub fn build(md: &MassDistribution, m: u32, s: f64, incremental: bool) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidResolution(m));
        }
        md.check_time(s)?;
        let seq = md.source_sequence(m)?;
        let steps = md.steps_at(m, s, seq.len());
        let initial = md.initial_sites(m)?;
        let sources: Vec<Site> = seq[..steps].iter().map(|p| p.site).collect();
        let pile = if incremental {
            run_sandpile(&initial, &sources, m, &[])?
        } else {
            let nu = stabilize(&md.sigma_discrete(m, steps)?, EXCESS_TOL)?;
            SandpileHistory { m, steps, mass: nu, accumulator: None, checkpoints: Vec::new() }
        };
        let mass = MassField::new(pile.mass.clone());
        Ok(Reference { m, s, steps, initial, sources, pile, mass })
    }

    pub fn run(&self, seed: u64, opts: IdlaOptions) -> Result<GrowthHistory> {
        run_idla(&self.initial, &self.sources, self.m, seed, opts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSample {
    pub index: usize,
    pub seed: u64,
    /// `(E, u)` per registered test function.
    pub e: Vec<f64>,
    /// `(L, u)` per registered test function, when sampled.
    pub l: Vec<f64>,
    /// `|(E, 1)|`, zero up to rounding.
    pub conservation_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestStatistics {
    pub id: String,
    pub e: Summary,
    pub e_normality: Option<NormalityReport>,
    pub l: Option<Summary>,
    pub l_normality: Option<NormalityReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleResult<T = ()> {
    pub m: u32,
    pub s: f64,
    pub steps: usize,
    pub test_ids: Vec<String>,
    pub samples: Vec<SeedSample>,
    /// Per-seed extra observations, aligned with `samples`.
    pub extras: Vec<T>,
    /// `(index, seed, reason)` of runs that failed a guard.
    pub excluded: Vec<(usize, u64, String)>,
    pub stats: Vec<TestStatistics>,
}

impl<T> EnsembleResult<T> {
    pub fn e_samples(&self, test: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.e[test]).collect()
    }

    pub fn l_samples(&self, test: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.l[test]).collect()
    }

    /// Seed manifest `(index, seed)` of the included runs.
    pub fn manifest(&self) -> Vec<(usize, u64)> {
        self.samples.iter().map(|s| (s.index, s.seed)).collect()
    }
}

fn describe(x: &[f64]) -> Result<(Summary, Option<NormalityReport>)> {
    let s = Summary::of(x)?;
    let n = if x.len() >= MIN_NORMALITY_SAMPLES { Some(normality_report(x)?) } else { None };
    Ok((s, n))
}

pub fn run_ensemble(cfg: &EnsembleConfig, md: &MassDistribution, tests: &[NamedTest]) -> Result<EnsembleResult> {
    let reference = Reference::build(md, cfg.m, cfg.s, cfg.lateness)?;
    run_ensemble_with(cfg, &reference, tests, |_, _| Ok(()))
}

/// Paired runs against a prepared reference; `observe` records extra
/// per-seed data from each accepted run.
pub fn run_ensemble_with<T: Send>(
    cfg: &EnsembleConfig,
    reference: &Reference,
    tests: &[NamedTest],
    observe: impl Fn(&GrowthHistory, &Reference) -> Result<T> + Sync,
) -> Result<EnsembleResult<T>> {
    if cfg.seeds < 2 {
        return Err(Error::TooFewSamples { got: cfg.seeds, need: 2 });
    }
    if cfg.lateness && reference.pile.accumulator.is_none() {
        return Err(Error::Unsupported("lateness sampling needs a step-by-step sandpile".into()));
    }
    let one_seed = |index: usize| -> (usize, u64, Result<(SeedSample, T)>) {
        let seed = run_seed(cfg.base_seed, index as u64);
        let out = (|| {
            let run = reference.run(seed, cfg.idla)?;
            if run.containment_hit() {
                return Err(Error::Containment);
            }
            let ef = error_field(&run, &reference.mass, reference.steps);
            let residual = ef.values.iter().map(|v| v.1).sum::<f64>().abs() / (cfg.m as f64).powi(2);
            let e = tests.iter().map(|t| inner_product(&ef, &t.function)).collect();
            let l = if cfg.lateness {
                let lf = lateness_field(&run, &reference.pile, reference.steps)?;
                tests.iter().map(|t| inner_product(&lf, &t.function)).collect()
            } else {
                Vec::new()
            };
            let extra = observe(&run, reference)?;
            Ok((SeedSample { index, seed, e, l, conservation_residual: residual }, extra))
        })();
        (index, seed, out)
    };
    let results: Vec<_> = if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Unsupported(e.to_string()))?;
        pool.install(|| (0..cfg.seeds).into_par_iter().map(one_seed).collect())
    } else {
        (0..cfg.seeds).into_par_iter().map(one_seed).collect()
    };
    let mut samples = Vec::with_capacity(cfg.seeds);
    let mut extras = Vec::with_capacity(cfg.seeds);
    let mut excluded = Vec::new();
    for (index, seed, r) in results {
        match r {
            Ok((s, x)) => {
                samples.push(s);
                extras.push(x);
            }
            Err(e) => excluded.push((index, seed, e.to_string())),
        }
    }
    let mut res = EnsembleResult {
        m: cfg.m,
        s: cfg.s,
        steps: reference.steps,
        test_ids: tests.iter().map(|t| t.id.clone()).collect(),
        samples,
        extras,
        excluded,
        stats: Vec::new(),
    };
    if res.samples.len() >= 2 {
        for (k, t) in tests.iter().enumerate() {
            let (e, e_normality) = describe(&res.e_samples(k))?;
            let (l, l_normality) = if cfg.lateness {
                let (a, b) = describe(&res.l_samples(k))?;
                (Some(a), b)
            } else {
                (None, None)
            };
            res.stats.push(TestStatistics { id: t.id.clone(), e, e_normality, l, l_normality });
        }
    }
    Ok(res)
}
