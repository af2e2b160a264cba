//! Seeded benchmark experiments.
//!
//! Trial `t` of a run with base seed `s` uses image seed `s + t`, so every
//! method and every noise level sees the same attitudes and boresights.
//! Work items run on the current rayon pool; results are collected in item
//! order, which keeps the CSV output independent of the worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use starid_core::identify::{first_query, identify, Method, MethodConfig, Outcome};
use starid_core::synth::sample_image;
use starid_core::{CatalogStore, NoiseSpec, StarLabel, SyntheticImage};

use crate::Error;

/// A method with its verification stage switched on or off. Tags of the
/// unverified pyramid variants carry a `-N` suffix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variant {
    pub method: Method,
    pub verification: bool,
}

impl Variant {
    pub fn new(method: Method) -> Self {
        Variant { method, verification: true }
    }

    pub fn unverified(method: Method) -> Self {
        Variant { method, verification: false }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.verification {
            write!(f, "{}", self.method)
        } else {
            write!(f, "{}-N", self.method)
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Usage(format!("unknown method `{s}`"));
        match s.strip_suffix("-N").or_else(|| s.strip_suffix("-n")) {
            Some(m) => Ok(Variant::unverified(m.parse().map_err(|_| bad())?)),
            None => Ok(Variant::new(s.parse().map_err(|_| bad())?)),
        }
    }
}

/// Optional replacements for the tuned per-method settings.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub sigma_theta: Option<f64>,
    pub sigma_phi: Option<f64>,
    pub sigma_a: Option<f64>,
    pub sigma_tau: Option<f64>,
    pub sigma_o: Option<f64>,
    pub access_limit: Option<u32>,
}

impl Overrides {
    pub fn config(&self, variant: Variant, psi: f64) -> MethodConfig {
        let base = MethodConfig::for_method(variant.method);
        MethodConfig {
            sigma_theta: self.sigma_theta.unwrap_or(base.sigma_theta),
            sigma_phi: self.sigma_phi.unwrap_or(base.sigma_phi),
            sigma_a: self.sigma_a.unwrap_or(base.sigma_a),
            sigma_tau: self.sigma_tau.unwrap_or(base.sigma_tau),
            sigma_o: self.sigma_o.unwrap_or(base.sigma_o),
            access_limit: self.access_limit.unwrap_or(base.access_limit),
            psi,
            verification: variant.verification,
            ..base
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub trials: usize,
    pub seed: u64,
    /// Field of view, degrees.
    pub psi: f64,
    /// Fields with fewer catalog stars are resampled.
    pub min_stars: usize,
    pub overrides: Overrides,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { trials: 200, seed: 1, psi: starid_core::DEFAULT_PSI_MAX, min_stars: 4, overrides: Overrides::default() }
    }
}

impl BenchConfig {
    pub fn trial_seed(&self, t: usize) -> u64 {
        self.seed.wrapping_add(t as u64)
    }

    pub fn image(&self, store: &CatalogStore, noise: NoiseSpec, t: usize) -> Result<SyntheticImage, Error> {
        Ok(sample_image(store, self.psi, noise, self.min_stars, self.trial_seed(t))?)
    }
}

/// Catalog ids behind image indices; `None` if any index is a spike.
fn truth(img: &SyntheticImage, b: &[usize]) -> Option<Vec<u32>> {
    b.iter()
        .map(|&i| match img.labels[i] {
            StarLabel::Catalog(id) => Some(id),
            StarLabel::Spike => None,
        })
        .collect()
}

fn same_set(a: &[u32], b: &[u32]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

/// One identification trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub method: String,
    pub rho: f64,
    pub omega: usize,
    pub seed: u64,
    pub outcome: Outcome,
    /// Every pair of the returned mapping agrees with the truth labels.
    pub h_correct: bool,
    /// The selected catalog tuple is the true one for the final subset.
    pub r_correct: bool,
    pub acc_query: u32,
    pub acc_total: u32,
    pub ms: f64,
}

pub const TRIAL_COLUMNS: [&str; 10] =
    ["method", "rho", "omega", "seed", "outcome", "h_correct", "r_correct", "acc_query", "acc_total", "ms"];

pub fn run_trial(store: &CatalogStore, img: &SyntheticImage, variant: Variant, cfg: &MethodConfig, noise: NoiseSpec) -> TrialRecord {
    let start = Instant::now();
    let res = identify(variant.method, &img.stars, store, cfg);
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let identified = res.outcome == Outcome::Identified;
    let h_correct =
        identified && !res.h.is_empty() && res.h.pairs.iter().all(|&(i, id)| img.labels[i] == StarLabel::Catalog(id));
    let r_correct = identified && truth(img, &res.b).is_some_and(|t| same_set(&t, &res.r));
    TrialRecord {
        method: variant.to_string(),
        rho: noise.rho,
        omega: noise.omega,
        seed: img.seed,
        outcome: res.outcome,
        h_correct,
        r_correct,
        acc_query: res.accesses_query,
        acc_total: res.accesses_total,
        ms,
    }
}

/// Full identification of every variant on `trials` images per noise level.
pub fn run_end_to_end(
    store: &CatalogStore,
    variants: &[Variant],
    noise: &[NoiseSpec],
    cfg: &BenchConfig,
) -> Result<Vec<TrialRecord>, Error> {
    let configs: Vec<MethodConfig> = variants.iter().map(|v| cfg.overrides.config(*v, cfg.psi)).collect();
    for c in &configs {
        c.validate()?;
    }
    let items: Vec<(NoiseSpec, usize)> = noise.iter().flat_map(|n| (0..cfg.trials).map(move |t| (*n, t))).collect();
    let batches: Vec<Result<Vec<TrialRecord>, Error>> = items
        .par_iter()
        .map(|&(n, t)| {
            let img = cfg.image(store, n, t)?;
            Ok(variants.iter().zip(&configs).map(|(v, c)| run_trial(store, &img, *v, c, n)).collect())
        })
        .collect();
    let mut out = Vec::with_capacity(items.len() * variants.len());
    for b in batches {
        out.extend(b?);
    }
    Ok(out)
}

pub fn gaussian_grid() -> Vec<NoiseSpec> {
    (1..=6).rev().map(|e| NoiseSpec { rho: 10f64.powi(-e), omega: 0 }).collect()
}

pub fn spike_grid() -> Vec<NoiseSpec> {
    [0, 3, 6, 9, 12].into_iter().map(|omega| NoiseSpec { rho: 0.0, omega }).collect()
}

pub fn verification_grid() -> Vec<NoiseSpec> {
    [0.0, 1e-6, 1e-3].into_iter().map(|rho| NoiseSpec { rho, omega: 0 }).collect()
}

pub fn verification_variants() -> Vec<Variant> {
    vec![
        Variant::new(Method::Pyramid),
        Variant::unverified(Method::Pyramid),
        Variant::new(Method::CompositePyramid),
        Variant::unverified(Method::CompositePyramid),
    ]
}

/// One query step on a noiseless image.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    pub method: String,
    pub seed: u64,
    pub candidates: usize,
    pub truth_in_r: bool,
    pub accesses: u32,
    pub ms: f64,
}

pub const QUERY_COLUMNS: [&str; 6] = ["method", "seed", "candidates", "truth_in_r", "accesses", "ms"];

pub fn run_query_experiment(store: &CatalogStore, methods: &[Method], cfg: &BenchConfig) -> Result<Vec<QueryRecord>, Error> {
    let configs: Vec<MethodConfig> = methods.iter().map(|m| cfg.overrides.config(Variant::new(*m), cfg.psi)).collect();
    let batches: Vec<Result<Vec<QueryRecord>, Error>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let img = cfg.image(store, NoiseSpec::default(), t)?;
            let mut out = Vec::new();
            for (m, c) in methods.iter().zip(&configs) {
                let start = Instant::now();
                let Some(q) = first_query(*m, &img.stars, store, c) else { continue };
                let ms = start.elapsed().as_secs_f64() * 1e3;
                let truth_in_r = truth(&img, &q.b).is_some_and(|t| q.candidates.iter().any(|r| same_set(r, &t)));
                out.push(QueryRecord {
                    method: m.to_string(),
                    seed: img.seed,
                    candidates: q.candidates.len(),
                    truth_in_r,
                    accesses: q.accesses,
                    ms,
                });
            }
            Ok(out)
        })
        .collect();
    let mut out = Vec::new();
    for b in batches {
        out.extend(b?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryStats {
    pub method: String,
    pub n: usize,
    /// Fraction of steps whose candidate set holds the true tuple.
    pub f: f64,
    /// Steps with exactly one candidate.
    pub s: usize,
    pub mean_ms: f64,
}

/// Per-method summary in first-seen order. `f` and `mean_ms` are zero when
/// a method has no records.
pub fn query_stats(records: &[QueryRecord]) -> Vec<QueryStats> {
    let mut order: Vec<String> = Vec::new();
    let mut acc: BTreeMap<String, (usize, usize, usize, f64)> = BTreeMap::new();
    for r in records {
        if !acc.contains_key(&r.method) {
            order.push(r.method.clone());
        }
        let e = acc.entry(r.method.clone()).or_default();
        e.0 += 1;
        e.1 += r.truth_in_r as usize;
        e.2 += (r.candidates == 1) as usize;
        e.3 += r.ms;
    }
    order
        .into_iter()
        .map(|m| {
            let (n, hits, s, ms) = acc[&m];
            let nf = n.max(1) as f64;
            QueryStats { method: m, n, f: hits as f64 / nf, s, mean_ms: ms / nf }
        })
        .collect()
}

/// A trial of the pivot experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotRecord {
    pub method: String,
    pub seed: u64,
    /// The first subset's query already had a single candidate.
    pub first_unique: bool,
    pub outcome: Outcome,
    /// Query accesses spent until a single candidate tuple was in hand;
    /// absent when the run never got one.
    pub acc_to_r: Option<u32>,
    pub acc_query: u32,
    pub acc_total: u32,
    pub ms: f64,
}

pub const PIVOT_COLUMNS: [&str; 8] =
    ["method", "seed", "first_unique", "outcome", "acc_to_r", "acc_query", "acc_total", "ms"];

pub const PIVOT_RHO: f64 = 1e-4;

pub fn pivot_methods() -> Vec<Method> {
    vec![Method::SphericalTriangle, Method::PlanarTriangle, Method::CompositePyramid]
}

pub fn run_pivot_experiment(store: &CatalogStore, methods: &[Method], rho: f64, cfg: &BenchConfig) -> Result<Vec<PivotRecord>, Error> {
    let configs: Vec<MethodConfig> = methods.iter().map(|m| cfg.overrides.config(Variant::new(*m), cfg.psi)).collect();
    let noise = NoiseSpec { rho, omega: 0 };
    let batches: Vec<Result<Vec<PivotRecord>, Error>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let img = cfg.image(store, noise, t)?;
            Ok(methods
                .iter()
                .zip(&configs)
                .map(|(m, c)| {
                    let start = Instant::now();
                    let res = identify(*m, &img.stars, store, c);
                    PivotRecord {
                        method: m.to_string(),
                        seed: img.seed,
                        first_unique: res.first_query_unique.unwrap_or(false),
                        outcome: res.outcome,
                        acc_to_r: res.accesses_to_r,
                        acc_query: res.accesses_query,
                        acc_total: res.accesses_total,
                        ms: start.elapsed().as_secs_f64() * 1e3,
                    }
                })
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for b in batches {
        out.extend(b?);
    }
    Ok(out)
}

/// Per-method means over the trials whose first query was ambiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotStats {
    pub method: String,
    /// Trials whose first query was ambiguous.
    pub n: usize,
    /// Of those, trials that obtained a single candidate tuple at all.
    pub n_obtained: usize,
    /// Mean accesses to obtain `r`, over the `n_obtained` trials.
    pub mean_acc_to_r: f64,
    /// Mean query accesses of the whole run, over the `n` trials.
    pub mean_acc_query: f64,
}

pub fn pivot_stats(records: &[PivotRecord]) -> Vec<PivotStats> {
    let mut order: Vec<String> = Vec::new();
    let mut acc: BTreeMap<String, (usize, u64, usize, u64)> = BTreeMap::new();
    for r in records {
        if !acc.contains_key(&r.method) {
            order.push(r.method.clone());
        }
        let e = acc.entry(r.method.clone()).or_default();
        if !r.first_unique {
            e.0 += 1;
            e.1 += r.acc_query as u64;
            if let Some(a) = r.acc_to_r {
                e.2 += 1;
                e.3 += a as u64;
            }
        }
    }
    let mean = |sum: u64, n: usize| if n == 0 { 0.0 } else { sum as f64 / n as f64 };
    order
        .into_iter()
        .map(|m| {
            let (n, q, n_obtained, to_r) = acc[&m];
            PivotStats { method: m, n, n_obtained, mean_acc_to_r: mean(to_r, n_obtained), mean_acc_query: mean(q, n) }
        })
        .collect()
}

/// Deviation grid of the tuning search: 1e-16 through 1e1.
pub fn sigma_grid() -> Vec<f64> {
    (-16..=1).map(|e| 10f64.powi(e)).collect()
}

pub const TUNE_STEPS: usize = 30;

/// Unique-candidate count of one deviation set. `sigma2` is absent for
/// methods with a single deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneRecord {
    pub method: String,
    pub sigma1: f64,
    pub sigma2: Option<f64>,
    pub unique: usize,
}

pub const TUNE_COLUMNS: [&str; 4] = ["method", "sigma1", "sigma2", "unique"];

/// Names of the deviations a method's query uses.
pub fn tuned_parameters(method: Method) -> &'static [&'static str] {
    match method {
        Method::Angle | Method::Pyramid => &["sigma_theta"],
        Method::InteriorAngle => &["sigma_theta", "sigma_phi"],
        _ => &["sigma_a", "sigma_tau"],
    }
}

fn with_sigmas(method: Method, base: MethodConfig, s1: f64, s2: Option<f64>) -> MethodConfig {
    match method {
        Method::Angle | Method::Pyramid => MethodConfig { sigma_theta: s1, ..base },
        Method::InteriorAngle => MethodConfig { sigma_theta: s1, sigma_phi: s2.unwrap_or(s1), ..base },
        _ => MethodConfig { sigma_a: s1, sigma_tau: s2.unwrap_or(s1), ..base },
    }
}

/// Grid search over deviation sets. Every set is scored by the number of
/// single-candidate first queries over `steps` noiseless images.
pub fn tune_sigma(
    store: &CatalogStore,
    method: Method,
    grid: &[f64],
    steps: usize,
    cfg: &BenchConfig,
) -> Result<Vec<TuneRecord>, Error> {
    let images: Vec<SyntheticImage> = (0..steps).map(|t| cfg.image(store, NoiseSpec::default(), t)).collect::<Result<_, _>>()?;
    let base = cfg.overrides.config(Variant::new(method), cfg.psi);
    let sets: Vec<(f64, Option<f64>)> = if tuned_parameters(method).len() == 1 {
        grid.iter().map(|s| (*s, None)).collect()
    } else {
        grid.iter().flat_map(|a| grid.iter().map(move |b| (*a, Some(*b)))).collect()
    };
    Ok(sets
        .par_iter()
        .map(|&(s1, s2)| {
            let c = with_sigmas(method, base, s1, s2);
            let unique = images
                .iter()
                .filter(|img| first_query(method, &img.stars, store, &c).is_some_and(|q| q.candidates.len() == 1))
                .count();
            TuneRecord { method: method.to_string(), sigma1: s1, sigma2: s2, unique }
        })
        .collect())
}

/// The set with the most unique queries; ties go to the larger first
/// deviation, then the larger second.
pub fn best_sigma(records: &[TuneRecord]) -> Option<&TuneRecord> {
    records.iter().max_by(|a, b| {
        a.unique
            .cmp(&b.unique)
            .then(a.sigma1.total_cmp(&b.sigma1))
            .then(a.sigma2.unwrap_or(0.0).total_cmp(&b.sigma2.unwrap_or(0.0)))
    })
}
