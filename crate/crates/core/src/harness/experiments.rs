//! Monte Carlo drivers. Every trial draws from its own stream
//! `trial_rng(seed, trial)`, and results are gathered in trial order, so the
//! output does not depend on the number of workers.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::config::{Experiment, ExperimentConfig};
use super::csv_out::{fmt_f64, fmt_opt_bool, write_csv, write_csv_path, CsvOptions, CsvRecord};
use super::exact::exact_singular;
use crate::arithmetic::{check_anticoncentration, AntiConcentrationParams};
use crate::matrix::RegularDigraphMatrix;
use crate::rerandom::{enumerate_extensions, extract_revealed, resample_conditional, EXTENSION_BUDGET};
use crate::sampler::{trial_rng, trial_seed, Sampler};
use crate::spectral::{restricted_smallest, smallest_singular_value};
use crate::stats::{binomial_half_width_99, chi_square_uniform_p_value, quantile, tv_from_uniform};
use crate::structures::{check_q_hr, QuasirandomParams, SplitMatchPair};
use crate::vectorclass::{is_compressible, l2};
use crate::{Error, Result};

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot build worker pool: {e}")))
}

/// Runs `trial(t, rng)` for `t in 0..trials` on the configured pool.
fn run_trials<T: Send>(
    cfg: &ExperimentConfig,
    trial: impl Fn(u64, &mut crate::sampler::TrialRng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    pool(cfg.threads)?.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| trial(t, &mut trial_rng(cfg.seed, t)))
            .collect()
    })
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// One sampled matrix in the `s_n` experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub seed: u64,
    pub s_min: f64,
    pub restricted_s_min: f64,
    pub exact_singular: bool,
    pub qhr_holds: Option<bool>,
    pub wall_time_ms: f64,
}

impl CsvRecord for TrialRecord {
    fn columns(opts: CsvOptions) -> Vec<&'static str> {
        let mut c = vec!["trial", "seed", "s_min", "restricted_s_min", "exact_singular", "qhr_holds"];
        if opts.timing {
            c.push("wall_time_ms");
        }
        c
    }

    fn values(&self, opts: CsvOptions) -> Vec<String> {
        let mut v = vec![
            self.trial_index.to_string(),
            self.seed.to_string(),
            fmt_f64(self.s_min),
            fmt_f64(self.restricted_s_min),
            self.exact_singular.to_string(),
            fmt_opt_bool(self.qhr_holds),
        ];
        if opts.timing {
            v.push(format!("{:.3}", self.wall_time_ms));
        }
        v
    }
}

/// `P̂[s_n ≤ κ]` for one `κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub n: usize,
    pub d: usize,
    pub kappa: f64,
    pub trials: u64,
    pub hits: u64,
    pub rate: f64,
    /// 99% Wilson half-width.
    pub half_width: f64,
    /// `rate/(κ√n)`; NaN at `κ = 0`.
    pub ratio: f64,
    /// `(rate + half_width)/(κ√n)`.
    pub ratio_upper: f64,
}

impl CsvRecord for TailRow {
    fn columns(_: CsvOptions) -> Vec<&'static str> {
        vec!["n", "d", "kappa", "trials", "hits", "rate", "half_width", "ratio", "ratio_upper"]
    }

    fn values(&self, _: CsvOptions) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.d.to_string(),
            fmt_f64(self.kappa),
            self.trials.to_string(),
            self.hits.to_string(),
            fmt_f64(self.rate),
            fmt_f64(self.half_width),
            fmt_f64(self.ratio),
            fmt_f64(self.ratio_upper),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnTailOutcome {
    pub trials: Vec<TrialRecord>,
    pub tail: Vec<TailRow>,
    /// Trials where `exact_singular` holds but `s_min` exceeds the threshold.
    pub singular_but_large: Vec<u64>,
    /// Trials with `s_min` at or below the threshold that are invertible.
    pub small_but_invertible: Vec<u64>,
}

/// `P̂[s_n(A) ≤ κ]` over the κ grid. At `κ = 0` the event is exact
/// singularity; for `κ > 0` it is `s_min ≤ κ` or exact singularity.
pub fn run_sn_tail(cfg: &ExperimentConfig) -> Result<SnTailOutcome> {
    cfg.validate()?;
    let sampler = Sampler::new(cfg.sampler())?;
    let trials = run_trials(cfg, |t, rng| {
        let start = Instant::now();
        let a = sampler.draw(rng)?;
        let dm = a.to_dmatrix();
        Ok(TrialRecord {
            trial_index: t,
            seed: trial_seed(cfg.seed, t),
            s_min: smallest_singular_value(&dm),
            restricted_s_min: restricted_smallest(&dm)?,
            exact_singular: exact_singular(&a),
            qhr_holds: None,
            wall_time_ms: elapsed_ms(start),
        })
    })?;
    let threshold = cfg.params.singular_threshold;
    let singular_but_large =
        trials.iter().filter(|r| r.exact_singular && r.s_min > threshold).map(|r| r.trial_index).collect();
    let small_but_invertible =
        trials.iter().filter(|r| !r.exact_singular && r.s_min <= threshold).map(|r| r.trial_index).collect();
    let tail = tail_rows(cfg, &trials);
    Ok(SnTailOutcome { trials, tail, singular_but_large, small_but_invertible })
}

fn tail_rows(cfg: &ExperimentConfig, trials: &[TrialRecord]) -> Vec<TailRow> {
    let total = trials.len() as u64;
    let root_n = (cfg.n as f64).sqrt();
    cfg.kappa_grid
        .iter()
        .map(|&kappa| {
            let hits = trials.iter().filter(|r| r.exact_singular || (kappa > 0.0 && r.s_min <= kappa)).count() as u64;
            let rate = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
            let half_width = binomial_half_width_99(hits, total);
            let (ratio, ratio_upper) = if kappa > 0.0 {
                (rate / (kappa * root_n), (rate + half_width) / (kappa * root_n))
            } else {
                (f64::NAN, f64::NAN)
            };
            TailRow { n: cfg.n, d: cfg.d, kappa, trials: total, hits, rate, half_width, ratio, ratio_upper }
        })
        .collect()
}

/// `‖Ax‖₂/√n` for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct NormRecord {
    pub trial_index: u64,
    pub seed: u64,
    pub value: f64,
}

impl CsvRecord for NormRecord {
    fn columns(_: CsvOptions) -> Vec<&'static str> {
        vec!["trial", "seed", "value"]
    }

    fn values(&self, _: CsvOptions) -> Vec<String> {
        vec![self.trial_index.to_string(), self.seed.to_string(), fmt_f64(self.value)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleVectorOutcome {
    pub records: Vec<NormRecord>,
    pub min: f64,
    /// 1% quantile (nearest rank).
    pub q01: f64,
}

/// The alternating unit sum-zero vector `(1, −1, 1, …)/√n` for even `n`.
pub fn alternating_vector(n: usize) -> Vec<f64> {
    let r = 1.0 / (n as f64).sqrt();
    (0..n).map(|i| if i % 2 == 0 { r } else { -r }).collect()
}

/// Distribution of `‖Ax‖₂/√n` for a fixed unit sum-zero `x`.
pub fn run_single_vector(cfg: &ExperimentConfig, x: &[f64]) -> Result<SingleVectorOutcome> {
    cfg.validate()?;
    if x.len() != cfg.n {
        return Err(Error::invalid(format!("x has length {}, expected n = {}", x.len(), cfg.n)));
    }
    if (l2(x) - 1.0).abs() > 1e-9 || x.iter().sum::<f64>().abs() > 1e-9 {
        return Err(Error::invalid("x must be a unit sum-zero vector"));
    }
    let sampler = Sampler::new(cfg.sampler())?;
    let root_n = (cfg.n as f64).sqrt();
    let records = run_trials(cfg, |t, rng| {
        let a = sampler.draw(rng)?;
        Ok(NormRecord { trial_index: t, seed: trial_seed(cfg.seed, t), value: l2(&a.mul_vec(x)) / root_n })
    })?;
    let values: Vec<f64> = records.iter().map(|r| r.value).collect();
    let (min, q01) = if values.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (values.iter().copied().fold(f64::INFINITY, f64::min), quantile(&values, 0.01))
    };
    Ok(SingleVectorOutcome { records, min, q01 })
}

/// Compressible unit sum-zero vectors: a Gaussian vector on a random support
/// of at most `⌊δn⌋` coordinates, centered, perturbed by noise of norm about
/// `ρ/4`, normalized, and kept only if it is still compressible.
pub fn compressible_corpus<R: Rng + ?Sized>(n: usize, delta: f64, rho: f64, size: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let k_max = (delta * n as f64).floor() as usize;
    if k_max < 2 {
        return Err(Error::invalid(format!("⌊δn⌋ = {k_max} is too small for sum-zero sparse vectors")));
    }
    let mut out = Vec::with_capacity(size);
    let mut attempts = 0;
    while out.len() < size {
        attempts += 1;
        if attempts > 100 * size.max(1) {
            return Err(Error::invalid("could not generate compressible vectors with these (δ, ρ)"));
        }
        let k = rng.random_range(2..=k_max);
        let mut v = vec![0.0; n];
        for i in rand::seq::index::sample(rng, n, k).iter() {
            v[i] = standard_normal(rng);
        }
        let norm = l2(&v);
        if norm == 0.0 {
            continue;
        }
        let noise_scale = rho / 4.0 / (n as f64).sqrt();
        for x in v.iter_mut() {
            *x = *x / norm + noise_scale * standard_normal(rng);
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        let norm = l2(&v);
        v.iter_mut().for_each(|x| *x /= norm);
        if is_compressible(&v, delta, rho) {
            out.push(v);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressibleRecord {
    pub trial_index: u64,
    pub seed: u64,
    /// `min ‖Ax‖₂/√n` over the corpus.
    pub min_ratio: f64,
    pub below: bool,
}

impl CsvRecord for CompressibleRecord {
    fn columns(_: CsvOptions) -> Vec<&'static str> {
        vec!["trial", "seed", "min_ratio", "below_c"]
    }

    fn values(&self, _: CsvOptions) -> Vec<String> {
        vec![self.trial_index.to_string(), self.seed.to_string(), fmt_f64(self.min_ratio), self.below.to_string()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressibleOutcome {
    pub records: Vec<CompressibleRecord>,
    /// Fraction of trials with `min ‖Ax‖₂ < c√n`.
    pub rate: f64,
}

pub fn run_compressible(cfg: &ExperimentConfig) -> Result<CompressibleOutcome> {
    cfg.validate()?;
    let sampler = Sampler::new(cfg.sampler())?;
    let p = &cfg.params;
    let root_n = (cfg.n as f64).sqrt();
    let records = run_trials(cfg, |t, rng| {
        let a = sampler.draw(rng)?;
        let corpus = compressible_corpus(cfg.n, p.delta, p.rho, cfg.corpus_size, rng)?;
        let min_ratio = corpus.iter().map(|x| l2(&a.mul_vec(x)) / root_n).fold(f64::INFINITY, f64::min);
        Ok(CompressibleRecord { trial_index: t, seed: trial_seed(cfg.seed, t), min_ratio, below: min_ratio < p.c_threshold })
    })?;
    let rate = records.iter().filter(|r| r.below).count() as f64 / records.len().max(1) as f64;
    Ok(CompressibleOutcome { records, rate })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasirandomRecord {
    pub trial_index: u64,
    pub seed: u64,
    pub holds: bool,
    pub p1: bool,
    pub p2: bool,
    pub p3: bool,
    /// Largest `|⋂ S^c|` seen.
    pub p1_extreme: f64,
    /// Smallest intersection seen across the family.
    pub p2_extreme: f64,
    /// Largest `|ω| − min(…)/6` across the family.
    pub p3_extreme: f64,
    pub p1_examined: u64,
    pub p2_examined: u64,
}

impl CsvRecord for QuasirandomRecord {
    fn columns(_: CsvOptions) -> Vec<&'static str> {
        vec!["trial", "seed", "holds", "p1", "p2", "p3", "p1_extreme", "p2_extreme", "p3_extreme", "p1_examined", "p2_examined"]
    }

    fn values(&self, _: CsvOptions) -> Vec<String> {
        vec![
            self.trial_index.to_string(),
            self.seed.to_string(),
            self.holds.to_string(),
            self.p1.to_string(),
            self.p2.to_string(),
            self.p3.to_string(),
            fmt_f64(self.p1_extreme),
            fmt_f64(self.p2_extreme),
            fmt_f64(self.p3_extreme),
            self.p1_examined.to_string(),
            self.p2_examined.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasirandomOutcome {
    pub records: Vec<QuasirandomRecord>,
    /// Fractions of samples where `Q_{h,R}`, (P1), (P2), (P3) held.
    pub frequency: f64,
    pub p1_frequency: f64,
    pub p2_frequency: f64,
    pub p3_frequency: f64,
}

/// Frequency of `Q_{h,R}` with `λ = d/n` and `family_size` random half-sets
/// drawn per sample.
pub fn run_quasirandom(cfg: &ExperimentConfig) -> Result<QuasirandomOutcome> {
    cfg.validate()?;
    let sampler = Sampler::new(cfg.sampler())?;
    let p = &cfg.params;
    let records = run_trials(cfg, |t, rng| {
        let a = sampler.draw(rng)?;
        let family = (0..cfg.family_size).map(|_| SplitMatchPair::random(cfg.n, rng).s).collect();
        let params = QuasirandomParams { h: p.h, lambda: cfg.lambda(), family, budget: p.check_budget };
        let r = check_q_hr(&a, &params, rng)?;
        Ok(QuasirandomRecord {
            trial_index: t,
            seed: trial_seed(cfg.seed, t),
            holds: r.holds,
            p1: r.q_h.holds,
            p2: r.per_set.iter().all(|(q, _)| q.holds),
            p3: r.per_set.iter().all(|(_, q)| q.holds),
            p1_extreme: r.q_h.extreme,
            p2_extreme: r.per_set.iter().map(|(q, _)| q.extreme).fold(f64::INFINITY, f64::min),
            p3_extreme: r.per_set.iter().map(|(_, q)| q.extreme).fold(f64::NEG_INFINITY, f64::max),
            p1_examined: r.q_h.examined,
            p2_examined: r.per_set.iter().map(|(q, _)| q.examined).min().unwrap_or(0),
        })
    })?;
    let freq = |f: &dyn Fn(&QuasirandomRecord) -> bool| {
        records.iter().filter(|r| f(r)).count() as f64 / records.len().max(1) as f64
    };
    Ok(QuasirandomOutcome {
        frequency: freq(&|r| r.holds),
        p1_frequency: freq(&|r| r.p1),
        p2_frequency: freq(&|r| r.p2),
        p3_frequency: freq(&|r| r.p3),
        records,
    })
}

/// Count of one extension in the uniformity experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionCount {
    pub index: usize,
    pub count: u32,
    pub expected: f64,
}

impl CsvRecord for ExtensionCount {
    fn columns(_: CsvOptions) -> Vec<&'static str> {
        vec!["extension", "count", "expected"]
    }

    fn values(&self, _: CsvOptions) -> Vec<String> {
        vec![self.index.to_string(), self.count.to_string(), fmt_f64(self.expected)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResampleRecord {
    pub trial_index: u64,
    pub seed: u64,
    pub valid: bool,
    pub preserved: bool,
}

impl CsvRecord for ResampleRecord {
    fn columns(_: CsvOptions) -> Vec<&'static str> {
        vec!["trial", "seed", "valid", "preserved"]
    }

    fn values(&self, _: CsvOptions) -> Vec<String> {
        vec![self.trial_index.to_string(), self.seed.to_string(), self.valid.to_string(), self.preserved.to_string()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RerandomOutcome {
    /// Resampler draws from one fixed matrix, tallied over every extension of
    /// its revealed information.
    Uniformity { fixture: RegularDigraphMatrix, counts: Vec<ExtensionCount>, p_value: f64, tv: f64 },
    /// Resamples of fresh matrices checked for membership and preserved information.
    Validity { records: Vec<ResampleRecord>, valid_rate: f64 },
}

/// Picks the matrix and pair with the most extensions among 64 seeded
/// attempts whose free positions fit the enumeration budget.
pub fn uniformity_fixture(
    cfg: &ExperimentConfig,
) -> Result<Option<(RegularDigraphMatrix, SplitMatchPair, Vec<RegularDigraphMatrix>)>> {
    let sampler = Sampler::new(cfg.sampler())?;
    let mut best: Option<(RegularDigraphMatrix, SplitMatchPair, Vec<RegularDigraphMatrix>)> = None;
    for attempt in 0..64 {
        let mut rng = trial_rng(cfg.seed, attempt);
        let a = sampler.draw(&mut rng)?;
        let pair = SplitMatchPair::random(cfg.n, &mut rng);
        let rev = extract_revealed(&a, &pair)?;
        if rev.free_positions() > EXTENSION_BUDGET {
            continue;
        }
        let ext = enumerate_extensions(&rev)?;
        if best.as_ref().is_none_or(|b| ext.len() > b.2.len()) {
            best = Some((a, pair, ext));
        }
    }
    Ok(best)
}

/// Uniformity against enumerated extensions when the fiber is enumerable
/// (`n ≤ 8`), otherwise validity of `trials` resamples.
pub fn run_rerandom_uniformity(cfg: &ExperimentConfig) -> Result<RerandomOutcome> {
    cfg.validate()?;
    if cfg.n <= 8 {
        if let Some((a, pair, ext)) = uniformity_fixture(cfg)? {
            let index: HashMap<&RegularDigraphMatrix, usize> = ext.iter().enumerate().map(|(i, m)| (m, i)).collect();
            let mut counts = vec![0u32; ext.len()];
            let mut rng = trial_rng(cfg.seed, u64::MAX);
            for _ in 0..cfg.trials {
                let b = resample_conditional(&a, &pair, &mut rng)?;
                let i = *index.get(&b).ok_or_else(|| Error::Indeterminate("resample outside the enumerated fiber".into()))?;
                counts[i] += 1;
            }
            let expected = cfg.trials as f64 / ext.len() as f64;
            return Ok(RerandomOutcome::Uniformity {
                fixture: a,
                p_value: chi_square_uniform_p_value(&counts),
                tv: tv_from_uniform(&counts),
                counts: counts.iter().enumerate().map(|(index, &count)| ExtensionCount { index, count, expected }).collect(),
            });
        }
    }
    let sampler = Sampler::new(cfg.sampler())?;
    let records = run_trials(cfg, |t, rng| {
        let a = sampler.draw(rng)?;
        let pair = SplitMatchPair::random(cfg.n, rng);
        let b = resample_conditional(&a, &pair, rng)?;
        Ok(ResampleRecord {
            trial_index: t,
            seed: trial_seed(cfg.seed, t),
            valid: RegularDigraphMatrix::validate(&b.to_dense(), cfg.d).is_ok(),
            preserved: extract_revealed(&b, &pair)? == extract_revealed(&a, &pair)?,
        })
    })?;
    let valid_rate = records.iter().filter(|r| r.valid && r.preserved).count() as f64 / records.len().max(1) as f64;
    Ok(RerandomOutcome::Validity { records, valid_rate })
}

/// One anti-concentration scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiConcentrationRow {
    pub scenario: &'static str,
    pub n: usize,
    pub t: usize,
    pub epsilon: f64,
    pub applicable: bool,
    pub empirical: f64,
    pub half_width: f64,
    pub clcd: f64,
    pub clcd_term: f64,
    pub exp_term: f64,
    pub fitted_c: f64,
}

impl CsvRecord for AntiConcentrationRow {
    fn columns(_: CsvOptions) -> Vec<&'static str> {
        vec!["scenario", "n", "t", "epsilon", "applicable", "empirical", "half_width", "clcd", "clcd_term", "exp_term", "fitted_c"]
    }

    fn values(&self, _: CsvOptions) -> Vec<String> {
        vec![
            self.scenario.to_string(),
            self.n.to_string(),
            self.t.to_string(),
            fmt_f64(self.epsilon),
            self.applicable.to_string(),
            fmt_f64(self.empirical),
            fmt_f64(self.half_width),
            fmt_f64(self.clcd),
            fmt_f64(self.clcd_term),
            fmt_f64(self.exp_term),
            fmt_f64(self.fitted_c),
        ]
    }
}

/// `(1, …, 1, −1, …, −1)/√N`: the most lattice-like unit sum-zero vector.
pub fn structured_vector(n: usize) -> Vec<f64> {
    let r = 1.0 / (n as f64).sqrt();
    (0..n).map(|i| if i < n / 2 { r } else { -r }).collect()
}

/// A Gaussian vector projected to `1^⊥` and normalized.
pub fn generic_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
    let mean = v.iter().sum::<f64>() / n as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    let norm = l2(&v);
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Fitted anti-concentration constants for structured and generic vectors
/// over `dims × epsilon_grid`, with `t = N/2` and `α = alpha_fraction·N`.
pub fn run_clcd_suite(cfg: &ExperimentConfig) -> Result<Vec<AntiConcentrationRow>> {
    cfg.validate()?;
    let p = &cfg.params;
    let mut rows = Vec::new();
    for (k, &n) in cfg.dims.iter().enumerate() {
        let mut rng = trial_rng(cfg.seed, k as u64);
        let generic = generic_vector(n, &mut rng);
        for (scenario, v) in [("structured", structured_vector(n)), ("generic", generic)] {
            let params = AntiConcentrationParams {
                alpha: p.alpha_fraction * n as f64,
                gamma: p.gamma,
                a: p.a,
                theta_max: p.theta_max,
                samples: cfg.samples,
            };
            for &eps in &cfg.epsilon_grid {
                let r = check_anticoncentration(&v, n / 2, eps, &params, &mut rng)?;
                rows.push(AntiConcentrationRow {
                    scenario,
                    n,
                    t: n / 2,
                    epsilon: eps,
                    applicable: r.applicable,
                    empirical: r.empirical.estimate,
                    half_width: r.empirical.half_width,
                    clcd: r.clcd,
                    clcd_term: r.clcd_term,
                    exp_term: r.exp_term,
                    fitted_c: r.fitted_c,
                });
            }
        }
    }
    Ok(rows)
}

fn emit<R: CsvRecord>(records: &[R], opts: CsvOptions, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => write_csv_path(records, opts, p),
        None => write_csv(records, opts, std::io::stdout().lock()),
    }
}

/// `<stem>.<suffix>.csv` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

/// Runs `cfg.experiment` and writes its CSV to `cfg.output` (stdout when
/// unset). Per-trial records of the tail experiments go to a sibling
/// `<stem>.trials.csv` when an output path is given. Returns summary lines.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<String>> {
    let opts = CsvOptions { timing: cfg.timing };
    let out = cfg.output.as_deref();
    let mut summary = Vec::new();
    match cfg.experiment {
        Experiment::Singularity | Experiment::SnTail => {
            let mut cfg = cfg.clone();
            if cfg.experiment == Experiment::Singularity {
                cfg.kappa_grid = vec![0.0];
            }
            let o = run_sn_tail(&cfg)?;
            emit(&o.tail, opts, out)?;
            if let Some(p) = out {
                write_csv_path(&o.trials, opts, &sibling(p, "trials"))?;
            }
            for r in &o.tail {
                summary.push(format!("kappa = {}: rate {} ± {} (ratio {})", r.kappa, r.rate, r.half_width, r.ratio));
            }
            summary.push(format!(
                "cross-oracle: {} singular with s_min above threshold, {} invertible at or below it",
                o.singular_but_large.len(),
                o.small_but_invertible.len()
            ));
        }
        Experiment::SingleVector => {
            let x = cfg.vector.clone().unwrap_or_else(|| alternating_vector(cfg.n));
            let o = run_single_vector(cfg, &x)?;
            emit(&o.records, opts, out)?;
            summary.push(format!("min {} , 1% quantile {}", o.min, o.q01));
        }
        Experiment::Compressible => {
            let o = run_compressible(cfg)?;
            emit(&o.records, opts, out)?;
            summary.push(format!("rate below c = {}: {}", cfg.params.c_threshold, o.rate));
        }
        Experiment::Quasirandom => {
            let o = run_quasirandom(cfg)?;
            emit(&o.records, opts, out)?;
            summary.push(format!(
                "Q_hR {} (P1 {}, P2 {}, P3 {})",
                o.frequency, o.p1_frequency, o.p2_frequency, o.p3_frequency
            ));
        }
        Experiment::RerandomUniformity => match run_rerandom_uniformity(cfg)? {
            RerandomOutcome::Uniformity { counts, p_value, tv, .. } => {
                emit(&counts, opts, out)?;
                summary.push(format!("{} extensions, chi-square p {p_value}, TV {tv}", counts.len()));
            }
            RerandomOutcome::Validity { records, valid_rate } => {
                emit(&records, opts, out)?;
                summary.push(format!("validity rate {valid_rate}"));
            }
        },
        Experiment::ClcdSuite => {
            let rows = run_clcd_suite(cfg)?;
            emit(&rows, opts, out)?;
            let c = rows.iter().filter(|r| r.applicable).map(|r| r.fitted_c).fold(0.0, f64::max);
            summary.push(format!("max fitted constant {c}"));
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(experiment: &str, n: usize, d: usize, trials: u64) -> ExperimentConfig {
        ExperimentConfig::parse(&format!("experiment = {experiment}\nn = {n}\nd = {d}\ntrials = {trials}\nseed = 3")).unwrap()
    }

    #[test]
    fn tail_is_monotone_and_reproducible() {
        let cfg = small("sn-tail", 8, 3, 200);
        let a = run_sn_tail(&cfg).unwrap();
        let b = run_sn_tail(&cfg).unwrap();
        let key = |o: &SnTailOutcome| o.trials.iter().map(|r| (r.s_min.to_bits(), r.exact_singular)).collect::<Vec<_>>();
        assert_eq!(key(&a), key(&b));
        assert!(a.tail.windows(2).all(|w| w[0].hits <= w[1].hits));
        assert!(a.singular_but_large.is_empty());
        // κ = 0 column is the exact singularity rate.
        assert_eq!(a.tail[0].hits, a.trials.iter().filter(|r| r.exact_singular).count() as u64);
    }

    #[test]
    fn single_vector_complement_point_mass() {
        // d = n − 1: A = J − P, so ‖Ax‖₂ = 1 on the sum-zero sphere.
        let cfg = small("single-vector", 10, 9, 50);
        let out = run_single_vector(&cfg, &alternating_vector(10)).unwrap();
        for r in &out.records {
            assert!((r.value * 10f64.sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn corpus_is_compressible() {
        let mut rng = trial_rng(1, 0);
        let corpus = compressible_corpus(60, 0.2, 0.2, 30, &mut rng).unwrap();
        assert_eq!(corpus.len(), 30);
        for v in &corpus {
            assert!(is_compressible(v, 0.2, 0.2));
            assert!(v.iter().sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn byte_identical_output() {
        let dir = std::env::temp_dir().join(format!("regdigraph-repro-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mut cfg = small("sn-tail", 10, 3, 40);
        let mut read = |name: &str, threads: usize| {
            cfg.output = Some(dir.join(name));
            cfg.threads = threads;
            run_experiment(&cfg).unwrap();
            std::fs::read(dir.join(name)).unwrap()
        };
        assert_eq!(read("a.csv", 1), read("b.csv", 3));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn rerandom_modes() {
        let cfg = small("rerandom-uniformity", 4, 2, 2000);
        match run_rerandom_uniformity(&cfg).unwrap() {
            RerandomOutcome::Uniformity { counts, .. } => {
                assert!(counts.len() >= 2);
                assert_eq!(counts.iter().map(|c| c.count as u64).sum::<u64>(), 2000);
            }
            other => panic!("expected uniformity mode, got {other:?}"),
        }
        let cfg = small("rerandom-uniformity", 30, 7, 20);
        match run_rerandom_uniformity(&cfg).unwrap() {
            RerandomOutcome::Validity { valid_rate, .. } => assert_eq!(valid_rate, 1.0),
            other => panic!("expected validity mode, got {other:?}"),
        }
    }
}
