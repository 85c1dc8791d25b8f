//! Flat `key = value` experiment configuration.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::sampler::{default_burn_in, Method, SamplerConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Singularity,
    SnTail,
    Quasirandom,
    SingleVector,
    Compressible,
    RerandomUniformity,
    ClcdSuite,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Singularity,
        Experiment::SnTail,
        Experiment::Quasirandom,
        Experiment::SingleVector,
        Experiment::Compressible,
        Experiment::RerandomUniformity,
        Experiment::ClcdSuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Singularity => "singularity",
            Experiment::SnTail => "sn-tail",
            Experiment::Quasirandom => "quasirandom",
            Experiment::SingleVector => "single-vector",
            Experiment::Compressible => "compressible",
            Experiment::RerandomUniformity => "rerandom-uniformity",
            Experiment::ClcdSuite => "clcd-suite",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown experiment {s:?}")))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Constants shared by the drivers. Names follow the parameter chain
/// `μ ≪ γ ≪ η, 1/Q ≪ ν ≪ δ, ρ ≪ λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPack {
    pub delta: f64,
    pub rho: f64,
    pub delta_prime: f64,
    pub rho_prime: f64,
    pub nu: [f64; 3],
    pub gamma: f64,
    pub alpha: f64,
    pub mu: f64,
    pub q: usize,
    pub eta: f64,
    pub h: usize,
    /// Hypothesis constant of the anti-concentration check.
    pub a: f64,
    /// Relative residual accepted from the SVD.
    pub svd_tol: f64,
    /// `s_min` at or below which a matrix is called numerically singular.
    pub singular_threshold: f64,
    /// Tuples examined per quasirandomness check before sampling.
    pub check_budget: u64,
    /// Threshold `c` for `min ‖Ax‖₂/√n` in the compressible experiment.
    pub c_threshold: f64,
    /// `α = alpha_fraction·N` in the anti-concentration scenarios.
    pub alpha_fraction: f64,
    /// CLCD search ceiling.
    pub theta_max: f64,
}

impl Default for ParamPack {
    fn default() -> Self {
        Self {
            delta: 0.2,
            rho: 0.2,
            delta_prime: 0.01,
            rho_prime: 0.01,
            nu: [0.15, 0.18, 3.0],
            gamma: 0.01,
            alpha: 25.0,
            mu: 0.001,
            q: 9,
            eta: 0.03,
            h: 3,
            a: 0.25,
            svd_tol: 1e-10,
            singular_threshold: 1e-6,
            check_budget: 100_000,
            c_threshold: 0.05,
            alpha_fraction: 0.25,
            theta_max: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub d: usize,
    pub trials: u64,
    pub kappa_grid: Vec<f64>,
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub method: Method,
    /// Switch-chain steps per draw; `None` means `20·n·d`.
    pub burn_in: Option<u64>,
    pub params: ParamPack,
    /// Half-sets per sample in the quasirandomness experiment.
    pub family_size: usize,
    /// Vectors per trial in the compressible experiment.
    pub corpus_size: usize,
    /// Draws of `W_{t,v}` per anti-concentration scenario.
    pub samples: usize,
    pub epsilon_grid: Vec<f64>,
    /// Dimensions `N` of the anti-concentration scenarios.
    pub dims: Vec<usize>,
    /// Explicit vector for the single-vector, clcd and qclcd commands.
    pub vector: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    /// Adds a wall-clock column to per-trial CSV; off by default so equal
    /// seeds give byte-identical files.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::SnTail,
            n: 100,
            d: 25,
            trials: 1000,
            kappa_grid: vec![0.0, 1e-3, 1e-2, 5e-2, 1e-1],
            seed: 1,
            threads: 0,
            method: Method::SwitchChain,
            burn_in: None,
            params: ParamPack::default(),
            family_size: 1,
            corpus_size: 200,
            samples: 100_000,
            epsilon_grid: vec![1e-3, 1e-2, 1e-1],
            dims: vec![12, 64, 200],
            vector: None,
            output: None,
            timing: false,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Parse { line, msg: format!("bad value {value:?} for {key}") })
}

fn parse_list<T: FromStr>(key: &str, value: &str, line: usize) -> Result<Vec<T>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|x| parse_num(key, x.trim(), line)).collect()
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut lambda = None;
        let mut saw_d = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse { line, msg: format!("expected `key = value`, got {content:?}") });
            };
            let (key, value) = (key.trim(), value.trim());
            let p = &mut cfg.params;
            match key {
                "experiment" => {
                    cfg.experiment = value.parse().map_err(|_| Error::Parse { line, msg: format!("unknown experiment {value:?}") })?
                }
                "n" => cfg.n = parse_num(key, value, line)?,
                "d" => {
                    cfg.d = parse_num(key, value, line)?;
                    saw_d = true;
                }
                "lambda" => lambda = Some(parse_num::<f64>(key, value, line)?),
                "trials" => cfg.trials = parse_num(key, value, line)?,
                "kappa_grid" => cfg.kappa_grid = parse_list(key, value, line)?,
                "seed" => cfg.seed = parse_num(key, value, line)?,
                "threads" => cfg.threads = parse_num(key, value, line)?,
                "method" => {
                    cfg.method = value.parse().map_err(|_| Error::Parse { line, msg: format!("unknown method {value:?}") })?
                }
                "burn_in" => cfg.burn_in = Some(parse_num(key, value, line)?),
                "delta" => p.delta = parse_num(key, value, line)?,
                "rho" => p.rho = parse_num(key, value, line)?,
                "delta_prime" => p.delta_prime = parse_num(key, value, line)?,
                "rho_prime" => p.rho_prime = parse_num(key, value, line)?,
                "nu" => {
                    let v: Vec<f64> = parse_list(key, value, line)?;
                    p.nu = v
                        .try_into()
                        .map_err(|_| Error::Parse { line, msg: "nu needs exactly three values".into() })?;
                }
                "gamma" => p.gamma = parse_num(key, value, line)?,
                "alpha" => p.alpha = parse_num(key, value, line)?,
                "mu" => p.mu = parse_num(key, value, line)?,
                "q" => p.q = parse_num(key, value, line)?,
                "eta" => p.eta = parse_num(key, value, line)?,
                "h" => p.h = parse_num(key, value, line)?,
                "a" => p.a = parse_num(key, value, line)?,
                "svd_tol" => p.svd_tol = parse_num(key, value, line)?,
                "singular_threshold" => p.singular_threshold = parse_num(key, value, line)?,
                "check_budget" => p.check_budget = parse_num(key, value, line)?,
                "c_threshold" => p.c_threshold = parse_num(key, value, line)?,
                "alpha_fraction" => p.alpha_fraction = parse_num(key, value, line)?,
                "theta_max" => p.theta_max = parse_num(key, value, line)?,
                "family_size" => cfg.family_size = parse_num(key, value, line)?,
                "corpus_size" => cfg.corpus_size = parse_num(key, value, line)?,
                "samples" => cfg.samples = parse_num(key, value, line)?,
                "epsilon_grid" => cfg.epsilon_grid = parse_list(key, value, line)?,
                "dims" => cfg.dims = parse_list(key, value, line)?,
                "vector" => cfg.vector = Some(parse_list(key, value, line)?),
                "output" => cfg.output = Some(PathBuf::from(value)),
                "timing" => cfg.timing = parse_num(key, value, line)?,
                _ => return Err(Error::Parse { line, msg: format!("unknown key {key:?}") }),
            }
        }
        if let Some(l) = lambda {
            if saw_d {
                return Err(Error::invalid("give either d or lambda, not both"));
            }
            cfg.d = (l * cfg.n as f64).floor() as usize;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d >= self.n {
            return Err(Error::invalid(format!("need min(d, n-d) >= 1, got n = {}, d = {}", self.n, self.d)));
        }
        if self.kappa_grid.iter().any(|&k| !(k >= 0.0)) || self.kappa_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("kappa_grid must be nonnegative and sorted ascending"));
        }
        let p = &self.params;
        if !(p.svd_tol > 0.0 && p.svd_tol <= 1e-6) {
            return Err(Error::invalid("svd_tol must lie in (0, 1e-6]"));
        }
        if !(p.gamma > 0.0 && p.gamma < 1.0) || !(p.alpha > 0.0) || !(p.alpha_fraction > 0.0) {
            return Err(Error::invalid("need γ in (0, 1), α > 0 and alpha_fraction > 0"));
        }
        if !(p.theta_max > 0.0) {
            return Err(Error::invalid("theta_max must be positive"));
        }
        if self.epsilon_grid.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::invalid("epsilon_grid must be nonnegative"));
        }
        Ok(())
    }

    /// `λ = d/n`.
    pub fn lambda(&self) -> f64 {
        self.d as f64 / self.n as f64
    }

    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            n: self.n,
            d: self.d,
            method: self.method,
            burn_in: self.burn_in.unwrap_or_else(|| default_burn_in(self.n, self.d)),
            seed: self.seed,
        }
    }

    /// Violations of `μ < γ < min(η, 1/Q) < min(ν₁, ν₂) < min(δ, ρ) < λ`.
    /// `ν₃` is an upper band edge and does not take part.
    pub fn chain_warnings(&self) -> Vec<String> {
        let p = &self.params;
        let links = [
            ("μ", p.mu, "γ", p.gamma),
            ("γ", p.gamma, "min(η, 1/Q)", p.eta.min(1.0 / p.q.max(1) as f64)),
            ("max(η, 1/Q)", p.eta.max(1.0 / p.q.max(1) as f64), "min(ν₁, ν₂)", p.nu[0].min(p.nu[1])),
            ("max(ν₁, ν₂)", p.nu[0].max(p.nu[1]), "min(δ, ρ)", p.delta.min(p.rho)),
            ("max(δ, ρ)", p.delta.max(p.rho), "λ", self.lambda().min(1.0 - self.lambda())),
        ];
        links
            .iter()
            .filter(|(_, lo, _, hi)| lo >= hi)
            .map(|(a, lo, b, hi)| format!("parameter chain: {a} = {lo} is not below {b} = {hi}"))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("write to String");
        kv("experiment", self.experiment.to_string());
        kv("n", self.n.to_string());
        kv("d", self.d.to_string());
        kv("trials", self.trials.to_string());
        kv("kappa_grid", join(&self.kappa_grid));
        kv("seed", self.seed.to_string());
        kv("threads", self.threads.to_string());
        kv("method", self.method.to_string());
        if let Some(b) = self.burn_in {
            kv("burn_in", b.to_string());
        }
        kv("delta", p.delta.to_string());
        kv("rho", p.rho.to_string());
        kv("delta_prime", p.delta_prime.to_string());
        kv("rho_prime", p.rho_prime.to_string());
        kv("nu", join(&p.nu));
        kv("gamma", p.gamma.to_string());
        kv("alpha", p.alpha.to_string());
        kv("mu", p.mu.to_string());
        kv("q", p.q.to_string());
        kv("eta", p.eta.to_string());
        kv("h", p.h.to_string());
        kv("a", p.a.to_string());
        kv("svd_tol", p.svd_tol.to_string());
        kv("singular_threshold", p.singular_threshold.to_string());
        kv("check_budget", p.check_budget.to_string());
        kv("c_threshold", p.c_threshold.to_string());
        kv("alpha_fraction", p.alpha_fraction.to_string());
        kv("theta_max", p.theta_max.to_string());
        kv("family_size", self.family_size.to_string());
        kv("corpus_size", self.corpus_size.to_string());
        kv("samples", self.samples.to_string());
        kv("epsilon_grid", join(&self.epsilon_grid));
        kv("dims", join(&self.dims));
        if let Some(v) = &self.vector {
            kv("vector", join(v));
        }
        if let Some(o) = &self.output {
            kv("output", o.display().to_string());
        }
        kv("timing", self.timing.to_string());
        s
    }
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::parse(&std::fs::read_to_string(path)?)?;
    for w in cfg.chain_warnings() {
        log::warn!("{w}");
    }
    Ok(cfg)
}

pub fn write_config(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    std::fs::write(path, cfg.to_text())?;
    Ok(())
}
