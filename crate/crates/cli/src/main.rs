use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use regdigraph::arithmetic::{clcd, oracle_clcd, qclcd, ClcdParams, ORACLE_MAX_DIM};
use regdigraph::harness::{
    exact_singular, fmt_f64, generic_vector, read_config, run_experiment, run_quasirandom, write_csv, CsvOptions,
    Experiment, ExperimentConfig,
};
use regdigraph::rerandom::{extract_revealed, resample_conditional};
use regdigraph::sampler::{enumerate_mnd, trial_rng, trial_seed};
use regdigraph::spectral::{restricted_smallest, smallest_singular_value};
use regdigraph::structures::{build_t_sets, SplitMatchPair};
use regdigraph::{Error, Result, Sampler};

#[derive(Parser)]
#[command(name = "regdigraph", version, about = "Random regular digraph matrix experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Draw `trials` matrices and print them in text form.
    Sample,
    /// List every matrix of M_{n,d} (small n only).
    Enumerate,
    /// Smallest singular values and exact singularity of sampled matrices.
    Svd,
    /// CLCD of `vector` (or a generic sum-zero vector).
    Clcd,
    /// QCLCD of `vector` over the T-sets of one sampled matrix.
    Qclcd,
    /// Quasirandomness checks on sampled matrices.
    Quasirand,
    /// One conditional resample of one sampled matrix.
    Rerandom,
    /// The experiment named in the configuration.
    Experiment,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_deref().ok_or_else(|| Error::InvalidArgument("--config is required".into()))?;
    let mut cfg = read_config(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if cli.out.is_some() {
        cfg.output = cli.out.clone();
    }
    Ok(cfg)
}

fn output(cfg: &ExperimentConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn vector_or_generic(cfg: &ExperimentConfig) -> Vec<f64> {
    cfg.vector.clone().unwrap_or_else(|| generic_vector(cfg.n, &mut trial_rng(cfg.seed, 0)))
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load(cli)?;
    match cli.command {
        Command::Sample => {
            let sampler = Sampler::new(cfg.sampler())?;
            let mut out = output(&cfg)?;
            for t in 0..cfg.trials {
                let a = sampler.draw(&mut trial_rng(cfg.seed, t))?;
                if t > 0 {
                    writeln!(out)?;
                }
                write!(out, "{}", a.to_text())?;
            }
            out.flush()?;
        }
        Command::Enumerate => {
            let all = enumerate_mnd(cfg.n, cfg.d)?;
            let mut out = output(&cfg)?;
            for (i, a) in all.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                write!(out, "{}", a.to_text())?;
            }
            out.flush()?;
            info!("{} matrices", all.len());
        }
        Command::Svd => {
            let sampler = Sampler::new(cfg.sampler())?;
            let mut w = csv::Writer::from_writer(output(&cfg)?);
            w.write_record(["trial", "seed", "s_min", "restricted_s_min", "exact_singular"])?;
            for t in 0..cfg.trials {
                let a = sampler.draw(&mut trial_rng(cfg.seed, t))?;
                let m = a.to_dmatrix();
                w.write_record([
                    t.to_string(),
                    trial_seed(cfg.seed, t).to_string(),
                    fmt_f64(smallest_singular_value(&m)),
                    fmt_f64(restricted_smallest(&m)?),
                    exact_singular(&a).to_string(),
                ])?;
            }
            w.flush()?;
        }
        Command::Clcd => {
            let v = vector_or_generic(&cfg);
            let p = &cfg.params;
            let params = ClcdParams::new(p.alpha, p.gamma, p.theta_max)?;
            let value = clcd(&v, &params);
            let oracle = if v.len() <= ORACLE_MAX_DIM { Some(oracle_clcd(&v, &params)?) } else { None };
            let mut w = csv::Writer::from_writer(output(&cfg)?);
            w.write_record(["n", "alpha", "gamma", "theta_max", "clcd", "oracle"])?;
            w.write_record([
                v.len().to_string(),
                fmt_f64(p.alpha),
                fmt_f64(p.gamma),
                fmt_f64(p.theta_max),
                fmt_f64(value),
                oracle.map(fmt_f64).unwrap_or_default(),
            ])?;
            w.flush()?;
        }
        Command::Qclcd => {
            let v = vector_or_generic(&cfg);
            if v.len() != cfg.n {
                return Err(Error::InvalidArgument(format!("vector has length {}, n = {}", v.len(), cfg.n)));
            }
            let mut rng = trial_rng(cfg.seed, 0);
            let a = Sampler::new(cfg.sampler())?.draw(&mut rng)?;
            let pair = SplitMatchPair::random(cfg.n, &mut rng);
            let family = build_t_sets(&a, &pair)?.combined();
            let p = &cfg.params;
            let params = ClcdParams::new(p.alpha, p.gamma, p.theta_max)?;
            let mut w = csv::Writer::from_writer(output(&cfg)?);
            w.write_record(["ell", "qclcd"])?;
            for ell in 1..=family.t() {
                w.write_record([ell.to_string(), fmt_f64(qclcd(&v, &family, ell, &params)?)])?;
            }
            w.flush()?;
        }
        Command::Quasirand => {
            let o = run_quasirandom(&cfg)?;
            write_csv(&o.records, CsvOptions { timing: cfg.timing }, output(&cfg)?)?;
            info!("Q_hR frequency {}", o.frequency);
        }
        Command::Rerandom => {
            let mut rng = trial_rng(cfg.seed, 0);
            let a = Sampler::new(cfg.sampler())?.draw(&mut rng)?;
            let pair = SplitMatchPair::random(cfg.n, &mut rng);
            let b = resample_conditional(&a, &pair, &mut rng)?;
            if extract_revealed(&a, &pair)? != extract_revealed(&b, &pair)? {
                return Err(Error::Indeterminate("resample changed the revealed information".into()));
            }
            let mut out = output(&cfg)?;
            write!(out, "{}\n{}", a.to_text(), b.to_text())?;
            out.flush()?;
        }
        Command::Experiment => {
            if cfg.experiment == Experiment::SingleVector && cfg.vector.is_none() {
                info!("single-vector: using the alternating vector");
            }
            for line in run_experiment(&cfg)? {
                info!("{line}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
