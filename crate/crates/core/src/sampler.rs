//! Exhaustive enumeration of `M_{n,d}` and (approximately) uniform sampling.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::{self, IndexSet};
use crate::{Error, RegularDigraphMatrix, Result};

/// Search-node budget for [`enumerate_mnd`] once `n > ENUMERATION_FREE_N`.
pub const ENUMERATION_NODE_BUDGET: u64 = 10_000_000;
const ENUMERATION_FREE_N: usize = 6;
/// Attempt cap for [`Method::PairRejection`].
pub const REJECTION_ATTEMPT_CAP: u64 = 1_000_000;

/// The generator every experiment uses.
pub type TrialRng = ChaCha8Rng;

/// Per-trial stream: `seed = base ⊕ trial`.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    base ^ trial
}

pub fn trial_rng(base: u64, trial: u64) -> TrialRng {
    TrialRng::seed_from_u64(trial_seed(base, trial))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Enumerate,
    SwitchChain,
    PairRejection,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enumerate" => Ok(Method::Enumerate),
            "switch-chain" => Ok(Method::SwitchChain),
            "pair-rejection" => Ok(Method::PairRejection),
            other => Err(Error::invalid(format!("unknown sampling method {other:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Enumerate => "enumerate",
            Method::SwitchChain => "switch-chain",
            Method::PairRejection => "pair-rejection",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub n: usize,
    pub d: usize,
    pub method: Method,
    /// Chain steps per draw, counting rejected proposals.
    pub burn_in: u64,
    pub seed: u64,
}

impl SamplerConfig {
    /// Switch-chain sampler with the default burn-in of `20·n·d` steps.
    pub fn new(n: usize, d: usize, seed: u64) -> Self {
        Self { n, d, method: Method::SwitchChain, burn_in: default_burn_in(n, d), seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d >= self.n {
            return Err(Error::invalid(format!(
                "samplers need 1 <= d <= n-1, got n = {}, d = {}",
                self.n, self.d
            )));
        }
        if self.method == Method::SwitchChain && self.burn_in == 0 {
            log::warn!("switch chain with zero burn-in returns the canonical start");
        }
        Ok(())
    }
}

pub fn default_burn_in(n: usize, d: usize) -> u64 {
    20 * n as u64 * d as u64
}

/// Circulant start: `a_{ij} = 1` iff `(j - i) mod n < d`.
pub fn canonical_start(n: usize, d: usize) -> Result<RegularDigraphMatrix> {
    if d == 0 || d >= n {
        return Err(Error::invalid(format!("canonical start needs 1 <= d <= n-1, got n = {n}, d = {d}")));
    }
    let rows = (0..n).map(|i| bits::from_indices(n, (0..d).map(|o| (i + o) % n))).collect();
    Ok(RegularDigraphMatrix::from_rows_unchecked(n, d, rows))
}

/// Largest `n` accepted by exhaustive enumeration (`|M_{8,4}|` is already
/// about 1.2·10¹⁰).
pub const ENUMERATION_MAX_N: usize = 8;

/// All of `M_{n,d}` in row-major lexicographic order (reading each matrix as
/// a string of `n²` bits with `0 < 1`).
pub fn enumerate_mnd(n: usize, d: usize) -> Result<Vec<RegularDigraphMatrix>> {
    let mut out = Vec::new();
    enumerate_with(n, d, |rows| out.push(RegularDigraphMatrix::from_rows_unchecked(n, d, rows.to_vec())))?;
    Ok(out)
}

/// Counts `|M_{n,d}|` without materializing it.
pub fn count_mnd(n: usize, d: usize) -> Result<u64> {
    let mut count = 0;
    enumerate_with(n, d, |_| count += 1)?;
    Ok(count)
}

fn enumerate_with(n: usize, d: usize, mut visit: impl FnMut(&[IndexSet])) -> Result<()> {
    if d > n || n == 0 {
        return Err(Error::invalid(format!("need 0 <= d <= n and n >= 1, got n = {n}, d = {d}")));
    }
    if n > ENUMERATION_MAX_N {
        return Err(Error::BudgetExceeded { what: "enumeration dimension", limit: ENUMERATION_MAX_N as u64 });
    }
    // Row patterns as column lists, ascending in lexicographic bit-string order:
    // the pattern whose first 1 is furthest right comes first.
    let mut patterns: Vec<Vec<usize>> = Vec::new();
    combinations(n, d, &mut Vec::new(), 0, &mut patterns);
    patterns.sort_by(|a, b| {
        let key = |p: &Vec<usize>| (0..n).map(|j| p.contains(&j)).collect::<Vec<bool>>();
        key(a).cmp(&key(b))
    });
    let mut state = EnumState {
        n,
        patterns,
        capacity: vec![d; n],
        rows: Vec::with_capacity(n),
        nodes: 0,
        budgeted: n > ENUMERATION_FREE_N,
    };
    state.search(&mut visit)
}

fn combinations(n: usize, k: usize, cur: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for j in start..n {
        if n - j < k - cur.len() {
            break;
        }
        cur.push(j);
        combinations(n, k, cur, j + 1, out);
        cur.pop();
    }
}

struct EnumState {
    n: usize,
    patterns: Vec<Vec<usize>>,
    capacity: Vec<usize>,
    rows: Vec<IndexSet>,
    nodes: u64,
    budgeted: bool,
}

impl EnumState {
    fn search(&mut self, visit: &mut impl FnMut(&[IndexSet])) -> Result<()> {
        self.nodes += 1;
        if self.budgeted && self.nodes > ENUMERATION_NODE_BUDGET {
            return Err(Error::BudgetExceeded { what: "enumeration search nodes", limit: ENUMERATION_NODE_BUDGET });
        }
        let placed = self.rows.len();
        if placed == self.n {
            visit(&self.rows);
            return Ok(());
        }
        let remaining_after = self.n - placed - 1;
        for p in 0..self.patterns.len() {
            if self.patterns[p].iter().any(|&j| self.capacity[j] == 0) {
                continue;
            }
            for &j in &self.patterns[p] {
                self.capacity[j] -= 1;
            }
            // every column still needing ones must get them from the remaining rows
            if self.capacity.iter().all(|&c| c <= remaining_after) {
                self.rows.push(bits::from_indices(self.n, self.patterns[p].iter().copied()));
                self.search(visit)?;
                self.rows.pop();
            }
            for &j in &self.patterns[p] {
                self.capacity[j] += 1;
            }
        }
        Ok(())
    }
}

/// The edge-switch chain on `M_{n,d}`.
///
/// A step picks two ones `(i,k)` and `(j,l)` uniformly at random; if `i != j`,
/// `k != l` and `a_{il} = a_{jk} = 0` the 2×2 alternating rectangle is
/// swapped, otherwise the step is a rejection. The proposal is symmetric, so
/// the uniform distribution is stationary.
#[derive(Clone)]
pub struct SwitchChain {
    n: usize,
    d: usize,
    rows: Vec<IndexSet>,
    /// Column indices of the ones in each row, in arbitrary order.
    ones: Vec<Vec<usize>>,
    accepted: u64,
}

impl SwitchChain {
    pub fn new(start: &RegularDigraphMatrix) -> Self {
        let rows = start.rows().to_vec();
        let ones = rows.iter().map(|r| r.ones().collect()).collect();
        Self { n: start.n(), d: start.d(), rows, ones, accepted: 0 }
    }

    /// One step; returns whether the swap was accepted.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let (i, a) = (rng.random_range(0..self.n), rng.random_range(0..self.d));
        let (j, b) = (rng.random_range(0..self.n), rng.random_range(0..self.d));
        let k = self.ones[i][a];
        let l = self.ones[j][b];
        if i == j || k == l || self.rows[i].contains(l) || self.rows[j].contains(k) {
            return false;
        }
        self.rows[i].set(k, false);
        self.rows[i].insert(l);
        self.rows[j].set(l, false);
        self.rows[j].insert(k);
        self.ones[i][a] = l;
        self.ones[j][b] = k;
        self.accepted += 1;
        true
    }

    pub fn run<R: Rng + ?Sized>(&mut self, steps: u64, rng: &mut R) {
        for _ in 0..steps {
            self.step(rng);
        }
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn current(&self) -> RegularDigraphMatrix {
        RegularDigraphMatrix::from_rows_unchecked(self.n, self.d, self.rows.clone())
    }
}

/// A reusable sampler; caches the enumeration for [`Method::Enumerate`].
pub struct Sampler {
    cfg: SamplerConfig,
    start: RegularDigraphMatrix,
    table: Option<Vec<RegularDigraphMatrix>>,
}

impl Sampler {
    pub fn new(cfg: SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        let table = match cfg.method {
            Method::Enumerate => Some(enumerate_mnd(cfg.n, cfg.d)?),
            _ => None,
        };
        let start = canonical_start(cfg.n, cfg.d)?;
        Ok(Self { cfg, start, table })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    /// A fresh RNG seeded from the configuration.
    pub fn rng(&self) -> TrialRng {
        TrialRng::seed_from_u64(self.cfg.seed)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<RegularDigraphMatrix> {
        match self.cfg.method {
            Method::Enumerate => {
                let table = self.table.as_ref().expect("enumeration table");
                Ok(table[rng.random_range(0..table.len())].clone())
            }
            Method::SwitchChain => {
                let mut chain = SwitchChain::new(&self.start);
                chain.run(self.cfg.burn_in, rng);
                Ok(chain.current())
            }
            Method::PairRejection => pair_rejection(self.cfg.n, self.cfg.d, rng),
        }
    }
}

/// One draw from `cfg` using the caller's RNG.
pub fn sample_uniform<R: Rng + ?Sized>(cfg: &SamplerConfig, rng: &mut R) -> Result<RegularDigraphMatrix> {
    Sampler::new(cfg.clone())?.draw(rng)
}

fn pair_rejection<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<RegularDigraphMatrix> {
    for _ in 0..REJECTION_ATTEMPT_CAP {
        let mut col = vec![0usize; n];
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let picks = index::sample(rng, n, d);
            for j in picks.iter() {
                col[j] += 1;
            }
            rows.push(bits::from_indices(n, picks.iter()));
        }
        if col.iter().all(|&c| c == d) {
            return Ok(RegularDigraphMatrix::from_rows_unchecked(n, d, rows));
        }
    }
    Err(Error::BudgetExceeded { what: "pair-rejection attempts", limit: REJECTION_ATTEMPT_CAP })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_mnd(2, 1).unwrap().len(), 2);
        assert_eq!(enumerate_mnd(3, 1).unwrap().len(), 6);
        assert_eq!(count_mnd(3, 2).unwrap(), 6);
        assert_eq!(count_mnd(4, 1).unwrap(), 24);
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let all = enumerate_mnd(3, 1).unwrap();
        let keys: Vec<String> = all.iter().map(|m| m.to_text()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(all[0].to_dense(), vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
        assert_eq!(*all.last().unwrap(), RegularDigraphMatrix::identity(3));
    }

    #[test]
    fn enumeration_budget_applies_beyond_n6() {
        assert!(matches!(enumerate_mnd(10, 5), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn canonical_start_examples() {
        assert_eq!(canonical_start(3, 1).unwrap(), RegularDigraphMatrix::identity(3));
        let c = canonical_start(4, 2).unwrap();
        assert_eq!(c.to_dense()[0], vec![1, 1, 0, 0]);
        assert_eq!(c.to_dense()[3], vec![1, 0, 0, 1]);
        // J minus circulant(5,4) is the single-offset circulant a_{i,i+4}
        let rest = canonical_start(5, 4).unwrap().complement();
        assert_eq!(rest.d(), 1);
        for i in 0..5 {
            assert!(rest.get(i, (i + 4) % 5));
        }
        assert!(canonical_start(3, 0).is_err());
        assert!(canonical_start(3, 3).is_err());
    }

    #[test]
    fn samplers_reject_degenerate_degree() {
        for d in [0, 4] {
            let cfg = SamplerConfig { n: 4, d, method: Method::SwitchChain, burn_in: 10, seed: 1 };
            assert!(Sampler::new(cfg).is_err());
        }
    }

    #[test]
    fn every_method_gives_valid_2x2() {
        let valid = enumerate_mnd(2, 1).unwrap();
        for method in [Method::Enumerate, Method::SwitchChain, Method::PairRejection] {
            let cfg = SamplerConfig { n: 2, d: 1, method, burn_in: 50, seed: 9 };
            let s = Sampler::new(cfg).unwrap();
            let mut rng = s.rng();
            for _ in 0..20 {
                assert!(valid.contains(&s.draw(&mut rng).unwrap()));
            }
        }
    }

    #[test]
    fn draws_are_deterministic_per_seed() {
        let cfg = SamplerConfig::new(12, 4, 77);
        let s = Sampler::new(cfg).unwrap();
        let a: Vec<_> = (0..3).map(|t| s.draw(&mut trial_rng(77, t)).unwrap()).collect();
        let b: Vec<_> = (0..3).map(|t| s.draw(&mut trial_rng(77, t)).unwrap()).collect();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn chain_accepts_moves_and_stays_regular() {
        let start = canonical_start(10, 3).unwrap();
        let mut chain = SwitchChain::new(&start);
        let mut rng = trial_rng(5, 0);
        for _ in 0..500 {
            chain.step(&mut rng);
            let m = chain.current();
            RegularDigraphMatrix::validate(&m.to_dense(), 3).unwrap();
        }
        assert!(chain.accepted() > 100);
    }

    #[test]
    fn enumerate_method_is_uniform_on_3_1() {
        let cfg = SamplerConfig { n: 3, d: 1, method: Method::Enumerate, burn_in: 0, seed: 3 };
        let s = Sampler::new(cfg).unwrap();
        let all = enumerate_mnd(3, 1).unwrap();
        let mut rng = s.rng();
        let mut counts = [0u32; 6];
        let draws = 60_000;
        for _ in 0..draws {
            let m = s.draw(&mut rng).unwrap();
            counts[all.iter().position(|x| *x == m).unwrap()] += 1;
        }
        let p = crate::stats::chi_square_uniform_p_value(&counts);
        assert!(p > 0.001, "counts {counts:?} p = {p}");
    }
}
