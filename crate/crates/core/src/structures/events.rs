use rand::seq::SliceRandom;
use rand::Rng;

use crate::bits::{self, IndexSet};
use crate::spectral::check_permutation;
use crate::vectorclass::{bispread_constants, spread_constants};
use crate::{Error, Result};

/// A permutation `σ` of `[n]` (row reveal order) with a half-set `S`,
/// `|S| = ⌊n/2⌋`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMatchPair {
    pub sigma: Vec<usize>,
    pub s: IndexSet,
}

impl SplitMatchPair {
    pub fn new(sigma: Vec<usize>, s: IndexSet) -> Result<Self> {
        let n = sigma.len();
        check_permutation(&sigma, n)?;
        if s.len() != n {
            return Err(Error::invalid(format!("S lives in a universe of {} elements, expected {n}", s.len())));
        }
        if s.count_ones(..) != n / 2 {
            return Err(Error::invalid(format!("|S| = {}, expected {}", s.count_ones(..), n / 2)));
        }
        Ok(Self { sigma, s })
    }

    /// `σ = id` and `S` the given indices.
    pub fn with_identity(n: usize, s: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::new((0..n).collect(), bits::from_indices(n, s))
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut sigma: Vec<usize> = (0..n).collect();
        sigma.shuffle(rng);
        Self { sigma, s: random_half(n, rng) }
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn s_complement(&self) -> IndexSet {
        bits::complement(&self.s)
    }
}

fn random_half<R: Rng + ?Sized>(n: usize, rng: &mut R) -> IndexSet {
    bits::from_indices(n, rand::seq::index::sample(rng, n, n / 2).iter())
}

/// `I_ν(w, σ)`: at least `ν₁N` consecutive positions `i` with
/// `|w_{σ(i)} − w_{σ(i+1)}|√N ≥ ν₂`.
pub fn event_i(w: &[f64], sigma: &[usize], nu: [f64; 3]) -> bool {
    let n = w.len();
    let root = (n as f64).sqrt();
    let count = sigma.windows(2).filter(|p| (w[p[0]] - w[p[1]]).abs() * root >= nu[1]).count();
    count as f64 >= nu[0] * n as f64
}

/// `J_ν(v, S)`: both `S` and `S^c` hold at least `ν₁N` coordinates with
/// `v_i√N ∈ [ν₂, ν₃]` and at least `ν₁N` with `v_i√N ∈ [−ν₃, −ν₂]`.
pub fn event_j(v: &[f64], s: &IndexSet, nu: [f64; 3]) -> bool {
    let n = v.len();
    let root = (n as f64).sqrt();
    // [pos in S, neg in S, pos in S^c, neg in S^c]
    let mut counts = [0usize; 4];
    for (i, &x) in v.iter().enumerate() {
        let y = x * root;
        let base = if s.contains(i) { 0 } else { 2 };
        if (nu[1]..=nu[2]).contains(&y) {
            counts[base] += 1;
        } else if (-nu[2]..=-nu[1]).contains(&y) {
            counts[base + 1] += 1;
        }
    }
    let need = nu[0] * n as f64;
    counts.iter().all(|&c| c as f64 >= need)
}

/// All `m₁·m₂` pairs from `m₁` uniform half-sets and `m₂` uniform
/// permutations, with the `ν` they are meant to certify.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustFamily {
    pub pairs: Vec<SplitMatchPair>,
    pub nu: [f64; 3],
}

impl RobustFamily {
    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    /// First pair with `J_ν(v, S)` and `I_ν(w, σ)`.
    pub fn covering(&self, v: &[f64], w: &[f64]) -> Option<&SplitMatchPair> {
        self.pairs.iter().find(|p| event_j(v, &p.s, self.nu) && event_i(w, &p.sigma, self.nu))
    }
}

/// `ν` certified by a good robust family for `Incomp⁰_{δ,ρ}`: with `ν′` the
/// signed spread constants, a good half-set splits each band `ν′₁/3`-evenly
/// and a good permutation pairs positive with negative band members at
/// `(ν′₁)²(N−1)/4 ≥ (ν′₁)²N/8` odd positions, with gaps at least `2ν′₂`.
pub fn robust_nu(delta: f64, rho: f64) -> [f64; 3] {
    let mu = spread_constants(delta, rho);
    let p = bispread_constants(mu[0], mu[1], mu[2]);
    [(p[0] / 3.0).min(p[0] * p[0] / 8.0), p[1], p[2]]
}

pub fn generate_robust_family<R: Rng + ?Sized>(
    n: usize,
    delta: f64,
    rho: f64,
    m1: usize,
    m2: usize,
    rng: &mut R,
) -> Result<RobustFamily> {
    if m1 == 0 || m2 == 0 {
        return Err(Error::invalid("robust family needs m1, m2 >= 1"));
    }
    if n < 2 {
        return Err(Error::invalid("robust family needs n >= 2"));
    }
    let sets: Vec<IndexSet> = (0..m1).map(|_| random_half(n, rng)).collect();
    let perms: Vec<Vec<usize>> = (0..m2)
        .map(|_| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(rng);
            p
        })
        .collect();
    let pairs = sets
        .iter()
        .flat_map(|s| perms.iter().map(move |p| SplitMatchPair { sigma: p.clone(), s: s.clone() }))
        .collect();
    Ok(RobustFamily { pairs, nu: robust_nu(delta, rho) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn alternating(n: usize) -> Vec<f64> {
        let r = 1.0 / (n as f64).sqrt();
        (0..n).map(|i| if i % 2 == 0 { r } else { -r }).collect()
    }

    #[test]
    fn event_i_examples() {
        let n = 10;
        let w = alternating(n);
        let id: Vec<usize> = (0..n).collect();
        assert!(event_i(&w, &id, [0.9, 1.99, 3.0]));
        assert!(!event_i(&w, &id, [0.95, 1.99, 3.0]));
        assert!(!event_i(&w, &id, [0.1, 2.01, 3.0]));
        assert!(!event_i(&[0.1; 10], &id, [0.01, 0.1, 1.0]));
        let sorted: Vec<f64> = (0..n).map(|i| i as f64 * 0.01).collect();
        assert!(!event_i(&sorted, &id, [0.01, 0.0101 * (n as f64).sqrt(), 1.0]));
    }

    #[test]
    fn event_j_examples() {
        let n = 8;
        let v = alternating(n);
        // S = {0, 1, 2, 3}: two positive and two negative entries on each side.
        let s = bits::from_indices(n, 0..4);
        assert!(event_j(&v, &s, [0.25, 0.9, 1.1]));
        assert!(!event_j(&v, &s, [0.26, 0.9, 1.1]));
        // S = even positions holds only positive entries.
        let evens = bits::from_indices(n, (0..n).step_by(2));
        assert!(!event_j(&v, &evens, [0.1, 0.9, 1.1]));
        let positive = vec![1.0 / (n as f64).sqrt(); n];
        assert!(!event_j(&positive, &s, [0.1, 0.9, 1.1]));
        let mut inside = vec![0.0; n];
        inside[0] = 0.5;
        inside[1] = -0.5;
        assert!(!event_j(&inside, &s, [0.1, 0.1, 10.0]));
    }

    #[test]
    fn robust_family_shape_and_determinism() {
        let a = generate_robust_family(20, 0.1, 0.5, 3, 4, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = generate_robust_family(20, 0.1, 0.5, 3, 4, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.m(), 12);
        assert!(a.pairs.iter().all(|p| p.s.count_ones(..) == 10));
        let one = generate_robust_family(7, 0.1, 0.5, 1, 1, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(one.m(), 1);
        assert_eq!(one.pairs[0].s.count_ones(..), 3);
        assert!(generate_robust_family(7, 0.1, 0.5, 0, 1, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn split_match_pair_validation() {
        assert!(SplitMatchPair::with_identity(4, [0, 1]).is_ok());
        assert!(SplitMatchPair::with_identity(4, [0]).is_err());
        assert!(SplitMatchPair::new(vec![0, 0, 1, 2], bits::from_indices(4, [0, 1])).is_err());
    }
}
