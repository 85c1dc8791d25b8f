use rand::Rng;

use crate::bits::{self, IndexSet};
use crate::matrix::RegularDigraphMatrix;
use crate::{Error, Result};

/// Default cap on tuples examined before switching to random sampling.
pub const DEFAULT_CHECK_BUDGET: u64 = 1_000_000;
/// Witnesses kept per report.
pub const MAX_WITNESSES: usize = 16;

/// Result of checking a "for all tuples" property of a matrix.
///
/// When the tuple population exceeds the budget, `budget` tuples are drawn
/// uniformly with replacement, so `holds` only says no violation was seen.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub holds: bool,
    pub exhaustive: bool,
    pub examined: u64,
    pub population: f64,
    pub violations: u64,
    /// Row tuples that violate the property, flattened pairs `[i₁, j₁, i₂, j₂, …]`.
    pub witnesses: Vec<Vec<usize>>,
    pub bound: f64,
    /// Worst statistic seen: the largest left-hand side for upper bounds,
    /// the smallest for lower bounds, the largest excess `|ω| − min(…)/6`
    /// for the weight check.
    pub extreme: f64,
}

impl CheckReport {
    /// Fraction of the tuple population examined (at most 1).
    pub fn coverage(&self) -> f64 {
        if self.population == 0.0 {
            1.0
        } else {
            (self.examined as f64 / self.population).min(1.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasirandomParams {
    pub h: usize,
    pub lambda: f64,
    /// The half-sets `S` for which the pair properties are required.
    pub family: Vec<IndexSet>,
    pub budget: u64,
}

impl QuasirandomParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.h == 0 || 2 * self.h > n {
            return Err(Error::invalid(format!("h = {} needs 1 <= 2h <= n = {n}", self.h)));
        }
        if !(self.lambda > 0.0 && self.lambda <= 0.5) {
            return Err(Error::invalid(format!("λ must lie in (0, 1/2], got {}", self.lambda)));
        }
        if self.budget == 0 {
            return Err(Error::invalid("check budget must be positive"));
        }
        for (k, s) in self.family.iter().enumerate() {
            if s.len() != n || s.count_ones(..) != n / 2 {
                return Err(Error::invalid(format!("family set {k} is not a half-set of [{n}]")));
            }
        }
        if (self.h as f64) >= (n as f64).powf(0.25) {
            log::warn!("h = {} is not below n^(1/4) = {:.3}", self.h, (n as f64).powf(0.25));
        }
        Ok(())
    }
}

/// `η = 2(λ² + (1−λ)²)^Q`.
pub fn eta_for_q(lambda: f64, q: usize) -> f64 {
    2.0 * (lambda * lambda + (1.0 - lambda) * (1.0 - lambda)).powi(q as i32)
}

/// Number of sets of `h` disjoint unordered pairs in `[n]`: `C(n, 2h)(2h−1)!!`.
fn matching_count(n: usize, h: usize) -> f64 {
    let k = 2 * h;
    if k > n {
        return 0.0;
    }
    let mut c = 1.0;
    for i in 0..k {
        c *= (n - i) as f64 / (i + 1) as f64;
    }
    let mut dfact = 1.0;
    let mut m = k as i64 - 1;
    while m > 1 {
        dfact *= m as f64;
        m -= 2;
    }
    c * dfact
}

type MatchingVisitor<'a> = dyn FnMut(&[(usize, usize)]) + 'a;

/// Calls `f` once per set of `h` disjoint pairs `(a, b)`, `a < b`, listed by
/// increasing `a`.
fn for_each_matching(n: usize, h: usize, f: &mut MatchingVisitor) {
    fn go(n: usize, h: usize, from: usize, used: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, f: &mut MatchingVisitor) {
        if cur.len() == h {
            f(cur);
            return;
        }
        for a in from..n {
            if used[a] {
                continue;
            }
            used[a] = true;
            for b in a + 1..n {
                if used[b] {
                    continue;
                }
                used[b] = true;
                cur.push((a, b));
                go(n, h, a + 1, used, cur, f);
                cur.pop();
                used[b] = false;
            }
            used[a] = false;
        }
    }
    go(n, h, 0, &mut vec![false; n], &mut Vec::with_capacity(h), f);
}

/// Runs `eval` over every `h`-matching of rows, or over `budget` random ones.
/// `eval` returns the statistic and whether the tuple violates the property.
fn run_matchings<R: Rng + ?Sized>(
    n: usize,
    h: usize,
    budget: u64,
    rng: &mut R,
    lower_is_worse: bool,
    mut eval: impl FnMut(&[(usize, usize)]) -> (f64, bool),
) -> CheckReport {
    let population = matching_count(n, h);
    let exhaustive = population <= budget as f64;
    let mut report = CheckReport {
        holds: true,
        exhaustive,
        examined: 0,
        population,
        violations: 0,
        witnesses: Vec::new(),
        bound: f64::NAN,
        extreme: if lower_is_worse { f64::INFINITY } else { f64::NEG_INFINITY },
    };
    let mut visit = |pairs: &[(usize, usize)]| {
        let (stat, bad) = eval(pairs);
        report.examined += 1;
        report.extreme = if lower_is_worse { report.extreme.min(stat) } else { report.extreme.max(stat) };
        if bad {
            report.holds = false;
            report.violations += 1;
            if report.witnesses.len() < MAX_WITNESSES {
                report.witnesses.push(pairs.iter().flat_map(|&(a, b)| [a, b]).collect());
            }
        }
    };
    if exhaustive {
        for_each_matching(n, h, &mut visit);
    } else {
        let mut pairs = Vec::with_capacity(h);
        for _ in 0..budget {
            let idx = rand::seq::index::sample(rng, n, 2 * h).into_vec();
            pairs.clear();
            pairs.extend(idx.chunks(2).map(|c| (c[0].min(c[1]), c[0].max(c[1]))));
            visit(&pairs);
        }
    }
    report
}

/// (P1): for all `2h` distinct rows, `|⋂ S^c_{i_k,j_k}| ≤ 2(λ² + (1−λ)²)^h n`.
pub fn check_q_h<R: Rng + ?Sized>(
    a: &RegularDigraphMatrix,
    h: usize,
    lambda: f64,
    budget: u64,
    rng: &mut R,
) -> Result<CheckReport> {
    let n = a.n();
    if h == 0 || 2 * h > n {
        return Err(Error::invalid(format!("h = {h} needs 1 <= 2h <= n = {n}")));
    }
    let bound = eta_for_q(lambda, h) * n as f64;
    let words = a.row(0).as_slice().len();
    let mut union = vec![0usize; words];
    let mut report = run_matchings(n, h, budget, rng, false, |pairs| {
        union.iter_mut().for_each(|w| *w = 0);
        for &(i, j) in pairs {
            for ((u, x), y) in union.iter_mut().zip(a.row(i).as_slice()).zip(a.row(j).as_slice()) {
                *u |= x ^ y;
            }
        }
        let agree = n - union.iter().map(|w| w.count_ones() as usize).sum::<usize>();
        (agree as f64, agree as f64 > bound)
    });
    report.bound = bound;
    Ok(report)
}

fn check_half_set(a: &RegularDigraphMatrix, s: &IndexSet) -> Result<()> {
    if s.len() != a.n() {
        return Err(Error::invalid(format!("S lives in [{}], matrix has n = {}", s.len(), a.n())));
    }
    Ok(())
}

/// (P2): for all 4 distinct rows,
/// `min(|S_{i₁,j₁} ∩ S_{i₂,j₂} ∩ S|, |… ∩ S^c|) ≥ (2λ(1−λ))² n/4`.
pub fn check_q_prime<R: Rng + ?Sized>(
    a: &RegularDigraphMatrix,
    s: &IndexSet,
    lambda: f64,
    budget: u64,
    rng: &mut R,
) -> Result<CheckReport> {
    check_half_set(a, s)?;
    let n = a.n();
    if n < 4 {
        return Err(Error::invalid("(P2) needs n >= 4"));
    }
    let bound = (2.0 * lambda * (1.0 - lambda)).powi(2) * n as f64 / 4.0;
    let sw = s.as_slice();
    let mut report = run_matchings(n, 2, budget, rng, true, |pairs| {
        let (i1, j1) = pairs[0];
        let (i2, j2) = pairs[1];
        let (mut inside, mut outside) = (0usize, 0usize);
        let blocks = |i: usize| a.row(i).as_slice();
        for (k, &s_block) in sw.iter().enumerate() {
            let x = (blocks(i1)[k] ^ blocks(j1)[k]) & (blocks(i2)[k] ^ blocks(j2)[k]);
            inside += (x & s_block).count_ones() as usize;
            outside += (x & !s_block).count_ones() as usize;
        }
        let stat = inside.min(outside) as f64;
        (stat, stat < bound)
    });
    report.bound = bound;
    Ok(report)
}

/// (P3): for every pair of distinct rows,
/// `|ω_{i,j}(S)| ≤ min(|S ∩ S_{i,j}|, |S^c ∩ S_{i,j}|)/6`. Always exhaustive.
pub fn check_q_doubleprime(a: &RegularDigraphMatrix, s: &IndexSet) -> Result<CheckReport> {
    check_half_set(a, s)?;
    let n = a.n();
    let sc = bits::complement(s);
    let mut report = CheckReport {
        holds: true,
        exhaustive: true,
        examined: 0,
        population: (n * n.saturating_sub(1) / 2) as f64,
        violations: 0,
        witnesses: Vec::new(),
        bound: f64::NAN,
        extreme: f64::NEG_INFINITY,
    };
    for i in 0..n {
        for j in i + 1..n {
            let omega = a.switching_weight(i, j, s);
            let sw = a.switching_set(i, j)?;
            let cap = bits::intersection_len(s, &sw.indices).min(bits::intersection_len(&sc, &sw.indices)) as f64 / 6.0;
            let excess = omega.abs() as f64 - cap;
            report.examined += 1;
            report.extreme = report.extreme.max(excess);
            if excess > 0.0 {
                report.holds = false;
                report.violations += 1;
                if report.witnesses.len() < MAX_WITNESSES {
                    report.witnesses.push(vec![i, j]);
                }
            }
        }
    }
    Ok(report)
}

/// (P4): `Q_h` together with `Q′_S ∩ Q″_S` for every `S` in the family.
#[derive(Debug, Clone, PartialEq)]
pub struct QhrReport {
    pub holds: bool,
    pub q_h: CheckReport,
    /// `(Q′_S, Q″_S)` per family member.
    pub per_set: Vec<(CheckReport, CheckReport)>,
}

pub fn check_q_hr<R: Rng + ?Sized>(a: &RegularDigraphMatrix, params: &QuasirandomParams, rng: &mut R) -> Result<QhrReport> {
    params.validate(a.n())?;
    let q_h = check_q_h(a, params.h, params.lambda, params.budget, rng)?;
    let per_set = params
        .family
        .iter()
        .map(|s| Ok((check_q_prime(a, s, params.lambda, params.budget, rng)?, check_q_doubleprime(a, s)?)))
        .collect::<Result<Vec<_>>>()?;
    let holds = q_h.holds && per_set.iter().all(|(p, q)| p.holds && q.holds);
    Ok(QhrReport { holds, q_h, per_set })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::canonical_start;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matching_enumeration_is_complete() {
        for (n, h) in [(4, 1), (4, 2), (6, 2), (7, 3), (8, 2)] {
            let mut seen = std::collections::HashSet::new();
            for_each_matching(n, h, &mut |p| {
                assert!(seen.insert(p.to_vec()));
            });
            assert_eq!(seen.len() as f64, matching_count(n, h), "n = {n}, h = {h}");
        }
        assert_eq!(matching_count(4, 2), 3.0);
    }

    #[test]
    fn p1_trivial_bound() {
        // h = 1, λ = 1/2: the bound is n itself.
        let a = canonical_start(8, 4).unwrap();
        let r = check_q_h(&a, 1, 0.5, DEFAULT_CHECK_BUDGET, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(r.holds && r.exhaustive && r.examined == 28);
        assert_eq!(r.bound, 8.0);
    }

    #[test]
    fn p1_circulant_direct() {
        // circulant(4, 2): rows {0,1}, {1,2}, {2,3}, {3,0}; rows 0 and 2 are
        // complementary so they agree nowhere, adjacent rows agree on 2.
        let a = canonical_start(4, 2).unwrap();
        let r = check_q_h(&a, 1, 0.5, 100, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(r.extreme, 2.0);
        // h = 2 with λ = 1/2 gives bound 2 · (1/2)² · 4 = 2; the matchings
        // {0,1},{2,3} and {0,3},{1,2} agree on exactly two columns.
        let r = check_q_h(&a, 2, 0.5, 100, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(r.holds);
        assert_eq!(r.examined, 3);
    }

    #[test]
    fn p3_circulant_and_witness() {
        let a = canonical_start(4, 2).unwrap();
        let s = bits::from_indices(4, [0, 1]);
        let r = check_q_doubleprime(&a, &s).unwrap();
        assert_eq!(r.examined, 6);
        // rows 0 = {0,1} and 2 = {2,3}: ω = 2, S ∩ S_{0,2} = {0,1}, bound 1/3.
        assert!(!r.holds);
        assert!(r.witnesses.contains(&vec![0, 2]));
        let id = RegularDigraphMatrix::identity(4);
        let r = check_q_doubleprime(&id, &s).unwrap();
        // rows 0 and 1 both live in S: ω = 0 with cap 0.
        assert!(r.witnesses.iter().all(|w| w != &vec![0, 1]));
    }

    #[test]
    fn p2_lower_bound_trivial() {
        let a = canonical_start(8, 4).unwrap();
        let s = bits::from_indices(8, 0..4);
        let r = check_q_prime(&a, &s, 0.5, DEFAULT_CHECK_BUDGET, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(r.exhaustive);
        assert_eq!(r.examined, 210);
        assert_eq!(r.bound, 0.5);
    }

    #[test]
    fn random_mode_reports_coverage() {
        let a = canonical_start(40, 10).unwrap();
        let r = check_q_h(&a, 3, 0.25, 500, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!(!r.exhaustive);
        assert_eq!(r.examined, 500);
        assert!(r.coverage() < 1e-3);
    }

    #[test]
    fn eta_q_relation() {
        assert!((eta_for_q(0.25, 9) - 2.0 * 0.625f64.powi(9)).abs() < 1e-15);
        assert_eq!(eta_for_q(0.5, 1), 1.0);
    }
}
