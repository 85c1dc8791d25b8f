//! Revealed information `F_{S,σ}` and resampling of the randomness it leaves.
//!
//! With `R_k = A_{σ(k)}` (0-based), the revealed data are the half-row sums
//! `r_k(S)`, `r_k(S^c)`, the pair sums `(R_{2i} + R_{2i+1})|_S` and
//! `(R_{2i+1} + R_{2i+2})|_{S^c}`, and the boundary pieces `R_0|_{S^c}` and
//! `R_{n−1}|_P`, where `P = S` for odd `n` and `P = S^c` for even `n`.
//!
//! For even `n` the closing pair `(R_{n−2} + R_{n−1})|_S` is listed
//! explicitly; it is already determined by the other pair sums and the column
//! sums, so this adds no information but makes each pair independently
//! resamplable.

use rand::Rng;

use crate::bits::{self, IndexSet};
use crate::matrix::RegularDigraphMatrix;
use crate::structures::SplitMatchPair;
use crate::{Error, Result};

/// Largest `Σ|T|` accepted by [`enumerate_extensions`].
pub const EXTENSION_BUDGET: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevealedInformation {
    pub pair: SplitMatchPair,
    pub d: usize,
    /// `r_k(S)` for `R_k`, in reveal order.
    pub row_sums_s: Vec<usize>,
    pub row_sums_sc: Vec<usize>,
    /// `(R_{2i} + R_{2i+1})|_S` over the elements of `S` in increasing order.
    pub odd_pair_sums: Vec<Vec<u8>>,
    /// `(R_{2i+1} + R_{2i+2})|_{S^c}` over the elements of `S^c` in increasing order.
    pub even_pair_sums: Vec<Vec<u8>>,
    /// `R_0|_{S^c}`.
    pub first_row_sc: Vec<u8>,
    /// `R_{n−1}|_P`.
    pub last_row_p: Vec<u8>,
}

/// Which half a block of the decomposition lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Half {
    S,
    Sc,
}

/// Row pairs (positions in reveal order) and their half.
fn blocks(n: usize) -> Vec<(usize, usize, Half)> {
    let odd = (0..n / 2).map(|i| (2 * i, 2 * i + 1, Half::S));
    let even = (0..n.saturating_sub(1) / 2).map(|i| (2 * i + 1, 2 * i + 2, Half::Sc));
    odd.chain(even).collect()
}

fn p_is_s(n: usize) -> bool {
    n % 2 == 1
}

impl RevealedInformation {
    pub fn n(&self) -> usize {
        self.pair.n()
    }

    fn halves(&self) -> (Vec<usize>, Vec<usize>) {
        (bits::to_indices(&self.pair.s), bits::to_indices(&self.pair.s_complement()))
    }

    /// Positions where each pair sum equals 1: the odd sets lie in `S`, the even
    /// sets in `S^c`. For even `n` the odd list ends with the closing pair.
    pub fn t_sets(&self) -> (Vec<IndexSet>, Vec<IndexSet>) {
        let n = self.n();
        let (s, sc) = self.halves();
        let ones = |sums: &[u8], support: &[usize]| {
            bits::from_indices(n, sums.iter().zip(support).filter(|(&v, _)| v == 1).map(|(_, &k)| k))
        };
        (
            self.odd_pair_sums.iter().map(|v| ones(v, &s)).collect(),
            self.even_pair_sums.iter().map(|v| ones(v, &sc)).collect(),
        )
    }

    /// `Σ|T|` over all pair blocks.
    pub fn free_positions(&self) -> usize {
        let (odd, even) = self.t_sets();
        odd.iter().chain(&even).map(|t| t.count_ones(..)).sum()
    }
}

pub fn extract_revealed(a: &RegularDigraphMatrix, pair: &SplitMatchPair) -> Result<RevealedInformation> {
    let n = a.n();
    if pair.n() != n {
        return Err(Error::invalid(format!("pair is on [{}], matrix has n = {n}", pair.n())));
    }
    if n < 2 {
        return Err(Error::invalid("revealed information needs n >= 2"));
    }
    let sc_set = pair.s_complement();
    let s: Vec<usize> = bits::to_indices(&pair.s);
    let sc: Vec<usize> = bits::to_indices(&sc_set);
    let r = |k: usize| a.row(pair.sigma[k]);
    let bit = |k: usize, col: usize| u8::from(r(k).contains(col));
    let pair_sum = |x: usize, y: usize, support: &[usize]| support.iter().map(|&c| bit(x, c) + bit(y, c)).collect();

    let mut odd_pair_sums = Vec::new();
    let mut even_pair_sums = Vec::new();
    for (x, y, half) in blocks(n) {
        match half {
            Half::S => odd_pair_sums.push(pair_sum(x, y, &s)),
            Half::Sc => even_pair_sums.push(pair_sum(x, y, &sc)),
        }
    }
    let p = if p_is_s(n) { &s } else { &sc };
    Ok(RevealedInformation {
        pair: pair.clone(),
        d: a.d(),
        row_sums_s: (0..n).map(|k| bits::intersection_len(r(k), &pair.s)).collect(),
        row_sums_sc: (0..n).map(|k| bits::intersection_len(r(k), &sc_set)).collect(),
        odd_pair_sums,
        even_pair_sums,
        first_row_sc: sc.iter().map(|&c| bit(0, c)).collect(),
        last_row_p: p.iter().map(|&c| bit(n - 1, c)).collect(),
    })
}

/// Number of ones the first row of a block must place inside its T-set.
fn required_ones(row_sum: usize, sums: &[u8], t_len: usize) -> Result<usize> {
    let twos = sums.iter().filter(|&&v| v == 2).count();
    match row_sum.checked_sub(twos) {
        Some(k) if k <= t_len => Ok(k),
        _ => Err(Error::invalid(format!(
            "infeasible block: row sum {row_sum} with {twos} forced ones and {t_len} free positions"
        ))),
    }
}

/// Redraws every pair difference uniformly given `F_{S,σ}`: on each T-set the
/// first row of the pair takes a uniform subset of the required size and the
/// second row the rest.
pub fn resample_conditional<R: Rng + ?Sized>(
    a: &RegularDigraphMatrix,
    pair: &SplitMatchPair,
    rng: &mut R,
) -> Result<RegularDigraphMatrix> {
    let rev = extract_revealed(a, pair)?;
    let n = a.n();
    let (s, sc) = rev.halves();
    let mut rows = a.rows().to_vec();
    let (mut odd_k, mut even_k) = (0, 0);
    for (x, y, half) in blocks(n) {
        let (sums, support, row_sum) = match half {
            Half::S => {
                odd_k += 1;
                (&rev.odd_pair_sums[odd_k - 1], &s, rev.row_sums_s[x])
            }
            Half::Sc => {
                even_k += 1;
                (&rev.even_pair_sums[even_k - 1], &sc, rev.row_sums_sc[x])
            }
        };
        let t: Vec<usize> = sums.iter().zip(support.iter()).filter(|(&v, _)| v == 1).map(|(_, &c)| c).collect();
        if t.is_empty() {
            continue;
        }
        let k = required_ones(row_sum, sums, t.len())?;
        let (rx, ry) = (pair.sigma[x], pair.sigma[y]);
        for &c in &t {
            rows[rx].set(c, false);
            rows[ry].set(c, true);
        }
        for idx in rand::seq::index::sample(rng, t.len(), k).iter() {
            rows[rx].set(t[idx], true);
            rows[ry].set(t[idx], false);
        }
    }
    let out = RegularDigraphMatrix::from_rows_unchecked(n, a.d(), rows);
    debug_assert!(RegularDigraphMatrix::validate(&out.to_dense(), a.d()).is_ok());
    Ok(out)
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..=items.len() - (k - cur.len()) {
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Every matrix consistent with `rev`, each exactly once, rebuilt from `rev`
/// alone.
pub fn enumerate_extensions(rev: &RevealedInformation) -> Result<Vec<RegularDigraphMatrix>> {
    let free = rev.free_positions();
    if free > EXTENSION_BUDGET {
        return Err(Error::BudgetExceeded { what: "extension positions", limit: EXTENSION_BUDGET as u64 });
    }
    let n = rev.n();
    let (s, sc) = rev.halves();
    // Reveal-order rows with every determined entry filled in.
    let mut base: Vec<IndexSet> = (0..n).map(|_| IndexSet::with_capacity(n)).collect();
    for (&v, &c) in rev.first_row_sc.iter().zip(&sc) {
        base[0].set(c, v == 1);
    }
    let p = if p_is_s(n) { &s } else { &sc };
    for (&v, &c) in rev.last_row_p.iter().zip(p) {
        base[n - 1].set(c, v == 1);
    }
    // (row x, row y, T, choices for row x's ones on T)
    let mut choice_blocks = Vec::new();
    let (mut odd_k, mut even_k) = (0, 0);
    for (x, y, half) in blocks(n) {
        let (sums, support, row_sum) = match half {
            Half::S => {
                odd_k += 1;
                (&rev.odd_pair_sums[odd_k - 1], &s, rev.row_sums_s[x])
            }
            Half::Sc => {
                even_k += 1;
                (&rev.even_pair_sums[even_k - 1], &sc, rev.row_sums_sc[x])
            }
        };
        let mut t = Vec::new();
        for (&v, &c) in sums.iter().zip(support.iter()) {
            match v {
                2 => {
                    base[x].insert(c);
                    base[y].insert(c);
                }
                1 => t.push(c),
                _ => {}
            }
        }
        let k = required_ones(row_sum, sums, t.len())?;
        let choices = combinations(&t, k);
        choice_blocks.push((x, y, t, choices));
    }

    let mut out = Vec::new();
    let mut pick = vec![0usize; choice_blocks.len()];
    loop {
        let mut rows = base.clone();
        for ((x, y, t, choices), &p) in choice_blocks.iter().zip(&pick) {
            for &c in t {
                rows[*y].insert(c);
            }
            for &c in &choices[p] {
                rows[*x].insert(c);
                rows[*y].set(c, false);
            }
        }
        let mut by_row = vec![IndexSet::with_capacity(n); n];
        for (k, row) in rows.into_iter().enumerate() {
            by_row[rev.pair.sigma[k]] = row;
        }
        out.push(RegularDigraphMatrix::from_rows(n, rev.d, by_row)?);
        // Odometer over the blocks' choices, last block fastest.
        let mut b = choice_blocks.len();
        loop {
            if b == 0 {
                return Ok(out);
            }
            b -= 1;
            pick[b] += 1;
            if pick[b] < choice_blocks[b].3.len() {
                break;
            }
            pick[b] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::canonical_start;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn n2_has_one_odd_pair() {
        let a = RegularDigraphMatrix::identity(2);
        let pair = SplitMatchPair::with_identity(2, [0]).unwrap();
        let rev = extract_revealed(&a, &pair).unwrap();
        assert_eq!(rev.odd_pair_sums, vec![vec![1]]);
        assert!(rev.even_pair_sums.is_empty());
        assert_eq!(rev.first_row_sc, vec![0]);
        assert_eq!(rev.last_row_p, vec![1]);
        let ext = enumerate_extensions(&rev).unwrap();
        assert_eq!(ext.len(), 1);
        assert_eq!(ext[0], a);
    }

    #[test]
    fn circulant_4_2_by_hand() {
        // Rows {0,1}, {1,2}, {2,3}, {3,0}; S = {0,1}, S^c = {2,3}.
        let a = canonical_start(4, 2).unwrap();
        let pair = SplitMatchPair::with_identity(4, [0, 1]).unwrap();
        let rev = extract_revealed(&a, &pair).unwrap();
        assert_eq!(rev.row_sums_s, vec![2, 1, 0, 1]);
        assert_eq!(rev.row_sums_sc, vec![0, 1, 2, 1]);
        assert_eq!(rev.odd_pair_sums, vec![vec![1, 2], vec![1, 0]]);
        assert_eq!(rev.even_pair_sums, vec![vec![2, 1]]);
        assert_eq!(rev.first_row_sc, vec![0, 0]);
        assert_eq!(rev.last_row_p, vec![0, 1]);
        let (odd, even) = rev.t_sets();
        assert_eq!(bits::to_indices(&odd[0]), vec![0]);
        assert_eq!(bits::to_indices(&odd[1]), vec![0]);
        assert_eq!(bits::to_indices(&even[0]), vec![3]);
        // Each T-set is a single position, so the row sums force everything.
        assert_eq!(enumerate_extensions(&rev).unwrap(), vec![a]);
    }

    #[test]
    fn one_free_pair_gives_two_extensions() {
        // Rows 0 = {0,2}, 1 = {1,3}: on S = {0,1} they differ in both places
        // with one one each, so (1,0)/(0,1) and (0,1)/(1,0) are both allowed.
        let rows = vec![
            bits::from_indices(4, [0, 2]),
            bits::from_indices(4, [1, 3]),
            bits::from_indices(4, [1, 2]),
            bits::from_indices(4, [0, 3]),
        ];
        let a = RegularDigraphMatrix::from_rows(4, 2, rows).unwrap();
        let pair = SplitMatchPair::with_identity(4, [0, 1]).unwrap();
        let rev = extract_revealed(&a, &pair).unwrap();
        let ext = enumerate_extensions(&rev).unwrap();
        assert!(ext.len() >= 2);
        assert!(ext.contains(&a));
        for m in &ext {
            assert_eq!(extract_revealed(m, &pair).unwrap(), rev);
        }
    }

    #[test]
    fn resample_preserves_information() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [5usize, 8, 13] {
            let a = canonical_start(n, n / 3 + 1).unwrap();
            let pair = SplitMatchPair::random(n, &mut rng);
            let rev = extract_revealed(&a, &pair).unwrap();
            for _ in 0..20 {
                let b = resample_conditional(&a, &pair, &mut rng).unwrap();
                assert!(RegularDigraphMatrix::validate(&b.to_dense(), a.d()).is_ok());
                assert_eq!(extract_revealed(&b, &pair).unwrap(), rev);
            }
        }
    }

    #[test]
    fn identical_pairs_are_fixed_points() {
        let a = RegularDigraphMatrix::all_ones(4);
        let pair = SplitMatchPair::with_identity(4, [0, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(resample_conditional(&a, &pair, &mut rng).unwrap(), a);
    }

    #[test]
    fn extension_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = canonical_start(40, 20).unwrap();
        let pair = SplitMatchPair::random(40, &mut rng);
        let rev = extract_revealed(&a, &pair).unwrap();
        assert!(rev.free_positions() > EXTENSION_BUDGET);
        assert!(matches!(enumerate_extensions(&rev), Err(Error::BudgetExceeded { .. })));
    }
}
