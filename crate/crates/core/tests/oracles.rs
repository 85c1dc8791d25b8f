use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use regdigraph::harness::{det_mod_p, exact_singular};
use regdigraph::sampler::{count_mnd, enumerate_mnd, trial_rng, Method, Sampler, SamplerConfig};
use regdigraph::spectral::smallest_singular_value;
use regdigraph::stats::chi_square_uniform_p_value;
use regdigraph::RegularDigraphMatrix;
use std::collections::HashMap;

/// Rank over ℚ by Gaussian elimination with exact rationals.
fn rational_rank(rows: &[Vec<u8>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect();
    let (n, cols) = (m.len(), m.first().map_or(0, Vec::len));
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..n).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = BigRational::one() / m[rank][c].clone();
        for r in 0..n {
            if r != rank && !m[r][c].is_zero() {
                let f = m[r][c].clone() * inv.clone();
                let pivot = m[rank].clone();
                for (x, p) in m[r].iter_mut().zip(&pivot).skip(c) {
                    *x -= f.clone() * p.clone();
                }
            }
        }
        rank += 1;
    }
    rank
}

#[test]
fn exact_singularity_matches_rational_elimination_on_m42() {
    let all = enumerate_mnd(4, 2).unwrap();
    assert_eq!(all.len(), 90);
    let mut singular = 0;
    for a in &all {
        let dense = a.to_dense();
        let oracle = rational_rank(&dense) < 4;
        assert_eq!(exact_singular(a), oracle, "{}", a.to_text());
        singular += usize::from(oracle);
    }
    // a 2-regular bipartite graph on 4 + 4 vertices is an 8-cycle, giving a
    // row permutation of I + C₄ (det 0), or two 4-cycles, giving J₂ blocks
    assert_eq!(singular, 90);
}

#[test]
fn exact_singularity_matches_rational_elimination_on_m52() {
    let all = enumerate_mnd(5, 2).unwrap();
    let verdicts: Vec<bool> = all.iter().map(|a| rational_rank(&a.to_dense()) < 5).collect();
    for (a, &oracle) in all.iter().zip(&verdicts) {
        assert_eq!(exact_singular(a), oracle, "{}", a.to_text());
    }
    // both outcomes occur: I + C₅ has determinant 2
    assert!(verdicts.iter().any(|&x| x) && verdicts.iter().any(|&x| !x));
}

#[test]
fn exact_singularity_matches_rational_elimination_on_samples() {
    for (n, d) in [(7, 2), (9, 3), (12, 3), (16, 8)] {
        let sampler = Sampler::new(SamplerConfig::new(n, d, 11)).unwrap();
        for t in 0..40 {
            let a = sampler.draw(&mut trial_rng(11, t)).unwrap();
            assert_eq!(exact_singular(&a), rational_rank(&a.to_dense()) < n, "n = {n}, trial {t}");
        }
    }
}

#[test]
fn spectral_and_exact_paths_agree_at_small_n() {
    let sampler = Sampler::new(SamplerConfig::new(8, 2, 5)).unwrap();
    for t in 0..300 {
        let a = sampler.draw(&mut trial_rng(5, t)).unwrap();
        let s = smallest_singular_value(&a.to_dmatrix());
        assert_eq!(exact_singular(&a), s <= 1e-6, "trial {t}: s_min = {s}");
    }
}

#[test]
fn determinant_residues_of_known_matrices() {
    let p = 2_147_483_647;
    let ones = vec![vec![1u8; 3]; 3];
    assert_eq!(det_mod_p(&ones, p), 0);
    // circulant(3, 2) = J − I has determinant 2
    let c = vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]];
    assert_eq!(det_mod_p(&c, p), 2);
    assert!(!exact_singular(&RegularDigraphMatrix::identity(5)));
    assert!(exact_singular(&RegularDigraphMatrix::all_ones(5)));
}

#[test]
fn enumeration_counts() {
    // row/column sums 2: 1, 6, 90, 2040; sums 3 at n = 6: 297200
    assert_eq!(count_mnd(2, 2).unwrap(), 1);
    assert_eq!(count_mnd(3, 2).unwrap(), 6);
    assert_eq!(count_mnd(4, 2).unwrap(), 90);
    assert_eq!(count_mnd(5, 2).unwrap(), 2040);
    assert_eq!(count_mnd(6, 3).unwrap(), 297_200);
    assert_eq!(count_mnd(5, 1).unwrap(), 120);
}

#[test]
fn switch_chain_is_close_to_uniform_on_m42() {
    let all = enumerate_mnd(4, 2).unwrap();
    let index: HashMap<_, _> = all.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
    let cfg = SamplerConfig { method: Method::SwitchChain, burn_in: 200, ..SamplerConfig::new(4, 2, 3) };
    let sampler = Sampler::new(cfg).unwrap();
    let mut counts = vec![0u32; all.len()];
    for t in 0..18_000 {
        counts[index[&sampler.draw(&mut trial_rng(3, t)).unwrap()]] += 1;
    }
    let p = chi_square_uniform_p_value(&counts);
    assert!(p > 1e-3, "chi-square p = {p}");
}

#[test]
fn pair_rejection_is_uniform_on_m42() {
    let all = enumerate_mnd(4, 2).unwrap();
    let index: HashMap<_, _> = all.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
    let cfg = SamplerConfig { method: Method::PairRejection, ..SamplerConfig::new(4, 2, 4) };
    let sampler = Sampler::new(cfg).unwrap();
    let mut counts = vec![0u32; all.len()];
    for t in 0..18_000 {
        counts[index[&sampler.draw(&mut trial_rng(4, t)).unwrap()]] += 1;
    }
    let p = chi_square_uniform_p_value(&counts);
    assert!(p > 1e-3, "chi-square p = {p}");
}
