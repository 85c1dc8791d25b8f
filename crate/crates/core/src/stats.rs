//! Small statistics helpers shared by tests and experiment drivers.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Two-sided standard normal quantile for 99% confidence.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Half-width of the Wilson score interval for `successes / trials` at
/// two-sided confidence `1 - alpha`.
pub fn wilson_half_width(successes: u64, trials: u64, alpha: f64) -> f64 {
    if trials == 0 {
        return 0.5;
    }
    let z = normal_quantile(1.0 - alpha / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom
}

/// 99% Wilson half-width.
pub fn binomial_half_width_99(successes: u64, trials: u64) -> f64 {
    wilson_half_width(successes, trials, 0.01)
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Pearson statistic of `counts` against the uniform distribution.
pub fn chi_square_uniform(counts: &[u32]) -> f64 {
    let total: f64 = counts.iter().map(|&c| c as f64).sum();
    let expected = total / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

/// Upper tail probability of the chi-square statistic with `k - 1` degrees of freedom.
pub fn chi_square_uniform_p_value(counts: &[u32]) -> f64 {
    if counts.len() < 2 {
        return 1.0;
    }
    let stat = chi_square_uniform(counts);
    ChiSquared::new((counts.len() - 1) as f64).expect("positive dof").sf(stat)
}

/// Total-variation distance between the empirical distribution of `counts`
/// and the uniform distribution on the same support.
pub fn tv_from_uniform(counts: &[u32]) -> f64 {
    let total: f64 = counts.iter().map(|&c| c as f64).sum();
    let u = 1.0 / counts.len() as f64;
    0.5 * counts.iter().map(|&c| (c as f64 / total - u).abs()).sum::<f64>()
}

/// Empirical `q`-quantile by the nearest-rank rule on a copy of `values`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_and_intervals() {
        assert!((normal_quantile(0.995) - Z99).abs() < 1e-9);
        assert_eq!(quantile(&[3.0, 1.0, 2.0, 4.0], 0.5), 2.0);
        assert_eq!(quantile(&[3.0, 1.0, 2.0, 4.0], 0.01), 1.0);
        let hw = binomial_half_width_99(0, 10_000);
        assert!(hw > 0.0 && hw < 1e-3);
        assert!(binomial_half_width_99(5000, 10_000) < 0.013);
    }

    #[test]
    fn chi_square_and_tv() {
        assert_eq!(chi_square_uniform(&[10, 10, 10]), 0.0);
        assert!((chi_square_uniform_p_value(&[10, 10, 10]) - 1.0).abs() < 1e-12);
        assert!(chi_square_uniform_p_value(&[100, 0, 0]) < 1e-10);
        assert!((tv_from_uniform(&[1, 0]) - 0.5).abs() < 1e-12);
    }
}
