use rand::Rng;

use super::clcd::{clcd, ClcdParams};
use super::difference::differences;
use crate::stats::binomial_half_width_99;
use crate::vectorclass::max_window_count;
use crate::{Error, Result};

/// One draw of `W_{t,v} = Σ b_i v_i` with `b` uniform on the 0/1 vectors of
/// weight `t`.
pub fn sample_w<R: Rng + ?Sized>(t: usize, v: &[f64], rng: &mut R) -> Result<f64> {
    let n = v.len();
    if t > n {
        return Err(Error::invalid(format!("t = {t} exceeds N = {n}")));
    }
    if t == n {
        return Ok(v.iter().sum());
    }
    Ok(rand::seq::index::sample(rng, n, t).iter().map(|i| v[i]).sum())
}

/// Empirical Lévy concentration `sup_x P[|X - x| < ε]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyEstimate {
    pub epsilon: f64,
    pub estimate: f64,
    pub sample_count: usize,
    /// 99% Wilson half-width of `estimate` as a binomial proportion.
    pub half_width: f64,
}

/// Exact Lévy concentration of the empirical measure of `samples`: the largest
/// fraction lying in an open interval of length `2ε`.
pub fn levy_estimate(samples: &[f64], epsilon: f64) -> Result<LevyEstimate> {
    if samples.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::invalid(format!("ε must be nonnegative, got {epsilon}")));
    }
    let hits = max_window_count(samples, 2.0 * epsilon);
    let n = samples.len();
    Ok(LevyEstimate {
        epsilon,
        estimate: hits as f64 / n as f64,
        sample_count: n,
        half_width: binomial_half_width_99(hits as u64, n as u64),
    })
}

/// Settings for [`check_anticoncentration`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntiConcentrationParams {
    pub alpha: f64,
    pub gamma: f64,
    /// Constant `a` of the hypothesis `‖D(v)‖₂ ≥ a√(N/(τ(1−τ)))`, `τ = t/N`.
    pub a: f64,
    pub theta_max: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntiConcentrationReport {
    pub applicable: bool,
    pub empirical: LevyEstimate,
    pub clcd: f64,
    pub eps_term: f64,
    /// `1/CLCD`, zero when the CLCD exceeds the search ceiling.
    pub clcd_term: f64,
    /// `exp(−8τ(1−τ)α²/N)`.
    pub exp_term: f64,
    /// `empirical / (ε + 1/CLCD + exp term)`.
    pub fitted_c: f64,
}

/// Estimates `ℒ(W_{t,v}, ε)` by Monte Carlo and compares it with
/// `ε + 1/CLCD_{α,γ}(v) + exp(−8τ(1−τ)α²/N)`.
pub fn check_anticoncentration<R: Rng + ?Sized>(
    v: &[f64],
    t: usize,
    epsilon: f64,
    params: &AntiConcentrationParams,
    rng: &mut R,
) -> Result<AntiConcentrationReport> {
    let n = v.len();
    if n < 2 {
        return Err(Error::invalid("anti-concentration needs N >= 2"));
    }
    if params.samples == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    let tau = t as f64 / n as f64;
    let dnorm = differences(v).norm();
    let applicable = tau > 0.0 && tau < 1.0 && dnorm >= params.a * (n as f64 / (tau * (1.0 - tau))).sqrt();

    let draws = (0..params.samples).map(|_| sample_w(t, v, rng)).collect::<Result<Vec<_>>>()?;
    let empirical = levy_estimate(&draws, epsilon)?;
    let c = clcd(v, &ClcdParams::new(params.alpha, params.gamma, params.theta_max)?);
    let clcd_term = if c.is_finite() { 1.0 / c } else { 0.0 };
    let exp_term = (-8.0 * tau * (1.0 - tau) * params.alpha * params.alpha / n as f64).exp();
    let bound = epsilon + clcd_term + exp_term;
    Ok(AntiConcentrationReport {
        applicable,
        empirical,
        clcd: c,
        eps_term: epsilon,
        clcd_term,
        exp_term,
        fitted_c: if bound > 0.0 { empirical.estimate / bound } else { f64::INFINITY },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn slice_walk_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = [0.3, -1.2, 2.0];
        for _ in 0..20 {
            assert_eq!(sample_w(0, &v, &mut rng).unwrap(), 0.0);
            assert_eq!(sample_w(3, &v, &mut rng).unwrap(), v.iter().sum::<f64>());
            assert_eq!(sample_w(1, &[1.0, 1.0], &mut rng).unwrap(), 1.0);
        }
        assert!(sample_w(4, &v, &mut rng).is_err());
    }

    #[test]
    fn levy_examples() {
        assert_eq!(levy_estimate(&[2.0; 10], 0.1).unwrap().estimate, 1.0);
        assert_eq!(levy_estimate(&[0.0, 1.0, 0.0, 1.0], 0.4).unwrap().estimate, 0.5);
        assert_eq!(levy_estimate(&[0.0, 1.0], 0.5).unwrap().estimate, 0.5);
        assert_eq!(levy_estimate(&[0.0, 1.0], 0.5 + 1e-9).unwrap().estimate, 1.0);
        assert_eq!(levy_estimate(&[0.0, 0.0], 0.0).unwrap().estimate, 0.0);
        assert!(levy_estimate(&[], 0.1).is_err());
    }

    #[test]
    fn wide_window_covers_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v: Vec<f64> = (0..12).map(|i| if i < 6 { 1.0 } else { -1.0 } / 12f64.sqrt()).collect();
        let p = AntiConcentrationParams { alpha: 3.0, gamma: 0.1, a: 0.25, theta_max: 100.0, samples: 2000 };
        let r = check_anticoncentration(&v, 6, 10.0, &p, &mut rng).unwrap();
        assert!(r.applicable);
        assert_eq!(r.empirical.estimate, 1.0);
        assert!(r.fitted_c <= 1.0 / 10.0);
    }
}
