//! Compressible, incompressible and almost-constant vectors, and counts of
//! coordinates of typical size `1/√N`.

use crate::{Error, Result};

/// Parameters `(δ, ρ)` of the compressible / almost-constant classes together
/// with the spread triple `ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassParams {
    pub delta: f64,
    pub rho: f64,
    pub nu: [f64; 3],
}

impl ClassParams {
    pub fn new(delta: f64, rho: f64, nu: [f64; 3]) -> Result<Self> {
        let p = Self { delta, rho, nu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0 && self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::invalid(format!("need 0 < δ, ρ < 1, got δ = {}, ρ = {}", self.delta, self.rho)));
        }
        if self.nu.iter().any(|&x| !(x > 0.0)) || self.nu[1] > self.nu[2] {
            return Err(Error::invalid(format!("need ν > 0 and ν₂ <= ν₃, got {:?}", self.nu)));
        }
        Ok(())
    }

    /// `ν` from [`bispread_constants`] applied to [`spread_constants`]`(δ, ρ)`.
    pub fn derived(delta: f64, rho: f64) -> Result<Self> {
        let mu = spread_constants(delta, rho);
        Self::new(delta, rho, bispread_constants(mu[0], mu[1], mu[2]))
    }
}

/// A unit vector, optionally also summing to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereVector(Vec<f64>);

impl SphereVector {
    /// Normalizes `v`; fails on the zero vector.
    pub fn normalized(mut v: Vec<f64>) -> Result<Self> {
        let norm = l2(&v);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        Ok(Self(v))
    }

    /// Projects onto `1^⊥` and normalizes.
    pub fn sum_zero(mut v: Vec<f64>) -> Result<Self> {
        let mean = v.iter().sum::<f64>() / v.len().max(1) as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        Self::normalized(v)
    }

    /// Accepts `v` as is if it is unit to within `1e-12`.
    pub fn from_unit(v: Vec<f64>) -> Result<Self> {
        if (l2(&v) - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("vector has norm {}, expected 1", l2(&v))));
        }
        Ok(Self(v))
    }

    pub fn is_sum_zero(&self) -> bool {
        self.0.iter().sum::<f64>().abs() <= 1e-10 * (self.0.len() as f64).sqrt()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for SphereVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Distance from `v` to the set of `k`-sparse vectors: the norm of `v` with
/// its `k` largest-magnitude coordinates removed.
pub fn dist_to_sparse(v: &[f64], k: usize) -> f64 {
    let mut sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    sq.sort_by(|a, b| b.total_cmp(a));
    sq.iter().skip(k).sum::<f64>().sqrt()
}

/// `v ∈ Comp_{δ,ρ}`: within distance `< ρ` of a `⌊δN⌋`-sparse vector.
pub fn is_compressible(v: &[f64], delta: f64, rho: f64) -> bool {
    let k = (delta * v.len() as f64).floor() as usize;
    dist_to_sparse(v, k) < rho
}

/// `v ∈ Cons_{δ,ρ}`: some `λ` has `|v_i - λ| < ρ‖v‖₂/√N` for at least
/// `(1-δ)N` coordinates.
pub fn is_almost_constant(v: &[f64], delta: f64, rho: f64) -> Result<bool> {
    let norm = l2(v);
    if norm == 0.0 {
        return Err(Error::invalid("almost-constancy is undefined for the zero vector"));
    }
    let n = v.len();
    let width = 2.0 * rho * norm / (n as f64).sqrt();
    Ok(max_window_count(v, width) as f64 >= (1.0 - delta) * n as f64)
}

/// Largest number of coordinates fitting in an open window of length `width`.
pub(crate) fn max_window_count(v: &[f64], width: f64) -> usize {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let mut best = 0;
    let mut hi = 0;
    for lo in 0..s.len() {
        if hi < lo {
            hi = lo;
        }
        while hi < s.len() && s[hi] - s[lo] < width {
            hi += 1;
        }
        best = best.max(hi - lo);
    }
    best
}

/// Counts of coordinates with `v_i√N ∈ [ν₂, ν₃]` and `v_i√N ∈ [-ν₃, -ν₂]`.
pub fn spread_count(v: &[f64], nu2: f64, nu3: f64) -> (usize, usize) {
    let root = (v.len() as f64).sqrt();
    v.iter().fold((0, 0), |(pos, neg), &x| {
        let y = x * root;
        (
            pos + usize::from((nu2..=nu3).contains(&y)),
            neg + usize::from((-nu3..=-nu2).contains(&y)),
        )
    })
}

/// Signed spread constants `(ν₁, ν₂, ν₃)` from unsigned ones `(μ₁, μ₂, μ₃)`.
pub fn bispread_constants(mu1: f64, mu2: f64, mu3: f64) -> [f64; 3] {
    [
        (mu1 / 2.0).min(mu1 * mu1 * mu2 * mu2 / 32.0),
        (mu1 * mu2 / 8.0).min(mu2),
        mu3.max(4.0 / (mu1 * mu2)),
    ]
}

/// Explicit unsigned spread constants for `Incomp_{δ,ρ}`: more than
/// `ρ²δN/2` coordinates satisfy `|v_i|√N ∈ [ρ/√2, 1/√δ]`.
///
/// Coordinates above `1/√(δN)` number fewer than `δN`, so removing them
/// leaves mass at least `ρ²`; coordinates below `ρ/√(2N)` carry less than
/// `ρ²/2` of it.
pub fn spread_constants(delta: f64, rho: f64) -> [f64; 3] {
    [rho * rho * delta / 2.0, rho / 2f64.sqrt(), 1.0 / delta.sqrt()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_distance_examples() {
        assert_eq!(dist_to_sparse(&[1.0, 0.0, 0.0], 1), 0.0);
        let u = vec![0.5; 4];
        assert!((dist_to_sparse(&u, 2) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((dist_to_sparse(&[0.6, 0.8], 1) - 0.6).abs() < 1e-15);
        assert!((dist_to_sparse(&[0.6, 0.8], 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn compressibility_examples() {
        assert!(is_compressible(&[0.0, 1.0, 0.0, 0.0], 0.25, 0.1));
        let n = 100;
        let u = vec![1.0 / (n as f64).sqrt(); n];
        // residual √0.9 ≈ 0.949 against ρ = 0.5
        assert!(!is_compressible(&u, 0.1, 0.5));
        let mut v = vec![0.0; 10];
        v[0] = 0.6;
        v[1] = 0.8;
        assert!(is_compressible(&v, 0.1, 0.7));
        assert!(!is_compressible(&v, 0.1, 0.6 - 1e-9));
    }

    #[test]
    fn almost_constant_examples() {
        assert!(is_almost_constant(&[2.0; 5], 0.1, 0.1).unwrap());
        let s = 0.5f64.sqrt();
        assert!(!is_almost_constant(&[s, -s], 0.4, 0.5).unwrap());
        let mut z = vec![0.0; 10];
        z[3] = 1.0;
        assert!(is_almost_constant(&z, 0.1, 1e-6).unwrap());
        assert!(is_almost_constant(&[0.0; 3], 0.1, 0.1).is_err());
    }

    #[test]
    fn spread_count_examples() {
        let s = 0.5f64.sqrt();
        assert_eq!(spread_count(&[s, -s], 0.5, 2.0), (1, 1));
        assert_eq!(spread_count(&[0.5; 4], 0.5, 2.0).1, 0);
        let n = 8;
        let r = 1.0 / (n as f64).sqrt();
        let alt: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { r } else { -r }).collect();
        assert_eq!(spread_count(&alt, 0.9, 1.1), (4, 4));
    }

    #[test]
    fn bispread_examples() {
        assert_eq!(bispread_constants(1.0, 1.0, 1.0), [1.0 / 32.0, 1.0 / 8.0, 4.0]);
        assert_eq!(bispread_constants(2.0, 2.0, 1.0), [0.5, 0.5, 1.0]);
        let small = bispread_constants(1.0, 1e-6, 1.0);
        assert!(small[0] < 1e-12 && small[2] > 1e6);
    }

    #[test]
    fn class_params_validation() {
        assert!(ClassParams::new(0.0, 0.5, [0.1, 0.1, 1.0]).is_err());
        assert!(ClassParams::new(0.5, 0.5, [0.1, 2.0, 1.0]).is_err());
        let p = ClassParams::derived(0.1, 0.5).unwrap();
        assert!(p.nu[1] <= p.nu[2]);
    }

    #[test]
    fn sphere_vector_constructors() {
        let v = SphereVector::sum_zero(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(v.is_sum_zero());
        assert!((l2(v.coords()) - 1.0).abs() < 1e-12);
        assert!(SphereVector::normalized(vec![0.0, 0.0]).is_err());
        assert!(SphereVector::from_unit(vec![1.0, 1.0]).is_err());
    }
}
