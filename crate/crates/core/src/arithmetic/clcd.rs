use super::difference::differences;
use crate::bits::{self, IndexSet};
use crate::structures::{event_j, SplitMatchPair};
use crate::vectorclass::{is_almost_constant, l2};
use crate::{Error, Result};

/// Largest dimension accepted by [`oracle_clcd`].
pub const ORACLE_MAX_DIM: usize = 8;
/// Largest number of breakpoints [`oracle_clcd`] will sort and sweep.
pub const ORACLE_BREAKPOINT_BUDGET: usize = 20_000_000;

const BISECTION_TOL: f64 = 1e-9;

/// Parameters of `CLCD_{α,γ}` and the search range `(0, θ_max]`.
///
/// The effective grid step is `min(grid_step, γ/(10‖D(v)‖₂))`, so leaving
/// `grid_step` unset uses the refinement bound alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClcdParams {
    pub alpha: f64,
    pub gamma: f64,
    pub theta_max: f64,
    pub grid_step: Option<f64>,
}

impl ClcdParams {
    pub fn new(alpha: f64, gamma: f64, theta_max: f64) -> Result<Self> {
        let p = Self { alpha, gamma, theta_max, grid_step: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_grid_step(mut self, step: f64) -> Result<Self> {
        self.grid_step = Some(step);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::invalid(format!("α must be positive, got {}", self.alpha)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::invalid(format!("γ must lie in (0, 1), got {}", self.gamma)));
        }
        if !(self.theta_max > 0.0) || self.theta_max.is_nan() {
            return Err(Error::invalid(format!("θ_max must be positive, got {}", self.theta_max)));
        }
        if let Some(s) = self.grid_step {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid(format!("grid step must be positive, got {s}")));
            }
        }
        Ok(())
    }

    fn scaled(&self, alpha: f64, gamma: f64) -> Self {
        Self { alpha, gamma, ..*self }
    }
}

/// Multiset of index sets `{{T₁, …, T_t}}` over which QCLCD takes an order
/// statistic. Empty sets are representable (they arise from T-set
/// construction) and contribute `+∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionFamily {
    pub sets: Vec<IndexSet>,
}

impl RestrictionFamily {
    pub fn new(sets: Vec<IndexSet>) -> Self {
        Self { sets }
    }

    pub fn t(&self) -> usize {
        self.sets.len()
    }

    /// Positions of empty sets.
    pub fn empty_positions(&self) -> Vec<usize> {
        self.sets.iter().enumerate().filter(|(_, s)| s.count_ones(..) == 0).map(|(i, _)| i).collect()
    }

    /// Fails if any set is empty.
    pub fn validate(&self) -> Result<()> {
        match self.empty_positions().first() {
            Some(i) => Err(Error::invalid(format!("restriction set {i} is empty"))),
            None => Ok(()),
        }
    }
}

/// Squared distance from `θD` to the integer lattice and the squared cap
/// `min(γθ‖D‖, α)²`.
fn margin(d: &[f64], norm: f64, theta: f64, p: &ClcdParams) -> (f64, f64) {
    let dist2: f64 = d
        .iter()
        .map(|&x| {
            let y = theta * x;
            let r = y - y.round();
            r * r
        })
        .sum();
    let cap = (p.gamma * theta * norm).min(p.alpha);
    (dist2, cap * cap)
}

fn qualifies(d: &[f64], norm: f64, theta: f64, p: &ClcdParams) -> bool {
    let (dist2, cap2) = margin(d, norm, theta, p);
    dist2 < cap2
}

/// `CLCD_{α,γ}(v)`: the infimum of `θ ∈ (0, θ_max]` with
/// `dist(θD(v), ℤ^{N choose 2}) < min(γ‖θD(v)‖₂, α)`, or `+∞` if none qualifies.
///
/// Scans a grid from `1/(2 max|D_k|)` (below which `θD` rounds to the origin
/// and cannot qualify) and bisects the first sign change down to `1e-9`. The
/// returned value is the lower end of that bracket.
pub fn clcd(v: &[f64], params: &ClcdParams) -> f64 {
    let dv = differences(v);
    let d = &dv.values;
    let norm = dv.norm();
    let dmax = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if dmax == 0.0 || !norm.is_finite() {
        return f64::INFINITY;
    }
    let mut step = params.gamma / (10.0 * norm);
    if let Some(s) = params.grid_step {
        step = step.min(s);
    }
    let start = 0.5 / dmax;
    if start >= params.theta_max {
        return f64::INFINITY;
    }
    let mut lo = start;
    let mut k: u64 = 1;
    loop {
        let hi = (start + k as f64 * step).min(params.theta_max);
        if qualifies(d, norm, hi, params) {
            return bisect(d, norm, lo, hi, params);
        }
        if hi >= params.theta_max {
            return f64::INFINITY;
        }
        lo = hi;
        k += 1;
    }
}

/// `lo` fails, `hi` qualifies; narrows to the first boundary found.
fn bisect(d: &[f64], norm: f64, mut lo: f64, mut hi: f64, params: &ClcdParams) -> f64 {
    for _ in 0..200 {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if qualifies(d, norm, mid, params) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Exact `CLCD_{α,γ}(v)` over `(0, θ_max]` for small `N`.
///
/// Between consecutive breakpoints `θ = (m + ½)/|D_k|` the nearest lattice
/// point `z` is fixed, and on either side of `θ_α = α/(γ‖D‖)` the cap is a
/// single expression, so the qualifying condition is a quadratic inequality
/// in `θ` solved in closed form on each piece. The first nonempty piece gives
/// the infimum.
pub fn oracle_clcd(v: &[f64], params: &ClcdParams) -> Result<f64> {
    params.validate()?;
    if v.len() > ORACLE_MAX_DIM {
        return Err(Error::BudgetExceeded { what: "oracle dimension", limit: ORACLE_MAX_DIM as u64 });
    }
    let d = differences(v).values;
    let a: f64 = d.iter().map(|x| x * x).sum();
    if a == 0.0 {
        return Ok(f64::INFINITY);
    }
    let norm = a.sqrt();
    let tmax = params.theta_max;
    let theta_alpha = params.alpha / (params.gamma * norm);

    let mut cuts = Vec::new();
    for &x in &d {
        let c = x.abs();
        if c == 0.0 {
            continue;
        }
        let count = (tmax * c + 0.5).floor();
        if count > ORACLE_BREAKPOINT_BUDGET as f64 || cuts.len() + count as usize > ORACLE_BREAKPOINT_BUDGET {
            return Err(Error::BudgetExceeded { what: "oracle breakpoints", limit: ORACLE_BREAKPOINT_BUDGET as u64 });
        }
        let mut m = 0.0;
        loop {
            let t = (m + 0.5) / c;
            if t >= tmax {
                break;
            }
            cuts.push(t);
            m += 1.0;
        }
    }
    if theta_alpha < tmax {
        cuts.push(theta_alpha);
    }
    cuts.push(tmax);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let g2 = params.gamma * params.gamma;
    let mut lo = 0.0;
    for &hi in &cuts {
        if hi <= lo {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let (mut b, mut c) = (0.0, 0.0);
        for &x in &d {
            let z = (mid * x).round();
            b += x * z;
            c += z * z;
        }
        // Q(θ) = qa θ² - 2bθ + qc < 0
        let (qa, qc) = if mid < theta_alpha { (a * (1.0 - g2), c) } else { (a, c - params.alpha * params.alpha) };
        if let Some((r1, r2)) = negative_interval(qa, b, qc) {
            let from = lo.max(r1);
            let to = hi.min(r2);
            if from < to {
                return Ok(from);
            }
        }
        lo = hi;
    }
    Ok(f64::INFINITY)
}

/// Open interval where `qa θ² - 2bθ + qc < 0`, with `qa > 0`.
fn negative_interval(qa: f64, b: f64, qc: f64) -> Option<(f64, f64)> {
    let disc = b * b - qa * qc;
    if disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    // Avoid cancellation in the smaller root.
    if b >= 0.0 {
        let r2 = (b + s) / qa;
        let r1 = if b + s > 0.0 { qc / (b + s) } else { (b - s) / qa };
        Some((r1, r2))
    } else {
        let r1 = (b - s) / qa;
        let r2 = qc / (b - s);
        Some((r1, r2))
    }
}

/// `QCLCD^𝒯_{ℓ,α,γ}(v)`: the `ℓ`-th smallest (1-based) of the CLCDs of the
/// restrictions `v|_T`, `+∞` sorting last. Restrictions to fewer than two
/// coordinates count as `+∞`.
pub fn qclcd(v: &[f64], family: &RestrictionFamily, ell: usize, params: &ClcdParams) -> Result<f64> {
    if ell == 0 || ell > family.t() {
        return Err(Error::invalid(format!("ℓ = {ell} outside [1, {}]", family.t())));
    }
    let mut values = restricted_clcds(v, family, params);
    values.sort_by(f64::total_cmp);
    Ok(values[ell - 1])
}

/// CLCD of each restriction, in family order.
pub fn restricted_clcds(v: &[f64], family: &RestrictionFamily, params: &ClcdParams) -> Vec<f64> {
    family.sets.iter().map(|t| clcd(&bits::restrict(v, t), params)).collect()
}

/// Outcome of comparing `CLCD_{α/2,γ/2}(w)` with
/// `min(CLCD_{α,γ}(v), α/(4√N‖v−w‖₂))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// `‖v − w‖₂ < γ‖D(v)‖₂/(5√N)`.
    pub applicable: bool,
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Checks CLCD stability under a small perturbation `v → w`.
///
/// When `v ≠ w` the search ceiling is raised or lowered to `1.01·α/(4√N‖v−w‖₂)`
/// so that a `+∞` from either side is conclusive; `theta_max` is used only
/// when `v = w`.
pub fn check_stability(v: &[f64], w: &[f64], alpha: f64, gamma: f64, theta_max: f64) -> Result<StabilityReport> {
    if v.len() != w.len() {
        return Err(Error::invalid("v and w differ in length"));
    }
    let n = v.len() as f64;
    let gap = l2(&v.iter().zip(w).map(|(a, b)| a - b).collect::<Vec<_>>());
    let applicable = gap < gamma * differences(v).norm() / (5.0 * n.sqrt());
    let term = if gap == 0.0 { f64::INFINITY } else { alpha / (4.0 * n.sqrt() * gap) };
    let ceiling = if term.is_finite() { 1.01 * term } else { theta_max };
    let params = ClcdParams::new(alpha, gamma, ceiling)?;
    let rhs = clcd(v, &params).min(term);
    let lhs = clcd(w, &params.scaled(alpha / 2.0, gamma / 2.0));
    Ok(StabilityReport { applicable, holds: !applicable || lhs >= rhs, lhs, rhs })
}

/// `x ∈ L_{H,χ,μ}`: not almost-constant, `‖x‖₂ ∈ [χ, 1]`, and
/// `CLCD_{μN,γ}(x) ∈ [H, 2H]`.
#[allow(clippy::too_many_arguments)]
pub fn clcd_level_membership(x: &[f64], h: f64, chi: f64, mu: f64, delta: f64, rho: f64, gamma: f64) -> Result<bool> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("H must be positive, got {h}")));
    }
    let norm = l2(x);
    if norm == 0.0 || norm < chi || norm > 1.0 {
        return Ok(false);
    }
    if is_almost_constant(x, delta, rho)? {
        return Ok(false);
    }
    let params = ClcdParams::new(mu * x.len() as f64, gamma, 2.0 * h * (1.0 + 1e-9))?;
    let c = clcd(x, &params);
    Ok((h..=2.0 * h).contains(&c))
}

/// `x ∈ K_{𝒯,H,μ}`: `J_ν(x, S)` and `QCLCD^𝒯_{2Q,μn,γ}(x) ∈ [H, 2H]`.
#[allow(clippy::too_many_arguments)]
pub fn qclcd_level_membership(
    x: &[f64],
    family: &RestrictionFamily,
    q: usize,
    nu: [f64; 3],
    pair: &SplitMatchPair,
    h: f64,
    mu: f64,
    gamma: f64,
) -> Result<bool> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("H must be positive, got {h}")));
    }
    if !event_j(x, &pair.s, nu) {
        return Ok(false);
    }
    let params = ClcdParams::new(mu * x.len() as f64, gamma, 2.0 * h * (1.0 + 1e-9))?;
    let value = qclcd(x, family, 2 * q, &params)?;
    Ok((h..=2.0 * h).contains(&value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64, gamma: f64, tmax: f64) -> ClcdParams {
        ClcdParams::new(alpha, gamma, tmax).unwrap()
    }

    #[test]
    fn half_minus_half() {
        let p = params(10.0, 0.1, 100.0);
        let v = [0.5, -0.5];
        let expect = 10.0 / 11.0;
        assert!((clcd(&v, &p) - expect).abs() < 1e-8);
        assert!((oracle_clcd(&v, &p).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn constant_vector_is_infinite() {
        let p = params(1.0, 0.2, 50.0);
        assert_eq!(clcd(&[0.3; 4], &p), f64::INFINITY);
        assert_eq!(oracle_clcd(&[0.3; 4], &p).unwrap(), f64::INFINITY);
    }

    #[test]
    fn ceiling_below_answer_is_infinite() {
        let p = params(10.0, 0.1, 0.9);
        assert_eq!(clcd(&[0.5, -0.5], &p), f64::INFINITY);
        assert_eq!(oracle_clcd(&[0.5, -0.5], &p).unwrap(), f64::INFINITY);
    }

    #[test]
    fn alpha_cap_branch() {
        // D = (1); with α = 0.05 the cap switches at θ_α = 0.05/0.3 < 1, so the
        // answer is 1 - α.
        let p = params(0.05, 0.3, 10.0);
        let o = oracle_clcd(&[1.0, 0.0], &p).unwrap();
        assert!((o - 0.95).abs() < 1e-12);
        assert!((clcd(&[1.0, 0.0], &p) - o).abs() < 1e-8);
    }

    #[test]
    fn oracle_rejects_large_dimension() {
        let p = params(1.0, 0.1, 1.0);
        assert!(matches!(oracle_clcd(&[0.0; 9], &p), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn qclcd_order_statistics() {
        let v = [0.5, -0.5, 0.25, 0.1];
        let p = params(10.0, 0.1, 100.0);
        let fam = RestrictionFamily::new(vec![
            bits::from_indices(4, [0, 1]),
            bits::from_indices(4, [0, 2]),
            bits::from_indices(4, [3]),
        ]);
        let all = restricted_clcds(&v, &fam, &p);
        assert_eq!(all[2], f64::INFINITY);
        let q1 = qclcd(&v, &fam, 1, &p).unwrap();
        assert_eq!(q1, all[0].min(all[1]));
        assert_eq!(qclcd(&v, &fam, 3, &p).unwrap(), f64::INFINITY);
        assert!(qclcd(&v, &fam, 0, &p).is_err());
        assert!(qclcd(&v, &fam, 4, &p).is_err());
        let same = RestrictionFamily::new(vec![bits::from_indices(4, [0, 1]); 3]);
        let values: Vec<f64> = (1..=3).map(|l| qclcd(&v, &same, l, &p).unwrap()).collect();
        assert!(values.iter().all(|&x| x == values[0]));
    }

    #[test]
    fn stability_examples() {
        let v = [0.5, -0.5];
        let r = check_stability(&v, &v, 10.0, 0.1, 100.0).unwrap();
        assert!(r.applicable && r.holds);
        let w = [0.5 + 1e-4, -0.5 - 1e-4];
        let r = check_stability(&v, &w, 10.0, 0.1, 100.0).unwrap();
        assert!(r.applicable && r.holds, "{r:?}");
    }

    #[test]
    fn level_membership() {
        // CLCD of (1/2, -1/2) at γ = 0.1, α = μN = 10 is 10/11.
        let x = [0.5, -0.5];
        assert!(clcd_level_membership(&x, 0.6, 0.1, 5.0, 0.1, 0.1, 0.1).unwrap());
        assert!(!clcd_level_membership(&x, 1.0, 0.1, 5.0, 0.1, 0.1, 0.1).unwrap());
        assert!(!clcd_level_membership(&[0.5; 4], 0.6, 0.1, 5.0, 0.1, 0.1, 0.1).unwrap());
        assert!(!clcd_level_membership(&[1.0, -1.0], 0.6, 0.1, 5.0, 0.1, 0.1, 0.1).unwrap());
    }
}
