use rand::Rng;

use super::events::{event_j, SplitMatchPair};
use crate::arithmetic::{qclcd, ClcdParams, RestrictionFamily};
use crate::bits::{self, IndexSet};
use crate::matrix::RegularDigraphMatrix;
use crate::vectorclass::{is_almost_constant, l2};
use crate::{Error, Result};

/// The supports of the randomness left after revealing `F_{S,σ}`.
///
/// With `R_k = A_{σ(k)}` and `i ∈ [⌊(n−1)/2⌋]` (0-based below),
/// `odd[i] = S ∩ S_{σ(2i),σ(2i+1)}` and `even[i] = S^c ∩ S_{σ(2i+1),σ(2i+2)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TSets {
    pub odd: RestrictionFamily,
    pub even: RestrictionFamily,
}

impl TSets {
    /// `𝒯₁ ∪ 𝒯₂` as a multifamily, odd sets first.
    pub fn combined(&self) -> RestrictionFamily {
        RestrictionFamily::new(self.odd.sets.iter().chain(&self.even.sets).cloned().collect())
    }

    /// Indices of empty odd and even sets (paired rows identical on their half).
    pub fn empty(&self) -> (Vec<usize>, Vec<usize>) {
        (self.odd.empty_positions(), self.even.empty_positions())
    }
}

pub fn build_t_sets(a: &RegularDigraphMatrix, pair: &SplitMatchPair) -> Result<TSets> {
    let n = a.n();
    if pair.n() != n {
        return Err(Error::invalid(format!("pair is on [{}], matrix has n = {n}", pair.n())));
    }
    let sigma = &pair.sigma;
    let sc = pair.s_complement();
    let mut odd = Vec::new();
    let mut even = Vec::new();
    for i in 0..(n.saturating_sub(1)) / 2 {
        let mut t = a.switching_set(sigma[2 * i], sigma[2 * i + 1])?.indices;
        t.intersect_with(&pair.s);
        odd.push(t);
        let mut t = a.switching_set(sigma[2 * i + 1], sigma[2 * i + 2])?.indices;
        t.intersect_with(&sc);
        even.push(t);
    }
    Ok(TSets { odd: RestrictionFamily::new(odd), even: RestrictionFamily::new(even) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WellSpreadReport {
    pub holds: bool,
    pub w1_holds: bool,
    pub w2_holds: bool,
    /// Whether every `Q`-subset was examined for (W1).
    pub w1_exhaustive: bool,
    pub w1_examined: u64,
    /// Largest `|U \ ⋃ U_{i_j}|` seen.
    pub w1_worst: usize,
    /// Smallest `|U_i ∩ U_j|` over all pairs, `i = j` included.
    pub w2_worst: usize,
    /// `η|U|`.
    pub bound: f64,
    /// Violating index tuples (first few of each kind).
    pub witnesses: Vec<Vec<usize>>,
}

fn binomial(t: usize, q: usize) -> f64 {
    if q > t {
        return 0.0;
    }
    (0..q).fold(1.0, |c, i| c * (t - i) as f64 / (i + 1) as f64)
}

fn for_each_combination(t: usize, q: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(t: usize, q: usize, from: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == q {
            f(cur);
            return;
        }
        for i in from..=t - (q - cur.len()) {
            cur.push(i);
            go(t, q, i + 1, cur, f);
            cur.pop();
        }
    }
    go(t, q, 0, &mut Vec::with_capacity(q), f);
}

/// `(Q, η)`-well-spreadness of `family` with respect to `u`:
/// (W1) any `Q` distinct members leave at most `η|U|` of `U` uncovered, and
/// (W2) any two members (possibly the same) share at least `η|U|` elements.
///
/// (W1) is exhaustive when `C(t, Q) ≤ budget`, otherwise checked on `budget`
/// uniformly random `Q`-subsets.
pub fn check_well_spread<R: Rng + ?Sized>(
    family: &RestrictionFamily,
    u: &IndexSet,
    q: usize,
    eta: f64,
    budget: u64,
    rng: &mut R,
) -> Result<WellSpreadReport> {
    if q == 0 {
        return Err(Error::invalid("Q must be positive"));
    }
    for (k, s) in family.sets.iter().enumerate() {
        if s.len() != u.len() || !s.is_subset(u) {
            return Err(Error::invalid(format!("family set {k} is not a subset of U")));
        }
    }
    let size_u = u.count_ones(..);
    let bound = eta * size_u as f64;
    let t = family.t();
    let mut witnesses = Vec::new();

    let mut w1_worst = 0;
    let mut w1_examined = 0;
    let mut w1_holds = true;
    let w1_exhaustive = binomial(t, q) <= budget as f64;
    if q <= t {
        let words = u.as_slice().len();
        let mut union = vec![0usize; words];
        let mut visit = |idx: &[usize]| {
            union.iter_mut().for_each(|w| *w = 0);
            for &i in idx {
                for (w, x) in union.iter_mut().zip(family.sets[i].as_slice()) {
                    *w |= x;
                }
            }
            let uncovered = size_u - union.iter().map(|w| w.count_ones() as usize).sum::<usize>();
            w1_examined += 1;
            w1_worst = w1_worst.max(uncovered);
            if uncovered as f64 > bound {
                w1_holds = false;
                if witnesses.len() < super::MAX_WITNESSES {
                    witnesses.push(idx.to_vec());
                }
            }
        };
        if w1_exhaustive {
            for_each_combination(t, q, &mut visit);
        } else {
            for _ in 0..budget {
                let mut idx = rand::seq::index::sample(rng, t, q).into_vec();
                idx.sort_unstable();
                visit(&idx);
            }
        }
    }

    let mut w2_worst = usize::MAX;
    let mut w2_holds = true;
    for i in 0..t {
        for j in i..t {
            let common = bits::intersection_len(&family.sets[i], &family.sets[j]);
            w2_worst = w2_worst.min(common);
            if (common as f64) < bound {
                w2_holds = false;
                if witnesses.len() < 2 * super::MAX_WITNESSES {
                    witnesses.push(vec![i, j]);
                }
            }
        }
    }
    if t == 0 {
        w2_worst = 0;
    }
    Ok(WellSpreadReport {
        holds: w1_holds && w2_holds,
        w1_holds,
        w2_holds,
        w1_exhaustive,
        w1_examined,
        w1_worst,
        w2_worst,
        bound,
        witnesses,
    })
}

/// Settings for [`check_restriction_degeneracy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneracyParams {
    /// `(δ′, ρ′)` of the almost-constant test on restrictions.
    pub delta_prime: f64,
    pub rho_prime: f64,
    /// `K` in "`‖D(x|_T)‖₂ < K√n`"; defaults to `√(ν₁ν₂η/2Q)`.
    pub constant: Option<f64>,
    pub clcd: ClcdParams,
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    /// Both families well-spread and `J_ν(x, S)` holds.
    pub applicable: bool,
    pub odd_well_spread: bool,
    pub even_well_spread: bool,
    pub event_j: bool,
    /// `K` actually used.
    pub constant: f64,
    /// Sets `T` with `‖D(x|_T)‖₂ < K√n` or `x|_T` almost-constant.
    pub bad_sets: usize,
    /// `bad_sets ≤ 2Q`.
    pub bad_sets_ok: bool,
    /// `QCLCD_{2Q}` over `𝒯₁ ∪ 𝒯₂`, absent when the family has fewer than `2Q` sets.
    pub qclcd: Option<f64>,
    /// `qclcd / √n`.
    pub ratio: Option<f64>,
}

/// Checks, for a unit `x` with `J_ν(x, S)` and well-spread T-families, that at
/// most `2Q` restrictions are degenerate and reports `QCLCD_{2Q}(x)/√n`.
#[allow(clippy::too_many_arguments)]
pub fn check_restriction_degeneracy<R: Rng + ?Sized>(
    x: &[f64],
    t1: &RestrictionFamily,
    t2: &RestrictionFamily,
    s: &IndexSet,
    nu: [f64; 3],
    eta: f64,
    q: usize,
    params: &DegeneracyParams,
    rng: &mut R,
) -> Result<DegeneracyReport> {
    let n = x.len();
    if s.len() != n {
        return Err(Error::invalid("S and x live in different dimensions"));
    }
    if (l2(x) - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("x must be a unit vector, has norm {}", l2(x))));
    }
    let sc = bits::complement(s);
    let odd_well_spread = check_well_spread(t1, s, q, eta, params.budget, rng)?.holds;
    let even_well_spread = check_well_spread(t2, &sc, q, eta, params.budget, rng)?.holds;
    let j = event_j(x, s, nu);
    let constant = params.constant.unwrap_or_else(|| (nu[0] * nu[1] * eta / (2.0 * q as f64)).sqrt());

    let all = RestrictionFamily::new(t1.sets.iter().chain(&t2.sets).cloned().collect());
    let threshold = constant * (n as f64).sqrt();
    let mut bad_sets = 0;
    for t in &all.sets {
        let xt = bits::restrict(x, t);
        let dnorm = crate::arithmetic::difference_vector(&xt).map(|d| d.norm()).unwrap_or(0.0);
        let degenerate = dnorm < threshold
            || l2(&xt) == 0.0
            || is_almost_constant(&xt, params.delta_prime, params.rho_prime)?;
        bad_sets += usize::from(degenerate);
    }
    let qclcd = if 2 * q <= all.t() { Some(qclcd(x, &all, 2 * q, &params.clcd)?) } else { None };
    Ok(DegeneracyReport {
        applicable: odd_well_spread && even_well_spread && j,
        odd_well_spread,
        even_well_spread,
        event_j: j,
        constant,
        bad_sets,
        bad_sets_ok: bad_sets <= 2 * q,
        qclcd,
        ratio: qclcd.map(|v| v / (n as f64).sqrt()),
    })
}
