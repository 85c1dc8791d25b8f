//! Smallest singular values and vectors, the sum-zero restriction, and
//! distances from rows to row spans.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub s_min: f64,
    /// `x(A)`: unit vector with `‖A x‖₂ = s_min`.
    pub right: Vec<f64>,
    /// `y(A)`: unit vector with `‖yᵀ A‖₂ = s_min`.
    pub left: Vec<f64>,
    /// Largest relative residual actually observed.
    pub tol: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Flips `v` so that its largest-magnitude coordinate (lowest index on ties)
/// is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// The smallest singular value of a square matrix with both singular vectors.
pub fn smallest_singular(a: &DMatrix<f64>, tol: f64) -> Result<SpectralResult> {
    if !a.is_square() {
        return Err(Error::invalid(format!("expected a square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    smallest_singular_tall(a, tol)
}

/// As [`smallest_singular`] for an `m×k` matrix with `m >= k`; the minimum is
/// over the `k` singular values.
pub fn smallest_singular_tall(a: &DMatrix<f64>, tol: f64) -> Result<SpectralResult> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::invalid(format!("tolerance must lie in (0, 1e-6], got {tol}")));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let (m, k) = a.shape();
    if k == 0 || m < k {
        return Err(Error::invalid(format!("need rows >= cols >= 1, got {m}x{k}")));
    }
    let max_iter = 1000 * m.max(k);
    // nalgebra's own default threshold; a bare ε yields a wrong factorization
    // on some exactly singular inputs (circulant(4, 2) for one).
    let svd = a
        .clone()
        .try_svd(true, true, 5.0 * f64::EPSILON, max_iter)
        .ok_or(Error::NonConvergence { iterations: max_iter, residual: f64::NAN })?;
    let (idx, &s_min) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("nonempty");
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V");
    let mut right: Vec<f64> = v_t.row(idx).iter().copied().collect();
    let mut left: Vec<f64> = u.column(idx).iter().copied().collect();
    fix_sign(&mut right);
    fix_sign(&mut left);

    let ax = a * DVector::from_column_slice(&right);
    let ya = a.transpose() * DVector::from_column_slice(&left);
    let scale = s_min.max(1.0);
    let residual = [
        (ax.norm() - s_min).abs() / scale,
        (ya.norm() - s_min).abs() / scale,
        (norm(&right) - 1.0).abs(),
        (norm(&left) - 1.0).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if residual > tol {
        return Err(Error::NonConvergence { iterations: max_iter, residual });
    }
    Ok(SpectralResult { s_min, right, left, tol: residual })
}

/// `s_n(A)` alone, without singular vectors.
pub fn smallest_singular_value(a: &DMatrix<f64>) -> f64 {
    a.clone().singular_values().min()
}

/// The Helmert orthonormal basis of `1^⊥ ⊂ R^n`, as an `n×(n-1)` matrix.
///
/// Column `k` is `(1, …, 1, -(k+1), 0, …) / sqrt((k+1)(k+2))` with `k+1` ones.
pub fn helmert_basis(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n.saturating_sub(1), |j, k| {
        let scale = (((k + 1) * (k + 2)) as f64).sqrt();
        if j <= k {
            1.0 / scale
        } else if j == k + 1 {
            -((k + 1) as f64) / scale
        } else {
            0.0
        }
    })
}

/// `A·B` for the Helmert basis `B`, in `O(n²)` via row prefix sums.
pub fn restrict_to_sum_zero(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    let mut out = DMatrix::zeros(a.nrows(), n.saturating_sub(1));
    for i in 0..a.nrows() {
        let mut prefix = 0.0;
        for k in 0..n.saturating_sub(1) {
            prefix += a[(i, k)];
            let scale = (((k + 1) * (k + 2)) as f64).sqrt();
            out[(i, k)] = (prefix - (k + 1) as f64 * a[(i, k + 1)]) / scale;
        }
    }
    out
}

/// `inf_{x ∈ S₀^{n-1}} ‖A x‖₂`.
pub fn restricted_smallest(a: &DMatrix<f64>) -> Result<f64> {
    if a.ncols() < 2 {
        return Err(Error::invalid("restricted_smallest needs n >= 2"));
    }
    Ok(restrict_to_sum_zero(a).singular_values().min())
}

/// The minimizer over the sum-zero sphere, mapped back to `R^n`.
pub fn restricted_singular(a: &DMatrix<f64>, tol: f64) -> Result<SpectralResult> {
    if a.ncols() < 2 {
        return Err(Error::invalid("restricted_singular needs n >= 2"));
    }
    let r = smallest_singular_tall(&restrict_to_sum_zero(a), tol)?;
    let x = helmert_basis(a.ncols()) * DVector::from_column_slice(&r.right);
    let mut right: Vec<f64> = x.iter().copied().collect();
    fix_sign(&mut right);
    Ok(SpectralResult { right, ..r })
}

/// Euclidean distance from `v` to `span(rows)`.
pub fn distance_to_rowspan(v: &[f64], rows: &[Vec<f64>]) -> f64 {
    if rows.is_empty() {
        return norm(v);
    }
    let n = v.len();
    let m = DMatrix::from_fn(n, rows.len(), |i, k| rows[k][i]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested U");
    let s_max = svd.singular_values.max();
    let cutoff = s_max * f64::EPSILON * n.max(rows.len()) as f64 * 16.0;
    let mut residual = DVector::from_column_slice(v);
    for (c, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            let col = u.column(c);
            let coef = col.dot(&residual);
            residual -= col * coef;
        }
    }
    residual.norm()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBound {
    /// `dist(A_{σ(1)}, V)`.
    pub lhs: f64,
    /// `s_n(A)|⟨A_{σ(1)},w⟩| / (s_n(A) + ‖N w‖₂ + |⟨A_{σ(1)}+A_{σ(2)},w⟩|)`.
    pub rhs: f64,
}

impl DistanceBound {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs >= self.rhs - slack
    }
}

/// Rows `σ(1)`, `σ(2)` of `a` against
/// `V = span{A_{σ(1)} + A_{σ(2)}, A_k : k ∉ {σ(1), σ(2)}}`.
pub fn paired_row_span(a: &DMatrix<f64>, sigma: &[usize]) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let row = |i: usize| -> Vec<f64> { a.row(i).iter().copied().collect() };
    let (p, q) = (sigma[0], sigma[1]);
    let first = row(p);
    let second = row(q);
    let mut span = vec![first.iter().zip(&second).map(|(x, y)| x + y).collect::<Vec<f64>>()];
    span.extend((0..a.nrows()).filter(|&k| k != p && k != q).map(row));
    (first, second, span)
}

/// Both sides of the distance lower bound for the rows `σ(1), σ(2)` and a unit `w`.
pub fn paired_row_distance_bound(a: &DMatrix<f64>, sigma: &[usize], w: &[f64]) -> Result<DistanceBound> {
    let n = a.nrows();
    if !a.is_square() || w.len() != n {
        return Err(Error::invalid("need a square matrix and w of matching length"));
    }
    check_permutation(sigma, n)?;
    if n < 2 {
        return Err(Error::invalid("need n >= 2"));
    }
    if (norm(w) - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("w must be a unit vector, norm is {}", norm(w))));
    }
    let (first, second, span) = paired_row_span(a, sigma);
    let lhs = distance_to_rowspan(&first, &span);

    let s_n = smallest_singular_value(a);
    let nw: f64 = (0..n)
        .filter(|&k| k != sigma[0] && k != sigma[1])
        .map(|k| dot(&a.row(k).iter().copied().collect::<Vec<_>>(), w).powi(2))
        .sum::<f64>()
        .sqrt();
    let sum_w = dot(&first, w) + dot(&second, w);
    let numer = s_n * dot(&first, w).abs();
    let denom = s_n + nw + sum_w.abs();
    if denom <= f64::MIN_POSITIVE {
        return Err(Error::Indeterminate("zero denominator in the distance bound".into()));
    }
    Ok(DistanceBound { lhs, rhs: numer / denom })
}

pub(crate) fn check_permutation(sigma: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if sigma.len() != n {
        return Err(Error::invalid(format!("permutation has length {}, expected {n}", sigma.len())));
    }
    for &s in sigma {
        if s >= n || std::mem::replace(&mut seen[s], true) {
            return Err(Error::invalid("sigma is not a permutation"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::canonical_start;

    #[test]
    fn identity_has_unit_smallest_singular_value() {
        for n in [1, 3, 7] {
            let r = smallest_singular(&DMatrix::identity(n, n), DEFAULT_TOL).unwrap();
            assert!((r.s_min - 1.0).abs() < 1e-12);
            assert!((norm(&r.right) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_ones_is_singular() {
        let r = smallest_singular(&DMatrix::from_element(3, 3, 1.0), DEFAULT_TOL).unwrap();
        assert!(r.s_min < 1e-12);
        // the right vector lies in the kernel, hence sums to zero
        assert!(r.right.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn circulant_4_2_is_singular() {
        // eigenvalues 1 + ω^k over 4th roots of unity: 2, 1+i, 0, 1-i
        let a = canonical_start(4, 2).unwrap().to_dmatrix();
        let r = smallest_singular(&a, DEFAULT_TOL).unwrap();
        assert!(r.s_min < 1e-12);
        let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
        sv.sort_by(f64::total_cmp);
        let expected = [0.0, 2f64.sqrt(), 2f64.sqrt(), 2.0];
        for (s, e) in sv.iter().zip(expected) {
            assert!((s - e).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_convention() {
        let mut v = vec![0.1, -0.9, 0.3];
        fix_sign(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.3]);
        let mut tie = vec![-0.5, 0.5];
        fix_sign(&mut tie);
        assert_eq!(tie, vec![0.5, -0.5]);
    }

    #[test]
    fn rejects_bad_tolerance_and_nonfinite() {
        assert!(smallest_singular(&DMatrix::identity(2, 2), 1e-3).is_err());
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(smallest_singular(&m, DEFAULT_TOL).is_err());
    }

    #[test]
    fn helmert_basis_is_orthonormal_and_sum_zero() {
        let b = helmert_basis(6);
        let g = b.transpose() * &b;
        assert!((g - DMatrix::identity(5, 5)).abs().max() < 1e-14);
        for k in 0..5 {
            assert!(b.column(k).sum().abs() < 1e-14);
        }
        let a = DMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64);
        assert!((restrict_to_sum_zero(&a) - &a * &b).abs().max() < 1e-12);
    }

    #[test]
    fn restricted_examples() {
        assert!((restricted_smallest(&DMatrix::identity(4, 4)).unwrap() - 1.0).abs() < 1e-12);
        assert!(restricted_smallest(&DMatrix::from_element(5, 5, 1.0)).unwrap() < 1e-12);
        assert!(restricted_smallest(&DMatrix::identity(1, 1)).is_err());
    }

    #[test]
    fn restricted_vector_is_sum_zero() {
        let a = canonical_start(7, 3).unwrap().to_dmatrix();
        let r = restricted_singular(&a, DEFAULT_TOL).unwrap();
        assert!(r.right.iter().sum::<f64>().abs() < 1e-10);
        let ax = &a * DVector::from_column_slice(&r.right);
        assert!((ax.norm() - r.s_min).abs() < 1e-10);
    }

    #[test]
    fn distance_examples() {
        assert!((distance_to_rowspan(&[1.0, 0.0], &[vec![0.0, 1.0]]) - 1.0).abs() < 1e-14);
        let rows = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert!(distance_to_rowspan(&[1.0, 1.0, 0.0], &rows) < 1e-14);
        assert!((distance_to_rowspan(&[0.0, 0.0, 1.0], &rows) - 1.0).abs() < 1e-14);
        // dependent rows
        let dep = vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]];
        assert!((distance_to_rowspan(&[1.0, 0.0, 0.0], &dep) - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((distance_to_rowspan(&[3.0, 4.0], &[]) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn distance_bound_with_constructed_w() {
        // rows of a permutation matrix; w = e_{col of row σ(1)} is orthogonal to all other rows
        let a = DMatrix::from_row_slice(3, 3, &[0., 1., 0., 0., 0., 1., 1., 0., 0.]);
        let sigma = [0, 1, 2];
        let w = [0.0, 1.0, 0.0];
        let b = paired_row_distance_bound(&a, &sigma, &w).unwrap();
        // V = span{e2 + e3, e1}: distance of e2 is 1/√2; rhs = 1·1/(1 + 0 + 1)
        assert!((b.lhs - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((b.rhs - 0.5).abs() < 1e-12);
        assert!(b.holds(1e-12));
    }

    #[test]
    fn distance_bound_argument_errors() {
        let a = DMatrix::identity(3, 3);
        assert!(paired_row_distance_bound(&a, &[0, 0, 1], &[1.0, 0.0, 0.0]).is_err());
        assert!(paired_row_distance_bound(&a, &[0, 1, 2], &[2.0, 0.0, 0.0]).is_err());
        let zero = DMatrix::zeros(3, 3);
        assert!(matches!(
            paired_row_distance_bound(&zero, &[0, 1, 2], &[1.0, 0.0, 0.0]),
            Err(Error::Indeterminate(_))
        ));
    }
}
