use crate::{Error, Result};

/// `D(v)`: all pairwise differences `v_i - v_j`, `i < j`, in lexicographic
/// pair order.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceVector {
    pub base_dim: usize,
    pub values: Vec<f64>,
}

impl DifferenceVector {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Position of the pair `(i, j)`, `i < j`, in `values`.
    pub fn index_of(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.base_dim);
        let n = self.base_dim;
        i * (2 * n - i - 1) / 2 + (j - i - 1)
    }
}

pub fn difference_vector(v: &[f64]) -> Result<DifferenceVector> {
    let n = v.len();
    if n < 2 {
        return Err(Error::invalid(format!("difference vector needs N >= 2, got {n}")));
    }
    Ok(differences(v))
}

/// Like [`difference_vector`] but yields an empty vector for `N < 2`.
pub(crate) fn differences(v: &[f64]) -> DifferenceVector {
    let n = v.len();
    let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            values.push(v[i] - v[j]);
        }
    }
    DifferenceVector { base_dim: n, values }
}
