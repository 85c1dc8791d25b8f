//! Index subsets of `[n]` stored as bitsets.

use fixedbitset::FixedBitSet;

pub type IndexSet = FixedBitSet;

/// Builds a set over `[n]` from a list of indices.
pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> IndexSet {
    let mut set = FixedBitSet::with_capacity(n);
    for i in indices {
        set.insert(i);
    }
    set
}

pub fn to_indices(set: &IndexSet) -> Vec<usize> {
    set.ones().collect()
}

/// `[n] \ set`.
pub fn complement(set: &IndexSet) -> IndexSet {
    let mut c = set.clone();
    c.toggle_range(..);
    c
}

pub fn full(n: usize) -> IndexSet {
    let mut s = FixedBitSet::with_capacity(n);
    s.insert_range(..);
    s
}

/// Size of `a ∩ b` without allocating.
pub fn intersection_len(a: &IndexSet, b: &IndexSet) -> usize {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x & y).count_ones() as usize)
        .sum()
}

/// Size of `a ∩ b ∩ c`.
pub fn intersection3_len(a: &IndexSet, b: &IndexSet, c: &IndexSet) -> usize {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .zip(c.as_slice())
        .map(|((x, y), z)| (x & y & z).count_ones() as usize)
        .sum()
}

/// Extracts `v[i]` for `i` in `set`, in increasing index order.
pub fn restrict(v: &[f64], set: &IndexSet) -> Vec<f64> {
    set.ones().map(|i| v[i]).collect()
}
