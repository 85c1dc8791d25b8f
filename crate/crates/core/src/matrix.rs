//! Exact `n×n` 0/1 matrices whose rows and columns all sum to `d`.
//!
//! Rows are stored bit-packed so that switching sets are a word-wise XOR.
//! Indices are 0-based throughout the crate.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::bits::{self, IndexSet};
use crate::{Error, Result, Violation};

/// An element of `M_{n,d}`: the adjacency matrix of a `d`-regular digraph
/// (self loops allowed, no multiple edges).
///
/// Immutable once constructed; `d = 0` and `d = n` are representable.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RegularDigraphMatrix {
    n: usize,
    d: usize,
    rows: Vec<IndexSet>,
}

/// The positions where two rows (or columns) of a matrix differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchingSet {
    pub row_pair: (usize, usize),
    pub indices: IndexSet,
}

impl SwitchingSet {
    pub fn len(&self) -> usize {
        self.indices.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_vec(&self) -> Vec<usize> {
        bits::to_indices(&self.indices)
    }
}

impl RegularDigraphMatrix {
    /// Checks every row and column sum against `d` and returns the matrix, or
    /// every violation found.
    pub fn validate(candidate: &[Vec<u8>], d: usize) -> Result<Self> {
        let n = candidate.len();
        let mut violations = Vec::new();
        for (i, row) in candidate.iter().enumerate() {
            if row.len() != n {
                violations.push(Violation::NotSquare { row: i, len: row.len() });
            }
        }
        if !violations.is_empty() {
            return Err(Error::Validation { n, d, violations });
        }
        for (i, row) in candidate.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                if a > 1 {
                    violations.push(Violation::BadEntry { row: i, col: j, value: a });
                }
            }
        }
        if !violations.is_empty() {
            return Err(Error::Validation { n, d, violations });
        }
        for (i, row) in candidate.iter().enumerate() {
            let sum: usize = row.iter().map(|&a| a as usize).sum();
            if sum != d {
                violations.push(Violation::RowSum { row: i, sum });
            }
        }
        for j in 0..n {
            let sum: usize = candidate.iter().map(|row| row[j] as usize).sum();
            if sum != d {
                violations.push(Violation::ColumnSum { col: j, sum });
            }
        }
        if !violations.is_empty() {
            return Err(Error::Validation { n, d, violations });
        }
        let rows = candidate
            .iter()
            .map(|row| bits::from_indices(n, row.iter().enumerate().filter(|(_, &a)| a == 1).map(|(j, _)| j)))
            .collect();
        Ok(Self { n, d, rows })
    }

    /// Builds from bitset rows, checking all sums.
    pub fn from_rows(n: usize, d: usize, rows: Vec<IndexSet>) -> Result<Self> {
        let dense: Vec<Vec<u8>> = rows
            .iter()
            .map(|r| (0..n).map(|j| u8::from(j < r.len() && r.contains(j))).collect())
            .collect();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Self::validate(&dense, d);
        }
        let m = Self { n, d, rows };
        m.check_sums()?;
        Ok(m)
    }

    /// Caller guarantees membership in `M_{n,d}`; checked in debug builds.
    pub(crate) fn from_rows_unchecked(n: usize, d: usize, rows: Vec<IndexSet>) -> Self {
        let m = Self { n, d, rows };
        debug_assert!(m.check_sums().is_ok());
        m
    }

    fn check_sums(&self) -> Result<()> {
        let mut violations = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            let sum = r.count_ones(..);
            if sum != self.d {
                violations.push(Violation::RowSum { row: i, sum });
            }
        }
        for (j, sum) in self.column_sums().into_iter().enumerate() {
            if sum != self.d {
                violations.push(Violation::ColumnSum { col: j, sum });
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation { n: self.n, d: self.d, violations })
        }
    }

    fn column_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.n];
        for r in &self.rows {
            for j in r.ones() {
                sums[j] += 1;
            }
        }
        sums
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| bits::from_indices(n, [i])).collect();
        Self { n, d: 1, rows }
    }

    /// The all-ones matrix `J`, the unique element of `M_{n,n}`.
    pub fn all_ones(n: usize) -> Self {
        Self { n, d: n, rows: vec![bits::full(n); n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    pub fn row(&self, i: usize) -> &IndexSet {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[IndexSet] {
        &self.rows
    }

    /// Row `i` as a real vector.
    pub fn row_vector(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|j| if self.get(i, j) { 1.0 } else { 0.0 }).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| u8::from(self.get(i, j))).collect())
            .collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| if self.get(i, j) { 1.0 } else { 0.0 })
    }

    /// `A x` computed from the sparse rows.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.ones().map(|j| x[j]).sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![IndexSet::with_capacity(self.n); self.n];
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.ones() {
                rows[j].insert(i);
            }
        }
        Self { n: self.n, d: self.d, rows }
    }

    /// `J - A`, a member of `M_{n,n-d}`.
    pub fn complement(&self) -> Self {
        let rows = self.rows.iter().map(bits::complement).collect();
        Self { n: self.n, d: self.n - self.d, rows }
    }

    /// `S_{i,j}`: the columns `k` with `a_{ik} != a_{jk}`.
    pub fn switching_set(&self, i: usize, j: usize) -> Result<SwitchingSet> {
        self.check_pair(i, j)?;
        let mut indices = self.rows[i].clone();
        indices.symmetric_difference_with(&self.rows[j]);
        Ok(SwitchingSet { row_pair: (i, j), indices })
    }

    /// `S^{(i,j)}`: the rows `k` with `a_{ki} != a_{kj}`.
    pub fn column_switching_set(&self, i: usize, j: usize) -> Result<SwitchingSet> {
        self.transpose().switching_set(i, j)
    }

    /// `ω_{i,j}(S) = Σ_{k∈S} (a_{ik} - a_{jk})`.
    pub fn switching_weight(&self, i: usize, j: usize, subset: &IndexSet) -> i64 {
        let plus = bits::intersection_len(&self.rows[i], subset) as i64;
        let minus = bits::intersection_len(&self.rows[j], subset) as i64;
        plus - minus
    }

    /// The same weight summed over `S ∩ S_{i,j}` only.
    pub fn switching_weight_on_switching_set(&self, i: usize, j: usize, subset: &IndexSet) -> Result<i64> {
        let sw = self.switching_set(i, j)?;
        let mut restricted = subset.clone();
        restricted.intersect_with(&sw.indices);
        Ok(restricted
            .ones()
            .map(|k| i64::from(self.get(i, k)) - i64::from(self.get(j, k)))
            .sum())
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::invalid(format!("switching set needs distinct rows, got {i} twice")));
        }
        if i >= self.n || j >= self.n {
            return Err(Error::invalid(format!("row pair ({i},{j}) out of range for n = {}", self.n)));
        }
        Ok(())
    }

    /// Fixture text format: `"n d"` then `n` lines of `n` characters in `{0,1}`.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity((self.n + 1) * (self.n + 1) + 16);
        writeln!(s, "{} {}", self.n, self.d).unwrap();
        for r in &self.rows {
            for j in 0..self.n {
                s.push(if r.contains(j) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    /// Parses a stream of matrices in the text format separated by blank lines.
    pub fn parse_many(text: &str) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        let mut block = String::new();
        let mut start_line = 1;
        for (no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                if !block.is_empty() {
                    out.push(parse_block(&block, start_line)?);
                    block.clear();
                }
                start_line = no + 2;
            } else {
                block.push_str(line);
                block.push('\n');
            }
        }
        if !block.is_empty() {
            out.push(parse_block(&block, start_line)?);
        }
        Ok(out)
    }
}

fn parse_block(text: &str, first_line: usize) -> Result<RegularDigraphMatrix> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Parse { line: first_line, msg: "empty matrix".into() })?;
    let mut it = header.split_whitespace();
    let mut num = |what: &str| -> Result<usize> {
        it.next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse { line: first_line, msg: format!("expected {what} in header \"n d\"") })
    };
    let n = num("n")?;
    let d = num("d")?;
    let mut dense = Vec::with_capacity(n);
    for (k, line) in lines.enumerate() {
        let row = line
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::Parse {
                    line: first_line + 1 + k,
                    msg: format!("unexpected character {other:?}"),
                }),
            })
            .collect::<Result<Vec<u8>>>()?;
        dense.push(row);
    }
    if dense.len() != n {
        return Err(Error::Parse {
            line: first_line,
            msg: format!("header declares n = {n} but {} rows follow", dense.len()),
        });
    }
    RegularDigraphMatrix::validate(&dense, d)
}

impl FromStr for RegularDigraphMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut all = Self::parse_many(s)?;
        match all.len() {
            1 => Ok(all.pop().unwrap()),
            k => Err(Error::Parse { line: 1, msg: format!("expected one matrix, found {k}") }),
        }
    }
}

impl std::fmt::Debug for RegularDigraphMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}
