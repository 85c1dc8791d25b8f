//! Exact singularity of 0/1 matrices by determinants modulo many primes.

use std::sync::OnceLock;

use crate::matrix::RegularDigraphMatrix;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Descending primes below `2³¹`, generated once.
fn primes(count: usize) -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    const POOL: usize = 512;
    assert!(count <= POOL, "asked for {count} primes, pool holds {POOL}");
    &PRIMES.get_or_init(|| {
        let mut out = Vec::with_capacity(POOL);
        let mut p = (1u64 << 31) - 1;
        while out.len() < POOL {
            if is_prime(p) {
                out.push(p);
            }
            p -= 2;
        }
        out
    })[..count]
}

/// `det(rows) mod p` by Gaussian elimination over `𝔽_p`, `p < 2³²`.
pub fn det_mod_p(rows: &[Vec<u8>], p: u64) -> u64 {
    let n = rows.len();
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&x| x as u64 % p).collect()).collect();
    let mut det = 1u64;
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| m[r][c] != 0) else {
            return 0;
        };
        if piv != c {
            m.swap(piv, c);
            det = (p - det) % p;
        }
        det = det * m[c][c] % p;
        let inv = pow_mod(m[c][c], p - 2, p);
        let (top, bottom) = m.split_at_mut(c + 1);
        let pivot_row = &top[c];
        for row in bottom.iter_mut() {
            let f = row[c] * inv % p;
            if f == 0 {
                continue;
            }
            for k in c..n {
                row[k] = (row[k] + (p - f) * pivot_row[k]) % p;
            }
        }
    }
    det
}

/// Whether `det A = 0` over the integers.
///
/// Each row has `d` ones, so `|det A| ≤ d^{n/2}` (Hadamard). The determinant
/// is reduced modulo primes near `2³¹` whose product exceeds twice that bound;
/// a single nonzero residue already certifies invertibility.
pub fn exact_singular(a: &RegularDigraphMatrix) -> bool {
    let n = a.n();
    if n == 0 {
        return false;
    }
    if a.d() == 0 {
        return true;
    }
    let bound_bits = 0.5 * n as f64 * (a.d() as f64).log2() + 1.0;
    // Every prime used exceeds 2^30.9.
    let count = (bound_bits / 30.9).floor() as usize + 1;
    let dense = a.to_dense();
    primes(count).iter().all(|&p| det_mod_p(&dense, p) == 0)
}
