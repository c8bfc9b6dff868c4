//! Costas permutations and maximal-length binary sequences.

use crate::error::{Error, Result};

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc
}

fn smallest_primitive_root(p: u64) -> u64 {
    let phi = p - 1;
    let mut factors = Vec::new();
    let mut r = phi;
    let mut d = 2;
    while d * d <= r {
        if r.is_multiple_of(d) {
            factors.push(d);
            while r.is_multiple_of(d) {
                r /= d;
            }
        }
        d += 1;
    }
    if r > 1 {
        factors.push(r);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, phi / q, p) != 1))
        .unwrap_or(1)
}

/// True when `code` is a permutation of `1..=n` whose difference triangle has
/// no repeated entry in any row.
pub fn is_costas(code: &[i64]) -> bool {
    let n = code.len();
    let mut seen = vec![false; n + 1];
    for &c in code {
        if c < 1 || c as usize > n || seen[c as usize] {
            return false;
        }
        seen[c as usize] = true;
    }
    for shift in 1..n {
        let mut diffs: Vec<i64> = (0..n - shift).map(|i| code[i + shift] - code[i]).collect();
        diffs.sort_unstable();
        if diffs.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
    }
    true
}

/// Welch construction `g^i mod p`, `i = 1..p-1`, for `p = n + 1` prime.
pub fn costas_code(n: usize) -> Result<Vec<i64>> {
    if n == 0 {
        return Err(Error::param("n_chips", "Costas order must be at least 1"));
    }
    if n == 1 {
        return Ok(vec![1]);
    }
    let p = n as u64 + 1;
    if !is_prime(p) {
        return Err(Error::UnsupportedOrder {
            field: "n_chips".into(),
            order: n,
            reason: format!("Welch construction needs n + 1 = {p} prime; supply `code` explicitly"),
        });
    }
    let g = smallest_primitive_root(p);
    let code: Vec<i64> = (1..p).map(|i| pow_mod(g, i, p) as i64).collect();
    debug_assert!(is_costas(&code));
    Ok(code)
}

/// Orders `n` up to `max` with `n + 1` prime.
pub fn welch_orders(max: usize) -> Vec<usize> {
    (1..=max).filter(|&n| n == 1 || is_prime(n as u64 + 1)).collect()
}

/// Feedback taps (1-based register stages) of primitive polynomials.
const TAPS: [&[u32]; 15] = [
    &[2, 1],
    &[3, 2],
    &[4, 3],
    &[5, 3],
    &[6, 5],
    &[7, 6],
    &[8, 6, 5, 4],
    &[9, 5],
    &[10, 7],
    &[11, 9],
    &[12, 6, 4, 1],
    &[13, 4, 3, 1],
    &[14, 5, 3, 1],
    &[15, 14],
    &[16, 15, 13, 4],
];

/// Length `2^degree − 1` m-sequence from a Fibonacci LFSR seeded with all ones.
pub fn m_sequence(degree: u32) -> Result<Vec<u8>> {
    if !(2..=16).contains(&degree) {
        return Err(Error::param("degree", format!("must lie in 2..=16, got {degree}")));
    }
    let taps = TAPS[(degree - 2) as usize];
    let len = (1usize << degree) - 1;
    let mut reg: u32 = (1 << degree) - 1;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((reg & 1) as u8);
        let fb = taps.iter().fold(0u32, |acc, &t| acc ^ (reg >> (degree - t)) & 1);
        reg = (reg >> 1) | (fb << (degree - 1));
    }
    Ok(out)
}
