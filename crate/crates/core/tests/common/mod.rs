//! Brute-force reference implementations shared by the integration tests.
//! None of these call into the library's arithmetic.
#![allow(dead_code)]

use gfqc::graph::SparseCode;
use rand::seq::SliceRandom;
use rand::Rng;

pub const POLYS: [u16; 9] = [0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D];

/// Shift-and-add multiplication modulo the primitive polynomial.
pub fn poly_mul(a: u8, b: u8, p: u8) -> u8 {
    let poly = POLYS[p as usize] as u32;
    let (mut a, mut b, mut r) = (a as u32, b as u32, 0u32);
    while b != 0 {
        if b & 1 == 1 {
            r ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & (1 << p) != 0 {
            a ^= poly;
        }
    }
    r as u8
}

pub fn poly_inv(a: u8, p: u8) -> u8 {
    (1..(1u16 << p)).map(|x| x as u8).find(|&x| poly_mul(a, x, p) == 1).unwrap()
}

/// `out[s] = sum_{a ^ b = s} u[a] v[b]`, quadratic time.
pub fn xor_convolve(u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for (a, x) in u.iter().enumerate() {
        for (b, y) in v.iter().enumerate() {
            out[a ^ b] += x * y;
        }
    }
    out
}

fn rows(code: &SparseCode) -> Vec<Vec<(usize, u8)>> {
    code.checks()
}

fn satisfies(rows: &[Vec<(usize, u8)>], word: &[u8], p: u8) -> bool {
    rows.iter()
        .all(|r| r.iter().fold(0u8, |acc, &(v, h)| acc ^ poly_mul(h, word[v], p)) == 0)
}

/// Calls `f` on every word in GF(q)^n.
pub fn for_each_word(n: usize, q: usize, mut f: impl FnMut(&[u8])) {
    let mut w = vec![0u8; n];
    loop {
        f(&w);
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            w[i] += 1;
            if (w[i] as usize) < q {
                break;
            }
            w[i] = 0;
            i += 1;
        }
    }
}

pub fn count_codewords(code: &SparseCode) -> usize {
    let r = rows(code);
    let mut count = 0;
    for_each_word(code.n_sym(), code.q(), |w| {
        if satisfies(&r, w, code.p()) {
            count += 1;
        }
    });
    count
}

/// Exact quantities of `P(c) ∝ prod_v prior_v(c_v) * 1[c in code]`.
pub struct ExactMeasure {
    pub marginals: Vec<Vec<f64>>,
    /// Normalized by `n_sym * p`.
    pub avg_distance: f64,
    /// Gibbs entropy in nats.
    pub entropy: f64,
}

pub fn exact_measure(code: &SparseCode, prior: &[Vec<f64>], y: &[u8]) -> ExactMeasure {
    let (n, q, p) = (code.n_sym(), code.q(), code.p());
    let r = rows(code);
    let mut words = Vec::new();
    for_each_word(n, q, |w| {
        if satisfies(&r, w, p) {
            let weight: f64 = w.iter().enumerate().map(|(v, &a)| prior[v][a as usize]).product();
            words.push((w.to_vec(), weight));
        }
    });
    let z: f64 = words.iter().map(|(_, w)| w).sum();
    let mut marginals = vec![vec![0.0; q]; n];
    let mut dist = 0.0;
    let mut entropy = 0.0;
    for (w, weight) in &words {
        let pr = weight / z;
        if pr > 0.0 {
            entropy -= pr * pr.ln();
        }
        for v in 0..n {
            marginals[v][w[v] as usize] += pr;
            dist += pr * (w[v] ^ y[v]).count_ones() as f64;
        }
    }
    ExactMeasure {
        marginals,
        avg_distance: dist / (n * p as usize) as f64,
        entropy,
    }
}

/// Gauss-Jordan solve of the code with some variables pinned. Returns the
/// solution only if it is unique.
pub fn gauss_unique(code: &SparseCode, fixed: &[Option<u8>]) -> Option<Vec<u8>> {
    let p = code.p();
    let n = code.n_sym();
    let free: Vec<usize> = (0..n).filter(|&v| fixed[v].is_none()).collect();
    let col: Vec<Option<usize>> = {
        let mut c = vec![None; n];
        for (i, &v) in free.iter().enumerate() {
            c[v] = Some(i);
        }
        c
    };
    // Rows over the free columns plus right-hand side.
    let mut a: Vec<Vec<u8>> = rows(code)
        .iter()
        .map(|r| {
            let mut row = vec![0u8; free.len() + 1];
            for &(v, h) in r {
                match col[v] {
                    Some(j) => row[j] ^= h,
                    None => row[free.len()] ^= poly_mul(h, fixed[v].unwrap(), p),
                }
            }
            row
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for j in 0..free.len() {
        let Some(r) = (pivot_row..a.len()).find(|&r| a[r][j] != 0) else {
            continue;
        };
        a.swap(pivot_row, r);
        let inv = poly_inv(a[pivot_row][j], p);
        for x in a[pivot_row].iter_mut() {
            *x = poly_mul(*x, inv, p);
        }
        for r in 0..a.len() {
            if r != pivot_row && a[r][j] != 0 {
                let f = a[r][j];
                for k in 0..=free.len() {
                    let t = poly_mul(f, a[pivot_row][k], p);
                    a[r][k] ^= t;
                }
            }
        }
        pivots.push(j);
        pivot_row += 1;
    }
    if a[pivot_row..].iter().any(|r| r[free.len()] != 0) || pivots.len() != free.len() {
        return None;
    }
    let mut word: Vec<u8> = (0..n).map(|v| fixed[v].unwrap_or(0)).collect();
    for (r, &j) in pivots.iter().enumerate() {
        word[free[j]] = a[r][free.len()];
    }
    Some(word)
}

/// Random tree-shaped factor graph: every check joins one existing variable
/// to between one and three new ones.
pub fn random_tree_code(rng: &mut impl Rng, p: u8, n_target: usize) -> SparseCode {
    let q = 1u16 << p;
    let mut n = 1;
    let mut checks: Vec<Vec<(usize, u8)>> = Vec::new();
    while n < n_target {
        let anchor = rng.random_range(0..n);
        let fresh = rng.random_range(1..=3).min(n_target - n);
        let mut row = vec![(anchor, rng.random_range(1..q) as u8)];
        for k in 0..fresh {
            row.push((n + k, rng.random_range(1..q) as u8));
        }
        n += fresh;
        row.shuffle(rng);
        checks.push(row);
    }
    let m = checks.len();
    SparseCode::from_checks(p, n, &checks, m, 0, 0).unwrap()
}

pub fn is_codeword(code: &SparseCode, word: &[u8]) -> bool {
    satisfies(&rows(code), word, code.p())
}
