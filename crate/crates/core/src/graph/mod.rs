//! Factor graphs of GF(q) LDPC codes: construction, reduction, leaf removal
//! and the text file format.

mod format;
mod peel;
mod peg;
mod solve;

use std::ops::Range;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf::{FieldTables, Symbol};

pub use format::{parse_code, write_code};
pub use peel::{leaf_removal, leaf_removal_shuffled, PeelOrder, PeelStep};
pub use peg::{construct_peg_us_ldpc, peg_with_profile, CheckDegrees};
pub use solve::generic_rank_solver;

/// RNG stream used by [`b_reduce`] when regenerating a code from its
/// construction tuple.
pub(crate) const REDUCE_STREAM: u64 = 1;

/// Edge-degree distribution pair `(lambda, rho)`: `(degree, edge fraction)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeProfile {
    pub lambda: Vec<(usize, f64)>,
    pub rho: Vec<(usize, f64)>,
}

impl DegreeProfile {
    /// Ultra-sparse profile for `n_sym` variables and `m_sym` checks: all
    /// variables of degree two, checks split between the two degrees
    /// bracketing `2 n / m`.
    pub fn us_ldpc(n_sym: usize, m_sym: usize) -> Result<Self> {
        let degs = CheckDegrees::for_us_ldpc(n_sym, m_sym)?;
        let edges = (2 * n_sym) as f64;
        let mut rho = vec![(degs.low, (degs.low * degs.n_low) as f64 / edges)];
        if degs.n_high > 0 {
            rho.push((degs.low + 1, ((degs.low + 1) * degs.n_high) as f64 / edges));
        }
        rho.retain(|&(_, f)| f > 0.0);
        Ok(Self {
            lambda: vec![(2, 1.0)],
            rho,
        })
    }

    pub fn is_us_ldpc(&self) -> bool {
        self.lambda == [(2, 1.0)] && self.rho.len() <= 2
    }
}

/// A (possibly reduced) parity-check structure with GF(q) edge labels.
///
/// Edges are stored grouped by check in CSR form; edge `e` connects
/// `edge_var(e)` to `edge_check(e)` with coefficient `edge_coef(e)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseCode {
    p: u8,
    n_sym: usize,
    m_constructed: usize,
    b: usize,
    seed: u64,
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    edge_coef: Vec<Symbol>,
    edge_check: Vec<usize>,
    var_start: Vec<usize>,
    var_edge_ids: Vec<usize>,
}

impl SparseCode {
    /// Builds a code from explicit check rows `(variable, coefficient)`.
    ///
    /// `m_constructed` and `b` describe provenance: the code is what remains
    /// of an `m_constructed`-check code after `b` checks were removed, so
    /// `checks.len() == m_constructed - b` is required.
    pub fn from_checks(
        p: u8,
        n_sym: usize,
        checks: &[Vec<(usize, Symbol)>],
        m_constructed: usize,
        b: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(1..=8).contains(&p) {
            return Err(Error::Config(format!("unsupported p={p}")));
        }
        if m_constructed < b || checks.len() != m_constructed - b {
            return Err(Error::Construction(format!(
                "{} check rows do not match m={m_constructed}, b={b}",
                checks.len()
            )));
        }
        let q = 1usize << p;
        let mut check_start = Vec::with_capacity(checks.len() + 1);
        let mut edge_var = Vec::new();
        let mut edge_coef = Vec::new();
        let mut edge_check = Vec::new();
        check_start.push(0);
        for (f, row) in checks.iter().enumerate() {
            for &(v, h) in row {
                if v >= n_sym {
                    return Err(Error::Construction(format!(
                        "check {f} references variable {v} >= n={n_sym}"
                    )));
                }
                if h == 0 || h as usize >= q {
                    return Err(Error::Construction(format!(
                        "check {f} has invalid coefficient {h} for q={q}"
                    )));
                }
                if edge_var[check_start[f]..].contains(&v) {
                    return Err(Error::Construction(format!(
                        "check {f} lists variable {v} twice"
                    )));
                }
                edge_var.push(v);
                edge_coef.push(h);
                edge_check.push(f);
            }
            check_start.push(edge_var.len());
        }

        let mut var_deg = vec![0usize; n_sym];
        for &v in &edge_var {
            var_deg[v] += 1;
        }
        let mut var_start = Vec::with_capacity(n_sym + 1);
        var_start.push(0);
        for d in &var_deg {
            var_start.push(var_start.last().unwrap() + d);
        }
        let mut fill = var_start.clone();
        let mut var_edge_ids = vec![0usize; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edge_ids[fill[v]] = e;
            fill[v] += 1;
        }

        Ok(Self {
            p,
            n_sym,
            m_constructed,
            b,
            seed,
            check_start,
            edge_var,
            edge_coef,
            edge_check,
            var_start,
            var_edge_ids,
        })
    }

    #[inline]
    pub fn p(&self) -> u8 {
        self.p
    }

    #[inline]
    pub fn q(&self) -> usize {
        1 << self.p
    }

    #[inline]
    pub fn n_sym(&self) -> usize {
        self.n_sym
    }

    /// Number of checks currently present.
    #[inline]
    pub fn m_sym(&self) -> usize {
        self.check_start.len() - 1
    }

    /// Number of checks before any reduction.
    #[inline]
    pub fn m_constructed(&self) -> usize {
        self.m_constructed
    }

    /// Number of removed checks.
    #[inline]
    pub fn b(&self) -> usize {
        self.b
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Total number of binary digits carried by the variables.
    pub fn n_bits(&self) -> usize {
        self.n_sym * self.p as usize
    }

    /// Design rate `(n - m) / n` of the current check set.
    pub fn rate(&self) -> f64 {
        (self.n_sym - self.m_sym().min(self.n_sym)) as f64 / self.n_sym as f64
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.edge_var.len()
    }

    #[inline]
    pub fn check_edges(&self, f: usize) -> Range<usize> {
        self.check_start[f]..self.check_start[f + 1]
    }

    #[inline]
    pub fn check_degree(&self, f: usize) -> usize {
        self.check_start[f + 1] - self.check_start[f]
    }

    #[inline]
    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edge_ids[self.var_start[v]..self.var_start[v + 1]]
    }

    #[inline]
    pub fn var_degree(&self, v: usize) -> usize {
        self.var_start[v + 1] - self.var_start[v]
    }

    #[inline]
    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e]
    }

    #[inline]
    pub fn edge_check(&self, e: usize) -> usize {
        self.edge_check[e]
    }

    #[inline]
    pub fn edge_coef(&self, e: usize) -> Symbol {
        self.edge_coef[e]
    }

    /// Check rows as `(variable, coefficient)` lists.
    pub fn checks(&self) -> Vec<Vec<(usize, Symbol)>> {
        (0..self.m_sym())
            .map(|f| {
                self.check_edges(f)
                    .map(|e| (self.edge_var[e], self.edge_coef[e]))
                    .collect()
            })
            .collect()
    }

    /// Histogram of check degrees as `(degree, count)`, ascending.
    pub fn check_degree_histogram(&self) -> Vec<(usize, usize)> {
        let mut hist = std::collections::BTreeMap::new();
        for f in 0..self.m_sym() {
            *hist.entry(self.check_degree(f)).or_insert(0) += 1;
        }
        hist.into_iter().collect()
    }

    /// Syndrome value `sum_i h_if c_i` of check `f`.
    pub fn syndrome(&self, tables: &FieldTables, f: usize, word: &[Symbol]) -> Symbol {
        self.check_edges(f).fold(0, |acc, e| {
            acc ^ tables.mul(self.edge_coef[e], word[self.edge_var[e]])
        })
    }

    pub fn unsatisfied_checks(&self, tables: &FieldTables, word: &[Symbol]) -> usize {
        (0..self.m_sym())
            .filter(|&f| self.syndrome(tables, f, word) != 0)
            .count()
    }

    pub fn is_codeword(&self, tables: &FieldTables, word: &[Symbol]) -> bool {
        word.len() == self.n_sym && self.unsatisfied_checks(tables, word) == 0
    }

    /// Length of the shortest cycle in the factor graph (counted in edges),
    /// or `None` for a forest.
    pub fn girth(&self) -> Option<usize> {
        // BFS from every variable over the bipartite graph; the shortest
        // cycle through the root is found at the first non-tree edge.
        let n = self.n_sym;
        let m = self.m_sym();
        let mut best: Option<usize> = None;
        let mut dist = vec![usize::MAX; n + m];
        let mut parent_edge = vec![usize::MAX; n + m];
        let mut queue = std::collections::VecDeque::new();
        let mut touched = Vec::new();
        for root in 0..n {
            for &t in &touched {
                dist[t] = usize::MAX;
                parent_edge[t] = usize::MAX;
            }
            touched.clear();
            queue.clear();
            dist[root] = 0;
            touched.push(root);
            queue.push_back(root);
            'bfs: while let Some(node) = queue.pop_front() {
                if let Some(b) = best {
                    if 2 * dist[node] + 1 >= b {
                        break;
                    }
                }
                let neighbors: Vec<(usize, usize)> = if node < n {
                    self.var_edges(node)
                        .iter()
                        .map(|&e| (n + self.edge_check[e], e))
                        .collect()
                } else {
                    self.check_edges(node - n)
                        .map(|e| (self.edge_var[e], e))
                        .collect()
                };
                for (next, e) in neighbors {
                    if e == parent_edge[node] {
                        continue;
                    }
                    if dist[next] == usize::MAX {
                        dist[next] = dist[node] + 1;
                        parent_edge[next] = e;
                        touched.push(next);
                        queue.push_back(next);
                    } else {
                        let len = dist[node] + dist[next] + 1;
                        if best.is_none_or(|b| len < b) {
                            best = Some(len);
                        }
                        if dist[next] <= dist[node] {
                            break 'bfs;
                        }
                    }
                }
            }
        }
        best
    }
}

/// Regenerates a code from its construction tuple: a PEG US-LDPC code with
/// `m_sym` checks followed by a `b`-reduction seeded from the same seed.
pub fn build_code(p: u8, n_sym: usize, m_sym: usize, b: usize, seed: u64) -> Result<SparseCode> {
    let base = peg_with_profile(p, n_sym, m_sym, seed)?;
    b_reduce(&base, b, seed)
}

/// Number of check nodes for a target rate, `round(n (1 - R))`.
pub fn checks_for_rate(n_sym: usize, rate: f64) -> Result<usize> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::Config(format!("rate {rate} outside (0, 1)")));
    }
    Ok((n_sym as f64 * (1.0 - rate)).round() as usize)
}

/// Symbols needed to carry `n_bits` binary digits.
pub fn symbols_for_bits(n_bits: usize, p: u8) -> usize {
    n_bits.div_ceil(p as usize)
}

/// Removes `b` checks chosen uniformly without replacement.
pub fn b_reduce(code: &SparseCode, b: usize, seed: u64) -> Result<SparseCode> {
    let m = code.m_sym();
    if b == 0 {
        return Ok(code.clone());
    }
    if b >= m {
        return Err(Error::Config(format!(
            "cannot remove b={b} checks from a code with {m} checks"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(REDUCE_STREAM);
    let mut removed = vec![false; m];
    for f in sample(&mut rng, m, b) {
        removed[f] = true;
    }
    let checks: Vec<_> = code
        .checks()
        .into_iter()
        .enumerate()
        .filter(|(f, _)| !removed[*f])
        .map(|(_, row)| row)
        .collect();
    SparseCode::from_checks(
        code.p,
        code.n_sym,
        &checks,
        code.m_constructed,
        code.b + b,
        code.seed,
    )
}
