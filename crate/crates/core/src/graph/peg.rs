//! Progressive edge growth for ultra-sparse (variable degree two) codes.
//!
//! Variables are processed in index order. The first edge of each variable
//! goes to a least-loaded check; the second goes to a check that is
//! unreachable from the variable in the current graph if one exists, and
//! otherwise to a check at maximal BFS depth. Among equally good checks the
//! one with the smallest current degree wins and remaining ties are broken
//! by the seeded RNG. Checks never exceed their target degree.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{checks_for_rate, SparseCode};
use crate::error::{Error, Result};
use crate::gf::Symbol;

/// Check-degree split solving `n_low * low + n_high * (low + 1) = 2 n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckDegrees {
    pub low: usize,
    pub n_low: usize,
    pub n_high: usize,
}

impl CheckDegrees {
    pub fn for_us_ldpc(n_sym: usize, m_sym: usize) -> Result<Self> {
        if m_sym < 2 {
            return Err(Error::Construction(format!(
                "need at least two checks, got m={m_sym}"
            )));
        }
        if m_sym > n_sym {
            return Err(Error::Construction(format!(
                "infeasible profile: m={m_sym} exceeds n={n_sym}"
            )));
        }
        let edges = 2 * n_sym;
        let low = edges / m_sym;
        let n_high = edges - low * m_sym;
        Ok(Self {
            low,
            n_low: m_sym - n_high,
            n_high,
        })
    }
}

/// Builds a PEG US-LDPC code with `round(n (1 - rate))` checks.
pub fn construct_peg_us_ldpc(n_sym: usize, rate_target: f64, p: u8, seed: u64) -> Result<SparseCode> {
    let m_sym = checks_for_rate(n_sym, rate_target)?;
    peg_with_profile(p, n_sym, m_sym, seed)
}

/// Builds a PEG US-LDPC code with exactly `m_sym` checks.
pub fn peg_with_profile(p: u8, n_sym: usize, m_sym: usize, seed: u64) -> Result<SparseCode> {
    if !(1..=8).contains(&p) {
        return Err(Error::Config(format!("unsupported p={p}")));
    }
    let degs = CheckDegrees::for_us_ldpc(n_sym, m_sym)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut target = vec![degs.low; m_sym];
    let mut order: Vec<usize> = (0..m_sym).collect();
    order.shuffle(&mut rng);
    for &f in &order[..degs.n_high] {
        target[f] += 1;
    }

    let mut peg = Peg {
        check_vars: vec![Vec::new(); m_sym],
        var_checks: vec![[usize::MAX; 2]; n_sym],
        target,
        depth: vec![usize::MAX; m_sym],
        touched: Vec::new(),
        frontier: Vec::new(),
        next: Vec::new(),
    };

    let q = 1u16 << p;
    for v in 0..n_sym {
        let first = peg.pick_first(&mut rng)?;
        peg.connect(v, first, 0);
        match peg.pick_second(v, &mut rng) {
            Some(second) => peg.connect(v, second, 1),
            None => peg.swap_in(v, &mut rng)?,
        }
    }

    let mut checks: Vec<Vec<(usize, Symbol)>> = peg
        .check_vars
        .iter()
        .map(|vars| {
            let mut row: Vec<usize> = vars.clone();
            row.sort_unstable();
            row.into_iter().map(|v| (v, 0)).collect()
        })
        .collect();
    for row in checks.iter_mut() {
        for entry in row.iter_mut() {
            entry.1 = rng.random_range(1..q) as Symbol;
        }
    }
    SparseCode::from_checks(p, n_sym, &checks, m_sym, 0, seed)
}

struct Peg {
    check_vars: Vec<Vec<usize>>,
    var_checks: Vec<[usize; 2]>,
    target: Vec<usize>,
    depth: Vec<usize>,
    touched: Vec<usize>,
    frontier: Vec<usize>,
    next: Vec<usize>,
}

impl Peg {
    fn has_capacity(&self, f: usize) -> bool {
        self.check_vars[f].len() < self.target[f]
    }

    fn connect(&mut self, v: usize, f: usize, slot: usize) {
        self.check_vars[f].push(v);
        self.var_checks[v][slot] = f;
    }

    fn pick_min_degree(&self, candidates: impl Iterator<Item = usize>, rng: &mut ChaCha8Rng) -> Option<usize> {
        let mut best = usize::MAX;
        let mut ties = Vec::new();
        for f in candidates {
            let d = self.check_vars[f].len();
            if d < best {
                best = d;
                ties.clear();
            }
            if d == best {
                ties.push(f);
            }
        }
        ties.choose(rng).copied()
    }

    fn pick_first(&self, rng: &mut ChaCha8Rng) -> Result<usize> {
        self.pick_min_degree((0..self.target.len()).filter(|&f| self.has_capacity(f)), rng)
            .ok_or_else(|| Error::Construction("no check with remaining capacity".into()))
    }

    /// Depth (in check-to-check hops) of every check reachable from `v`.
    fn bfs_from(&mut self, v: usize) {
        for &f in &self.touched {
            self.depth[f] = usize::MAX;
        }
        self.touched.clear();
        self.frontier.clear();
        for &f in &self.var_checks[v] {
            if f != usize::MAX && self.depth[f] == usize::MAX {
                self.depth[f] = 0;
                self.touched.push(f);
                self.frontier.push(f);
            }
        }
        let mut d = 0;
        while !self.frontier.is_empty() {
            d += 1;
            self.next.clear();
            for &f in &self.frontier {
                for &u in &self.check_vars[f] {
                    for &g in &self.var_checks[u] {
                        if g != usize::MAX && self.depth[g] == usize::MAX {
                            self.depth[g] = d;
                            self.touched.push(g);
                            self.next.push(g);
                        }
                    }
                }
            }
            std::mem::swap(&mut self.frontier, &mut self.next);
        }
    }

    fn pick_second(&mut self, v: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
        self.bfs_from(v);
        let first = self.var_checks[v][0];
        let candidates: Vec<usize> = (0..self.target.len())
            .filter(|&f| f != first && self.has_capacity(f))
            .collect();
        let deepest = candidates.iter().map(|&f| self.depth[f]).max()?;
        self.pick_min_degree(
            candidates.into_iter().filter(|&f| self.depth[f] == deepest),
            rng,
        )
    }

    /// The only check with spare capacity is the one `v` already uses:
    /// move an edge `(u, g)` onto that check and give `g` to `v`.
    fn swap_in(&mut self, v: usize, rng: &mut ChaCha8Rng) -> Result<()> {
        let f = self.var_checks[v][0];
        let mut options = Vec::new();
        for (g, vars) in self.check_vars.iter().enumerate() {
            if g == f {
                continue;
            }
            for &u in vars {
                if u != v && !self.var_checks[u].contains(&f) {
                    options.push((u, g));
                }
            }
        }
        let &(u, g) = options
            .choose(rng)
            .ok_or_else(|| Error::Construction("PEG could not place final edge".into()))?;
        let slot = self.var_checks[u].iter().position(|&x| x == g).unwrap();
        self.check_vars[g].retain(|&x| x != u);
        self.connect(u, f, slot);
        self.connect(v, g, 1);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_split() {
        let d = CheckDegrees::for_us_ldpc(100, 50).unwrap();
        assert_eq!((d.low, d.n_low, d.n_high), (4, 50, 0));
        let d = CheckDegrees::for_us_ldpc(267, 179).unwrap();
        assert_eq!(d.low * d.n_low + (d.low + 1) * d.n_high, 534);
        assert_eq!(d.low, 2);
        assert!(CheckDegrees::for_us_ldpc(10, 11).is_err());
        assert!(CheckDegrees::for_us_ldpc(10, 1).is_err());
    }

    #[test]
    fn rate_half_gives_degree_four() {
        let code = construct_peg_us_ldpc(200, 0.5, 4, 3).unwrap();
        assert_eq!(code.check_degree_histogram(), vec![(4, 100)]);
        assert!((0..200).all(|v| code.var_degree(v) == 2));
    }

    #[test]
    fn benchmark_profile_average_degree_three() {
        let code = construct_peg_us_ldpc(267, 0.33, 6, 7).unwrap();
        let avg = code.num_edges() as f64 / code.m_sym() as f64;
        assert!((avg - 3.0).abs() < 0.05, "avg={avg}");
        let hist = code.check_degree_histogram();
        assert!(hist.len() <= 2);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = construct_peg_us_ldpc(300, 0.4, 6, 42).unwrap();
        let b = construct_peg_us_ldpc(300, 0.4, 6, 42).unwrap();
        let c = construct_peg_us_ldpc(300, 0.4, 6, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn coefficients_nonzero_and_in_range() {
        let code = construct_peg_us_ldpc(120, 0.5, 3, 1).unwrap();
        assert!((0..code.num_edges()).all(|e| (1..8).contains(&code.edge_coef(e))));
    }

    #[test]
    fn no_four_cycles() {
        for (n, rate) in [(100, 0.5), (200, 0.33), (400, 0.6), (150, 0.25)] {
            for seed in 0..3 {
                let code = construct_peg_us_ldpc(n, rate, 6, seed).unwrap();
                let g = code.girth().unwrap();
                assert!(g >= 6, "n={n} rate={rate} seed={seed} girth={g}");
            }
        }
    }

    #[test]
    fn square_code_all_degree_two() {
        let code = peg_with_profile(2, 10, 10, 0).unwrap();
        assert!((0..10).all(|f| code.check_degree(f) == 2));
    }
}
