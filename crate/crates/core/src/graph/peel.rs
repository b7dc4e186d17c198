//! Leaf removal: repeatedly strip a degree-one variable together with its
//! check and any other leaves hanging off that check.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SparseCode;

/// One elimination: `check` is solved for `pivot` once `free` is fixed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeelStep {
    pub check: usize,
    pub pivot: usize,
    pub free: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeelOrder {
    pub steps: Vec<PeelStep>,
    /// Sorted information variables: the union of all free sets plus any
    /// variable that touches no check at all.
    pub info_set: Vec<usize>,
    /// Checks left in the core.
    pub core_size: usize,
}

impl PeelOrder {
    pub fn is_complete(&self) -> bool {
        self.core_size == 0
    }
}

/// Leaf removal processing leaves in index order.
pub fn leaf_removal(code: &SparseCode) -> PeelOrder {
    let initial: Vec<usize> = (0..code.n_sym()).collect();
    peel(code, initial)
}

/// Leaf removal with leaves initially queued in a seeded random order.
pub fn leaf_removal_shuffled(code: &SparseCode, seed: u64) -> PeelOrder {
    let mut initial: Vec<usize> = (0..code.n_sym()).collect();
    initial.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    peel(code, initial)
}

fn peel(code: &SparseCode, initial: Vec<usize>) -> PeelOrder {
    let n = code.n_sym();
    let mut deg: Vec<usize> = (0..n).map(|v| code.var_degree(v)).collect();
    let mut var_alive = vec![true; n];
    let mut check_alive = vec![true; code.m_sym()];
    let mut info_set: Vec<usize> = (0..n).filter(|&v| deg[v] == 0).collect();
    for &v in &info_set {
        var_alive[v] = false;
    }

    let mut queue: VecDeque<usize> = initial.into_iter().filter(|&v| deg[v] == 1).collect();
    let mut steps = Vec::new();
    while let Some(v) = queue.pop_front() {
        if !var_alive[v] || deg[v] != 1 {
            continue;
        }
        let f = code
            .var_edges(v)
            .iter()
            .map(|&e| code.edge_check(e))
            .find(|&f| check_alive[f])
            .expect("leaf has one live check");
        check_alive[f] = false;
        var_alive[v] = false;
        let mut free = Vec::new();
        for e in code.check_edges(f) {
            let u = code.edge_var(e);
            if u == v || !var_alive[u] {
                continue;
            }
            if deg[u] == 1 {
                var_alive[u] = false;
                free.push(u);
            } else {
                deg[u] -= 1;
                if deg[u] == 1 {
                    queue.push_back(u);
                }
            }
        }
        info_set.extend_from_slice(&free);
        steps.push(PeelStep {
            check: f,
            pivot: v,
            free,
        });
    }
    info_set.sort_unstable();
    PeelOrder {
        steps,
        info_set,
        core_size: check_alive.iter().filter(|&&a| a).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{b_reduce, build_code, construct_peg_us_ldpc};

    #[test]
    fn unreduced_us_ldpc_has_complete_core() {
        let code = construct_peg_us_ldpc(200, 0.5, 6, 1).unwrap();
        let order = leaf_removal(&code);
        assert_eq!(order.core_size, code.m_sym());
        assert!(order.steps.is_empty());
    }

    #[test]
    fn single_check_two_leaves() {
        let code = SparseCode::from_checks(2, 2, &[vec![(0, 1), (1, 3)]], 1, 0, 0).unwrap();
        let order = leaf_removal(&code);
        assert_eq!(order.steps.len(), 1);
        assert_eq!(order.steps[0].free.len(), 1);
        assert_eq!(order.core_size, 0);
        assert_eq!(order.info_set.len(), 1);
    }

    #[test]
    fn reduced_benchmark_code_has_empty_core() {
        let code = build_code(6, 267, 179, 5, 7).unwrap();
        let order = leaf_removal(&code);
        assert_eq!(order.core_size, 0);
        assert_eq!(order.info_set.len(), code.n_sym() - code.m_sym());
        let mut union: Vec<usize> = order.steps.iter().flat_map(|s| s.free.clone()).collect();
        union.extend((0..code.n_sym()).filter(|&v| code.var_degree(v) == 0));
        union.sort_unstable();
        assert_eq!(union, order.info_set);
    }

    #[test]
    fn replay_never_touches_removed_nodes() {
        let code = build_code(4, 300, 150, 2, 5).unwrap();
        let order = leaf_removal(&code);
        let mut var_gone = vec![false; code.n_sym()];
        let mut check_gone = vec![false; code.m_sym()];
        for s in &order.steps {
            assert!(!check_gone[s.check]);
            for &u in std::iter::once(&s.pivot).chain(&s.free) {
                assert!(!var_gone[u]);
                var_gone[u] = true;
            }
            check_gone[s.check] = true;
        }
    }

    #[test]
    fn core_size_independent_of_order() {
        for seed in 0..5 {
            let base = construct_peg_us_ldpc(120, 0.4, 2, seed).unwrap();
            for b in [0, 1, 3] {
                let code = b_reduce(&base, b, seed).unwrap();
                let a = leaf_removal_shuffled(&code, 1);
                let c = leaf_removal_shuffled(&code, 2);
                assert_eq!(a.core_size, c.core_size);
                assert_eq!(a.steps.len(), c.steps.len());
            }
        }
    }

    #[test]
    fn peeling_the_core_is_idempotent() {
        // A 4-cycle with a pendant check hanging off variable 0.
        let checks = vec![
            vec![(0, 1), (1, 1)],
            vec![(1, 1), (2, 1)],
            vec![(2, 1), (3, 1)],
            vec![(3, 1), (0, 1)],
            vec![(0, 1), (4, 1)],
        ];
        let code = SparseCode::from_checks(1, 5, &checks, 5, 0, 0).unwrap();
        let order = leaf_removal(&code);
        assert_eq!(order.core_size, 4);
        assert_eq!(order.steps.len(), 1);
        assert_eq!(order.steps[0].check, 4);

        let peeled: Vec<usize> = order.steps.iter().map(|s| s.check).collect();
        let core_rows: Vec<_> = (0..checks.len())
            .filter(|f| !peeled.contains(f))
            .map(|f| checks[f].clone())
            .collect();
        let core = SparseCode::from_checks(1, 5, &core_rows, 4, 0, 0).unwrap();
        let again = leaf_removal(&core);
        assert!(again.steps.is_empty());
        assert_eq!(again.core_size, 4);
    }
}
