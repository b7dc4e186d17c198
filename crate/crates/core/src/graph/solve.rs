//! Dense Gaussian elimination over GF(q). Cubic cost; intended as an
//! independent reference for small instances.

use super::SparseCode;
use crate::gf::{FieldTables, Symbol};

/// Finds a codeword agreeing with every `Some` entry of `fixed`, or `None`
/// if the constraints are inconsistent. Unconstrained free variables are
/// set to zero.
pub fn generic_rank_solver(
    code: &SparseCode,
    tables: &FieldTables,
    fixed: &[Option<Symbol>],
) -> Option<Vec<Symbol>> {
    let n = code.n_sym();
    assert_eq!(fixed.len(), n, "partial assignment length");
    let unknown: Vec<usize> = (0..n).filter(|&v| fixed[v].is_none()).collect();
    let mut col_of = vec![usize::MAX; n];
    for (c, &v) in unknown.iter().enumerate() {
        col_of[v] = c;
    }
    let cols = unknown.len();

    // Rows: [coefficients of unknowns | rhs]
    let mut rows: Vec<Vec<Symbol>> = (0..code.m_sym())
        .map(|f| {
            let mut row = vec![0 as Symbol; cols + 1];
            for e in code.check_edges(f) {
                let v = code.edge_var(e);
                let h = code.edge_coef(e);
                match fixed[v] {
                    Some(x) => row[cols] ^= tables.mul(h, x),
                    None => row[col_of[v]] ^= h,
                }
            }
            row
        })
        .collect();

    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let scale = tables.inv_nonzero(rows[r][c]);
        for x in rows[r].iter_mut() {
            *x = tables.mul(*x, scale);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let k = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x ^= tables.mul(k, y);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| row[cols] != 0) {
        return None;
    }

    let mut word: Vec<Symbol> = fixed.iter().map(|x| x.unwrap_or(0)).collect();
    for (i, &c) in pivots.iter().enumerate() {
        // Free columns are zero, so the pivot equals the reduced rhs.
        word[unknown[c]] = rows[i][cols];
    }
    Some(word)
}
