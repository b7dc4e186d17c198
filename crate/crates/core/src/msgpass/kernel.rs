//! Node updates.
//!
//! A check message is the XOR-convolution of the other neighbours' beliefs
//! about `h * c`. In the Walsh-Hadamard domain the convolution is a
//! pointwise product, so each check costs O(d q p): d forward transforms,
//! leave-one-out products, d inverse transforms.

use super::{Diagnostics, MessageState, Prior, PROB_FLOOR};
use crate::error::{Error, Result};
use crate::gf::{normalize, wht_in_place, FieldTables};
use crate::graph::SparseCode;

/// How the leave-one-out products over a check are formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProductStrategy {
    /// Prefix and suffix products; no division.
    #[default]
    PrefixSuffix,
    /// Full product divided by each factor. Falls back to prefix/suffix for
    /// the whole check when any factor entry is below `1e-12` in magnitude.
    Division,
}

const DIVISION_GUARD: f64 = 1e-12;

/// Reusable buffers for check updates.
#[derive(Clone, Debug, Default)]
pub struct CheckScratch {
    q: usize,
    transforms: Vec<f64>,
    outgoing: Vec<f64>,
    prefix: Vec<f64>,
}

impl CheckScratch {
    pub fn new(q: usize) -> Self {
        Self {
            q,
            ..Self::default()
        }
    }

    fn ensure(&mut self, q: usize, d: usize) {
        self.q = q;
        let len = q * d;
        if self.transforms.len() < len {
            self.transforms.resize(len, 0.0);
            self.outgoing.resize(len, 0.0);
        }
        if self.prefix.len() < q {
            self.prefix.resize(q, 0.0);
        }
    }

    /// Forward transforms of the permuted incoming messages of check `f`.
    fn load(&mut self, code: &SparseCode, tables: &FieldTables, f: usize, v2c: &[f64]) -> usize {
        let q = code.q();
        let d = code.check_degree(f);
        self.ensure(q, d);
        for (i, e) in code.check_edges(f).enumerate() {
            let t = &mut self.transforms[i * q..(i + 1) * q];
            let row = tables.mul_row(code.edge_coef(e));
            for (a, &x) in v2c[e * q..(e + 1) * q].iter().enumerate() {
                t[row[a] as usize] = x;
            }
            wht_in_place(t);
        }
        d
    }

    fn leave_one_out(&mut self, d: usize, strategy: ProductStrategy, diag: &mut Diagnostics) {
        let q = self.q;
        if strategy == ProductStrategy::Division {
            if self.transforms[..d * q].iter().all(|x| x.abs() >= DIVISION_GUARD) {
                let full = &mut self.prefix[..q];
                full.fill(1.0);
                for t in self.transforms[..d * q].chunks_exact(q) {
                    full.iter_mut().zip(t).for_each(|(x, y)| *x *= y);
                }
                for i in 0..d {
                    let t = &self.transforms[i * q..(i + 1) * q];
                    let out = &mut self.outgoing[i * q..(i + 1) * q];
                    for s in 0..q {
                        out[s] = full[s] / t[s];
                    }
                }
                return;
            }
            diag.division_fallbacks += 1;
        }
        // outgoing[i] <- prefix product of t[0..i], then times suffix t[i+1..d].
        let prefix = &mut self.prefix[..q];
        prefix.fill(1.0);
        for i in 0..d {
            self.outgoing[i * q..(i + 1) * q].copy_from_slice(prefix);
            let t = &self.transforms[i * q..(i + 1) * q];
            prefix.iter_mut().zip(t).for_each(|(x, y)| *x *= y);
        }
        let suffix = &mut self.prefix[..q];
        suffix.fill(1.0);
        for i in (0..d).rev() {
            let out = &mut self.outgoing[i * q..(i + 1) * q];
            out.iter_mut().zip(suffix.iter()).for_each(|(x, y)| *x *= y);
            let t = &self.transforms[i * q..(i + 1) * q];
            suffix.iter_mut().zip(t).for_each(|(x, y)| *x *= y);
        }
    }
}

/// Recomputes every check-to-variable message of check `f` from the current
/// variable-to-check messages, using prefix/suffix products. Returns the
/// largest absolute entry change.
pub fn check_update(code: &SparseCode, tables: &FieldTables, state: &mut MessageState, f: usize) -> f64 {
    let mut scratch = CheckScratch::new(code.q());
    let mut diag = Diagnostics::default();
    check_update_with(
        code,
        tables,
        state,
        f,
        ProductStrategy::PrefixSuffix,
        0.0,
        &mut scratch,
        &mut diag,
    )
}

/// Check update with an explicit product strategy and damping
/// `out = (1 - damping) new + damping old`.
#[allow(clippy::too_many_arguments)]
pub fn check_update_with(
    code: &SparseCode,
    tables: &FieldTables,
    state: &mut MessageState,
    f: usize,
    strategy: ProductStrategy,
    damping: f64,
    scratch: &mut CheckScratch,
    diag: &mut Diagnostics,
) -> f64 {
    let q = code.q();
    let d = scratch.load(code, tables, f, &state.var_to_check);
    scratch.leave_one_out(d, strategy, diag);
    let mut max_delta = 0.0f64;
    for (i, e) in code.check_edges(f).enumerate() {
        let out = &mut scratch.outgoing[i * q..(i + 1) * q];
        wht_in_place(out);
        let row = tables.mul_row(code.edge_coef(e));
        let old = &mut state.check_to_var[e * q..(e + 1) * q];
        // Reuse the transform slot for the new message.
        let msg = &mut scratch.transforms[i * q..(i + 1) * q];
        for a in 0..q {
            msg[a] = out[row[a] as usize].max(0.0);
        }
        if !normalize(msg) {
            diag.annihilations += 1;
        }
        for (o, &n) in old.iter_mut().zip(msg.iter()) {
            let new = if damping > 0.0 {
                (1.0 - damping) * n + damping * *o
            } else {
                n
            };
            max_delta = max_delta.max((new - *o).abs());
            *o = new;
        }
    }
    max_delta
}

/// Parity-constrained normalizer of check `f`:
/// `Z_f = sum_{c_f satisfying f} prod_v mu_vf(c_v)`, the probability that
/// independent draws from the incoming messages satisfy the check.
///
/// `cavity` receives, per edge in check order, the unnormalized
/// `sum_{Conf(a)} prod_{v' != v} mu_v'f`, so that
/// `sum_a mu_vf(a) cavity_v(a) = Z_f` for every neighbour.
pub fn factor_normalizer(
    code: &SparseCode,
    tables: &FieldTables,
    state: &MessageState,
    f: usize,
    scratch: &mut CheckScratch,
    cavity: &mut Vec<f64>,
) -> f64 {
    let q = code.q();
    let d = scratch.load(code, tables, f, &state.var_to_check);
    let mut diag = Diagnostics::default();
    scratch.leave_one_out(d, ProductStrategy::PrefixSuffix, &mut diag);

    // Z_f is the full convolution at symbol 0: (1/q) sum_s prod_i T_i(s).
    let z: f64 = (0..q)
        .map(|s| (0..d).map(|i| scratch.transforms[i * q + s]).product::<f64>())
        .sum::<f64>()
        / q as f64;

    cavity.clear();
    cavity.resize(d * q, 0.0);
    for (i, e) in code.check_edges(f).enumerate() {
        let out = &mut scratch.outgoing[i * q..(i + 1) * q];
        wht_in_place(out);
        let row = tables.mul_row(code.edge_coef(e));
        for a in 0..q {
            cavity[i * q + a] = (out[row[a] as usize] / q as f64).max(0.0);
        }
    }
    z
}

/// `out ∝ floor(prior_v * reinforcement * prod_{e' != skip} mu_{f'v})`.
/// Returns `false` when the product collapsed to zero.
pub(crate) fn var_message(
    code: &SparseCode,
    c2v: &[f64],
    prior: &[f64],
    reinforcement: Option<&[f64]>,
    v: usize,
    skip: Option<usize>,
    floor: bool,
    out: &mut [f64],
) -> bool {
    let q = out.len();
    out.copy_from_slice(prior);
    if let Some(r) = reinforcement {
        out.iter_mut().zip(r).for_each(|(x, y)| *x *= y);
    }
    for &e in code.var_edges(v) {
        if Some(e) == skip {
            continue;
        }
        out.iter_mut()
            .zip(&c2v[e * q..(e + 1) * q])
            .for_each(|(x, y)| *x *= y);
    }
    let total: f64 = out.iter().sum();
    let ok = total > 0.0 && total.is_finite();
    if floor {
        out.iter_mut().for_each(|x| *x = x.max(PROB_FLOOR));
    }
    normalize(out);
    ok
}

fn edge_between(code: &SparseCode, v: usize, f: usize) -> Result<usize> {
    code.var_edges(v)
        .iter()
        .copied()
        .find(|&e| code.edge_check(e) == f)
        .ok_or_else(|| Error::Domain(format!("variable {v} is not adjacent to check {f}")))
}

/// Plain BP variable-to-check message `mu_vf ∝ mu1_v prod_{f' != f} mu_f'v`.
pub fn var_update_bp(
    code: &SparseCode,
    state: &MessageState,
    prior: &Prior,
    v: usize,
    f: usize,
) -> Result<Vec<f64>> {
    let e = edge_between(code, v, f)?;
    let mut out = vec![0.0; code.q()];
    var_message(code, &state.check_to_var, prior.var(v), None, v, Some(e), false, &mut out);
    Ok(out)
}

/// Reinforced message `mu_vf ∝ g_v^gamma mu1_v prod_{f' != f} mu_f'v`, with
/// `g_v` the marginal currently stored in `state`.
pub fn var_update_rbp(
    code: &SparseCode,
    state: &MessageState,
    prior: &Prior,
    v: usize,
    f: usize,
    gamma: f64,
) -> Result<Vec<f64>> {
    let e = edge_between(code, v, f)?;
    let reinf: Vec<f64> = state.marginal(v).iter().map(|g| g.powf(gamma)).collect();
    let mut out = vec![0.0; code.q()];
    var_message(code, &state.check_to_var, prior.var(v), Some(&reinf), v, Some(e), true, &mut out);
    Ok(out)
}
