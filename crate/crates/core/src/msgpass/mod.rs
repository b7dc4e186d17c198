//! Belief propagation and reinforced belief propagation over GF(q) factor
//! graphs. Messages live in the probability domain and are renormalized
//! after every update.

mod diagnostics;
mod engine;
mod kernel;

pub use diagnostics::{CsvDiagnostics, Diagnostics, SweepObserver, SweepStats};
pub use engine::{
    rbp_sweep, run_bp_fixed_point, run_bp_from, run_rbp, run_rbp_with_schedule, BpFixedPoint,
    BpParams, EncodeFailure, RbpParams, RbpReport, SweepBuffers,
};
pub use kernel::{
    check_update, check_update_with, factor_normalizer, var_update_bp, var_update_rbp,
    CheckScratch, ProductStrategy,
};

use crate::error::{Error, Result};
use crate::graph::SparseCode;

/// Floor applied to reinforced messages and marginals before normalizing.
pub const PROB_FLOOR: f64 = 1e-300;

/// Per-variable external field `mu1_v`, stored row-major (`n * q`).
#[derive(Clone, Debug, PartialEq)]
pub struct Prior {
    q: usize,
    values: Vec<f64>,
    strength: f64,
}

impl Prior {
    pub fn new(q: usize, values: Vec<f64>, strength: f64) -> Result<Self> {
        if q == 0 || !values.len().is_multiple_of(q) {
            return Err(Error::Dimension(format!(
                "prior length {} is not a multiple of q={q}",
                values.len()
            )));
        }
        if values.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Domain("prior entries must be finite and non-negative".into()));
        }
        Ok(Self { q, values, strength })
    }

    pub fn uniform(n_sym: usize, q: usize) -> Self {
        Self {
            q,
            values: vec![1.0 / q as f64; n_sym * q],
            strength: 0.0,
        }
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n_sym(&self) -> usize {
        self.values.len() / self.q
    }

    /// Field intensity `L` the prior was built with.
    pub fn strength(&self) -> f64 {
        self.strength
    }

    #[inline]
    pub fn var(&self, v: usize) -> &[f64] {
        &self.values[v * self.q..(v + 1) * self.q]
    }

    pub(crate) fn check_dims(&self, code: &SparseCode) -> Result<()> {
        if self.q != code.q() || self.n_sym() != code.n_sym() {
            return Err(Error::Dimension(format!(
                "prior is {}x{} but code has n={} q={}",
                self.n_sym(),
                self.q,
                code.n_sym(),
                code.q()
            )));
        }
        Ok(())
    }
}

/// All messages and marginals of one run. Every vector has length `q`;
/// edge messages are indexed by the code's edge ids.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageState {
    q: usize,
    pub(crate) var_to_check: Vec<f64>,
    pub(crate) check_to_var: Vec<f64>,
    pub(crate) marginals: Vec<f64>,
    pub iteration: usize,
}

impl MessageState {
    /// Variable messages and marginals start at the normalized prior,
    /// check messages at uniform.
    pub fn new(code: &SparseCode, prior: &Prior) -> Result<Self> {
        prior.check_dims(code)?;
        let q = code.q();
        let mut marginals = prior.values.clone();
        for v in marginals.chunks_exact_mut(q) {
            crate::gf::normalize(v);
        }
        let mut var_to_check = vec![0.0; code.num_edges() * q];
        for e in 0..code.num_edges() {
            let v = code.edge_var(e);
            var_to_check[e * q..(e + 1) * q].copy_from_slice(&marginals[v * q..(v + 1) * q]);
        }
        Ok(Self {
            q,
            var_to_check,
            check_to_var: vec![1.0 / q as f64; code.num_edges() * q],
            marginals,
            iteration: 0,
        })
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn var_to_check(&self, e: usize) -> &[f64] {
        &self.var_to_check[e * self.q..(e + 1) * self.q]
    }

    #[inline]
    pub fn check_to_var(&self, e: usize) -> &[f64] {
        &self.check_to_var[e * self.q..(e + 1) * self.q]
    }

    #[inline]
    pub fn marginal(&self, v: usize) -> &[f64] {
        &self.marginals[v * self.q..(v + 1) * self.q]
    }

    pub fn var_to_check_mut(&mut self, e: usize) -> &mut [f64] {
        &mut self.var_to_check[e * self.q..(e + 1) * self.q]
    }

    pub fn check_to_var_mut(&mut self, e: usize) -> &mut [f64] {
        &mut self.check_to_var[e * self.q..(e + 1) * self.q]
    }

    /// Hard decision `argmax_a g_v(a)`, lowest symbol on ties.
    pub fn hard_decision(&self) -> Vec<crate::gf::Symbol> {
        self.marginals
            .chunks_exact(self.q)
            .map(|g| argmax(g, None) as crate::gf::Symbol)
            .collect()
    }

    /// Recomputes BP marginals `g_v ∝ mu1_v * prod_f mu_fv`.
    pub fn refresh_marginals(&mut self, code: &SparseCode, prior: &Prior) {
        let q = self.q;
        for v in 0..code.n_sym() {
            let g = &mut self.marginals[v * q..(v + 1) * q];
            g.copy_from_slice(prior.var(v));
            for &e in code.var_edges(v) {
                let m = &self.check_to_var[e * q..(e + 1) * q];
                g.iter_mut().zip(m).for_each(|(x, y)| *x *= y);
            }
            crate::gf::normalize(g);
        }
    }
}

/// Index of the largest entry, lowest index on ties. `dither` is added to
/// the values before comparing.
pub(crate) fn argmax(g: &[f64], dither: Option<&[f64]>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (a, &x) in g.iter().enumerate() {
        let x = x + dither.map_or(0.0, |d| d[a]);
        if x > best_val {
            best_val = x;
            best = a;
        }
    }
    best
}
