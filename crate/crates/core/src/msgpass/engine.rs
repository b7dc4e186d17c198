//! Sweep drivers: reinforced BP for encoding and damped plain BP for
//! fixed-point evaluation.
//!
//! One sweep visits every check once in a random permutation. Before a check
//! fires, the messages from its neighbours are recomputed from their other
//! incoming messages, so the schedule is fully sequential.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kernel::{check_update_with, var_message, CheckScratch, ProductStrategy};
use super::{argmax, Diagnostics, MessageState, Prior, SweepObserver, SweepStats};
use crate::error::{Error, Result};
use crate::gf::{FieldTables, Symbol};
use crate::graph::SparseCode;

/// Reinforced BP settings. `gamma(l) = 1 - gamma0 * gamma1^l`.
#[derive(Clone, Debug, PartialEq)]
pub struct RbpParams {
    pub gamma0: f64,
    pub gamma1: f64,
    /// Sweeps per trial.
    pub ell_max: usize,
    /// Trials (restarts with a fresh schedule) before giving up.
    pub t_max: usize,
    /// Message-stability threshold.
    pub epsilon: f64,
    pub schedule_seed: u64,
    pub strategy: ProductStrategy,
    /// Consecutive sweeps whose hard decision satisfies every check after
    /// which the run is declared polarized even if messages still move.
    pub stable_sweeps: usize,
}

impl Default for RbpParams {
    fn default() -> Self {
        Self {
            gamma0: 0.92,
            gamma1: 1.0,
            ell_max: 300,
            t_max: 5,
            epsilon: 1e-6,
            schedule_seed: 0,
            strategy: ProductStrategy::PrefixSuffix,
            stable_sweeps: 2,
        }
    }
}

impl RbpParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma0) || !(0.0..=1.0).contains(&self.gamma1) {
            return Err(Error::Config(format!(
                "gamma0={} and gamma1={} must lie in [0, 1]",
                self.gamma0, self.gamma1
            )));
        }
        if self.ell_max == 0 || self.t_max == 0 || self.stable_sweeps == 0 {
            return Err(Error::Config(
                "ell_max, t_max and stable_sweeps must be at least 1".into(),
            ));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon={} must be positive", self.epsilon)));
        }
        Ok(())
    }

    pub fn gamma(&self, ell: usize) -> f64 {
        1.0 - self.gamma0 * self.gamma1.powi(ell as i32)
    }
}

/// Damped plain BP settings.
#[derive(Clone, Debug, PartialEq)]
pub struct BpParams {
    /// Weight of the old check message: `out = (1 - d) new + d old`.
    pub damping: f64,
    pub ell_max: usize,
    pub epsilon: f64,
    pub schedule_seed: u64,
    pub strategy: ProductStrategy,
}

impl Default for BpParams {
    fn default() -> Self {
        Self {
            damping: 0.5,
            ell_max: 1000,
            epsilon: 1e-6,
            schedule_seed: 0,
            strategy: ProductStrategy::PrefixSuffix,
        }
    }
}

impl BpParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::Config(format!("damping={} must lie in [0, 1)", self.damping)));
        }
        if self.ell_max == 0 || !(self.epsilon > 0.0) {
            return Err(Error::Config("ell_max must be >= 1 and epsilon > 0".into()));
        }
        Ok(())
    }
}

/// RBP exhausted its trial budget without reaching a codeword.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncodeFailure {
    pub iterations: usize,
    pub trials: usize,
}

impl fmt::Display for EncodeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RBP did not converge after {} trials ({} sweeps)",
            self.trials, self.iterations
        )
    }
}

impl std::error::Error for EncodeFailure {}

#[derive(Clone, Debug, PartialEq)]
pub struct RbpReport {
    /// The codeword found, if any trial converged.
    pub codeword: Option<Vec<Symbol>>,
    /// Sweeps summed over all trials.
    pub iterations: usize,
    pub trials: usize,
    pub diagnostics: Diagnostics,
}

impl RbpReport {
    pub fn into_result(self) -> std::result::Result<Vec<Symbol>, EncodeFailure> {
        match self.codeword {
            Some(c) => Ok(c),
            None => Err(EncodeFailure {
                iterations: self.iterations,
                trials: self.trials,
            }),
        }
    }
}

pub fn run_rbp(
    code: &SparseCode,
    tables: &FieldTables,
    prior: &Prior,
    params: &RbpParams,
) -> Result<RbpReport> {
    run_rbp_with_schedule(code, tables, prior, params, &|ell| params.gamma(ell), None)
}

/// RBP with a caller-supplied reinforcement schedule `gamma(l)` and an
/// optional per-sweep observer.
pub fn run_rbp_with_schedule(
    code: &SparseCode,
    tables: &FieldTables,
    prior: &Prior,
    params: &RbpParams,
    gamma_of: &dyn Fn(usize) -> f64,
    mut observer: Option<&mut dyn SweepObserver>,
) -> Result<RbpReport> {
    params.validate()?;
    prior.check_dims(code)?;
    let q = code.q();
    let n = code.n_sym();
    let mut scratch = CheckScratch::new(q);
    let mut diag = Diagnostics::default();
    let mut reinf = Vec::new();
    let mut dither = vec![0.0; n * q];
    let mut order: Vec<usize> = (0..code.m_sym()).collect();
    let mut hard = vec![0 as Symbol; n];
    let mut iterations = 0;

    for trial in 0..params.t_max {
        let mut rng = ChaCha8Rng::seed_from_u64(params.schedule_seed);
        rng.set_stream(trial as u64);
        order.sort_unstable();
        order.shuffle(&mut rng);
        dither.iter_mut().for_each(|d| *d = 1e-12 * rng.random::<f64>());

        let mut state = MessageState::new(code, prior)?;
        let mut polarized = 0;
        for ell in 1..=params.ell_max {
            iterations += 1;
            state.iteration = ell;
            let gamma = gamma_of(ell);
            let max_delta = rbp_sweep(
                code,
                tables,
                prior,
                &mut state,
                gamma,
                &order,
                params.strategy,
                &mut SweepBuffers {
                    scratch: &mut scratch,
                    reinforcement: &mut reinf,
                    diagnostics: &mut diag,
                },
            );
            for v in 0..n {
                hard[v] = argmax(state.marginal(v), Some(&dither[v * q..(v + 1) * q])) as Symbol;
            }

            let unsat = code.unsatisfied_checks(tables, &hard);
            if let Some(obs) = observer.as_deref_mut() {
                obs.on_sweep(&SweepStats {
                    trial,
                    sweep: ell,
                    gamma,
                    max_delta,
                    unsat_checks: unsat,
                    entropy_proxy: entropy_proxy(&state.marginals, q, code.p()),
                });
            }
            if unsat == 0 {
                polarized += 1;
                if max_delta < params.epsilon || polarized >= params.stable_sweeps {
                    return Ok(RbpReport {
                        codeword: Some(hard),
                        iterations,
                        trials: trial + 1,
                        diagnostics: diag,
                    });
                }
            } else {
                polarized = 0;
            }
        }
        log::debug!("RBP trial {trial} hit ell_max={}", params.ell_max);
    }

    Ok(RbpReport {
        codeword: None,
        iterations,
        trials: params.t_max,
        diagnostics: diag,
    })
}

/// Work buffers borrowed by [`rbp_sweep`].
pub struct SweepBuffers<'a> {
    pub scratch: &'a mut CheckScratch,
    /// `n * q` buffer for `g_v^gamma`.
    pub reinforcement: &'a mut Vec<f64>,
    pub diagnostics: &'a mut Diagnostics,
}

/// One reinforced sweep over checks in `order`, followed by the marginal
/// update `g_v <- g_v^gamma mu1_v prod_f mu_fv`. Returns the largest change
/// of any check message.
#[allow(clippy::too_many_arguments)]
pub fn rbp_sweep(
    code: &SparseCode,
    tables: &FieldTables,
    prior: &Prior,
    state: &mut MessageState,
    gamma: f64,
    order: &[usize],
    strategy: ProductStrategy,
    buf: &mut SweepBuffers<'_>,
) -> f64 {
    let q = code.q();
    let n = code.n_sym();
    let reinforced = gamma != 0.0;
    let reinf = &mut *buf.reinforcement;
    if reinforced {
        reinf.resize(n * q, 1.0);
        for (r, g) in reinf.iter_mut().zip(&state.marginals) {
            *r = g.powf(gamma);
        }
    }

    let mut max_delta = 0.0f64;
    for &f in order {
        for e in code.check_edges(f) {
            let v = code.edge_var(e);
            let MessageState {
                var_to_check,
                check_to_var,
                ..
            } = &mut *state;
            let ok = var_message(
                code,
                check_to_var,
                prior.var(v),
                reinforced.then(|| &reinf[v * q..(v + 1) * q]),
                v,
                Some(e),
                true,
                &mut var_to_check[e * q..(e + 1) * q],
            );
            if !ok {
                buf.diagnostics.collapses += 1;
            }
        }
        let delta = check_update_with(
            code,
            tables,
            state,
            f,
            strategy,
            0.0,
            buf.scratch,
            buf.diagnostics,
        );
        max_delta = max_delta.max(delta);
    }

    for v in 0..n {
        let MessageState {
            check_to_var,
            marginals,
            ..
        } = &mut *state;
        let ok = var_message(
            code,
            check_to_var,
            prior.var(v),
            reinforced.then(|| &reinf[v * q..(v + 1) * q]),
            v,
            None,
            true,
            &mut marginals[v * q..(v + 1) * q],
        );
        if !ok {
            buf.diagnostics.collapses += 1;
        }
    }
    max_delta
}

/// Mean Shannon entropy of the marginals, in bits per binary digit.
fn entropy_proxy(marginals: &[f64], q: usize, p: u8) -> f64 {
    let n = marginals.len() / q;
    if n == 0 {
        return 0.0;
    }
    let total: f64 = marginals
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum();
    total / (n * p as usize) as f64
}

/// Result of a damped BP run.
#[derive(Clone, Debug)]
pub struct BpFixedPoint {
    pub state: MessageState,
    pub converged: bool,
    pub sweeps: usize,
    pub diagnostics: Diagnostics,
}

/// Damped plain BP from the initial state.
pub fn run_bp_fixed_point(
    code: &SparseCode,
    tables: &FieldTables,
    prior: &Prior,
    params: &BpParams,
) -> Result<BpFixedPoint> {
    let state = MessageState::new(code, prior)?;
    run_bp_from(code, tables, prior, params, state)
}

/// Damped plain BP continuing from `state` (warm start). On return the
/// variable messages and marginals are consistent with the final check
/// messages.
pub fn run_bp_from(
    code: &SparseCode,
    tables: &FieldTables,
    prior: &Prior,
    params: &BpParams,
    mut state: MessageState,
) -> Result<BpFixedPoint> {
    params.validate()?;
    prior.check_dims(code)?;
    if state.q() != code.q() || state.var_to_check.len() != code.num_edges() * code.q() {
        return Err(Error::Dimension("message state does not match code".into()));
    }
    let q = code.q();
    let mut scratch = CheckScratch::new(q);
    let mut diag = Diagnostics::default();
    let mut order: Vec<usize> = (0..code.m_sym()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.schedule_seed));

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < params.ell_max {
        sweeps += 1;
        let mut max_delta = 0.0f64;
        for &f in &order {
            refresh_check_inputs(code, prior, &mut state, f);
            let delta = check_update_with(
                code,
                tables,
                &mut state,
                f,
                params.strategy,
                params.damping,
                &mut scratch,
                &mut diag,
            );
            max_delta = max_delta.max(delta);
        }
        state.iteration += 1;
        if max_delta < params.epsilon {
            converged = true;
            break;
        }
    }

    for f in 0..code.m_sym() {
        refresh_check_inputs(code, prior, &mut state, f);
    }
    state.refresh_marginals(code, prior);
    Ok(BpFixedPoint {
        state,
        converged,
        sweeps,
        diagnostics: diag,
    })
}

fn refresh_check_inputs(code: &SparseCode, prior: &Prior, state: &mut MessageState, f: usize) {
    let q = code.q();
    for e in code.check_edges(f) {
        let v = code.edge_var(e);
        let MessageState {
            var_to_check,
            check_to_var,
            ..
        } = state;
        var_message(
            code,
            check_to_var,
            prior.var(v),
            None,
            v,
            Some(e),
            false,
            &mut var_to_check[e * q..(e + 1) * q],
        );
    }
}
