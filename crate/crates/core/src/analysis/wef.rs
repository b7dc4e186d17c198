use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{bits_to_symbols, build_prior};
use crate::error::{Error, Result};
use crate::gf::{FieldTables, Symbol};
use crate::graph::SparseCode;
use crate::msgpass::{factor_normalizer, run_bp_from, BpParams, CheckScratch, MessageState, Prior, PROB_FLOOR};

/// `sum_v sum_a g_v(a) popcount(a ^ y_v) / (n_sym * p)`.
pub fn avg_distance(state: &MessageState, source: &[Symbol], p: u8) -> f64 {
    let mut total = 0.0;
    for (v, &y) in source.iter().enumerate() {
        total += state
            .marginal(v)
            .iter()
            .enumerate()
            .map(|(a, g)| g * (a as Symbol ^ y).count_ones() as f64)
            .sum::<f64>();
    }
    total / (source.len() * p as usize) as f64
}

/// Largest disagreement between stored and recomputed check messages still
/// treated as a fixed point. Damped runs stop once the damped change falls
/// below epsilon, so the undamped residual can be a few times larger.
const APPROX_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetheEntropy {
    pub nats: f64,
    /// Set when the stored check messages disagree with a fresh update, i.e.
    /// the state is not a fixed point.
    pub approximate: bool,
}

impl BetheEntropy {
    /// Bits per binary digit.
    pub fn density(&self, n_bits: usize) -> f64 {
        self.nats / (n_bits as f64 * std::f64::consts::LN_2)
    }
}

fn xlnx_sum(b: &[f64]) -> f64 {
    b.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum()
}

/// Bethe entropy of the code-constrained measure with the prior folded into
/// the variable beliefs. Factor terms use
/// `S_f = ln Z_f - sum_v sum_a b_fv(a) ln mu_vf(a)`, with `Z_f` read off the
/// transform domain.
pub fn bethe_entropy(
    state: &MessageState,
    code: &SparseCode,
    prior: &Prior,
    tables: &FieldTables,
) -> Result<BetheEntropy> {
    prior.check_dims(code)?;
    let q = code.q();
    if state.q() != q || state.var_to_check.len() != code.num_edges() * q {
        return Err(Error::Dimension("message state does not match code".into()));
    }
    let mut scratch = CheckScratch::new(q);
    let mut cavity = Vec::new();
    let mut belief = vec![0.0; q];
    let mut entropy = 0.0;
    let mut mismatch = 0.0f64;

    for f in 0..code.m_sym() {
        let z = factor_normalizer(code, tables, state, f, &mut scratch, &mut cavity).max(PROB_FLOOR);
        let mut s_f = z.ln();
        for (i, e) in code.check_edges(f).enumerate() {
            let mu = state.var_to_check(e);
            let cav = &cavity[i * q..(i + 1) * q];
            for a in 0..q {
                belief[a] = mu[a] * cav[a] / z;
                if belief[a] > 0.0 {
                    s_f -= belief[a] * mu[a].max(PROB_FLOOR).ln();
                }
            }
            let norm: f64 = cav.iter().sum();
            if norm > 0.0 {
                for (c, m) in cav.iter().zip(state.check_to_var(e)) {
                    mismatch = mismatch.max((c / norm - m).abs());
                }
            }
        }
        entropy += s_f;
    }

    for v in 0..code.n_sym() {
        belief.copy_from_slice(prior.var(v));
        for &e in code.var_edges(v) {
            for (b, m) in belief.iter_mut().zip(state.check_to_var(e)) {
                *b *= m;
            }
        }
        crate::gf::normalize(&mut belief);
        entropy += (1.0 - code.var_degree(v) as f64) * -xlnx_sum(&belief);
    }

    Ok(BetheEntropy {
        nats: entropy,
        approximate: mismatch > APPROX_TOL,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct WefPoint {
    pub strength: f64,
    pub avg_distance: f64,
    /// Bits per binary digit.
    pub entropy_density: f64,
    pub converged: bool,
    pub approximate: bool,
    pub sweeps: usize,
}

/// Runs damped BP at each prior strength in `l_grid`, warm-starting from
/// the previous fixed point. Returns every point; see [`wef_curve`].
pub fn wef_sweep(
    code: &SparseCode,
    tables: &FieldTables,
    y: &[Symbol],
    l_grid: &[f64],
    params: &BpParams,
) -> Result<Vec<WefPoint>> {
    if l_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("L grid must be sorted ascending".into()));
    }
    if y.len() != code.n_sym() {
        return Err(Error::Dimension(format!(
            "reference has {} symbols, code has {}",
            y.len(),
            code.n_sym()
        )));
    }
    let p = code.p();
    let mut points = Vec::with_capacity(l_grid.len());
    let mut state: Option<MessageState> = None;
    for &l in l_grid {
        let prior = build_prior(y, l, p)?;
        let start = match state.take() {
            Some(s) => s,
            None => MessageState::new(code, &prior)?,
        };
        let fp = run_bp_from(code, tables, &prior, params, start)?;
        let s = bethe_entropy(&fp.state, code, &prior, tables)?;
        log::debug!("wef L={l} converged={} sweeps={}", fp.converged, fp.sweeps);
        points.push(WefPoint {
            strength: l,
            avg_distance: avg_distance(&fp.state, y, p),
            entropy_density: s.density(code.n_bits()),
            converged: fp.converged,
            approximate: s.approximate,
            sweeps: fp.sweeps,
        });
        state = Some(fp.state);
    }
    Ok(points)
}

/// Converged points only.
pub fn wef_curve(points: &[WefPoint]) -> Vec<WefPoint> {
    points.iter().filter(|pt| pt.converged && !pt.approximate).copied().collect()
}

/// Bernoulli(1/2) reference vector as `n_sym` symbols.
pub fn random_reference(n_sym: usize, p: u8, seed: u64) -> Vec<Symbol> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits: Vec<u8> = (0..n_sym * p as usize).map(|_| rng.random_range(0..2)).collect();
    bits_to_symbols(&bits, p).0
}
