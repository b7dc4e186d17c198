use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bound::{binary_entropy, db_distance, rd_bound};
use super::wef::{random_reference, wef_sweep};
use crate::codec::{bits_to_symbols, build_prior, distortion, symbols_to_bits, Codec, EncodeParams};
use crate::error::{Error, Result};
use crate::gf::FieldTables;
use crate::graph::{build_code, checks_for_rate, symbols_for_bits};
use crate::msgpass::{run_rbp, BpParams, RbpParams};

/// Batch experiment settings, read from `key = value` lines. Lists are
/// comma separated; `#` starts a comment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub p: u8,
    pub nbits: usize,
    pub rate: f64,
    pub b: usize,
    pub code_seed: u64,
    /// Prior strength `L`.
    pub strength: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub ell_max: usize,
    pub t_max: usize,
    pub epsilon: f64,
    pub samples: usize,
    pub master_seed: u64,
    pub jobs: usize,
    pub output: Option<PathBuf>,
    pub gamma0_grid: Vec<f64>,
    pub rate_grid: Vec<f64>,
    /// Paired with `rate_grid`; one value is broadcast.
    pub strength_grid: Vec<f64>,
    pub b_grid: Vec<usize>,
    pub p_grid: Vec<u8>,
    pub l_grid: Vec<f64>,
    pub damping: f64,
    pub bp_ell_max: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let rbp = RbpParams::default();
        ExperimentConfig {
            p: 6,
            nbits: 1600,
            rate: 0.33,
            b: 5,
            code_seed: 1,
            strength: EncodeParams::default().strength,
            gamma0: rbp.gamma0,
            gamma1: rbp.gamma1,
            ell_max: rbp.ell_max,
            t_max: rbp.t_max,
            epsilon: rbp.epsilon,
            samples: 50,
            master_seed: 0,
            jobs: 0,
            output: None,
            gamma0_grid: Vec::new(),
            rate_grid: Vec::new(),
            strength_grid: Vec::new(),
            b_grid: Vec::new(),
            p_grid: Vec::new(),
            l_grid: Vec::new(),
            damping: 0.5,
            bp_ell_max: 1000,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", v.trim())))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(k.trim(), v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "p" => self.p = parse_num(key, v)?,
            "nbits" => self.nbits = parse_num(key, v)?,
            "rate" => self.rate = parse_num(key, v)?,
            "b" => self.b = parse_num(key, v)?,
            "code_seed" => self.code_seed = parse_num(key, v)?,
            "L" | "strength" => self.strength = parse_num(key, v)?,
            "gamma0" => self.gamma0 = parse_num(key, v)?,
            "gamma1" => self.gamma1 = parse_num(key, v)?,
            "ell_max" => self.ell_max = parse_num(key, v)?,
            "t_max" => self.t_max = parse_num(key, v)?,
            "epsilon" => self.epsilon = parse_num(key, v)?,
            "samples" => self.samples = parse_num(key, v)?,
            "master_seed" => self.master_seed = parse_num(key, v)?,
            "jobs" => self.jobs = parse_num(key, v)?,
            "output" => self.output = Some(PathBuf::from(v.trim())),
            "gamma0_grid" => self.gamma0_grid = parse_list(key, v)?,
            "rate_grid" => self.rate_grid = parse_list(key, v)?,
            "L_grid" if self.rate_grid.is_empty() && self.strength_grid.is_empty() => {
                self.l_grid = parse_list(key, v)?
            }
            "l_grid" => self.l_grid = parse_list(key, v)?,
            "strength_grid" => self.strength_grid = parse_list(key, v)?,
            "b_grid" => self.b_grid = parse_list(key, v)?,
            "p_grid" => self.p_grid = parse_list(key, v)?,
            "damping" => self.damping = parse_num(key, v)?,
            "bp_ell_max" => self.bp_ell_max = parse_num(key, v)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=8).contains(&self.p) || self.p_grid.iter().any(|p| !(1..=8).contains(p)) {
            return Err(Error::Config("p must be in 1..=8".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if !(self.rate > 0.0 && self.rate < 1.0) || self.rate_grid.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return Err(Error::Config("rates must lie in (0, 1)".into()));
        }
        if !(self.strength_grid.len() <= 1 || self.strength_grid.len() == self.rate_grid.len()) {
            return Err(Error::Config(format!(
                "strength_grid has {} entries; give one or one per rate ({})",
                self.strength_grid.len(),
                self.rate_grid.len()
            )));
        }
        if !(self.gamma0_grid.len() <= 1
            || self.gamma0_grid.len() == self.rate_grid.len()
            || self.rate_grid.is_empty())
        {
            return Err(Error::Config(
                "with rate_grid, gamma0_grid needs one entry or one per rate".into(),
            ));
        }
        if self.strength < 0.0 || self.strength_grid.iter().chain(&self.l_grid).any(|l| *l < 0.0) {
            return Err(Error::Config("prior strengths must be >= 0".into()));
        }
        self.rbp(self.gamma0).validate()?;
        self.bp().validate()
    }

    fn rbp(&self, gamma0: f64) -> RbpParams {
        RbpParams {
            gamma0,
            gamma1: self.gamma1,
            ell_max: self.ell_max,
            t_max: self.t_max,
            epsilon: self.epsilon,
            ..RbpParams::default()
        }
    }

    fn bp(&self) -> BpParams {
        BpParams {
            damping: self.damping,
            ell_max: self.bp_ell_max,
            ..BpParams::default()
        }
    }

    fn point(&self) -> GridPoint {
        GridPoint {
            p: self.p,
            nbits: self.nbits,
            rate: self.rate,
            b: self.b,
            strength: self.strength,
            gamma0: self.gamma0,
        }
    }
}

/// One setting of the swept parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub p: u8,
    pub nbits: usize,
    pub rate: f64,
    pub b: usize,
    pub strength: f64,
    pub gamma0: f64,
}

/// Summary row for one grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RdPoint {
    pub p: u8,
    pub nbits: usize,
    /// Design rate of the reduced code, bits per source bit.
    pub rate: f64,
    pub b: usize,
    pub strength: f64,
    pub gamma0: f64,
    /// Mean over non-failed samples.
    pub distortion: f64,
    pub distortion_std: f64,
    pub d_star: f64,
    pub db_gap: f64,
    pub samples: usize,
    pub mean_iters: f64,
    pub mean_trials: f64,
    pub iters_per_trial: f64,
    pub failure_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRecord {
    pub point: usize,
    pub sample: usize,
    pub seed: u64,
    pub distortion: f64,
    pub iterations: usize,
    pub trials: usize,
    pub failed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepOutput {
    pub config: ExperimentConfig,
    pub summary: Vec<RdPoint>,
    pub samples: Vec<SampleRecord>,
}

fn sample_seeds(master: u64, point: usize, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(point as u64);
    (0..n).map(|_| rng.random()).collect()
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Runs `cfg.samples` encodes per grid point. Each sample draws its source
/// and RBP schedule from a seed derived from `(master_seed, point, sample)`,
/// so results do not depend on `jobs`.
pub fn run_grid(cfg: &ExperimentConfig, points: &[GridPoint]) -> Result<SweepOutput> {
    cfg.validate()?;
    let workers = pool(cfg.jobs)?;
    let mut summary = Vec::with_capacity(points.len());
    let mut records = Vec::new();
    for (idx, gp) in points.iter().enumerate() {
        let n_sym = symbols_for_bits(gp.nbits, gp.p);
        let m = checks_for_rate(n_sym, gp.rate)?;
        let code = build_code(gp.p, n_sym, m, gp.b, cfg.code_seed)?;
        let rate = code.rate();
        // Codes with a non-empty core (b = 0) have no information set; for
        // those only the encoder side is measured.
        let codec = Codec::new(code.clone()).ok();
        if codec.is_none() {
            log::warn!("point {idx}: code has a non-empty core, measuring RBP distortion only");
        }
        let tables = FieldTables::new(gp.p)?;
        let seeds = sample_seeds(cfg.master_seed, idx, cfg.samples);
        let block_bits = code.n_bits();
        let rows: Vec<Result<SampleRecord>> = workers.install(|| {
            seeds
                .par_iter()
                .enumerate()
                .map(|(i, &seed)| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let bits: Vec<u8> = (0..block_bits).map(|_| rng.random_range(0..2)).collect();
                    let params = EncodeParams {
                        strength: gp.strength,
                        rbp: RbpParams {
                            schedule_seed: seed,
                            ..cfg.rbp(gp.gamma0)
                        },
                    };
                    let (distortion, iterations, trials, failed) = match &codec {
                        Some(c) => {
                            let out = c.encode(&bits, &params)?;
                            (out.distortion, out.iterations, out.trials, out.fallback)
                        }
                        None => {
                            let (y, _) = bits_to_symbols(&bits, gp.p);
                            let prior = build_prior(&y, gp.strength, gp.p)?;
                            let r = run_rbp(&code, &tables, &prior, &params.rbp)?;
                            let d = match &r.codeword {
                                Some(w) => distortion(&bits, &symbols_to_bits(w, gp.p))?,
                                None => 0.0,
                            };
                            (d, r.iterations, r.trials, r.codeword.is_none())
                        }
                    };
                    Ok(SampleRecord {
                        point: idx,
                        sample: i,
                        seed,
                        distortion,
                        iterations,
                        trials,
                        failed,
                    })
                })
                .collect()
        });
        let rows: Vec<SampleRecord> = rows.into_iter().collect::<Result<_>>()?;
        summary.push(summarize(gp, rate, &rows)?);
        log::info!(
            "point {idx}: rate={rate:.4} gamma0={} L={} b={} D={:.4}",
            gp.gamma0,
            gp.strength,
            gp.b,
            summary[idx].distortion
        );
        records.extend(rows);
    }
    Ok(SweepOutput {
        config: cfg.clone(),
        summary,
        samples: records,
    })
}

fn summarize(gp: &GridPoint, rate: f64, rows: &[SampleRecord]) -> Result<RdPoint> {
    let n = rows.len() as f64;
    let ok: Vec<f64> = rows.iter().filter(|r| !r.failed).map(|r| r.distortion).collect();
    let (mean, std) = if ok.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let k = ok.len() as f64;
        let mean = ok.iter().sum::<f64>() / k;
        let var = ok.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / k;
        (mean, var.sqrt())
    };
    let mean_iters = rows.iter().map(|r| r.iterations as f64).sum::<f64>() / n;
    let mean_trials = rows.iter().map(|r| r.trials as f64).sum::<f64>() / n;
    let d_star = rd_bound(rate)?;
    Ok(RdPoint {
        p: gp.p,
        nbits: gp.nbits,
        rate,
        b: gp.b,
        strength: gp.strength,
        gamma0: gp.gamma0,
        distortion: mean,
        distortion_std: std,
        d_star,
        db_gap: db_distance(mean, d_star),
        samples: rows.len(),
        mean_iters,
        mean_trials,
        iters_per_trial: mean_iters / mean_trials,
        failure_rate: (rows.len() - ok.len()) as f64 / n,
    })
}

/// One grid point per `gamma0_grid` entry on the configured code.
pub fn gamma_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let base = cfg.point();
    let grid: Vec<GridPoint> = cfg
        .gamma0_grid
        .iter()
        .map(|&gamma0| GridPoint { gamma0, ..base })
        .collect();
    run_grid(cfg, &grid)
}

/// One grid point per rate, with per-rate `L` and `gamma0` when given.
pub fn rate_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let base = cfg.point();
    let pick = |grid: &[f64], i: usize, default: f64| match grid.len() {
        0 => default,
        1 => grid[0],
        _ => grid[i],
    };
    let grid: Vec<GridPoint> = cfg
        .rate_grid
        .iter()
        .enumerate()
        .map(|(i, &rate)| GridPoint {
            rate,
            strength: pick(&cfg.strength_grid, i, cfg.strength),
            gamma0: pick(&cfg.gamma0_grid, i, cfg.gamma0),
            ..base
        })
        .collect();
    run_grid(cfg, &grid)
}

/// One grid point per reduction depth in `b_grid`.
pub fn b_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let base = cfg.point();
    let grid: Vec<GridPoint> = cfg.b_grid.iter().map(|&b| GridPoint { b, ..base }).collect();
    run_grid(cfg, &grid)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WefRow {
    pub p: u8,
    pub rate: f64,
    pub strength: f64,
    pub avg_distance: f64,
    pub entropy_density: f64,
    /// `1 - H(D)` at this point's distance.
    pub rd_curve: f64,
    pub converged: bool,
    pub approximate: bool,
    pub sweeps: usize,
}

/// WEF curves for every `(p, rate)` in `p_grid x rate_grid` at block length
/// `nbits`. Each curve uses its own random reference vector.
pub fn wef_experiment(cfg: &ExperimentConfig) -> Result<Vec<WefRow>> {
    cfg.validate()?;
    if cfg.l_grid.is_empty() {
        return Err(Error::Config("wef needs l_grid".into()));
    }
    let ps = if cfg.p_grid.is_empty() { vec![cfg.p] } else { cfg.p_grid.clone() };
    let rates = if cfg.rate_grid.is_empty() { vec![cfg.rate] } else { cfg.rate_grid.clone() };
    let combos: Vec<(usize, u8, f64)> = ps
        .iter()
        .flat_map(|&p| rates.iter().map(move |&r| (p, r)))
        .enumerate()
        .map(|(i, (p, r))| (i, p, r))
        .collect();
    let curves: Vec<Result<Vec<WefRow>>> = pool(cfg.jobs)?.install(|| {
        combos
            .par_iter()
            .map(|&(i, p, r)| {
                let n_sym = symbols_for_bits(cfg.nbits, p);
                let code = build_code(p, n_sym, checks_for_rate(n_sym, r)?, cfg.b, cfg.code_seed)?;
                let tables = FieldTables::new(p)?;
                let y = random_reference(n_sym, p, sample_seeds(cfg.master_seed, i, 1)[0]);
                let pts = wef_sweep(&code, &tables, &y, &cfg.l_grid, &cfg.bp())?;
                Ok(pts
                    .into_iter()
                    .map(|pt| WefRow {
                        p,
                        rate: code.rate(),
                        strength: pt.strength,
                        avg_distance: pt.avg_distance,
                        entropy_density: pt.entropy_density,
                        rd_curve: 1.0 - binary_entropy(pt.avg_distance),
                        converged: pt.converged,
                        approximate: pt.approximate,
                        sweeps: pt.sweeps,
                    })
                    .collect())
            })
            .collect()
    });
    let mut rows = Vec::new();
    for c in curves {
        rows.extend(c?);
    }
    Ok(rows)
}

/// `(D, 1 - H(D))` on an even grid of `points` distortions in `[0, 0.5]`.
pub fn bound_curve(points: usize) -> Vec<(f64, f64)> {
    (0..points)
        .map(|i| {
            let d = 0.5 * i as f64 / (points - 1).max(1) as f64;
            (d, 1.0 - binary_entropy(d))
        })
        .collect()
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `rows` as `<stem>.csv` and `<stem>.json`.
pub fn write_records<T: Serialize>(rows: &[T], stem: &Path) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Format(format!("csv: {e}"));
    let mut w = csv::Writer::from_path(with_suffix(stem, ".csv")).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    let json = serde_json::to_string_pretty(rows).map_err(|e| Error::Format(format!("json: {e}")))?;
    fs::write(with_suffix(stem, ".json"), json)?;
    Ok(())
}

/// Writes the theoretical `R = 1 - H(D)` curve as `<stem>.csv`/`.json`.
pub fn write_bound_curve(stem: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        distortion: f64,
        rate: f64,
    }
    let rows: Vec<Row> = bound_curve(101)
        .into_iter()
        .map(|(distortion, rate)| Row { distortion, rate })
        .collect();
    write_records(&rows, stem)
}

impl SweepOutput {
    /// `<stem>.csv`, `<stem>.samples.csv`, `<stem>.bound.csv` and JSON
    /// mirrors of each.
    pub fn write(&self, stem: &Path) -> Result<()> {
        let with = |suffix: &str| with_suffix(stem, suffix);
        write_records(&self.summary, stem)?;
        write_records(&self.samples, &with(".samples"))?;
        write_bound_curve(&with(".bound"))?;
        let mut cfg = BTreeMap::new();
        cfg.insert("config", &self.config);
        let json = serde_json::to_string_pretty(&cfg).map_err(|e| Error::Format(format!("json: {e}")))?;
        fs::write(with(".config.json"), json)?;
        Ok(())
    }
}
