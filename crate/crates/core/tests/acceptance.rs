//! Acceptance checks. Runs as a plain binary so each check prints one
//! PASS/FAIL line; exits non-zero if any check fails.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::*;
use gfqc::analysis::{
    avg_distance, bethe_entropy, binary_entropy, gamma_sweep, rate_sweep, rd_bound, run_grid, wef_curve,
    wef_sweep, random_reference, ExperimentConfig, GridPoint,
};
use gfqc::codec::{
    build_prior, pack_bits, symbols_to_bits, Codec, CompressedBlock, EncodeParams, FLAG_EMBEDDED, FLAG_FALLBACK,
    HEADER_LEN,
};
use gfqc::gf::{wht_in_place, FieldTables};
use gfqc::graph::{build_code, checks_for_rate, leaf_removal, symbols_for_bits, SparseCode};
use gfqc::msgpass::{
    check_update_with, run_bp_fixed_point, BpParams, CheckScratch, Diagnostics, MessageState, Prior,
    ProductStrategy, RbpParams,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_prob(rng: &mut ChaCha8Rng, q: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..q).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn field_and_transform() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for p in [1u8, 2, 3, 4, 6] {
        let t = FieldTables::new(p).unwrap();
        let q = t.q();
        for a in 0..q as u8 {
            if t.mul(a, 1) != a || t.add(a, 0) != a || t.add(a, a) != 0 {
                bad.push(format!("identity p={p} a={a}"));
            }
            if a != 0 && t.mul(a, t.inv(a).unwrap()) != 1 {
                bad.push(format!("inverse p={p} a={a}"));
            }
            for b in 0..q as u8 {
                if t.mul(a, b) != poly_mul(a, b, p) || t.mul(a, b) != t.mul(b, a) {
                    bad.push(format!("mul p={p} {a}*{b}"));
                }
                for c in 0..q as u8 {
                    if t.mul(t.mul(a, b), c) != t.mul(a, t.mul(b, c))
                        || t.mul(a, t.add(b, c)) != t.add(t.mul(a, b), t.mul(a, c))
                    {
                        bad.push(format!("assoc/distrib p={p} {a},{b},{c}"));
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let q = 1usize << rng.random_range(1..=8);
        let u = random_prob(&mut rng, q);
        let v = random_prob(&mut rng, q);
        let want = xor_convolve(&u, &v);
        let (mut fu, mut fv) = (u.clone(), v.clone());
        wht_in_place(&mut fu);
        wht_in_place(&mut fv);
        let mut prod: Vec<f64> = fu.iter().zip(&fv).map(|(a, b)| a * b).collect();
        wht_in_place(&mut prod);
        for (x, w) in prod.iter().zip(&want) {
            worst = worst.max((x / q as f64 - w).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && worst <= 1e-10 && secs < 10.0,
        format!(
            "axiom violations={} worst convolution error={worst:.2e} (tol 1e-10) time={secs:.2}s (limit 10s)",
            bad.len()
        ),
    )
}

fn bp_tree_exactness() -> Outcome {
    let start = Instant::now();
    let t = FieldTables::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut e_marg, mut e_dist, mut e_ent) = (0.0f64, 0.0f64, 0.0f64);
    let mut unconverged = 0;
    for _ in 0..50 {
        let n = rng.random_range(2..=10);
        let code = random_tree_code(&mut rng, 2, n);
        let y: Vec<u8> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let strength = rng.random_range(0.0..3.0);
        let prior = build_prior(&y, strength, 2).unwrap();
        let prior_rows: Vec<Vec<f64>> = (0..n).map(|v| prior.var(v).to_vec()).collect();
        let exact = exact_measure(&code, &prior_rows, &y);
        let params = BpParams {
            damping: 0.0,
            epsilon: 1e-15,
            ell_max: 200,
            ..BpParams::default()
        };
        let fp = run_bp_fixed_point(&code, &t, &prior, &params).unwrap();
        if !fp.converged {
            unconverged += 1;
        }
        for v in 0..n {
            for a in 0..4 {
                e_marg = e_marg.max((fp.state.marginal(v)[a] - exact.marginals[v][a]).abs());
            }
        }
        e_dist = e_dist.max((avg_distance(&fp.state, &y, 2) - exact.avg_distance).abs());
        let s = bethe_entropy(&fp.state, &code, &prior, &t).unwrap();
        e_ent = e_ent.max((s.nats - exact.entropy).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        e_marg <= 1e-8 && e_dist <= 1e-8 && e_ent <= 1e-8 && unconverged == 0 && secs < 30.0,
        format!(
            "50 trees: marginal err={e_marg:.1e} distance err={e_dist:.1e} entropy err={e_ent:.1e} (tol 1e-8) unconverged={unconverged} time={secs:.2}s (limit 30s)"
        ),
    )
}

fn brute_message(p: u8, coefs: &[u8], incoming: &[Vec<f64>], target: usize) -> Vec<f64> {
    let q = 1usize << p;
    let mut out = vec![0.0; q];
    for_each_word(coefs.len(), q, |w| {
        let s = w.iter().zip(coefs).fold(0u8, |acc, (&c, &h)| acc ^ poly_mul(h, c, p));
        if s == 0 {
            let weight: f64 = (0..coefs.len()).filter(|&i| i != target).map(|i| incoming[i][w[i] as usize]).product();
            out[w[target] as usize] += weight;
        }
    });
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= z);
    out
}

fn check_update_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let p = rng.random_range(1..=4u8);
        let q = 1usize << p;
        let d = rng.random_range(2..=4);
        let coefs: Vec<u8> = (0..d).map(|_| rng.random_range(1..q) as u8).collect();
        let incoming: Vec<Vec<f64>> = (0..d).map(|_| random_prob(&mut rng, q)).collect();
        let row: Vec<(usize, u8)> = coefs.iter().copied().enumerate().collect();
        let code = SparseCode::from_checks(p, d, &[row], 1, 0, 0).unwrap();
        let t = FieldTables::new(p).unwrap();
        let mut st = MessageState::new(&code, &Prior::uniform(d, q)).unwrap();
        for (e, m) in incoming.iter().enumerate() {
            st.var_to_check_mut(e).copy_from_slice(m);
        }
        check_update_with(
            &code,
            &t,
            &mut st,
            0,
            ProductStrategy::PrefixSuffix,
            0.0,
            &mut CheckScratch::new(q),
            &mut Diagnostics::default(),
        );
        for target in 0..d {
            let want = brute_message(p, &coefs, &incoming, target);
            for a in 0..q {
                worst = worst.max((st.check_to_var(target)[a] - want[a]).abs());
            }
        }
    }
    outcome(worst <= 1e-10, format!("500 cases, worst error={worst:.2e} (tol 1e-10)"))
}

fn structure_claims() -> Outcome {
    let mut incomplete = 0;
    let mut unreduced = 0;
    for (p, n) in [(1u8, 60usize), (2, 120), (6, 267), (4, 1000)] {
        for rate in [0.33, 0.5, 0.7] {
            for seed in 0..5 {
                let m = checks_for_rate(n, rate).unwrap();
                let peel = leaf_removal(&build_code(p, n, m, 0, seed).unwrap());
                unreduced += 1;
                if peel.core_size != m {
                    incomplete += 1;
                }
            }
        }
    }

    let mut empty = Vec::new();
    for (n, b) in [(267usize, 1usize), (267, 5), (500, 1)] {
        let m = checks_for_rate(n, 0.33).unwrap();
        let count = (0..100u64)
            .into_par_iter()
            .filter(|&seed| leaf_removal(&build_code(6, n, m, b, seed).unwrap()).is_complete())
            .count();
        empty.push((n, b, count));
    }

    let mut factors = Vec::new();
    for (n, seed) in [(6usize, 1u64), (6, 2), (8, 3), (8, 4), (8, 5), (10, 6), (10, 7), (10, 8)] {
        let full = build_code(2, n, n / 2, 0, seed).unwrap();
        let reduced = build_code(2, n, n / 2, 1, seed).unwrap();
        let (a, b) = (count_codewords(&full), count_codewords(&reduced));
        factors.push(if b % a == 0 { b / a } else { 0 });
    }
    // Binary codes: every variable sits in two checks with coefficient one,
    // so the rows of a connected code sum to zero and removing one leaves
    // the code unchanged. Reported, not gated.
    let bin = build_code(1, 10, 5, 0, 1).unwrap();
    let bin_factor = count_codewords(&build_code(1, 10, 5, 1, 1).unwrap()) / count_codewords(&bin);

    let pass = incomplete == 0 && empty.iter().all(|&(_, _, c)| c >= 95) && factors.iter().all(|&f| f == 4);
    outcome(
        pass,
        format!(
            "unreduced complete cores {}/{unreduced}; empty cores after reduction {:?} (need >=95/100); GF(4) count factors {:?} (need 4); GF(2) factor {bin_factor} (informational)",
            unreduced - incomplete,
            empty.iter().map(|(n, b, c)| format!("n={n},b={b}:{c}")).collect::<Vec<_>>(),
            factors
        ),
    )
}

fn time_decode(codec: &Codec, block: &CompressedBlock, reps: usize) -> Duration {
    let t = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(codec.decode(std::hint::black_box(block)).unwrap());
    }
    t.elapsed()
}

fn info_block(codec: &Codec, rng: &mut ChaCha8Rng) -> (CompressedBlock, Vec<u8>) {
    let p = codec.code().p();
    let q = codec.code().q();
    let info: Vec<u8> = (0..codec.peel_order().info_set.len()).map(|_| rng.random_range(0..q) as u8).collect();
    // Borrow a valid header from a quick encode, then swap in our payload.
    let params = EncodeParams {
        rbp: RbpParams {
            ell_max: 1,
            t_max: 1,
            ..RbpParams::default()
        },
        ..EncodeParams::default()
    };
    let bits = vec![0u8; codec.block_bits()];
    let mut block = codec.encode(&bits, &params).unwrap().block;
    block.fallback = false;
    block.payload = pack_bits(&symbols_to_bits(&info, p));
    (block, info)
}

fn decoder() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut mismatches = 0;
    let mut tried = 0;
    let mut done = 0;
    while done < 100 {
        tried += 1;
        let p = rng.random_range(1..=4u8);
        let n = rng.random_range(12..=60);
        let m = checks_for_rate(n, rng.random_range(0.3..0.7)).unwrap();
        let b = rng.random_range(1..=3);
        let Ok(codec) = Codec::new(build_code(p, n, m, b, tried).unwrap()) else {
            continue;
        };
        let (block, info) = info_block(&codec, &mut rng);
        let decoded = codec.decode(&block).unwrap().codeword.unwrap();
        let mut fixed = vec![None; n];
        for (&v, &s) in codec.peel_order().info_set.iter().zip(&info) {
            fixed[v] = Some(s);
        }
        if gauss_unique(codec.code(), &fixed).as_deref() != Some(&decoded[..]) {
            mismatches += 1;
        }
        done += 1;
    }

    let small = Codec::new(build_code(6, 4000, 2000, 5, 1).unwrap()).unwrap();
    let large = Codec::new(build_code(6, 8000, 4000, 5, 1).unwrap()).unwrap();
    let (bs, _) = info_block(&small, &mut rng);
    let (bl, _) = info_block(&large, &mut rng);
    time_decode(&small, &bs, 200);
    time_decode(&large, &bl, 100);
    let (mut ts, mut tl) = (Duration::MAX, Duration::MAX);
    // Interleaved so frequency drift hits both sizes alike.
    for _ in 0..100 {
        ts = ts.min(time_decode(&small, &bs, 10));
        tl = tl.min(time_decode(&large, &bl, 10));
    }
    let ratio = tl.as_secs_f64() / ts.as_secs_f64();
    outcome(
        mismatches == 0 && ratio <= 2.2,
        format!(
            "100 instances ({tried} codes tried), oracle mismatches={mismatches}; decode time n=4000: {:?}, n=8000: {:?}, ratio={ratio:.2} (limit 2.2)",
            ts / 10,
            tl / 10
        ),
    )
}

fn benchmark_config() -> ExperimentConfig {
    ExperimentConfig::parse(
        "p = 6\nnbits = 1600\nrate = 0.33\nb = 5\ncode_seed = 1\nL = 1.5\ngamma0 = 0.92\ngamma1 = 1\nell_max = 300\nt_max = 5\nmaster_seed = 2024\n",
    )
    .unwrap()
}

fn benchmark_distortion() -> Outcome {
    let mut cfg = benchmark_config();
    cfg.samples = 50;
    let out = run_grid(
        &cfg,
        &[GridPoint {
            p: 6,
            nbits: 1600,
            rate: 0.33,
            b: 5,
            strength: 1.5,
            gamma0: 0.92,
        }],
    )
    .unwrap();
    let r = &out.summary[0];
    outcome(
        r.distortion <= 0.195 && r.mean_iters <= 150.0 && r.failure_rate <= 0.10,
        format!(
            "D={:.4} (limit 0.195, bound {:.4}) iterations={:.1} (limit 150) failures={:.0}% (limit 10%) code rate={:.4}",
            r.distortion,
            rd_bound(0.33).unwrap(),
            r.mean_iters,
            100.0 * r.failure_rate,
            r.rate
        ),
    )
}

fn gamma_trend() -> Outcome {
    let mut cfg = benchmark_config();
    cfg.samples = 20;
    cfg.gamma0_grid = vec![0.88, 0.92, 0.96];
    let out = gamma_sweep(&cfg).unwrap();
    let d: Vec<f64> = out.summary.iter().map(|r| r.distortion).collect();
    let it: Vec<f64> = out.summary.iter().map(|r| r.mean_iters).collect();
    let pass = d.windows(2).all(|w| w[1] <= w[0]) && it.windows(2).all(|w| w[1] >= w[0]);
    outcome(
        pass,
        format!(
            "gamma0 0.88/0.92/0.96: D={:.4}/{:.4}/{:.4} iterations={:.1}/{:.1}/{:.1}",
            d[0], d[1], d[2], it[0], it[1], it[2]
        ),
    )
}

fn rate_spot_checks() -> Outcome {
    let mut cfg = ExperimentConfig::parse("p = 6\nnbits = 12000\nb = 5\nmaster_seed = 7\nsamples = 6\n").unwrap();
    cfg.rate_grid = vec![0.5, 0.7];
    cfg.strength_grid = vec![1.9, 2.4];
    cfg.gamma0_grid = vec![0.92, 0.90];
    let out = rate_sweep(&cfg).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for r in &out.summary {
        let limit = r.d_star + 0.03;
        pass &= r.distortion <= limit && r.failure_rate < 1.0;
        parts.push(format!(
            "R={:.4}: D={:.4} (limit {limit:.4}) fail={:.0}%",
            r.rate,
            r.distortion,
            100.0 * r.failure_rate
        ));
    }
    outcome(pass, parts.join("; "))
}

fn wef_endpoints() -> Outcome {
    let p = 6;
    let n = symbols_for_bits(12000, p);
    let code = build_code(p, n, checks_for_rate(n, 0.5).unwrap(), 0, 3).unwrap();
    let t = FieldTables::new(p).unwrap();
    let y = random_reference(n, p, 99);
    let grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
    let pts = wef_sweep(&code, &t, &y, &grid, &BpParams::default()).unwrap();
    let rate = code.rate();
    let zero = pts[0];
    let end_ok = (zero.avg_distance - 0.5).abs() <= 0.01 && (zero.entropy_density - rate).abs() <= 0.005;
    // A code with 2^{nR} words spread like a random code has
    // s(D) = R - (1 - H(D)) at distance D.
    let curve = wef_curve(&pts);
    let closest = curve
        .iter()
        .filter(|pt| pt.strength > 0.0)
        .map(|pt| ((rate - pt.entropy_density) - (1.0 - binary_entropy(pt.avg_distance))).abs())
        .fold(f64::INFINITY, f64::min);
    let worst_on_curve = curve
        .iter()
        .map(|pt| ((rate - pt.entropy_density) - (1.0 - binary_entropy(pt.avg_distance))).abs())
        .fold(0.0, f64::max);
    outcome(
        end_ok && closest <= 0.02,
        format!(
            "L=0: D={:.4} s={:.4} (R={rate:.4}); q=64 closest gap to 1-H(D)={closest:.4} (limit 0.02), largest gap on {} converged points={worst_on_curve:.4}",
            zero.avg_distance,
            zero.entropy_density,
            curve.len()
        ),
    )
}

fn expected_bytes(block: &CompressedBlock) -> Vec<u8> {
    let h = &block.header;
    let mut v = b"GFQC".to_vec();
    v.push(1);
    v.push(h.p);
    v.extend(h.n_sym.to_be_bytes());
    v.extend(h.m_sym.to_be_bytes());
    v.extend(h.b.to_be_bytes());
    v.extend(h.seed.to_be_bytes());
    v.extend(h.poly.to_be_bytes());
    v.extend(h.pad_bits.to_be_bytes());
    let mut flags = 0u8;
    if block.fallback {
        flags |= 1;
    }
    if block.matrix.is_some() {
        flags |= 2;
    }
    v.push(flags);
    if let Some(rows) = &block.matrix {
        v.extend((rows.len() as u32).to_be_bytes());
        for r in rows {
            v.extend((r.len() as u16).to_be_bytes());
            for &(var, h) in r {
                v.extend((var as u32).to_be_bytes());
                v.push(h);
            }
        }
    }
    v.extend(&block.payload);
    v
}

fn totality_and_format() -> Outcome {
    let codecs: Vec<Codec> = [(1u8, 40usize, 1u64), (2, 24, 2), (3, 20, 3), (4, 16, 4), (6, 12, 5), (8, 8, 6)]
        .iter()
        .map(|&(p, n, seed)| Codec::new(build_code(p, n, n / 2, 1, seed).unwrap()).unwrap())
        .collect();
    let results: Vec<(bool, bool, String)> = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(1_000_000 + i);
            let codec = &codecs[(i % codecs.len() as u64) as usize];
            let embed = i % 7 == 0;
            let codec = if embed { codec.clone().with_embedded_matrix(true) } else { codec.clone() };
            let len = rng.random_range(1..=codec.block_bits());
            let bits: Vec<u8> = (0..len).map(|_| rng.random_range(0..2)).collect();
            let params = EncodeParams {
                strength: 2.5,
                rbp: RbpParams {
                    gamma0: 0.85,
                    ell_max: 40,
                    t_max: 2,
                    schedule_seed: i,
                    ..RbpParams::default()
                },
            };
            let out = codec.encode(&bits, &params).unwrap();
            let bytes = out.block.to_bytes();
            let h = &out.block.header;
            let mut errs = Vec::new();
            if bytes != expected_bytes(&out.block) {
                errs.push("layout");
            }
            if bytes.len() < HEADER_LEN
                || (bytes[HEADER_LEN - 1] & FLAG_FALLBACK != 0) != out.fallback
                || (bytes[HEADER_LEN - 1] & FLAG_EMBEDDED != 0) != embed
            {
                errs.push("flags");
            }
            let code = codec.code();
            if h.p != code.p()
                || h.n_sym as usize != code.n_sym()
                || h.m_sym as usize != code.m_constructed()
                || h.b as usize != code.b()
                || h.seed != code.seed()
                || h.poly != POLYS[code.p() as usize]
                || h.pad_bits as usize != codec.block_bits() - len
            {
                errs.push("header");
            }
            let payload_len = if out.fallback { len.div_ceil(8) } else { codec.payload_bits().div_ceil(8) };
            if out.block.payload.len() != payload_len {
                errs.push("payload length");
            }
            let parsed = CompressedBlock::from_bytes(&bytes).unwrap();
            if parsed != out.block {
                errs.push("parse");
            }
            let dec = Codec::for_block(&parsed).unwrap().decode(&parsed).unwrap();
            if dec.bits.len() != len || dec.bits != out.reconstruction {
                errs.push("roundtrip");
            }
            if out.fallback && dec.bits != bits {
                errs.push("fallback exactness");
            }
            if let Some(w) = &dec.codeword {
                if !is_codeword(code, w) {
                    errs.push("parity");
                }
            }
            (errs.is_empty(), out.fallback, errs.join(","))
        })
        .collect();
    let failures: Vec<&String> = results.iter().filter(|r| !r.0).map(|r| &r.2).collect();
    let fallbacks = results.iter().filter(|r| r.1).count();
    outcome(
        failures.is_empty(),
        format!(
            "10000 blocks, {} failed{}; {fallbacks} used the fallback path",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 10] = [
        ("field arithmetic and transform", field_and_transform),
        ("BP exact on trees", bp_tree_exactness),
        ("check update vs enumeration", check_update_oracle),
        ("core and reduction structure", structure_claims),
        ("back-substitution decoder", decoder),
        ("benchmark code distortion", benchmark_distortion),
        ("gamma0 trend", gamma_trend),
        ("rate spot checks", rate_spot_checks),
        ("WEF endpoints", wef_endpoints),
        ("stream totality and layout", totality_and_format),
    ];
    let mut failed = 0;
    for (i, (name, run)) in checks.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
