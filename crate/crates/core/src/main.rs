use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gfqc::analysis::{
    b_sweep, gamma_sweep, rate_sweep, wef_experiment, write_bound_curve, write_records, ExperimentConfig,
    SweepOutput,
};
use gfqc::codec::{pack_bits, unpack_bits, Codec, CompressedBlock, EncodeParams};
use gfqc::graph::{build_code, checks_for_rate, parse_code, symbols_for_bits, write_code, SparseCode};
use gfqc::msgpass::{run_rbp_with_schedule, CsvDiagnostics, RbpParams};
use gfqc::{Error, Result};

#[derive(Parser)]
#[command(name = "gfqc", version, about = "Lossy compression with sparse GF(2^p) codes")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code and write it to a file.
    GenCode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Compress one block of source bits.
    Compress(CompressArgs),
    /// Reconstruct the bits of a compressed block.
    Decompress(DecompressArgs),
    /// Rate sweep (one grid point per rate).
    RdSweep(SweepArgs),
    /// Sweep over gamma0.
    GammaSweep(SweepArgs),
    /// Sweep over the reduction depth b.
    BSweep(SweepArgs),
    /// Weight-enumerator curves from BP fixed points.
    Wef(SweepArgs),
}

#[derive(Args, Clone)]
struct CodeArgs {
    /// Bits per symbol (q = 2^p).
    #[arg(long, default_value_t = 6)]
    p: u8,
    /// Block length in binary digits.
    #[arg(long, default_value_t = 1600)]
    nbits: usize,
    #[arg(long, default_value_t = 0.33)]
    rate: f64,
    /// Checks removed after construction.
    #[arg(long, default_value_t = 5)]
    b: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl CodeArgs {
    fn build(&self) -> Result<SparseCode> {
        if !(1..=8).contains(&self.p) {
            return Err(Error::Config(format!("--p {} must be in 1..=8", self.p)));
        }
        let n = symbols_for_bits(self.nbits, self.p);
        build_code(self.p, n, checks_for_rate(n, self.rate)?, self.b, self.seed)
    }
}

#[derive(Args)]
struct CompressArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    /// Read a code file instead of building one from the code flags.
    #[arg(long)]
    code_file: Option<PathBuf>,
    #[command(flatten)]
    code: CodeArgs,
    /// Input is text of '0'/'1' characters rather than raw bytes.
    #[arg(long)]
    bits_text: bool,
    /// Store the parity-check matrix in the stream.
    #[arg(long)]
    embed_matrix: bool,
    /// Prior strength L.
    #[arg(long = "L", default_value_t = EncodeParams::default().strength)]
    strength: f64,
    #[arg(long, default_value_t = RbpParams::default().gamma0)]
    gamma0: f64,
    #[arg(long, default_value_t = RbpParams::default().gamma1)]
    gamma1: f64,
    #[arg(long, default_value_t = RbpParams::default().ell_max)]
    ell_max: usize,
    #[arg(long, default_value_t = RbpParams::default().t_max)]
    t_max: usize,
    #[arg(long, default_value_t = RbpParams::default().epsilon)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    schedule_seed: u64,
    /// Write per-sweep RBP statistics as CSV.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Args)]
struct DecompressArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    /// Code file; by default the code is rebuilt from the block header.
    #[arg(long)]
    code_file: Option<PathBuf>,
    /// Write text of '0'/'1' characters rather than raw bytes.
    #[arg(long)]
    bits_text: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    /// key = value experiment file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Extra key=value settings, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output path stem; overrides `output` in the config.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    master_seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Format of the summary printed to stdout.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl SweepArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        for kv in &self.sets {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set {kv}: expected KEY=VALUE")))?;
            cfg.set(k.trim(), v)?;
        }
        if let Some(o) = &self.output {
            cfg.output = Some(o.clone());
        }
        if let Some(s) = self.master_seed {
            cfg.master_seed = s;
        }
        if let Some(j) = self.jobs {
            cfg.jobs = j;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn read_bits(path: &Path, text: bool) -> Result<Vec<u8>> {
    if text {
        let s = fs::read_to_string(path)?;
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Format(format!("unexpected character {c:?} in bit text"))),
            })
            .collect()
    } else {
        let bytes = fs::read(path)?;
        Ok(unpack_bits(&bytes, bytes.len() * 8))
    }
}

fn write_bits(path: &Path, bits: &[u8], text: bool) -> Result<()> {
    if text {
        let mut s: String = bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
        s.push('\n');
        fs::write(path, s)?;
    } else {
        fs::write(path, pack_bits(bits))?;
    }
    Ok(())
}

fn load_code(path: &Path) -> Result<SparseCode> {
    parse_code(&fs::read_to_string(path)?)
}

fn gen_code(code: &CodeArgs, out: &Path) -> Result<()> {
    let c = code.build()?;
    fs::write(out, write_code(&c))?;
    let peel = gfqc::graph::leaf_removal(&c);
    let hist: Vec<String> = c
        .check_degree_histogram()
        .iter()
        .map(|(d, k)| format!("{d}:{k}"))
        .collect();
    println!("n_sym={} m_sym={} b={} rate={:.4}", c.n_sym(), c.m_sym(), c.b(), c.rate());
    println!("check_degrees {}", hist.join(" "));
    println!("core_size={} info_set={}", peel.core_size, peel.info_set.len());
    if peel.is_complete() {
        println!("core is empty");
    }
    Ok(())
}

/// Returns whether the fallback path was taken.
fn compress(a: &CompressArgs) -> Result<bool> {
    let code = match &a.code_file {
        Some(path) => load_code(path)?,
        None => a.code.build()?,
    };
    let codec = Codec::new(code)?.with_embedded_matrix(a.embed_matrix);
    let bits = read_bits(&a.input, a.bits_text)?;
    let params = EncodeParams {
        strength: a.strength,
        rbp: RbpParams {
            gamma0: a.gamma0,
            gamma1: a.gamma1,
            ell_max: a.ell_max,
            t_max: a.t_max,
            epsilon: a.epsilon,
            schedule_seed: a.schedule_seed,
            ..RbpParams::default()
        },
    };
    params.rbp.validate()?;
    let out = codec.encode(&bits, &params)?;
    fs::write(&a.output, out.block.to_bytes())?;

    if let Some(path) = &a.diagnostics {
        // Replays the encoder run with an observer attached.
        let prior = codec.source_prior(&bits, params.strength)?;
        let mut csv = CsvDiagnostics::new(fs::File::create(path)?);
        run_rbp_with_schedule(
            codec.code(),
            codec.tables(),
            &prior,
            &params.rbp,
            &|l| params.rbp.gamma(l),
            Some(&mut csv),
        )?;
        csv.finish()?.flush()?;
    }

    let rate = codec.payload_bits() as f64 / bits.len().max(1) as f64;
    println!(
        "bits={} rate={rate:.4} distortion={:.6} iterations={} trials={} fallback={}",
        bits.len(),
        out.distortion,
        out.iterations,
        out.trials,
        out.fallback
    );
    Ok(out.fallback)
}

fn decompress(a: &DecompressArgs) -> Result<bool> {
    let block = CompressedBlock::from_bytes(&fs::read(&a.input)?)?;
    let codec = match &a.code_file {
        Some(path) => Codec::new(load_code(path)?)?,
        None => Codec::for_block(&block)?,
    };
    let rec = codec.decode(&block)?;
    write_bits(&a.output, &rec.bits, a.bits_text)?;
    println!("bits={} fallback={}", rec.bits.len(), block.fallback);
    Ok(block.fallback)
}

fn print_rows<T: Serialize>(rows: &[T], format: Format) -> Result<()> {
    match format {
        Format::Json => {
            let s = serde_json::to_string_pretty(rows).map_err(|e| Error::Format(e.to_string()))?;
            println!("{s}");
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in rows {
                w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn sweep(a: &SweepArgs, default_stem: &str, run: fn(&ExperimentConfig) -> Result<SweepOutput>) -> Result<()> {
    let cfg = a.config()?;
    let stem = cfg.output.clone().unwrap_or_else(|| PathBuf::from(default_stem));
    let out = run(&cfg)?;
    out.write(&stem)?;
    print_rows(&out.summary, a.format)
}

fn wef(a: &SweepArgs) -> Result<()> {
    let cfg = a.config()?;
    let stem = cfg.output.clone().unwrap_or_else(|| PathBuf::from("wef"));
    let rows = wef_experiment(&cfg)?;
    write_records(&rows, &stem)?;
    let mut bound = stem.into_os_string();
    bound.push(".bound");
    write_bound_curve(Path::new(&bound))?;
    print_rows(&rows, a.format)
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.cmd {
        Command::GenCode { code, out } => gen_code(code, out).map(|_| false),
        Command::Compress(a) => compress(a),
        Command::Decompress(a) => decompress(a),
        Command::RdSweep(a) => sweep(a, "rd_sweep", rate_sweep).map(|_| false),
        Command::GammaSweep(a) => sweep(a, "gamma_sweep", gamma_sweep).map(|_| false),
        Command::BSweep(a) => sweep(a, "b_sweep", b_sweep).map(|_| false),
        Command::Wef(a) => wef(a).map(|_| false),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("GFQC_LOG")).init();
    match run(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("gfqc: {e}");
            ExitCode::FAILURE
        }
    }
}
