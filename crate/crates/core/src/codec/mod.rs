//! End-to-end compression of a binary block.
//!
//! Encoding maps the source to GF(2^p) symbols, runs RBP with a prior
//! centred on the source and keeps the information symbols of the codeword
//! found. Decoding fixes those symbols and replays the leaf-removal steps
//! backwards, solving one pivot per check.

mod bits;
mod stream;

pub use bits::{bits_to_symbols, distortion, pack_bits, symbols_to_bits, unpack_bits};
pub use stream::{BlockHeader, CompressedBlock, FLAG_EMBEDDED, FLAG_FALLBACK, HEADER_LEN, MAGIC, VERSION};

use crate::error::{Error, Result};
use crate::gf::{FieldTables, Symbol};
use crate::graph::{build_code, leaf_removal, PeelOrder, SparseCode};
use crate::msgpass::{run_rbp, Prior, RbpParams};

/// Prior `mu1_v(a) ∝ exp(-L * popcount(a XOR y_v))`.
pub fn build_prior(source: &[Symbol], strength: f64, p: u8) -> Result<Prior> {
    build_prior_masked(source, strength, p, None)
}

/// As [`build_prior`], counting only bit positions set in `masks[v]`; pad
/// bits carry no preference.
pub fn build_prior_masked(
    source: &[Symbol],
    strength: f64,
    p: u8,
    masks: Option<&[Symbol]>,
) -> Result<Prior> {
    if !(strength >= 0.0 && strength.is_finite()) {
        return Err(Error::Config(format!("prior strength L={strength} must be >= 0")));
    }
    let q = 1usize << p;
    let full = (q - 1) as Symbol;
    // Weights depend only on the Hamming distance.
    let weights: Vec<f64> = (0..=p).map(|k| (-strength * k as f64).exp()).collect();
    let mut values = Vec::with_capacity(source.len() * q);
    for (v, &y) in source.iter().enumerate() {
        if y as usize >= q {
            return Err(Error::Domain(format!("symbol {y} outside GF({q})")));
        }
        let mask = masks.map_or(full, |m| m[v]);
        let start = values.len();
        values.extend((0..q).map(|a| weights[((a as Symbol ^ y) & mask).count_ones() as usize]));
        crate::gf::normalize(&mut values[start..]);
    }
    Prior::new(q, values, strength)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodeParams {
    /// Prior strength `L`.
    pub strength: f64,
    pub rbp: RbpParams,
}

impl Default for EncodeParams {
    fn default() -> Self {
        Self {
            strength: 1.5,
            rbp: RbpParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodeOutcome {
    pub block: CompressedBlock,
    /// Reconstruction the decoder will produce.
    pub reconstruction: Vec<u8>,
    /// Normalized Hamming distance over the unpadded source bits.
    pub distortion: f64,
    pub iterations: usize,
    pub trials: usize,
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconstructedBlock {
    pub bits: Vec<u8>,
    /// Full codeword (including pad positions); `None` for fallback blocks.
    pub codeword: Option<Vec<Symbol>>,
}

/// A code paired with its field tables and leaf-removal order.
#[derive(Clone, Debug)]
pub struct Codec {
    code: SparseCode,
    tables: FieldTables,
    peel: PeelOrder,
    plan: DecodePlan,
    embed_matrix: bool,
}

/// Peel steps in decode order, flattened so back substitution is one
/// sequential pass. Step `t` solves `pivot[t] = inv[t] * sum coef * var`
/// over `start[t]..start[t + 1]`.
#[derive(Clone, Debug, Default)]
struct DecodePlan {
    pivot: Vec<u32>,
    inv: Vec<Symbol>,
    start: Vec<u32>,
    vars: Vec<u32>,
    coefs: Vec<Symbol>,
}

impl DecodePlan {
    fn new(code: &SparseCode, tables: &FieldTables, peel: &PeelOrder) -> Self {
        let mut plan = DecodePlan {
            start: vec![0],
            ..DecodePlan::default()
        };
        for step in peel.steps.iter().rev() {
            let mut pivot_coef = 0;
            for e in code.check_edges(step.check) {
                let v = code.edge_var(e);
                if v == step.pivot {
                    pivot_coef = code.edge_coef(e);
                } else {
                    plan.vars.push(v as u32);
                    plan.coefs.push(code.edge_coef(e));
                }
            }
            plan.pivot.push(step.pivot as u32);
            plan.inv.push(tables.inv_nonzero(pivot_coef));
            plan.start.push(plan.vars.len() as u32);
        }
        plan
    }
}

impl Codec {
    /// Fails unless leaf removal empties the code's core.
    pub fn new(code: SparseCode) -> Result<Self> {
        let tables = FieldTables::new(code.p())?;
        let peel = leaf_removal(&code);
        if !peel.is_complete() {
            return Err(Error::Config(format!(
                "code has a non-empty core of {} checks; information symbols are undefined (reduce it with b >= 1)",
                peel.core_size
            )));
        }
        let plan = DecodePlan::new(&code, &tables, &peel);
        Ok(Self {
            code,
            tables,
            peel,
            plan,
            embed_matrix: false,
        })
    }

    /// Write the check matrix into every block so decoders need not
    /// regenerate the code from its construction tuple.
    pub fn with_embedded_matrix(mut self, embed: bool) -> Self {
        self.embed_matrix = embed;
        self
    }

    /// Codec able to decode `block`: from its embedded matrix if present,
    /// otherwise by regenerating the code from the header tuple.
    pub fn for_block(block: &CompressedBlock) -> Result<Self> {
        let h = &block.header;
        let code = match &block.matrix {
            Some(rows) => SparseCode::from_checks(
                h.p,
                h.n_sym as usize,
                rows,
                h.m_sym as usize,
                h.b as usize,
                h.seed,
            )?,
            None => build_code(h.p, h.n_sym as usize, h.m_sym as usize, h.b as usize, h.seed)?,
        };
        Ok(Self::new(code)?.with_embedded_matrix(block.matrix.is_some()))
    }

    pub fn code(&self) -> &SparseCode {
        &self.code
    }

    pub fn tables(&self) -> &FieldTables {
        &self.tables
    }

    pub fn peel_order(&self) -> &PeelOrder {
        &self.peel
    }

    /// Payload size in bits: `|info_set| * p`.
    pub fn payload_bits(&self) -> usize {
        self.peel.info_set.len() * self.code.p() as usize
    }

    /// Source bits one block carries.
    pub fn block_bits(&self) -> usize {
        self.code.n_bits()
    }

    fn header(&self, pad_bits: usize) -> BlockHeader {
        BlockHeader {
            p: self.code.p(),
            n_sym: self.code.n_sym() as u32,
            m_sym: self.code.m_constructed() as u32,
            b: self.code.b() as u16,
            seed: self.code.seed(),
            poly: self.tables.poly(),
            pad_bits: pad_bits as u16,
        }
    }

    fn check_header(&self, h: &BlockHeader) -> Result<()> {
        let ours = self.header(h.pad_bits as usize);
        if ours != *h {
            return Err(Error::Mismatch(format!(
                "block was written for p={} n={} m={} b={} seed={} poly={:#x}, code is p={} n={} m={} b={} seed={} poly={:#x}",
                h.p, h.n_sym, h.m_sym, h.b, h.seed, h.poly,
                ours.p, ours.n_sym, ours.m_sym, ours.b, ours.seed, ours.poly
            )));
        }
        Ok(())
    }

    /// Encoder prior for a source of at most `block_bits()` bits; padding
    /// positions are unconstrained.
    pub fn source_prior(&self, bits: &[u8], strength: f64) -> Result<Prior> {
        let capacity = self.block_bits();
        if bits.len() > capacity {
            return Err(Error::Dimension(format!(
                "source has {} bits, block holds at most {capacity}",
                bits.len()
            )));
        }
        let p = self.code.p();
        let mut padded = bits.to_vec();
        padded.resize(capacity, 0);
        let (source, _) = bits_to_symbols(&padded, p);
        let real: Vec<u8> = (0..capacity).map(|i| u8::from(i < bits.len())).collect();
        let (masks, _) = bits_to_symbols(&real, p);
        build_prior_masked(&source, strength, p, Some(&masks))
    }

    /// Compresses up to `block_bits()` source bits (one 0/1 value per
    /// entry). Never fails on valid input: if RBP does not converge the
    /// block is emitted raw with the fallback flag set.
    pub fn encode(&self, bits: &[u8], params: &EncodeParams) -> Result<EncodeOutcome> {
        bits::validate_bits(bits)?;
        let capacity = self.block_bits();
        if bits.len() > capacity {
            return Err(Error::Dimension(format!(
                "source has {} bits, block holds at most {capacity}",
                bits.len()
            )));
        }
        let p = self.code.p();
        let pad = capacity - bits.len();
        if pad > u16::MAX as usize {
            return Err(Error::Dimension(format!("padding of {pad} bits exceeds u16")));
        }
        let prior = self.source_prior(bits, params.strength)?;

        let report = run_rbp(&self.code, &self.tables, &prior, &params.rbp)?;
        let header = self.header(pad);
        let matrix = self.embed_matrix.then(|| self.code.checks());
        let (iterations, trials) = (report.iterations, report.trials);
        match report.codeword {
            Some(word) => {
                let info: Vec<Symbol> = self.peel.info_set.iter().map(|&v| word[v]).collect();
                let payload = pack_bits(&symbols_to_bits(&info, p));
                let mut reconstruction = symbols_to_bits(&word, p);
                reconstruction.truncate(bits.len());
                Ok(EncodeOutcome {
                    distortion: distortion(bits, &reconstruction)?,
                    block: CompressedBlock {
                        header,
                        fallback: false,
                        matrix,
                        payload,
                    },
                    reconstruction,
                    iterations,
                    trials,
                    fallback: false,
                })
            }
            None => {
                log::info!("encoder fell back to raw mode after {trials} trials");
                Ok(EncodeOutcome {
                    block: CompressedBlock {
                        header,
                        fallback: true,
                        matrix,
                        payload: pack_bits(bits),
                    },
                    reconstruction: bits.to_vec(),
                    distortion: 0.0,
                    iterations,
                    trials,
                    fallback: true,
                })
            }
        }
    }

    /// Reconstructs a block by back substitution in O(edges).
    pub fn decode(&self, block: &CompressedBlock) -> Result<ReconstructedBlock> {
        self.check_header(&block.header)?;
        let n_out = block.header.source_bits();
        if block.fallback {
            if block.payload.len() != n_out.div_ceil(8) {
                return Err(Error::Format(format!(
                    "fallback payload has {} bytes, expected {}",
                    block.payload.len(),
                    n_out.div_ceil(8)
                )));
            }
            return Ok(ReconstructedBlock {
                bits: unpack_bits(&block.payload, n_out),
                codeword: None,
            });
        }
        let payload_bits = self.payload_bits();
        if block.payload.len() != payload_bits.div_ceil(8) {
            return Err(Error::Format(format!(
                "payload has {} bytes, expected {}",
                block.payload.len(),
                payload_bits.div_ceil(8)
            )));
        }
        let p = self.code.p();
        let (info, _) = bits_to_symbols(&unpack_bits(&block.payload, payload_bits), p);
        let word = self.complete(&info);
        let mut bits = symbols_to_bits(&word, p);
        bits.truncate(n_out);
        Ok(ReconstructedBlock {
            bits,
            codeword: Some(word),
        })
    }

    /// The unique codeword whose information symbols are `info`.
    pub fn complete(&self, info: &[Symbol]) -> Vec<Symbol> {
        let t = &self.tables;
        let plan = &self.plan;
        let mut word = vec![0 as Symbol; self.code.n_sym()];
        for (&v, &s) in self.peel.info_set.iter().zip(info) {
            word[v] = s;
        }
        for (i, w) in plan.start.windows(2).enumerate() {
            let (a, b) = (w[0] as usize, w[1] as usize);
            let mut acc = 0;
            for (&v, &h) in plan.vars[a..b].iter().zip(&plan.coefs[a..b]) {
                acc ^= t.mul(h, word[v as usize]);
            }
            word[plan.pivot[i] as usize] = t.mul(plan.inv[i], acc);
        }
        word
    }
}
