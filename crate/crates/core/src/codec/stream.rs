//! Byte layout of a compressed block (all integers big-endian):
//!
//! ```text
//! "GFQC" | u8 version=1 | u8 p | u32 n_sym | u32 m_sym | u16 b | u64 seed
//!        | u16 poly | u16 pad_bits | u8 flags | [matrix] | payload
//! ```
//!
//! `flags` bit 0 marks a raw fallback block, bit 1 an embedded matrix.
//! The embedded matrix is `u32 rows` followed by, per row, `u16 degree` and
//! `degree` pairs of `u32 variable, u8 coefficient`. The payload is packed
//! MSB-first and zero-filled to a byte boundary.

use crate::error::{Error, Result};
use crate::gf::Symbol;

pub const MAGIC: [u8; 4] = *b"GFQC";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 29;
pub const FLAG_FALLBACK: u8 = 0b01;
pub const FLAG_EMBEDDED: u8 = 0b10;

/// Code identity and padding carried in front of every payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockHeader {
    pub p: u8,
    pub n_sym: u32,
    /// Checks before reduction.
    pub m_sym: u32,
    pub b: u16,
    pub seed: u64,
    pub poly: u16,
    pub pad_bits: u16,
}

impl BlockHeader {
    /// Number of source bits the block represents.
    pub fn source_bits(&self) -> usize {
        self.n_sym as usize * self.p as usize - self.pad_bits as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedBlock {
    pub header: BlockHeader,
    /// Raw passthrough: the payload is the source itself.
    pub fallback: bool,
    pub matrix: Option<Vec<Vec<(usize, Symbol)>>>,
    /// Packed payload bytes.
    pub payload: Vec<u8>,
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Format(format!(
                "stream truncated at byte {} (needed {n} more)",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }
}

impl CompressedBlock {
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(h.p);
        out.extend_from_slice(&h.n_sym.to_be_bytes());
        out.extend_from_slice(&h.m_sym.to_be_bytes());
        out.extend_from_slice(&h.b.to_be_bytes());
        out.extend_from_slice(&h.seed.to_be_bytes());
        out.extend_from_slice(&h.poly.to_be_bytes());
        out.extend_from_slice(&h.pad_bits.to_be_bytes());
        let mut flags = 0;
        if self.fallback {
            flags |= FLAG_FALLBACK;
        }
        if self.matrix.is_some() {
            flags |= FLAG_EMBEDDED;
        }
        out.push(flags);
        if let Some(rows) = &self.matrix {
            out.extend_from_slice(&(rows.len() as u32).to_be_bytes());
            for row in rows {
                out.extend_from_slice(&(row.len() as u16).to_be_bytes());
                for &(v, h) in row {
                    out.extend_from_slice(&(v as u32).to_be_bytes());
                    out.push(h);
                }
            }
        }
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("missing GFQC magic".into()));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported stream version {version}")));
        }
        let header = BlockHeader {
            p: r.u8()?,
            n_sym: r.u32()?,
            m_sym: r.u32()?,
            b: r.u16()?,
            seed: r.u64()?,
            poly: r.u16()?,
            pad_bits: r.u16()?,
        };
        if !(1..=8).contains(&header.p) {
            return Err(Error::Format(format!("invalid p={}", header.p)));
        }
        if header.pad_bits as usize > header.n_sym as usize * header.p as usize {
            return Err(Error::Format("pad exceeds block length".into()));
        }
        let flags = r.u8()?;
        if flags & !(FLAG_FALLBACK | FLAG_EMBEDDED) != 0 {
            return Err(Error::Format(format!("unknown flag bits {flags:#04x}")));
        }
        let matrix = if flags & FLAG_EMBEDDED != 0 {
            let rows = r.u32()? as usize;
            let mut m = Vec::with_capacity(rows.min(1 << 20));
            for _ in 0..rows {
                let d = r.u16()? as usize;
                let mut row = Vec::with_capacity(d);
                for _ in 0..d {
                    let v = r.u32()? as usize;
                    row.push((v, r.u8()?));
                }
                m.push(row);
            }
            Some(m)
        } else {
            None
        };
        Ok(Self {
            header,
            fallback: flags & FLAG_FALLBACK != 0,
            matrix,
            payload: bytes[r.pos..].to_vec(),
        })
    }
}
