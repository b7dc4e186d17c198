use crate::error::{Error, Result};
use crate::gf::Symbol;

/// Groups bits MSB-first into `p`-bit symbols, zero-padding the tail.
/// Returns the symbols and the number of pad bits appended.
pub fn bits_to_symbols(bits: &[u8], p: u8) -> (Vec<Symbol>, usize) {
    let p = p as usize;
    let n_sym = bits.len().div_ceil(p);
    let pad = n_sym * p - bits.len();
    let symbols = (0..n_sym)
        .map(|i| {
            (0..p).fold(0 as Symbol, |acc, j| {
                let bit = bits.get(i * p + j).copied().unwrap_or(0);
                (acc << 1) | (bit & 1)
            })
        })
        .collect();
    (symbols, pad)
}

/// Inverse of [`bits_to_symbols`]; returns `symbols.len() * p` bits.
pub fn symbols_to_bits(symbols: &[Symbol], p: u8) -> Vec<u8> {
    let mut bits = Vec::with_capacity(symbols.len() * p as usize);
    for &s in symbols {
        for j in (0..p).rev() {
            bits.push((s >> j) & 1);
        }
    }
    bits
}

/// Packs 0/1 values MSB-first into bytes; the last byte is zero-filled.
pub fn pack_bits(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 8] |= (b & 1) << (7 - i % 8);
    }
    out
}

/// Unpacks the first `n_bits` bits of `bytes`, MSB-first.
pub fn unpack_bits(bytes: &[u8], n_bits: usize) -> Vec<u8> {
    (0..n_bits).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect()
}

pub(crate) fn validate_bits(bits: &[u8]) -> Result<()> {
    if let Some(i) = bits.iter().position(|&b| b > 1) {
        return Err(Error::Domain(format!("source entry {i} is not a binary digit")));
    }
    Ok(())
}

/// Normalized Hamming distance between two binary vectors.
pub fn distortion(y: &[u8], y_hat: &[u8]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::Dimension(format!(
            "cannot compare {} bits with {} bits",
            y.len(),
            y_hat.len()
        )));
    }
    if y.is_empty() {
        return Ok(0.0);
    }
    let diff = y.iter().zip(y_hat).filter(|(a, b)| a != b).count();
    Ok(diff as f64 / y.len() as f64)
}
