//! Lossy compression of binary symmetric sources with reduced ultra-sparse
//! LDPC codes over GF(2^p).
//!
//! The pipeline: a PEG-built code whose variables all have degree two is
//! reduced by deleting a few checks, which empties its leaf-removal core.
//! Encoding runs reinforced belief propagation with a prior centred on the
//! source to find a nearby codeword and keeps only its information symbols.
//! Decoding replays the leaf-removal order backwards.

pub mod analysis;
pub mod codec;
pub mod error;
pub mod gf;
pub mod graph;
pub mod msgpass;

pub use error::{Error, Result};
