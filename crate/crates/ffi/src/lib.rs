//! C ABI for the gfqc codec.
//!
//! Every fallible function returns a [`GfqcStatus`]; on failure a message is
//! available from [`gfqc_last_error`] on the same thread. Buffers handed out
//! by the library are released with [`gfqc_buffer_free`], codecs with
//! [`gfqc_codec_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gfqc::codec::{pack_bits, unpack_bits, Codec, CompressedBlock, EncodeParams};
use gfqc::graph::{build_code, checks_for_rate, parse_code, symbols_for_bits};
use gfqc::msgpass::RbpParams;
use gfqc::Error;

/// Result of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GfqcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Construction = 3,
    Dimension = 4,
    Format = 5,
    Mismatch = 6,
    Io = 7,
    Panic = 8,
}

/// Opaque codec handle.
pub struct GfqcCodec {
    inner: Codec,
}

/// Bytes owned by the library.
#[repr(C)]
#[derive(Debug)]
pub struct GfqcBuffer {
    pub data: *mut u8,
    pub len: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GfqcCodecInfo {
    pub p: u8,
    pub q: u32,
    pub n_sym: usize,
    /// Checks before reduction.
    pub m_sym: usize,
    pub b: usize,
    pub seed: u64,
    /// Source bits per block.
    pub block_bits: usize,
    /// Compressed payload bits per block.
    pub payload_bits: usize,
    pub rate: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GfqcEncodeParams {
    /// Prior strength L.
    pub strength: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub ell_max: usize,
    pub t_max: usize,
    pub epsilon: f64,
    pub schedule_seed: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GfqcEncodeReport {
    pub distortion: f64,
    pub iterations: usize,
    pub trials: usize,
    /// Nonzero when the block was stored raw.
    pub fallback: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GfqcStatus {
    match e {
        Error::Config(_) | Error::Domain(_) => GfqcStatus::InvalidArgument,
        Error::Construction(_) => GfqcStatus::Construction,
        Error::Dimension(_) => GfqcStatus::Dimension,
        Error::Format(_) => GfqcStatus::Format,
        Error::Mismatch(_) => GfqcStatus::Mismatch,
        Error::Io(_) => GfqcStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), GfqcStatus>) -> GfqcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GfqcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            GfqcStatus::Panic
        }
    }
}

fn fail(e: Error) -> GfqcStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> GfqcStatus {
    set_error(&format!("{what} is null"));
    GfqcStatus::NullPointer
}

fn into_buffer(v: Vec<u8>) -> GfqcBuffer {
    let mut b = v.into_boxed_slice();
    let buf = GfqcBuffer {
        data: b.as_mut_ptr(),
        len: b.len(),
    };
    std::mem::forget(b);
    buf
}

/// Message for the last failed call on this thread. Valid until the next
/// call into the library from the same thread.
#[no_mangle]
pub extern "C" fn gfqc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gfqc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a code from its construction tuple.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn gfqc_codec_new(
    p: u8,
    nbits: usize,
    rate: f64,
    b: usize,
    seed: u64,
    out: *mut *mut GfqcCodec,
) -> GfqcStatus {
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        if !(1..=8).contains(&p) {
            return Err(fail(Error::Config(format!("p={p} outside 1..=8"))));
        }
        let n = symbols_for_bits(nbits, p);
        let code = checks_for_rate(n, rate)
            .and_then(|m| build_code(p, n, m, b, seed))
            .and_then(Codec::new)
            .map_err(fail)?;
        *out = Box::into_raw(Box::new(GfqcCodec { inner: code }));
        Ok(())
    })
}

/// Reads a code file written by `gfqc gen-code`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn gfqc_codec_from_file(path: *const c_char, out: *mut *mut GfqcCodec) -> GfqcStatus {
    if path.is_null() {
        return null("path");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(Error::Config("path is not UTF-8".into())))?;
        let text = std::fs::read_to_string(path).map_err(|e| fail(e.into()))?;
        let codec = parse_code(&text).and_then(Codec::new).map_err(fail)?;
        *out = Box::into_raw(Box::new(GfqcCodec { inner: codec }));
        Ok(())
    })
}

/// # Safety
/// `codec` must come from a `gfqc_codec_*` constructor and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gfqc_codec_free(codec: *mut GfqcCodec) {
    if !codec.is_null() {
        drop(Box::from_raw(codec));
    }
}

/// # Safety
/// `codec` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gfqc_codec_info(codec: *const GfqcCodec, out: *mut GfqcCodecInfo) -> GfqcStatus {
    if codec.is_null() {
        return null("codec");
    }
    if out.is_null() {
        return null("out");
    }
    let c = &(*codec).inner;
    let code = c.code();
    *out = GfqcCodecInfo {
        p: code.p(),
        q: code.q() as u32,
        n_sym: code.n_sym(),
        m_sym: code.m_constructed(),
        b: code.b(),
        seed: code.seed(),
        block_bits: c.block_bits(),
        payload_bits: c.payload_bits(),
        rate: code.rate(),
    };
    GfqcStatus::Ok
}

/// Default encoder settings.
#[no_mangle]
pub extern "C" fn gfqc_encode_params_default() -> GfqcEncodeParams {
    let d = EncodeParams::default();
    GfqcEncodeParams {
        strength: d.strength,
        gamma0: d.rbp.gamma0,
        gamma1: d.rbp.gamma1,
        ell_max: d.rbp.ell_max,
        t_max: d.rbp.t_max,
        epsilon: d.rbp.epsilon,
        schedule_seed: d.rbp.schedule_seed,
    }
}

/// Compresses `n_bits` source bits packed MSB-first in `bits`. On success
/// `out` holds the block stream. `params` and `report` may be null.
///
/// # Safety
/// `bits` must point to `ceil(n_bits / 8)` readable bytes; `out` and a
/// non-null `report` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gfqc_compress(
    codec: *const GfqcCodec,
    bits: *const u8,
    n_bits: usize,
    params: *const GfqcEncodeParams,
    out: *mut GfqcBuffer,
    report: *mut GfqcEncodeReport,
) -> GfqcStatus {
    if codec.is_null() {
        return null("codec");
    }
    if bits.is_null() && n_bits > 0 {
        return null("bits");
    }
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let c = &(*codec).inner;
        let packed: &[u8] = if n_bits == 0 {
            &[]
        } else {
            std::slice::from_raw_parts(bits, n_bits.div_ceil(8))
        };
        let source = unpack_bits(packed, n_bits);
        let prm = if params.is_null() { gfqc_encode_params_default() } else { *params };
        let enc = EncodeParams {
            strength: prm.strength,
            rbp: RbpParams {
                gamma0: prm.gamma0,
                gamma1: prm.gamma1,
                ell_max: prm.ell_max,
                t_max: prm.t_max,
                epsilon: prm.epsilon,
                schedule_seed: prm.schedule_seed,
                ..RbpParams::default()
            },
        };
        let result = c.encode(&source, &enc).map_err(fail)?;
        if !report.is_null() {
            *report = GfqcEncodeReport {
                distortion: result.distortion,
                iterations: result.iterations,
                trials: result.trials,
                fallback: result.fallback as u8,
            };
        }
        *out = into_buffer(result.block.to_bytes());
        Ok(())
    })
}

/// Decodes a block stream. With a null `codec` the code is rebuilt from the
/// block header. On success `out` holds the bits packed MSB-first and
/// `n_bits` their count. `fallback` may be null.
///
/// # Safety
/// `stream` must point to `len` readable bytes; `out` and `n_bits` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gfqc_decompress(
    codec: *const GfqcCodec,
    stream: *const u8,
    len: usize,
    out: *mut GfqcBuffer,
    n_bits: *mut usize,
    fallback: *mut u8,
) -> GfqcStatus {
    if stream.is_null() {
        return null("stream");
    }
    if out.is_null() || n_bits.is_null() {
        return null("out");
    }
    guard(|| {
        let block = CompressedBlock::from_bytes(std::slice::from_raw_parts(stream, len)).map_err(fail)?;
        let owned;
        let c = if codec.is_null() {
            owned = Codec::for_block(&block).map_err(fail)?;
            &owned
        } else {
            &(*codec).inner
        };
        let rec = c.decode(&block).map_err(fail)?;
        *n_bits = rec.bits.len();
        if !fallback.is_null() {
            *fallback = block.fallback as u8;
        }
        *out = into_buffer(pack_bits(&rec.bits));
        Ok(())
    })
}

/// Releases a buffer returned by the library and resets it to empty.
///
/// # Safety
/// `buf` must be null or point to a buffer filled by this library that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn gfqc_buffer_free(buf: *mut GfqcBuffer) {
    if buf.is_null() || (*buf).data.is_null() {
        return;
    }
    let b = &mut *buf;
    drop(Box::from_raw(ptr::slice_from_raw_parts_mut(b.data, b.len)));
    b.data = ptr::null_mut();
    b.len = 0;
}

/// Shannon distortion bound `D*` for rate `rate` in `[0, 1]`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gfqc_rd_bound(rate: f64, out: *mut f64) -> GfqcStatus {
    if out.is_null() {
        return null("out");
    }
    match gfqc::analysis::rd_bound(rate) {
        Ok(d) => {
            *out = d;
            GfqcStatus::Ok
        }
        Err(e) => fail(e),
    }
}
