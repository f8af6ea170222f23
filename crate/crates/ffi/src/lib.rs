//! C ABI for the streaming speech decoder.
//!
//! The surface is a single opaque decoder handle over the core
//! engine: open it from weight/codebook files (or seeded, for tests
//! and benchmarks), feed it 8-byte packets or raw feature frames, and
//! read back frames of 16 kHz PCM. Every call returns a status code;
//! panics are caught at the boundary and reported as
//! `TADEVOC_PANIC` rather than unwinding into C.
//!
//! The generated header lands in `include/tadevoc.h` on every build.
//! Pointer arguments must be valid for the stated lengths; a decoder
//! must only be used from one thread at a time (open several decoders
//! for parallel streams — they share nothing mutable).

#![allow(non_camel_case_types)]

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use tadevoc::bitstream::{parse_packet, CodebookSet, FeatureFrame, CEPSTRUM_DIM, PACKET_BYTES};
use tadevoc::engine::{latency_report, Session};
use tadevoc::model::{
    build_generator, mac_count, random_weights, GeneratorConfig, WeightStore,
};
use tadevoc::Error;

/// Status of one call. Anything other than `TADEVOC_OK` leaves the
/// decoder state unchanged.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum tadevoc_status {
    /// Success.
    TADEVOC_OK = 0,
    /// A required pointer argument was null.
    TADEVOC_NULL_ARG = 1,
    /// File could not be read.
    TADEVOC_IO = 2,
    /// Bytes do not parse as the expected container format.
    TADEVOC_FORMAT = 3,
    /// Well-formed input violating a consistency contract.
    TADEVOC_VALIDATION = 4,
    /// An index field exceeds its coded range.
    TADEVOC_RANGE = 5,
    /// An output buffer has the wrong length.
    TADEVOC_BUFFER_SIZE = 6,
    /// Internal panic caught at the boundary; the decoder should be
    /// closed.
    TADEVOC_PANIC = 7,
}

use tadevoc_status::*;

/// Opaque decoder handle: one coded stream's worth of state.
#[repr(C)]
pub struct tadevoc_decoder {
    _opaque: [u8; 0],
}

struct Inner {
    session: Session,
    books: CodebookSet,
}

fn status_of(e: &Error) -> tadevoc_status {
    match e {
        Error::Io(_) => TADEVOC_IO,
        Error::Format(_) => TADEVOC_FORMAT,
        Error::Validation(_) => TADEVOC_VALIDATION,
        Error::Range { .. } => TADEVOC_RANGE,
    }
}

unsafe fn inner<'a>(dec: *const tadevoc_decoder) -> Option<&'a Inner> {
    (dec as *const Inner).as_ref()
}

unsafe fn inner_mut<'a>(dec: *mut tadevoc_decoder) -> Option<&'a mut Inner> {
    (dec as *mut Inner).as_mut()
}

fn boxed(inner: Inner) -> *mut tadevoc_decoder {
    Box::into_raw(Box::new(inner)) as *mut tadevoc_decoder
}

/// Runs `f`, converting panics into `TADEVOC_PANIC`.
fn guarded(f: impl FnOnce() -> tadevoc_status) -> tadevoc_status {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(TADEVOC_PANIC)
}

unsafe fn path_from(ptr: *const c_char) -> Option<&'static str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

/// Opens a decoder from a weight container and codebook tables on
/// disk. On success `*out` owns the decoder; release it with
/// `tadevoc_decoder_close`.
///
/// # Safety
/// `weights_path` and `codebooks_path` are NUL-terminated UTF-8;
/// `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tadevoc_decoder_open(
    weights_path: *const c_char,
    codebooks_path: *const c_char,
    out: *mut *mut tadevoc_decoder,
) -> tadevoc_status {
    if out.is_null() {
        return TADEVOC_NULL_ARG;
    }
    let (Some(weights_path), Some(codebooks_path)) =
        (path_from(weights_path), path_from(codebooks_path))
    else {
        return TADEVOC_NULL_ARG;
    };
    guarded(|| {
        let open = || -> tadevoc::Result<Inner> {
            let store = WeightStore::from_bytes(&std::fs::read(weights_path)?)?;
            let config = GeneratorConfig::from_doc(store.config_doc())?;
            let gen = Arc::new(build_generator(&config, &store)?);
            let books = CodebookSet::from_bytes(&std::fs::read(codebooks_path)?)?;
            books.validate()?;
            Ok(Inner {
                session: Session::new(gen),
                books,
            })
        };
        match open() {
            Ok(i) => {
                *out = boxed(i);
                TADEVOC_OK
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Opens a decoder over deterministic seeded weights and the default
/// codebooks — no files involved. Intended for tests and benchmarks.
///
/// # Safety
/// `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tadevoc_decoder_seeded(
    seed: u64,
    out: *mut *mut tadevoc_decoder,
) -> tadevoc_status {
    if out.is_null() {
        return TADEVOC_NULL_ARG;
    }
    guarded(|| {
        let config = GeneratorConfig::default();
        let gen = match build_generator(&config, &random_weights(&config, seed)) {
            Ok(g) => Arc::new(g),
            Err(e) => return status_of(&e),
        };
        *out = boxed(Inner {
            session: Session::new(gen),
            books: CodebookSet::default(),
        });
        TADEVOC_OK
    })
}

/// Releases a decoder. Null is a no-op.
///
/// # Safety
/// `dec` came from an open call and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tadevoc_decoder_close(dec: *mut tadevoc_decoder) {
    if !dec.is_null() {
        drop(Box::from_raw(dec as *mut Inner));
    }
}

/// Returns the decoder to its exact cold-start state.
///
/// # Safety
/// `dec` is a live decoder or null (no-op).
#[no_mangle]
pub unsafe extern "C" fn tadevoc_decoder_reset(dec: *mut tadevoc_decoder) {
    if let Some(inner) = inner_mut(dec) {
        inner.session.reset();
    }
}

/// PCM samples produced per 10 ms feature frame (160), or 0 on null.
///
/// # Safety
/// `dec` is a live decoder or null.
#[no_mangle]
pub unsafe extern "C" fn tadevoc_frame_samples(dec: *const tadevoc_decoder) -> usize {
    inner(dec).map_or(0, |i| i.session.generator().frame_samples())
}

/// PCM samples produced per 40 ms packet (640), or 0 on null.
///
/// # Safety
/// `dec` is a live decoder or null.
#[no_mangle]
pub unsafe extern "C" fn tadevoc_packet_samples(dec: *const tadevoc_decoder) -> usize {
    inner(dec).map_or(0, |i| i.session.generator().frame_samples() * 4)
}

/// Decodes one 8-byte coded packet into PCM in [-1, 1]. `pcm_len`
/// must equal `tadevoc_packet_samples(dec)`.
///
/// # Safety
/// `packet` holds `packet_len` readable bytes; `pcm` holds `pcm_len`
/// writable floats; `dec` is a live decoder.
#[no_mangle]
pub unsafe extern "C" fn tadevoc_decode_packet(
    dec: *mut tadevoc_decoder,
    packet: *const u8,
    packet_len: usize,
    pcm: *mut f32,
    pcm_len: usize,
) -> tadevoc_status {
    let Some(inner) = inner_mut(dec) else {
        return TADEVOC_NULL_ARG;
    };
    if packet.is_null() || pcm.is_null() {
        return TADEVOC_NULL_ARG;
    }
    if packet_len != PACKET_BYTES {
        return TADEVOC_FORMAT;
    }
    if pcm_len != inner.session.generator().frame_samples() * 4 {
        return TADEVOC_BUFFER_SIZE;
    }
    let bytes = std::slice::from_raw_parts(packet, packet_len);
    let out = std::slice::from_raw_parts_mut(pcm, pcm_len);
    guarded(|| {
        let mut run = || -> tadevoc::Result<()> {
            let pkt = parse_packet(bytes)?;
            let decoded = inner.session.decode_packet(&pkt, &inner.books)?;
            out.copy_from_slice(decoded);
            Ok(())
        };
        match run() {
            Ok(()) => TADEVOC_OK,
            Err(e) => status_of(&e),
        }
    })
}

/// Decodes one already-dequantized feature frame: an 18-value
/// cepstrum (energy in the first value), a pitch-lag index, and a
/// pitch correlation in [0, 1]. `pcm_len` must equal
/// `tadevoc_frame_samples(dec)`.
///
/// # Safety
/// `cepstrum` holds 18 readable floats; `pcm` holds `pcm_len`
/// writable floats; `dec` is a live decoder.
#[no_mangle]
pub unsafe extern "C" fn tadevoc_decode_features(
    dec: *mut tadevoc_decoder,
    cepstrum: *const f32,
    pitch_lag_idx: u8,
    pitch_corr: f32,
    pcm: *mut f32,
    pcm_len: usize,
) -> tadevoc_status {
    let Some(inner) = inner_mut(dec) else {
        return TADEVOC_NULL_ARG;
    };
    if cepstrum.is_null() || pcm.is_null() {
        return TADEVOC_NULL_ARG;
    }
    if pcm_len != inner.session.generator().frame_samples() {
        return TADEVOC_BUFFER_SIZE;
    }
    let cep = std::slice::from_raw_parts(cepstrum, CEPSTRUM_DIM);
    let out = std::slice::from_raw_parts_mut(pcm, pcm_len);
    guarded(|| {
        let mut frame = FeatureFrame::zero();
        frame.cepstrum.copy_from_slice(cep);
        frame.pitch_lag_idx = pitch_lag_idx;
        frame.pitch_corr = pitch_corr;
        match inner.session.decode_frame(&frame) {
            Ok(decoded) => {
                out.copy_from_slice(decoded);
                TADEVOC_OK
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Closed-form multiply-accumulate rate of the decoder's network, per
/// second of audio. 0 on null.
///
/// # Safety
/// `dec` is a live decoder or null.
#[no_mangle]
pub unsafe extern "C" fn tadevoc_macs_per_second(dec: *const tadevoc_decoder) -> u64 {
    inner(dec).map_or(0, |i| {
        mac_count(i.session.generator().config()).total_macs_per_second
    })
}

/// Stored parameter count of the decoder's network. 0 on null.
///
/// # Safety
/// `dec` is a live decoder or null.
#[no_mangle]
pub unsafe extern "C" fn tadevoc_parameter_count(dec: *const tadevoc_decoder) -> u64 {
    inner(dec).map_or(0, |i| {
        i.session
            .generator()
            .config()
            .tensor_manifest()
            .iter()
            .map(|(_, shape)| shape.iter().product::<usize>() as u64)
            .sum()
    })
}

/// End-to-end delay budget in milliseconds: upstream encoder plus
/// measured filter-bank group delay (the network itself adds none).
/// 0 on null.
///
/// # Safety
/// `dec` is a live decoder or null.
#[no_mangle]
pub unsafe extern "C" fn tadevoc_total_delay_ms(dec: *const tadevoc_decoder) -> f64 {
    inner(dec).map_or(0.0, |i| latency_report(i.session.generator()).total_ms())
}

/// Static description of a status code; never null.
#[no_mangle]
pub extern "C" fn tadevoc_status_message(status: tadevoc_status) -> *const c_char {
    let msg: &'static [u8] = match status {
        TADEVOC_OK => b"ok\0",
        TADEVOC_NULL_ARG => b"required pointer argument was null\0",
        TADEVOC_IO => b"file could not be read\0",
        TADEVOC_FORMAT => b"bytes do not parse as the expected format\0",
        TADEVOC_VALIDATION => b"input violates a consistency contract\0",
        TADEVOC_RANGE => b"index exceeds its coded range\0",
        TADEVOC_BUFFER_SIZE => b"output buffer has the wrong length\0",
        TADEVOC_PANIC => b"internal panic caught at the boundary\0",
    };
    msg.as_ptr() as *const c_char
}
