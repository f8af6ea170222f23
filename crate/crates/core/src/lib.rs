//! Streaming multiband neural vocoder for 1.6 kb/s coded speech.
//!
//! The decoder turns a stream of 64-bit packets (40 ms of pitch, energy,
//! and Bark-cepstrum parameters each) into 16 kHz wideband audio. The
//! generator is a stack of feature-conditioned residual blocks over
//! causal convolutions, run sample-parallel at a quarter of the output
//! rate and expanded to fullband by a four-band synthesis filter bank.
//!
//! Everything is organized around frame-by-frame streaming: every
//! operator keeps explicit history state so that feeding one 10 ms frame
//! at a time produces bit-identical output to decoding the whole
//! utterance at once. The offline path exists as the reference the
//! streaming path is tested against.
//!
//! Crate layout:
//!
//! - [`bitstream`] — packet packing/parsing, stream container,
//!   codebooks, and dequantization into conditioning frames.
//! - [`dsp`] — streamed causal convolutions, channel normalization,
//!   gated activation, rational upsampling, and the synthesis filter
//!   bank.
//! - [`model`] — generator configuration, weight container, layer
//!   wiring, and complexity accounting.
//! - [`engine`] — the per-stream decode session (frame, packet, and
//!   offline entry points) and the latency budget.
//! - [`wav`] — minimal RIFF reader/writers for the CLI.

pub mod bitstream;
pub mod dsp;
pub mod engine;
pub mod error;
pub mod model;
pub mod selftest;
pub mod wav;

pub use error::{Error, Result};

/// Output sample rate in Hz.
pub const SAMPLE_RATE: u32 = 16_000;
/// Samples produced per 10 ms conditioning frame.
pub const FRAME_SAMPLES: usize = 160;
/// Samples produced per 40 ms packet.
pub const PACKET_SAMPLES: usize = FRAME_SAMPLES * bitstream::FRAMES_PER_PACKET;
