//! Minimal RIFF/WAVE output for decoded audio: mono 16-bit PCM by
//! default, 32-bit float behind the same API for test precision.
//!
//! Quantization to 16 bits rounds half away from zero and hard-clips,
//! so ±1.0 maps to ±32767/−32768 and a write-then-read round trip
//! returns the exact sample payload.

use std::io::{Read, Write};

use crate::error::{Error, Result};

// --- Constants ---

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;

/// Scales a real sample in [−1, 1] to a 16-bit level, rounding half
/// away from zero and clipping outside the representable range.
pub fn quantize_i16(x: f32) -> i16 {
    let scaled = x * 32767.0;
    let rounded = if scaled >= 0.0 {
        (scaled + 0.5).floor()
    } else {
        (scaled - 0.5).ceil()
    };
    rounded.clamp(-32768.0, 32767.0) as i16
}

fn chunk(out: &mut Vec<u8>, tag: &[u8; 4], body: &[u8]) {
    out.extend_from_slice(tag);
    out.extend_from_slice(&(body.len() as u32).to_le_bytes());
    out.extend_from_slice(body);
}

fn fmt_chunk(format: u16, sample_rate: u32, bits: u16) -> Vec<u8> {
    let block_align = bits / 8; // mono
    let byte_rate = sample_rate * block_align as u32;
    let mut body = Vec::with_capacity(16);
    body.extend_from_slice(&format.to_le_bytes());
    body.extend_from_slice(&1u16.to_le_bytes()); // channels
    body.extend_from_slice(&sample_rate.to_le_bytes());
    body.extend_from_slice(&byte_rate.to_le_bytes());
    body.extend_from_slice(&block_align.to_le_bytes());
    body.extend_from_slice(&bits.to_le_bytes());
    body
}

fn riff(fmt: Vec<u8>, data: Vec<u8>) -> Vec<u8> {
    let mut inner = Vec::with_capacity(4 + fmt.len() + data.len() + 16);
    inner.extend_from_slice(b"WAVE");
    chunk(&mut inner, b"fmt ", &fmt);
    chunk(&mut inner, b"data", &data);
    let mut out = Vec::with_capacity(inner.len() + 8);
    chunk(&mut out, b"RIFF", &inner);
    out
}

/// Writes mono 16-bit PCM, quantizing via [`quantize_i16`].
pub fn write_wav_i16<W: Write>(w: &mut W, sample_rate: u32, samples: &[f32]) -> Result<()> {
    let mut data = Vec::with_capacity(samples.len() * 2);
    for &s in samples {
        data.extend_from_slice(&quantize_i16(s).to_le_bytes());
    }
    w.write_all(&riff(fmt_chunk(FORMAT_PCM, sample_rate, 16), data))?;
    Ok(())
}

/// Writes mono 32-bit float samples unquantized.
pub fn write_wav_f32<W: Write>(w: &mut W, sample_rate: u32, samples: &[f32]) -> Result<()> {
    let mut data = Vec::with_capacity(samples.len() * 4);
    for &s in samples {
        data.extend_from_slice(&s.to_le_bytes());
    }
    w.write_all(&riff(fmt_chunk(FORMAT_FLOAT, sample_rate, 32), data))?;
    Ok(())
}

/// Decoded contents of a mono WAV file.
#[derive(Debug, Clone, PartialEq)]
pub enum WavSamples {
    Pcm16(Vec<i16>),
    Float32(Vec<f32>),
}

/// Reads a mono WAV written by this module (or any plain RIFF file with
/// a 16-bit PCM or 32-bit float data chunk).
pub fn read_wav<R: Read>(r: &mut R) -> Result<(u32, WavSamples)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::format("not a RIFF/WAVE file"));
    }
    let riff_len = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if riff_len + 8 != bytes.len() {
        return Err(Error::format("RIFF length disagrees with file size"));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // format, channels, rate, bits
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let tag: [u8; 4] = bytes[pos..pos + 4].try_into().unwrap();
        let len = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body = bytes
            .get(pos + 8..pos + 8 + len)
            .ok_or_else(|| Error::format("chunk overruns the file"))?;
        match &tag {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(Error::format("fmt chunk too short"));
                }
                fmt = Some((
                    u16::from_le_bytes(body[0..2].try_into().unwrap()),
                    u16::from_le_bytes(body[2..4].try_into().unwrap()),
                    u32::from_le_bytes(body[4..8].try_into().unwrap()),
                    u16::from_le_bytes(body[14..16].try_into().unwrap()),
                ));
            }
            b"data" => data = Some(body),
            _ => {} // skip unknown chunks
        }
        // chunks are word-aligned; odd bodies carry one pad byte
        pos += 8 + len + (len & 1);
    }

    let (format, channels, rate, bits) =
        fmt.ok_or_else(|| Error::format("missing fmt chunk"))?;
    let data = data.ok_or_else(|| Error::format("missing data chunk"))?;
    if channels != 1 {
        return Err(Error::format(format!("expected mono, got {channels} channels")));
    }
    match (format, bits) {
        (FORMAT_PCM, 16) => {
            if data.len() % 2 != 0 {
                return Err(Error::format("PCM16 data chunk has odd length"));
            }
            let samples = data
                .chunks_exact(2)
                .map(|c| i16::from_le_bytes(c.try_into().unwrap()))
                .collect();
            Ok((rate, WavSamples::Pcm16(samples)))
        }
        (FORMAT_FLOAT, 32) => {
            if data.len() % 4 != 0 {
                return Err(Error::format("float data chunk length not a multiple of 4"));
            }
            let samples = data
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            Ok((rate, WavSamples::Float32(samples)))
        }
        _ => Err(Error::format(format!(
            "unsupported WAV encoding: format {format}, {bits} bits"
        ))),
    }
}
