//! Bit-exact packing and parsing of 64-bit coded packets, the stream
//! container format, and dequantization of packets into per-frame
//! conditioning features.
//!
//! A packet carries 40 ms of speech parameters in seven MSB-first fields:
//!
//! | field                | bits |
//! |----------------------|------|
//! | pitch lag            | 6    |
//! | pitch modulation     | 3    |
//! | pitch correlation    | 2    |
//! | energy               | 7    |
//! | cepstrum absolute    | 30   |
//! | cepstrum delta       | 13   |
//! | cepstrum interp rule | 3    |
//!
//! 64 bits per 40 ms packet gives a fixed 1600 b/s stream.

mod codebooks;

pub use codebooks::{dequantize_packet, CodebookSet};

use crate::error::{Error, Result};

/// Number of Bark-cepstral coefficients per frame (c0 carries energy).
pub const CEPSTRUM_DIM: usize = 18;
/// Frames of conditioning per packet (40 ms packet, 10 ms frames).
pub const FRAMES_PER_PACKET: usize = 4;
/// Size of a packed packet in bytes.
pub const PACKET_BYTES: usize = 8;
/// Packet duration in milliseconds.
pub const PACKET_MS: u32 = 40;
/// Fixed stream bitrate in bits per second (64 bits / 40 ms).
pub const BITRATE_BPS: u32 = (PACKET_BYTES as u32 * 8) * 1000 / PACKET_MS;

/// Bit widths of the packet fields, in wire order.
pub const FIELD_WIDTHS: [(&str, u32); 7] = [
    ("pitch_lag_idx", 6),
    ("pitch_mod_idx", 3),
    ("pitch_corr_idx", 2),
    ("energy_idx", 7),
    ("cepstrum_abs_idx", 30),
    ("cepstrum_delta_idx", 13),
    ("cepstrum_interp_idx", 3),
];

/// One parsed 64-bit packet. Field order matches the wire layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CodedPacket {
    /// 6-bit pitch lag index.
    pub pitch_lag_idx: u8,
    /// 3-bit pitch modulation index (per-frame lag offset pattern).
    pub pitch_mod_idx: u8,
    /// 2-bit pitch correlation index.
    pub pitch_corr_idx: u8,
    /// 7-bit energy index.
    pub energy_idx: u8,
    /// 30-bit cepstrum absolute-coding index.
    pub cepstrum_abs_idx: u32,
    /// 13-bit cepstrum delta-coding index.
    pub cepstrum_delta_idx: u16,
    /// 3-bit cepstrum interpolation rule index.
    pub cepstrum_interp_idx: u8,
}

impl CodedPacket {
    fn fields(&self) -> [u64; 7] {
        [
            self.pitch_lag_idx as u64,
            self.pitch_mod_idx as u64,
            self.pitch_corr_idx as u64,
            self.energy_idx as u64,
            self.cepstrum_abs_idx as u64,
            self.cepstrum_delta_idx as u64,
            self.cepstrum_interp_idx as u64,
        ]
    }

    /// Checks every field against its coded bit width.
    pub fn validate(&self) -> Result<()> {
        for (value, (name, width)) in self.fields().iter().zip(FIELD_WIDTHS) {
            let max = (1u64 << width) - 1;
            if *value > max {
                return Err(Error::Range {
                    field: name,
                    value: *value,
                    max,
                });
            }
        }
        Ok(())
    }
}

/// Packs a packet into 8 bytes, fields MSB-first in wire order.
pub fn pack_packet(pkt: &CodedPacket) -> Result<[u8; PACKET_BYTES]> {
    pkt.validate()?;
    let mut word = 0u64;
    for (value, (_, width)) in pkt.fields().iter().zip(FIELD_WIDTHS) {
        word = (word << width) | *value;
    }
    Ok(word.to_be_bytes())
}

/// Parses 8 bytes into a packet. Inverse of [`pack_packet`].
pub fn parse_packet(bytes: &[u8]) -> Result<CodedPacket> {
    let bytes: &[u8; PACKET_BYTES] = bytes
        .try_into()
        .map_err(|_| Error::format(format!("packet must be 8 bytes, got {}", bytes.len())))?;
    let mut word = u64::from_be_bytes(*bytes);
    let mut values = [0u64; 7];
    for (slot, (_, width)) in values.iter_mut().zip(FIELD_WIDTHS).rev() {
        *slot = word & ((1u64 << width) - 1);
        word >>= width;
    }
    Ok(CodedPacket {
        pitch_lag_idx: values[0] as u8,
        pitch_mod_idx: values[1] as u8,
        pitch_corr_idx: values[2] as u8,
        energy_idx: values[3] as u8,
        cepstrum_abs_idx: values[4] as u32,
        cepstrum_delta_idx: values[5] as u16,
        cepstrum_interp_idx: values[6] as u8,
    })
}

/// Dequantized conditioning for one 10 ms frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureFrame {
    /// Bark-cepstral coefficients; `cepstrum[0]` carries energy.
    pub cepstrum: [f32; CEPSTRUM_DIM],
    /// Pitch lag index in `[0, 63]`.
    pub pitch_lag_idx: u8,
    /// Voicing strength in `[0, 1]`.
    pub pitch_corr: f32,
}

impl FeatureFrame {
    /// A silent frame: zero cepstrum, lag 0, zero correlation.
    pub fn zero() -> Self {
        FeatureFrame {
            cepstrum: [0.0; CEPSTRUM_DIM],
            pitch_lag_idx: 0,
            pitch_corr: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cepstrum.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("cepstrum contains non-finite values"));
        }
        if self.pitch_lag_idx > 63 {
            return Err(Error::Range {
                field: "pitch_lag_idx",
                value: self.pitch_lag_idx as u64,
                max: 63,
            });
        }
        if !(0.0..=1.0).contains(&self.pitch_corr) {
            return Err(Error::validation(format!(
                "pitch_corr {} outside [0, 1]",
                self.pitch_corr
            )));
        }
        Ok(())
    }
}

// --- Stream container ---

/// Container magic bytes.
pub const STREAM_MAGIC: [u8; 4] = *b"SMG1";
/// Current container format version.
pub const STREAM_VERSION: u16 = 1;

/// Parsed container header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamInfo {
    pub version: u16,
    pub sample_rate: u32,
    pub packet_count: u32,
}

impl StreamInfo {
    /// Stream duration in seconds (packets are 40 ms each).
    pub fn duration_secs(&self) -> f64 {
        self.packet_count as f64 * PACKET_MS as f64 / 1000.0
    }

    /// Coded bitrate in bits per second; fixed by the packet layout.
    pub fn bitrate_bps(&self) -> u32 {
        BITRATE_BPS
    }
}

/// Serializes packets into a stream container.
///
/// Header is little-endian: magic, version u16, sample rate u32, packet
/// count u32. The payload is the big-endian bit-packed packets.
pub fn write_stream(sample_rate: u32, packets: &[CodedPacket]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(14 + packets.len() * PACKET_BYTES);
    out.extend_from_slice(&STREAM_MAGIC);
    out.extend_from_slice(&STREAM_VERSION.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(packets.len() as u32).to_le_bytes());
    for pkt in packets {
        out.extend_from_slice(&pack_packet(pkt)?);
    }
    Ok(out)
}

/// Parses a stream container into its header and packets.
pub fn read_stream(bytes: &[u8]) -> Result<(StreamInfo, Vec<CodedPacket>)> {
    if bytes.len() < 14 {
        return Err(Error::format("stream header truncated"));
    }
    if bytes[0..4] != STREAM_MAGIC {
        return Err(Error::format("bad stream magic"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != STREAM_VERSION {
        return Err(Error::format(format!(
            "unsupported stream version {version}"
        )));
    }
    let sample_rate = u32::from_le_bytes(bytes[6..10].try_into().unwrap());
    let packet_count = u32::from_le_bytes(bytes[10..14].try_into().unwrap());
    let payload = &bytes[14..];
    let expected = packet_count as usize * PACKET_BYTES;
    if payload.len() != expected {
        return Err(Error::format(format!(
            "payload length {} does not match {} packets",
            payload.len(),
            packet_count
        )));
    }
    let packets = payload
        .chunks_exact(PACKET_BYTES)
        .map(parse_packet)
        .collect::<Result<Vec<_>>>()?;
    Ok((
        StreamInfo {
            version,
            sample_rate,
            packet_count,
        },
        packets,
    ))
}
